#ifndef PCS_MOMENTS_HPP
#define PCS_MOMENTS_HPP

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "pcs/chisq.hpp"
#include "pcs/dataset.hpp"

namespace pcs {

// (center, scatter) pair with cached Cholesky factor and determinant.
// `singular()` is set when the factorization fails or a pivot falls below
// 1e-12 times the largest diagonal entry.
class LocationScatter {
public:
    LocationScatter(Eigen::VectorXd center, Eigen::MatrixXd scatter)
        : center_(std::move(center)) {
        scatter_ = 0.5 * (scatter + scatter.transpose());
        llt_.compute(scatter_);
        const double max_diag = scatter_.diagonal().maxCoeff();
        singular_ = llt_.info() != Eigen::Success || max_diag <= 0.0;
        if (!singular_) {
            const Eigen::VectorXd d = llt_.matrixL().toDenseMatrix().diagonal();
            double logdet = 0.0;
            for (Eigen::Index i = 0; i < d.size(); ++i) {
                if (d[i] * d[i] < 1e-12 * max_diag) singular_ = true;
                logdet += 2.0 * std::log(d[i]);
            }
            det_ = singular_ ? 0.0 : std::exp(logdet);
            log_det_ = singular_ ? -std::numeric_limits<double>::infinity() : logdet;
        }
    }

    const Eigen::VectorXd& center() const { return center_; }
    const Eigen::MatrixXd& scatter() const { return scatter_; }
    bool singular() const { return singular_; }
    double det() const { return det_; }
    double log_det() const { return log_det_; }
    std::size_t dim() const { return static_cast<std::size_t>(center_.size()); }

    const Eigen::LLT<Eigen::MatrixXd>& factor() const { return llt_; }

private:
    Eigen::VectorXd center_;
    Eigen::MatrixXd scatter_;
    Eigen::LLT<Eigen::MatrixXd> llt_;
    bool singular_ = true;
    double det_ = 0.0;
    double log_det_ = -std::numeric_limits<double>::infinity();
};

struct DegenerateSubsetError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct SingularScatterError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Default subset size: floor((n+p+1)/2) at alpha = 0.5, otherwise
// max(ceil(alpha*n), floor((n+p+1)/2)).
inline std::size_t default_h(std::size_t n, std::size_t p, double alpha) {
    if (n <= p) throw std::invalid_argument("default_h: need n > p");
    if (!(alpha >= 0.5 && alpha <= 1.0)) {
        throw std::invalid_argument("default_h: alpha must be in [0.5, 1]");
    }
    const std::size_t floor_half = (n + p + 1) / 2;
    const std::size_t ceil_an =
        static_cast<std::size_t>(std::ceil(alpha * static_cast<double>(n) - 1e-9));
    return std::max(ceil_an, floor_half);
}

struct AlgoParams {
    double alpha = 0.5;
    std::size_t h = 0;           // subset size, 0 means default_h(n, p, alpha)
    std::size_t num_directions = 25;   // K
    std::size_t num_stages = 3;        // L
    std::size_t num_starts = 100;      // M_p
    std::uint64_t seed = 0;

    void validate(std::size_t n, std::size_t p) const {
        if (n <= p) throw std::invalid_argument("AlgoParams: need n > p");
        const std::size_t h_min = (n + p + 1) / 2;
        if (h != 0 && (h < h_min || h > n)) {
            throw std::invalid_argument("AlgoParams: h out of range");
        }
        if (num_directions < 1 || num_stages < 1 || num_starts < 1) {
            throw std::invalid_argument("AlgoParams: K, L, M_p must be >= 1");
        }
    }

    std::size_t resolve_h(std::size_t n, std::size_t p) const {
        return h != 0 ? h : default_h(n, p, alpha);
    }
};

// Sample mean and covariance (divisor |H|-1) over the rows in H.
inline LocationScatter subset_moments(const Dataset& data, const SubsetIndex& H) {
    const std::size_t p = data.p();
    if (H.size() < p + 1) {
        throw DegenerateSubsetError("subset_moments: need |H| >= p+1");
    }
    Eigen::VectorXd center = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p));
    for (std::size_t i : H) center += data.row(i).transpose();
    center /= static_cast<double>(H.size());

    Eigen::MatrixXd scatter = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(p),
                                                    static_cast<Eigen::Index>(p));
    for (std::size_t i : H) {
        const Eigen::VectorXd d = data.row(i).transpose() - center;
        scatter.noalias() += d * d.transpose();
    }
    scatter /= static_cast<double>(H.size() - 1);
    return LocationScatter(std::move(center), std::move(scatter));
}

// Squared Mahalanobis distance through the cached factorization.
inline double mahalanobis_sq(const Eigen::VectorXd& x, const LocationScatter& ls) {
    if (ls.singular()) {
        throw SingularScatterError("mahalanobis_sq: singular scatter");
    }
    const Eigen::VectorXd d = x - ls.center();
    const Eigen::VectorXd y = ls.factor().matrixL().solve(d);
    return y.squaredNorm();
}

inline Eigen::VectorXd mahalanobis_sq_all(const Dataset& data,
                                          const LocationScatter& ls) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(data.n()));
    for (std::size_t i = 0; i < data.n(); ++i) {
        out[static_cast<Eigen::Index>(i)] = mahalanobis_sq(data.row(i).transpose(), ls);
    }
    return out;
}

// Median with the mean-of-central-pair convention for even counts.
inline double median(std::vector<double> v) {
    if (v.empty()) throw std::invalid_argument("median: empty");
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
    double m = v[mid];
    if (v.size() % 2 == 0) {
        const double lo = *std::max_element(
            v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
        m = 0.5 * (m + lo);
    }
    return m;
}

// Hard-threshold reweighting: keep i with
//   d2_i <= chi2_{0.975,p} * (median_j d2_j / chi2_{0.5,p})
inline SubsetIndex reweight_hard_threshold(const Dataset& data,
                                           const LocationScatter& ls_star) {
    if (ls_star.singular()) {
        throw SingularScatterError("reweight_hard_threshold: singular scatter");
    }
    const std::size_t p = data.p();
    const Eigen::VectorXd d2 = mahalanobis_sq_all(data, ls_star);
    std::vector<double> all(d2.data(), d2.data() + d2.size());
    const double med = median(all);
    const double cutoff =
        chisq_quantile(0.975, p) * (med / chisq_quantile(0.5, p));
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < data.n(); ++i) {
        if (d2[static_cast<Eigen::Index>(i)] <= cutoff) keep.push_back(i);
    }
    return SubsetIndex(std::move(keep));
}

}  // namespace pcs

#endif
