#ifndef PCS_SIMLAB_HPP
#define PCS_SIMLAB_HPP

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <vector>

#include "pcs/chisq.hpp"
#include "pcs/dataset.hpp"
#include "pcs/moments.hpp"
#include "pcs/rng.hpp"

namespace pcs {

enum class ContaminationConfig { None, Shift, PointMass, BarrowWheel };
enum class CoreDistribution { Normal, Cauchy };

struct ContaminationSpec {
    ContaminationConfig config = ContaminationConfig::None;
    double eps = 0.0;        // contamination fraction, [0, 0.5)
    double nu = 0.0;         // separation; ignored for BarrowWheel and None
    CoreDistribution core = CoreDistribution::Normal;
    std::size_t p = 2;
    std::size_t n = 100;

    void validate() const {
        if (!(eps >= 0.0 && eps < 0.5)) {
            throw std::invalid_argument("ContaminationSpec: eps must be in [0, 0.5)");
        }
        if (nu < 0.0) throw std::invalid_argument("ContaminationSpec: nu >= 0");
        if (n <= p) throw std::invalid_argument("ContaminationSpec: need n > p");
    }
};

struct LabeledSample {
    Dataset data;
    SubsetIndex outlier_index;  // I_c
    LocationScatter truth;      // (mu_u, Sigma_u)
};

// Number of starting subsets so that the probability of at least one
// uncontaminated (p+1)-subset is at least 99 percent.
inline std::size_t num_starts(double eps0, std::size_t p) {
    if (!(eps0 >= 0.0 && eps0 < 1.0)) {
        throw std::invalid_argument("num_starts: eps0 must be in [0, 1)");
    }
    if (p < 1) throw std::invalid_argument("num_starts: p must be >= 1");
    const double clean = std::pow(1.0 - eps0, static_cast<double>(p + 1));
    if (clean >= 1.0) return 1;
    const double denom = std::log1p(-clean);
    const double m = std::log(0.01) / denom;
    return static_cast<std::size_t>(std::max(1.0, std::ceil(m)));
}

inline double round_half_up(double x) { return std::floor(x + 0.5); }

inline std::size_t outlier_count(double eps, std::size_t n) {
    return static_cast<std::size_t>(round_half_up(eps * static_cast<double>(n)));
}

namespace detail {

inline Eigen::MatrixXd core_draws(CoreDistribution core, std::size_t rows,
                                  std::size_t p, Rng& rng) {
    Eigen::MatrixXd x(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(p));
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < p; ++j) {
            x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rng.normal();
        }
        if (core == CoreDistribution::Cauchy) {
            // spherical t with 1 dof: z / |w|
            double w = 0.0;
            while (w == 0.0) w = rng.normal();
            x.row(static_cast<Eigen::Index>(i)) /= std::fabs(w);
        }
    }
    return x;
}

inline LocationScatter standard_truth(std::size_t p) {
    return LocationScatter(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p)),
                           Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(p),
                                                     static_cast<Eigen::Index>(p)));
}

// Solve for the shift delta along e1 so that the smallest outlier norm
// equals target exactly: min_i ||delta e1 + z_i|| = target. Scans for the
// largest bracketing interval, then bisects.
inline double solve_shift_delta(const Eigen::MatrixXd& z, double target) {
    auto min_norm = [&](double delta) {
        double best = std::numeric_limits<double>::infinity();
        for (Eigen::Index i = 0; i < z.rows(); ++i) {
            Eigen::VectorXd v = z.row(i).transpose();
            v[0] += delta;
            best = std::min(best, v.norm());
        }
        return best;
    };
    const double span = target + z.rowwise().norm().maxCoeff() + 1.0;
    auto f = [&](double delta) { return min_norm(delta) - target; };
    // largest root: scan from +span downward for the sign change
    const int grid = 4096;
    double hi = span;
    double lo = std::numeric_limits<double>::quiet_NaN();
    for (int g = 1; g <= grid; ++g) {
        const double x = span - 2.0 * span * static_cast<double>(g) / grid;
        if (f(x) <= 0.0) { lo = x; break; }
        hi = x;
    }
    if (std::isnan(lo)) {
        throw std::runtime_error("gen_shift: requested nu unattainable for this batch");
    }
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (f(mid) <= 0.0) lo = mid; else hi = mid;
        if (hi - lo < 1e-13 * (1.0 + std::fabs(hi))) break;
    }
    return lo;
}

inline LabeledSample shifted_sample(const ContaminationSpec& spec, Rng& rng,
                                    double outlier_sd) {
    spec.validate();
    const std::size_t m = outlier_count(spec.eps, spec.n);
    const std::size_t good = spec.n - m;
    Eigen::MatrixXd x(static_cast<Eigen::Index>(spec.n),
                      static_cast<Eigen::Index>(spec.p));
    x.topRows(static_cast<Eigen::Index>(good)) =
        core_draws(spec.core, good, spec.p, rng);

    std::vector<std::size_t> idx;
    if (m > 0) {
        Eigen::MatrixXd z = outlier_sd * core_draws(spec.core, m, spec.p, rng);
        const double target = spec.nu * std::sqrt(chisq_quantile(0.99, spec.p));
        const double delta = solve_shift_delta(z, target);
        z.col(0).array() += delta;
        x.bottomRows(static_cast<Eigen::Index>(m)) = z;
        for (std::size_t i = good; i < spec.n; ++i) idx.push_back(i);
    }
    return LabeledSample{Dataset(std::move(x)), SubsetIndex(std::move(idx)),
                         standard_truth(spec.p)};
}

}  // namespace detail

// Clean sample from the core distribution; truth is (0, I).
inline LabeledSample gen_clean(const ContaminationSpec& spec, Rng& rng) {
    spec.validate();
    return LabeledSample{
        Dataset(detail::core_draws(spec.core, spec.n, spec.p, rng)),
        SubsetIndex(), detail::standard_truth(spec.p)};
}

// Separation of the outliers from the clean model (Section 3 metric).
inline double nu_distance(const std::vector<Eigen::VectorXd>& outliers,
                          const LocationScatter& truth, std::size_t p) {
    if (outliers.empty()) throw std::invalid_argument("nu_distance: no outliers");
    if (truth.singular()) throw SingularScatterError("nu_distance: singular truth");
    double min_d2 = std::numeric_limits<double>::infinity();
    for (const auto& x : outliers) {
        min_d2 = std::min(min_d2, mahalanobis_sq(x, truth));
    }
    return std::sqrt(min_d2 / chisq_quantile(0.99, p));
}

inline double nu_distance(const LabeledSample& sample) {
    std::vector<Eigen::VectorXd> outliers;
    for (std::size_t i : sample.outlier_index) {
        outliers.push_back(sample.data.row(i).transpose());
    }
    return nu_distance(outliers, sample.truth, sample.data.p());
}

// Shift contamination: Sigma_c = I, mu_c = delta e1 with delta tuned so the
// batch satisfies nu exactly.
inline LabeledSample gen_shift(const ContaminationSpec& spec, Rng& rng) {
    if (spec.config != ContaminationConfig::Shift && spec.eps > 0.0) {
        throw std::invalid_argument("gen_shift: config mismatch");
    }
    return detail::shifted_sample(spec, rng, 1.0);
}

// Near point-mass: Sigma_c = 1e-4 I.
inline LabeledSample gen_pointmass(const ContaminationSpec& spec, Rng& rng) {
    if (spec.config != ContaminationConfig::PointMass) {
        throw std::invalid_argument("gen_pointmass: config mismatch");
    }
    return detail::shifted_sample(spec, rng, 1e-2);
}

// Barrow wheel: a disk of good data flattened along the first axis, an
// axle of outliers through it, then a random rotation of everything.
inline LabeledSample gen_barrow_wheel(const ContaminationSpec& spec, Rng& rng) {
    spec.validate();
    if (spec.p < 2) throw std::invalid_argument("gen_barrow_wheel: need p >= 2");
    const std::size_t m = outlier_count(spec.eps, spec.n);
    const std::size_t good = spec.n - m;
    const std::size_t p = spec.p;

    Eigen::MatrixXd x(static_cast<Eigen::Index>(spec.n), static_cast<Eigen::Index>(p));
    for (std::size_t i = 0; i < good; ++i) {
        x(static_cast<Eigen::Index>(i), 0) = 0.1 * rng.normal();
        for (std::size_t j = 1; j < p; ++j) {
            x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rng.normal();
        }
    }
    std::vector<std::size_t> idx;
    for (std::size_t i = good; i < spec.n; ++i) {
        const double sign = rng.uniform01() < 0.5 ? -1.0 : 1.0;
        x(static_cast<Eigen::Index>(i), 0) = sign * std::fabs(rng.normal() + 4.0);
        for (std::size_t j = 1; j < p; ++j) {
            x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                0.1 * rng.normal();
        }
        idx.push_back(i);
    }

    // random rotation: QR of a Gaussian matrix, sign-corrected
    Eigen::MatrixXd g(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p));
    for (Eigen::Index i = 0; i < g.rows(); ++i) {
        for (Eigen::Index j = 0; j < g.cols(); ++j) g(i, j) = rng.normal();
    }
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    Eigen::MatrixXd q = qr.householderQ();
    const Eigen::MatrixXd r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Eigen::Index j = 0; j < q.cols(); ++j) {
        if (r(j, j) < 0.0) q.col(j) = -q.col(j);
    }

    x = x * q.transpose();
    Eigen::MatrixXd sigma = Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(p),
                                                      static_cast<Eigen::Index>(p));
    sigma(0, 0) = 0.01;
    LocationScatter truth(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p)),
                          q * sigma * q.transpose());
    return LabeledSample{Dataset(std::move(x)), SubsetIndex(std::move(idx)),
                         std::move(truth)};
}

inline LabeledSample generate(const ContaminationSpec& spec, Rng& rng) {
    const std::size_t m = outlier_count(spec.eps, spec.n);
    if (m == 0 || spec.config == ContaminationConfig::None) return gen_clean(spec, rng);
    switch (spec.config) {
        case ContaminationConfig::Shift: return gen_shift(spec, rng);
        case ContaminationConfig::PointMass: return gen_pointmass(spec, rng);
        case ContaminationConfig::BarrowWheel: return gen_barrow_wheel(spec, rng);
        default: return gen_clean(spec, rng);
    }
}

// Condition-number bias between a fitted scatter and the truth, after
// normalizing both to unit determinant.
inline double bias(const Eigen::MatrixXd& fit_scatter,
                   const Eigen::MatrixXd& truth_scatter) {
    const auto p = fit_scatter.rows();
    if (p != fit_scatter.cols() || p != truth_scatter.rows() ||
        p != truth_scatter.cols()) {
        throw std::invalid_argument("bias: dimension mismatch");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es_g(fit_scatter);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es_t(truth_scatter);
    if (es_g.eigenvalues().minCoeff() <= 0.0 || es_t.eigenvalues().minCoeff() <= 0.0) {
        throw std::invalid_argument("bias: inputs must be positive definite");
    }
    const double dim = static_cast<double>(p);
    const double logdet_g = es_g.eigenvalues().array().log().sum();
    // G^{-1/2} with G = |S|^{-1/p} S; the normalization is a scalar factor
    const Eigen::VectorXd inv_sqrt =
        (es_g.eigenvalues().array() * std::exp(-logdet_g / dim)).rsqrt();
    const Eigen::MatrixXd g_inv_half = es_g.eigenvectors() * inv_sqrt.asDiagonal() *
                                       es_g.eigenvectors().transpose();
    const double logdet_t = es_t.eigenvalues().array().log().sum();
    const Eigen::MatrixXd gamma = truth_scatter * std::exp(-logdet_t / dim);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g_inv_half * gamma * g_inv_half);
    return std::log(es.eigenvalues().maxCoeff()) - std::log(es.eigenvalues().minCoeff());
}

// Fraction of true outliers captured inside H.
inline double misclassification(const SubsetIndex& I_c, const SubsetIndex& H) {
    if (I_c.empty()) throw std::invalid_argument("misclassification: empty I_c");
    std::size_t hits = 0;
    for (std::size_t i : I_c) {
        if (H.contains(i)) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(I_c.size());
}

}  // namespace pcs

#endif
