#ifndef PCS_DATASET_HPP
#define PCS_DATASET_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace pcs {

// n x p observation matrix, rows are observations. Requires n > p.
class Dataset {
public:
    explicit Dataset(Eigen::MatrixXd rows) : x_(std::move(rows)) {
        if (x_.rows() < 1 || x_.cols() < 1) {
            throw std::invalid_argument("Dataset: empty matrix");
        }
        if (!x_.allFinite()) {
            throw std::invalid_argument("Dataset: non-finite entry");
        }
    }

    std::size_t n() const { return static_cast<std::size_t>(x_.rows()); }
    std::size_t p() const { return static_cast<std::size_t>(x_.cols()); }

    const Eigen::MatrixXd& matrix() const { return x_; }
    Eigen::MatrixXd::ConstRowXpr row(std::size_t i) const {
        return x_.row(static_cast<Eigen::Index>(i));
    }

    // largest absolute coordinate, used as the scale for exact-fit tolerances
    double scale() const {
        const double m = x_.cwiseAbs().maxCoeff();
        return m > 0.0 ? m : 1.0;
    }

private:
    Eigen::MatrixXd x_;
};

// Strictly increasing set of row indices.
class SubsetIndex {
public:
    SubsetIndex() = default;

    explicit SubsetIndex(std::vector<std::size_t> idx) : idx_(std::move(idx)) {
        std::sort(idx_.begin(), idx_.end());
        for (std::size_t i = 1; i < idx_.size(); ++i) {
            if (idx_[i] == idx_[i - 1]) {
                throw std::invalid_argument("SubsetIndex: duplicate index");
            }
        }
    }

    static SubsetIndex full(std::size_t n) {
        std::vector<std::size_t> idx(n);
        for (std::size_t i = 0; i < n; ++i) idx[i] = i;
        return SubsetIndex(std::move(idx));
    }

    std::size_t size() const { return idx_.size(); }
    bool empty() const { return idx_.empty(); }
    std::size_t operator[](std::size_t i) const { return idx_[i]; }
    const std::vector<std::size_t>& indices() const { return idx_; }

    bool contains(std::size_t i) const {
        return std::binary_search(idx_.begin(), idx_.end(), i);
    }

    bool operator==(const SubsetIndex& other) const { return idx_ == other.idx_; }

    auto begin() const { return idx_.begin(); }
    auto end() const { return idx_.end(); }

private:
    std::vector<std::size_t> idx_;
};

}  // namespace pcs

#endif
