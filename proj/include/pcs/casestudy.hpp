#ifndef PCS_CASESTUDY_HPP
#define PCS_CASESTUDY_HPP

#include <Eigen/Dense>

#include <cstddef>
#include <stdexcept>
#include <string>

#include "pcs/dataset.hpp"
#include "pcs/moments.hpp"

namespace pcs {

// Concrete Slump Test experiments. The raw dataset is 103 observations of
// 10 measurements: the first 78 rows (J_O) pre-date the last 25 (J_N).
enum class CaseStudyVariant { i, ii, iii, iv };

constexpr std::size_t kConcreteRows = 103;
constexpr std::size_t kConcreteCols = 10;
constexpr std::size_t kConcreteOldGroup = 78;

struct CaseStudyData {
    CaseStudyVariant variant;
    Dataset data;
    SubsetIndex j_old;  // J_O, always the first 78 rows
    SubsetIndex j_new;  // the outlying group (25 or 50 rows)
};

inline CaseStudyVariant parse_variant(const std::string& s) {
    if (s == "i") return CaseStudyVariant::i;
    if (s == "ii") return CaseStudyVariant::ii;
    if (s == "iii") return CaseStudyVariant::iii;
    if (s == "iv") return CaseStudyVariant::iv;
    throw std::invalid_argument("variant must be one of i, ii, iii, iv");
}

inline const char* variant_name(CaseStudyVariant v) {
    switch (v) {
        case CaseStudyVariant::i: return "i";
        case CaseStudyVariant::ii: return "ii";
        case CaseStudyVariant::iii: return "iii";
        case CaseStudyVariant::iv: return "iv";
    }
    return "?";
}

// Builds one experiment from the raw 103 x 10 matrix:
//   i:   the raw data
//   ii:  outliers pulled halfway towards the mean of the first 78 rows
//   iii: 25 extra outliers, midpoints of the first outlier with each outlier
//   iv:  (ii) then midpoints appended the same way
inline CaseStudyData build_case_study(const Eigen::MatrixXd& raw,
                                      CaseStudyVariant variant) {
    if (static_cast<std::size_t>(raw.rows()) != kConcreteRows ||
        static_cast<std::size_t>(raw.cols()) != kConcreteCols) {
        throw std::invalid_argument(
            "case study expects a 103 x 10 matrix, got " +
            std::to_string(raw.rows()) + " x " + std::to_string(raw.cols()));
    }
    const Eigen::Index old_n = static_cast<Eigen::Index>(kConcreteOldGroup);
    const Eigen::Index out_n = static_cast<Eigen::Index>(kConcreteRows - kConcreteOldGroup);
    const Eigen::RowVectorXd t_old = raw.topRows(old_n).colwise().mean();

    Eigen::MatrixXd x = raw;
    if (variant == CaseStudyVariant::ii || variant == CaseStudyVariant::iv) {
        for (Eigen::Index i = 0; i < out_n; ++i) {
            x.row(old_n + i) = 0.5 * (raw.row(old_n + i) + t_old);
        }
    }
    if (variant == CaseStudyVariant::iii || variant == CaseStudyVariant::iv) {
        Eigen::MatrixXd extended(x.rows() + out_n, x.cols());
        extended.topRows(x.rows()) = x;
        for (Eigen::Index j = 0; j < out_n; ++j) {
            extended.row(x.rows() + j) = 0.5 * (x.row(old_n) + x.row(old_n + j));
        }
        x = std::move(extended);
    }

    std::vector<std::size_t> old_idx, new_idx;
    for (std::size_t i = 0; i < kConcreteOldGroup; ++i) old_idx.push_back(i);
    for (std::size_t i = kConcreteOldGroup; i < static_cast<std::size_t>(x.rows()); ++i) {
        new_idx.push_back(i);
    }
    return CaseStudyData{variant, Dataset(std::move(x)),
                         SubsetIndex(std::move(old_idx)),
                         SubsetIndex(std::move(new_idx))};
}

}  // namespace pcs

#endif
