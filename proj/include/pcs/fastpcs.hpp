#ifndef PCS_FASTPCS_HPP
#define PCS_FASTPCS_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <vector>

#include "pcs/dataset.hpp"
#include "pcs/moments.hpp"
#include "pcs/parallel.hpp"
#include "pcs/rng.hpp"

namespace pcs {

// Hyperplane {x : x'a = 1} through the p observations in span_rows.
struct Direction {
    Eigen::VectorXd a;
    std::vector<std::size_t> span_rows;
};

// Raised when a candidate cannot produce usable directions; the driver
// discards the candidate and falls back to an exact-fit probe.
struct DegenerateCandidateError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct EstimationFailureError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

constexpr std::size_t kDirectionRetryCap = 100;

// Hyperplane through p rows drawn uniformly from H. Singular draws are
// retried up to the cap.
inline Direction sample_direction(const Dataset& data, const SubsetIndex& H,
                                  Rng& rng) {
    const std::size_t p = data.p();
    if (H.size() < p) {
        throw DegenerateCandidateError("sample_direction: |H| < p");
    }
    std::vector<std::size_t> pick;
    Eigen::MatrixXd A(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p));
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(p));
    for (std::size_t attempt = 0; attempt < kDirectionRetryCap; ++attempt) {
        rng.sample_without_replacement(H.size(), p, pick);
        for (std::size_t r = 0; r < p; ++r) {
            A.row(static_cast<Eigen::Index>(r)) = data.row(H[pick[r]]);
        }
        Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
        if (lu.isInvertible()) {
            Direction d;
            d.a = lu.solve(ones);
            d.span_rows.resize(p);
            for (std::size_t r = 0; r < p; ++r) d.span_rows[r] = H[pick[r]];
            return d;
        }
    }
    throw DegenerateCandidateError("sample_direction: retry cap exhausted");
}

inline double proj_distance_sq(const Eigen::VectorXd& x, const Direction& d) {
    const double r = x.dot(d.a) - 1.0;
    return r * r / d.a.squaredNorm();
}

// d_P^2 for every row at once.
inline Eigen::VectorXd proj_distance_sq_all(const Dataset& data, const Direction& d) {
    Eigen::VectorXd r = data.matrix() * d.a;
    r.array() -= 1.0;
    return r.array().square() / d.a.squaredNorm();
}

namespace detail {

// Indices of the h smallest values; boundary ties go to the lower index.
inline std::vector<std::size_t> smallest_k(const Eigen::VectorXd& values,
                                           std::size_t k) {
    std::vector<std::size_t> order(static_cast<std::size_t>(values.size()));
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::nth_element(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k - 1),
                     order.end(), [&](std::size_t a, std::size_t b) {
                         const double va = values[static_cast<Eigen::Index>(a)];
                         const double vb = values[static_cast<Eigen::Index>(b)];
                         return va < vb || (va == vb && a < b);
                     });
    order.resize(k);
    return order;
}

}  // namespace detail

inline SubsetIndex optimal_overlap_subset(const Dataset& data, const Direction& d,
                                          std::size_t h) {
    if (h > data.n()) throw std::invalid_argument("optimal_overlap_subset: h > n");
    const Eigen::VectorXd dist = proj_distance_sq_all(data, d);
    return SubsetIndex(detail::smallest_k(dist, h));
}

// Incongruence of H along one direction:
//   log avg_{i in H} d_P^2 - log avg_{i in H_mk} d_P^2.
// Zero denominator with positive numerator yields +inf; both zero yields 0
// and sets the exact-fit side-signal when provided.
inline double incongruence_direction(const Dataset& data, const SubsetIndex& H,
                                     const Direction& d, std::size_t h,
                                     bool* exact_fit_signal = nullptr) {
    const Eigen::VectorXd dist = proj_distance_sq_all(data, d);
    double sum_h = 0.0;
    for (std::size_t i : H) sum_h += dist[static_cast<Eigen::Index>(i)];
    const std::vector<std::size_t> opt = detail::smallest_k(dist, h);
    double sum_opt = 0.0;
    for (std::size_t i : opt) sum_opt += dist[static_cast<Eigen::Index>(i)];

    const double avg_h = sum_h / static_cast<double>(H.size());
    const double avg_opt = sum_opt / static_cast<double>(h);
    if (avg_opt == 0.0) {
        if (avg_h == 0.0) {
            if (exact_fit_signal) *exact_fit_signal = true;
            return 0.0;
        }
        return std::numeric_limits<double>::infinity();
    }
    return std::log(avg_h) - std::log(avg_opt);
}

// Average of incongruence_direction over a direction set.
inline double incongruence(const Dataset& data, const SubsetIndex& H,
                           const std::vector<Direction>& dirs, std::size_t h,
                           bool* exact_fit_signal = nullptr) {
    if (dirs.empty()) throw std::invalid_argument("incongruence: no directions");
    double sum = 0.0;
    for (const Direction& d : dirs) {
        sum += incongruence_direction(data, H, d, h, exact_fit_signal);
    }
    return sum / static_cast<double>(dirs.size());
}

// D_i: mean over directions of d_P^2 normalized by the subset average.
// Directions whose subset average is zero are dropped; if all drop, the
// candidate is degenerate.
inline Eigen::VectorXd relative_outlyingness(const Dataset& data,
                                             const SubsetIndex& H,
                                             const std::vector<Direction>& dirs) {
    if (dirs.empty()) throw std::invalid_argument("relative_outlyingness: no directions");
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(data.n()));
    std::size_t used = 0;
    for (const Direction& d : dirs) {
        const Eigen::VectorXd dist = proj_distance_sq_all(data, d);
        double denom = 0.0;
        for (std::size_t i : H) denom += dist[static_cast<Eigen::Index>(i)];
        denom /= static_cast<double>(H.size());
        if (denom == 0.0) continue;
        acc += dist / denom;
        ++used;
    }
    if (used == 0) {
        throw DegenerateCandidateError("relative_outlyingness: all directions degenerate");
    }
    return acc / static_cast<double>(used);
}

struct CandidateState {
    SubsetIndex H;
    std::vector<Direction> directions;
    std::optional<double> incongruence;
};

// Subset size at stage l of L; the last stage lands exactly on h.
inline std::size_t concentration_size(std::size_t n, std::size_t p, std::size_t l,
                                      std::size_t L, std::size_t h) {
    if (l == L) return h;
    return (n - p - 1) * l / (2 * L) + p + 1;
}

// Concentration loop: grow the candidate from p+1 members to h over L
// stages, each stage keeping the q observations with smallest D_i. The
// final stage is forced to exactly h.
inline CandidateState concentrate(const Dataset& data, const SubsetIndex& start,
                                  const AlgoParams& params, Rng& rng) {
    const std::size_t n = data.n();
    const std::size_t p = data.p();
    if (start.size() != p + 1) {
        throw std::invalid_argument("concentrate: start must have p+1 members");
    }
    const std::size_t h = params.resolve_h(n, p);
    const std::size_t L = params.num_stages;

    CandidateState state;
    state.H = start;
    for (std::size_t l = 1; l <= L; ++l) {
        state.directions.clear();
        for (std::size_t k = 0; k < params.num_directions; ++k) {
            state.directions.push_back(sample_direction(data, state.H, rng));
        }
        const Eigen::VectorXd D = relative_outlyingness(data, state.H, state.directions);
        const std::size_t q = concentration_size(n, p, l, L, h);
        state.H = SubsetIndex(detail::smallest_k(D, q));
    }
    return state;
}

struct PcsResult {
    SubsetIndex h_star;
    std::optional<LocationScatter> fit;
    Eigen::VectorXd outlyingness;   // d_MD per row, or subspace distance on exact fit
    bool exact_fit = false;
    std::optional<Direction> subspace;
    std::vector<double> candidate_log;  // final I per candidate, NaN if degenerate
};

// Exhaustive-then-randomized probe for h or more observations on a common
// hyperplane. Deterministic for a given dataset.
inline std::optional<Direction> detect_exact_fit(const Dataset& data, std::size_t h) {
    const std::size_t n = data.n();
    const std::size_t p = data.p();
    if (h > n || p < 1 || n < p) return std::nullopt;
    const double tol = 1e-9 * data.scale();

    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(p));
    Eigen::MatrixXd A(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p));
    auto try_subset = [&](const std::vector<std::size_t>& rows)
        -> std::optional<Direction> {
        for (std::size_t r = 0; r < p; ++r) {
            A.row(static_cast<Eigen::Index>(r)) = data.row(rows[r]);
        }
        Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
        if (!lu.isInvertible()) return std::nullopt;
        Direction d;
        d.a = lu.solve(ones);
        const double norm = d.a.norm();
        if (!(norm > 0.0)) return std::nullopt;
        Eigen::VectorXd resid = data.matrix() * d.a;
        resid.array() -= 1.0;
        std::size_t on_plane = 0;
        for (Eigen::Index i = 0; i < resid.size(); ++i) {
            if (std::fabs(resid[i]) / norm <= tol) ++on_plane;
        }
        if (on_plane >= h) {
            d.span_rows = rows;
            return d;
        }
        return std::nullopt;
    };

    // At most n-h rows are off the subspace, so the first n-h+p rows always
    // contain p on-subspace rows. Enumerate p-subsets of that window.
    const std::size_t window = std::min(n, n - h + p);
    std::vector<std::size_t> comb(p);
    std::iota(comb.begin(), comb.end(), std::size_t{0});
    std::size_t solves = 0;
    const std::size_t solve_cap = 200000;
    if (window >= p) {
        for (;;) {
            if (auto d = try_subset(comb)) return d;
            if (++solves >= solve_cap) break;
            // next lexicographic combination
            std::size_t i = p;
            while (i > 0 && comb[i - 1] == window - p + i - 1) --i;
            if (i == 0) break;
            ++comb[i - 1];
            for (std::size_t j = i; j < p; ++j) comb[j] = comb[j - 1] + 1;
        }
    }
    if (solves >= solve_cap) {
        Rng rng(0x70c5f17ull);
        std::vector<std::size_t> pick;
        for (std::size_t t = 0; t < 20000; ++t) {
            rng.sample_without_replacement(n, p, pick);
            if (auto d = try_subset(pick)) return d;
        }
    }
    return std::nullopt;
}

namespace detail {

// Builds the exact-fit result for a subspace containing >= h observations.
inline PcsResult exact_fit_result(const Dataset& data, std::size_t h,
                                  const Direction& subspace,
                                  std::vector<double> candidate_log) {
    PcsResult res;
    res.exact_fit = true;
    res.subspace = subspace;
    res.candidate_log = std::move(candidate_log);
    Eigen::VectorXd resid = data.matrix() * subspace.a;
    resid.array() -= 1.0;
    res.outlyingness = resid.cwiseAbs() / subspace.a.norm();
    res.h_star = SubsetIndex(smallest_k(res.outlyingness, h));
    res.fit = subset_moments(data, res.h_star);
    return res;
}

}  // namespace detail

// Full FastPCS: M_p concentrated candidates scored by the incongruence
// index, minimum wins (ties by candidate ordinal). `scoring_dirs`, when
// given, replaces the random final-scoring draw; used by oracle tests.
inline PcsResult fastpcs_run(const Dataset& data, const AlgoParams& params,
                             const std::vector<Direction>* scoring_dirs = nullptr) {
    const std::size_t n = data.n();
    const std::size_t p = data.p();
    if (n <= p) throw std::invalid_argument("fastpcs_run: need n > p");
    params.validate(n, p);
    const std::size_t h = params.resolve_h(n, p);
    const std::size_t m_starts = params.num_starts;

    struct Scored {
        SubsetIndex H;
        double I = std::numeric_limits<double>::quiet_NaN();
        bool degenerate = false;
        bool exact_signal = false;
    };
    std::vector<Scored> cand(m_starts);

    parallel_for(m_starts, [&](std::size_t m) {
        Rng rng(params.seed, static_cast<std::uint64_t>(m));
        try {
            std::vector<std::size_t> start_rows;
            rng.sample_without_replacement(n, p + 1, start_rows);
            CandidateState st =
                concentrate(data, SubsetIndex(std::move(start_rows)), params, rng);
            std::vector<Direction> dirs;
            if (!scoring_dirs) {
                for (std::size_t k = 0; k < params.num_directions; ++k) {
                    dirs.push_back(sample_direction(data, st.H, rng));
                }
            }
            bool exact_signal = false;
            const double I = incongruence(
                data, st.H, scoring_dirs ? *scoring_dirs : dirs, h, &exact_signal);
            cand[m].H = std::move(st.H);
            cand[m].I = I;
            cand[m].exact_signal = exact_signal;
        } catch (const DegenerateCandidateError&) {
            cand[m].degenerate = true;
        }
    });

    std::vector<double> candidate_log(m_starts);
    std::size_t best = m_starts;
    bool any_degenerate = false;
    bool any_exact_signal = false;
    for (std::size_t m = 0; m < m_starts; ++m) {
        candidate_log[m] = cand[m].I;
        any_degenerate |= cand[m].degenerate;
        any_exact_signal |= cand[m].exact_signal;
        if (cand[m].degenerate) continue;
        if (best == m_starts || cand[m].I < cand[best].I) best = m;
    }

    if (best == m_starts) {
        if (auto subspace = detect_exact_fit(data, h)) {
            return detail::exact_fit_result(data, h, *subspace, std::move(candidate_log));
        }
        throw EstimationFailureError("fastpcs_run: all candidates degenerate");
    }

    PcsResult res;
    res.h_star = cand[best].H;
    res.candidate_log = std::move(candidate_log);
    LocationScatter fit = subset_moments(data, res.h_star);
    if (fit.singular() || any_degenerate || any_exact_signal) {
        if (auto subspace = detect_exact_fit(data, h)) {
            return detail::exact_fit_result(data, h, *subspace,
                                            std::move(res.candidate_log));
        }
        if (fit.singular()) {
            throw EstimationFailureError(
                "fastpcs_run: singular fit without detectable exact fit");
        }
    }
    res.outlyingness = mahalanobis_sq_all(data, fit).cwiseSqrt();
    res.fit = std::move(fit);
    return res;
}

}  // namespace pcs

#endif
