#ifndef PCS_BASELINES_HPP
#define PCS_BASELINES_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "pcs/dataset.hpp"
#include "pcs/fastpcs.hpp"
#include "pcs/moments.hpp"
#include "pcs/parallel.hpp"
#include "pcs/rng.hpp"

namespace pcs {

enum class BaselineMethod { SDE, MCD, MVE };

struct BaselineResult {
    BaselineMethod method = BaselineMethod::SDE;
    SubsetIndex h_star;
    std::optional<LocationScatter> fit;
    Eigen::VectorXd outlyingness;  // d_MD wrt (t_*, S_*)
    double criterion = std::numeric_limits<double>::quiet_NaN();
    bool exact_fit = false;
    std::optional<Direction> subspace;
};

namespace detail {

inline BaselineResult baseline_exact_fit(const Dataset& data, std::size_t h,
                                         BaselineMethod method,
                                         const Direction& subspace) {
    BaselineResult res;
    res.method = method;
    res.exact_fit = true;
    res.subspace = subspace;
    Eigen::VectorXd resid = data.matrix() * subspace.a;
    resid.array() -= 1.0;
    res.outlyingness = resid.cwiseAbs() / subspace.a.norm();
    res.h_star = SubsetIndex(smallest_k(res.outlyingness, h));
    res.fit = subset_moments(data, res.h_star);
    res.criterion = 0.0;
    return res;
}

}  // namespace detail

// Stahel-Donoho projection scores P_M over M random directions spanned by
// p-subsets of the whole sample. mad is the unscaled median absolute
// deviation; directions with mad zero are dropped.
inline Eigen::VectorXd sde_scores(const Dataset& data, std::size_t M, Rng& rng) {
    const std::size_t n = data.n();
    if (M < 1) throw std::invalid_argument("sde_scores: M must be >= 1");
    const SubsetIndex all = SubsetIndex::full(n);

    Eigen::VectorXd score = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    std::size_t used = 0;
    std::vector<double> proj(n), dev(n);
    for (std::size_t m = 0; m < M; ++m) {
        Direction d;
        try {
            d = sample_direction(data, all, rng);
        } catch (const DegenerateCandidateError&) {
            continue;
        }
        const Eigen::VectorXd y = data.matrix() * d.a;
        for (std::size_t i = 0; i < n; ++i) proj[i] = y[static_cast<Eigen::Index>(i)];
        const double med = median(proj);
        for (std::size_t i = 0; i < n; ++i) dev[i] = std::fabs(proj[i] - med);
        const double mad = median(dev);
        if (mad == 0.0) continue;
        ++used;
        for (std::size_t i = 0; i < n; ++i) {
            const double v = dev[i] / mad;
            auto& s = score[static_cast<Eigen::Index>(i)];
            if (v > s) s = v;
        }
    }
    if (used == 0) {
        throw EstimationFailureError("sde_scores: all directions degenerate");
    }
    return score;
}

inline BaselineResult sde_outlyingness(const Dataset& data, std::size_t M,
                                       std::size_t h, Rng& rng) {
    const Eigen::VectorXd score = sde_scores(data, M, rng);
    BaselineResult res;
    res.method = BaselineMethod::SDE;
    res.h_star = SubsetIndex(detail::smallest_k(score, h));
    LocationScatter fit = subset_moments(data, res.h_star);
    if (fit.singular()) {
        if (auto subspace = detect_exact_fit(data, h)) {
            return detail::baseline_exact_fit(data, h, BaselineMethod::SDE, *subspace);
        }
        throw EstimationFailureError("sde_outlyingness: singular fit");
    }
    res.outlyingness = mahalanobis_sq_all(data, fit).cwiseSqrt();
    res.fit = std::move(fit);
    return res;
}

// Simplified FastMCD: random (p+1)-starts, C-steps to convergence, keep
// the candidate with smallest determinant.
inline BaselineResult fastmcd_run(const Dataset& data, const AlgoParams& params) {
    const std::size_t n = data.n();
    const std::size_t p = data.p();
    if (n <= p) throw std::invalid_argument("fastmcd_run: need n > p");
    params.validate(n, p);
    const std::size_t h = params.resolve_h(n, p);

    struct Cand {
        SubsetIndex H;
        double log_det = std::numeric_limits<double>::infinity();
        bool ok = false;
    };
    std::vector<Cand> cand(params.num_starts);

    parallel_for(params.num_starts, [&](std::size_t m) {
        Rng rng(params.seed, 0x4d43ull << 32 | m);  // separate substream family
        std::vector<std::size_t> start;
        rng.sample_without_replacement(n, p + 1, start);
        SubsetIndex H(std::move(start));
        double prev_log_det = std::numeric_limits<double>::infinity();
        for (int step = 0; step < 20; ++step) {
            LocationScatter ls = subset_moments(data, H);
            if (ls.singular()) return;  // candidate discarded
            const Eigen::VectorXd d2 = mahalanobis_sq_all(data, ls);
            SubsetIndex next(detail::smallest_k(d2, h));
            LocationScatter next_ls = subset_moments(data, next);
            if (next_ls.singular()) return;
            const double ld = next_ls.log_det();
            H = std::move(next);
            // det relative decrease below 1e-9 is a log-det decrease below ~1e-9
            if (std::isfinite(prev_log_det) && prev_log_det - ld <= 1e-9) {
                prev_log_det = ld;
                break;
            }
            prev_log_det = ld;
        }
        cand[m].H = std::move(H);
        cand[m].log_det = prev_log_det;
        cand[m].ok = true;
    });

    std::size_t best = params.num_starts;
    for (std::size_t m = 0; m < params.num_starts; ++m) {
        if (!cand[m].ok) continue;
        if (best == params.num_starts || cand[m].log_det < cand[best].log_det) best = m;
    }
    if (best == params.num_starts) {
        if (auto subspace = detect_exact_fit(data, h)) {
            return detail::baseline_exact_fit(data, h, BaselineMethod::MCD, *subspace);
        }
        throw EstimationFailureError("fastmcd_run: all candidates discarded");
    }

    BaselineResult res;
    res.method = BaselineMethod::MCD;
    res.h_star = cand[best].H;
    LocationScatter fit = subset_moments(data, res.h_star);
    res.criterion = fit.det();
    res.outlyingness = mahalanobis_sq_all(data, fit).cwiseSqrt();
    res.fit = std::move(fit);
    return res;
}

// Simplified FastMVE: score each (p+1)-start by det(S_m) * (h-th smallest
// d2_MD)^p, then one trim to h from the winner.
inline BaselineResult fastmve_run(const Dataset& data, const AlgoParams& params) {
    const std::size_t n = data.n();
    const std::size_t p = data.p();
    if (n <= p) throw std::invalid_argument("fastmve_run: need n > p");
    params.validate(n, p);
    const std::size_t h = params.resolve_h(n, p);

    struct Cand {
        SubsetIndex H;
        double log_proxy = std::numeric_limits<double>::infinity();
        bool ok = false;
    };
    std::vector<Cand> cand(params.num_starts);

    parallel_for(params.num_starts, [&](std::size_t m) {
        Rng rng(params.seed, 0x4d5645ull << 32 | m);
        std::vector<std::size_t> start;
        rng.sample_without_replacement(n, p + 1, start);
        SubsetIndex H(std::move(start));
        LocationScatter ls = subset_moments(data, H);
        if (ls.singular()) return;
        Eigen::VectorXd d2 = mahalanobis_sq_all(data, ls);
        std::vector<double> v(d2.data(), d2.data() + d2.size());
        std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(h - 1),
                         v.end());
        const double r2 = v[h - 1];
        if (!(r2 > 0.0)) return;
        cand[m].H = std::move(H);
        cand[m].log_proxy = ls.log_det() + static_cast<double>(p) * std::log(r2);
        cand[m].ok = true;
    });

    std::size_t best = params.num_starts;
    for (std::size_t m = 0; m < params.num_starts; ++m) {
        if (!cand[m].ok) continue;
        if (best == params.num_starts || cand[m].log_proxy < cand[best].log_proxy)
            best = m;
    }
    if (best == params.num_starts) {
        if (auto subspace = detect_exact_fit(data, h)) {
            return detail::baseline_exact_fit(data, h, BaselineMethod::MVE, *subspace);
        }
        throw EstimationFailureError("fastmve_run: all candidates discarded");
    }

    // one C-step-style trim from the winning ellipsoid
    LocationScatter win = subset_moments(data, cand[best].H);
    const Eigen::VectorXd d2 = mahalanobis_sq_all(data, win);
    BaselineResult res;
    res.method = BaselineMethod::MVE;
    res.h_star = SubsetIndex(detail::smallest_k(d2, h));
    LocationScatter fit = subset_moments(data, res.h_star);
    if (fit.singular()) {
        if (auto subspace = detect_exact_fit(data, h)) {
            return detail::baseline_exact_fit(data, h, BaselineMethod::MVE, *subspace);
        }
        throw EstimationFailureError("fastmve_run: singular fit");
    }
    res.criterion = std::exp(cand[best].log_proxy);
    res.outlyingness = mahalanobis_sq_all(data, fit).cwiseSqrt();
    res.fit = std::move(fit);
    return res;
}

}  // namespace pcs

#endif
