#ifndef PCS_SWEEP_HPP
#define PCS_SWEEP_HPP

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "pcs/baselines.hpp"
#include "pcs/fastpcs.hpp"
#include "pcs/moments.hpp"
#include "pcs/parallel.hpp"
#include "pcs/simlab.hpp"

namespace pcs {

enum class Method { FastPCS, SDE, MCD, MVE };

inline const char* method_name(Method m) {
    switch (m) {
        case Method::FastPCS: return "fastpcs";
        case Method::SDE: return "sde";
        case Method::MCD: return "mcd";
        case Method::MVE: return "mve";
    }
    return "?";
}

inline const char* config_name(ContaminationConfig c) {
    switch (c) {
        case ContaminationConfig::None: return "none";
        case ContaminationConfig::Shift: return "shift";
        case ContaminationConfig::PointMass: return "pointmass";
        case ContaminationConfig::BarrowWheel: return "barrowwheel";
    }
    return "?";
}

inline const char* core_name(CoreDistribution c) {
    return c == CoreDistribution::Normal ? "normal" : "cauchy";
}

struct SweepConfig {
    std::vector<std::size_t> p_list;
    std::vector<std::size_t> n_list;  // empty: n = 25 p
    std::vector<double> eps_list;
    std::vector<ContaminationConfig> configs;
    std::vector<CoreDistribution> cores;
    double alpha = 0.5;
    std::size_t replications = 100;
    std::vector<double> nu_list;  // empty: nu ~ uniform(0, 10) per replication
    std::uint64_t seed = 0;
    std::vector<Method> methods;

    void validate() const {
        if (p_list.empty() || eps_list.empty() || configs.empty() || cores.empty() ||
            methods.empty()) {
            throw std::invalid_argument("SweepConfig: empty grid axis");
        }
        if (!n_list.empty() && n_list.size() != p_list.size()) {
            throw std::invalid_argument("SweepConfig: n list must match p list");
        }
        if (replications < 1) throw std::invalid_argument("SweepConfig: reps >= 1");
        if (!(alpha >= 0.5 && alpha <= 1.0)) {
            throw std::invalid_argument("SweepConfig: alpha in [0.5, 1]");
        }
        for (double e : eps_list) {
            if (!(e >= 0.0 && e < 0.5)) {
                throw std::invalid_argument("SweepConfig: eps in [0, 0.5)");
            }
        }
    }
};

// One row of the result table; column order is fixed by the CSV writer.
struct SweepRow {
    std::string method;
    std::size_t p = 0;
    std::size_t n = 0;
    double eps = 0.0;
    std::string config;
    std::string core;
    double alpha = 0.5;
    double nu = 0.0;
    std::size_t rep = 0;
    double bias = std::numeric_limits<double>::quiet_NaN();
    double misrate = std::numeric_limits<double>::quiet_NaN();
    double runtime = 0.0;
    std::uint64_t seed = 0;
    bool failed = false;
};

namespace detail {

struct MethodOutcome {
    SubsetIndex h_star;
    std::optional<LocationScatter> fit;
};

inline MethodOutcome run_method(Method method, const Dataset& data,
                                const AlgoParams& params) {
    switch (method) {
        case Method::FastPCS: {
            PcsResult r = fastpcs_run(data, params);
            return {std::move(r.h_star), std::move(r.fit)};
        }
        case Method::SDE: {
            Rng rng(params.seed, 0x5de);
            BaselineResult r = sde_outlyingness(data, params.num_starts,
                                                params.resolve_h(data.n(), data.p()),
                                                rng);
            return {std::move(r.h_star), std::move(r.fit)};
        }
        case Method::MCD: {
            BaselineResult r = fastmcd_run(data, params);
            return {std::move(r.h_star), std::move(r.fit)};
        }
        case Method::MVE: {
            BaselineResult r = fastmve_run(data, params);
            return {std::move(r.h_star), std::move(r.fit)};
        }
    }
    throw std::logic_error("run_method: unknown method");
}

inline std::uint64_t job_key(std::size_t cell, std::size_t rep) {
    return (static_cast<std::uint64_t>(cell) << 24) ^ static_cast<std::uint64_t>(rep);
}

}  // namespace detail

// Monte-Carlo sweep over the grid; deterministic for a given master seed,
// independent of thread count. nu draws are shared across methods within a
// replication. Estimator failures become rows with the failure flag set.
inline std::vector<SweepRow> run_sweep(
    const SweepConfig& cfg,
    const std::function<void(std::size_t, std::size_t)>& progress = nullptr) {
    cfg.validate();

    struct Cell {
        std::size_t p, n;
        double eps;
        ContaminationConfig config;
        CoreDistribution core;
        double nu_fixed;  // NaN: draw uniform(0,10)
    };
    std::vector<Cell> cells;
    const std::vector<double> nus =
        cfg.nu_list.empty()
            ? std::vector<double>{std::numeric_limits<double>::quiet_NaN()}
            : cfg.nu_list;
    for (std::size_t ip = 0; ip < cfg.p_list.size(); ++ip) {
        const std::size_t p = cfg.p_list[ip];
        const std::size_t n = cfg.n_list.empty() ? 25 * p : cfg.n_list[ip];
        for (double eps : cfg.eps_list) {
            for (auto config : cfg.configs) {
                for (auto core : cfg.cores) {
                    const bool nu_free = config == ContaminationConfig::BarrowWheel ||
                                         config == ContaminationConfig::None ||
                                         eps == 0.0;
                    for (double nu : nus) {
                        cells.push_back({p, n, eps, config, core, nu});
                        if (nu_free) break;  // nu axis collapses
                    }
                }
            }
        }
    }

    const double eps0 = 4.0 * (1.0 - cfg.alpha) / 5.0;
    const std::size_t jobs = cells.size() * cfg.replications;
    std::vector<std::vector<SweepRow>> results(jobs);

    parallel_for(jobs, [&](std::size_t job) {
        const std::size_t cell_idx = job / cfg.replications;
        const std::size_t rep = job % cfg.replications;
        const Cell& cell = cells[cell_idx];

        Rng gen_rng(cfg.seed, detail::job_key(cell_idx, rep));
        double nu = cell.nu_fixed;
        if (std::isnan(nu)) nu = 10.0 * gen_rng.uniform01();

        ContaminationSpec spec;
        spec.config = cell.config;
        spec.eps = cell.eps;
        spec.nu = nu;
        spec.core = cell.core;
        spec.p = cell.p;
        spec.n = cell.n;

        AlgoParams params;
        params.alpha = cfg.alpha;
        params.num_starts = num_starts(eps0, cell.p);
        params.seed = cfg.seed ^ detail::job_key(cell_idx, rep) ^ 0xa5a5a5a5ull;

        SweepRow base;
        base.p = cell.p;
        base.n = cell.n;
        base.eps = cell.eps;
        base.config = config_name(cell.config);
        base.core = core_name(cell.core);
        base.alpha = cfg.alpha;
        base.nu = nu;
        base.rep = rep;
        base.seed = params.seed;

        LabeledSample sample = [&] {
            try {
                return generate(spec, gen_rng);
            } catch (const std::exception&) {
                // unattainable nu for this batch; retry with fresh draws
                Rng retry(cfg.seed, detail::job_key(cell_idx, rep) ^ 0xdeadull);
                return generate(spec, retry);
            }
        }();

        for (Method method : cfg.methods) {
            SweepRow row = base;
            row.method = method_name(method);
            const auto t0 = std::chrono::steady_clock::now();
            try {
                detail::MethodOutcome out = detail::run_method(method, sample.data, params);
                if (out.fit && !out.fit->singular()) {
                    row.bias = bias(out.fit->scatter(), sample.truth.scatter());
                }
                if (!sample.outlier_index.empty()) {
                    row.misrate = misclassification(sample.outlier_index, out.h_star);
                }
            } catch (const std::exception&) {
                row.failed = true;
            }
            row.runtime =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                    .count();
            results[job].push_back(std::move(row));
        }
        if (progress && rep == cfg.replications - 1) progress(cell_idx + 1, cells.size());
    });

    std::vector<SweepRow> table;
    table.reserve(jobs * cfg.methods.size());
    for (auto& rows : results) {
        for (auto& r : rows) table.push_back(std::move(r));
    }
    return table;
}

// Small-sample accuracy: clean data over an n grid; each method is scored
// raw and after hard-threshold reweighting (method name suffix "_rw").
inline std::vector<SweepRow> accuracy_curve(
    const SweepConfig& cfg,
    const std::function<void(std::size_t, std::size_t)>& progress = nullptr) {
    if (cfg.n_list.empty()) {
        throw std::invalid_argument("accuracy_curve: explicit n grid required");
    }
    {
        // the n grid is crossed with p here, not paired as in run_sweep
        SweepConfig chk = cfg;
        chk.n_list.clear();
        chk.validate();
    }
    for (std::size_t n : cfg.n_list) {
        if (n > 599) throw std::invalid_argument("accuracy_curve: n capped at 599");
    }

    struct Cell {
        std::size_t p, n;
        CoreDistribution core;
    };
    std::vector<Cell> cells;
    for (std::size_t p : cfg.p_list) {
        for (std::size_t n : cfg.n_list) {
            for (auto core : cfg.cores) cells.push_back({p, n, core});
        }
    }

    const double eps0 = 4.0 * (1.0 - cfg.alpha) / 5.0;
    const std::size_t jobs = cells.size() * cfg.replications;
    std::vector<std::vector<SweepRow>> results(jobs);

    parallel_for(jobs, [&](std::size_t job) {
        const std::size_t cell_idx = job / cfg.replications;
        const std::size_t rep = job % cfg.replications;
        const Cell& cell = cells[cell_idx];

        Rng gen_rng(cfg.seed, detail::job_key(cell_idx, rep) ^ 0xaccull);
        ContaminationSpec spec;
        spec.config = ContaminationConfig::None;
        spec.core = cell.core;
        spec.p = cell.p;
        spec.n = cell.n;
        LabeledSample sample = gen_clean(spec, gen_rng);

        AlgoParams params;
        params.alpha = cfg.alpha;
        params.num_starts = num_starts(eps0, cell.p);
        params.seed = cfg.seed ^ detail::job_key(cell_idx, rep) ^ 0xacc5eedull;

        SweepRow base;
        base.p = cell.p;
        base.n = cell.n;
        base.eps = 0.0;
        base.config = "none";
        base.core = core_name(cell.core);
        base.alpha = cfg.alpha;
        base.nu = 0.0;
        base.rep = rep;
        base.seed = params.seed;

        for (Method method : cfg.methods) {
            SweepRow raw = base;
            raw.method = method_name(method);
            SweepRow rw = base;
            rw.method = std::string(method_name(method)) + "_rw";
            const auto t0 = std::chrono::steady_clock::now();
            try {
                detail::MethodOutcome out = detail::run_method(method, sample.data, params);
                if (out.fit && !out.fit->singular()) {
                    raw.bias = bias(out.fit->scatter(), sample.truth.scatter());
                    const SubsetIndex j_plus =
                        reweight_hard_threshold(sample.data, *out.fit);
                    const LocationScatter refit = subset_moments(sample.data, j_plus);
                    if (!refit.singular()) {
                        rw.bias = bias(refit.scatter(), sample.truth.scatter());
                    } else {
                        rw.failed = true;
                    }
                } else {
                    raw.failed = rw.failed = true;
                }
            } catch (const std::exception&) {
                raw.failed = rw.failed = true;
            }
            raw.runtime = rw.runtime =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                    .count();
            results[job].push_back(std::move(raw));
            results[job].push_back(std::move(rw));
        }
        if (progress && rep == cfg.replications - 1) progress(cell_idx + 1, cells.size());
    });

    std::vector<SweepRow> table;
    for (auto& rows : results) {
        for (auto& r : rows) table.push_back(std::move(r));
    }
    return table;
}

}  // namespace pcs

#endif
