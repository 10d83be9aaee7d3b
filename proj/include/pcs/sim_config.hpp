#ifndef PCS_SIM_CONFIG_HPP
#define PCS_SIM_CONFIG_HPP

#include <fstream>
#include <istream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "pcs/csv.hpp"
#include "pcs/sweep.hpp"

namespace pcs {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SimJob {
    enum class Kind { Sweep, Accuracy };
    Kind kind = Kind::Sweep;
    SweepConfig sweep;
};

namespace detail {

inline std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string item;
    std::stringstream ss(s);
    while (std::getline(ss, item, ',')) {
        const auto a = item.find_first_not_of(" \t");
        const auto b = item.find_last_not_of(" \t");
        if (a != std::string::npos) out.push_back(item.substr(a, b - a + 1));
    }
    return out;
}

inline ContaminationConfig parse_config_token(const std::string& s, std::size_t lineno) {
    if (s == "none") return ContaminationConfig::None;
    if (s == "shift") return ContaminationConfig::Shift;
    if (s == "pointmass") return ContaminationConfig::PointMass;
    if (s == "barrowwheel") return ContaminationConfig::BarrowWheel;
    throw ConfigError("line " + std::to_string(lineno) + ": unknown config '" + s + "'");
}

inline CoreDistribution parse_core_token(const std::string& s, std::size_t lineno) {
    if (s == "normal") return CoreDistribution::Normal;
    if (s == "cauchy") return CoreDistribution::Cauchy;
    throw ConfigError("line " + std::to_string(lineno) + ": unknown core '" + s + "'");
}

inline Method parse_method_token(const std::string& s, std::size_t lineno) {
    if (s == "fastpcs") return Method::FastPCS;
    if (s == "sde") return Method::SDE;
    if (s == "mcd") return Method::MCD;
    if (s == "mve") return Method::MVE;
    throw ConfigError("line " + std::to_string(lineno) + ": unknown method '" + s + "'");
}

}  // namespace detail

// Flat key=value experiment description. Unknown keys are rejected with
// their line number. Recognized keys:
//   kind      sweep | accuracy          (default sweep)
//   p         comma list of dimensions
//   n         comma list, parallel to p (default n = 25 p)
//   eps       comma list of fractions in [0, 0.5)
//   configs   comma list of none|shift|pointmass|barrowwheel
//   cores     comma list of normal|cauchy
//   alpha     fraction in [0.5, 1]
//   reps      replications per cell
//   nu        'uniform' or a comma list of values
//   seed      64-bit master seed
//   methods   comma list of fastpcs|sde|mcd|mve
inline SimJob parse_sim_config(std::istream& in) {
    SimJob job;
    SweepConfig& cfg = job.sweep;
    cfg.configs = {ContaminationConfig::Shift};
    cfg.cores = {CoreDistribution::Normal};
    cfg.eps_list = {0.0};
    cfg.methods = {Method::FastPCS};

    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto first = line.find_first_not_of(" \t");
        if (first == std::string::npos || line[first] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("line " + std::to_string(lineno) + ": expected key=value");
        }
        std::string key = line.substr(first, eq - first);
        while (!key.empty() && (key.back() == ' ' || key.back() == '\t')) key.pop_back();
        std::string value = line.substr(eq + 1);
        const auto va = value.find_first_not_of(" \t");
        value = va == std::string::npos ? "" : value.substr(va);
        while (!value.empty() && (value.back() == ' ' || value.back() == '\t')) {
            value.pop_back();
        }

        try {
            if (key == "kind") {
                if (value == "sweep") job.kind = SimJob::Kind::Sweep;
                else if (value == "accuracy") job.kind = SimJob::Kind::Accuracy;
                else throw ConfigError("line " + std::to_string(lineno) +
                                       ": kind must be sweep or accuracy");
            } else if (key == "p") {
                cfg.p_list.clear();
                for (const auto& t : detail::split_list(value)) {
                    cfg.p_list.push_back(std::stoul(t));
                }
            } else if (key == "n") {
                cfg.n_list.clear();
                for (const auto& t : detail::split_list(value)) {
                    cfg.n_list.push_back(std::stoul(t));
                }
            } else if (key == "eps") {
                cfg.eps_list.clear();
                for (const auto& t : detail::split_list(value)) {
                    const double e = std::stod(t);
                    if (!(e >= 0.0 && e < 0.5)) {
                        throw ConfigError("line " + std::to_string(lineno) +
                                          ": eps " + t + " outside [0, 0.5)");
                    }
                    cfg.eps_list.push_back(e);
                }
            } else if (key == "configs") {
                cfg.configs.clear();
                for (const auto& t : detail::split_list(value)) {
                    cfg.configs.push_back(detail::parse_config_token(t, lineno));
                }
            } else if (key == "cores") {
                cfg.cores.clear();
                for (const auto& t : detail::split_list(value)) {
                    cfg.cores.push_back(detail::parse_core_token(t, lineno));
                }
            } else if (key == "alpha") {
                cfg.alpha = std::stod(value);
            } else if (key == "reps") {
                cfg.replications = std::stoul(value);
            } else if (key == "nu") {
                cfg.nu_list.clear();
                if (value != "uniform") {
                    for (const auto& t : detail::split_list(value)) {
                        cfg.nu_list.push_back(std::stod(t));
                    }
                }
            } else if (key == "seed") {
                cfg.seed = std::stoull(value);
            } else if (key == "methods") {
                cfg.methods.clear();
                for (const auto& t : detail::split_list(value)) {
                    cfg.methods.push_back(detail::parse_method_token(t, lineno));
                }
            } else {
                throw ConfigError("line " + std::to_string(lineno) +
                                  ": unknown key '" + key + "'");
            }
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception& e) {
            throw ConfigError("line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    if (cfg.p_list.empty()) {
        throw ConfigError("config missing required key 'p'");
    }
    return job;
}

inline SimJob parse_sim_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path);
    return parse_sim_config(in);
}

// Result table serialization; column order is part of the interface.
inline std::string sweep_table_to_csv(const std::vector<SweepRow>& rows) {
    std::string out =
        "method,p,n,eps,config,core,alpha,nu,rep,bias,misrate,runtime,seed,failed\n";
    for (const auto& r : rows) {
        out += r.method;
        out += ',';
        out += std::to_string(r.p);
        out += ',';
        out += std::to_string(r.n);
        out += ',';
        out += format_double(r.eps);
        out += ',';
        out += r.config;
        out += ',';
        out += r.core;
        out += ',';
        out += format_double(r.alpha);
        out += ',';
        out += format_double(r.nu);
        out += ',';
        out += std::to_string(r.rep);
        out += ',';
        out += format_double(r.bias);
        out += ',';
        out += format_double(r.misrate);
        out += ',';
        out += format_double(r.runtime);
        out += ',';
        out += std::to_string(r.seed);
        out += ',';
        out += r.failed ? '1' : '0';
        out += '\n';
    }
    return out;
}

}  // namespace pcs

#endif
