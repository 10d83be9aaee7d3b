// Command-line front end: outlier detection on CSV data, Monte-Carlo
// sweeps from config files, and the concrete slump case study.

#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "pcs/pcs.hpp"

namespace {

pcs::Method parse_method(const std::string& s) {
    if (s == "fastpcs") return pcs::Method::FastPCS;
    if (s == "sde") return pcs::Method::SDE;
    if (s == "mcd") return pcs::Method::MCD;
    if (s == "mve") return pcs::Method::MVE;
    throw CLI::ValidationError("--method", "must be one of fastpcs|sde|mcd|mve");
}

struct MethodRun {
    pcs::SubsetIndex h_star;
    std::optional<pcs::LocationScatter> fit;
    Eigen::VectorXd outlyingness;
    bool exact_fit = false;
};

MethodRun run_one(pcs::Method method, const pcs::Dataset& data,
                  const pcs::AlgoParams& params) {
    MethodRun out;
    switch (method) {
        case pcs::Method::FastPCS: {
            pcs::PcsResult r = pcs::fastpcs_run(data, params);
            out.h_star = std::move(r.h_star);
            out.fit = std::move(r.fit);
            out.outlyingness = std::move(r.outlyingness);
            out.exact_fit = r.exact_fit;
            break;
        }
        case pcs::Method::SDE: {
            pcs::Rng rng(params.seed, 0x5de);
            pcs::BaselineResult r = pcs::sde_outlyingness(
                data, params.num_starts, params.resolve_h(data.n(), data.p()), rng);
            out.h_star = std::move(r.h_star);
            out.fit = std::move(r.fit);
            out.outlyingness = std::move(r.outlyingness);
            out.exact_fit = r.exact_fit;
            break;
        }
        case pcs::Method::MCD: {
            pcs::BaselineResult r = pcs::fastmcd_run(data, params);
            out.h_star = std::move(r.h_star);
            out.fit = std::move(r.fit);
            out.outlyingness = std::move(r.outlyingness);
            out.exact_fit = r.exact_fit;
            break;
        }
        case pcs::Method::MVE: {
            pcs::BaselineResult r = pcs::fastmve_run(data, params);
            out.h_star = std::move(r.h_star);
            out.fit = std::move(r.fit);
            out.outlyingness = std::move(r.outlyingness);
            out.exact_fit = r.exact_fit;
            break;
        }
    }
    return out;
}

int cmd_detect(const std::string& input, const std::string& output,
               const std::string& method_name, double alpha, std::uint64_t seed) {
    const pcs::Method method = parse_method(method_name);
    const pcs::NumericCsv csv = pcs::read_numeric_csv(input);
    pcs::Dataset data(csv.values);
    const std::size_t n = data.n();
    const std::size_t p = data.p();
    if (n <= p) {
        std::cerr << "error: need more rows than columns (n=" << n << ", p=" << p
                  << ")\n";
        return 1;
    }

    pcs::AlgoParams params;
    params.alpha = alpha;
    params.seed = seed;
    params.num_starts = pcs::num_starts(4.0 * (1.0 - alpha) / 5.0, p);
    const std::size_t h = params.resolve_h(n, p);

    const MethodRun run = run_one(method, data, params);

    std::vector<bool> in_j_plus(n, false);
    if (run.fit && !run.fit->singular()) {
        const pcs::SubsetIndex j_plus = pcs::reweight_hard_threshold(data, *run.fit);
        for (std::size_t i : j_plus) in_j_plus[i] = true;
    } else {
        for (std::size_t i : run.h_star) in_j_plus[i] = true;
    }

    std::string out;
    out += "# method=" + method_name + " alpha=" + pcs::format_double(alpha) +
           " h=" + std::to_string(h) + " seed=" + std::to_string(seed) + "\n";
    out += std::string("# exact_fit=") + (run.exact_fit ? "yes" : "no") + "\n";
    out += "row_id,outlyingness,in_h_star,in_j_plus\n";
    for (std::size_t i = 0; i < n; ++i) {
        out += std::to_string(i) + ',' +
               pcs::format_double(run.outlyingness[static_cast<Eigen::Index>(i)]) + ',' +
               (run.h_star.contains(i) ? '1' : '0') + ',' +
               (in_j_plus[i] ? '1' : '0') + '\n';
    }
    pcs::write_file_atomic(output, out);
    return run.exact_fit ? 2 : 0;
}

int cmd_simulate(const std::string& config_path, const std::string& output) {
    const pcs::SimJob job = pcs::parse_sim_config_file(config_path);
    auto progress = [](std::size_t done, std::size_t total) {
        std::cerr << "cell " << done << "/" << total << " done\n";
    };
    const std::vector<pcs::SweepRow> table =
        job.kind == pcs::SimJob::Kind::Sweep ? pcs::run_sweep(job.sweep, progress)
                                             : pcs::accuracy_curve(job.sweep, progress);
    pcs::write_file_atomic(output, pcs::sweep_table_to_csv(table));
    return 0;
}

int cmd_casestudy(const std::string& input, const std::string& variant_str,
                  std::vector<std::string> method_names, std::uint64_t seed,
                  const std::string& output) {
    const pcs::CaseStudyVariant variant = pcs::parse_variant(variant_str);
    const pcs::NumericCsv csv = pcs::read_numeric_csv(input);
    Eigen::MatrixXd raw = csv.values;
    if (static_cast<std::size_t>(raw.cols()) == pcs::kConcreteCols + 1) {
        raw = raw.rightCols(static_cast<Eigen::Index>(pcs::kConcreteCols)).eval();
    }
    const pcs::CaseStudyData study = pcs::build_case_study(raw, variant);

    if (method_names.empty()) method_names = {"fastpcs", "sde", "mcd", "mve"};

    pcs::AlgoParams params;
    params.alpha = 0.5;
    params.seed = seed;
    params.num_starts = 2000;

    std::vector<Eigen::VectorXd> columns;
    for (const auto& name : method_names) {
        columns.push_back(
            run_one(parse_method(name), study.data, params).outlyingness);
    }

    std::string out = "row_id,group";
    for (const auto& name : method_names) out += ',' + name;
    out += '\n';
    for (std::size_t i = 0; i < study.data.n(); ++i) {
        out += std::to_string(i);
        out += study.j_old.contains(i) ? ",J_O" : ",J_N";
        for (const auto& col : columns) {
            out += ',' + pcs::format_double(col[static_cast<Eigen::Index>(i)]);
        }
        out += '\n';
    }
    pcs::write_file_atomic(output, out);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Projection congruent subset outlier detection toolkit"};
    app.require_subcommand(1);

    std::string input, output, method = "fastpcs", config, variant = "i";
    std::vector<std::string> methods;
    double alpha = 0.5;
    std::uint64_t seed = 0;

    auto* detect = app.add_subcommand("detect", "Flag outliers in a numeric CSV");
    detect->add_option("--input", input)->required();
    detect->add_option("--output", output)->required();
    detect->add_option("--method", method, "fastpcs|sde|mcd|mve");
    detect->add_option("--alpha", alpha)->check(CLI::Range(0.5, 1.0));
    detect->add_option("--seed", seed);

    auto* simulate = app.add_subcommand("simulate", "Run a Monte-Carlo sweep");
    simulate->add_option("--config", config)->required();
    simulate->add_option("--output", output)->required();

    auto* casestudy = app.add_subcommand("casestudy", "Concrete slump experiments");
    casestudy->add_option("--input", input)->required();
    casestudy->add_option("--output", output)->required();
    casestudy->add_option("--variant", variant, "i|ii|iii|iv");
    casestudy->add_option("--method", methods, "repeatable; defaults to all four");
    casestudy->add_option("--seed", seed);

    CLI11_PARSE(app, argc, argv);

    try {
        if (detect->parsed()) return cmd_detect(input, output, method, alpha, seed);
        if (simulate->parsed()) return cmd_simulate(config, output);
        if (casestudy->parsed()) {
            return cmd_casestudy(input, variant, methods, seed, output);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
