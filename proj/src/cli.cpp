#include "biochain/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "biochain/generator.hpp"
#include "biochain/ingest.hpp"
#include "biochain/model.hpp"
#include "biochain/oracle.hpp"
#include "biochain/pareto.hpp"
#include "biochain/report.hpp"
#include "biochain/solver.hpp"

namespace biochain::cli {

using io::format_double;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFindings = 1;
constexpr int kExitInfeasible = 2;
constexpr int kExitTimeLimit = 3;
constexpr int kExitInput = 4;
constexpr int kExitNumerical = 5;

int status_code(milp::MilpStatus status) {
    switch (status) {
        case milp::MilpStatus::Optimal: return kExitOk;
        case milp::MilpStatus::Infeasible: return kExitInfeasible;
        case milp::MilpStatus::TimeLimit: return kExitTimeLimit;
    }
    return kExitNumerical;
}

void print_table(const std::vector<std::string>& header,
                 const std::vector<std::vector<std::string>>& rows) {
    std::vector<size_t> width(header.size());
    for (size_t c = 0; c < header.size(); ++c) width[c] = header[c].size();
    for (const auto& row : rows)
        for (size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
    auto line = [&](const std::vector<std::string>& cells) {
        for (size_t c = 0; c < cells.size(); ++c)
            std::cout << (c ? "  " : "") << std::string(width[c] - cells[c].size(), ' ')
                      << cells[c];
        std::cout << "\n";
    };
    line(header);
    for (const auto& row : rows) line(row);
}

struct SolveArgs {
    std::string manifest;
    std::optional<double> epsilon;
    double time_limit = milp::kInf;
    std::string out_dir;
    std::string lp_path;
    std::string log_path;
};

struct FrontArgs {
    std::string manifest;
    int points = 8;
    double time_limit = milp::kInf;
    std::string out_dir;
    int threads = 0;
};

struct GenerateArgs {
    std::string out_dir;
    unsigned long long seed = 1;
    int zones = 4;
    int products = 2;
    int periods = 12;
    int farms = 1;
    int centrals = 1;
    int count = 1;
    int candidates = 0;
    int pre_located = 0;
    double demand = 0.0;
    bool conflicting = false;
};

int cmd_validate(const std::string& manifest) {
    std::vector<std::string> warnings;
    try {
        io::load_instance(manifest, &warnings);
    } catch (const io::IngestError& e) {
        if (e.kind() != io::IngestErrorKind::Validation) throw;
        std::cout << e.what() << "\n";
        return kExitFindings;
    }
    for (const auto& w : warnings) std::cout << "warning: " << w << "\n";
    std::cout << "instance is clean\n";
    return kExitOk;
}

int cmd_solve(const SolveArgs& args) {
    const Instance inst = io::load_instance(args.manifest);
    const milp::VariableIndex vars = milp::build_variables(inst);
    const milp::MilpModel model = milp::build_model(inst, args.epsilon);
    if (!args.lp_path.empty()) {
        std::ofstream os(args.lp_path);
        milp::write_lp(model, os);
    }

    milp::SolveOptions opts;
    opts.time_limit_s = args.time_limit;
    std::ofstream log;
    if (!args.log_path.empty()) {
        log.open(args.log_path);
        opts.node_log = &log;
    }

    const milp::MilpOutcome out = milp::solve_milp(model, opts);
    std::cout << "status " << to_string(out.status) << "\n";
    if (out.has_incumbent) {
        const milp::Solution sol = milp::extract_solution(inst, vars, out.primal);
        std::cout << "cost " << format_double(sol.cost) << " EUR\n"
                  << "emissions " << format_double(sol.ghg) << " kg CO2-eq\n"
                  << "gap " << format_double(out.gap) << ", nodes " << out.nodes << ", time "
                  << format_double(out.wall_time_s) << " s\n";
        if (!args.out_dir.empty()) {
            report::StoredSummary summary;
            summary.status = std::string(to_string(out.status));
            summary.cost_eur = sol.cost;
            summary.ghg_kg = sol.ghg;
            summary.bound = out.bound;
            summary.gap = out.gap;
            summary.nodes = out.nodes;
            summary.wall_time_s = out.wall_time_s;
            summary.manifest = args.manifest;
            summary.epsilon = args.epsilon;
            report::write_solution_dir(args.out_dir, sol, summary);
            std::cout << "solution written to " << args.out_dir << "\n";
        }
    }
    return status_code(out.status);
}

int cmd_front(const FrontArgs& args) {
    const Instance inst = io::load_instance(args.manifest);
    milp::SolveOptions opts;
    opts.time_limit_s = args.time_limit;

    int threads = args.threads;
    if (const char* env = std::getenv("BIOCHAIN_THREADS")) {
        const int cap = std::atoi(env);
        if (cap > 0) threads = threads == 0 ? cap : std::min(threads, cap);
    }

    const pareto::ParetoFront front = pareto::epsilon_front(inst, args.points, opts, threads);
    std::vector<std::vector<std::string>> rows;
    for (const auto& pt : front.points)
        rows.push_back({pt.epsilon ? format_double(*pt.epsilon) : "-", format_double(pt.cost),
                        format_double(pt.ghg), pt.complete ? "" : "incomplete"});
    print_table({"epsilon", "cost_eur", "ghg_kg", ""}, rows);
    for (const auto& note : front.notes) std::cout << "note: " << note << "\n";
    if (!args.out_dir.empty()) {
        pareto::write_front(front, args.out_dir);
        std::cout << "front written to " << args.out_dir << "\n";
    }
    return kExitOk;
}

int cmd_report(const std::string& dir) {
    report::StoredSummary stored;
    const milp::Solution sol = report::read_solution_dir(dir, &stored);
    const Instance inst = io::load_instance(stored.manifest);
    const oracle::ValidationReport check = oracle::validate_solution(inst, sol);
    const report::CostBreakdown breakdown = report::cost_breakdown(inst, sol);
    std::cout << breakdown.to_text();
    std::cout << "emissions " << format_double(check.ghg) << " kg CO2-eq ("
              << format_double(check.ghg / 1000.0) << " t CO2-eq)\n";
    for (const auto& f : check.findings)
        std::cout << "warning: [" << f.code << "] " << f.entity << ": " << f.message << "\n";
    return kExitOk;
}

int cmd_generate(const GenerateArgs& args) {
    GeneratorParams params;
    params.seed = args.seed;
    params.num_zones = args.zones;
    params.num_products = args.products;
    params.horizon = args.periods;
    params.farm_storages_per_zone = args.farms;
    params.num_central_storages = args.centrals;
    params.refineries = {{args.count, args.candidates, args.pre_located}};
    params.total_demand = args.demand;
    params.conflicting_rates = args.conflicting;

    const Instance inst = generate_instance(params);
    io::write_instance(inst, args.out_dir);
    std::cout << "wrote " << inst.nodes.size() << " nodes, " << inst.arcs.size() << " arcs, "
              << inst.products.size() << " products, horizon " << inst.horizon << " to "
              << args.out_dir << "\n";
    return kExitOk;
}

}  // namespace

int run(int argc, char** argv) {
    CLI::App app{"biomass supply chain planning toolkit"};
    app.require_subcommand(1);

    std::string validate_manifest;
    auto* validate = app.add_subcommand("validate", "check an instance, print findings");
    validate->add_option("manifest", validate_manifest, "path to manifest.json")->required();

    SolveArgs solve_args;
    auto* solve = app.add_subcommand("solve", "minimize cost, optionally under a GHG bound");
    solve->add_option("manifest", solve_args.manifest, "path to manifest.json")->required();
    solve->add_option("--epsilon", solve_args.epsilon, "GHG bound in kg CO2-eq");
    solve->add_option("--time-limit", solve_args.time_limit, "wall clock limit in seconds");
    solve->add_option("--out", solve_args.out_dir, "directory for the solution files");
    solve->add_option("--write-lp", solve_args.lp_path, "dump the model in LP format");
    solve->add_option("--log", solve_args.log_path, "write the node log to a file");

    FrontArgs front_args;
    auto* front = app.add_subcommand("front", "trace the cost vs GHG compromise curve");
    front->add_option("manifest", front_args.manifest, "path to manifest.json")->required();
    front->add_option("--points", front_args.points, "number of epsilon grid points");
    front->add_option("--time-limit", front_args.time_limit, "per-point limit in seconds");
    front->add_option("--out", front_args.out_dir, "directory for front.csv and solutions");
    front->add_option("--threads", front_args.threads, "parallel grid solves (0 = default)");

    std::string report_dir;
    auto* report = app.add_subcommand("report", "recompute cost shares for a solution");
    report->add_option("dir", report_dir, "solution directory from solve --out")->required();

    GenerateArgs gen_args;
    auto* generate = app.add_subcommand("generate", "write a synthetic instance");
    generate->add_option("out", gen_args.out_dir, "output directory")->required();
    generate->add_option("--seed", gen_args.seed, "random seed");
    generate->add_option("--zones", gen_args.zones, "production zones");
    generate->add_option("--products", gen_args.products, "biomass products");
    generate->add_option("--periods", gen_args.periods, "planning periods");
    generate->add_option("--farms", gen_args.farms, "farm storages per zone");
    generate->add_option("--centrals", gen_args.centrals, "central storages");
    generate->add_option("--refineries", gen_args.count, "refineries required");
    generate->add_option("--candidates", gen_args.candidates, "candidate zones (0 = all)");
    generate->add_option("--pre-located", gen_args.pre_located, "refineries fixed in place");
    generate->add_option("--demand", gen_args.demand, "total demand in tonnes (0 = derive)");
    generate->add_flag("--conflicting", gen_args.conflicting,
                       "anti-correlated cost and emission rates");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitInput;
    }

    try {
        if (*validate) return cmd_validate(validate_manifest);
        if (*solve) return cmd_solve(solve_args);
        if (*front) return cmd_front(front_args);
        if (*report) return cmd_report(report_dir);
        if (*generate) return cmd_generate(gen_args);
    } catch (const io::IngestError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const GeneratorError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const milp::EpsilonError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const pareto::ParetoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        const std::string what = e.what();
        if (what.starts_with("INFEASIBLE:")) return kExitInfeasible;
        if (what.starts_with("TIME_LIMIT:")) return kExitTimeLimit;
        return kExitInput;
    } catch (const milp::NumericalBreakdown& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    }
    return kExitInput;
}

}  // namespace biochain::cli
