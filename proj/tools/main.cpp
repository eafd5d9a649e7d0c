// Command-line front end: exact tables, moment/interaction transforms,
// dependence-reversal reports, estimation from count files, and the
// sampling/EM simulation harness.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ringdist/ringdist.hpp"

namespace {

using nlohmann::json;
using namespace ringdist;

// Wrong flag/mode combinations discovered after parsing.
struct usage_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string fmt12(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

std::string fmt2(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

const CLI::Validator RhoDomain(
    [](std::string& s) {
        double v = 0.0;
        try {
            v = std::stod(s);
        } catch (...) {
            return std::string("not a number");
        }
        return v >= 0.0 && v < 1.0 ? std::string{} : std::string("must lie in [0,1)");
    },
    "in [0,1)");

const CLI::Validator AlphaDomain(
    [](std::string& s) {
        double v = 0.0;
        try {
            v = std::stod(s);
        } catch (...) {
            return std::string("not a number");
        }
        return v >= 1.0 ? std::string{} : std::string("must lie in [1,inf)");
    },
    "in [1,inf)");

// Shared --Q/--rho/--alpha options; exactly one of rho and alpha.
struct SpecOpts {
    int leaves = 1;
    double rho = 0.0;
    double alpha = 1.0;
    CLI::Option* rho_opt = nullptr;
    CLI::Option* alpha_opt = nullptr;

    void attach(CLI::App* cmd) {
        cmd->add_option("-Q,--Q", leaves, "number of leaves")
            ->check(CLI::Range(1, kMaxVars - 1))
            ->required();
        rho_opt = cmd->add_option("--rho", rho, "leaf-root correlation in [0,1)")
                      ->check(RhoDomain);
        alpha_opt = cmd->add_option("--alpha", alpha, "odds parameter in [1,inf)")
                        ->check(AlphaDomain);
        rho_opt->excludes(alpha_opt);
        alpha_opt->excludes(rho_opt);
    }

    ModelSpec spec() const {
        if (alpha_opt->count() > 0) return ModelSpec::from_alpha(leaves, alpha);
        if (rho_opt->count() > 0) return ModelSpec::from_rho(leaves, rho);
        throw usage_error("one of --rho or --alpha is required");
    }
};

struct OutputOpt {
    std::string path;

    void attach(CLI::App* cmd) {
        cmd->add_option("-o,--output", path, "write to file instead of stdout");
    }

    // Keeps the stream alive for the duration of the command.
    std::unique_ptr<std::ostream> open_file() const {
        if (path.empty()) return nullptr;
        auto out = std::make_unique<std::ofstream>(path, std::ios::binary);
        if (!*out) throw data_error("cannot open '" + path + "' for writing");
        return out;
    }
};

std::string subset_label(std::size_t index, int vars, bool root_included) {
    if (index == 0) return "-";
    std::string label;
    for (int q = 0; q < vars; ++q) {
        if (!((index >> q) & 1)) continue;
        if (!label.empty()) label += ',';
        if (root_included && q == vars - 1)
            label += 'L';
        else
            label += std::to_string(q + 1);
    }
    return label;
}

json flags_json(std::initializer_list<std::pair<const char*, bool>> flags) {
    json out = json::array();
    for (const auto& [name, set] : flags)
        if (set) out.push_back(name);
    return out;
}

// ---------------------------------------------------------------- tabulate

struct TabulateCmd {
    SpecOpts spec_opts;
    OutputOpt output;
    bool marginal = false;
    bool integer = false;
    std::string format = "table";

    void attach(CLI::App& app) {
        auto* cmd = app.add_subcommand("tabulate", "print the joint or leaf-marginal table");
        spec_opts.attach(cmd);
        output.attach(cmd);
        cmd->add_flag("--marginal", marginal, "marginalize over the root");
        cmd->add_flag("--integer", integer, "add exact integer cells (integer alpha)");
        cmd->add_option("--format", format, "table, csv or json")
            ->check(CLI::IsMember({"table", "csv", "json"}));
        cmd->callback([this] { run(); });
    }

    void run() const {
        const ModelSpec spec = spec_opts.spec();
        const ProbVector pv = marginal ? marginal_leaves(spec) : joint_vector_direct(spec);
        if (integer && format == "csv")
            throw usage_error("--integer is not representable in the count CSV schema");

        std::vector<int> exponents;
        std::vector<std::uint64_t> cells;
        if (integer) {
            const auto full = integer_cells(spec);
            if (marginal) {
                const std::size_t half = full.size() / 2;
                cells.resize(half);
                for (std::size_t t = 0; t < half; ++t) cells[t] = full[t] + full[t + half];
            } else {
                cells = full;
                exponents = integer_pattern(spec);
            }
        }

        auto file = output.open_file();
        std::ostream& out = file ? *file : std::cout;
        if (format == "csv") {
            CountTable as_counts{spec.leaves, pv.root_included, pv.entries};
            write_counts_csv(out, as_counts);
            return;
        }
        if (format == "json") {
            json cells_json = json::array();
            for (std::size_t t = 0; t < pv.size(); ++t) {
                json cell;
                json levels = json::array();
                for (int q = 0; q < pv.vars; ++q) levels.push_back(int((t >> q) & 1));
                cell["levels"] = levels;
                cell["prob"] = pv.entries[t];
                if (!cells.empty()) cell["integer"] = cells[t];
                if (!exponents.empty()) cell["exponent"] = exponents[t];
                cells_json.push_back(cell);
            }
            json doc;
            doc["model"] = {{"Q", spec.leaves},
                            {"rho", spec.rho},
                            {"alpha", spec.alpha},
                            {"norm_const", spec.norm_const()}};
            doc["marginal"] = marginal;
            doc["cells"] = cells_json;
            out << doc.dump(2) << '\n';
            return;
        }
        for (int q = 0; q < spec.leaves; ++q) out << 'a' << q + 1 << ' ';
        if (pv.root_included) out << "l ";
        out << "prob";
        if (!cells.empty()) out << " integer";
        if (!exponents.empty()) out << " exponent";
        out << '\n';
        for (std::size_t t = 0; t < pv.size(); ++t) {
            for (int q = 0; q < pv.vars; ++q) out << ((t >> q) & 1) << "  ";
            out << fmt12(pv.entries[t]);
            if (!cells.empty()) out << ' ' << cells[t];
            if (!exponents.empty()) out << ' ' << exponents[t];
            out << '\n';
        }
    }
};

// ----------------------------------------------------------------- moments

struct MomentsCmd {
    SpecOpts spec_opts;
    OutputOpt output;
    std::string kind = "linear";
    bool skip_zeros = false;
    std::string format = "table";

    void attach(CLI::App& app) {
        auto* cmd = app.add_subcommand("moments", "print a moment or interaction vector");
        spec_opts.attach(cmd);
        output.attach(cmd);
        cmd->add_option("--kind", kind, "raw, central, loglinear, linear, leaf-linear, leaf-loglinear")
            ->required()
            ->check(CLI::IsMember(
                {"raw", "central", "loglinear", "linear", "leaf-linear", "leaf-loglinear"}));
        cmd->add_flag("--skip-zeros", skip_zeros, "omit vanishing entries");
        cmd->add_option("--format", format, "table, csv or json")
            ->check(CLI::IsMember({"table", "csv", "json"}));
        cmd->callback([this] { run(); });
    }

    void run() const {
        const ModelSpec spec = spec_opts.spec();
        InteractionVector iv;
        if (kind == "leaf-linear") {
            iv = leaf_linear_interactions(spec);
        } else if (kind == "leaf-loglinear") {
            iv = leaf_loglinear(spec);
        } else {
            const ProbVector pv = joint_vector_direct(spec);
            if (kind == "raw")
                iv = raw_moments(pv);
            else if (kind == "central")
                iv = central_moments(pv);
            else if (kind == "loglinear")
                iv = loglinear_interactions(pv);
            else
                iv = linear_interactions(pv);
        }

        auto file = output.open_file();
        std::ostream& out = file ? *file : std::cout;
        if (format == "json") {
            json terms = json::array();
            for (std::size_t i = 0; i < iv.entries.size(); ++i) {
                if (skip_zeros && std::abs(iv.entries[i]) < 1e-14) continue;
                terms.push_back({{"term", subset_label(i, iv.vars, iv.root_included)},
                                 {"value", iv.entries[i]}});
            }
            json doc;
            doc["model"] = {{"Q", spec.leaves}, {"rho", spec.rho}, {"alpha", spec.alpha}};
            doc["kind"] = kind;
            doc["terms"] = terms;
            out << doc.dump(2) << '\n';
            return;
        }
        const char sep = format == "csv" ? ',' : ' ';
        out << "term" << sep << "value\n";
        for (std::size_t i = 0; i < iv.entries.size(); ++i) {
            if (skip_zeros && std::abs(iv.entries[i]) < 1e-14) continue;
            out << subset_label(i, iv.vars, iv.root_included) << sep << fmt12(iv.entries[i])
                << '\n';
        }
    }
};

// --------------------------------------------------------------------- fit

json trace_json(const EmTrace& trace) {
    json iterations = json::array();
    for (const auto& it : trace.iterations)
        iterations.push_back(
            {{"m", it.m}, {"rho", it.rho}, {"alpha", it.alpha}, {"loglik", it.loglik}});
    return json{{"iterations", iterations},
                {"converged", trace.converged},
                {"steps", trace.steps},
                {"final_rho", trace.final_rho}};
}

struct FitCmd {
    std::string input;
    std::string mode;
    double tolerance = 1e-7;
    int max_iter = 500;
    double init = 0.0;
    CLI::Option* init_opt = nullptr;
    OutputOpt output;

    void attach(CLI::App& app) {
        auto* cmd = app.add_subcommand("fit", "estimate rho from a count CSV file");
        cmd->add_option("-i,--input", input, "count CSV path, or - for stdin")->required();
        cmd->add_option("--mode", mode, "observed, mom, closed or em")
            ->required()
            ->check(CLI::IsMember({"observed", "mom", "closed", "em"}));
        cmd->add_option("--tolerance", tolerance, "EM stopping tolerance")
            ->check(CLI::PositiveNumber);
        cmd->add_option("--max-iter", max_iter, "EM iteration cap")->check(CLI::PositiveNumber);
        init_opt = cmd->add_option("--init", init, "EM starting value in (0,1)")
                       ->check(CLI::Validator(
                           [](std::string& s) {
                               double v = 0.0;
                               try {
                                   v = std::stod(s);
                               } catch (...) {
                                   return std::string("not a number");
                               }
                               return v > 0.0 && v < 1.0 ? std::string{}
                                                         : std::string("must lie in (0,1)");
                           },
                           "in (0,1)"));
        output.attach(cmd);
        cmd->callback([this] { run(); });
    }

    void run() const {
        CountTable table;
        if (input == "-") {
            table = read_counts_csv(std::cin);
        } else {
            table = read_counts_csv_file(input);
        }

        json doc;
        double rho_hat = 0.0;
        bool clamped = false, non_identifiable = false, boundary = false, converged = true;
        std::optional<double> rho_sq_hat;

        if (mode == "observed") {
            if (!table.root_observed)
                throw usage_error("mode 'observed' needs an 'l' column in the input");
            const Estimate est = mle_observed(table);
            rho_hat = est.rho;
            clamped = est.clamped;
            non_identifiable = est.non_identifiable;
        } else {
            if (table.root_observed)
                throw usage_error("mode '" + mode + "' expects a leaves-only input (no 'l' column)");
            if (mode == "mom") {
                const Estimate est = mom_estimate(table);
                rho_hat = est.rho;
                rho_sq_hat = est.rho_sq;
                clamped = est.clamped;
                non_identifiable = est.non_identifiable;
            } else if (mode == "closed") {
                const Estimate est = closed_form_latent(table);
                rho_hat = est.rho;
                rho_sq_hat = est.rho_sq;
                clamped = est.clamped;
                non_identifiable = est.non_identifiable;
            } else {
                EmConfig config{tolerance, max_iter, {}};
                if (init_opt->count() > 0) config.init = init;
                const EmTrace trace = em_fit(table, config);
                rho_hat = trace.final_rho;
                rho_sq_hat = rho_hat * rho_hat;
                clamped = trace.clamped;
                non_identifiable = trace.non_identifiable;
                boundary = trace.boundary;
                converged = trace.converged;
                doc["trace"] = trace_json(trace);
            }
        }

        // every derived measure is the closed map of the single estimate
        const double alpha_hat = rho_to_alpha(rho_hat);
        doc["model"] = {{"Q", table.leaves}, {"rho_hat", rho_hat}, {"alpha_hat", alpha_hat}};
        if (rho_sq_hat) doc["model"]["rho_sq_hat"] = *rho_sq_hat;
        doc["measures"] = {{"odds_ratio", alpha_hat * alpha_hat},
                           {"relative_chance", alpha_hat},
                           {"chance_difference", rho_hat},
                           {"loglinear_two_factor", 0.5 * std::log(alpha_hat)}};
        doc["flags"] = flags_json({{"clamped", clamped},
                                   {"non_identifiable", non_identifiable},
                                   {"boundary", boundary},
                                   {"not_converged", !converged}});

        auto file = output.open_file();
        (file ? *file : std::cout) << doc.dump(2) << '\n';
    }
};

// ---------------------------------------------------------------- simulate

json quantile_summary(const std::vector<double>& values) {
    return json{{"p50", quantile(values, 0.5)},
                {"p95", quantile(values, 0.95)},
                {"max", quantile(values, 1.0)}};
}

struct SimulateCmd {
    SimulationConfig config;
    bool details = false;
    OutputOpt output;

    void attach(CLI::App& app) {
        auto* cmd = app.add_subcommand("simulate", "sampling + EM accuracy/convergence harness");
        cmd->add_option("-Q,--Q", config.leaves, "number of leaves")
            ->check(CLI::Range(2, kMaxVars - 1))
            ->capture_default_str();
        cmd->add_option("--rho", config.rhos, "true rho grid")
            ->check(RhoDomain)
            ->capture_default_str();
        cmd->add_option("-n,--n", config.sample_sizes, "sample size grid")
            ->check(CLI::PositiveNumber)
            ->capture_default_str();
        cmd->add_option("--replicates", config.replicates, "replicates per cell")
            ->check(CLI::PositiveNumber)
            ->capture_default_str();
        cmd->add_option("--tolerance", config.tolerances, "EM tolerance grid")
            ->check(CLI::PositiveNumber)
            ->capture_default_str();
        cmd->add_option("--max-iter", config.max_iterations, "EM iteration cap")
            ->check(CLI::PositiveNumber)
            ->capture_default_str();
        cmd->add_option("--seed", config.master_seed, "master seed")->capture_default_str();
        cmd->add_option("--threads", config.threads, "worker threads")
            ->check(CLI::Range(1, 256))
            ->capture_default_str();
        cmd->add_flag("--details", details, "include per-replicate values in the report");
        output.attach(cmd);
        cmd->callback([this] { run(); });
    }

    void run() const {
        const SimulationReport report = run_simulation(config);
        json cells = json::array();
        for (const auto& cell : report.cells) {
            json results = json::array();
            for (const auto& tr : cell.by_tolerance) {
                std::vector<double> iter_values(tr.iterations.begin(), tr.iterations.end());
                json r;
                r["tolerance"] = tr.tolerance;
                r["iterations"] = quantile_summary(iter_values);
                r["abs_error"] = quantile_summary(tr.abs_error);
                if (details) {
                    r["rho_hat"] = tr.rho_hat;
                    r["iterations"]["values"] = tr.iterations;
                    r["abs_error"]["values"] = tr.abs_error;
                }
                results.push_back(r);
            }
            cells.push_back({{"rho", cell.rho},
                             {"n", cell.sample_size},
                             {"results", results}});
        }
        json doc;
        doc["model"] = {{"Q", config.leaves}};
        doc["master_seed"] = config.master_seed;
        doc["replicates"] = config.replicates;
        doc["cells"] = cells;
        doc["em"] = {{"non_converged", report.non_converged},
                     {"loglik_violations", report.loglik_violations}};
        doc["flags"] = flags_json({{"loglik_violations", report.loglik_violations > 0}});
        auto file = output.open_file();
        (file ? *file : std::cout) << doc.dump(2) << '\n';
    }
};

// ---------------------------------------------------------------- reversal

struct ReversalCmd {
    SpecOpts spec_opts;
    OutputOpt output;
    std::string format = "table";

    void attach(CLI::App& app) {
        auto* cmd = app.add_subcommand(
            "reversal", "dependence measures before/after exchanging root and leaf roles");
        spec_opts.attach(cmd);
        output.attach(cmd);
        cmd->add_option("--format", format, "table or json")
            ->check(CLI::IsMember({"table", "json"}));
        cmd->callback([this] { run(); });
    }

    void run() const {
        const ModelSpec spec = spec_opts.spec();
        const ReversalReport r = reversal_analysis(spec.alpha, spec.leaves);
        auto file = output.open_file();
        std::ostream& out = file ? *file : std::cout;
        if (format == "json") {
            json doc;
            doc["model"] = {{"Q", spec.leaves}, {"rho", r.rho}, {"alpha", r.alpha}};
            doc["forward"] = {{"odds_ratio", r.forward_odds_ratio},
                              {"chance_difference", r.forward_chance_difference},
                              {"relative_chance", r.forward_relative_chance}};
            doc["reversed"] = {
                {"odds_ratio", r.reversed_odds_ratio},
                {"relative_chance_given_miss", r.reversed_relative_chance_given_miss},
                {"relative_chance_given_succeed", r.reversed_relative_chance_given_succeed},
                {"chance_difference_given_miss", r.reversed_chance_difference_given_miss},
                {"chance_difference_given_succeed", r.reversed_chance_difference_given_succeed},
                {"extreme_relative_chance", r.extreme_relative_chance}};
            out << doc.dump(2) << '\n';
            return;
        }
        out << "alpha " << fmt12(r.alpha) << "  rho " << fmt12(r.rho) << "  Q "
            << spec.leaves << "\n\n";
        out << "dependence of each leaf on the root, given the rest\n";
        out << "  odds-ratio        " << fmt12(r.forward_odds_ratio) << '\n';
        out << "  chance difference " << fmt12(r.forward_chance_difference) << " ("
            << fmt2(r.forward_chance_difference) << ")\n";
        out << "  relative chance   " << fmt12(r.forward_relative_chance) << '\n';
        out << "\ndependence of the root on a leaf, given another leaf\n";
        out << "  odds-ratio        " << fmt12(r.reversed_odds_ratio) << " (both levels)\n";
        out << "  chance difference " << fmt12(r.reversed_chance_difference_given_miss) << " ("
            << fmt2(r.reversed_chance_difference_given_miss) << ") at a miss, "
            << fmt12(r.reversed_chance_difference_given_succeed) << " ("
            << fmt2(r.reversed_chance_difference_given_succeed) << ") at a success\n";
        out << "  relative chance   " << fmt12(r.reversed_relative_chance_given_miss) << " ("
            << fmt2(r.reversed_relative_chance_given_miss) << ") at a miss, "
            << fmt12(r.reversed_relative_chance_given_succeed) << " ("
            << fmt2(r.reversed_relative_chance_given_succeed) << ") at a success\n";
        out << "\nextreme relative chance at Q-1 misses: "
            << fmt12(r.extreme_relative_chance) << '\n';
    }
};

// -------------------------------------------------------------------- plan

struct PlanCmd {
    SpecOpts spec_opts;
    OutputOpt output;
    std::string format = "table";

    void attach(CLI::App& app) {
        auto* cmd = app.add_subcommand(
            "plan", "sample size at which the smallest cell has expected count one");
        spec_opts.attach(cmd);
        output.attach(cmd);
        cmd->add_option("--format", format, "table or json")
            ->check(CLI::IsMember({"table", "json"}));
        cmd->callback([this] { run(); });
    }

    void run() const {
        const ModelSpec spec = spec_opts.spec();
        const std::uint64_t n = plan_sample_size(spec);
        const double smallest = 1.0 / spec.norm_const();
        auto file = output.open_file();
        std::ostream& out = file ? *file : std::cout;
        if (format == "json") {
            json doc;
            doc["model"] = {{"Q", spec.leaves}, {"rho", spec.rho}, {"alpha", spec.alpha}};
            doc["sample_size"] = n;
            doc["smallest_cell_prob"] = smallest;
            out << doc.dump(2) << '\n';
            return;
        }
        out << "sample size          " << n << '\n';
        out << "smallest cell prob   " << fmt12(smallest) << '\n';
    }
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "Jointly symmetric binary star-graph distributions: exact tables, "
        "Kronecker transforms, dependence measures and estimation"};
    app.require_subcommand(1);

    TabulateCmd tabulate;
    MomentsCmd moments;
    FitCmd fit;
    SimulateCmd simulate;
    ReversalCmd reversal;
    PlanCmd plan;
    tabulate.attach(app);
    moments.attach(app);
    fit.attach(app);
    simulate.attach(app);
    reversal.attach(app);
    plan.attach(app);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const usage_error& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 2;
    } catch (const data_error& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 3;
    } catch (const numerical_error& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return 4;
    } catch (const std::domain_error& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 3;
    } catch (const std::length_error& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 3;
    } catch (const std::overflow_error& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 4;
    }
    return 0;
}
