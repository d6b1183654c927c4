// Command-line driver: fit, select, simulate, sample, returns, density.
// Exit codes: 0 success, 1 input error, 2 fit/experiment failure, 3 internal.

#include <cctype>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <cmgnd/cmgnd.hpp>

namespace {

using nlohmann::json;

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw cmgnd::input_error("cannot open " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out) throw cmgnd::input_error("cannot write " + path);
    out << content;
}

json parse_json_file(const std::string& path) { return json::parse(read_file(path)); }

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

std::string fmt_full(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

bool looks_like_code(const std::string& s) {
    if (s.size() != 3) return false;
    for (char c : s) {
        if (c != 'C' && c != 'U' && c != 'c' && c != 'u') return false;
    }
    return true;
}

cmgnd::Block parse_block(const std::string& csv, int k) {
    cmgnd::Block block;
    if (csv.empty()) {
        for (int i = 0; i < k; ++i) block.push_back(i);
        return block;
    }
    std::istringstream is(csv);
    std::string tok;
    while (std::getline(is, tok, ',')) {
        std::size_t pos = 0;
        int idx = 0;
        try {
            idx = std::stoi(tok, &pos);
        } catch (const std::exception&) {
            pos = 0;
        }
        if (pos != tok.size() || idx < 1 || idx > k) {
            throw cmgnd::input_error("--block entries must be component numbers in 1.." +
                                     std::to_string(k));
        }
        block.push_back(idx - 1);
    }
    return block;
}

cmgnd::ConstraintSpec parse_constraints(const std::string& arg, int k,
                                        const cmgnd::Block& designated) {
    if (looks_like_code(arg)) {
        return cmgnd::ModelCode::parse(arg).to_spec(k, designated);
    }
    auto spec = cmgnd::constraints_from_json(parse_json_file(arg));
    spec.validate(k);
    return spec;
}

std::vector<double> load_column(const std::string& path, const std::string& col) {
    const auto table = cmgnd::read_csv_file(path);
    return cmgnd::numeric_column(table, cmgnd::resolve_column(table, col));
}

void print_model(std::ostream& os, const cmgnd::MixtureModel& m) {
    os << "component      weight          mu       sigma          nu\n";
    for (std::size_t k = 0; k < m.components.size(); ++k) {
        char line[160];
        std::snprintf(line, sizeof(line), "%9zu  %10s  %10s  %10s  %10s\n", k + 1,
                      fmt(m.weights[k]).c_str(), fmt(m.components[k].mu).c_str(),
                      fmt(m.components[k].sigma).c_str(), fmt(m.components[k].nu).c_str());
        os << line;
    }
}

struct FitArgs {
    std::string data_path;
    int k = 2;
    std::string constraints;
    std::string col;
    std::string block;
    std::string config_path;
    std::string out_path;
};

void run_fit(const FitArgs& a) {
    const auto data = load_column(a.data_path, a.col);
    const auto designated = parse_block(a.block, a.k);
    const auto spec = parse_constraints(a.constraints, a.k, designated);
    cmgnd::FitConfig cfg;
    if (!a.config_path.empty()) cfg = cmgnd::fit_config_from_json(parse_json_file(a.config_path));
    const auto result = cmgnd::ecm_fit(data, a.k, spec, cfg);
    print_model(std::cout, result.model);
    std::cout << "log L = " << fmt(result.log_lik) << "   BIC = " << fmt(result.bic)
              << "   p = " << cmgnd::free_parameter_count(a.k, spec)
              << "   iterations = " << result.iterations
              << "   converged = " << (result.converged ? "yes" : "no") << '\n';
    if (!a.out_path.empty()) {
        write_file(a.out_path, cmgnd::fit_result_to_json(result).dump(2) + "\n");
    }
}

struct SelectArgs {
    std::string data_path;
    int k = 2;
    std::string family = "default";
    std::string col;
    std::string block;
    std::string config_path;
    std::string out_path;
};

void run_select(const SelectArgs& a) {
    const auto data = load_column(a.data_path, a.col);
    const auto designated = parse_block(a.block, a.k);
    std::vector<cmgnd::ConstraintSpec> candidates;
    if (a.family == "default") {
        candidates = cmgnd::enumerate_family(a.k, {}, designated);
    } else {
        candidates = cmgnd::spec_list_from_json(parse_json_file(a.family), a.k, designated);
    }
    cmgnd::FitConfig cfg;
    if (!a.config_path.empty()) cfg = cmgnd::fit_config_from_json(parse_json_file(a.config_path));
    const auto report = cmgnd::select_by_bic(data, candidates, a.k, cfg);
    std::cout << cmgnd::render_selection_table(report);
    if (!a.out_path.empty()) {
        write_file(a.out_path, cmgnd::selection_report_to_json(report).dump(2) + "\n");
    }
}

struct SimulateArgs {
    std::string scenario_path;
    std::string experiment;
    int reps = 0;
    std::string specs;
    std::string config_path;
    int threads = 1;
    std::string out_csv;
    std::string out_json;
};

std::vector<cmgnd::ConstraintSpec> simulate_specs(const SimulateArgs& a,
                                                  const cmgnd::ScenarioConfig& sc) {
    const cmgnd::Block block = cmgnd::kScenarioBlock;
    const int k = cmgnd::kScenarioComponents;
    if (!a.specs.empty()) {
        std::vector<cmgnd::ConstraintSpec> specs;
        std::istringstream is(a.specs);
        std::string tok;
        while (std::getline(is, tok, ',')) {
            specs.push_back(cmgnd::ModelCode::parse(tok).to_spec(k, block));
        }
        if (specs.empty()) throw cmgnd::input_error("--specs parsed to an empty list");
        return specs;
    }
    if (a.experiment == "rmse") {
        // Benchmark comparison: the generating spec against the unconstrained fit.
        std::vector<cmgnd::ConstraintSpec> specs{sc.true_code.to_spec(k, block)};
        const auto uuu = cmgnd::ConstraintSpec::singletons(k);
        if (!(specs.front() == uuu)) specs.push_back(uuu);
        return specs;
    }
    cmgnd::FamilyPalette palette;
    palette.mu = false;
    return cmgnd::enumerate_family(k, palette, block);
}

void run_simulate(const SimulateArgs& a) {
    auto sc = cmgnd::scenario_from_json(parse_json_file(a.scenario_path));
    if (a.reps > 0) sc.reps = a.reps;
    cmgnd::FitConfig cfg;
    if (!a.config_path.empty()) cfg = cmgnd::fit_config_from_json(parse_json_file(a.config_path));
    const auto specs = simulate_specs(a, sc);

    std::string csv;
    json out_json;
    if (a.experiment == "rmse") {
        const auto table = cmgnd::rmse_experiment(sc, specs, cfg, a.threads);
        csv = cmgnd::rmse_csv(table);
        out_json = cmgnd::rmse_table_to_json(table);
    } else if (a.experiment == "bic") {
        const auto freq = cmgnd::bic_selection_experiment(sc, specs, cfg, a.threads);
        csv = cmgnd::selection_csv(freq);
        out_json = cmgnd::selection_frequencies_to_json(freq);
    } else if (a.experiment == "moments") {
        const auto table = cmgnd::moment_rmse_experiment(sc, specs, cfg, a.threads);
        csv = cmgnd::moment_rmse_csv(table);
        out_json = cmgnd::moment_table_to_json(table);
    } else {
        throw cmgnd::input_error("--experiment must be rmse, bic or moments");
    }

    if (a.out_csv.empty()) {
        std::cout << csv;
    } else {
        write_file(a.out_csv, csv);
    }
    if (!a.out_json.empty()) {
        write_file(a.out_json, out_json.dump(2) + "\n");
    }
}

struct SampleArgs {
    std::string model_path;
    int n = 0;
    std::uint64_t seed = 0;
    std::string out_path;
};

void run_sample(const SampleArgs& a) {
    if (a.n < 1) throw cmgnd::input_error("--n must be >= 1");
    const auto model = cmgnd::model_from_json(parse_json_file(a.model_path));
    cmgnd::Rng rng(a.seed);
    const auto draws = cmgnd::mixture_sample(model, static_cast<std::size_t>(a.n), rng);
    std::string csv = "id,value\n";
    for (std::size_t i = 0; i < draws.size(); ++i) {
        csv += std::to_string(i + 1) + ',' + fmt_full(draws[i]) + '\n';
    }
    if (a.out_path.empty()) {
        std::cout << csv;
    } else {
        write_file(a.out_path, csv);
    }
}

struct ReturnsArgs {
    std::string prices_path;
    std::string col;
    bool describe = false;
    std::string out_path;
};

void run_returns(const ReturnsArgs& a) {
    const auto table = cmgnd::read_csv_file(a.prices_path);
    const auto prices = cmgnd::numeric_column(table, cmgnd::resolve_column(table, a.col));
    const auto ids = cmgnd::id_column(table);
    const auto returns = cmgnd::compute_returns(prices);
    std::string csv = "id,return\n";
    for (std::size_t i = 0; i < returns.size(); ++i) {
        csv += ids[i + 1] + ',' + fmt_full(returns[i]) + '\n';
    }
    if (a.out_path.empty()) {
        std::cout << csv;
    } else {
        write_file(a.out_path, csv);
    }
    if (a.describe) {
        const auto st = cmgnd::describe(returns);
        std::ostream& os = std::cout;
        os << "n         " << st.n << '\n';
        os << "mean      " << fmt(st.mean) << '\n';
        os << "median    " << fmt(st.median) << '\n';
        os << "std       " << fmt(st.std_dev) << '\n';
        os << "skewness  " << fmt(st.skewness) << '\n';
        os << "kurtosis  " << fmt(st.kurtosis) << '\n';
        os << "min       " << fmt(st.min) << '\n';
        os << "max       " << fmt(st.max) << '\n';
        os << "jb        " << fmt(st.jb) << '\n';
    }
}

struct DensityArgs {
    std::string model_path;
    std::string grid;
    std::string out_path;
};

void run_density(const DensityArgs& a) {
    const auto model = cmgnd::model_from_json(parse_json_file(a.model_path));
    double lo = 0.0, hi = 0.0;
    int points = 0;
    {
        std::istringstream is(a.grid);
        std::string t1, t2, t3;
        if (!std::getline(is, t1, ',') || !std::getline(is, t2, ',') || !std::getline(is, t3)) {
            throw cmgnd::input_error("--grid must be lo,hi,points");
        }
        try {
            lo = std::stod(t1);
            hi = std::stod(t2);
            points = std::stoi(t3);
        } catch (const std::exception&) {
            throw cmgnd::input_error("--grid must be lo,hi,points");
        }
    }
    const auto curve = cmgnd::density_curve(model, lo, hi, points);
    std::string csv = "x,mixture";
    for (std::size_t k = 0; k < curve.component.size(); ++k) {
        csv += ",component" + std::to_string(k + 1);
    }
    csv += '\n';
    for (std::size_t i = 0; i < curve.x.size(); ++i) {
        csv += fmt_full(curve.x[i]) + ',' + fmt_full(curve.mixture[i]);
        for (const auto& comp : curve.component) {
            csv += ',' + fmt_full(comp[i]);
        }
        csv += '\n';
    }
    if (a.out_path.empty()) {
        std::cout << csv;
    } else {
        write_file(a.out_path, csv);
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"finite mixtures of generalized normal distributions with equality constraints"};
    app.require_subcommand(1);

    FitArgs fit_args;
    auto* fit = app.add_subcommand("fit", "fit a constrained mixture to a CSV column");
    fit->add_option("data", fit_args.data_path, "input CSV (header row, first column is an id)")
        ->required();
    fit->add_option("--k", fit_args.k, "number of components")->required();
    fit->add_option("--constraints", fit_args.constraints,
                    "three-letter code (e.g. UCU) or constraints JSON file")
        ->required();
    fit->add_option("--col", fit_args.col, "numeric column name or index (default: last)");
    fit->add_option("--block", fit_args.block,
                    "tied components for code constraints, e.g. 2,3 (default: all)");
    fit->add_option("--config", fit_args.config_path, "fit configuration JSON file");
    fit->add_option("--out", fit_args.out_path, "write the full result as JSON");
    fit->callback([&] { run_fit(fit_args); });

    SelectArgs select_args;
    auto* select = app.add_subcommand("select", "fit a model family and rank by BIC");
    select->add_option("data", select_args.data_path, "input CSV")->required();
    select->add_option("--k", select_args.k, "number of components")->required();
    select->add_option("--family", select_args.family,
                       "'default' or a JSON file listing candidates");
    select->add_option("--col", select_args.col, "numeric column name or index (default: last)");
    select->add_option("--block", select_args.block, "tied components, e.g. 2,3 (default: all)");
    select->add_option("--config", select_args.config_path, "fit configuration JSON file");
    select->add_option("--out", select_args.out_path, "write the report as JSON");
    select->callback([&] { run_select(select_args); });

    SimulateArgs sim_args;
    auto* simulate = app.add_subcommand("simulate", "run a benchmark experiment");
    simulate->add_option("--scenario", sim_args.scenario_path, "scenario JSON file")->required();
    simulate->add_option("--experiment", sim_args.experiment, "rmse, bic or moments")->required();
    simulate->add_option("--reps", sim_args.reps, "override the scenario's replication count");
    simulate->add_option("--specs", sim_args.specs, "comma-separated codes, e.g. UCU,UUU");
    simulate->add_option("--config", sim_args.config_path, "fit configuration JSON file");
    simulate->add_option("--threads", sim_args.threads, "replication workers (default 1)");
    simulate->add_option("--out-csv", sim_args.out_csv, "write the table as CSV (default stdout)");
    simulate->add_option("--out-json", sim_args.out_json, "also write the table as JSON");
    simulate->callback([&] { run_simulate(sim_args); });

    SampleArgs sample_args;
    auto* sample = app.add_subcommand("sample", "draw from a mixture model");
    sample->add_option("--model", sample_args.model_path, "model JSON file")->required();
    sample->add_option("--n", sample_args.n, "number of draws")->required();
    sample->add_option("--seed", sample_args.seed, "random seed");
    sample->add_option("--out", sample_args.out_path, "output CSV (default stdout)");
    sample->callback([&] { run_sample(sample_args); });

    ReturnsArgs returns_args;
    auto* returns = app.add_subcommand("returns", "log-returns (daily %) from a price series");
    returns->add_option("prices", returns_args.prices_path, "price CSV")->required();
    returns->add_option("--col", returns_args.col, "price column name or index (default: last)");
    returns->add_flag("--describe", returns_args.describe, "print descriptive statistics");
    returns->add_option("--out", returns_args.out_path, "output CSV (default stdout)");
    returns->callback([&] { run_returns(returns_args); });

    DensityArgs density_args;
    auto* density = app.add_subcommand("density", "evaluate a mixture density on a grid");
    density->add_option("--model", density_args.model_path, "model JSON file")->required();
    density->add_option("--grid", density_args.grid, "lo,hi,points")->required();
    density->add_option("--out", density_args.out_path, "output CSV (default stdout)");
    density->callback([&] { run_density(density_args); });

    try {
        app.parse(argc, argv);
        return 0;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const cmgnd::fit_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const cmgnd::experiment_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return 3;
    }
}
