#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include <cmgnd/csv.hpp>

#ifndef CMGND_CLI_PATH
#error "CMGND_CLI_PATH must point at the cmgnd binary"
#endif

using nlohmann::json;

namespace {

namespace fs = std::filesystem;

const fs::path& work_dir() {
    static const fs::path dir = [] {
        fs::path d = fs::temp_directory_path() / ("cmgnd_cli_" + std::to_string(::getpid()));
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

fs::path path_of(const std::string& name) { return work_dir() / name; }

void write(const std::string& name, const std::string& content) {
    std::ofstream out(path_of(name));
    REQUIRE(out.good());
    out << content;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    REQUIRE(in.good());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

int run_cli(const std::string& args, const std::string& stdout_name = "") {
    std::string cmd = std::string(CMGND_CLI_PATH) + " " + args;
    if (stdout_name.empty()) {
        cmd += " > /dev/null";
    } else {
        cmd += " > " + path_of(stdout_name).string();
    }
    cmd += " 2> " + path_of("stderr.txt").string();
    const int status = std::system(cmd.c_str());
    REQUIRE(WIFEXITED(status));
    return WEXITSTATUS(status);
}

int count_lines(const std::string& text) {
    int n = 0;
    for (char c : text) {
        if (c == '\n') ++n;
    }
    return n;
}

}  // namespace

TEST_CASE("help succeeds and missing subcommands fail", "[cli]") {
    CHECK(run_cli("--help") == 0);
    CHECK(run_cli("fit --help") == 0);
    CHECK(run_cli("") == 1);
    CHECK(run_cli("frobnicate") == 1);
    CHECK(run_cli("fit") == 1);  // missing required options
}

TEST_CASE("sample, fit and density round-trip through files", "[cli]") {
    write("truth.json", R"({
        "weights": [0.5, 0.5],
        "components": [
            {"mu": 0.0, "sigma": 1.0, "nu": 1.5},
            {"mu": 8.0, "sigma": 1.0, "nu": 1.5}
        ]
    })");
    write("cheap.json", R"({"n_starts": 2, "seed": 7})");

    REQUIRE(run_cli("sample --model " + path_of("truth.json").string() +
                    " --n 800 --seed 4 --out " + path_of("draws.csv").string()) == 0);
    const auto draws = slurp(path_of("draws.csv"));
    CHECK(draws.rfind("id,value\n", 0) == 0);
    CHECK(count_lines(draws) == 801);

    const std::string fit_cmd = "fit " + path_of("draws.csv").string() +
                                " --k 2 --constraints UCC --config " +
                                path_of("cheap.json").string() + " --out " +
                                path_of("fit.json").string();
    REQUIRE(run_cli(fit_cmd, "fit_stdout.txt") == 0);
    const auto table_text = slurp(path_of("fit_stdout.txt"));
    CHECK(table_text.find("component") != std::string::npos);
    CHECK(table_text.find("log L") != std::string::npos);

    const json fit = json::parse(slurp(path_of("fit.json")));
    const auto& comps = fit.at("model").at("components");
    REQUIRE(comps.size() == 2);
    // The UCC ties survive serialization bit-for-bit.
    CHECK(comps[0].at("sigma").get<double>() == comps[1].at("sigma").get<double>());
    CHECK(comps[0].at("nu").get<double>() == comps[1].at("nu").get<double>());
    CHECK(comps[0].at("mu").get<double>() != comps[1].at("mu").get<double>());
    CHECK(fit.at("model").at("constraints").at("sigma").dump() == "[[1,2]]");
    CHECK(fit.at("converged").get<bool>());

    // Identical invocation, identical result.
    REQUIRE(run_cli("fit " + path_of("draws.csv").string() +
                        " --k 2 --constraints UCC --config " + path_of("cheap.json").string() +
                        " --out " + path_of("fit2.json").string()) == 0);
    const json fit2 = json::parse(slurp(path_of("fit2.json")));
    CHECK(fit.at("log_lik").get<double>() == fit2.at("log_lik").get<double>());
    CHECK(fit.at("iterations").get<int>() == fit2.at("iterations").get<int>());

    // The fitted model block works as a density input; its mass is 1.
    write("fitted_model.json", fit.at("model").dump());
    REQUIRE(run_cli("density --model " + path_of("fitted_model.json").string() +
                    " --grid -12,20,3201 --out " + path_of("dens.csv").string()) == 0);
    const auto dens = cmgnd::read_csv_file(path_of("dens.csv").string());
    REQUIRE(dens.header.size() == 4);  // x, mixture, component1, component2
    const auto x = cmgnd::numeric_column(dens, 0);
    const auto f = cmgnd::numeric_column(dens, 1);
    double mass = 0.0;
    for (std::size_t i = 1; i < x.size(); ++i) {
        mass += 0.5 * (x[i] - x[i - 1]) * (f[i] + f[i - 1]);
    }
    CHECK(std::abs(mass - 1.0) < 1e-3);
}

TEST_CASE("returns converts prices and labels rows by the later date", "[cli]") {
    write("prices.csv",
          "date,close\n"
          "2024-01-02,100\n"
          "2024-01-03,105\n"
          "2024-01-04,105\n"
          "2024-01-05,99.75\n"
          "2024-01-08,101.2\n"
          "2024-01-09,100.8\n");
    REQUIRE(run_cli("returns " + path_of("prices.csv").string() + " --describe --out " +
                        path_of("rets.csv").string(),
                    "describe.txt") == 0);
    const auto rets = cmgnd::read_csv_file(path_of("rets.csv").string());
    REQUIRE(rets.rows.size() == 5);
    CHECK(rets.header == std::vector<std::string>{"id", "return"});
    CHECK(rets.rows[0][0] == "2024-01-03");
    CHECK(rets.rows[4][0] == "2024-01-09");
    const auto values = cmgnd::numeric_column(rets, 1);
    CHECK(std::abs(values[0] - 100.0 * std::log(1.05)) < 1e-12);
    CHECK(values[1] == 0.0);

    const auto described = slurp(path_of("describe.txt"));
    CHECK(described.find("skewness") != std::string::npos);
    CHECK(described.find("jb") != std::string::npos);
}

TEST_CASE("select ranks the default family and reports consistent BIC", "[cli]") {
    write("truth.json", R"({
        "weights": [0.5, 0.5],
        "components": [
            {"mu": 0.0, "sigma": 1.0, "nu": 1.5},
            {"mu": 8.0, "sigma": 1.0, "nu": 1.5}
        ]
    })");
    write("cheap.json", R"({"n_starts": 1, "seed": 5})");
    REQUIRE(run_cli("sample --model " + path_of("truth.json").string() +
                    " --n 500 --seed 11 --out " + path_of("sel_data.csv").string()) == 0);

    REQUIRE(run_cli("select " + path_of("sel_data.csv").string() + " --k 2 --config " +
                        path_of("cheap.json").string() + " --out " +
                        path_of("report.json").string(),
                    "table.txt") == 0);
    const auto table = slurp(path_of("table.txt"));
    CHECK(table.rfind("model", 0) == 0);
    CHECK(table.find("* ") != std::string::npos);

    const json report = json::parse(slurp(path_of("report.json")));
    REQUIRE(report.at("entries").size() == 7);
    const int winner = report.at("winner").get<int>();
    REQUIRE(winner >= 0);
    REQUIRE(winner < 7);
    CHECK(report.at("entries")[static_cast<std::size_t>(winner)].at("rank").get<int>() == 1);
    for (const auto& e : report.at("entries")) {
        REQUIRE_FALSE(e.at("failed").get<bool>());
        const double ll = e.at("log_lik").get<double>();
        const double bic = e.at("bic").get<double>();
        const double p = e.at("free_parameters").get<double>();
        CHECK(std::abs(bic - (p * std::log(500.0) - 2.0 * ll)) < 1e-9 * std::abs(bic));
    }
}

TEST_CASE("simulate writes experiment tables", "[cli]") {
    write("scenario.json", R"({"true_code": "UCU", "overlap": "low", "n": 150, "seed": 3})");
    write("sim_cfg.json", R"({"n_starts": 1, "max_iters": 200})");
    REQUIRE(run_cli("simulate --scenario " + path_of("scenario.json").string() +
                    " --experiment rmse --reps 2 --specs UCU --config " +
                    path_of("sim_cfg.json").string() + " --out-csv " +
                    path_of("rmse.csv").string() + " --out-json " +
                    path_of("rmse.json").string()) == 0);
    const auto csv = slurp(path_of("rmse.csv"));
    CHECK(csv.rfind("scenario,n,reps,spec,parameter,rmse,reps_used,failures\n", 0) == 0);
    CHECK(count_lines(csv) == 13);  // header + 12 parameter rows
    CHECK(csv.find("UCU/low/n=150") != std::string::npos);

    const json jt = json::parse(slurp(path_of("rmse.json")));
    CHECK(jt.at("rows").size() == 12);
    CHECK(jt.at("reps").get<int>() == 2);
}

TEST_CASE("failures map to documented exit codes", "[cli]") {
    CHECK(run_cli("fit /nonexistent.csv --k 2 --constraints UUU") == 1);

    write("tiny.csv", "id,x\n1,0.5\n2,1.5\n3,2.5\n4,3.5\n5,4.5\n");
    CHECK(run_cli("fit " + path_of("tiny.csv").string() + " --k 2 --constraints UUU") == 1);

    write("bad_model.json", R"({
        "weights": [0.7, 0.7],
        "components": [
            {"mu": 0.0, "sigma": 1.0, "nu": 2.0},
            {"mu": 4.0, "sigma": 1.0, "nu": 2.0}
        ]
    })");
    CHECK(run_cli("sample --model " + path_of("bad_model.json").string() + " --n 10") == 1);

    write("truth.json", R"({
        "weights": [0.5, 0.5],
        "components": [
            {"mu": 0.0, "sigma": 1.0, "nu": 1.5},
            {"mu": 8.0, "sigma": 1.0, "nu": 1.5}
        ]
    })");
    CHECK(run_cli("density --model " + path_of("truth.json").string() + " --grid 5,2,100") == 1);
    CHECK(run_cli("density --model " + path_of("truth.json").string() + " --grid nonsense") == 1);

    write("broken.json", "{ not json");
    CHECK(run_cli("sample --model " + path_of("broken.json").string() + " --n 10") == 1);

    // Every replication fails (n too small for K = 3), so the experiment aborts.
    write("doomed.json", R"({"true_code": "UUU", "overlap": "low", "n": 9, "seed": 1})");
    CHECK(run_cli("simulate --scenario " + path_of("doomed.json").string() +
                  " --experiment rmse --reps 2 --specs UUU") == 2);
}
