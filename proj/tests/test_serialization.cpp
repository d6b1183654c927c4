#include <catch2/catch_amalgamated.hpp>

#include <string>
#include <vector>

#include <cmgnd/constraints.hpp>
#include <cmgnd/ecm.hpp>
#include <cmgnd/mixture.hpp>
#include <cmgnd/serialization.hpp>
#include <cmgnd/simulation.hpp>

using Catch::Approx;
using cmgnd::Block;
using cmgnd::ConstraintSpec;
using cmgnd::MixtureModel;
using nlohmann::json;

TEST_CASE("models survive a JSON round trip exactly", "[serialization]") {
    MixtureModel m;
    m.weights = {0.25, 0.75};
    m.components = {{-1.5, 0.381, 0.97}, {3.25, 2.0, 5.5}};
    m.constraints = ConstraintSpec::singletons(2);
    m.constraints.nu_blocks = {{0, 1}};
    m.components[0].nu = 5.5;  // keep the tie satisfied

    const json j = cmgnd::model_to_json(m);
    const MixtureModel back = cmgnd::model_from_json(j);
    CHECK(back.weights == m.weights);
    for (std::size_t k = 0; k < 2; ++k) {
        CHECK(back.components[k].mu == m.components[k].mu);
        CHECK(back.components[k].sigma == m.components[k].sigma);
        CHECK(back.components[k].nu == m.components[k].nu);
    }
    CHECK(back.constraints.nu_blocks == cmgnd::Partition{{0, 1}});

    // Round trip through text as well: shortest-round-trip doubles.
    const MixtureModel reparsed = cmgnd::model_from_json(json::parse(j.dump()));
    CHECK(reparsed.components[0].sigma == m.components[0].sigma);
}

TEST_CASE("component indices are one-based on the wire", "[serialization]") {
    ConstraintSpec spec = ConstraintSpec::singletons(3);
    spec.sigma_blocks = {{0}, {1, 2}};
    const json j = cmgnd::constraints_to_json(spec);
    CHECK(j.at("sigma").dump() == "[[1],[2,3]]");
    CHECK(j.at("mu").dump() == "[[1],[2],[3]]");

    const ConstraintSpec back = cmgnd::constraints_from_json(j);
    CHECK(back.sigma_blocks == cmgnd::Partition{{0}, {1, 2}});

    // Reading canonicalizes block order and members.
    const json scrambled = json::parse(
        R"({"mu": [[2],[1],[3]], "sigma": [[3,2],[1]], "nu": [[1],[2],[3]]})");
    const ConstraintSpec canon = cmgnd::constraints_from_json(scrambled);
    CHECK(canon.mu_blocks == cmgnd::Partition{{0}, {1}, {2}});
    CHECK(canon.sigma_blocks == cmgnd::Partition{{0}, {1, 2}});
}

TEST_CASE("models without constraints default to singletons", "[serialization]") {
    const json j = json::parse(R"({
        "weights": [0.5, 0.5],
        "components": [
            {"mu": 0.0, "sigma": 1.0, "nu": 2.0},
            {"mu": 4.0, "sigma": 1.0, "nu": 2.0}
        ]
    })");
    const MixtureModel m = cmgnd::model_from_json(j);
    CHECK(m.constraints.mu_blocks == cmgnd::Partition{{0}, {1}});
    CHECK(m.constraints.nu_blocks == cmgnd::Partition{{0}, {1}});
}

TEST_CASE("malformed model JSON is rejected with input errors", "[serialization]") {
    CHECK_THROWS_AS(cmgnd::model_from_json(json::parse("[1,2]")), cmgnd::input_error);
    CHECK_THROWS_AS(cmgnd::model_from_json(json::parse(R"({"components": []})")),
                    cmgnd::input_error);
    const json bad_weights = json::parse(R"({
        "weights": [0.5, 0.6],
        "components": [
            {"mu": 0.0, "sigma": 1.0, "nu": 2.0},
            {"mu": 4.0, "sigma": 1.0, "nu": 2.0}
        ]
    })");
    CHECK_THROWS_AS(cmgnd::model_from_json(bad_weights), cmgnd::invalid_parameter);
    const json bad_blocks = json::parse(
        R"({"mu": [[0],[1]], "sigma": [[1],[2]], "nu": [[1],[2]]})");
    // Index 0 on the wire maps to -1 internally and must fail validation.
    auto spec = cmgnd::constraints_from_json(bad_blocks);
    CHECK_THROWS_AS(spec.validate(2), cmgnd::input_error);
    CHECK_THROWS_AS(cmgnd::constraints_from_json(json::parse(R"({"mu": "x"})")),
                    cmgnd::input_error);
}

TEST_CASE("partial fit configs keep defaults for missing keys", "[serialization]") {
    const cmgnd::FitConfig defaults;
    const auto cfg = cmgnd::fit_config_from_json(json::parse(R"({"n_starts": 9, "seed": 77})"));
    CHECK(cfg.n_starts == 9);
    CHECK(cfg.seed == 77);
    CHECK(cfg.max_iters == defaults.max_iters);
    CHECK(cfg.loglik_rel_tol == defaults.loglik_rel_tol);
    CHECK(cfg.use_adaptive_step == defaults.use_adaptive_step);

    const json full = cmgnd::fit_config_to_json(defaults);
    const auto back = cmgnd::fit_config_from_json(full);
    CHECK(back.sigma_min == defaults.sigma_min);
    CHECK(back.nu_grad_skip_threshold == defaults.nu_grad_skip_threshold);

    CHECK_THROWS_AS(cmgnd::fit_config_from_json(json::parse(R"({"n_starts": 0})")),
                    cmgnd::input_error);
    CHECK_THROWS_AS(cmgnd::fit_config_from_json(json::parse("3")), cmgnd::input_error);
}

TEST_CASE("scenario configs round trip through JSON", "[serialization]") {
    cmgnd::ScenarioConfig sc;
    sc.true_code = cmgnd::ModelCode::parse("UCC");
    sc.overlap = cmgnd::Overlap::medium;
    sc.n = 250;
    sc.reps = 10;
    sc.seed = 4242;
    const auto back = cmgnd::scenario_from_json(cmgnd::scenario_to_json(sc));
    CHECK(back.true_code.str() == "UCC");
    CHECK(back.overlap == cmgnd::Overlap::medium);
    CHECK(back.n == 250);
    CHECK(back.reps == 10);
    CHECK(back.seed == 4242);

    const auto sparse = cmgnd::scenario_from_json(json::parse(R"({"true_code": "UUC"})"));
    CHECK(sparse.overlap == cmgnd::Overlap::low);
    CHECK(sparse.n == 1000);

    CHECK_THROWS_AS(cmgnd::scenario_from_json(json::parse(R"({"true_code": "CUU"})")),
                    cmgnd::input_error);
}

TEST_CASE("candidate lists accept codes and explicit constraint objects", "[serialization]") {
    const json j = json::parse(R"([
        "UUU",
        "ucc",
        {"mu": [[1],[2],[3]], "sigma": [[1],[2,3]], "nu": [[1],[2],[3]]}
    ])");
    const auto specs = cmgnd::spec_list_from_json(j, 3, Block{1, 2});
    REQUIRE(specs.size() == 3);
    CHECK(cmgnd::model_label(specs[0], 3) == "UUU");
    CHECK(cmgnd::model_label(specs[1], 3) == "UCC");
    CHECK(cmgnd::model_label(specs[2], 3) == "UCU");
    CHECK(specs[1].sigma_blocks == cmgnd::Partition{{0}, {1, 2}});

    CHECK_THROWS_AS(cmgnd::spec_list_from_json(json::array(), 3, Block{1, 2}),
                    cmgnd::input_error);
    CHECK_THROWS_AS(cmgnd::spec_list_from_json(json::parse(R"(["XZY"])"), 3, Block{1, 2}),
                    cmgnd::input_error);
}

TEST_CASE("fit results and reports serialize their key fields", "[serialization]") {
    MixtureModel truth;
    truth.weights = {0.5, 0.5};
    truth.components = {{0.0, 1.0, 2.0}, {8.0, 1.0, 2.0}};
    truth.constraints = ConstraintSpec::singletons(2);
    cmgnd::Rng rng(301);
    const auto data = cmgnd::mixture_sample(truth, 400, rng);

    cmgnd::FitConfig cfg;
    cfg.n_starts = 1;
    cfg.seed = 11;
    const auto fit = cmgnd::ecm_fit(data, 2, ConstraintSpec::singletons(2), cfg);
    const json jf = cmgnd::fit_result_to_json(fit);
    CHECK(jf.at("log_lik").get<double>() == fit.log_lik);
    CHECK(jf.at("bic").get<double>() == fit.bic);
    CHECK(jf.at("iterations").get<int>() == fit.iterations);
    CHECK(jf.at("model").at("weights").size() == 2);
    CHECK(jf.at("loglik_trace").size() == fit.loglik_trace.size());
    CHECK(jf.at("diagnostics").is_object());

    const auto report =
        cmgnd::select_by_bic(data, {ConstraintSpec::singletons(2)}, 2, cfg);
    const json jr = cmgnd::selection_report_to_json(report);
    CHECK(jr.at("winner").get<int>() == report.winner);
    CHECK(jr.at("winner_label").get<std::string>() == "UUU");
    REQUIRE(jr.at("entries").size() == 1);
    CHECK(jr.at("entries")[0].at("failed").get<bool>() == false);
    CHECK(jr.at("entries")[0].at("rank").get<int>() == 1);
    CHECK(jr.at("entries")[0].contains("log_lik"));
}

TEST_CASE("experiment tables serialize row by row", "[serialization]") {
    cmgnd::RmseTable table;
    table.scenario = "UCU/low/n=100";
    table.n = 100;
    table.reps = 4;
    table.rows.push_back({"UCU", "mu1", 0.125, 4, 0});
    const json jt = cmgnd::rmse_table_to_json(table);
    CHECK(jt.at("rows")[0].at("parameter") == "mu1");
    CHECK(jt.at("rows")[0].at("rmse").get<double>() == 0.125);

    cmgnd::SelectionFrequencies freq;
    freq.scenario = "UCU/low/n=100";
    freq.reps = 4;
    freq.reps_used = 4;
    freq.rows.push_back({"UUU", 1, 0.25});
    const json jq = cmgnd::selection_frequencies_to_json(freq);
    CHECK(jq.at("rows")[0].at("wins").get<int>() == 1);
    CHECK(jq.at("rows")[0].at("proportion").get<double>() == 0.25);

    cmgnd::MomentRmseTable mt;
    mt.scenario = "UCU/low/n=100";
    mt.rows.push_back({"BIC best", "variance", 0.5, 4, 0});
    const json jm = cmgnd::moment_table_to_json(mt);
    CHECK(jm.at("rows")[0].at("spec") == "BIC best");
    CHECK(jm.at("rows")[0].at("moment") == "variance");
}
