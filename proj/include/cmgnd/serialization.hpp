#ifndef CMGND_SERIALIZATION_HPP
#define CMGND_SERIALIZATION_HPP

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "cmgnd/constraints.hpp"
#include "cmgnd/ecm.hpp"
#include "cmgnd/errors.hpp"
#include "cmgnd/mixture.hpp"
#include "cmgnd/model_family.hpp"
#include "cmgnd/simulation.hpp"

// JSON wire formats. Component indices are 1-based on the wire and 0-based
// in memory; the conversion happens here and nowhere else.

namespace cmgnd {

inline nlohmann::json partition_to_json(const Partition& part) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& block : part) {
        nlohmann::json jb = nlohmann::json::array();
        for (int idx : block) jb.push_back(idx + 1);
        out.push_back(std::move(jb));
    }
    return out;
}

inline Partition partition_from_json(const nlohmann::json& j, const char* name) {
    if (!j.is_array()) {
        throw input_error(std::string("json: '") + name + "' must be an array of blocks");
    }
    Partition part;
    for (const auto& jb : j) {
        if (!jb.is_array() || jb.empty()) {
            throw input_error(std::string("json: blocks in '") + name +
                              "' must be nonempty arrays");
        }
        Block block;
        for (const auto& v : jb) {
            if (!v.is_number_integer()) {
                throw input_error(std::string("json: component indices in '") + name +
                                  "' must be integers");
            }
            block.push_back(v.get<int>() - 1);
        }
        part.push_back(std::move(block));
    }
    return part;
}

inline nlohmann::json constraints_to_json(const ConstraintSpec& spec) {
    return {{"mu", partition_to_json(spec.mu_blocks)},
            {"sigma", partition_to_json(spec.sigma_blocks)},
            {"nu", partition_to_json(spec.nu_blocks)}};
}

inline ConstraintSpec constraints_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw input_error("json: constraints must be an object");
    ConstraintSpec spec;
    spec.mu_blocks = partition_from_json(j.at("mu"), "mu");
    spec.sigma_blocks = partition_from_json(j.at("sigma"), "sigma");
    spec.nu_blocks = partition_from_json(j.at("nu"), "nu");
    spec.canonicalize();
    return spec;
}

inline nlohmann::json model_to_json(const MixtureModel& m) {
    nlohmann::json comps = nlohmann::json::array();
    for (const auto& c : m.components) {
        comps.push_back({{"mu", c.mu}, {"sigma", c.sigma}, {"nu", c.nu}});
    }
    return {{"weights", m.weights},
            {"components", std::move(comps)},
            {"constraints", constraints_to_json(m.constraints)}};
}

inline MixtureModel model_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw input_error("json: model must be an object");
    MixtureModel m;
    if (!j.contains("weights") || !j.at("weights").is_array()) {
        throw input_error("json: model needs a 'weights' array");
    }
    m.weights = j.at("weights").get<std::vector<double>>();
    if (!j.contains("components") || !j.at("components").is_array()) {
        throw input_error("json: model needs a 'components' array");
    }
    for (const auto& jc : j.at("components")) {
        GndParams p;
        p.mu = jc.at("mu").get<double>();
        p.sigma = jc.at("sigma").get<double>();
        p.nu = jc.at("nu").get<double>();
        m.components.push_back(p);
    }
    if (j.contains("constraints")) {
        m.constraints = constraints_from_json(j.at("constraints"));
    } else {
        m.constraints = ConstraintSpec::singletons(m.k());
    }
    m.validate();
    return m;
}

inline nlohmann::json fit_config_to_json(const FitConfig& cfg) {
    return {{"max_iters", cfg.max_iters},
            {"loglik_rel_tol", cfg.loglik_rel_tol},
            {"nu_grad_skip_threshold", cfg.nu_grad_skip_threshold},
            {"nu_min", cfg.nu_min},
            {"nu_max", cfg.nu_max},
            {"sigma_min", cfg.sigma_min},
            {"n_starts", cfg.n_starts},
            {"use_adaptive_step", cfg.use_adaptive_step},
            {"seed", cfg.seed}};
}

// Missing keys keep their defaults, so partial config files are fine.
inline FitConfig fit_config_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw input_error("json: config must be an object");
    FitConfig cfg;
    cfg.max_iters = j.value("max_iters", cfg.max_iters);
    cfg.loglik_rel_tol = j.value("loglik_rel_tol", cfg.loglik_rel_tol);
    cfg.nu_grad_skip_threshold = j.value("nu_grad_skip_threshold", cfg.nu_grad_skip_threshold);
    cfg.nu_min = j.value("nu_min", cfg.nu_min);
    cfg.nu_max = j.value("nu_max", cfg.nu_max);
    cfg.sigma_min = j.value("sigma_min", cfg.sigma_min);
    cfg.n_starts = j.value("n_starts", cfg.n_starts);
    cfg.use_adaptive_step = j.value("use_adaptive_step", cfg.use_adaptive_step);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.validate();
    return cfg;
}

inline nlohmann::json scenario_to_json(const ScenarioConfig& sc) {
    return {{"true_code", sc.true_code.str()},
            {"overlap", overlap_name(sc.overlap)},
            {"n", sc.n},
            {"reps", sc.reps},
            {"seed", sc.seed}};
}

inline ScenarioConfig scenario_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw input_error("json: scenario must be an object");
    ScenarioConfig sc;
    sc.true_code = ModelCode::parse(j.at("true_code").get<std::string>());
    sc.overlap = parse_overlap(j.value("overlap", "low"));
    sc.n = j.value("n", sc.n);
    sc.reps = j.value("reps", sc.reps);
    sc.seed = j.value("seed", sc.seed);
    sc.validate();
    return sc;
}

inline nlohmann::json fit_result_to_json(const FitResult& r) {
    std::map<std::string, int> diag_counts;
    for (const auto& d : r.diagnostics) {
        ++diag_counts[diagnostic_name(d.kind)];
    }
    return {{"model", model_to_json(r.model)},
            {"log_lik", r.log_lik},
            {"bic", r.bic},
            {"iterations", r.iterations},
            {"converged", r.converged},
            {"loglik_trace", r.loglik_trace},
            {"diagnostics", diag_counts}};
}

inline nlohmann::json selection_report_to_json(const SelectionReport& report) {
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& e : report.entries) {
        nlohmann::json je = {{"label", e.label},
                             {"constraints", constraints_to_json(e.spec)},
                             {"free_parameters", e.free_parameters},
                             {"rank", e.rank},
                             {"failed", e.failed}};
        if (e.failed) {
            je["error"] = e.error;
        } else {
            je["log_lik"] = e.fit.log_lik;
            je["bic"] = e.bic;
            je["model"] = model_to_json(e.fit.model);
            je["iterations"] = e.fit.iterations;
            je["converged"] = e.fit.converged;
        }
        entries.push_back(std::move(je));
    }
    return {{"entries", std::move(entries)},
            {"winner", report.winner},
            {"winner_label", report.entries[static_cast<std::size_t>(report.winner)].label},
            {"notes", report.notes}};
}

// Family files list candidates as three-letter codes or constraint objects.
inline std::vector<ConstraintSpec> spec_list_from_json(const nlohmann::json& j, int k,
                                                       const Block& designated) {
    if (!j.is_array() || j.empty()) {
        throw input_error("json: candidate list must be a nonempty array");
    }
    std::vector<ConstraintSpec> specs;
    for (const auto& item : j) {
        if (item.is_string()) {
            specs.push_back(ModelCode::parse(item.get<std::string>()).to_spec(k, designated));
        } else {
            auto spec = constraints_from_json(item);
            spec.validate(k);
            specs.push_back(std::move(spec));
        }
    }
    return specs;
}

inline nlohmann::json rmse_table_to_json(const RmseTable& table) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : table.rows) {
        rows.push_back({{"spec", r.spec_label},
                        {"parameter", r.parameter},
                        {"rmse", r.rmse},
                        {"reps_used", r.reps_used},
                        {"failures", r.failures}});
    }
    return {{"scenario", table.scenario},
            {"n", table.n},
            {"reps", table.reps},
            {"rows", std::move(rows)}};
}

inline nlohmann::json selection_frequencies_to_json(const SelectionFrequencies& freq) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : freq.rows) {
        rows.push_back(
            {{"spec", r.spec_label}, {"wins", r.wins}, {"proportion", r.proportion}});
    }
    return {{"scenario", freq.scenario},
            {"reps", freq.reps},
            {"reps_used", freq.reps_used},
            {"failures", freq.failures},
            {"rows", std::move(rows)}};
}

inline nlohmann::json moment_table_to_json(const MomentRmseTable& table) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : table.rows) {
        rows.push_back({{"spec", r.spec_label},
                        {"moment", r.moment},
                        {"rmse", r.rmse},
                        {"reps_used", r.reps_used},
                        {"failures", r.failures}});
    }
    return {{"scenario", table.scenario},
            {"n", table.n},
            {"reps", table.reps},
            {"rows", std::move(rows)}};
}

}  // namespace cmgnd

#endif  // CMGND_SERIALIZATION_HPP
