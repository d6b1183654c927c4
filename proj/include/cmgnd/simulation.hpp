#ifndef CMGND_SIMULATION_HPP
#define CMGND_SIMULATION_HPP

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "cmgnd/constraints.hpp"
#include "cmgnd/ecm.hpp"
#include "cmgnd/errors.hpp"
#include "cmgnd/gnd.hpp"
#include "cmgnd/mixture.hpp"
#include "cmgnd/model_family.hpp"
#include "cmgnd/rng.hpp"

namespace cmgnd {

enum class Overlap { low, medium, high };

inline const char* overlap_name(Overlap o) {
    switch (o) {
        case Overlap::low: return "low";
        case Overlap::medium: return "medium";
        case Overlap::high: return "high";
    }
    return "unknown";
}

inline Overlap parse_overlap(const std::string& s) {
    if (s == "low") return Overlap::low;
    if (s == "medium") return Overlap::medium;
    if (s == "high") return Overlap::high;
    throw input_error("unknown overlap level: " + s);
}

// The three-component benchmark scenarios. Components 2 and 3 form the tied
// block; the true code picks which of their scales/shapes coincide.
struct ScenarioConfig {
    ModelCode true_code;
    Overlap overlap = Overlap::low;
    int n = 1000;
    int reps = 50;
    std::uint64_t seed = 0;

    void validate() const {
        if (true_code.mu_constrained) {
            throw input_error("scenario: location constraints are not part of the benchmark");
        }
        if (n < 1) throw input_error("scenario: n must be >= 1");
        if (reps < 1) throw input_error("scenario: reps must be >= 1");
    }

    std::string label() const {
        return true_code.str() + "/" + overlap_name(overlap) + "/n=" + std::to_string(n);
    }
};

inline constexpr int kScenarioComponents = 3;
inline const Block kScenarioBlock{1, 2};

// Generating parameters: weights (0.4, 0.3, 0.3); means by overlap level;
// scales (0.2, 1.5, 3) or tied (0.2, 3, 3); shapes (0.5, 1.6, 4) or tied
// (0.5, 1.6, 1.6).
inline MixtureModel table2_model(const ModelCode& code, Overlap overlap) {
    if (code.mu_constrained) {
        throw input_error("table2_model: location constraints are not part of the benchmark");
    }
    MixtureModel m;
    m.weights = {0.4, 0.3, 0.3};
    std::array<double, 3> mu{};
    switch (overlap) {
        case Overlap::low: mu = {0.0, 10.0, 20.0}; break;
        case Overlap::medium: mu = {0.0, 7.0, 14.0}; break;
        case Overlap::high: mu = {0.0, 5.0, 10.0}; break;
    }
    const std::array<double, 3> sigma =
        code.sigma_constrained ? std::array<double, 3>{0.2, 3.0, 3.0}
                               : std::array<double, 3>{0.2, 1.5, 3.0};
    const std::array<double, 3> nu =
        code.nu_constrained ? std::array<double, 3>{0.5, 1.6, 1.6}
                            : std::array<double, 3>{0.5, 1.6, 4.0};
    m.components.resize(3);
    for (std::size_t k = 0; k < 3; ++k) {
        m.components[k] = {mu[k], sigma[k], nu[k]};
    }
    m.constraints = code.to_spec(kScenarioComponents, kScenarioBlock);
    m.validate();
    return m;
}

inline MixtureModel scenario_model(const ScenarioConfig& sc) {
    return table2_model(sc.true_code, sc.overlap);
}

inline std::vector<double> mixture_sample(const MixtureModel& m, std::size_t n, Rng& rng,
                                          std::vector<int>* labels = nullptr) {
    std::vector<double> cum(m.weights.size());
    std::partial_sum(m.weights.begin(), m.weights.end(), cum.begin());
    cum.back() = 1.0;
    std::vector<double> out;
    out.reserve(n);
    if (labels) {
        labels->clear();
        labels->reserve(n);
    }
    for (std::size_t i = 0; i < n; ++i) {
        const double u = rng.uniform();
        const auto it = std::upper_bound(cum.begin(), cum.end(), u);
        const auto k = std::min(static_cast<std::size_t>(it - cum.begin()), m.components.size() - 1);
        if (labels) labels->push_back(static_cast<int>(k));
        out.push_back(gnd_draw(m.components[k], rng));
    }
    return out;
}

namespace detail {

// Replication r owns two derived seed streams: one for the data, one for the
// fitter's initializations. Keeping them distinct avoids reusing the exact
// generator state that produced the sample.
inline std::uint64_t data_seed(const ScenarioConfig& sc, int rep) {
    return derive_seed(sc.seed, static_cast<std::uint64_t>(2 * rep));
}

inline std::uint64_t fit_seed(const ScenarioConfig& sc, int rep) {
    return derive_seed(sc.seed, static_cast<std::uint64_t>(2 * rep + 1));
}

}  // namespace detail

inline std::vector<double> generate_scenario(const ScenarioConfig& sc, int rep) {
    sc.validate();
    const MixtureModel truth = scenario_model(sc);
    Rng rng(detail::data_seed(sc, rep));
    return mixture_sample(truth, static_cast<std::size_t>(sc.n), rng);
}

// Permutation p with p[k] = fitted component assigned to true component k,
// minimizing the sum of squared location errors over all K! assignments.
inline std::vector<int> match_labels(const MixtureModel& fitted, const MixtureModel& truth) {
    const std::size_t k = truth.components.size();
    if (fitted.components.size() != k) {
        throw input_error("match_labels: component counts differ");
    }
    std::vector<int> perm(k);
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<int> best = perm;
    double best_cost = std::numeric_limits<double>::infinity();
    do {
        double cost = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
            const double d =
                fitted.components[static_cast<std::size_t>(perm[i])].mu - truth.components[i].mu;
            cost += d * d;
        }
        if (cost < best_cost) {
            best_cost = cost;
            best = perm;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

// Reorder components (and weights) so that component i plays the role of
// true component i.
inline MixtureModel apply_permutation(const MixtureModel& m, const std::vector<int>& perm) {
    MixtureModel out = m;
    for (std::size_t i = 0; i < perm.size(); ++i) {
        const auto j = static_cast<std::size_t>(perm[i]);
        out.weights[i] = m.weights[j];
        out.components[i] = m.components[j];
    }
    return out;
}

// Runs fn(0..count-1), each call writing only to its own output slot. The
// thread count changes scheduling, never results.
template <typename Fn>
void run_indexed(int count, int threads, Fn&& fn) {
    if (threads <= 1 || count <= 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    auto worker = [&]() {
        for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
            fn(i);
        }
    };
    std::vector<std::thread> pool;
    const int width = std::min(threads, count);
    pool.reserve(static_cast<std::size_t>(width));
    for (int t = 0; t < width; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
}

using FitterFn = std::function<MixtureModel(const std::vector<double>& data,
                                            const ConstraintSpec& spec, std::uint64_t seed)>;

inline FitterFn ecm_fitter(const FitConfig& base = {}) {
    return [base](const std::vector<double>& data, const ConstraintSpec& spec,
                  std::uint64_t seed) {
        FitConfig cfg = base;
        cfg.seed = seed;
        return ecm_fit(data, kScenarioComponents, spec, cfg).model;
    };
}

struct RmseTable {
    std::string scenario;
    int n = 0;
    int reps = 0;
    struct Row {
        std::string spec_label;
        std::string parameter;
        double rmse = 0.0;
        int reps_used = 0;
        int failures = 0;
    };
    std::vector<Row> rows;
};

namespace detail {

inline std::vector<std::string> parameter_names(int k) {
    std::vector<std::string> names;
    const char* stems[] = {"pi", "mu", "sigma", "nu"};
    for (const char* stem : stems) {
        for (int i = 1; i <= k; ++i) {
            names.push_back(std::string(stem) + std::to_string(i));
        }
    }
    return names;
}

inline std::vector<double> parameter_errors(const MixtureModel& fitted,
                                            const MixtureModel& truth) {
    const MixtureModel aligned = apply_permutation(fitted, match_labels(fitted, truth));
    std::vector<double> err;
    const std::size_t k = truth.components.size();
    err.reserve(4 * k);
    for (std::size_t i = 0; i < k; ++i) err.push_back(aligned.weights[i] - truth.weights[i]);
    for (std::size_t i = 0; i < k; ++i) {
        err.push_back(aligned.components[i].mu - truth.components[i].mu);
    }
    for (std::size_t i = 0; i < k; ++i) {
        err.push_back(aligned.components[i].sigma - truth.components[i].sigma);
    }
    for (std::size_t i = 0; i < k; ++i) {
        err.push_back(aligned.components[i].nu - truth.components[i].nu);
    }
    return err;
}

}  // namespace detail

// Per replication: simulate, fit every spec, align labels to the truth, and
// accumulate squared parameter errors. Failed fits are dropped from their
// spec's average and counted.
inline RmseTable rmse_experiment(const ScenarioConfig& sc,
                                 const std::vector<ConstraintSpec>& fit_specs,
                                 const FitterFn& fitter, int threads = 1) {
    sc.validate();
    if (sc.reps < 2) throw input_error("rmse_experiment: reps must be >= 2");
    if (fit_specs.empty()) throw input_error("rmse_experiment: no specs to fit");
    const MixtureModel truth = scenario_model(sc);
    const auto n_specs = fit_specs.size();

    using RepErrors = std::vector<std::optional<std::vector<double>>>;  // per spec
    std::vector<RepErrors> results(static_cast<std::size_t>(sc.reps));
    run_indexed(sc.reps, threads, [&](int rep) {
        const std::vector<double> data = generate_scenario(sc, rep);
        RepErrors row(n_specs);
        for (std::size_t s = 0; s < n_specs; ++s) {
            try {
                const MixtureModel fitted = fitter(data, fit_specs[s], detail::fit_seed(sc, rep));
                row[s] = detail::parameter_errors(fitted, truth);
            } catch (const std::exception&) {
                row[s] = std::nullopt;
            }
        }
        results[static_cast<std::size_t>(rep)] = std::move(row);
    });

    RmseTable table;
    table.scenario = sc.label();
    table.n = sc.n;
    table.reps = sc.reps;
    const auto names = detail::parameter_names(kScenarioComponents);
    for (std::size_t s = 0; s < n_specs; ++s) {
        std::vector<double> sq(names.size(), 0.0);
        int used = 0;
        for (const auto& rep_row : results) {
            if (!rep_row[s]) continue;
            ++used;
            for (std::size_t p = 0; p < names.size(); ++p) {
                sq[p] += (*rep_row[s])[p] * (*rep_row[s])[p];
            }
        }
        const int failures = sc.reps - used;
        if (failures * 2 > sc.reps) {
            throw experiment_error("rmse_experiment: more than half the replications failed for " +
                                   model_label(fit_specs[s], kScenarioComponents));
        }
        for (std::size_t p = 0; p < names.size(); ++p) {
            table.rows.push_back({model_label(fit_specs[s], kScenarioComponents), names[p],
                                  std::sqrt(sq[p] / static_cast<double>(used)), used, failures});
        }
    }
    return table;
}

inline RmseTable rmse_experiment(const ScenarioConfig& sc,
                                 const std::vector<ConstraintSpec>& fit_specs,
                                 const FitConfig& cfg = {}, int threads = 1) {
    return rmse_experiment(sc, fit_specs, ecm_fitter(cfg), threads);
}

struct SelectionFrequencies {
    std::string scenario;
    int reps = 0;
    int reps_used = 0;
    int failures = 0;
    struct Row {
        std::string spec_label;
        int wins = 0;
        double proportion = 0.0;
    };
    std::vector<Row> rows;
};

// Per replication: simulate and run the BIC selection over the candidates;
// tally which candidate wins.
inline SelectionFrequencies bic_selection_experiment(const ScenarioConfig& sc,
                                                     const std::vector<ConstraintSpec>& candidates,
                                                     const FitConfig& cfg = {}, int threads = 1) {
    sc.validate();
    if (sc.reps < 2) throw input_error("bic_selection_experiment: reps must be >= 2");
    if (candidates.empty()) throw input_error("bic_selection_experiment: no candidates");

    std::vector<int> winners(static_cast<std::size_t>(sc.reps), -1);
    run_indexed(sc.reps, threads, [&](int rep) {
        const std::vector<double> data = generate_scenario(sc, rep);
        FitConfig rep_cfg = cfg;
        rep_cfg.seed = detail::fit_seed(sc, rep);
        try {
            const SelectionReport report =
                select_by_bic(data, candidates, kScenarioComponents, rep_cfg);
            winners[static_cast<std::size_t>(rep)] = report.winner;
        } catch (const std::exception&) {
            winners[static_cast<std::size_t>(rep)] = -1;
        }
    });

    SelectionFrequencies out;
    out.scenario = sc.label();
    out.reps = sc.reps;
    std::vector<int> wins(candidates.size(), 0);
    for (int w : winners) {
        if (w < 0) {
            ++out.failures;
        } else {
            ++wins[static_cast<std::size_t>(w)];
            ++out.reps_used;
        }
    }
    if (out.failures * 2 > sc.reps) {
        throw experiment_error("bic_selection_experiment: more than half the replications failed");
    }
    for (std::size_t c = 0; c < candidates.size(); ++c) {
        out.rows.push_back({model_label(candidates[c], kScenarioComponents), wins[c],
                            static_cast<double>(wins[c]) / static_cast<double>(out.reps_used)});
    }
    return out;
}

struct MomentRmseTable {
    std::string scenario;
    int n = 0;
    int reps = 0;
    struct Row {
        std::string spec_label;  // candidate label or "BIC best"
        std::string moment;      // mean, variance, skewness, kurtosis
        double rmse = 0.0;
        int reps_used = 0;
        int failures = 0;
    };
    std::vector<Row> rows;
};

// Per replication: one BIC selection across the candidates (which fits each
// of them), then the marginal moments of every candidate's fit and of the
// winner, scored against the true model's analytic moments.
inline MomentRmseTable moment_rmse_experiment(const ScenarioConfig& sc,
                                              const std::vector<ConstraintSpec>& candidates,
                                              const FitConfig& cfg = {}, int threads = 1) {
    sc.validate();
    if (sc.reps < 2) throw input_error("moment_rmse_experiment: reps must be >= 2");
    if (candidates.empty()) throw input_error("moment_rmse_experiment: no candidates");
    const MarginalMoments truth = marginal_moments(scenario_model(sc));
    const std::array<double, 4> truth_m{truth.mean, truth.variance, truth.skewness,
                                        truth.kurtosis};

    const std::size_t lanes = candidates.size() + 1;  // + BIC winner lane
    using RepMoments = std::vector<std::optional<std::array<double, 4>>>;
    std::vector<RepMoments> results(static_cast<std::size_t>(sc.reps));
    run_indexed(sc.reps, threads, [&](int rep) {
        const std::vector<double> data = generate_scenario(sc, rep);
        FitConfig rep_cfg = cfg;
        rep_cfg.seed = detail::fit_seed(sc, rep);
        RepMoments row(lanes);
        try {
            const SelectionReport report =
                select_by_bic(data, candidates, kScenarioComponents, rep_cfg);
            auto moments_of = [](const MixtureModel& m) -> std::optional<std::array<double, 4>> {
                const MarginalMoments mm = marginal_moments(m);
                const std::array<double, 4> v{mm.mean, mm.variance, mm.skewness, mm.kurtosis};
                for (double x : v) {
                    if (!std::isfinite(x)) return std::nullopt;
                }
                return v;
            };
            for (std::size_t c = 0; c < candidates.size(); ++c) {
                if (!report.entries[c].failed) {
                    row[c] = moments_of(report.entries[c].fit.model);
                }
            }
            row[candidates.size()] =
                moments_of(report.entries[static_cast<std::size_t>(report.winner)].fit.model);
        } catch (const std::exception&) {
            // every lane stays empty for this replication
        }
        results[static_cast<std::size_t>(rep)] = std::move(row);
    });

    MomentRmseTable table;
    table.scenario = sc.label();
    table.n = sc.n;
    table.reps = sc.reps;
    const std::array<const char*, 4> moment_names{"mean", "variance", "skewness", "kurtosis"};
    for (std::size_t lane = 0; lane < lanes; ++lane) {
        const std::string label = lane < candidates.size()
                                      ? model_label(candidates[lane], kScenarioComponents)
                                      : std::string("BIC best");
        std::array<double, 4> sq{};
        int used = 0;
        for (const auto& rep_row : results) {
            if (!rep_row[lane]) continue;
            ++used;
            for (std::size_t mi = 0; mi < 4; ++mi) {
                const double d = (*rep_row[lane])[mi] - truth_m[mi];
                sq[mi] += d * d;
            }
        }
        const int failures = sc.reps - used;
        if (failures * 2 > sc.reps) {
            throw experiment_error(
                "moment_rmse_experiment: more than half the replications failed for " + label);
        }
        for (std::size_t mi = 0; mi < 4; ++mi) {
            table.rows.push_back({label, moment_names[mi],
                                  std::sqrt(sq[mi] / static_cast<double>(used)), used, failures});
        }
    }
    return table;
}

namespace detail {

// Shortest round-trip decimal representation keeps experiment CSVs
// bit-identical across runs and thread counts.
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace detail

inline std::string rmse_csv(const RmseTable& table) {
    std::string out = "scenario,n,reps,spec,parameter,rmse,reps_used,failures\n";
    for (const auto& row : table.rows) {
        out += table.scenario + ',' + std::to_string(table.n) + ',' + std::to_string(table.reps) +
               ',' + row.spec_label + ',' + row.parameter + ',' +
               detail::format_double(row.rmse) + ',' + std::to_string(row.reps_used) + ',' +
               std::to_string(row.failures) + '\n';
    }
    return out;
}

inline std::string selection_csv(const SelectionFrequencies& freq) {
    std::string out = "scenario,reps,reps_used,failures,spec,wins,proportion\n";
    for (const auto& row : freq.rows) {
        out += freq.scenario + ',' + std::to_string(freq.reps) + ',' +
               std::to_string(freq.reps_used) + ',' + std::to_string(freq.failures) + ',' +
               row.spec_label + ',' + std::to_string(row.wins) + ',' +
               detail::format_double(row.proportion) + '\n';
    }
    return out;
}

inline std::string moment_rmse_csv(const MomentRmseTable& table) {
    std::string out = "scenario,n,reps,spec,moment,rmse,reps_used,failures\n";
    for (const auto& row : table.rows) {
        out += table.scenario + ',' + std::to_string(table.n) + ',' + std::to_string(table.reps) +
               ',' + row.spec_label + ',' + row.moment + ',' + detail::format_double(row.rmse) +
               ',' + std::to_string(row.reps_used) + ',' + std::to_string(row.failures) + '\n';
    }
    return out;
}

}  // namespace cmgnd

#endif  // CMGND_SIMULATION_HPP
