#ifndef CMGND_ECM_HPP
#define CMGND_ECM_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "cmgnd/constraints.hpp"
#include "cmgnd/errors.hpp"
#include "cmgnd/mixture.hpp"
#include "cmgnd/rng.hpp"
#include "cmgnd/special_functions.hpp"

namespace cmgnd {

struct FitConfig {
    int max_iters = 500;
    double loglik_rel_tol = 1e-6;
    // The shape update is skipped when |dQ/dnu| falls below this threshold.
    double nu_grad_skip_threshold = 1e-3;
    double nu_min = 0.1;
    double nu_max = 20.0;
    double sigma_min = 1e-6;
    int n_starts = 5;
    bool use_adaptive_step = true;
    std::uint64_t seed = 0;

    void validate() const {
        if (max_iters < 1) throw input_error("FitConfig: max_iters must be >= 1");
        if (!(loglik_rel_tol > 0.0)) throw input_error("FitConfig: loglik_rel_tol must be > 0");
        if (!(nu_grad_skip_threshold > 0.0)) {
            throw input_error("FitConfig: nu_grad_skip_threshold must be > 0");
        }
        if (!(nu_min > 0.0) || !(nu_min < nu_max)) {
            throw input_error("FitConfig: need 0 < nu_min < nu_max");
        }
        if (!(sigma_min > 0.0)) throw input_error("FitConfig: sigma_min must be > 0");
        if (n_starts < 1) throw input_error("FitConfig: n_starts must be >= 1");
    }
};

enum class DiagnosticKind {
    step_halved,        // Newton step shortened to keep the block Q from decreasing
    step_skipped,       // Newton step abandoned (flat curvature, non-finite, or no valid step)
    nu_update_skipped,  // shape gradient below the skip threshold
    nu_clamped,         // shape forced into [nu_min, nu_max]
    sigma_clamped,      // scale forced up to sigma_min
    empty_component,    // responsibility column nearly zero
    underflow_row,      // observation with zero density under all components
    loglik_decrease,    // trace fell by more than the monotonicity slack
};

struct Diagnostic {
    DiagnosticKind kind;
    int iteration = 0;
    int index = 0;      // component or block-representative index; row for underflows
    double value = 0.0; // kind-specific: halvings, gradient, offending value, ...
};

inline const char* diagnostic_name(DiagnosticKind k) {
    switch (k) {
        case DiagnosticKind::step_halved: return "step_halved";
        case DiagnosticKind::step_skipped: return "step_skipped";
        case DiagnosticKind::nu_update_skipped: return "nu_update_skipped";
        case DiagnosticKind::nu_clamped: return "nu_clamped";
        case DiagnosticKind::sigma_clamped: return "sigma_clamped";
        case DiagnosticKind::empty_component: return "empty_component";
        case DiagnosticKind::underflow_row: return "underflow_row";
        case DiagnosticKind::loglik_decrease: return "loglik_decrease";
    }
    return "unknown";
}

struct FitResult {
    MixtureModel model;
    double log_lik = -std::numeric_limits<double>::infinity();
    double bic = std::numeric_limits<double>::infinity();
    int iterations = 0;
    std::vector<double> loglik_trace;
    Matrix responsibilities;
    bool converged = false;
    std::vector<Diagnostic> diagnostics;
};

// Expected complete-data log-likelihood for fixed responsibilities z:
// Q = sum_n sum_k z_nk [log pi_k + log f_k(x_n)].
inline double q_function(const std::vector<double>& data, const Matrix& z,
                         const MixtureModel& m) {
    const std::size_t n = data.size();
    const std::size_t kk = m.components.size();
    double q = 0.0;
    for (std::size_t k = 0; k < kk; ++k) {
        const double lw = std::log(m.weights[k]);
        for (std::size_t i = 0; i < n; ++i) {
            const double znk = z(i, k);
            if (znk == 0.0) continue;
            q += znk * (lw + gnd_log_pdf(data[i], m.components[k]));
        }
    }
    return q;
}

struct GradientPair {
    double g = 0.0;
    double gp = 0.0;
};

// First and second derivative of Q with respect to the block's shared
// location. Split sums over x >= mu and x < mu; exact ties contribute zero.
inline GradientPair mu_block_gradient(const Block& block, const std::vector<double>& data,
                                      const Matrix& z, const MixtureModel& m) {
    const double mu = m.components[static_cast<std::size_t>(block.front())].mu;
    GradientPair out;
    for (int ki : block) {
        const auto k = static_cast<std::size_t>(ki);
        const double nu = m.components[k].nu;
        const double sigma = m.components[k].sigma;
        const double scale = nu / std::pow(sigma, nu);
        double s1 = 0.0;  // sum z |x-mu|^(nu-1), signed
        double s2 = 0.0;  // sum z |x-mu|^(nu-2)
        for (std::size_t i = 0; i < data.size(); ++i) {
            const double d = data[i] - mu;
            if (d == 0.0) continue;
            const double znk = z(i, k);
            const double ad = std::abs(d);
            s1 += (d > 0.0 ? znk : -znk) * std::pow(ad, nu - 1.0);
            s2 += znk * std::pow(ad, nu - 2.0);
        }
        out.g += scale * s1;
        out.gp -= scale * (nu - 1.0) * s2;
    }
    return out;
}

namespace detail {

// Per-component weighted sums used by the scale update:
// W_k = sum_n z_nk and S_k = sum_n z_nk |x_n - mu_k|^nu_k.
struct ScaleSums {
    std::vector<double> w;
    std::vector<double> s;
};

inline ScaleSums scale_sums(const Block& block, const std::vector<double>& data, const Matrix& z,
                            const MixtureModel& m) {
    ScaleSums sums;
    sums.w.reserve(block.size());
    sums.s.reserve(block.size());
    for (int ki : block) {
        const auto k = static_cast<std::size_t>(ki);
        const double nu = m.components[k].nu;
        const double mu = m.components[k].mu;
        double w = 0.0;
        double s = 0.0;
        for (std::size_t i = 0; i < data.size(); ++i) {
            const double znk = z(i, k);
            w += znk;
            const double ad = std::abs(data[i] - mu);
            if (ad == 0.0) continue;
            s += znk * std::pow(ad, nu);
        }
        sums.w.push_back(w);
        sums.s.push_back(s);
    }
    return sums;
}

}  // namespace detail

inline GradientPair sigma_block_gradient(const Block& block, const std::vector<double>& data,
                                         const Matrix& z, const MixtureModel& m) {
    const double sigma = m.components[static_cast<std::size_t>(block.front())].sigma;
    const auto sums = detail::scale_sums(block, data, z, m);
    GradientPair out;
    for (std::size_t b = 0; b < block.size(); ++b) {
        const double nu = m.components[static_cast<std::size_t>(block[b])].nu;
        out.g += -sums.w[b] / sigma + nu * sums.s[b] * std::pow(sigma, -nu - 1.0);
        out.gp += sums.w[b] / (sigma * sigma) -
                  nu * (nu + 1.0) * sums.s[b] * std::pow(sigma, -nu - 2.0);
    }
    return out;
}

inline GradientPair nu_block_gradient(const Block& block, const std::vector<double>& data,
                                      const Matrix& z, const MixtureModel& m) {
    const double nu = m.components[static_cast<std::size_t>(block.front())].nu;
    const double inv = 1.0 / nu;
    const double psi = digamma(inv);
    const double psi1 = trigamma(inv);
    const double const_g = inv * (inv * psi + 1.0);
    const double const_gp = -inv * inv * (1.0 + 2.0 * inv * psi + inv * inv * psi1);
    GradientPair out;
    for (int ki : block) {
        const auto k = static_cast<std::size_t>(ki);
        const double mu = m.components[k].mu;
        const double sigma = m.components[k].sigma;
        double w = 0.0;
        double sum_log = 0.0;   // sum z a^nu log a
        double sum_log2 = 0.0;  // sum z a^nu (log a)^2
        for (std::size_t i = 0; i < data.size(); ++i) {
            const double znk = z(i, k);
            w += znk;
            const double a = std::abs((data[i] - mu) / sigma);
            if (a == 0.0) continue;
            const double la = std::log(a);
            const double pa = std::pow(a, nu);
            sum_log += znk * pa * la;
            sum_log2 += znk * pa * la * la;
        }
        out.g += w * const_g - sum_log;
        out.gp += w * const_gp - sum_log2;
    }
    return out;
}

namespace detail {

// Parameter-dependent part of Q restricted to the block, as a function of a
// trial value. Used to safeguard Newton steps.
inline double q_mu_block(double mu, const Block& block, const std::vector<double>& data,
                         const Matrix& z, const MixtureModel& m) {
    double q = 0.0;
    for (int ki : block) {
        const auto k = static_cast<std::size_t>(ki);
        const double nu = m.components[k].nu;
        const double sigma = m.components[k].sigma;
        for (std::size_t i = 0; i < data.size(); ++i) {
            const double a = std::abs((data[i] - mu) / sigma);
            if (a == 0.0) continue;
            q -= z(i, k) * std::pow(a, nu);
        }
    }
    return q;
}

inline double q_sigma_block(double sigma, const Block& block, const ScaleSums& sums,
                            const MixtureModel& m) {
    double q = 0.0;
    for (std::size_t b = 0; b < block.size(); ++b) {
        const double nu = m.components[static_cast<std::size_t>(block[b])].nu;
        q += -sums.w[b] * std::log(sigma) - sums.s[b] * std::pow(sigma, -nu);
    }
    return q;
}

inline double q_nu_block(double nu, const Block& block, const std::vector<double>& data,
                         const Matrix& z, const MixtureModel& m) {
    const double znorm = std::log(nu) - log_gamma(1.0 / nu);
    double q = 0.0;
    for (int ki : block) {
        const auto k = static_cast<std::size_t>(ki);
        const double mu = m.components[k].mu;
        const double sigma = m.components[k].sigma;
        for (std::size_t i = 0; i < data.size(); ++i) {
            const double znk = z(i, k);
            q += znk * znorm;
            const double a = std::abs((data[i] - mu) / sigma);
            if (a == 0.0) continue;
            q -= znk * std::pow(a, nu);
        }
    }
    return q;
}

}  // namespace detail

struct StepOutcome {
    double value = 0.0;  // new shared block value (old value when not updated)
    bool updated = false;
    bool clamped = false;
    int halvings = 0;
    double gradient = 0.0;
    bool skipped_by_rule = false;  // shape skip rule fired
};

namespace detail {

inline constexpr double kCurvatureGuard = 1e-12;
inline constexpr int kMaxHalvings = 10;

// Shared Newton safeguard: try value - step, halving the step while the
// candidate is invalid or decreases the block Q. Returns the accepted
// candidate or the original value with updated=false.
template <typename ValidFn, typename QFn>
StepOutcome safeguarded_step(double value, double step, ValidFn valid, QFn q_block) {
    StepOutcome out;
    out.value = value;
    if (!std::isfinite(step)) {
        return out;
    }
    const double q_old = q_block(value);
    double s = step;
    for (int h = 0; h <= kMaxHalvings; ++h, s *= 0.5) {
        const double cand = value - s;
        if (!std::isfinite(cand) || !valid(cand)) {
            continue;
        }
        const double q_new = q_block(cand);
        if (std::isfinite(q_new) && q_new >= q_old) {
            out.value = cand;
            out.updated = true;
            out.halvings = h;
            return out;
        }
    }
    return out;
}

}  // namespace detail

// pi_k = sum_n z_nk / N. A near-empty column is clamped and reported.
inline std::vector<double> update_weights(const Matrix& z, std::vector<int>* empty_components = nullptr) {
    const std::size_t n = z.rows();
    const std::size_t kk = z.cols();
    if (n == 0 || kk == 0) {
        throw input_error("update_weights: empty responsibility matrix");
    }
    std::vector<double> pi(kk, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < kk; ++k) {
            pi[k] += z(i, k);
        }
    }
    const double floor = 1e-10;
    bool renorm = false;
    for (std::size_t k = 0; k < kk; ++k) {
        if (pi[k] < floor * static_cast<double>(n)) {
            if (empty_components) empty_components->push_back(static_cast<int>(k));
            pi[k] = std::max(pi[k], floor * static_cast<double>(n));
            renorm = true;
        }
        pi[k] /= static_cast<double>(n);
    }
    if (renorm) {
        const double total = std::accumulate(pi.begin(), pi.end(), 0.0);
        for (auto& w : pi) w /= total;
    }
    return pi;
}

// One safeguarded Newton-Raphson step for the block's shared location.
inline StepOutcome update_mu_block(const Block& block, const std::vector<double>& data,
                                   const Matrix& z, const MixtureModel& m) {
    const double mu = m.components[static_cast<std::size_t>(block.front())].mu;
    const auto grad = mu_block_gradient(block, data, z, m);
    StepOutcome out;
    out.value = mu;
    out.gradient = grad.g;
    if (!std::isfinite(grad.g) || !std::isfinite(grad.gp) ||
        std::abs(grad.gp) < detail::kCurvatureGuard) {
        return out;
    }
    auto q = [&](double v) { return detail::q_mu_block(v, block, data, z, m); };
    auto valid = [](double) { return true; };
    auto stepped = detail::safeguarded_step(mu, grad.g / grad.gp, valid, q);
    stepped.gradient = grad.g;
    return stepped;
}

// One safeguarded Newton-Raphson step for the block's shared scale, using
// the already-updated locations. The result is floored at sigma_min.
inline StepOutcome update_sigma_block(const Block& block, const std::vector<double>& data,
                                      const Matrix& z, const MixtureModel& m, double sigma_min) {
    const double sigma = m.components[static_cast<std::size_t>(block.front())].sigma;
    const auto sums = detail::scale_sums(block, data, z, m);
    GradientPair grad;
    for (std::size_t b = 0; b < block.size(); ++b) {
        const double nu = m.components[static_cast<std::size_t>(block[b])].nu;
        grad.g += -sums.w[b] / sigma + nu * sums.s[b] * std::pow(sigma, -nu - 1.0);
        grad.gp += sums.w[b] / (sigma * sigma) -
                   nu * (nu + 1.0) * sums.s[b] * std::pow(sigma, -nu - 2.0);
    }
    StepOutcome out;
    out.value = sigma;
    out.gradient = grad.g;
    if (!std::isfinite(grad.g) || !std::isfinite(grad.gp) ||
        std::abs(grad.gp) < detail::kCurvatureGuard) {
        return out;
    }
    auto q = [&](double v) { return detail::q_sigma_block(v, block, sums, m); };
    auto valid = [](double v) { return v > 0.0; };
    auto stepped = detail::safeguarded_step(sigma, grad.g / grad.gp, valid, q);
    stepped.gradient = grad.g;
    if (stepped.updated && stepped.value < sigma_min) {
        stepped.value = sigma_min;
        stepped.clamped = true;
    }
    return stepped;
}

// One damped Newton-Raphson step for the block's shared shape. The update is
// skipped outright when |g| is below the skip threshold (evaluated on the
// undamped gradient); otherwise the step is scaled by exp(-nu) and the
// result clamped into [nu_min, nu_max].
inline StepOutcome update_nu_block(const Block& block, const std::vector<double>& data,
                                   const Matrix& z, const MixtureModel& m,
                                   const FitConfig& cfg) {
    const double nu = m.components[static_cast<std::size_t>(block.front())].nu;
    const auto grad = nu_block_gradient(block, data, z, m);
    StepOutcome out;
    out.value = nu;
    out.gradient = grad.g;
    if (!std::isfinite(grad.g) || !std::isfinite(grad.gp)) {
        return out;
    }
    if (std::abs(grad.g) < cfg.nu_grad_skip_threshold) {
        out.skipped_by_rule = true;
        return out;
    }
    if (std::abs(grad.gp) < detail::kCurvatureGuard) {
        return out;
    }
    const double alpha = cfg.use_adaptive_step ? std::exp(-nu) : 1.0;
    auto q = [&](double v) { return detail::q_nu_block(v, block, data, z, m); };
    auto valid = [](double v) { return v > 0.0; };
    auto stepped = detail::safeguarded_step(nu, alpha * grad.g / grad.gp, valid, q);
    stepped.gradient = grad.g;
    if (stepped.updated) {
        const double clamped = std::clamp(stepped.value, cfg.nu_min, cfg.nu_max);
        if (clamped != stepped.value) {
            stepped.value = clamped;
            stepped.clamped = true;
        }
    }
    return stepped;
}

// K-means with k-means++ seeding. Initial component parameters come from the
// cluster moments (nu starts at 2); constrained blocks are averaged so the
// starting point already satisfies the spec.
inline MixtureModel kmeans_init(const std::vector<double>& data, int k,
                                const ConstraintSpec& spec, Rng& rng,
                                double sigma_floor) {
    const std::size_t n = data.size();
    {
        std::vector<double> uniq(data);
        std::sort(uniq.begin(), uniq.end());
        uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
        if (static_cast<int>(uniq.size()) < k) {
            throw input_error("kmeans_init: need at least K distinct data values");
        }
    }
    const auto kk = static_cast<std::size_t>(k);

    auto seed_centers = [&]() {
        std::vector<double> centers;
        centers.push_back(data[static_cast<std::size_t>(rng.uniform() * static_cast<double>(n))]);
        std::vector<double> d2(n);
        while (centers.size() < kk) {
            double total = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                double best = std::numeric_limits<double>::infinity();
                for (double c : centers) {
                    best = std::min(best, (data[i] - c) * (data[i] - c));
                }
                d2[i] = best;
                total += best;
            }
            if (total <= 0.0) {
                // All points coincide with a center; any distinct value works.
                for (double x : data) {
                    if (std::find(centers.begin(), centers.end(), x) == centers.end()) {
                        centers.push_back(x);
                        break;
                    }
                }
                continue;
            }
            double u = rng.uniform() * total;
            std::size_t pick = n - 1;
            for (std::size_t i = 0; i < n; ++i) {
                u -= d2[i];
                if (u <= 0.0) {
                    pick = i;
                    break;
                }
            }
            centers.push_back(data[pick]);
        }
        return centers;
    };

    std::vector<int> assign(n, 0);
    std::vector<double> centers;
    auto lloyd = [&](std::vector<double>& c) {
        for (int pass = 0; pass < 100; ++pass) {
            bool changed = false;
            for (std::size_t i = 0; i < n; ++i) {
                int best = 0;
                double bd = std::numeric_limits<double>::infinity();
                for (std::size_t j = 0; j < kk; ++j) {
                    const double d = std::abs(data[i] - c[j]);
                    if (d < bd) {
                        bd = d;
                        best = static_cast<int>(j);
                    }
                }
                if (assign[i] != best) {
                    assign[i] = best;
                    changed = true;
                }
            }
            std::vector<double> mean(kk, 0.0);
            std::vector<std::size_t> count(kk, 0);
            for (std::size_t i = 0; i < n; ++i) {
                mean[static_cast<std::size_t>(assign[i])] += data[i];
                count[static_cast<std::size_t>(assign[i])]++;
            }
            for (std::size_t j = 0; j < kk; ++j) {
                if (count[j] > 0) c[j] = mean[j] / static_cast<double>(count[j]);
            }
            if (!changed) break;
        }
        std::vector<std::size_t> count(kk, 0);
        for (std::size_t i = 0; i < n; ++i) count[static_cast<std::size_t>(assign[i])]++;
        return count;
    };

    std::vector<std::size_t> counts;
    bool ok = false;
    for (int attempt = 0; attempt < 10 && !ok; ++attempt) {
        centers = seed_centers();
        counts = lloyd(centers);
        ok = std::all_of(counts.begin(), counts.end(), [](std::size_t c) { return c > 0; });
    }
    while (!ok) {
        // Split the largest cluster: its farthest point becomes the center of
        // an empty cluster.
        const auto empty = static_cast<std::size_t>(
            std::min_element(counts.begin(), counts.end()) - counts.begin());
        const auto largest = static_cast<std::size_t>(
            std::max_element(counts.begin(), counts.end()) - counts.begin());
        double far_x = centers[largest];
        double far_d = -1.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (static_cast<std::size_t>(assign[i]) != largest) continue;
            const double d = std::abs(data[i] - centers[largest]);
            if (d > far_d) {
                far_d = d;
                far_x = data[i];
            }
        }
        centers[empty] = far_x;
        counts = lloyd(centers);
        ok = std::all_of(counts.begin(), counts.end(), [](std::size_t c) { return c > 0; });
    }

    // Component j is the j-th leftmost cluster, so constraint blocks written in
    // terms of component indices bind the same clusters regardless of seeding.
    std::vector<std::size_t> order(kk);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return centers[a] < centers[b]; });

    MixtureModel m;
    m.weights.resize(kk);
    m.components.resize(kk);
    m.constraints = spec;
    for (std::size_t j = 0; j < kk; ++j) {
        const std::size_t c = order[j];
        double mean = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (static_cast<std::size_t>(assign[i]) == c) mean += data[i];
        }
        mean /= static_cast<double>(counts[c]);
        double var = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (static_cast<std::size_t>(assign[i]) == c) {
                var += (data[i] - mean) * (data[i] - mean);
            }
        }
        var /= static_cast<double>(counts[c]);
        m.weights[j] = static_cast<double>(counts[c]) / static_cast<double>(n);
        m.components[j].mu = mean;
        m.components[j].sigma = std::max(std::sqrt(var), sigma_floor);
        m.components[j].nu = 2.0;
    }

    // Average each constrained block so the start satisfies the spec exactly.
    auto tie_blocks = [&](const Partition& part, auto get, auto set) {
        for (const auto& block : part) {
            double avg = 0.0;
            for (int idx : block) avg += get(static_cast<std::size_t>(idx));
            avg /= static_cast<double>(block.size());
            for (int idx : block) set(static_cast<std::size_t>(idx), avg);
        }
    };
    tie_blocks(spec.mu_blocks, [&](std::size_t i) { return m.components[i].mu; },
               [&](std::size_t i, double v) { m.components[i].mu = v; });
    tie_blocks(spec.sigma_blocks, [&](std::size_t i) { return m.components[i].sigma; },
               [&](std::size_t i, double v) { m.components[i].sigma = v; });
    tie_blocks(spec.nu_blocks, [&](std::size_t i) { return m.components[i].nu; },
               [&](std::size_t i, double v) { m.components[i].nu = v; });
    return m;
}

namespace detail {

struct SingleRun {
    MixtureModel model;
    double log_lik = -std::numeric_limits<double>::infinity();
    int iterations = 0;
    std::vector<double> loglik_trace;
    bool converged = false;
    std::vector<Diagnostic> diagnostics;
};

inline SingleRun ecm_single_run(const std::vector<double>& data, MixtureModel m,
                                const FitConfig& cfg) {
    SingleRun run;
    const double monotonicity_slack = 1e-8;
    double prev = log_likelihood(data, m);
    run.loglik_trace.push_back(prev);

    for (int iter = 1; iter <= cfg.max_iters; ++iter) {
        run.iterations = iter;
        std::vector<std::size_t> underflow;
        const Matrix z = responsibilities(data, m, &underflow);
        for (std::size_t row : underflow) {
            run.diagnostics.push_back(
                {DiagnosticKind::underflow_row, iter, static_cast<int>(row), data[row]});
        }

        std::vector<int> empties;
        m.weights = update_weights(z, &empties);
        for (int k : empties) {
            run.diagnostics.push_back({DiagnosticKind::empty_component, iter, k, m.weights[static_cast<std::size_t>(k)]});
        }

        auto note_step = [&](const StepOutcome& st, int rep, DiagnosticKind clamp_kind) {
            if (st.skipped_by_rule) {
                run.diagnostics.push_back({DiagnosticKind::nu_update_skipped, iter, rep, st.gradient});
            } else if (!st.updated) {
                run.diagnostics.push_back({DiagnosticKind::step_skipped, iter, rep, st.gradient});
            } else if (st.halvings > 0) {
                run.diagnostics.push_back(
                    {DiagnosticKind::step_halved, iter, rep, static_cast<double>(st.halvings)});
            }
            if (st.clamped) {
                run.diagnostics.push_back({clamp_kind, iter, rep, st.value});
            }
        };

        for (const auto& block : m.constraints.mu_blocks) {
            const auto st = update_mu_block(block, data, z, m);
            note_step(st, block.front(), DiagnosticKind::step_halved);
            for (int kc : block) m.components[static_cast<std::size_t>(kc)].mu = st.value;
        }
        for (const auto& block : m.constraints.sigma_blocks) {
            const auto st = update_sigma_block(block, data, z, m, cfg.sigma_min);
            note_step(st, block.front(), DiagnosticKind::sigma_clamped);
            for (int kc : block) m.components[static_cast<std::size_t>(kc)].sigma = st.value;
        }
        for (const auto& block : m.constraints.nu_blocks) {
            const auto st = update_nu_block(block, data, z, m, cfg);
            note_step(st, block.front(), DiagnosticKind::nu_clamped);
            for (int kc : block) m.components[static_cast<std::size_t>(kc)].nu = st.value;
        }

        const double ll = log_likelihood(data, m);
        run.loglik_trace.push_back(ll);
        if (ll < prev - monotonicity_slack) {
            run.diagnostics.push_back({DiagnosticKind::loglik_decrease, iter, 0, ll - prev});
        }
        const double rel = std::abs(ll - prev) / std::max(std::abs(prev), 1e-300);
        prev = ll;
        if (rel < cfg.loglik_rel_tol) {
            run.converged = true;
            break;
        }
    }
    run.model = std::move(m);
    run.log_lik = prev;
    return run;
}

}  // namespace detail

// Constrained ECM fit: E-step, weight update, then one safeguarded Newton
// step per location/scale/shape block, each conditional update using the
// freshest parameter values. Best of n_starts k-means initialisations wins
// by final log-likelihood (ties by fewer iterations).
inline FitResult ecm_fit(const std::vector<double>& data, int k, const ConstraintSpec& spec,
                         const FitConfig& cfg = {}) {
    cfg.validate();
    spec.validate(k);
    const std::size_t n = data.size();
    if (static_cast<int>(n) <= 4 * k) {
        throw input_error("ecm_fit: need more than 4K observations");
    }
    for (double x : data) {
        if (!std::isfinite(x)) {
            throw input_error("ecm_fit: data must be finite");
        }
    }
    {
        std::vector<double> uniq(data);
        std::sort(uniq.begin(), uniq.end());
        uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
        if (static_cast<int>(uniq.size()) < k) {
            throw input_error("ecm_fit: data needs at least K distinct values");
        }
    }

    bool have_best = false;
    detail::SingleRun best;
    std::string failures;
    for (int s = 0; s < cfg.n_starts; ++s) {
        Rng rng(cfg.seed + static_cast<std::uint64_t>(s));
        try {
            MixtureModel init = kmeans_init(data, k, spec, rng, cfg.sigma_min * 10.0);
            auto run = detail::ecm_single_run(data, std::move(init), cfg);
            if (!std::isfinite(run.log_lik)) {
                failures += "start " + std::to_string(s) + ": non-finite log-likelihood\n";
                continue;
            }
            if (!have_best || run.log_lik > best.log_lik ||
                (run.log_lik == best.log_lik && run.iterations < best.iterations)) {
                best = std::move(run);
                have_best = true;
            }
        } catch (const std::exception& e) {
            failures += "start " + std::to_string(s) + ": " + e.what() + "\n";
        }
    }
    if (!have_best) {
        throw fit_error("ecm_fit: all starts failed\n" + failures);
    }

    FitResult result;
    result.model = std::move(best.model);
    result.log_lik = best.log_lik;
    result.bic = bic(best.log_lik, free_parameter_count(k, spec), n);
    result.iterations = best.iterations;
    result.loglik_trace = std::move(best.loglik_trace);
    result.converged = best.converged;
    result.diagnostics = std::move(best.diagnostics);
    result.responsibilities = responsibilities(data, result.model);
    return result;
}

}  // namespace cmgnd

#endif  // CMGND_ECM_HPP
