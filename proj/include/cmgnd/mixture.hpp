#ifndef CMGND_MIXTURE_HPP
#define CMGND_MIXTURE_HPP

#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "cmgnd/constraints.hpp"
#include "cmgnd/errors.hpp"
#include "cmgnd/gnd.hpp"

namespace cmgnd {

// Dense row-major matrix; just enough for responsibility tables.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    const std::vector<double>& data() const { return data_; }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

// Finite mixture of generalized normals together with the equality
// constraints its parameters satisfy.
struct MixtureModel {
    std::vector<double> weights;
    std::vector<GndParams> components;
    ConstraintSpec constraints;

    int k() const { return static_cast<int>(components.size()); }

    void validate() const {
        const int kk = k();
        if (kk < 1) {
            throw invalid_parameter("MixtureModel: need at least one component");
        }
        if (weights.size() != components.size()) {
            throw invalid_parameter("MixtureModel: weights/components size mismatch");
        }
        double total = 0.0;
        for (double w : weights) {
            if (!std::isfinite(w) || w <= 0.0) {
                throw invalid_parameter("MixtureModel: weights must be finite and > 0");
            }
            total += w;
        }
        if (std::abs(total - 1.0) > 1e-12) {
            throw invalid_parameter("MixtureModel: weights must sum to 1, got " +
                                    std::to_string(total));
        }
        for (const auto& c : components) {
            c.validate();
        }
        constraints.validate(kk);
        if (!satisfies_constraints()) {
            throw invalid_parameter("MixtureModel: parameters violate the constraint blocks");
        }
    }

    // Block members must hold bit-identical values.
    bool satisfies_constraints() const {
        auto tied = [&](const Partition& part, auto getter) {
            for (const auto& block : part) {
                for (std::size_t i = 1; i < block.size(); ++i) {
                    if (getter(block[i]) != getter(block[0])) {
                        return false;
                    }
                }
            }
            return true;
        };
        return tied(constraints.mu_blocks, [&](int i) { return components[static_cast<std::size_t>(i)].mu; }) &&
               tied(constraints.sigma_blocks, [&](int i) { return components[static_cast<std::size_t>(i)].sigma; }) &&
               tied(constraints.nu_blocks, [&](int i) { return components[static_cast<std::size_t>(i)].nu; });
    }
};

namespace detail {

// log sum_k exp(v_k), guarding the all -inf row.
inline double log_sum_exp(const std::vector<double>& v) {
    double mx = -std::numeric_limits<double>::infinity();
    for (double x : v) mx = std::max(mx, x);
    if (!std::isfinite(mx)) return mx;
    double s = 0.0;
    for (double x : v) s += std::exp(x - mx);
    return mx + std::log(s);
}

inline std::vector<double> log_weights(const MixtureModel& m) {
    std::vector<double> lw(m.weights.size());
    for (std::size_t k = 0; k < m.weights.size(); ++k) lw[k] = std::log(m.weights[k]);
    return lw;
}

}  // namespace detail

// sum_n log sum_k pi_k f_k(x_n), inner sum via log-sum-exp.
inline double log_likelihood(const std::vector<double>& data, const MixtureModel& m) {
    if (data.empty()) {
        throw input_error("log_likelihood: data must be nonempty");
    }
    m.validate();
    const std::size_t kk = m.components.size();
    const auto lw = detail::log_weights(m);
    std::vector<double> row(kk);
    double total = 0.0;
    for (double x : data) {
        for (std::size_t k = 0; k < kk; ++k) {
            row[k] = lw[k] + gnd_log_pdf(x, m.components[k]);
        }
        total += detail::log_sum_exp(row);
    }
    return total;
}

// Posterior component probabilities, one row per observation, computed in
// log space. A row where every component underflows to zero density is set
// uniform and its index recorded in underflow_rows (when non-null).
inline Matrix responsibilities(const std::vector<double>& data, const MixtureModel& m,
                               std::vector<std::size_t>* underflow_rows = nullptr) {
    if (data.empty()) {
        throw input_error("responsibilities: data must be nonempty");
    }
    m.validate();
    const std::size_t n = data.size();
    const std::size_t kk = m.components.size();
    const auto lw = detail::log_weights(m);
    Matrix z(n, kk);
    std::vector<double> row(kk);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < kk; ++k) {
            row[k] = lw[k] + gnd_log_pdf(data[i], m.components[k]);
        }
        const double lse = detail::log_sum_exp(row);
        if (!std::isfinite(lse)) {
            for (std::size_t k = 0; k < kk; ++k) {
                z(i, k) = 1.0 / static_cast<double>(kk);
            }
            if (underflow_rows) underflow_rows->push_back(i);
            continue;
        }
        for (std::size_t k = 0; k < kk; ++k) {
            z(i, k) = std::exp(row[k] - lse);
        }
    }
    return z;
}

// p log(n) - 2 log L
inline double bic(double log_lik, int p, std::size_t n) {
    if (n < 1) {
        throw input_error("bic: n must be >= 1");
    }
    return static_cast<double>(p) * std::log(static_cast<double>(n)) - 2.0 * log_lik;
}

struct MarginalMoments {
    double mean = 0.0;
    double variance = 0.0;
    double skewness = 0.0;   // m3 / m2^(3/2)
    double kurtosis = 0.0;   // m4 / m2^2, non-excess
};

// Central moments of the mixture about its mean, via the binomial expansion
// of each component's moments around its own location.
inline MarginalMoments marginal_moments(const MixtureModel& m) {
    m.validate();
    const std::size_t kk = m.components.size();
    double mean = 0.0;
    for (std::size_t k = 0; k < kk; ++k) {
        mean += m.weights[k] * m.components[k].mu;
    }
    // E[(X - mean)^r | k] = sum_j C(r,j) delta^(r-j) E[(X-mu_k)^j],
    // odd component moments vanish.
    auto mixed_central = [&](int r) {
        static constexpr double choose[5][5] = {{1, 0, 0, 0, 0},
                                                {1, 1, 0, 0, 0},
                                                {1, 2, 1, 0, 0},
                                                {1, 3, 3, 1, 0},
                                                {1, 4, 6, 4, 1}};
        double acc = 0.0;
        for (std::size_t k = 0; k < kk; ++k) {
            const double delta = m.components[k].mu - mean;
            double comp = 0.0;
            for (int j = 0; j <= r; ++j) {
                const double mj = (j == 0) ? 1.0 : gnd_central_moment(m.components[k], j);
                if (mj == 0.0) continue;
                comp += choose[r][j] * std::pow(delta, static_cast<double>(r - j)) * mj;
            }
            acc += m.weights[k] * comp;
        }
        return acc;
    };
    MarginalMoments out;
    out.mean = mean;
    const double m2 = mixed_central(2);
    const double m3 = mixed_central(3);
    const double m4 = mixed_central(4);
    out.variance = m2;
    out.skewness = m3 / std::pow(m2, 1.5);
    out.kurtosis = m4 / (m2 * m2);
    return out;
}

}  // namespace cmgnd

#endif  // CMGND_MIXTURE_HPP
