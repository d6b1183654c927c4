#ifndef CMGND_GND_HPP
#define CMGND_GND_HPP

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "cmgnd/errors.hpp"
#include "cmgnd/rng.hpp"
#include "cmgnd/special_functions.hpp"

namespace cmgnd {

// One generalized normal component: location mu, scale sigma > 0, shape nu > 0.
// nu = 2 is the normal distribution (sd sigma/sqrt(2)), nu = 1 the Laplace.
struct GndParams {
    double mu = 0.0;
    double sigma = 1.0;
    double nu = 2.0;

    void validate() const {
        if (!std::isfinite(mu)) {
            throw invalid_parameter("GndParams: mu must be finite");
        }
        if (!std::isfinite(sigma) || sigma <= 0.0) {
            throw invalid_parameter("GndParams: sigma must be finite and > 0, got " +
                                    std::to_string(sigma));
        }
        if (!std::isfinite(nu) || nu <= 0.0) {
            throw invalid_parameter("GndParams: nu must be finite and > 0, got " +
                                    std::to_string(nu));
        }
    }
};

// log f(x) = log[nu / (2 sigma Gamma(1/nu))] - |(x - mu)/sigma|^nu
inline double gnd_log_pdf(double x, const GndParams& p) {
    p.validate();
    if (!std::isfinite(x)) {
        throw invalid_parameter("gnd_log_pdf: x must be finite");
    }
    const double znorm = std::log(p.nu) - std::log(2.0 * p.sigma) - log_gamma(1.0 / p.nu);
    return znorm - std::pow(std::abs((x - p.mu) / p.sigma), p.nu);
}

inline double gnd_pdf(double x, const GndParams& p) { return std::exp(gnd_log_pdf(x, p)); }

// One draw: X = mu + sigma * S * T^(1/nu), T ~ Gamma(1/nu, 1), S = +-1.
inline double gnd_draw(const GndParams& p, Rng& rng) {
    const double t = rng.gamma(1.0 / p.nu);
    const double s = rng.sign();
    return p.mu + p.sigma * s * std::pow(t, 1.0 / p.nu);
}

// n i.i.d. draws; identical seed state gives identical output.
inline std::vector<double> gnd_sample(const GndParams& p, std::size_t n, Rng& rng) {
    p.validate();
    if (n < 1) {
        throw input_error("gnd_sample: n must be >= 1");
    }
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = gnd_draw(p, rng);
    }
    return out;
}

// E|X - mu|^r = sigma^r Gamma((r+1)/nu) / Gamma(1/nu)
inline double gnd_abs_central_moment(const GndParams& p, int r) {
    p.validate();
    if (r < 1) {
        throw input_error("gnd_abs_central_moment: r must be >= 1");
    }
    const double rr = static_cast<double>(r);
    return std::pow(p.sigma, rr) *
           std::exp(log_gamma((rr + 1.0) / p.nu) - log_gamma(1.0 / p.nu));
}

// Signed central moment: zero for odd r by symmetry.
inline double gnd_central_moment(const GndParams& p, int r) {
    if (r % 2 != 0) {
        p.validate();
        if (r < 1) {
            throw input_error("gnd_central_moment: r must be >= 1");
        }
        return 0.0;
    }
    return gnd_abs_central_moment(p, r);
}

}  // namespace cmgnd

#endif  // CMGND_GND_HPP
