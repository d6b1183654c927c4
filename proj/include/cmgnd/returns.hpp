#ifndef CMGND_RETURNS_HPP
#define CMGND_RETURNS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "cmgnd/errors.hpp"
#include "cmgnd/gnd.hpp"
#include "cmgnd/mixture.hpp"

namespace cmgnd {

struct ReturnSeries {
    std::string ticker;
    std::vector<std::string> dates;   // date of each return (second day of the pair)
    std::vector<double> returns;      // daily %, log-differences
};

// r_t = 100 * ln(P_t / P_{t-1}).
inline std::vector<double> compute_returns(const std::vector<double>& prices) {
    if (prices.size() < 2) {
        throw input_error("compute_returns: need at least two prices");
    }
    for (std::size_t i = 0; i < prices.size(); ++i) {
        if (!(prices[i] > 0.0) || !std::isfinite(prices[i])) {
            throw input_error("compute_returns: non-positive price at index " + std::to_string(i));
        }
    }
    std::vector<double> r;
    r.reserve(prices.size() - 1);
    for (std::size_t i = 1; i < prices.size(); ++i) {
        r.push_back(100.0 * std::log(prices[i] / prices[i - 1]));
    }
    return r;
}

struct DescriptiveStats {
    std::size_t n = 0;
    double mean = 0.0;
    double median = 0.0;
    double std_dev = 0.0;   // sample, n-1 denominator
    double skewness = 0.0;  // moment-based
    double kurtosis = 0.0;  // non-excess
    double min = 0.0;
    double max = 0.0;
    double jb = 0.0;        // Jarque-Bera statistic
};

inline DescriptiveStats describe(const std::vector<double>& x) {
    const std::size_t n = x.size();
    if (n < 4) throw input_error("describe: need at least four observations");
    DescriptiveStats st;
    st.n = n;
    const double dn = static_cast<double>(n);
    for (double v : x) st.mean += v;
    st.mean /= dn;

    std::vector<double> sorted(x);
    std::sort(sorted.begin(), sorted.end());
    st.min = sorted.front();
    st.max = sorted.back();
    st.median = (n % 2 == 1) ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);

    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (double v : x) {
        const double d = v - st.mean;
        m2 += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
    }
    m2 /= dn;
    m3 /= dn;
    m4 /= dn;
    if (!(m2 > 0.0)) throw input_error("describe: zero variance");
    st.std_dev = std::sqrt(m2 * dn / (dn - 1.0));
    st.skewness = m3 / std::pow(m2, 1.5);
    st.kurtosis = m4 / (m2 * m2);
    const double excess = st.kurtosis - 3.0;
    st.jb = dn / 6.0 * (st.skewness * st.skewness + excess * excess / 4.0);
    return st;
}

struct DensityCurve {
    std::vector<double> x;
    std::vector<double> mixture;                  // f(x)
    std::vector<std::vector<double>> component;   // pi_k f_k(x), one vector per component
};

inline DensityCurve density_curve(const MixtureModel& m, double lo, double hi, int points) {
    if (!(lo < hi)) throw input_error("density_curve: need lo < hi");
    if (points < 2) throw input_error("density_curve: need at least two grid points");
    m.validate();
    DensityCurve curve;
    const auto np = static_cast<std::size_t>(points);
    const std::size_t kk = m.components.size();
    curve.x.resize(np);
    curve.mixture.assign(np, 0.0);
    curve.component.assign(kk, std::vector<double>(np, 0.0));
    const double step = (hi - lo) / static_cast<double>(points - 1);
    for (std::size_t i = 0; i < np; ++i) {
        const double x = lo + step * static_cast<double>(i);
        curve.x[i] = x;
        for (std::size_t k = 0; k < kk; ++k) {
            const double wf = m.weights[k] * gnd_pdf(x, m.components[k]);
            curve.component[k][i] = wf;
            curve.mixture[i] += wf;
        }
    }
    return curve;
}

}  // namespace cmgnd

#endif  // CMGND_RETURNS_HPP
