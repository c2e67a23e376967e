// Two-component 1D Gaussian mixture fitted by EM to per-sample (or
// per-pixel) loss values. The posterior of the smaller-mean component is the
// "clean" probability used for sample reweighting and for the dynamic pixel
// mask: low loss is the clean signature.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

#include <json.hpp>

namespace noisylearn {

/// Min-max normalization to [0, 1]; an all-equal input maps to all 0.5.
inline std::vector<double> normalize_losses(std::span<const double> raw) {
    if (raw.size() < 2) throw std::invalid_argument("normalize_losses: need at least 2 values");
    double lo = raw[0], hi = raw[0];
    for (double v : raw) {
        if (!std::isfinite(v)) throw std::invalid_argument("normalize_losses: non-finite value");
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    std::vector<double> out(raw.size());
    if (lo == hi) {
        std::fill(out.begin(), out.end(), 0.5);
        return out;
    }
    const double scale = 1.0 / (hi - lo);
    for (std::size_t i = 0; i < raw.size(); ++i) out[i] = (raw[i] - lo) * scale;
    return out;
}

/**
 * Fitted two-component mixture. Components keep the order they were
 * initialized in; clean_component indexes the one with the smaller mean.
 */
struct MixtureFit {
    std::array<double, 2> mean{};
    std::array<double, 2> var{};
    std::array<double, 2> weight{};
    std::vector<double> loglik_trace;
    int clean_component = 0;

    static constexpr double kVarFloor = 1e-6;

    /// Posterior probability of the clean (smaller-mean) component at x.
    double posterior_clean(double x) const {
        int c = clean_component;
        int o = 1 - c;
        double lc = component_log_density(c, x);
        double lo = component_log_density(o, x);
        // 1 / (1 + exp(lo - lc)) evaluated stably.
        double d = lo - lc;
        if (d > 700.0) return 0.0;
        if (d < -700.0) return 1.0;
        return 1.0 / (1.0 + std::exp(d));
    }

    double component_log_density(int component, double x) const {
        double m = mean[component];
        double v = var[component];
        double w = weight[component];
        double lw = (w > 0.0) ? std::log(w) : -1e300;
        return lw - 0.5 * std::log(2.0 * std::numbers::pi * v) - (x - m) * (x - m) / (2.0 * v);
    }
};

namespace detail {
inline double percentile_sorted(const std::vector<double>& sorted, double q) {
    // Linear interpolation between closest ranks.
    double pos = q * static_cast<double>(sorted.size() - 1);
    std::size_t lo = static_cast<std::size_t>(pos);
    std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    double frac = pos - static_cast<double>(lo);
    return sorted[lo] * (1.0 - frac) + sorted[hi] * frac;
}
}  // namespace detail

/**
 * EM fit with deterministic initialization: component means start at the
 * 25th and 75th percentiles, both variances at the data variance, weights at
 * one half. Iterates until the log-likelihood improves by less than `tol` or
 * `max_iters` is reached. Variances are floored at kVarFloor so degenerate
 * (near-constant) inputs converge instead of collapsing.
 *
 * The seed parameter is accepted for interface stability; the percentile
 * initialization makes the fit fully deterministic without it.
 */
inline MixtureFit fit_gmm(std::span<const double> values, int max_iters = 100, double tol = 1e-8,
                          std::uint64_t seed = 0) {
    (void)seed;
    if (values.size() < 10) throw std::invalid_argument("fit_gmm: need at least 10 values");
    const std::size_t n = values.size();

    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());

    MixtureFit fit;
    fit.mean = {detail::percentile_sorted(sorted, 0.25), detail::percentile_sorted(sorted, 0.75)};
    double data_mean = 0.0;
    for (double v : values) data_mean += v;
    data_mean /= static_cast<double>(n);
    double data_var = 0.0;
    for (double v : values) data_var += (v - data_mean) * (v - data_mean);
    data_var = std::max(data_var / static_cast<double>(n), MixtureFit::kVarFloor);
    fit.var = {data_var, data_var};
    fit.weight = {0.5, 0.5};

    std::vector<double> resp(n);  // responsibility of component 0
    double prev_loglik = -std::numeric_limits<double>::infinity();
    for (int iter = 0; iter < max_iters; ++iter) {
        // E-step, with the log-likelihood of the current parameters.
        double loglik = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double l0 = fit.component_log_density(0, values[i]);
            double l1 = fit.component_log_density(1, values[i]);
            double m = std::max(l0, l1);
            double z = std::exp(l0 - m) + std::exp(l1 - m);
            loglik += m + std::log(z);
            resp[i] = std::exp(l0 - m) / z;
        }
        fit.loglik_trace.push_back(loglik);
        if (iter > 0 && loglik - prev_loglik < tol) break;
        prev_loglik = loglik;

        // M-step.
        double n0 = 0.0, sum0 = 0.0, sum1 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            n0 += resp[i];
            sum0 += resp[i] * values[i];
            sum1 += (1.0 - resp[i]) * values[i];
        }
        double n1 = static_cast<double>(n) - n0;
        n0 = std::max(n0, 1e-12);
        n1 = std::max(n1, 1e-12);
        double m0 = sum0 / n0;
        double m1 = sum1 / n1;
        double v0 = 0.0, v1 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            v0 += resp[i] * (values[i] - m0) * (values[i] - m0);
            v1 += (1.0 - resp[i]) * (values[i] - m1) * (values[i] - m1);
        }
        fit.mean = {m0, m1};
        fit.var = {std::max(v0 / n0, MixtureFit::kVarFloor), std::max(v1 / n1, MixtureFit::kVarFloor)};
        fit.weight = {n0 / static_cast<double>(n), n1 / static_cast<double>(n)};
    }

    fit.clean_component = (fit.mean[0] <= fit.mean[1]) ? 0 : 1;
    return fit;
}

inline nlohmann::json mixture_to_json(const MixtureFit& fit) {
    return {{"means", fit.mean},
            {"vars", fit.var},
            {"weights", fit.weight},
            {"clean_component", fit.clean_component},
            {"loglik_trace", fit.loglik_trace}};
}

inline MixtureFit mixture_from_json(const nlohmann::json& j) {
    MixtureFit fit;
    fit.mean = j.at("means").get<std::array<double, 2>>();
    fit.var = j.at("vars").get<std::array<double, 2>>();
    fit.weight = j.at("weights").get<std::array<double, 2>>();
    fit.clean_component = j.at("clean_component").get<int>();
    fit.loglik_trace = j.at("loglik_trace").get<std::vector<double>>();
    return fit;
}

}  // namespace noisylearn
