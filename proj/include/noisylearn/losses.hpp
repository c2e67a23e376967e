// Robust classification losses over the softmax probability vector: value,
// full analytic gradient with respect to every probability component, the
// per-class loss sum used by the symmetric-loss condition, and the
// noise-tolerance identity check under uniform label flipping.
//
// Gradients are taken with respect to the probabilities themselves; the
// chain through softmax and network parameters lives in the trainer. A
// probability vector is expected to have entries in (0, 1) summing to 1;
// every entry is clamped to [kProbFloor, 1 - kProbFloor] before a log is
// taken, which uniformly stands in for the "constant replacing log(0)"
// convention that reverse cross entropy makes explicit through its A.
#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "noise.hpp"

namespace noisylearn {

inline constexpr double kProbFloor = 1e-12;

inline double clamp_prob(double p) { return std::clamp(p, kProbFloor, 1.0 - kProbFloor); }

/// Shannon entropy of a probability vector (natural log).
inline double entropy(std::span<const double> p) {
    double h = 0.0;
    for (double v : p) {
        double c = clamp_prob(v);
        h -= c * std::log(c);
    }
    return h;
}

enum class LossFamily { ce, fl, mae, rce, gce, tce, nce, apl };

inline std::string to_string(LossFamily f) {
    switch (f) {
        case LossFamily::ce: return "CE";
        case LossFamily::fl: return "FL";
        case LossFamily::mae: return "MAE";
        case LossFamily::rce: return "RCE";
        case LossFamily::gce: return "GCE";
        case LossFamily::tce: return "TCE";
        case LossFamily::nce: return "NCE";
        case LossFamily::apl: return "APL";
    }
    throw std::logic_error("unreachable");
}

inline LossFamily loss_family_from_string(const std::string& s) {
    if (s == "CE") return LossFamily::ce;
    if (s == "FL") return LossFamily::fl;
    if (s == "MAE") return LossFamily::mae;
    if (s == "RCE") return LossFamily::rce;
    if (s == "GCE") return LossFamily::gce;
    if (s == "TCE") return LossFamily::tce;
    if (s == "NCE") return LossFamily::nce;
    if (s == "APL") return LossFamily::apl;
    throw std::invalid_argument("unknown loss family: " + s);
}

/**
 * A loss family plus its hyperparameters. APL composes an active and a
 * passive member loss with positive weights; nesting APL inside APL is
 * rejected. em_lambda adds a prediction-entropy term to any family.
 */
struct LossSpec {
    LossFamily family = LossFamily::ce;
    double gamma = 2.0;   // FL focusing exponent, >= 0
    double a = -4.0;      // RCE constant, < 0
    double rho = 0.7;     // GCE exponent, (0, 1]
    int t = 2;            // TCE truncation order, >= 1
    double alpha = 1.0;   // APL active weight, > 0
    double beta = 1.0;    // APL passive weight, > 0
    std::shared_ptr<const LossSpec> active;   // APL only
    std::shared_ptr<const LossSpec> passive;  // APL only
    double em_lambda = 0.0;  // entropy-minimization weight, >= 0

    void validate() const {
        if (em_lambda < 0.0) throw std::invalid_argument("LossSpec: em_lambda must be >= 0");
        switch (family) {
            case LossFamily::fl:
                if (gamma < 0.0) throw std::invalid_argument("LossSpec: FL gamma must be >= 0");
                break;
            case LossFamily::rce:
                if (a >= 0.0) throw std::invalid_argument("LossSpec: RCE A must be negative");
                break;
            case LossFamily::gce:
                if (rho <= 0.0 || rho > 1.0) throw std::invalid_argument("LossSpec: GCE rho must be in (0, 1]");
                break;
            case LossFamily::tce:
                if (t < 1) throw std::invalid_argument("LossSpec: TCE t must be >= 1");
                break;
            case LossFamily::apl:
                if (!active || !passive) throw std::invalid_argument("LossSpec: APL needs active and passive terms");
                if (active->family == LossFamily::apl || passive->family == LossFamily::apl)
                    throw std::invalid_argument("LossSpec: APL may not nest APL");
                if (alpha <= 0.0 || beta <= 0.0)
                    throw std::invalid_argument("LossSpec: APL weights must be positive");
                active->validate();
                passive->validate();
                break;
            default:
                break;
        }
        if (family != LossFamily::apl && (active || passive))
            throw std::invalid_argument("LossSpec: only APL carries member losses");
    }

    LossSpec with_em(double lambda) const {
        LossSpec s = *this;
        s.em_lambda = lambda;
        return s;
    }

    static LossSpec ce() { return {}; }
    static LossSpec fl(double gamma) { LossSpec s; s.family = LossFamily::fl; s.gamma = gamma; return s; }
    static LossSpec mae() { LossSpec s; s.family = LossFamily::mae; return s; }
    static LossSpec rce(double a = -4.0) { LossSpec s; s.family = LossFamily::rce; s.a = a; return s; }
    static LossSpec gce(double rho) { LossSpec s; s.family = LossFamily::gce; s.rho = rho; return s; }
    static LossSpec tce(int t) { LossSpec s; s.family = LossFamily::tce; s.t = t; return s; }
    static LossSpec nce() { LossSpec s; s.family = LossFamily::nce; return s; }
    static LossSpec apl(LossSpec active_term, LossSpec passive_term, double alpha = 1.0, double beta = 1.0) {
        LossSpec s;
        s.family = LossFamily::apl;
        s.active = std::make_shared<const LossSpec>(std::move(active_term));
        s.passive = std::make_shared<const LossSpec>(std::move(passive_term));
        s.alpha = alpha;
        s.beta = beta;
        return s;
    }
};

struct LossEval {
    double value = 0.0;
    std::vector<double> grad_p;  // d(loss)/d(p_k) for every class k
};

inline double loss_value(const LossSpec& spec, std::span<const double> p, int y);
inline LossEval loss_grad(const LossSpec& spec, std::span<const double> p, int y);

namespace detail {

inline void check_label(std::span<const double> p, int y) {
    if (y < 0 || y >= static_cast<int>(p.size()))
        throw std::invalid_argument("loss: label out of range");
    if (p.size() < 2) throw std::invalid_argument("loss: need at least 2 classes");
}

inline double base_loss_value(const LossSpec& spec, std::span<const double> p, int y) {
    const double py = clamp_prob(p[y]);
    switch (spec.family) {
        case LossFamily::ce:
            return -std::log(py);
        case LossFamily::fl:
            return -std::pow(1.0 - py, spec.gamma) * std::log(py);
        case LossFamily::mae:
            return 2.0 * (1.0 - py);
        case LossFamily::rce:
            return -spec.a * (1.0 - py);
        case LossFamily::gce:
            return (1.0 - std::pow(py, spec.rho)) / spec.rho;
        case LossFamily::tce: {
            double q = 1.0 - py;
            double pow_q = 1.0;
            double acc = 0.0;
            for (int i = 1; i <= spec.t; ++i) {
                pow_q *= q;
                acc += pow_q / i;
            }
            return acc;
        }
        case LossFamily::nce: {
            double denom = 0.0;
            for (double v : p) denom += std::log(clamp_prob(v));
            return std::log(py) / denom;
        }
        case LossFamily::apl:
            return spec.alpha * noisylearn::loss_value(*spec.active, p, y) +
                   spec.beta * noisylearn::loss_value(*spec.passive, p, y);
        default:
            throw std::logic_error("unreachable");
    }
}

inline void base_loss_grad(const LossSpec& spec, std::span<const double> p, int y,
                           std::vector<double>& grad) {
    const double py = clamp_prob(p[y]);
    switch (spec.family) {
        case LossFamily::ce:
            grad[y] += -1.0 / py;
            break;
        case LossFamily::fl: {
            double q = 1.0 - py;
            grad[y] += spec.gamma * std::pow(q, spec.gamma - 1.0) * std::log(py) -
                       std::pow(q, spec.gamma) / py;
            break;
        }
        case LossFamily::mae:
            grad[y] += -2.0;
            break;
        case LossFamily::rce:
            grad[y] += spec.a;
            break;
        case LossFamily::gce:
            grad[y] += -std::pow(py, spec.rho - 1.0);
            break;
        case LossFamily::tce:
            grad[y] += -(1.0 - std::pow(1.0 - py, spec.t)) / py;
            break;
        case LossFamily::nce: {
            double denom = 0.0;
            for (double v : p) denom += std::log(clamp_prob(v));
            const double log_py = std::log(py);
            const double off_target = denom - log_py;  // sum of the other logs
            const double denom2 = denom * denom;
            for (std::size_t k = 0; k < p.size(); ++k) {
                double pk = clamp_prob(p[k]);
                if (static_cast<int>(k) == y)
                    grad[k] += off_target / (denom2 * pk);
                else
                    grad[k] += -log_py / (denom2 * pk);
            }
            break;
        }
        case LossFamily::apl: {
            LossEval active_eval = noisylearn::loss_grad(*spec.active, p, y);
            LossEval passive_eval = noisylearn::loss_grad(*spec.passive, p, y);
            for (std::size_t k = 0; k < p.size(); ++k)
                grad[k] += spec.alpha * active_eval.grad_p[k] + spec.beta * passive_eval.grad_p[k];
            break;
        }
        default:
            throw std::logic_error("unreachable");
    }
}

}  // namespace detail

/// Table-form loss value, plus em_lambda * H(p) when configured.
inline double loss_value(const LossSpec& spec, std::span<const double> p, int y) {
    detail::check_label(p, y);
    double v = detail::base_loss_value(spec, p, y);
    if (spec.em_lambda > 0.0) v += spec.em_lambda * entropy(p);
    return v;
}

/// Value plus the full gradient with respect to every probability component.
inline LossEval loss_grad(const LossSpec& spec, std::span<const double> p, int y) {
    detail::check_label(p, y);
    LossEval eval;
    eval.grad_p.assign(p.size(), 0.0);
    detail::base_loss_grad(spec, p, y, eval.grad_p);
    if (spec.em_lambda > 0.0)
        for (std::size_t k = 0; k < p.size(); ++k)
            eval.grad_p[k] += spec.em_lambda * (-std::log(clamp_prob(p[k])) - 1.0);
    eval.value = loss_value(spec, p, y);
    return eval;
}

/// Sum of the loss over all class targets; constant iff the loss is symmetric.
inline double symmetry_constant(const LossSpec& spec, std::span<const double> p) {
    double acc = 0.0;
    for (int y = 0; y < static_cast<int>(p.size()); ++y) acc += loss_value(spec, p, y);
    return acc;
}

/// True when the per-class loss sum is a constant independent of p.
inline bool is_exactly_symmetric(const LossSpec& spec) {
    if (spec.em_lambda != 0.0) return false;
    switch (spec.family) {
        case LossFamily::mae:
        case LossFamily::rce:
        case LossFamily::nce:
            return true;
        case LossFamily::gce:
            return spec.rho == 1.0;
        case LossFamily::tce:
            return spec.t == 1;
        case LossFamily::apl:
            return is_exactly_symmetric(*spec.active) && is_exactly_symmetric(*spec.passive);
        default:
            return false;
    }
}

struct NoiseToleranceResult {
    double lhs = 0.0;  // risk under symmetric flipping, enumerated exactly
    double rhs = 0.0;  // (1 - eta*K/(K-1)) * clean risk + eta*C/(K-1)
    double clean_risk = 0.0;
    double constant = 0.0;
};

/**
 * Evaluates both sides of the symmetric-loss noise-tolerance identity on a
 * probe set. The left side enumerates all K flip outcomes weighted by the
 * symmetric transition row; the right side rescales the clean risk by the
 * identity. Requires an exactly symmetric loss and eta < (K-1)/K.
 */
inline NoiseToleranceResult noise_tolerance_check(
    const LossSpec& spec, const std::vector<std::pair<std::vector<double>, int>>& probes,
    double eta, int num_classes) {
    if (!is_exactly_symmetric(spec))
        throw std::domain_error("noise_tolerance_check: loss is not exactly symmetric");
    if (probes.empty()) throw std::invalid_argument("noise_tolerance_check: empty probe set");
    if (!(eta >= 0.0 && eta < static_cast<double>(num_classes - 1) / num_classes))
        throw std::invalid_argument("noise_tolerance_check: eta must be in [0, (K-1)/K)");

    const TransitionMatrix q = symmetric_transition(num_classes, eta);
    NoiseToleranceResult r;
    r.constant = symmetry_constant(spec, probes.front().first);
    double lhs = 0.0, clean = 0.0;
    for (const auto& [p, y] : probes) {
        if (static_cast<int>(p.size()) != num_classes)
            throw std::invalid_argument("noise_tolerance_check: probe size mismatch");
        for (int j = 0; j < num_classes; ++j) lhs += q.at(y, j) * loss_value(spec, p, j);
        clean += loss_value(spec, p, y);
    }
    r.lhs = lhs / static_cast<double>(probes.size());
    r.clean_risk = clean / static_cast<double>(probes.size());
    double k = static_cast<double>(num_classes);
    r.rhs = (1.0 - eta * k / (k - 1.0)) * r.clean_risk + eta * r.constant / (k - 1.0);
    return r;
}

/**
 * Gradient attenuation of NCE relative to plain CE on the labeled class:
 * with P = log p_y and Q the sum of the other log-probabilities, the NCE
 * gradient equals -Q/(P+Q)^2 times the CE gradient at the same point.
 * Positive for every interior p; small values mean slow fitting.
 */
inline double nce_weight(std::span<const double> p, int y) {
    detail::check_label(p, y);
    double denom = 0.0;
    for (double v : p) denom += std::log(clamp_prob(v));
    double off_target = denom - std::log(clamp_prob(p[y]));
    return -off_target / (denom * denom);
}

// ---------------------------------------------------------------------------
// JSON binding
// ---------------------------------------------------------------------------

inline nlohmann::json loss_spec_to_json(const LossSpec& spec) {
    nlohmann::json j;
    j["family"] = to_string(spec.family);
    switch (spec.family) {
        case LossFamily::fl: j["gamma"] = spec.gamma; break;
        case LossFamily::rce: j["A"] = spec.a; break;
        case LossFamily::gce: j["rho"] = spec.rho; break;
        case LossFamily::tce: j["t"] = spec.t; break;
        case LossFamily::apl:
            j["active"] = loss_spec_to_json(*spec.active);
            j["passive"] = loss_spec_to_json(*spec.passive);
            j["alpha"] = spec.alpha;
            j["beta"] = spec.beta;
            break;
        default: break;
    }
    if (spec.em_lambda != 0.0) j["em_lambda"] = spec.em_lambda;
    return j;
}

inline LossSpec loss_spec_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw std::invalid_argument("loss spec: expected a JSON object");
    static const std::vector<std::string> known = {"family", "gamma",   "A",    "rho",  "t",
                                                   "active", "passive", "alpha", "beta", "em_lambda"};
    for (const auto& [key, _] : j.items())
        if (std::find(known.begin(), known.end(), key) == known.end())
            throw std::invalid_argument("loss spec: unknown key '" + key + "'");

    LossSpec spec;
    spec.family = loss_family_from_string(j.at("family").get<std::string>());
    if (j.contains("gamma")) spec.gamma = j.at("gamma").get<double>();
    if (j.contains("A")) spec.a = j.at("A").get<double>();
    if (j.contains("rho")) spec.rho = j.at("rho").get<double>();
    if (j.contains("t")) spec.t = j.at("t").get<int>();
    if (j.contains("alpha")) spec.alpha = j.at("alpha").get<double>();
    if (j.contains("beta")) spec.beta = j.at("beta").get<double>();
    if (j.contains("em_lambda")) spec.em_lambda = j.at("em_lambda").get<double>();
    if (spec.family == LossFamily::apl) {
        spec.active = std::make_shared<const LossSpec>(loss_spec_from_json(j.at("active")));
        spec.passive = std::make_shared<const LossSpec>(loss_spec_from_json(j.at("passive")));
    }
    spec.validate();
    return spec;
}

}  // namespace noisylearn
