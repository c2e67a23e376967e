// Ground-truth corruption: label flips driven by a row-stochastic transition
// matrix, and solid-color rectangle distractors pasted over multi-view image
// observations. Corruption is injected once, offline, and serialized with the
// data so every training regime sees identical inputs.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "dataset.hpp"
#include "image.hpp"
#include "rng.hpp"

namespace noisylearn {

/**
 * K x K row-stochastic label corruption model; entry (i, j) is the
 * probability that clean class i is observed as class j.
 */
class TransitionMatrix {
public:
    static constexpr double kRowSumTolerance = 1e-12;

    TransitionMatrix(int num_classes, std::vector<double> row_major)
        : k_(num_classes), q_(std::move(row_major)) {
        if (k_ < 2) throw std::invalid_argument("TransitionMatrix: need at least 2 classes");
        if (q_.size() != static_cast<std::size_t>(k_) * k_)
            throw std::invalid_argument("TransitionMatrix: entry count mismatch");
        for (int i = 0; i < k_; ++i) {
            double row_sum = 0.0;
            for (int j = 0; j < k_; ++j) {
                double v = at(i, j);
                if (v < 0.0) throw std::invalid_argument("TransitionMatrix: negative entry");
                row_sum += v;
            }
            if (std::abs(row_sum - 1.0) > kRowSumTolerance)
                throw std::invalid_argument("TransitionMatrix: row does not sum to 1");
        }
    }

    int num_classes() const { return k_; }
    double at(int i, int j) const { return q_[static_cast<std::size_t>(i) * k_ + j]; }
    const std::vector<double>& flat() const { return q_; }

private:
    int k_;
    std::vector<double> q_;
};

/// Uniform (symmetric) noise: diagonal 1-eta, off-diagonal eta/(K-1).
inline TransitionMatrix symmetric_transition(int num_classes, double eta) {
    if (num_classes < 2) throw std::invalid_argument("symmetric_transition: K must be >= 2");
    if (eta < 0.0 || eta >= 1.0) throw std::invalid_argument("symmetric_transition: eta must be in [0, 1)");
    std::vector<double> q(static_cast<std::size_t>(num_classes) * num_classes, eta / (num_classes - 1));
    for (int i = 0; i < num_classes; ++i) q[static_cast<std::size_t>(i) * num_classes + i] = 1.0 - eta;
    return TransitionMatrix(num_classes, std::move(q));
}

/// Pair (asymmetric) noise: class i flips only to pair_map[i], with probability eta.
inline TransitionMatrix asymmetric_transition(int num_classes, double eta,
                                              const std::vector<int>& pair_map) {
    if (num_classes < 2) throw std::invalid_argument("asymmetric_transition: K must be >= 2");
    if (eta < 0.0 || eta >= 1.0) throw std::invalid_argument("asymmetric_transition: eta must be in [0, 1)");
    if (static_cast<int>(pair_map.size()) != num_classes)
        throw std::invalid_argument("asymmetric_transition: pair_map size mismatch");
    std::vector<double> q(static_cast<std::size_t>(num_classes) * num_classes, 0.0);
    for (int i = 0; i < num_classes; ++i) {
        int j = pair_map[i];
        if (j < 0 || j >= num_classes || j == i)
            throw std::invalid_argument("asymmetric_transition: pair_map must map to a different class");
        q[static_cast<std::size_t>(i) * num_classes + i] = 1.0 - eta;
        q[static_cast<std::size_t>(i) * num_classes + j] = eta;
    }
    return TransitionMatrix(num_classes, std::move(q));
}

enum class NoiseKind { symmetric, asymmetric, custom };

/// Declarative corruption recipe, resolvable to a TransitionMatrix.
struct NoiseConfig {
    NoiseKind kind = NoiseKind::symmetric;
    double eta = 0.0;
    std::vector<int> pair_map;                   // asymmetric only; empty means (i+1) mod K
    std::optional<TransitionMatrix> matrix;      // custom only

    TransitionMatrix build(int num_classes) const {
        switch (kind) {
            case NoiseKind::symmetric:
                return symmetric_transition(num_classes, eta);
            case NoiseKind::asymmetric: {
                std::vector<int> map = pair_map;
                if (map.empty()) {
                    map.resize(num_classes);
                    for (int i = 0; i < num_classes; ++i) map[i] = (i + 1) % num_classes;
                }
                return asymmetric_transition(num_classes, eta, map);
            }
            case NoiseKind::custom:
                if (!matrix) throw std::invalid_argument("NoiseConfig: custom kind requires a matrix");
                return *matrix;
        }
        throw std::logic_error("unreachable");
    }
};

/**
 * Resamples each noisy label independently from the row of Q indexed by the
 * clean label. Requires an uncorrupted dataset so noise is injected exactly
 * once; clean labels are left untouched.
 */
inline ClassificationDataset apply_label_noise(const ClassificationDataset& ds,
                                               const TransitionMatrix& q, std::uint64_t seed) {
    if (q.num_classes() != ds.num_classes)
        throw std::invalid_argument("apply_label_noise: class count mismatch");
    if (!ds.is_clean())
        throw std::invalid_argument("apply_label_noise: dataset already carries noise");
    Rng rng(seed);
    ClassificationDataset out = ds;
    for (auto& s : out.samples) {
        double u = rng.uniform();
        double cum = 0.0;
        int drawn = q.num_classes() - 1;  // fallback catches row-sum rounding
        for (int j = 0; j < q.num_classes(); ++j) {
            cum += q.at(s.clean_label, j);
            if (u < cum) {
                drawn = j;
                break;
            }
        }
        s.noisy_label = drawn;
    }
    return out;
}

inline nlohmann::json transition_to_json(const TransitionMatrix& q) {
    return {{"num_classes", q.num_classes()}, {"q", q.flat()}};
}

inline TransitionMatrix transition_from_json(const nlohmann::json& j) {
    return TransitionMatrix(j.at("num_classes").get<int>(), j.at("q").get<std::vector<double>>());
}

// ---------------------------------------------------------------------------
// Multi-view observations with distractors
// ---------------------------------------------------------------------------

/**
 * A latent image observed through several views, each polluted by
 * solid-color rectangle distractors placed independently per view. The
 * oracle mask records exactly which pixels were overwritten; it exists for
 * instrumentation and is never shown to a fitting regime.
 */
struct ViewSet {
    Image latent;
    std::vector<Image> views;
    std::vector<std::vector<std::uint8_t>> oracle_masks;  // per view, width*height, 1 = overwritten

    void validate() const {
        if (views.size() != oracle_masks.size())
            throw std::invalid_argument("ViewSet: views/masks count mismatch");
        for (std::size_t v = 0; v < views.size(); ++v) {
            if (!views[v].same_size(latent))
                throw std::invalid_argument("ViewSet: view size differs from latent");
            if (oracle_masks[v].size() != latent.pixel_count())
                throw std::invalid_argument("ViewSet: mask size mismatch");
        }
    }
};

/**
 * Copies the latent into `num_views` views and pastes random solid-color
 * rectangles into each until the covered fraction first reaches
 * `distractor_fraction`. Patch edge lengths are drawn uniformly from
 * [patch_lo, patch_hi]. Placement is independent across views.
 */
inline ViewSet make_views(const Image& latent, int num_views, double distractor_fraction,
                          int patch_lo, int patch_hi, std::uint64_t seed) {
    if (num_views < 2) throw std::invalid_argument("make_views: need at least 2 views");
    if (distractor_fraction < 0.0 || distractor_fraction >= 1.0)
        throw std::invalid_argument("make_views: distractor_fraction must be in [0, 1)");
    if (patch_lo < 1 || patch_hi < patch_lo || patch_hi > std::min(latent.width, latent.height))
        throw std::invalid_argument("make_views: bad patch size range");

    Rng root(seed);
    ViewSet vs;
    vs.latent = latent;
    const std::size_t total = latent.pixel_count();
    const double target = distractor_fraction * static_cast<double>(total);
    for (int v = 0; v < num_views; ++v) {
        Rng rng = root.fork(static_cast<std::uint64_t>(v));
        Image view = latent;
        std::vector<std::uint8_t> mask(total, 0);
        std::size_t covered = 0;
        while (static_cast<double>(covered) < target) {
            int pw = rng.uniform_int(patch_lo, patch_hi);
            int ph = rng.uniform_int(patch_lo, patch_hi);
            int x0 = rng.uniform_int(0, latent.width - pw);
            int y0 = rng.uniform_int(0, latent.height - ph);
            std::array<double, 3> color = {rng.uniform(), rng.uniform(), rng.uniform()};
            for (int y = y0; y < y0 + ph; ++y)
                for (int x = x0; x < x0 + pw; ++x) {
                    std::size_t idx = static_cast<std::size_t>(y) * latent.width + x;
                    if (!mask[idx]) {
                        mask[idx] = 1;
                        ++covered;
                    }
                    view.set_pixel(x, y, color);
                }
        }
        vs.views.push_back(std::move(view));
        vs.oracle_masks.push_back(std::move(mask));
    }
    return vs;
}

// Run-length encoding for boolean masks: run lengths alternate starting with
// the number of leading zeros (possibly 0).
inline std::vector<std::int64_t> rle_encode(const std::vector<std::uint8_t>& mask) {
    std::vector<std::int64_t> runs;
    std::uint8_t current = 0;
    std::int64_t len = 0;
    for (std::uint8_t b : mask) {
        std::uint8_t bit = b ? 1 : 0;
        if (bit == current) {
            ++len;
        } else {
            runs.push_back(len);
            current = bit;
            len = 1;
        }
    }
    runs.push_back(len);
    return runs;
}

inline std::vector<std::uint8_t> rle_decode(const std::vector<std::int64_t>& runs) {
    std::vector<std::uint8_t> mask;
    std::uint8_t current = 0;
    for (std::int64_t len : runs) {
        if (len < 0) throw std::invalid_argument("rle_decode: negative run length");
        mask.insert(mask.end(), static_cast<std::size_t>(len), current);
        current = current ? 0 : 1;
    }
    return mask;
}

/// Writes latent.ppm, view_<v>.ppm and a viewset.json sidecar into `dir`.
inline std::filesystem::path save_viewset(const ViewSet& vs, const std::filesystem::path& dir) {
    vs.validate();
    std::filesystem::create_directories(dir);
    write_ppm(vs.latent, dir / "latent.ppm");
    nlohmann::json views = nlohmann::json::array();
    nlohmann::json masks = nlohmann::json::array();
    for (std::size_t v = 0; v < vs.views.size(); ++v) {
        std::string name = "view_" + std::to_string(v) + ".ppm";
        write_ppm(vs.views[v], dir / name);
        views.push_back(name);
        masks.push_back(rle_encode(vs.oracle_masks[v]));
    }
    nlohmann::json j = {{"latent", "latent.ppm"},
                        {"views", std::move(views)},
                        {"oracle_masks", std::move(masks)},
                        {"width", vs.latent.width},
                        {"height", vs.latent.height}};
    std::filesystem::path sidecar = dir / "viewset.json";
    std::ofstream out(sidecar);
    if (!out) throw std::runtime_error("save_viewset: cannot open " + sidecar.string());
    out << j.dump(2) << "\n";
    return sidecar;
}

inline ViewSet load_viewset(const std::filesystem::path& sidecar) {
    std::ifstream in(sidecar);
    if (!in) throw std::runtime_error("load_viewset: cannot open " + sidecar.string());
    nlohmann::json j;
    in >> j;
    std::filesystem::path dir = sidecar.parent_path();
    ViewSet vs;
    vs.latent = read_ppm(dir / j.at("latent").get<std::string>());
    for (const auto& name : j.at("views")) vs.views.push_back(read_ppm(dir / name.get<std::string>()));
    for (const auto& runs : j.at("oracle_masks")) {
        auto mask = rle_decode(runs.get<std::vector<std::int64_t>>());
        if (mask.size() != vs.latent.pixel_count())
            throw std::runtime_error("load_viewset: decoded mask size mismatch");
        vs.oracle_masks.push_back(std::move(mask));
    }
    vs.validate();
    return vs;
}

}  // namespace noisylearn
