// Deterministic synthetic data generators: Gaussian blob and concentric ring
// classification sets, and procedural latent images for the multi-view field
// experiments. Generators are pure functions of (parameters, seed).
#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>

#include "dataset.hpp"
#include "image.hpp"
#include "rng.hpp"

namespace noisylearn {

/**
 * K isotropic Gaussian clusters with means on the unit circle at equal
 * angles. `spread` is the cluster standard deviation expressed as a fraction
 * of half the nearest-centroid gap, so the class overlap (and therefore the
 * accuracy of a centroid classifier) is the same for every K.
 */
inline ClassificationDataset make_blobs(int num_classes, int per_class, int feature_dim,
                                        double spread, std::uint64_t seed) {
    if (num_classes < 2) throw std::invalid_argument("make_blobs: num_classes must be >= 2");
    if (per_class < 1) throw std::invalid_argument("make_blobs: per_class must be >= 1");
    if (feature_dim < 2) throw std::invalid_argument("make_blobs: feature_dim must be >= 2");
    if (!(spread > 0.0)) throw std::invalid_argument("make_blobs: spread must be positive");

    const double sigma = spread * std::sin(std::numbers::pi / num_classes);
    Rng rng(seed);
    ClassificationDataset ds;
    ds.num_classes = num_classes;
    ds.feature_dim = feature_dim;
    ds.samples.reserve(static_cast<std::size_t>(num_classes) * per_class);
    for (int k = 0; k < num_classes; ++k) {
        const double angle = 2.0 * std::numbers::pi * k / num_classes;
        for (int i = 0; i < per_class; ++i) {
            LabeledSample s;
            s.features.resize(feature_dim);
            s.features[0] = std::cos(angle) + sigma * rng.normal();
            s.features[1] = std::sin(angle) + sigma * rng.normal();
            for (int d = 2; d < feature_dim; ++d) s.features[d] = sigma * rng.normal();
            s.clean_label = s.noisy_label = k;
            ds.samples.push_back(std::move(s));
        }
    }
    return ds;
}

/**
 * Two concentric rings (radius 1 and 2) with Gaussian radial jitter. Not
 * linearly separable, and the class centroids nearly coincide at the origin,
 * so a centroid classifier is close to chance while a small MLP is not.
 */
inline ClassificationDataset make_rings(int per_class, double noise_std, std::uint64_t seed) {
    if (per_class < 1) throw std::invalid_argument("make_rings: per_class must be >= 1");
    if (noise_std < 0.0) throw std::invalid_argument("make_rings: noise_std must be >= 0");

    Rng rng(seed);
    ClassificationDataset ds;
    ds.num_classes = 2;
    ds.feature_dim = 2;
    ds.samples.reserve(static_cast<std::size_t>(2) * per_class);
    for (int k = 0; k < 2; ++k) {
        const double base_radius = k + 1.0;
        for (int i = 0; i < per_class; ++i) {
            double theta = rng.uniform(0.0, 2.0 * std::numbers::pi);
            double r = base_radius + noise_std * rng.normal();
            LabeledSample s;
            s.features = {r * std::cos(theta), r * std::sin(theta)};
            s.clean_label = s.noisy_label = k;
            ds.samples.push_back(std::move(s));
        }
    }
    return ds;
}

enum class ImagePattern { checker, gradient, circles };

inline ImagePattern image_pattern_from_string(const std::string& name) {
    if (name == "checker") return ImagePattern::checker;
    if (name == "gradient") return ImagePattern::gradient;
    if (name == "circles") return ImagePattern::circles;
    throw std::invalid_argument("unknown image pattern: " + name);
}

inline std::string to_string(ImagePattern p) {
    switch (p) {
        case ImagePattern::checker: return "checker";
        case ImagePattern::gradient: return "gradient";
        case ImagePattern::circles: return "circles";
    }
    throw std::logic_error("unreachable");
}

namespace detail {
// Two seed-derived colors with a guaranteed per-channel gap, so adjacent
// cells always differ regardless of the draw.
inline std::pair<std::array<double, 3>, std::array<double, 3>> two_colors(Rng& rng) {
    std::array<double, 3> a, b;
    for (int c = 0; c < 3; ++c) a[c] = rng.uniform(0.0, 0.45);
    for (int c = 0; c < 3; ++c) b[c] = rng.uniform(0.55, 1.0);
    return {a, b};
}
}  // namespace detail

/**
 * Procedural latent image. Patterns:
 *  - checker: alternating cells of two seed-derived colors, cell size
 *    max(1, min(w,h)/8);
 *  - gradient: r ramps 0..1 left to right, g top to bottom, b = (r+g)/2
 *    (seed unused);
 *  - circles: concentric bands of two seed-derived colors around the center.
 */
inline Image make_latent_image(ImagePattern pattern, int width, int height, std::uint64_t seed) {
    if (width < 8 || height < 8)
        throw std::invalid_argument("make_latent_image: width and height must be >= 8");

    Rng rng(seed);
    Image img(width, height);
    switch (pattern) {
        case ImagePattern::checker: {
            const int cell = std::max(1, std::min(width, height) / 8);
            auto [c0, c1] = detail::two_colors(rng);
            for (int y = 0; y < height; ++y)
                for (int x = 0; x < width; ++x)
                    img.set_pixel(x, y, ((x / cell + y / cell) % 2 == 0) ? c0 : c1);
            break;
        }
        case ImagePattern::gradient: {
            for (int y = 0; y < height; ++y)
                for (int x = 0; x < width; ++x) {
                    double r = static_cast<double>(x) / (width - 1);
                    double g = static_cast<double>(y) / (height - 1);
                    img.set_pixel(x, y, {r, g, 0.5 * (r + g)});
                }
            break;
        }
        case ImagePattern::circles: {
            const double band = std::max(1.0, std::min(width, height) / 10.0);
            auto [c0, c1] = detail::two_colors(rng);
            const double cx = (width - 1) / 2.0;
            const double cy = (height - 1) / 2.0;
            for (int y = 0; y < height; ++y)
                for (int x = 0; x < width; ++x) {
                    int idx = static_cast<int>(std::hypot(x - cx, y - cy) / band);
                    img.set_pixel(x, y, (idx % 2 == 0) ? c0 : c1);
                }
            break;
        }
    }
    return img;
}

}  // namespace noisylearn
