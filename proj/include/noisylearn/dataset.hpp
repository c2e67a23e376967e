// Labeled classification data and its JSON serialization.
//
// Every sample carries two labels: the observable (possibly corrupted)
// noisy_label used for training, and the generating clean_label kept as an
// oracle for instrumentation only. Training regimes never read clean_label.
#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace noisylearn {

struct LabeledSample {
    std::vector<double> features;
    int noisy_label = 0;
    int clean_label = 0;
};

struct ClassificationDataset {
    int num_classes = 0;
    int feature_dim = 0;
    std::vector<LabeledSample> samples;

    std::size_t size() const { return samples.size(); }

    void validate() const {
        if (num_classes < 2) throw std::invalid_argument("dataset: num_classes must be >= 2");
        if (feature_dim < 1) throw std::invalid_argument("dataset: feature_dim must be >= 1");
        for (const auto& s : samples) {
            if (static_cast<int>(s.features.size()) != feature_dim)
                throw std::invalid_argument("dataset: sample feature length mismatch");
            if (s.noisy_label < 0 || s.noisy_label >= num_classes ||
                s.clean_label < 0 || s.clean_label >= num_classes)
                throw std::invalid_argument("dataset: label out of range");
            for (double v : s.features)
                if (!std::isfinite(v)) throw std::invalid_argument("dataset: non-finite feature");
        }
    }

    /// True while no corruption has been applied (generation-time state).
    bool is_clean() const {
        for (const auto& s : samples)
            if (s.noisy_label != s.clean_label) return false;
        return true;
    }
};

inline nlohmann::json dataset_to_json(const ClassificationDataset& ds) {
    nlohmann::json samples = nlohmann::json::array();
    for (const auto& s : ds.samples)
        samples.push_back({{"x", s.features}, {"y_noisy", s.noisy_label}, {"y_clean", s.clean_label}});
    return {{"num_classes", ds.num_classes}, {"feature_dim", ds.feature_dim}, {"samples", std::move(samples)}};
}

inline ClassificationDataset dataset_from_json(const nlohmann::json& j) {
    ClassificationDataset ds;
    ds.num_classes = j.at("num_classes").get<int>();
    ds.feature_dim = j.at("feature_dim").get<int>();
    for (const auto& js : j.at("samples")) {
        LabeledSample s;
        s.features = js.at("x").get<std::vector<double>>();
        s.noisy_label = js.at("y_noisy").get<int>();
        s.clean_label = js.at("y_clean").get<int>();
        ds.samples.push_back(std::move(s));
    }
    ds.validate();
    return ds;
}

inline void save_dataset(const ClassificationDataset& ds, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_dataset: cannot open " + path.string());
    out << dataset_to_json(ds).dump(2) << "\n";
}

inline ClassificationDataset load_dataset(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_dataset: cannot open " + path.string());
    nlohmann::json j;
    in >> j;
    return dataset_from_json(j);
}

}  // namespace noisylearn
