// Minimal fully-connected network with a linear output layer and exact
// backpropagation. Heads (softmax for classification, sigmoid for color
// regression) live with their users so their jacobians can be checked in
// isolation.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "rng.hpp"

namespace noisylearn {

enum class Activation { relu, tanh };

inline Activation activation_from_string(const std::string& s) {
    if (s == "relu") return Activation::relu;
    if (s == "tanh") return Activation::tanh;
    throw std::invalid_argument("unknown activation: " + s);
}

inline std::string to_string(Activation a) {
    return a == Activation::relu ? "relu" : "tanh";
}

/**
 * Feed-forward network: affine layers with the chosen hidden activation and
 * a linear final layer. Weights are stored row-major (output x input).
 */
class Mlp {
public:
    struct Grads {
        std::vector<std::vector<double>> weights;  // same shapes as the model
        std::vector<std::vector<double>> biases;

        void zero() {
            for (auto& w : weights) std::fill(w.begin(), w.end(), 0.0);
            for (auto& b : biases) std::fill(b.begin(), b.end(), 0.0);
        }
    };

    /// Per-sample activations kept for the backward pass.
    struct Trace {
        std::vector<std::vector<double>> pre;   // affine outputs per layer
        std::vector<std::vector<double>> post;  // activated outputs (last layer: = pre)
    };

    Mlp(std::vector<int> layer_sizes, Activation activation, Rng& rng)
        : sizes_(std::move(layer_sizes)), activation_(activation) {
        if (sizes_.size() < 2) throw std::invalid_argument("Mlp: need at least input and output sizes");
        for (int s : sizes_)
            if (s < 1) throw std::invalid_argument("Mlp: layer sizes must be positive");
        const std::size_t layers = sizes_.size() - 1;
        weights_.resize(layers);
        biases_.resize(layers);
        for (std::size_t l = 0; l < layers; ++l) {
            int fan_in = sizes_[l];
            int fan_out = sizes_[l + 1];
            // He-uniform for relu, Glorot-uniform for tanh.
            double bound = activation_ == Activation::relu
                               ? std::sqrt(6.0 / fan_in)
                               : std::sqrt(6.0 / (fan_in + fan_out));
            weights_[l].resize(static_cast<std::size_t>(fan_in) * fan_out);
            for (auto& w : weights_[l]) w = rng.uniform(-bound, bound);
            biases_[l].assign(static_cast<std::size_t>(fan_out), 0.0);
        }
    }

    int input_dim() const { return sizes_.front(); }
    int output_dim() const { return sizes_.back(); }
    const std::vector<int>& layer_sizes() const { return sizes_; }
    std::size_t num_layers() const { return weights_.size(); }
    Activation activation() const { return activation_; }

    std::vector<std::vector<double>>& weights() { return weights_; }
    std::vector<std::vector<double>>& biases() { return biases_; }
    const std::vector<std::vector<double>>& weights() const { return weights_; }
    const std::vector<std::vector<double>>& biases() const { return biases_; }

    Grads make_grads() const {
        Grads g;
        g.weights.resize(weights_.size());
        g.biases.resize(biases_.size());
        for (std::size_t l = 0; l < weights_.size(); ++l) {
            g.weights[l].assign(weights_[l].size(), 0.0);
            g.biases[l].assign(biases_[l].size(), 0.0);
        }
        return g;
    }

    void forward(std::span<const double> input, Trace& trace) const {
        if (static_cast<int>(input.size()) != input_dim())
            throw std::invalid_argument("Mlp::forward: input dimension mismatch");
        const std::size_t layers = weights_.size();
        trace.pre.resize(layers);
        trace.post.resize(layers);
        std::span<const double> x = input;
        for (std::size_t l = 0; l < layers; ++l) {
            const int out_n = sizes_[l + 1];
            const int in_n = sizes_[l];
            auto& pre = trace.pre[l];
            pre.assign(static_cast<std::size_t>(out_n), 0.0);
            const double* w = weights_[l].data();
            for (int o = 0; o < out_n; ++o) {
                double acc = biases_[l][o];
                const double* row = w + static_cast<std::size_t>(o) * in_n;
                for (int i = 0; i < in_n; ++i) acc += row[i] * x[i];
                pre[o] = acc;
            }
            auto& post = trace.post[l];
            if (l + 1 == layers) {
                post = pre;  // linear output
            } else {
                post.resize(pre.size());
                if (activation_ == Activation::relu)
                    for (std::size_t i = 0; i < pre.size(); ++i) post[i] = pre[i] > 0.0 ? pre[i] : 0.0;
                else
                    for (std::size_t i = 0; i < pre.size(); ++i) post[i] = std::tanh(pre[i]);
            }
            x = post;
        }
    }

    std::vector<double> forward(std::span<const double> input) const {
        Trace t;
        forward(input, t);
        return t.post.back();
    }

    /**
     * Accumulates d(loss)/d(parameters) into `grads` given the gradient with
     * respect to the (linear) network output. `input` and `trace` must come
     * from the matching forward call.
     */
    void backward(std::span<const double> input, const Trace& trace,
                  std::span<const double> grad_output, Grads& grads) const {
        const std::size_t layers = weights_.size();
        if (grad_output.size() != static_cast<std::size_t>(output_dim()))
            throw std::invalid_argument("Mlp::backward: grad_output dimension mismatch");

        std::vector<double> delta(grad_output.begin(), grad_output.end());
        for (std::size_t l = layers; l-- > 0;) {
            const int out_n = sizes_[l + 1];
            const int in_n = sizes_[l];
            std::span<const double> layer_in =
                (l == 0) ? input : std::span<const double>(trace.post[l - 1]);
            double* gw = grads.weights[l].data();
            for (int o = 0; o < out_n; ++o) {
                grads.biases[l][o] += delta[o];
                double* row = gw + static_cast<std::size_t>(o) * in_n;
                for (int i = 0; i < in_n; ++i) row[i] += delta[o] * layer_in[i];
            }
            if (l == 0) break;
            std::vector<double> prev(static_cast<std::size_t>(in_n), 0.0);
            const double* w = weights_[l].data();
            for (int o = 0; o < out_n; ++o) {
                const double* row = w + static_cast<std::size_t>(o) * in_n;
                for (int i = 0; i < in_n; ++i) prev[i] += row[i] * delta[o];
            }
            // Through the hidden activation of layer l-1.
            if (activation_ == Activation::relu) {
                for (int i = 0; i < in_n; ++i)
                    if (trace.pre[l - 1][i] <= 0.0) prev[i] = 0.0;
            } else {
                for (int i = 0; i < in_n; ++i) {
                    double th = trace.post[l - 1][i];
                    prev[i] *= 1.0 - th * th;
                }
            }
            delta = std::move(prev);
        }
    }

    /// Plain SGD update: theta -= scale * grad.
    void apply_gradients(const Grads& grads, double scale) {
        for (std::size_t l = 0; l < weights_.size(); ++l) {
            for (std::size_t i = 0; i < weights_[l].size(); ++i) weights_[l][i] -= scale * grads.weights[l][i];
            for (std::size_t i = 0; i < biases_[l].size(); ++i) biases_[l][i] -= scale * grads.biases[l][i];
        }
    }

private:
    std::vector<int> sizes_;
    Activation activation_;
    std::vector<std::vector<double>> weights_;
    std::vector<std::vector<double>> biases_;
};

/// Numerically stable softmax (max subtraction).
inline std::vector<double> softmax(std::span<const double> logits) {
    double m = *std::max_element(logits.begin(), logits.end());
    std::vector<double> p(logits.size());
    double z = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        p[i] = std::exp(logits[i] - m);
        z += p[i];
    }
    for (auto& v : p) v /= z;
    return p;
}

/// Pulls d(loss)/dp back through softmax: dz_j = p_j (g_j - sum_k g_k p_k).
inline std::vector<double> softmax_backward(std::span<const double> p,
                                            std::span<const double> grad_p) {
    double dot = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) dot += grad_p[k] * p[k];
    std::vector<double> dz(p.size());
    for (std::size_t j = 0; j < p.size(); ++j) dz[j] = p[j] * (grad_p[j] - dot);
    return dz;
}

}  // namespace noisylearn
