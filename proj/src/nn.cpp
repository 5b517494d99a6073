#include "aead/nn.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/core.h>

#include "aead/error.hpp"
#include "aead/rng.hpp"

namespace aead {

namespace {

double activate(Activation kind, double v) {
    switch (kind) {
        case Activation::ReLU:
            return v > 0.0 ? v : 0.0;
        case Activation::Sigmoid:
            return 1.0 / (1.0 + std::exp(-v));
        case Activation::Linear:
            return v;
        case Activation::Tanh:
            return std::tanh(v);
    }
    return v;
}

// Derivative expressed through the pre-activation and the activation value.
double activation_slope(Activation kind, double pre, double post) {
    switch (kind) {
        case Activation::ReLU:
            return pre > 0.0 ? 1.0 : 0.0;
        case Activation::Sigmoid:
            return post * (1.0 - post);
        case Activation::Linear:
            return 1.0;
        case Activation::Tanh:
            return 1.0 - post * post;
    }
    return 1.0;
}

void affine(const DenseLayer& layer, std::span<const double> input, std::vector<double>& pre) {
    pre.resize(layer.out_dim());
    for (std::size_t r = 0; r < layer.out_dim(); ++r) {
        const auto w = layer.weights.row(r);
        double acc = layer.biases[r];
        for (std::size_t c = 0; c < w.size(); ++c) {
            acc += w[c] * input[c];
        }
        pre[r] = acc;
    }
}

void check_congruent(const Network& net, const GradientSet& grads) {
    if (!grads.congruent_with(net)) {
        throw ShapeError("gradient set shape does not match network");
    }
}

}  // namespace

std::string_view to_string(Activation activation) {
    switch (activation) {
        case Activation::ReLU:
            return "relu";
        case Activation::Sigmoid:
            return "sigmoid";
        case Activation::Linear:
            return "linear";
        case Activation::Tanh:
            return "tanh";
    }
    return "linear";
}

Activation parse_activation(std::string_view name) {
    if (name == "relu") return Activation::ReLU;
    if (name == "sigmoid") return Activation::Sigmoid;
    if (name == "linear") return Activation::Linear;
    if (name == "tanh") return Activation::Tanh;
    throw FormatError(fmt::format("unknown activation '{}'", name));
}

void DenseLayer::validate() const {
    if (weights.rows() != biases.size()) {
        throw ShapeError(fmt::format("layer has {} weight rows but {} biases", weights.rows(),
                                     biases.size()));
    }
    if (weights.rows() == 0 || weights.cols() == 0) {
        throw ShapeError("layer has an empty weight matrix");
    }
    const auto finite = [](double v) { return std::isfinite(v); };
    if (!std::all_of(weights.values().begin(), weights.values().end(), finite) ||
        !std::all_of(biases.begin(), biases.end(), finite)) {
        throw NumericError("layer contains non-finite parameters");
    }
}

std::size_t Network::input_dim() const { return layers.empty() ? 0 : layers.front().in_dim(); }
std::size_t Network::output_dim() const { return layers.empty() ? 0 : layers.back().out_dim(); }
std::size_t Network::latent_dim() const {
    return latent_index < layers.size() ? layers[latent_index].out_dim() : 0;
}

std::size_t Network::parameter_count() const {
    std::size_t n = 0;
    for (const auto& layer : layers) {
        n += layer.weights.values().size() + layer.biases.size();
    }
    return n;
}

void Network::validate() const {
    if (layers.empty()) {
        throw ShapeError("network has no layers");
    }
    for (std::size_t k = 0; k < layers.size(); ++k) {
        layers[k].validate();
        if (k + 1 < layers.size() && layers[k].out_dim() != layers[k + 1].in_dim()) {
            throw ShapeError(fmt::format("layer {} outputs {} values but layer {} expects {}", k,
                                         layers[k].out_dim(), k + 1, layers[k + 1].in_dim()));
        }
    }
    if (latent_index >= layers.size()) {
        throw ShapeError(fmt::format("latent index {} out of range for {} layers", latent_index,
                                     layers.size()));
    }
}

GradientSet GradientSet::zeros_like(const Network& net) {
    GradientSet g;
    g.layers.reserve(net.layers.size());
    for (const auto& layer : net.layers) {
        g.layers.push_back({Matrix(layer.out_dim(), layer.in_dim()),
                            std::vector<double>(layer.out_dim(), 0.0)});
    }
    return g;
}

void GradientSet::add_scaled(const GradientSet& other, double scale) {
    if (other.layers.size() != layers.size()) {
        throw ShapeError("gradient sets have different layer counts");
    }
    for (std::size_t k = 0; k < layers.size(); ++k) {
        auto dst = layers[k].weights.values();
        const auto src = other.layers[k].weights.values();
        if (dst.size() != src.size() || layers[k].biases.size() != other.layers[k].biases.size()) {
            throw ShapeError(fmt::format("gradient layer {} shapes differ", k));
        }
        for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += scale * src[i];
        for (std::size_t i = 0; i < layers[k].biases.size(); ++i) {
            layers[k].biases[i] += scale * other.layers[k].biases[i];
        }
    }
}

void GradientSet::scale(double factor) {
    for (auto& layer : layers) {
        for (auto& v : layer.weights.values()) v *= factor;
        for (auto& v : layer.biases) v *= factor;
    }
}

bool GradientSet::congruent_with(const Network& net) const {
    if (layers.size() != net.layers.size()) return false;
    for (std::size_t k = 0; k < layers.size(); ++k) {
        const auto& g = layers[k];
        const auto& l = net.layers[k];
        if (g.weights.rows() != l.weights.rows() || g.weights.cols() != l.weights.cols() ||
            g.biases.size() != l.biases.size()) {
            return false;
        }
    }
    return true;
}

bool GradientSet::all_finite() const {
    const auto finite = [](double v) { return std::isfinite(v); };
    return std::all_of(layers.begin(), layers.end(), [&](const LayerGradient& g) {
        return std::all_of(g.weights.values().begin(), g.weights.values().end(), finite) &&
               std::all_of(g.biases.begin(), g.biases.end(), finite);
    });
}

std::vector<double> apply_activation(Activation kind, std::span<const double> pre_activation) {
    std::vector<double> out(pre_activation.size());
    std::transform(pre_activation.begin(), pre_activation.end(), out.begin(),
                   [kind](double v) { return activate(kind, v); });
    return out;
}

std::vector<double> dense_forward(const DenseLayer& layer, std::span<const double> input) {
    if (input.size() != layer.in_dim()) {
        throw ShapeError(fmt::format("dense layer expects {} inputs, got {}", layer.in_dim(),
                                     input.size()));
    }
    std::vector<double> pre;
    affine(layer, input, pre);
    return apply_activation(layer.activation, pre);
}

void network_forward(const Network& net, std::span<const double> input, ForwardCache& cache) {
    if (net.layers.empty()) {
        throw ShapeError("network has no layers");
    }
    if (input.size() != net.input_dim()) {
        throw ShapeError(fmt::format("network expects {} inputs, got {}", net.input_dim(),
                                     input.size()));
    }
    cache.input.assign(input.begin(), input.end());
    cache.pre.resize(net.layers.size());
    cache.post.resize(net.layers.size());
    std::span<const double> current = cache.input;
    for (std::size_t k = 0; k < net.layers.size(); ++k) {
        const auto& layer = net.layers[k];
        affine(layer, current, cache.pre[k]);
        auto& post = cache.post[k];
        post.resize(layer.out_dim());
        for (std::size_t r = 0; r < post.size(); ++r) {
            post[r] = activate(layer.activation, cache.pre[k][r]);
        }
        current = post;
    }
}

ForwardResult network_forward(const Network& net, std::span<const double> input) {
    ForwardResult result;
    network_forward(net, input, result.cache);
    result.latent = result.cache.post[net.latent_index];
    result.output = result.cache.post.back();
    return result;
}

void accumulate_backward(const Network& net, const ForwardCache& cache,
                         std::span<const double> output_grad,
                         std::span<const double> latent_grad, GradientSet& into) {
    if (output_grad.size() != net.output_dim()) {
        throw ShapeError(fmt::format("output gradient has {} entries, network outputs {}",
                                     output_grad.size(), net.output_dim()));
    }
    if (latent_grad.size() != net.latent_dim()) {
        throw ShapeError(fmt::format("latent gradient has {} entries, latent width is {}",
                                     latent_grad.size(), net.latent_dim()));
    }
    if (cache.post.size() != net.layers.size()) {
        throw ShapeError("forward cache does not belong to this network");
    }
    if (!into.congruent_with(net)) {
        throw ShapeError("gradient set shape does not match network");
    }

    // grad holds dL/d(post-activation of layer k) while walking backwards.
    std::vector<double> grad(output_grad.begin(), output_grad.end());
    std::vector<double> delta;
    for (std::size_t k = net.layers.size(); k-- > 0;) {
        const auto& layer = net.layers[k];
        if (k == net.latent_index) {
            for (std::size_t i = 0; i < grad.size(); ++i) grad[i] += latent_grad[i];
        }
        const auto& pre = cache.pre[k];
        const auto& post = cache.post[k];
        delta.resize(layer.out_dim());
        for (std::size_t r = 0; r < delta.size(); ++r) {
            delta[r] = grad[r] * activation_slope(layer.activation, pre[r], post[r]);
        }

        std::span<const double> input = k == 0 ? std::span<const double>(cache.input)
                                               : std::span<const double>(cache.post[k - 1]);
        auto& g = into.layers[k];
        for (std::size_t r = 0; r < delta.size(); ++r) {
            if (delta[r] == 0.0) continue;
            auto row = g.weights.row(r);
            for (std::size_t c = 0; c < row.size(); ++c) row[c] += delta[r] * input[c];
            g.biases[r] += delta[r];
        }

        if (k > 0) {
            grad.assign(layer.in_dim(), 0.0);
            for (std::size_t r = 0; r < delta.size(); ++r) {
                if (delta[r] == 0.0) continue;
                const auto w = layer.weights.row(r);
                for (std::size_t c = 0; c < w.size(); ++c) grad[c] += w[c] * delta[r];
            }
        }
    }
}

GradientSet network_backward(const Network& net, const ForwardCache& cache,
                             std::span<const double> output_grad,
                             std::span<const double> latent_grad) {
    auto grads = GradientSet::zeros_like(net);
    accumulate_backward(net, cache, output_grad, latent_grad, grads);
    return grads;
}

Network init_network(std::span<const std::size_t> dims,
                     std::span<const Activation> activations, std::uint64_t seed) {
    if (dims.size() < 2) {
        throw ConfigError("a network needs at least two layer widths");
    }
    if (std::any_of(dims.begin(), dims.end(), [](std::size_t d) { return d == 0; })) {
        throw ConfigError("layer widths must be at least 1");
    }
    if (activations.size() != dims.size() - 1) {
        throw ConfigError(fmt::format("{} widths need {} activations, got {}", dims.size(),
                                      dims.size() - 1, activations.size()));
    }

    Rng rng(seed, streams::kInit);
    Network net;
    net.layers.reserve(dims.size() - 1);
    for (std::size_t k = 0; k + 1 < dims.size(); ++k) {
        const std::size_t fan_in = dims[k];
        const std::size_t fan_out = dims[k + 1];
        const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
        DenseLayer layer{Matrix(fan_out, fan_in), std::vector<double>(fan_out, 0.0),
                         activations[k]};
        for (auto& w : layer.weights.values()) w = rng.uniform(-bound, bound);
        net.layers.push_back(std::move(layer));
    }
    const auto narrowest = std::min_element(dims.begin() + 1, dims.end());
    net.latent_index = static_cast<std::size_t>(narrowest - (dims.begin() + 1));
    return net;
}

void apply_sgd(Network& net, const GradientSet& grads, double learning_rate) {
    if (learning_rate < 0.0 || !std::isfinite(learning_rate)) {
        throw PreconditionError("learning rate must be finite and non-negative");
    }
    check_congruent(net, grads);
    for (std::size_t k = 0; k < net.layers.size(); ++k) {
        auto w = net.layers[k].weights.values();
        const auto gw = grads.layers[k].weights.values();
        for (std::size_t i = 0; i < w.size(); ++i) w[i] -= learning_rate * gw[i];
        auto& b = net.layers[k].biases;
        const auto& gb = grads.layers[k].biases;
        for (std::size_t i = 0; i < b.size(); ++i) b[i] -= learning_rate * gb[i];
    }
}

Network sgd_step(const Network& net, const GradientSet& grads, double learning_rate) {
    Network next = net;
    apply_sgd(next, grads, learning_rate);
    return next;
}

}  // namespace aead
