#include "aead/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "aead/error.hpp"
#include "aead/models.hpp"

namespace aead {

namespace {

using Wide = long double;

// Parameters of one layer widened to extended precision.
struct WideLayer {
    std::size_t in = 0;
    std::size_t out = 0;
    std::vector<Wide> weights;  // row-major out x in
    std::vector<Wide> biases;
    Activation activation;
};

Wide activate(Activation kind, Wide v) {
    switch (kind) {
        case Activation::ReLU:
            return v > 0 ? v : Wide{0};
        case Activation::Sigmoid:
            return 1 / (1 + std::exp(-v));
        case Activation::Linear:
            return v;
        case Activation::Tanh:
            return std::tanh(v);
    }
    return v;
}

// Training loss of one record, evaluated independently of the double-precision
// forward pass so that finite differences are not limited by double rounding.
Wide wide_loss(const std::vector<WideLayer>& layers, std::size_t latent_index,
               std::span<const double> features, const std::optional<SupervisedLabel>& label,
               const LossConfig& config) {
    std::vector<Wide> current(features.begin(), features.end());
    std::vector<Wide> next;
    std::vector<Wide> latent;
    for (std::size_t k = 0; k < layers.size(); ++k) {
        const auto& layer = layers[k];
        next.assign(layer.out, 0);
        for (std::size_t r = 0; r < layer.out; ++r) {
            Wide acc = layer.biases[r];
            for (std::size_t c = 0; c < layer.in; ++c) acc += layer.weights[r * layer.in + c] * current[c];
            next[r] = activate(layer.activation, acc);
        }
        current.swap(next);
        if (k == latent_index) latent = current;
    }

    Wide sq = 0;
    for (std::size_t j = 0; j < features.size(); ++j) {
        const Wide d = static_cast<Wide>(features[j]) - current[j];
        sq += d * d;
    }
    const Wide reconstruction = sq / static_cast<Wide>(features.size());
    if (!label) return reconstruction;

    Wide supervised = 0;
    const Wide lo = config.clamp_eps;
    const Wide hi = 1 - static_cast<Wide>(config.clamp_eps);
    for (std::size_t k = 0; k < 2; ++k) {
        const Wide p = std::clamp(1 / (1 + std::exp(-latent[k])), lo, hi);
        const Wide y = (*label)[k];
        supervised += -(y * std::log(p) + (1 - y) * std::log(1 - p));
    }
    supervised /= 2;
    return static_cast<Wide>(config.w_s) * supervised + static_cast<Wide>(config.w_ae) * reconstruction;
}

}  // namespace

double gradient_check(const Network& net, const Record& sample, const LossConfig& loss_config,
                      double eps, bool supervised) {
    if (!(eps > 0.0) || !std::isfinite(eps)) {
        throw PreconditionError("gradient check step must be positive");
    }
    net.validate();
    std::optional<SupervisedLabel> label;
    if (supervised) {
        if (!sample.label) {
            throw PreconditionError("supervised gradient check needs a labeled record");
        }
        label = SupervisedLabel::from_flag(*sample.label == 1);
    }

    const auto analytic = record_gradient(net, sample.features, label, loss_config);

    std::vector<WideLayer> wide;
    for (const auto& layer : net.layers) {
        const auto w = layer.weights.values();
        wide.push_back({layer.in_dim(), layer.out_dim(), std::vector<Wide>(w.begin(), w.end()),
                        std::vector<Wide>(layer.biases.begin(), layer.biases.end()), layer.activation});
    }
    const auto loss_at = [&] {
        const Wide v = wide_loss(wide, net.latent_index, sample.features, label, loss_config);
        if (!std::isfinite(v)) {
            throw NumericError("loss is not finite during gradient check");
        }
        return v;
    };

    double worst = 0.0;
    const auto compare = [&](Wide& param, double grad) {
        const Wide saved = param;
        param = saved + eps;
        const Wide plus = loss_at();
        param = saved - eps;
        const Wide minus = loss_at();
        param = saved;
        const auto numeric = static_cast<double>((plus - minus) / (2 * static_cast<Wide>(eps)));
        const double denom = std::max({std::abs(grad), std::abs(numeric), 1e-12});
        worst = std::max(worst, std::abs(grad - numeric) / denom);
    };

    for (std::size_t k = 0; k < wide.size(); ++k) {
        const auto gw = analytic.layers[k].weights.values();
        for (std::size_t i = 0; i < wide[k].weights.size(); ++i) compare(wide[k].weights[i], gw[i]);
        for (std::size_t i = 0; i < wide[k].biases.size(); ++i) {
            compare(wide[k].biases[i], analytic.layers[k].biases[i]);
        }
    }
    return worst;
}

}  // namespace aead
