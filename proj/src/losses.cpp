#include "aead/losses.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/core.h>

#include "aead/error.hpp"

namespace aead {

namespace {

void require_same_length(std::span<const double> x, std::span<const double> x_hat) {
    if (x.size() != x_hat.size()) {
        throw ShapeError(fmt::format("length mismatch: {} vs {}", x.size(), x_hat.size()));
    }
}

void require_latent_pair(std::span<const double> latent) {
    if (latent.size() != 2) {
        throw ShapeError(fmt::format("supervised loss needs a 2-wide latent, got {}",
                                     latent.size()));
    }
}

double squared_distance(std::span<const double> x, std::span<const double> x_hat) {
    double sum = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) {
        const double d = x[j] - x_hat[j];
        sum += d * d;
    }
    return sum;
}

}  // namespace

void LossConfig::validate() const {
    if (!(w_s >= 0.0) || !std::isfinite(w_s)) {
        throw ConfigError(fmt::format("w_s must be finite and >= 0, got {}", w_s));
    }
    if (!(w_ae >= 0.0) || !std::isfinite(w_ae)) {
        throw ConfigError(fmt::format("w_ae must be finite and >= 0, got {}", w_ae));
    }
    if (!(clamp_eps > 0.0 && clamp_eps < 0.5)) {
        throw ConfigError(fmt::format("clamp_eps must lie in (0, 0.5), got {}", clamp_eps));
    }
}

SupervisedLabel::SupervisedLabel(std::array<double, 2> tuple) : tuple_(tuple) {
    const bool ok = (tuple[0] == 1.0 && tuple[1] == 0.0) || (tuple[0] == 0.0 && tuple[1] == 1.0);
    if (!ok) {
        throw ValidationError(
            fmt::format("supervised label must be (1,0) or (0,1), got ({},{})", tuple[0], tuple[1]));
    }
}

double mse(std::span<const double> x, std::span<const double> x_hat) {
    require_same_length(x, x_hat);
    if (x.empty()) {
        throw ShapeError("mse of empty vectors");
    }
    return squared_distance(x, x_hat) / static_cast<double>(x.size());
}

double bce(const SupervisedLabel& label, std::array<double, 2> p, double clamp_eps) {
    double sum = 0.0;
    for (std::size_t k = 0; k < 2; ++k) {
        const double q = std::clamp(p[k], clamp_eps, 1.0 - clamp_eps);
        const double y = label[k];
        sum += -(y * std::log(q) + (1.0 - y) * std::log(1.0 - q));
    }
    return sum / 2.0;
}

double anomaly_score(std::span<const double> x, std::span<const double> x_hat) {
    require_same_length(x, x_hat);
    return std::sqrt(squared_distance(x, x_hat));
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

CombinedLoss combined_loss(std::span<const double> latent, const SupervisedLabel& label,
                           std::span<const double> x, std::span<const double> x_hat,
                           const LossConfig& config) {
    require_latent_pair(latent);
    CombinedLoss loss;
    loss.supervised = bce(label, {sigmoid(latent[0]), sigmoid(latent[1])}, config.clamp_eps);
    loss.reconstruction = mse(x, x_hat);
    loss.total = config.w_s * loss.supervised + config.w_ae * loss.reconstruction;
    return loss;
}

std::vector<double> mse_gradient(std::span<const double> x, std::span<const double> x_hat) {
    require_same_length(x, x_hat);
    if (x.empty()) {
        throw ShapeError("mse of empty vectors");
    }
    const double scale = 2.0 / static_cast<double>(x.size());
    std::vector<double> g(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) g[j] = scale * (x_hat[j] - x[j]);
    return g;
}

std::vector<double> supervised_latent_gradient(std::span<const double> latent,
                                               const SupervisedLabel& label, double w_s) {
    require_latent_pair(latent);
    return {w_s * (sigmoid(latent[0]) - label[0]) / 2.0,
            w_s * (sigmoid(latent[1]) - label[1]) / 2.0};
}

LossGradients combined_loss_gradients(std::span<const double> latent,
                                      const SupervisedLabel& label, std::span<const double> x,
                                      std::span<const double> x_hat, const LossConfig& config) {
    LossGradients g;
    g.latent = supervised_latent_gradient(latent, label, config.w_s);
    g.output = mse_gradient(x, x_hat);
    for (auto& v : g.output) v *= config.w_ae;
    return g;
}

LossGradients reconstruction_loss_gradients(std::size_t latent_dim, std::span<const double> x,
                                            std::span<const double> x_hat) {
    return {mse_gradient(x, x_hat), std::vector<double>(latent_dim, 0.0)};
}

}  // namespace aead
