#include "aead/models.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/core.h>

#include "aead/error.hpp"
#include "aead/rng.hpp"

namespace aead {

namespace {

// Computes the loss of one record and its derivatives from a completed forward pass.
CombinedLoss loss_and_gradients(const Network& net, const ForwardCache& cache,
                                const std::optional<SupervisedLabel>& label,
                                const LossConfig& config, LossGradients& grads) {
    const auto& x = cache.input;
    const auto& x_hat = cache.post.back();
    if (label) {
        const auto& latent = cache.post[net.latent_index];
        grads = combined_loss_gradients(latent, *label, x, x_hat, config);
        return combined_loss(latent, *label, x, x_hat, config);
    }
    grads = reconstruction_loss_gradients(net.latent_dim(), x, x_hat);
    const double rec = mse(x, x_hat);
    return {rec, 0.0, rec};
}

}  // namespace

std::string_view to_string(ArchitectureKind kind) {
    switch (kind) {
        case ArchitectureKind::SimpleAE:
            return "simple";
        case ArchitectureKind::DeepAE:
            return "deep";
        case ArchitectureKind::SDAE:
            return "sdae";
    }
    return "deep";
}

ArchitectureKind parse_architecture(std::string_view name) {
    if (name == "simple") return ArchitectureKind::SimpleAE;
    if (name == "deep") return ArchitectureKind::DeepAE;
    if (name == "sdae") return ArchitectureKind::SDAE;
    throw ConfigError(fmt::format("unknown architecture '{}' (expected simple, deep or sdae)", name));
}

void ArchitectureSpec::validate() const {
    if (latent_dim < 1 || input_dim <= latent_dim) {
        throw ConfigError(fmt::format("need input_dim > latent_dim >= 1, got input {} latent {}",
                                      input_dim, latent_dim));
    }
    if (kind == ArchitectureKind::SimpleAE && !(input_dim > hidden_dim && hidden_dim > latent_dim)) {
        throw ConfigError(fmt::format(
            "simple autoencoder needs input_dim > hidden_dim > latent_dim, got {} > {} > {}",
            input_dim, hidden_dim, latent_dim));
    }
    if (kind == ArchitectureKind::SDAE && latent_dim != 2) {
        throw ConfigError(fmt::format("supervised autoencoder needs a 2-wide latent, got {}",
                                      latent_dim));
    }
}

std::vector<std::size_t> layer_widths(const ArchitectureSpec& spec) {
    spec.validate();
    if (spec.kind == ArchitectureKind::SimpleAE) {
        return {spec.input_dim, spec.hidden_dim, spec.latent_dim, spec.hidden_dim, spec.input_dim};
    }
    std::vector<std::size_t> widths;
    for (std::size_t w = spec.input_dim; w > spec.latent_dim; --w) widths.push_back(w);
    widths.push_back(spec.latent_dim);
    for (std::size_t w = spec.latent_dim + 1; w <= spec.input_dim; ++w) widths.push_back(w);
    return widths;
}

std::vector<Activation> layer_activations(std::span<const std::size_t> widths) {
    if (widths.size() < 2) {
        throw ConfigError("need at least two widths");
    }
    const auto latent_layer = static_cast<std::size_t>(
        std::min_element(widths.begin() + 1, widths.end()) - (widths.begin() + 1));
    std::vector<Activation> acts(widths.size() - 1, Activation::Tanh);
    acts[latent_layer] = Activation::Linear;
    acts.back() = Activation::Sigmoid;
    return acts;
}

Network build_model(const ArchitectureSpec& spec, std::uint64_t seed) {
    const auto widths = layer_widths(spec);
    const auto acts = layer_activations(widths);
    return init_network(widths, acts, seed);
}

void TrainConfig::validate() const {
    if (epochs < 1) throw ConfigError("epochs must be >= 1");
    if (batch_size < 1) throw ConfigError("batch size must be >= 1");
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
        throw ConfigError(fmt::format("learning rate must be finite and >= 0, got {}", learning_rate));
    }
    if (!(validation_fraction >= 0.0 && validation_fraction < 1.0)) {
        throw ConfigError(fmt::format("validation fraction must lie in [0, 1), got {}",
                                      validation_fraction));
    }
    loss.validate();
}

CombinedLoss record_loss(const Network& net, std::span<const double> features,
                         const std::optional<SupervisedLabel>& label, const LossConfig& config) {
    const auto fwd = network_forward(net, features);
    if (label) {
        return combined_loss(fwd.latent, *label, features, fwd.output, config);
    }
    const double rec = mse(features, fwd.output);
    return {rec, 0.0, rec};
}

GradientSet record_gradient(const Network& net, std::span<const double> features,
                            const std::optional<SupervisedLabel>& label, const LossConfig& config) {
    ForwardCache cache;
    network_forward(net, features, cache);
    LossGradients g;
    loss_and_gradients(net, cache, label, config, g);
    return network_backward(net, cache, g.output, g.latent);
}

TrainResult train(Network net, const Dataset& data, const TrainConfig& config, bool supervised,
                  const EpochCallback& on_epoch) {
    config.validate();
    net.validate();
    if (data.empty()) {
        throw TrainingError("cannot train on an empty dataset");
    }
    data.validate();
    if (data.feature_dim() != net.input_dim()) {
        throw ShapeError(fmt::format("network expects {} features, dataset has {}", net.input_dim(),
                                     data.feature_dim()));
    }
    if (supervised && !data.labeled()) {
        throw TrainingError("supervised training needs every record labeled");
    }
    if (supervised && net.latent_dim() != 2) {
        throw ShapeError("supervised training needs a 2-wide latent layer");
    }
    for (const auto& r : data.records) {
        if (!std::all_of(r.features.begin(), r.features.end(), [](double v) { return std::isfinite(v); })) {
            throw TrainingError("training records must be finite (normalize and impute first)");
        }
    }

    std::vector<std::size_t> train_idx(data.size());
    std::iota(train_idx.begin(), train_idx.end(), std::size_t{0});
    std::vector<std::size_t> val_idx;
    if (config.validation_fraction > 0.0) {
        Rng split_rng(config.seed, streams::kValidationSplit);
        split_rng.shuffle(std::span<std::size_t>(train_idx));
        const auto n_val = static_cast<std::size_t>(
            std::floor(config.validation_fraction * static_cast<double>(data.size())));
        if (n_val >= data.size()) {
            throw ConfigError("validation fraction leaves no training records");
        }
        val_idx.assign(train_idx.end() - static_cast<std::ptrdiff_t>(n_val), train_idx.end());
        train_idx.resize(train_idx.size() - n_val);
        std::sort(train_idx.begin(), train_idx.end());
        std::sort(val_idx.begin(), val_idx.end());
    }

    std::vector<std::optional<SupervisedLabel>> labels(data.size());
    if (supervised) {
        for (std::size_t i = 0; i < data.size(); ++i) {
            labels[i] = SupervisedLabel::from_flag(*data.records[i].label == 1);
        }
    }

    Rng shuffle_rng(config.seed, streams::kShuffle);
    TrainResult result;
    auto& history = result.history;
    auto grads = GradientSet::zeros_like(net);
    ForwardCache cache;
    LossGradients loss_grads;
    std::vector<std::size_t> order(train_idx.size());

    for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
        order = train_idx;
        shuffle_rng.shuffle(std::span<std::size_t>(order));

        double sum_total = 0.0, sum_sup = 0.0, sum_rec = 0.0;
        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            const std::size_t end = std::min(order.size(), start + config.batch_size);
            grads.scale(0.0);
            double batch_total = 0.0;
            for (std::size_t b = start; b < end; ++b) {
                const auto i = order[b];
                network_forward(net, data.records[i].features, cache);
                const auto loss = loss_and_gradients(net, cache, labels[i], config.loss, loss_grads);
                accumulate_backward(net, cache, loss_grads.output, loss_grads.latent, grads);
                batch_total += loss.total;
                sum_total += loss.total;
                sum_sup += loss.supervised;
                sum_rec += loss.reconstruction;
            }
            if (!std::isfinite(batch_total) || !grads.all_finite()) {
                throw TrainingError(fmt::format("training diverged in epoch {}", epoch));
            }
            grads.scale(1.0 / static_cast<double>(end - start));
            apply_sgd(net, grads, config.learning_rate);
            ++result.steps;
        }

        const auto n = static_cast<double>(order.size());
        history.total.push_back(sum_total / n);
        history.supervised.push_back(sum_sup / n);
        history.reconstruction.push_back(sum_rec / n);

        if (!val_idx.empty()) {
            double val = 0.0;
            for (const auto i : val_idx) {
                val += record_loss(net, data.records[i].features, labels[i], config.loss).total;
            }
            history.validation.push_back(val / static_cast<double>(val_idx.size()));
        }
        if (on_epoch) on_epoch(epoch, history);
    }
    result.net = std::move(net);
    return result;
}

std::vector<double> encode(const Network& net, std::span<const double> features) {
    return network_forward(net, features).latent;
}

std::vector<double> reconstruct(const Network& net, std::span<const double> features) {
    return network_forward(net, features).output;
}

}  // namespace aead
