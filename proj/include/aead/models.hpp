#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "aead/data.hpp"
#include "aead/losses.hpp"
#include "aead/nn.hpp"

namespace aead {

enum class ArchitectureKind { SimpleAE, DeepAE, SDAE };

std::string_view to_string(ArchitectureKind kind);
/// Accepts "simple", "deep" or "sdae"; throws ConfigError otherwise.
ArchitectureKind parse_architecture(std::string_view name);

struct ArchitectureSpec {
    ArchitectureKind kind = ArchitectureKind::DeepAE;
    std::size_t input_dim = kFeatureCount;
    std::size_t hidden_dim = 6;  // SimpleAE only
    std::size_t latent_dim = 2;

    bool supervised() const { return kind == ArchitectureKind::SDAE; }
    void validate() const;

    bool operator==(const ArchitectureSpec&) const = default;
};

/// SimpleAE: [in, hidden, latent, hidden, in].
/// DeepAE / SDAE: in, in-1, ..., latent, ..., in-1, in.
std::vector<std::size_t> layer_widths(const ArchitectureSpec& spec);

/// Tanh on hidden layers, Linear on the latent layer, Sigmoid on the output.
std::vector<Activation> layer_activations(std::span<const std::size_t> widths);

Network build_model(const ArchitectureSpec& spec, std::uint64_t seed);

struct TrainConfig {
    std::size_t epochs = 1000;
    std::size_t batch_size = 32;
    double learning_rate = 1e-3;
    std::uint64_t seed = 1;
    LossConfig loss;
    double validation_fraction = 0.0;  // held out from training, in [0, 1)

    void validate() const;
};

/// Per-epoch record-weighted means. `supervised` and `reconstruction` are the
/// two components of the combined loss; for unsupervised training
/// `reconstruction` equals `total` and `supervised` is all zeros.
struct LossHistory {
    std::vector<double> total;
    std::vector<double> supervised;
    std::vector<double> reconstruction;
    std::vector<double> validation;  // empty unless a validation fraction is set

    std::size_t epochs() const { return total.size(); }
};

struct TrainResult {
    Network net;
    LossHistory history;
    std::size_t steps = 0;  // SGD updates applied
};

using EpochCallback = std::function<void(std::size_t epoch, const LossHistory& history)>;

/// Mini-batch SGD. Each epoch visits a fresh seeded permutation of the records;
/// the final short batch is kept. Per-record loss is MSE, or the combined
/// supervised loss when `supervised` is set (every record must be labeled).
TrainResult train(Network net, const Dataset& data, const TrainConfig& config, bool supervised,
                  const EpochCallback& on_epoch = {});

/// Loss of a single record; the supervised term is used only when `label` is given.
CombinedLoss record_loss(const Network& net, std::span<const double> features,
                         const std::optional<SupervisedLabel>& label, const LossConfig& config);

/// Analytic gradient of record_loss.
GradientSet record_gradient(const Network& net, std::span<const double> features,
                            const std::optional<SupervisedLabel>& label, const LossConfig& config);

std::vector<double> encode(const Network& net, std::span<const double> features);
std::vector<double> reconstruct(const Network& net, std::span<const double> features);

}  // namespace aead
