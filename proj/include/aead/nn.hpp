#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace aead {

enum class Activation { ReLU, Sigmoid, Linear, Tanh };

std::string_view to_string(Activation activation);
/// Inverse of to_string; throws FormatError on an unknown name.
Activation parse_activation(std::string_view name);

/// Dense row-major matrix of doubles.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

    std::span<double> values() { return data_; }
    std::span<const double> values() const { return data_; }

    bool operator==(const Matrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

struct DenseLayer {
    Matrix weights;  // out_dim x in_dim
    std::vector<double> biases;
    Activation activation = Activation::Linear;

    std::size_t in_dim() const { return weights.cols(); }
    std::size_t out_dim() const { return weights.rows(); }

    /// Throws ShapeError / NumericError when the layer invariants do not hold.
    void validate() const;

    bool operator==(const DenseLayer&) const = default;
};

struct Network {
    std::vector<DenseLayer> layers;
    std::size_t latent_index = 0;  // layer whose output is the latent code

    std::size_t input_dim() const;
    std::size_t output_dim() const;
    std::size_t latent_dim() const;
    std::size_t parameter_count() const;

    void validate() const;

    bool operator==(const Network&) const = default;
};

/// Per-layer pre- and post-activation values from one forward pass.
struct ForwardCache {
    std::vector<double> input;
    std::vector<std::vector<double>> pre;
    std::vector<std::vector<double>> post;
};

struct ForwardResult {
    std::vector<double> latent;
    std::vector<double> output;
    ForwardCache cache;
};

struct LayerGradient {
    Matrix weights;
    std::vector<double> biases;

    bool operator==(const LayerGradient&) const = default;
};

struct GradientSet {
    std::vector<LayerGradient> layers;

    static GradientSet zeros_like(const Network& net);

    /// this += scale * other
    void add_scaled(const GradientSet& other, double scale);
    void scale(double factor);
    bool congruent_with(const Network& net) const;
    bool all_finite() const;

    bool operator==(const GradientSet&) const = default;
};

std::vector<double> apply_activation(Activation kind, std::span<const double> pre_activation);

std::vector<double> dense_forward(const DenseLayer& layer, std::span<const double> input);

ForwardResult network_forward(const Network& net, std::span<const double> input);

/// Forward pass into caller-owned buffers; used by the training loop to avoid
/// reallocating per record.
void network_forward(const Network& net, std::span<const double> input, ForwardCache& cache);

/// Gradient of a loss whose derivative w.r.t. the network output is
/// `output_grad` and w.r.t. the latent layer output is (additionally)
/// `latent_grad`.
GradientSet network_backward(const Network& net, const ForwardCache& cache,
                             std::span<const double> output_grad,
                             std::span<const double> latent_grad);

/// Same as network_backward but adds the result into `into`.
void accumulate_backward(const Network& net, const ForwardCache& cache,
                         std::span<const double> output_grad,
                         std::span<const double> latent_grad, GradientSet& into);

/// Glorot-uniform weights in +-sqrt(6 / (fan_in + fan_out)), zero biases.
/// `activations` has one entry per layer (dims.size() - 1). The latent index
/// is the first layer with the smallest output width.
Network init_network(std::span<const std::size_t> dims,
                     std::span<const Activation> activations, std::uint64_t seed);

/// Returns a copy of `net` with every parameter p replaced by p - lr * g.
Network sgd_step(const Network& net, const GradientSet& grads, double learning_rate);

void apply_sgd(Network& net, const GradientSet& grads, double learning_rate);

}  // namespace aead
