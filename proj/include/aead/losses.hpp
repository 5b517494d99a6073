#pragma once

#include <array>
#include <span>
#include <vector>

namespace aead {

/// Weights of the combined supervised loss and the probability clamp used by BCE.
struct LossConfig {
    double w_s = 1.0;         // supervised weight
    double w_ae = 1.0;        // reconstruction weight
    double clamp_eps = 1e-7;  // BCE probabilities are clamped into [eps, 1 - eps]

    /// Throws ConfigError unless w_s >= 0, w_ae >= 0 and 0 < clamp_eps < 0.5.
    void validate() const;

    bool operator==(const LossConfig&) const = default;
};

/// Two-class target on the 2-wide latent code: (1,0) anomalous, (0,1) normal.
class SupervisedLabel {
public:
    static SupervisedLabel anomalous() { return SupervisedLabel({1.0, 0.0}); }
    static SupervisedLabel normal() { return SupervisedLabel({0.0, 1.0}); }
    static SupervisedLabel from_flag(bool is_anomaly) { return is_anomaly ? anomalous() : normal(); }

    /// Throws ValidationError unless the tuple is exactly (1,0) or (0,1).
    explicit SupervisedLabel(std::array<double, 2> tuple);

    const std::array<double, 2>& tuple() const { return tuple_; }
    double operator[](std::size_t i) const { return tuple_[i]; }
    bool is_anomalous() const { return tuple_[0] == 1.0; }

private:
    std::array<double, 2> tuple_;
};

struct CombinedLoss {
    double total = 0.0;
    double supervised = 0.0;
    double reconstruction = 0.0;
};

/// Derivatives handed to network_backward.
struct LossGradients {
    std::vector<double> output;  // w.r.t. the reconstruction
    std::vector<double> latent;  // w.r.t. the latent code (zeros when unsupervised)
};

/// Mean of squared differences over the n features.
double mse(std::span<const double> x, std::span<const double> x_hat);

/// Mean over the two coordinates of binary cross entropy, after clamping p.
double bce(const SupervisedLabel& label, std::array<double, 2> p, double clamp_eps = 1e-7);

/// Euclidean distance between a record and its reconstruction (not averaged).
double anomaly_score(std::span<const double> x, std::span<const double> x_hat);

double sigmoid(double z);

/// w_s * bce(label, sigmoid(latent)) + w_ae * mse(x, x_hat).
CombinedLoss combined_loss(std::span<const double> latent, const SupervisedLabel& label,
                           std::span<const double> x, std::span<const double> x_hat,
                           const LossConfig& config);

/// d mse / d x_hat = 2 (x_hat - x) / n
std::vector<double> mse_gradient(std::span<const double> x, std::span<const double> x_hat);

/// d (w_s * bce(label, sigmoid(z))) / dz = w_s * (sigmoid(z) - y) / 2.
/// Uses the unclamped derivative; exact wherever the clamp is inactive.
std::vector<double> supervised_latent_gradient(std::span<const double> latent,
                                               const SupervisedLabel& label, double w_s);

/// Gradients of the combined loss: output side scaled by w_ae, latent side by w_s.
LossGradients combined_loss_gradients(std::span<const double> latent,
                                      const SupervisedLabel& label, std::span<const double> x,
                                      std::span<const double> x_hat, const LossConfig& config);

/// Gradients of the plain reconstruction loss; the latent side is all zeros.
LossGradients reconstruction_loss_gradients(std::size_t latent_dim, std::span<const double> x,
                                            std::span<const double> x_hat);

}  // namespace aead
