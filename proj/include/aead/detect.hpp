#pragma once

#include <cstddef>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "aead/data.hpp"
#include "aead/nn.hpp"

namespace aead {

/// Normal band of anomaly scores. Scores strictly below `lower` or strictly
/// above `upper` are anomalous; a score equal to either bound is normal.
struct ThresholdPair {
    double lower = 0.0;
    double upper = 0.0;

    /// Throws PreconditionError unless lower <= upper (NaN bounds are rejected).
    void validate() const;
};

struct Metrics {
    std::size_t detected = 0;
    std::size_t true_positives = 0;
    std::size_t false_positives = 0;
    std::size_t missed = 0;

    bool operator==(const Metrics&) const = default;
};

/// Four-line block: Detected / True Positives / False Positives / Missed.
std::string format_metrics(const Metrics& metrics);

struct ScoreReport {
    std::vector<double> scores;
    std::optional<ThresholdPair> thresholds;
    std::vector<bool> flags;            // empty when no thresholds were applied
    std::vector<std::optional<int>> labels;
};

/// Row-wise anomaly score of each record against its reconstruction.
std::vector<double> score_dataset(const Network& net, const Dataset& dataset);

std::vector<bool> classify(std::span<const double> scores, const ThresholdPair& thresholds);

Metrics evaluate(const std::vector<bool>& flags, std::span<const int> labels);

class Objective {
public:
    enum class Kind { F1, FBeta, MaxTpWithFpCap };

    static Objective f1() { return Objective(Kind::F1, 1.0, 0); }
    static Objective f_beta(double beta);
    static Objective max_tp_with_fp_cap(std::size_t cap) { return Objective(Kind::MaxTpWithFpCap, 1.0, cap); }

    Kind kind() const { return kind_; }
    double beta() const { return beta_; }
    std::size_t fp_cap() const { return fp_cap_; }
    std::string describe() const;

    /// Larger is better. Infeasible pairs (FP over the cap) score -infinity.
    double value(const Metrics& metrics) const;

private:
    Objective(Kind kind, double beta, std::size_t cap) : kind_(kind), beta_(beta), fp_cap_(cap) {}

    Kind kind_;
    double beta_;
    std::size_t fp_cap_;
};

struct SweepResult {
    ThresholdPair thresholds;
    Metrics metrics;
    double objective = 0.0;
};

/// Exhaustive search over threshold pairs drawn from the midpoints between
/// consecutive distinct sorted scores plus one sentinel below the minimum and
/// one above the maximum. Ties on the objective go to fewer false positives,
/// then to the narrower band.
SweepResult sweep_thresholds(std::span<const double> scores, std::span<const int> labels,
                             const Objective& objective);

struct HistogramBin {
    double lo = 0.0;
    double hi = 0.0;
    std::size_t count_normal = 0;
    std::size_t count_anomalous = 0;
};

/// Equal-width bins over [min, max]; each bin is [lo, hi) except the last,
/// which also holds max. All scores equal -> one bin. Without labels every
/// score counts as normal.
std::vector<HistogramBin> export_histogram(std::span<const double> scores,
                                           std::span<const int> labels, std::size_t bin_count);

void write_score_report(std::ostream& out, const ScoreReport& report);
/// Reads scores (and labels when the column has values) back from a score report.
ScoreReport read_score_report(std::istream& in);
void write_histogram(std::ostream& out, std::span<const HistogramBin> bins);

}  // namespace aead
