#include "aead/detect.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include <fmt/core.h>

#include "aead/csv.hpp"
#include "aead/error.hpp"
#include "aead/losses.hpp"

namespace aead {

namespace {

void check_labels(std::span<const int> labels, std::size_t n) {
    if (labels.size() != n) {
        throw ShapeError(fmt::format("{} labels for {} scores", labels.size(), n));
    }
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] != 0 && labels[i] != 1) {
            throw ValidationError(fmt::format("label {} at index {} is not binary", labels[i], i));
        }
    }
}

}  // namespace

void ThresholdPair::validate() const {
    if (!(lower <= upper)) {
        throw PreconditionError(fmt::format("lower threshold {} exceeds upper threshold {}", lower, upper));
    }
}

std::string format_metrics(const Metrics& m) {
    return fmt::format("Detected: {}\nTrue Positives: {}\nFalse Positives: {}\nMissed: {}\n",
                       m.detected, m.true_positives, m.false_positives, m.missed);
}

std::vector<double> score_dataset(const Network& net, const Dataset& dataset) {
    if (!dataset.empty() && dataset.feature_dim() != net.input_dim()) {
        throw ShapeError(fmt::format("model expects {} features, dataset has {}", net.input_dim(),
                                     dataset.feature_dim()));
    }
    std::vector<double> scores;
    scores.reserve(dataset.size());
    ForwardCache cache;
    for (const auto& r : dataset.records) {
        network_forward(net, r.features, cache);
        scores.push_back(anomaly_score(r.features, cache.post.back()));
    }
    return scores;
}

std::vector<bool> classify(std::span<const double> scores, const ThresholdPair& thresholds) {
    thresholds.validate();
    std::vector<bool> flags(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) {
        flags[i] = scores[i] < thresholds.lower || scores[i] > thresholds.upper;
    }
    return flags;
}

Metrics evaluate(const std::vector<bool>& flags, std::span<const int> labels) {
    check_labels(labels, flags.size());
    Metrics m;
    for (std::size_t i = 0; i < flags.size(); ++i) {
        const bool anomalous = labels[i] == 1;
        if (flags[i]) {
            ++m.detected;
            if (anomalous) ++m.true_positives;
            else ++m.false_positives;
        } else if (anomalous) {
            ++m.missed;
        }
    }
    return m;
}

Objective Objective::f_beta(double beta) {
    if (!(beta > 0.0) || !std::isfinite(beta)) {
        throw ConfigError(fmt::format("F-beta needs beta > 0, got {}", beta));
    }
    return Objective(Kind::FBeta, beta, 0);
}

std::string Objective::describe() const {
    switch (kind_) {
        case Kind::F1:
            return "f1";
        case Kind::FBeta:
            return fmt::format("fbeta(beta={})", beta_);
        case Kind::MaxTpWithFpCap:
            return fmt::format("max-tp(fp<={})", fp_cap_);
    }
    return "f1";
}

double Objective::value(const Metrics& m) const {
    const auto tp = static_cast<double>(m.true_positives);
    const auto fp = static_cast<double>(m.false_positives);
    const auto fn = static_cast<double>(m.missed);
    switch (kind_) {
        case Kind::F1:
            return m.true_positives == 0 ? 0.0 : 2.0 * tp / (2.0 * tp + fp + fn);
        case Kind::FBeta: {
            if (m.true_positives == 0) return 0.0;
            const double b2 = beta_ * beta_;
            return (1.0 + b2) * tp / ((1.0 + b2) * tp + b2 * fn + fp);
        }
        case Kind::MaxTpWithFpCap:
            return m.false_positives <= fp_cap_ ? tp : -std::numeric_limits<double>::infinity();
    }
    return 0.0;
}

SweepResult sweep_thresholds(std::span<const double> scores, std::span<const int> labels,
                             const Objective& objective) {
    check_labels(labels, scores.size());
    const auto total_anomalies =
        static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
    if (total_anomalies == 0) {
        throw PreconditionError("threshold sweep needs at least one labeled anomaly");
    }
    if (std::any_of(scores.begin(), scores.end(), [](double s) { return !std::isfinite(s); })) {
        throw NumericError("threshold sweep needs finite scores");
    }

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    // Group equal scores; prefix[k] / prefix_anom[k] count records in groups < k.
    std::vector<double> values;
    std::vector<std::size_t> prefix{0}, prefix_anom{0};
    for (std::size_t i = 0; i < order.size(); ++i) {
        const double s = scores[order[i]];
        if (values.empty() || s != values.back()) {
            values.push_back(s);
            prefix.push_back(prefix.back());
            prefix_anom.push_back(prefix_anom.back());
        }
        ++prefix.back();
        prefix_anom.back() += static_cast<std::size_t>(labels[order[i]]);
    }
    const std::size_t groups = values.size();
    const std::size_t n = scores.size();

    // candidate[k] separates group k-1 from group k.
    std::vector<double> candidate(groups + 1);
    candidate.front() = values.front() - std::max(1.0, std::abs(values.front()));
    candidate.back() = values.back() + std::max(1.0, std::abs(values.back()));
    for (std::size_t k = 1; k < groups; ++k) candidate[k] = std::midpoint(values[k - 1], values[k]);

    bool have_best = false;
    double best_value = 0.0;
    std::size_t best_fp = 0;
    double best_width = 0.0;
    std::size_t best_i = 0, best_j = 0;
    for (std::size_t i = 0; i <= groups; ++i) {
        for (std::size_t j = i; j <= groups; ++j) {
            Metrics m;
            m.detected = prefix[i] + (n - prefix[j]);
            m.true_positives = prefix_anom[i] + (total_anomalies - prefix_anom[j]);
            m.false_positives = m.detected - m.true_positives;
            m.missed = total_anomalies - m.true_positives;
            const double v = objective.value(m);
            const double width = candidate[j] - candidate[i];
            const bool better = !have_best || v > best_value ||
                                (v == best_value && (m.false_positives < best_fp ||
                                                     (m.false_positives == best_fp && width < best_width)));
            if (better) {
                have_best = true;
                best_value = v;
                best_fp = m.false_positives;
                best_width = width;
                best_i = i;
                best_j = j;
            }
        }
    }

    SweepResult result;
    result.thresholds = {candidate[best_i], candidate[best_j]};
    result.metrics = evaluate(classify(scores, result.thresholds), labels);
    result.objective = objective.value(result.metrics);
    return result;
}

std::vector<HistogramBin> export_histogram(std::span<const double> scores,
                                           std::span<const int> labels, std::size_t bin_count) {
    if (bin_count < 1) {
        throw PreconditionError("histogram needs at least one bin");
    }
    if (scores.empty()) {
        throw PreconditionError("histogram of an empty score list");
    }
    if (!labels.empty()) check_labels(labels, scores.size());
    if (std::any_of(scores.begin(), scores.end(), [](double s) { return !std::isfinite(s); })) {
        throw NumericError("histogram needs finite scores");
    }

    const auto [mn, mx] = std::minmax_element(scores.begin(), scores.end());
    const double lo = *mn;
    const double hi = *mx;
    const std::size_t bins = hi > lo ? bin_count : 1;
    const double width = (hi - lo) / static_cast<double>(bins);

    std::vector<HistogramBin> out(bins);
    for (std::size_t b = 0; b < bins; ++b) {
        out[b].lo = lo + width * static_cast<double>(b);
        out[b].hi = b + 1 == bins ? hi : lo + width * static_cast<double>(b + 1);
    }
    for (std::size_t i = 0; i < scores.size(); ++i) {
        std::size_t b = bins - 1;
        if (width > 0.0) {
            b = std::min(bins - 1, static_cast<std::size_t>((scores[i] - lo) / width));
            // Floating-point division can land one bin off near an edge.
            while (b > 0 && scores[i] < out[b].lo) --b;
            while (b + 1 < bins && scores[i] >= out[b + 1].lo) ++b;
        }
        const bool anomalous = !labels.empty() && labels[i] == 1;
        if (anomalous) ++out[b].count_anomalous;
        else ++out[b].count_normal;
    }
    return out;
}

void write_score_report(std::ostream& out, const ScoreReport& report) {
    const bool has_labels =
        !report.labels.empty() &&
        std::all_of(report.labels.begin(), report.labels.end(), [](const auto& l) { return l.has_value(); });
    if (!report.flags.empty() && report.flags.size() != report.scores.size()) {
        throw ShapeError("score report flags and scores differ in length");
    }
    if (has_labels && report.labels.size() != report.scores.size()) {
        throw ShapeError("score report labels and scores differ in length");
    }
    std::vector<std::string> row = {"row_index", "score", "flagged"};
    if (has_labels) row.emplace_back("label");
    csv::write_row(out, row);
    for (std::size_t i = 0; i < report.scores.size(); ++i) {
        row.clear();
        row.push_back(std::to_string(i));
        row.push_back(csv::format_double(report.scores[i]));
        row.push_back(!report.flags.empty() && report.flags[i] ? "1" : "0");
        if (has_labels) row.push_back(std::to_string(*report.labels[i]));
        csv::write_row(out, row);
    }
}

ScoreReport read_score_report(std::istream& in) {
    csv::Reader reader(in);
    std::vector<std::string> header, fields;
    if (!reader.next(header)) {
        throw FormatError("score report has no header row");
    }
    const auto c_score = csv::find_column(header, "score");
    if (!c_score) {
        throw SchemaError("score report is missing required column 'score'");
    }
    const auto c_label = csv::find_column(header, "label");
    ScoreReport report;
    while (reader.next(fields)) {
        if (fields.size() == 1 && fields[0].empty()) continue;
        if (fields.size() != header.size()) {
            throw ValidationError(fmt::format("score report line {} has {} columns, expected {}",
                                              reader.line(), fields.size(), header.size()));
        }
        const auto s = csv::parse_double(fields[*c_score]);
        if (s.status != csv::ParseStatus::Ok) {
            throw ValidationError(fmt::format("score report line {} has invalid score '{}'",
                                              reader.line(), fields[*c_score]));
        }
        report.scores.push_back(s.value);
        std::optional<int> label;
        if (c_label) {
            const auto l = csv::parse_double(fields[*c_label]);
            if (l.status == csv::ParseStatus::Ok) {
                if (l.value != 0.0 && l.value != 1.0) {
                    throw ValidationError(fmt::format("score report line {} has label '{}'",
                                                      reader.line(), fields[*c_label]));
                }
                label = static_cast<int>(l.value);
            } else if (l.status == csv::ParseStatus::Invalid) {
                throw ValidationError(fmt::format("score report line {} has label '{}'",
                                                  reader.line(), fields[*c_label]));
            }
        }
        report.labels.push_back(label);
    }
    return report;
}

void write_histogram(std::ostream& out, std::span<const HistogramBin> bins) {
    std::vector<std::string> row = {"bin_lo", "bin_hi", "count_normal", "count_anomalous"};
    csv::write_row(out, row);
    for (const auto& b : bins) {
        row = {csv::format_double(b.lo), csv::format_double(b.hi), std::to_string(b.count_normal),
               std::to_string(b.count_anomalous)};
        csv::write_row(out, row);
    }
}

}  // namespace aead
