#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace aead {

inline constexpr std::size_t kFeatureCount = 13;

/// Trainable columns, in the order models see them.
inline constexpr std::array<std::string_view, kFeatureCount> kFeatureNames = {
    "building_id",       "square_feet",        "year_built",     "floor_count",
    "air_temperature",   "cloud_coverage",     "dew_temperature", "precip_depth_1_hr",
    "sea_level_pressure", "wind_direction",    "wind_speed",     "meter",
    "meter_reading"};

inline constexpr std::string_view kLabelColumn = "anomaly";

/// One observation. Missing feature values are NaN until normalization imputes them.
struct Record {
    std::vector<double> features;
    std::optional<int> label;  // 1 anomalous, 0 normal

    bool operator==(const Record&) const = default;
};

struct Dataset {
    std::vector<Record> records;
    std::string provenance;

    std::size_t size() const { return records.size(); }
    bool empty() const { return records.empty(); }
    std::size_t feature_dim() const { return records.empty() ? 0 : records.front().features.size(); }

    /// True when every record carries a label. Empty datasets count as unlabeled.
    bool labeled() const;
    std::size_t anomaly_count() const;
    /// Throws StateError when the dataset is not labeled.
    std::vector<int> labels() const;

    /// Homogeneous width and labeling; labels in {0, 1}.
    void validate() const;
};

/// Per-feature min-max scaling fitted on a training set. Blank inputs are
/// imputed with the fitted per-feature median before scaling.
class Normalizer {
public:
    Normalizer() = default;
    Normalizer(std::vector<double> min, std::vector<double> max, std::vector<double> median);

    bool fitted() const { return fitted_; }
    std::size_t dim() const { return min_.size(); }
    const std::vector<double>& min() const { return min_; }
    const std::vector<double>& max() const { return max_; }
    const std::vector<double>& median() const { return median_; }

    /// Maps one value of feature j. Values outside the fitted range are not clipped.
    double apply(std::size_t feature, double value) const;

    bool operator==(const Normalizer&) const = default;

private:
    bool fitted_ = false;
    std::vector<double> min_;
    std::vector<double> max_;
    std::vector<double> median_;
};

Normalizer normalize_fit(const Dataset& dataset);
Dataset normalize_apply(const Normalizer& normalizer, const Dataset& dataset);

/// Number of NaN (blank) feature values; these are what normalize_apply imputes.
std::size_t count_missing(const Dataset& dataset);

struct JoinReport {
    std::size_t meter_rows = 0;  // parseable meter rows
    std::size_t output_rows = 0;
    std::size_t dropped_no_building = 0;
    std::size_t dropped_no_weather = 0;
    std::size_t unparseable_meter = 0;
    std::size_t unparseable_building = 0;
    std::size_t unparseable_weather = 0;
    std::array<std::size_t, kFeatureCount> missing{};  // blank values per output feature

    std::string summary() const;
};

struct JoinResult {
    Dataset dataset;
    JoinReport report;
};

/// Inner join meter -> building (building_id) -> weather (site_id, timestamp).
/// Emits the 13 trainable features per matched meter row, in meter-row order.
JoinResult join_sources(std::istream& meter_csv, std::istream& building_csv,
                        std::istream& weather_csv);
JoinResult join_sources(const std::filesystem::path& meter_csv,
                        const std::filesystem::path& building_csv,
                        const std::filesystem::path& weather_csv);

/// Strict loader: exactly 13 feature columns plus the label column.
Dataset load_labeled(const std::filesystem::path& path);
Dataset load_labeled(std::istream& in, std::string provenance = "stream");

/// Generic loader: any number of numeric feature columns, optionally followed
/// by a trailing `anomaly` label column.
Dataset load_dataset(const std::filesystem::path& path);
Dataset load_dataset(std::istream& in, std::string provenance = "stream");

/// Writes a header plus one row per record; NaN becomes a blank field and the
/// label column is written only for labeled datasets.
void write_dataset(std::ostream& out, const Dataset& dataset);

/// Column names used for a dataset of the given width.
std::vector<std::string> feature_column_names(std::size_t dim);

struct SyntheticConfig {
    std::uint64_t seed = 1;
    std::size_t n_normal = 2000;
    std::size_t n_anomalies = 100;
    std::size_t input_dim = kFeatureCount;
    double noise = 0.01;            // per-coordinate uniform noise amplitude
    double shift_min_factor = 10.0;  // anomaly displacement, in units of noise
    double shift_max_factor = 20.0;
};

/// Normal rows lie near a random 2-dimensional linear manifold; anomalies are
/// normal rows pushed off it in a random direction.
Dataset gen_synthetic(const SyntheticConfig& config);

}  // namespace aead
