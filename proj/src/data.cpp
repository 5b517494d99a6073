#include "aead/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include <fmt/core.h>

#include "aead/csv.hpp"
#include "aead/error.hpp"
#include "aead/rng.hpp"

namespace aead {

namespace {

constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError(fmt::format("cannot open '{}' for reading", path.string()));
    }
    return in;
}

std::size_t require_column(std::span<const std::string> header, std::string_view name,
                           std::string_view table) {
    const auto idx = csv::find_column(header, name);
    if (!idx) {
        throw SchemaError(fmt::format("{} is missing required column '{}'", table, name));
    }
    return *idx;
}

std::optional<std::int64_t> parse_key(std::string_view text) {
    const auto parsed = csv::parse_double(text);
    if (parsed.status != csv::ParseStatus::Ok || !std::isfinite(parsed.value) ||
        parsed.value != std::floor(parsed.value)) {
        return std::nullopt;
    }
    return static_cast<std::int64_t>(parsed.value);
}

std::string trimmed(std::string_view s) {
    const auto first = s.find_first_not_of(" \t");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t");
    return std::string(s.substr(first, last - first + 1));
}

// Numeric feature field: blank -> NaN, garbage -> nullopt.
std::optional<double> parse_feature(std::string_view text) {
    const auto parsed = csv::parse_double(text);
    switch (parsed.status) {
        case csv::ParseStatus::Ok:
            return parsed.value;
        case csv::ParseStatus::Blank:
            return kMissing;
        case csv::ParseStatus::Invalid:
            return std::nullopt;
    }
    return std::nullopt;
}

double median_of(std::vector<double> values) {
    if (values.empty()) return 0.0;
    const auto mid = values.size() / 2;
    std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
    const double upper = values[mid];
    if (values.size() % 2 == 1) return upper;
    const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
    return lower + (upper - lower) / 2.0;
}

Dataset read_table(std::istream& in, std::string provenance, bool strict_labeled) {
    csv::Reader reader(in);
    std::vector<std::string> header;
    if (!reader.next(header)) {
        throw FormatError(fmt::format("{}: missing header row", provenance));
    }
    std::string last = trimmed(header.back());
    std::transform(last.begin(), last.end(), last.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    const bool has_label = strict_labeled || last == kLabelColumn;
    const std::size_t columns = header.size();

    if (strict_labeled && columns != kFeatureCount + 1) {
        throw ValidationError(fmt::format("{}: expected {} columns ({} features + label), found {}",
                                          provenance, kFeatureCount + 1, kFeatureCount, columns));
    }
    const std::size_t n_features = has_label ? columns - 1 : columns;
    if (n_features == 0) {
        throw ValidationError(fmt::format("{}: no feature columns", provenance));
    }

    Dataset ds;
    ds.provenance = std::move(provenance);
    std::vector<std::string> fields;
    std::size_t row = 0;
    while (reader.next(fields)) {
        ++row;
        if (fields.size() == 1 && trimmed(fields[0]).empty()) continue;  // blank line
        if (fields.size() != columns) {
            throw ValidationError(fmt::format("{}: row {} (line {}) has {} columns, expected {}",
                                              ds.provenance, row, reader.line(), fields.size(),
                                              columns));
        }
        Record rec;
        rec.features.resize(n_features);
        for (std::size_t j = 0; j < n_features; ++j) {
            const auto v = parse_feature(fields[j]);
            if (!v) {
                throw ValidationError(fmt::format("{}: row {} column '{}' is not numeric: '{}'",
                                                  ds.provenance, row, trimmed(header[j]),
                                                  fields[j]));
            }
            rec.features[j] = *v;
        }
        if (has_label) {
            const auto parsed = csv::parse_double(fields.back());
            if (parsed.status != csv::ParseStatus::Ok ||
                (parsed.value != 0.0 && parsed.value != 1.0)) {
                throw ValidationError(fmt::format("{}: row {} has label '{}', expected 0 or 1",
                                                  ds.provenance, row, trimmed(fields.back())));
            }
            rec.label = static_cast<int>(parsed.value);
        }
        ds.records.push_back(std::move(rec));
    }
    return ds;
}

}  // namespace

bool Dataset::labeled() const {
    return !records.empty() &&
           std::all_of(records.begin(), records.end(), [](const Record& r) { return r.label.has_value(); });
}

std::size_t Dataset::anomaly_count() const {
    return static_cast<std::size_t>(std::count_if(records.begin(), records.end(), [](const Record& r) {
        return r.label.value_or(0) == 1;
    }));
}

std::vector<int> Dataset::labels() const {
    if (!labeled()) {
        throw StateError("dataset is not labeled");
    }
    std::vector<int> out;
    out.reserve(records.size());
    for (const auto& r : records) out.push_back(*r.label);
    return out;
}

void Dataset::validate() const {
    if (records.empty()) return;
    const auto dim = feature_dim();
    const bool first_labeled = records.front().label.has_value();
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& r = records[i];
        if (r.features.size() != dim) {
            throw ShapeError(fmt::format("record {} has {} features, expected {}", i,
                                         r.features.size(), dim));
        }
        if (r.label.has_value() != first_labeled) {
            throw ValidationError("dataset mixes labeled and unlabeled records");
        }
        if (r.label && *r.label != 0 && *r.label != 1) {
            throw ValidationError(fmt::format("record {} has label {}, expected 0 or 1", i, *r.label));
        }
    }
}

Normalizer::Normalizer(std::vector<double> min, std::vector<double> max, std::vector<double> median)
    : fitted_(true), min_(std::move(min)), max_(std::move(max)), median_(std::move(median)) {
    if (min_.size() != max_.size() || min_.size() != median_.size()) {
        throw ShapeError("normalizer min/max/median lengths differ");
    }
    for (std::size_t j = 0; j < min_.size(); ++j) {
        if (!(min_[j] <= max_[j])) {
            throw ValidationError(fmt::format("normalizer feature {} has min {} > max {}", j,
                                              min_[j], max_[j]));
        }
    }
}

double Normalizer::apply(std::size_t feature, double value) const {
    if (!fitted_) {
        throw StateError("normalizer applied before fit");
    }
    if (std::isnan(value)) value = median_[feature];
    const double range = max_[feature] - min_[feature];
    if (range == 0.0) return 0.0;
    return (value - min_[feature]) / range;
}

Normalizer normalize_fit(const Dataset& dataset) {
    if (dataset.empty()) {
        throw PreconditionError("cannot fit a normalizer on an empty dataset");
    }
    dataset.validate();
    const auto dim = dataset.feature_dim();
    std::vector<double> lo(dim, 0.0), hi(dim, 0.0), med(dim, 0.0);
    std::vector<double> column;
    column.reserve(dataset.size());
    for (std::size_t j = 0; j < dim; ++j) {
        column.clear();
        for (const auto& r : dataset.records) {
            if (!std::isnan(r.features[j])) column.push_back(r.features[j]);
        }
        if (column.empty()) continue;  // entirely blank column: constant 0
        const auto [mn, mx] = std::minmax_element(column.begin(), column.end());
        lo[j] = *mn;
        hi[j] = *mx;
        med[j] = median_of(column);
    }
    return Normalizer(std::move(lo), std::move(hi), std::move(med));
}

Dataset normalize_apply(const Normalizer& normalizer, const Dataset& dataset) {
    if (!normalizer.fitted()) {
        throw StateError("normalizer applied before fit");
    }
    if (!dataset.empty() && dataset.feature_dim() != normalizer.dim()) {
        throw ShapeError(fmt::format("normalizer fitted on {} features, dataset has {}",
                                     normalizer.dim(), dataset.feature_dim()));
    }
    Dataset out = dataset;
    for (auto& r : out.records) {
        if (r.features.size() != normalizer.dim()) {
            throw ShapeError("dataset has records of differing width");
        }
        for (std::size_t j = 0; j < r.features.size(); ++j) {
            r.features[j] = normalizer.apply(j, r.features[j]);
        }
    }
    return out;
}

std::size_t count_missing(const Dataset& dataset) {
    std::size_t n = 0;
    for (const auto& r : dataset.records) {
        n += static_cast<std::size_t>(
            std::count_if(r.features.begin(), r.features.end(), [](double v) { return std::isnan(v); }));
    }
    return n;
}

std::string JoinReport::summary() const {
    std::ostringstream out;
    out << "meter rows read: " << meter_rows << '\n'
        << "records emitted: " << output_rows << '\n'
        << "dropped (no building match): " << dropped_no_building << '\n'
        << "dropped (no weather match): " << dropped_no_weather << '\n'
        << "unparseable rows skipped: meter " << unparseable_meter << ", building "
        << unparseable_building << ", weather " << unparseable_weather << '\n';
    out << "missing values:";
    bool any = false;
    for (std::size_t j = 0; j < kFeatureCount; ++j) {
        if (missing[j] == 0) continue;
        out << ' ' << kFeatureNames[j] << '=' << missing[j];
        any = true;
    }
    if (!any) out << " none";
    out << '\n';
    return out.str();
}

JoinResult join_sources(std::istream& meter_csv, std::istream& building_csv,
                        std::istream& weather_csv) {
    JoinResult result;
    auto& report = result.report;
    std::vector<std::string> header, fields;

    // building_id -> (site_id, square_feet, year_built, floor_count)
    struct BuildingInfo {
        std::int64_t site_id;
        std::array<double, 3> values;
    };
    std::unordered_map<std::int64_t, BuildingInfo> buildings;
    {
        csv::Reader reader(building_csv);
        if (!reader.next(header)) throw SchemaError("building metadata has no header row");
        const auto c_building = require_column(header, "building_id", "building metadata");
        const auto c_site = require_column(header, "site_id", "building metadata");
        const std::array<std::size_t, 3> c_values = {
            require_column(header, "square_feet", "building metadata"),
            require_column(header, "year_built", "building metadata"),
            require_column(header, "floor_count", "building metadata")};
        while (reader.next(fields)) {
            if (fields.size() != header.size()) {
                ++report.unparseable_building;
                continue;
            }
            const auto building = parse_key(fields[c_building]);
            const auto site = parse_key(fields[c_site]);
            BuildingInfo info{};
            bool ok = building && site;
            for (std::size_t k = 0; ok && k < c_values.size(); ++k) {
                const auto v = parse_feature(fields[c_values[k]]);
                ok = v.has_value();
                if (ok) info.values[k] = *v;
            }
            if (!ok) {
                ++report.unparseable_building;
                continue;
            }
            info.site_id = *site;
            buildings.emplace(*building, info);
        }
    }

    constexpr std::array<std::string_view, 7> kWeatherColumns = {
        "air_temperature",    "cloud_coverage", "dew_temperature", "precip_depth_1_hr",
        "sea_level_pressure", "wind_direction", "wind_speed"};
    std::map<std::pair<std::int64_t, std::string>, std::array<double, 7>> weather;
    {
        csv::Reader reader(weather_csv);
        if (!reader.next(header)) throw SchemaError("weather table has no header row");
        const auto c_site = require_column(header, "site_id", "weather table");
        const auto c_time = require_column(header, "timestamp", "weather table");
        std::array<std::size_t, 7> c_values{};
        for (std::size_t k = 0; k < kWeatherColumns.size(); ++k) {
            c_values[k] = require_column(header, kWeatherColumns[k], "weather table");
        }
        while (reader.next(fields)) {
            if (fields.size() != header.size()) {
                ++report.unparseable_weather;
                continue;
            }
            const auto site = parse_key(fields[c_site]);
            auto stamp = trimmed(fields[c_time]);
            std::array<double, 7> values{};
            bool ok = site && !stamp.empty();
            for (std::size_t k = 0; ok && k < values.size(); ++k) {
                const auto v = parse_feature(fields[c_values[k]]);
                ok = v.has_value();
                if (ok) values[k] = *v;
            }
            if (!ok) {
                ++report.unparseable_weather;
                continue;
            }
            weather.emplace(std::make_pair(*site, std::move(stamp)), values);
        }
    }

    csv::Reader reader(meter_csv);
    if (!reader.next(header)) throw SchemaError("meter table has no header row");
    const auto c_building = require_column(header, "building_id", "meter table");
    const auto c_meter = require_column(header, "meter", "meter table");
    const auto c_time = require_column(header, "timestamp", "meter table");
    const auto c_reading = require_column(header, "meter_reading", "meter table");
    result.dataset.provenance = "joined meter/building/weather tables";
    while (reader.next(fields)) {
        if (fields.size() != header.size()) {
            ++report.unparseable_meter;
            continue;
        }
        const auto building = parse_key(fields[c_building]);
        const auto meter = parse_key(fields[c_meter]);
        const auto reading = parse_feature(fields[c_reading]);
        auto stamp = trimmed(fields[c_time]);
        if (!building || !meter || !reading || stamp.empty()) {
            ++report.unparseable_meter;
            continue;
        }
        ++report.meter_rows;
        const auto b = buildings.find(*building);
        if (b == buildings.end()) {
            ++report.dropped_no_building;
            continue;
        }
        const auto w = weather.find({b->second.site_id, stamp});
        if (w == weather.end()) {
            ++report.dropped_no_weather;
            continue;
        }
        Record rec;
        rec.features = {static_cast<double>(*building),
                        b->second.values[0],
                        b->second.values[1],
                        b->second.values[2]};
        rec.features.insert(rec.features.end(), w->second.begin(), w->second.end());
        rec.features.push_back(static_cast<double>(*meter));
        rec.features.push_back(*reading);
        for (std::size_t j = 0; j < kFeatureCount; ++j) {
            if (std::isnan(rec.features[j])) ++report.missing[j];
        }
        result.dataset.records.push_back(std::move(rec));
    }
    report.output_rows = result.dataset.size();
    return result;
}

JoinResult join_sources(const std::filesystem::path& meter_csv,
                        const std::filesystem::path& building_csv,
                        const std::filesystem::path& weather_csv) {
    auto meter = open_input(meter_csv);
    auto building = open_input(building_csv);
    auto weather = open_input(weather_csv);
    return join_sources(meter, building, weather);
}

Dataset load_labeled(std::istream& in, std::string provenance) {
    return read_table(in, std::move(provenance), true);
}

Dataset load_labeled(const std::filesystem::path& path) {
    auto in = open_input(path);
    return load_labeled(in, path.string());
}

Dataset load_dataset(std::istream& in, std::string provenance) {
    return read_table(in, std::move(provenance), false);
}

Dataset load_dataset(const std::filesystem::path& path) {
    auto in = open_input(path);
    return load_dataset(in, path.string());
}

std::vector<std::string> feature_column_names(std::size_t dim) {
    std::vector<std::string> names;
    names.reserve(dim);
    for (std::size_t j = 0; j < dim; ++j) {
        names.push_back(dim == kFeatureCount ? std::string(kFeatureNames[j]) : fmt::format("x{}", j));
    }
    return names;
}

void write_dataset(std::ostream& out, const Dataset& dataset) {
    dataset.validate();
    const bool labeled = dataset.labeled();
    auto row = feature_column_names(dataset.feature_dim());
    if (labeled) row.emplace_back(kLabelColumn);
    csv::write_row(out, row);
    for (const auto& r : dataset.records) {
        row.clear();
        for (double v : r.features) row.push_back(std::isnan(v) ? std::string() : csv::format_double(v));
        if (labeled) row.push_back(std::to_string(*r.label));
        csv::write_row(out, row);
    }
}

Dataset gen_synthetic(const SyntheticConfig& config) {
    if (config.input_dim < 3) {
        throw PreconditionError("synthetic data needs input_dim >= 3");
    }
    if (!(config.noise >= 0.0) || !(config.shift_min_factor >= 10.0) ||
        !(config.shift_max_factor >= config.shift_min_factor)) {
        throw PreconditionError("synthetic anomaly shift must be >= 10x noise and min <= max");
    }
    const auto dim = config.input_dim;
    Rng rng(config.seed, streams::kSynthetic);

    // Manifold basis: two random columns, orthonormalised for the off-manifold projection.
    std::vector<double> a0(dim), a1(dim);
    for (auto& v : a0) v = rng.uniform(-1.0, 1.0);
    for (auto& v : a1) v = rng.uniform(-1.0, 1.0);
    const auto dot = [](const std::vector<double>& u, const std::vector<double>& v) {
        return std::inner_product(u.begin(), u.end(), v.begin(), 0.0);
    };
    std::vector<double> e0 = a0, e1 = a1;
    const double n0 = std::sqrt(dot(e0, e0));
    for (auto& v : e0) v /= n0;
    const double p = dot(e1, e0);
    for (std::size_t j = 0; j < dim; ++j) e1[j] -= p * e0[j];
    const double n1 = std::sqrt(dot(e1, e1));
    for (auto& v : e1) v /= n1;

    const auto on_manifold = [&] {
        const double z0 = rng.uniform01();
        const double z1 = rng.uniform01();
        std::vector<double> x(dim);
        for (std::size_t j = 0; j < dim; ++j) {
            x[j] = a0[j] * z0 + a1[j] * z1 + rng.uniform(-config.noise, config.noise);
        }
        return x;
    };

    Dataset ds;
    ds.provenance = fmt::format("synthetic seed={} normal={} anomalies={} dim={}", config.seed,
                                config.n_normal, config.n_anomalies, dim);
    ds.records.reserve(config.n_normal + config.n_anomalies);
    for (std::size_t i = 0; i < config.n_normal; ++i) {
        ds.records.push_back({on_manifold(), 0});
    }
    for (std::size_t i = 0; i < config.n_anomalies; ++i) {
        auto x = on_manifold();
        std::vector<double> dir(dim);
        double norm = 0.0;
        do {
            for (auto& v : dir) v = rng.normal();
            const double c0 = dot(dir, e0);
            const double c1 = dot(dir, e1);
            for (std::size_t j = 0; j < dim; ++j) dir[j] -= c0 * e0[j] + c1 * e1[j];
            norm = std::sqrt(dot(dir, dir));
        } while (norm < 1e-9);
        const double magnitude =
            config.noise * rng.uniform(config.shift_min_factor, config.shift_max_factor);
        for (std::size_t j = 0; j < dim; ++j) x[j] += magnitude * dir[j] / norm;
        ds.records.push_back({std::move(x), 1});
    }
    rng.shuffle(std::span<Record>(ds.records));
    return ds;
}

}  // namespace aead
