#include "aead/cli.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <optional>
#include <vector>

#include <fmt/core.h>

#include "CLI11.hpp"
#include "aead/checkpoint.hpp"
#include "aead/csv.hpp"
#include "aead/data.hpp"
#include "aead/detect.hpp"
#include "aead/error.hpp"
#include "aead/gradcheck.hpp"
#include "aead/io.hpp"
#include "aead/models.hpp"
#include "aead/rng.hpp"

namespace aead {

namespace {

namespace fs = std::filesystem;

std::string env_name(std::string_view flag) {
    std::string name = "AEAD_";
    for (char c : flag.substr(flag.find_first_not_of('-'))) {
        name.push_back(c == '-' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
    }
    return name;
}

template <typename T>
CLI::Option* opt(CLI::App* cmd, const std::string& flag, T& value, const std::string& help) {
    return cmd->add_option(flag, value, help)->envname(env_name(flag));
}

std::string num(double v) { return csv::format_double(v); }

void require_file(const fs::path& path) {
    std::error_code ec;
    if (!fs::is_regular_file(path, ec)) {
        throw IoError(fmt::format("no such file: '{}'", path.string()));
    }
}

Dataset load_input(const fs::path& path) {
    require_file(path);
    auto ds = load_dataset(path);
    if (ds.empty()) {
        throw ValidationError(fmt::format("'{}' contains no records", path.string()));
    }
    return ds;
}

struct TrainOptions {
    std::string arch;
    std::string data;
    std::size_t epochs = 1000;
    std::size_t batch = 32;
    double lr = 1e-3;
    std::uint64_t seed = 1;
    std::string out;
    std::string history;
    double w_s = 1.0;
    double w_ae = 1.0;
    double clamp_eps = 1e-7;
    std::size_t hidden = 6;
    std::size_t latent = 2;
    double val_fraction = 0.0;
    std::size_t log_every = 0;
};

struct ScoreOptions {
    std::string ckpt;
    std::string data;
    std::string out;
    std::optional<double> lower;
    std::optional<double> upper;
};

struct SweepOptions {
    std::string ckpt;
    std::string data;
    std::string objective = "f1";
    double beta = 1.0;
    std::size_t fp_cap = 0;
    std::string out;
};

struct SynthOptions {
    std::uint64_t seed = 1;
    std::size_t normal = 2000;
    std::size_t anomalies = 100;
    std::size_t dim = kFeatureCount;
    double shift_min = 10.0;
    double shift_max = 20.0;
    std::string out;
};

struct GradcheckOptions {
    std::string arch;
    std::uint64_t seed = 1;
    double eps = 1e-5;
    double tol = 1e-4;
};

struct HistOptions {
    std::string scores;
    std::size_t bins = 20;
    std::string out;
};

struct JoinOptions {
    std::string meter;
    std::string buildings;
    std::string weather;
    std::string out;
    std::string report;
};

Checkpoint load_model(const std::string& path) {
    require_file(path);
    return load_checkpoint(path);
}

Dataset load_scoring_data(const Checkpoint& ck, const std::string& path) {
    auto raw = load_input(path);
    if (raw.feature_dim() != ck.spec.input_dim) {
        throw ShapeError(fmt::format("checkpoint expects {} features, '{}' has {}", ck.spec.input_dim,
                                     path, raw.feature_dim()));
    }
    return normalize_apply(ck.normalizer, raw);
}

ScoreReport make_report(const Dataset& ds, std::vector<double> scores) {
    ScoreReport report;
    report.scores = std::move(scores);
    for (const auto& r : ds.records) report.labels.push_back(r.label);
    return report;
}

int cmd_train(const TrainOptions& o, std::ostream& out) {
    const std::string history_path = o.history.empty() ? o.out + ".history.csv" : o.history;
    out << "effective config: train --arch " << o.arch << " --data " << o.data << " --epochs "
        << o.epochs << " --batch " << o.batch << " --lr " << num(o.lr) << " --seed " << o.seed
        << " --out " << o.out << " --history " << history_path << " --w-s " << num(o.w_s)
        << " --w-ae " << num(o.w_ae) << " --clamp-eps " << num(o.clamp_eps) << " --hidden "
        << o.hidden << " --latent " << o.latent << " --val-fraction " << num(o.val_fraction) << " --log-every "
        << o.log_every << '\n';

    ArchitectureSpec spec;
    spec.kind = parse_architecture(o.arch);
    spec.hidden_dim = o.hidden;
    spec.latent_dim = o.latent;
    TrainConfig config;
    config.epochs = o.epochs;
    config.batch_size = o.batch;
    config.learning_rate = o.lr;
    config.seed = o.seed;
    config.loss = {o.w_s, o.w_ae, o.clamp_eps};
    config.validation_fraction = o.val_fraction;
    config.validate();

    const auto raw = load_input(o.data);
    spec.input_dim = raw.feature_dim();
    spec.validate();
    if (spec.supervised() && !raw.labeled()) {
        throw ValidationError(fmt::format("sdae training needs a labeled file; '{}' has no anomaly column",
                                          o.data));
    }
    const auto missing = count_missing(raw);
    out << "records: " << raw.size() << ", features: " << raw.feature_dim();
    if (raw.labeled()) out << ", anomalies: " << raw.anomaly_count();
    out << ", imputed values: " << missing << '\n';

    const auto normalizer = normalize_fit(raw);
    const auto data = normalize_apply(normalizer, raw);
    auto net = build_model(spec, o.seed);
    const auto result = train(std::move(net), data, config, spec.supervised(),
                              [&](std::size_t epoch, const LossHistory& h) {
                                  if (o.log_every > 0 && (epoch % o.log_every == 0 || epoch == 1)) {
                                      out << "epoch " << epoch << " loss " << num(h.total.back()) << '\n';
                                  }
                              });
    const auto& h = result.history;
    out << "steps: " << result.steps << ", final loss: " << num(h.total.back()) << '\n';

    Checkpoint ck{spec, result.net, normalizer, o.seed, config.loss};
    try {
        save_checkpoint(ck, o.out);
        write_file_atomic(history_path, [&](std::ostream& f) {
            std::vector<std::string> row = {"epoch", "total", "supervised", "reconstruction"};
            if (!h.validation.empty()) row.emplace_back("validation");
            csv::write_row(f, row);
            for (std::size_t e = 0; e < h.epochs(); ++e) {
                row = {std::to_string(e + 1), num(h.total[e]), num(h.supervised[e]),
                       num(h.reconstruction[e])};
                if (!h.validation.empty()) row.push_back(num(h.validation[e]));
                csv::write_row(f, row);
            }
        });
    } catch (...) {
        std::error_code ignored;
        fs::remove(o.out, ignored);
        throw;
    }
    out << "wrote " << o.out << " and " << history_path << '\n';
    return kExitOk;
}

int cmd_score(const ScoreOptions& o, std::ostream& out) {
    out << "effective config: score --ckpt " << o.ckpt << " --data " << o.data << " --out " << o.out;
    if (o.lower) out << " --lower " << num(*o.lower);
    if (o.upper) out << " --upper " << num(*o.upper);
    out << '\n';
    const auto ck = load_model(o.ckpt);
    const auto data = load_scoring_data(ck, o.data);
    auto report = make_report(data, score_dataset(ck.net, data));
    if (o.lower || o.upper) {
        report.thresholds = ThresholdPair{o.lower.value_or(-std::numeric_limits<double>::infinity()),
                                          o.upper.value_or(std::numeric_limits<double>::infinity())};
        report.flags = classify(report.scores, *report.thresholds);
    }
    write_file_atomic(o.out, [&](std::ostream& f) { write_score_report(f, report); });
    out << "scored " << report.scores.size() << " records into " << o.out << '\n';
    return kExitOk;
}

int cmd_detect(const ScoreOptions& o, std::ostream& out) {
    out << "effective config: detect --ckpt " << o.ckpt << " --data " << o.data << " --lower "
        << num(*o.lower) << " --upper " << num(*o.upper);
    if (!o.out.empty()) out << " --out " << o.out;
    out << '\n';
    const ThresholdPair pair{*o.lower, *o.upper};
    const auto ck = load_model(o.ckpt);
    const auto data = load_scoring_data(ck, o.data);
    auto report = make_report(data, score_dataset(ck.net, data));
    report.thresholds = pair;
    report.flags = classify(report.scores, pair);
    if (!o.out.empty()) {
        write_file_atomic(o.out, [&](std::ostream& f) { write_score_report(f, report); });
    }
    const auto flagged = static_cast<std::size_t>(std::count(report.flags.begin(), report.flags.end(), true));
    out << "flagged " << flagged << " of " << report.scores.size() << " records\n";
    if (data.labeled()) {
        const auto labels = data.labels();
        out << format_metrics(evaluate(report.flags, labels));
    }
    return kExitOk;
}

int cmd_sweep(const SweepOptions& o, std::ostream& out) {
    out << "effective config: sweep --ckpt " << o.ckpt << " --data " << o.data << " --objective "
        << o.objective;
    if (o.objective == "fbeta") out << " --beta " << num(o.beta);
    if (o.objective == "fpcap") out << " --fp-cap " << o.fp_cap;
    if (!o.out.empty()) out << " --out " << o.out;
    out << '\n';
    const Objective objective = o.objective == "fbeta"   ? Objective::f_beta(o.beta)
                                : o.objective == "fpcap" ? Objective::max_tp_with_fp_cap(o.fp_cap)
                                                         : Objective::f1();
    const auto ck = load_model(o.ckpt);
    const auto data = load_scoring_data(ck, o.data);
    if (!data.labeled()) {
        throw ValidationError(fmt::format("sweep needs labels; '{}' has no anomaly column", o.data));
    }
    const auto labels = data.labels();
    auto report = make_report(data, score_dataset(ck.net, data));
    const auto best = sweep_thresholds(report.scores, labels, objective);
    report.thresholds = best.thresholds;
    report.flags = classify(report.scores, best.thresholds);
    if (!o.out.empty()) {
        write_file_atomic(o.out, [&](std::ostream& f) { write_score_report(f, report); });
    }
    out << "Upper Threshold: " << num(best.thresholds.upper) << '\n'
        << "Lower Threshold: " << num(best.thresholds.lower) << '\n'
        << "Objective " << objective.describe() << ": " << num(best.objective) << '\n'
        << format_metrics(best.metrics);
    return kExitOk;
}

int cmd_synth(const SynthOptions& o, std::ostream& out) {
    out << "effective config: synth --seed " << o.seed << " --normal " << o.normal << " --anomalies "
        << o.anomalies << " --dim " << o.dim << " --shift-min " << num(o.shift_min) << " --shift-max "
        << num(o.shift_max) << " --out " << o.out << '\n';
    SyntheticConfig config;
    config.seed = o.seed;
    config.n_normal = o.normal;
    config.n_anomalies = o.anomalies;
    config.input_dim = o.dim;
    config.shift_min_factor = o.shift_min;
    config.shift_max_factor = o.shift_max;
    const auto ds = gen_synthetic(config);
    write_file_atomic(o.out, [&](std::ostream& f) { write_dataset(f, ds); });
    out << "wrote " << ds.size() << " records (" << ds.anomaly_count() << " anomalies) to " << o.out << '\n';
    return kExitOk;
}

int cmd_gradcheck(const GradcheckOptions& o, std::ostream& out) {
    out << "effective config: gradcheck --arch " << o.arch << " --seed " << o.seed << " --eps "
        << num(o.eps) << " --tol " << num(o.tol) << '\n';
    ArchitectureSpec spec;
    spec.kind = parse_architecture(o.arch);
    const auto net = build_model(spec, o.seed);
    Rng rng(o.seed, streams::kGradcheck);
    Record sample;
    sample.features.resize(spec.input_dim);
    for (auto& v : sample.features) v = rng.uniform01();
    sample.label = rng.uniform01() < 0.5 ? 1 : 0;
    const double err = gradient_check(net, sample, LossConfig{}, o.eps, spec.supervised());
    out << "max relative error: " << num(err) << '\n';
    if (!(err < o.tol)) {
        out << "FAILED (tolerance " << num(o.tol) << ")\n";
        return kExitRuntime;
    }
    return kExitOk;
}

int cmd_hist(const HistOptions& o, std::ostream& out) {
    out << "effective config: hist --scores " << o.scores << " --bins " << o.bins << " --out " << o.out << '\n';
    require_file(o.scores);
    std::ifstream in(o.scores, std::ios::binary);
    const auto report = read_score_report(in);
    std::vector<int> labels;
    if (!report.labels.empty() &&
        std::all_of(report.labels.begin(), report.labels.end(), [](const auto& l) { return l.has_value(); })) {
        for (const auto& l : report.labels) labels.push_back(*l);
    }
    const auto bins = export_histogram(report.scores, labels, o.bins);
    write_file_atomic(o.out, [&](std::ostream& f) { write_histogram(f, bins); });
    out << "wrote " << bins.size() << " bins to " << o.out << '\n';
    return kExitOk;
}

int cmd_join(const JoinOptions& o, std::ostream& out) {
    out << "effective config: join --meter " << o.meter << " --buildings " << o.buildings
        << " --weather " << o.weather << " --out " << o.out;
    if (!o.report.empty()) out << " --report " << o.report;
    out << '\n';
    require_file(o.meter);
    require_file(o.buildings);
    require_file(o.weather);
    const auto joined = join_sources(fs::path(o.meter), fs::path(o.buildings), fs::path(o.weather));
    const auto summary = joined.report.summary();
    try {
        write_file_atomic(o.out, [&](std::ostream& f) { write_dataset(f, joined.dataset); });
        if (!o.report.empty()) {
            write_file_atomic(o.report, [&](std::ostream& f) { f << summary; });
        }
    } catch (...) {
        std::error_code ignored;
        fs::remove(o.out, ignored);
        throw;
    }
    out << summary;
    return kExitOk;
}

}  // namespace

int run_cli(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Autoencoder anomaly detection for tabular building-energy data", "aead"};
    app.require_subcommand(1);

    TrainOptions train_o;
    auto* train_cmd = app.add_subcommand("train", "Train a model and write a checkpoint plus loss history");
    opt(train_cmd, "--arch", train_o.arch, "simple | deep | sdae")
        ->required()
        ->check(CLI::IsMember({"simple", "deep", "sdae"}));
    opt(train_cmd, "--data", train_o.data, "Training CSV")->required();
    opt(train_cmd, "--epochs", train_o.epochs, "Epochs")->check(CLI::Range(std::size_t{1}, SIZE_MAX));
    opt(train_cmd, "--batch", train_o.batch, "Mini-batch size")->check(CLI::Range(std::size_t{1}, SIZE_MAX));
    opt(train_cmd, "--lr", train_o.lr, "Learning rate")->check(CLI::NonNegativeNumber);
    opt(train_cmd, "--seed", train_o.seed, "Seed for initialization and shuffling");
    opt(train_cmd, "--out", train_o.out, "Checkpoint path")->required();
    opt(train_cmd, "--history", train_o.history, "Loss history CSV (default <out>.history.csv)");
    opt(train_cmd, "--w-s", train_o.w_s, "Supervised loss weight")->check(CLI::NonNegativeNumber);
    opt(train_cmd, "--w-ae", train_o.w_ae, "Reconstruction loss weight")->check(CLI::NonNegativeNumber);
    opt(train_cmd, "--clamp-eps", train_o.clamp_eps, "BCE probability clamp")
        ->check(CLI::Range(std::numeric_limits<double>::min(), 0.4999999999));
    opt(train_cmd, "--hidden", train_o.hidden, "Hidden width (simple only)");
    opt(train_cmd, "--latent", train_o.latent, "Latent width");
    opt(train_cmd, "--val-fraction", train_o.val_fraction, "Held-out validation fraction")
        ->check(CLI::Range(0.0, 0.999999));
    opt(train_cmd, "--log-every", train_o.log_every, "Print the loss every N epochs (0: off)");

    ScoreOptions score_o;
    auto* score_cmd = app.add_subcommand("score", "Write per-record anomaly scores");
    opt(score_cmd, "--ckpt", score_o.ckpt, "Checkpoint")->required();
    opt(score_cmd, "--data", score_o.data, "Records to score")->required();
    opt(score_cmd, "--out", score_o.out, "Score report CSV")->required();
    opt(score_cmd, "--lower", score_o.lower, "Optional lower threshold for the flag column");
    opt(score_cmd, "--upper", score_o.upper, "Optional upper threshold for the flag column");

    ScoreOptions detect_o;
    auto* detect_cmd = app.add_subcommand("detect", "Flag records outside a threshold band");
    opt(detect_cmd, "--ckpt", detect_o.ckpt, "Checkpoint")->required();
    opt(detect_cmd, "--data", detect_o.data, "Records to classify")->required();
    opt(detect_cmd, "--lower", detect_o.lower, "Lower threshold")->required();
    opt(detect_cmd, "--upper", detect_o.upper, "Upper threshold")->required();
    opt(detect_cmd, "--out", detect_o.out, "Optional score report CSV");

    SweepOptions sweep_o;
    auto* sweep_cmd = app.add_subcommand("sweep", "Search the threshold pair that maximizes an objective");
    opt(sweep_cmd, "--ckpt", sweep_o.ckpt, "Checkpoint")->required();
    opt(sweep_cmd, "--data", sweep_o.data, "Labeled records")->required();
    opt(sweep_cmd, "--objective", sweep_o.objective, "f1 | fbeta | fpcap")
        ->check(CLI::IsMember({"f1", "fbeta", "fpcap"}));
    opt(sweep_cmd, "--beta", sweep_o.beta, "Beta for fbeta")->check(CLI::PositiveNumber);
    opt(sweep_cmd, "--fp-cap", sweep_o.fp_cap, "False-positive cap for fpcap");
    opt(sweep_cmd, "--out", sweep_o.out, "Optional score report CSV with the chosen flags");

    SynthOptions synth_o;
    auto* synth_cmd = app.add_subcommand("synth", "Generate a labeled synthetic dataset");
    opt(synth_cmd, "--seed", synth_o.seed, "Seed");
    opt(synth_cmd, "--normal", synth_o.normal, "Normal records");
    opt(synth_cmd, "--anomalies", synth_o.anomalies, "Planted anomalies");
    opt(synth_cmd, "--dim", synth_o.dim, "Feature count")->check(CLI::Range(std::size_t{3}, SIZE_MAX));
    opt(synth_cmd, "--shift-min", synth_o.shift_min, "Minimum anomaly shift, in noise units")
        ->check(CLI::Range(10.0, std::numeric_limits<double>::max()));
    opt(synth_cmd, "--shift-max", synth_o.shift_max, "Maximum anomaly shift, in noise units")
        ->check(CLI::Range(10.0, std::numeric_limits<double>::max()));
    opt(synth_cmd, "--out", synth_o.out, "Output CSV")->required();

    GradcheckOptions grad_o;
    auto* grad_cmd = app.add_subcommand("gradcheck", "Compare analytic and finite-difference gradients");
    opt(grad_cmd, "--arch", grad_o.arch, "simple | deep | sdae")
        ->required()
        ->check(CLI::IsMember({"simple", "deep", "sdae"}));
    opt(grad_cmd, "--seed", grad_o.seed, "Seed");
    opt(grad_cmd, "--eps", grad_o.eps, "Finite-difference step")->check(CLI::PositiveNumber);
    opt(grad_cmd, "--tol", grad_o.tol, "Maximum accepted relative error")->check(CLI::PositiveNumber);

    HistOptions hist_o;
    auto* hist_cmd = app.add_subcommand("hist", "Histogram of a score report, split by label");
    opt(hist_cmd, "--scores", hist_o.scores, "Score report CSV")->required();
    opt(hist_cmd, "--bins", hist_o.bins, "Bin count")->check(CLI::Range(std::size_t{1}, SIZE_MAX));
    opt(hist_cmd, "--out", hist_o.out, "Histogram CSV")->required();

    JoinOptions join_o;
    auto* join_cmd = app.add_subcommand("join", "Join meter, building and weather tables into records");
    opt(join_cmd, "--meter", join_o.meter, "Meter readings CSV (train.csv)")->required();
    opt(join_cmd, "--buildings", join_o.buildings, "Building metadata CSV")->required();
    opt(join_cmd, "--weather", join_o.weather, "Weather CSV")->required();
    opt(join_cmd, "--out", join_o.out, "Joined records CSV")->required();
    opt(join_cmd, "--report", join_o.report, "Optional join report path");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
        if (detect_cmd->parsed() && !(*detect_o.lower <= *detect_o.upper)) {
            throw CLI::ValidationError("--lower", "must not exceed --upper");
        }
        if (score_cmd->parsed() && score_o.lower && score_o.upper && !(*score_o.lower <= *score_o.upper)) {
            throw CLI::ValidationError("--lower", "must not exceed --upper");
        }
        if (synth_cmd->parsed() && synth_o.shift_max < synth_o.shift_min) {
            throw CLI::ValidationError("--shift-max", "must not be below --shift-min");
        }
        if (train_cmd->parsed()) {
            ArchitectureSpec probe;
            probe.kind = parse_architecture(train_o.arch);
            probe.hidden_dim = train_o.hidden;
            probe.latent_dim = train_o.latent;
            probe.input_dim = std::max({probe.input_dim, train_o.hidden + 1, train_o.latent + 1});
            try {
                probe.validate();
            } catch (const ConfigError& e) {
                throw CLI::ValidationError("--hidden/--latent", e.what());
            }
        }
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == static_cast<int>(CLI::ExitCodes::Success)) {
            app.exit(e, out, err);
            return kExitOk;
        }
        err << "error: " << e.what() << "\n\n" << app.help();
        return kExitUsage;
    }

    try {
        if (train_cmd->parsed()) return cmd_train(train_o, out);
        if (score_cmd->parsed()) return cmd_score(score_o, out);
        if (detect_cmd->parsed()) return cmd_detect(detect_o, out);
        if (sweep_cmd->parsed()) return cmd_sweep(sweep_o, out);
        if (synth_cmd->parsed()) return cmd_synth(synth_o, out);
        if (grad_cmd->parsed()) return cmd_gradcheck(grad_o, out);
        if (hist_cmd->parsed()) return cmd_hist(hist_o, out);
        if (join_cmd->parsed()) return cmd_join(join_o, out);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitUsage;
}

}  // namespace aead
