#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <vector>

#include "doctest.h"

#include "aead/detect.hpp"
#include "aead/error.hpp"
#include "aead/models.hpp"
#include "aead/rng.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace aead;

namespace {

std::vector<bool> bits(std::initializer_list<int> v) {
    std::vector<bool> out;
    for (int x : v) out.push_back(x != 0);
    return out;
}

Metrics metrics_of(std::size_t total, std::size_t anomalies, std::size_t tp, std::size_t fp) {
    std::vector<int> labels(total, 0);
    std::fill_n(labels.begin(), anomalies, 1);
    std::vector<bool> flags(total, false);
    for (std::size_t i = 0; i < tp; ++i) flags[i] = true;
    for (std::size_t i = 0; i < fp; ++i) flags[anomalies + i] = true;
    return evaluate(flags, labels);
}

}  // namespace

TEST_SUITE("detect") {

TEST_CASE("score_dataset examples") {
    Dataset ds;
    ds.records.push_back(Record{{0.1, 0.2, 0.3}, std::nullopt});
    ds.records.push_back(Record{{5, -1, 2}, std::nullopt});
    auto id = test::identity_net(3);
    for (double s : score_dataset(id, ds)) CHECK(s == 0.0);

    auto shifted = id;
    shifted.layers[0].biases = {1.0, 0.0, 0.0};
    Dataset one;
    one.records.push_back(Record{{0.5, 0.25, 0.75}, std::nullopt});
    CHECK(score_dataset(shifted, one) == std::vector<double>{1.0});

    Dataset wide;
    wide.records.push_back(Record{{1, 2}, std::nullopt});
    CHECK_THROWS_AS(score_dataset(id, wide), ShapeError);
}

TEST_CASE("scores follow a permutation of the records") {
    auto net = build_model(ArchitectureSpec{}, 4);
    Rng rng(6);
    Dataset ds;
    for (int i = 0; i < 30; ++i) {
        Record r;
        r.features.resize(13);
        for (auto& v : r.features) v = rng.uniform01();
        ds.records.push_back(r);
    }
    const auto scores = score_dataset(net, ds);
    std::vector<std::size_t> perm(30);
    std::iota(perm.begin(), perm.end(), 0);
    rng.shuffle(std::span<std::size_t>(perm));
    Dataset permuted;
    for (auto i : perm) permuted.records.push_back(ds.records[i]);
    const auto ps = score_dataset(net, permuted);
    for (std::size_t k = 0; k < 30; ++k) CHECK(ps[k] == scores[perm[k]]);
}

TEST_CASE("classify examples") {
    const std::vector<double> s{0.1, 0.5, 0.9};
    CHECK(classify(s, {0.2, 0.8}) == bits({1, 0, 1}));
    CHECK(classify(s, {0.2, 0.9}) == bits({1, 0, 0}));
    CHECK(classify(s, {0.1, 0.5}) == bits({0, 0, 1}));
    CHECK(classify(s, {0.0, 1e300}) == bits({0, 0, 0}));
    CHECK_THROWS_AS(classify(s, {0.8, 0.2}), PreconditionError);
    CHECK_THROWS_AS(classify(s, {std::nan(""), 0.2}), PreconditionError);
}

TEST_CASE("classify is translation invariant and monotone in the band") {
    Rng rng(12);
    // Dyadic values keep every shifted comparison exact.
    auto dyadic = [&](double lo, double hi) { return std::ldexp(std::floor(std::ldexp(rng.uniform(lo, hi), 20)), -20); };
    const auto count = [](const std::vector<bool>& f) { return std::count(f.begin(), f.end(), true); };
    for (int t = 0; t < 100; ++t) {
        std::vector<double> s(50);
        for (auto& v : s) v = dyadic(0, 1);
        const double lo = dyadic(0, 0.5);
        const double hi = dyadic(0.5, 1);
        const double c = dyadic(-5, 5);
        std::vector<double> shifted(s);
        for (auto& v : shifted) v += c;
        CHECK(classify(shifted, {lo + c, hi + c}) == classify(s, {lo, hi}));
        CHECK(count(classify(s, {lo - 0.1, hi + 0.1})) <= count(classify(s, {lo, hi})));
    }
}

TEST_CASE("evaluate examples") {
    const std::vector<int> labels{1, 0, 0, 1};
    const auto m = evaluate(bits({1, 0, 1, 1}), labels);
    CHECK(m == Metrics{3, 2, 1, 0});

    const auto perfect = metrics_of(8784, 593, 593, 0);
    CHECK(perfect == Metrics{593, 593, 0, 0});

    const auto sdae = metrics_of(8782, 273, 153, 398);
    CHECK(sdae.detected == 551);
    CHECK(sdae.detected == sdae.true_positives + sdae.false_positives);
    CHECK(sdae.missed == 120);
}

TEST_CASE("evaluate conservation on random inputs") {
    Rng rng(14);
    for (int t = 0; t < 100; ++t) {
        const std::size_t n = 1 + rng.below(100);
        std::vector<int> labels(n);
        std::vector<bool> flags(n);
        for (std::size_t i = 0; i < n; ++i) {
            labels[i] = static_cast<int>(rng.below(2));
            flags[i] = rng.below(2) == 1;
        }
        const auto m = evaluate(flags, labels);
        const auto anomalies = static_cast<std::size_t>(std::count(labels.begin(), labels.end(), 1));
        const auto flagged = static_cast<std::size_t>(std::count(flags.begin(), flags.end(), true));
        CHECK(m.detected == m.true_positives + m.false_positives);
        CHECK(m.true_positives + m.missed == anomalies);
        CHECK(m.detected == flagged);
    }
}

TEST_CASE("evaluate errors") {
    CHECK_THROWS_AS(evaluate(bits({1, 0}), std::vector<int>{1}), ShapeError);
    CHECK_THROWS_AS(evaluate(bits({1, 0}), std::vector<int>{1, 2}), ValidationError);
}

TEST_CASE("format_metrics block") {
    CHECK(format_metrics(Metrics{551, 153, 398, 120}) ==
          "Detected: 551\nTrue Positives: 153\nFalse Positives: 398\nMissed: 120\n");
}

TEST_CASE("objectives") {
    const Metrics m{4, 3, 1, 1};
    CHECK(Objective::f1().value(m) == doctest::Approx(0.75));
    CHECK(Objective::f_beta(1.0).value(m) == doctest::Approx(0.75));
    CHECK(Objective::f_beta(2.0).value(m) == doctest::Approx(5.0 * 0.75 * 0.75 / (4 * 0.75 + 0.75)));
    CHECK(Objective::max_tp_with_fp_cap(1).value(m) == 3.0);
    CHECK(Objective::max_tp_with_fp_cap(0).value(m) == -std::numeric_limits<double>::infinity());
    CHECK(Objective::f1().value(Metrics{0, 0, 0, 5}) == 0.0);
    CHECK_THROWS_AS(Objective::f_beta(0.0), ConfigError);
    CHECK(Objective::f1().describe() == "f1");
}

TEST_CASE("sweep example") {
    const std::vector<double> s{0.1, 0.2, 0.9};
    const std::vector<int> l{0, 0, 1};
    const auto r = sweep_thresholds(s, l, Objective::f1());
    CHECK(r.objective == 1.0);
    CHECK(r.thresholds.lower < 0.1);
    CHECK(r.thresholds.upper > 0.2);
    CHECK(r.thresholds.upper < 0.9);
    CHECK(r.metrics == Metrics{1, 1, 0, 0});
}

TEST_CASE("sweep with every record anomalous flags everything") {
    const std::vector<double> s{0.3, 0.1, 0.7, 0.7};
    const std::vector<int> l{1, 1, 1, 1};
    const auto r = sweep_thresholds(s, l, Objective::f1());
    CHECK(r.objective == 1.0);
    CHECK(r.metrics == Metrics{4, 4, 0, 0});
}

TEST_CASE("sweep separates a perfectly separable set") {
    Rng rng(20);
    std::vector<double> s;
    std::vector<int> l;
    for (int i = 0; i < 300; ++i) {
        s.push_back(rng.uniform(0.1, 0.2));
        l.push_back(0);
    }
    for (int i = 0; i < 20; ++i) {
        s.push_back(rng.uniform(0.5, 0.9));
        l.push_back(1);
    }
    for (int i = 0; i < 10; ++i) {
        s.push_back(rng.uniform(0.0, 0.05));
        l.push_back(1);
    }
    const auto r = sweep_thresholds(s, l, Objective::f1());
    CHECK(r.metrics == Metrics{30, 30, 0, 0});
    CHECK(r.thresholds.lower > 0.05);
    CHECK(r.thresholds.lower < 0.1);
    CHECK(r.thresholds.upper > 0.2);
    CHECK(r.thresholds.upper < 0.5);
}

TEST_CASE("sweep ties go to fewer false positives, then the narrower band") {
    const std::vector<double> s{0.1, 0.2, 0.3, 0.9};
    const std::vector<int> l{0, 0, 0, 1};
    const auto r = sweep_thresholds(s, l, Objective::max_tp_with_fp_cap(3));
    CHECK(r.metrics == Metrics{1, 1, 0, 0});
    CHECK(r.thresholds.lower == doctest::Approx(-0.9));
    CHECK(r.thresholds.upper == doctest::Approx(0.6));

    const std::vector<int> all{1, 1, 1, 1};
    const auto everything = sweep_thresholds(s, all, Objective::f1());
    CHECK(everything.thresholds.lower == everything.thresholds.upper);
}

TEST_CASE("sweep matches the brute-force oracle") {
    Rng rng(33);
    for (int t = 0; t < 60; ++t) {
        const std::size_t n = 1 + rng.below(80);
        std::vector<double> s(n);
        std::vector<int> l(n);
        for (std::size_t i = 0; i < n; ++i) {
            // Coarse grid so that ties are common.
            s[i] = static_cast<double>(rng.below(12)) / 8.0;
            l[i] = rng.uniform01() < 0.3 ? 1 : 0;
        }
        l[rng.below(n)] = 1;
        CAPTURE(t);
        CHECK(sweep_thresholds(s, l, Objective::f1()).objective ==
              doctest::Approx(test::brute_force_best(s, l, test::OracleObjective::F1)).epsilon(1e-12));
        CHECK(sweep_thresholds(s, l, Objective::f_beta(2.0)).objective ==
              doctest::Approx(test::brute_force_best(s, l, test::OracleObjective::F2)).epsilon(1e-12));
        CHECK(sweep_thresholds(s, l, Objective::max_tp_with_fp_cap(3)).objective ==
              test::brute_force_best(s, l, test::OracleObjective::FpCap3));
    }
}

TEST_CASE("sweep reports consistent metrics") {
    Rng rng(34);
    for (int t = 0; t < 30; ++t) {
        const std::size_t n = 2 + rng.below(60);
        std::vector<double> s(n);
        std::vector<int> l(n);
        for (std::size_t i = 0; i < n; ++i) {
            s[i] = rng.uniform(0, 1);
            l[i] = static_cast<int>(rng.below(2));
        }
        l[0] = 1;
        const auto r = sweep_thresholds(s, l, Objective::f1());
        CHECK(r.thresholds.lower <= r.thresholds.upper);
        CHECK(evaluate(classify(s, r.thresholds), l) == r.metrics);
        CHECK(Objective::f1().value(r.metrics) == r.objective);
    }
}

TEST_CASE("sweep preconditions") {
    const std::vector<double> s{0.1, 0.2};
    CHECK_THROWS_AS(sweep_thresholds(s, std::vector<int>{0, 0}, Objective::f1()), PreconditionError);
    CHECK_THROWS_AS(sweep_thresholds(s, std::vector<int>{1}, Objective::f1()), ShapeError);
    const std::vector<double> bad{0.1, std::nan("")};
    CHECK_THROWS_AS(sweep_thresholds(bad, std::vector<int>{1, 0}, Objective::f1()), NumericError);
}

TEST_CASE("histogram examples") {
    const std::vector<double> s{0.0, 1.0};
    const auto h = export_histogram(s, std::vector<int>{0, 1}, 2);
    REQUIRE(h.size() == 2);
    CHECK(h[0].lo == 0.0);
    CHECK(h[0].hi == 0.5);
    CHECK(h[1].lo == 0.5);
    CHECK(h[1].hi == 1.0);
    CHECK(h[0].count_normal == 1);
    CHECK(h[0].count_anomalous == 0);
    CHECK(h[1].count_normal == 0);
    CHECK(h[1].count_anomalous == 1);

    const std::vector<double> same{0.4, 0.4, 0.4};
    const auto one = export_histogram(same, std::vector<int>{}, 5);
    REQUIRE(one.size() == 1);
    CHECK(one[0].count_normal == 3);

    CHECK_THROWS_AS(export_histogram(std::vector<double>{}, std::vector<int>{}, 3), PreconditionError);
    CHECK_THROWS_AS(export_histogram(s, std::vector<int>{}, 0), PreconditionError);
}

TEST_CASE("histogram conserves counts and respects bin edges") {
    Rng rng(40);
    for (int t = 0; t < 50; ++t) {
        const std::size_t n = 1 + rng.below(300);
        const std::size_t bins = 1 + rng.below(20);
        std::vector<double> s(n);
        std::vector<int> l(n);
        for (std::size_t i = 0; i < n; ++i) {
            s[i] = rng.uniform(-3, 3);
            l[i] = static_cast<int>(rng.below(2));
        }
        const auto h = export_histogram(s, l, bins);
        std::size_t total = 0, anomalous = 0;
        for (const auto& b : h) {
            total += b.count_normal + b.count_anomalous;
            anomalous += b.count_anomalous;
        }
        CHECK(total == n);
        CHECK(anomalous == static_cast<std::size_t>(std::count(l.begin(), l.end(), 1)));
        CHECK(h.front().lo == *std::min_element(s.begin(), s.end()));
        CHECK(h.back().hi == *std::max_element(s.begin(), s.end()));
        // every score falls in exactly the bin [lo, hi), last bin closed
        for (std::size_t i = 0; i < n; ++i) {
            std::size_t hits = 0;
            for (std::size_t b = 0; b < h.size(); ++b) {
                const bool last = b + 1 == h.size();
                if (s[i] >= h[b].lo && (s[i] < h[b].hi || (last && s[i] <= h[b].hi))) ++hits;
            }
            CHECK(hits == 1);
        }
    }
}

TEST_CASE("score report round-trip") {
    ScoreReport rep;
    rep.scores = {0.125, 1.0 / 3.0, 2.5e-17};
    rep.thresholds = ThresholdPair{0.2, 0.3};
    rep.flags = classify(rep.scores, *rep.thresholds);
    rep.labels = {1, 0, 1};
    std::ostringstream out;
    write_score_report(out, rep);
    CHECK(out.str().rfind("row_index,score,flagged,label\n", 0) == 0);
    std::istringstream in(out.str());
    const auto back = read_score_report(in);
    CHECK(back.scores == rep.scores);
    CHECK(back.labels == rep.labels);

    ScoreReport unl;
    unl.scores = {0.5};
    std::ostringstream o2;
    write_score_report(o2, unl);
    CHECK(o2.str() == "row_index,score,flagged\n0,0.5,0\n");
}

TEST_CASE("histogram csv") {
    std::ostringstream out;
    const auto h = export_histogram(std::vector<double>{0.0, 1.0}, std::vector<int>{0, 1}, 2);
    write_histogram(out, h);
    CHECK(out.str() == "bin_lo,bin_hi,count_normal,count_anomalous\n0,0.5,1,0\n0.5,1,0,1\n");
}

}  // TEST_SUITE
