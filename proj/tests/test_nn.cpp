#include <cmath>
#include <limits>
#include <vector>

#include "doctest.h"

#include "aead/error.hpp"
#include "aead/gradcheck.hpp"
#include "aead/models.hpp"
#include "aead/nn.hpp"
#include "aead/rng.hpp"
#include "support.hpp"

using namespace aead;
using aead::test::identity_net;
using aead::test::make_layer;

namespace {

double act_ref(Activation a, double v) {
    switch (a) {
        case Activation::ReLU:
            return v > 0.0 ? v : 0.0;
        case Activation::Sigmoid:
            return 1.0 / (1.0 + std::exp(-v));
        case Activation::Tanh:
            return std::tanh(v);
        case Activation::Linear:
            break;
    }
    return v;
}

// Plain loop forward pass written against the layer fields only.
struct RefOut {
    std::vector<double> latent;
    std::vector<double> output;
};

RefOut forward_ref(const Network& net, std::vector<double> x) {
    RefOut r;
    for (std::size_t k = 0; k < net.layers.size(); ++k) {
        const auto& L = net.layers[k];
        std::vector<double> y(L.weights.rows());
        for (std::size_t i = 0; i < y.size(); ++i) {
            double s = L.biases[i];
            for (std::size_t j = 0; j < x.size(); ++j) s += L.weights(i, j) * x[j];
            y[i] = act_ref(L.activation, s);
        }
        x = y;
        if (k == net.latent_index) r.latent = x;
    }
    r.output = x;
    return r;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double rel_err(double a, double n) {
    return std::abs(a - n) / std::max({std::abs(a), std::abs(n), 1e-12});
}

}  // namespace

TEST_SUITE("nn") {

TEST_CASE("dense_forward examples") {
    auto id = make_layer(2, 2, {1, 0, 0, 1}, {0, 0}, Activation::Linear);
    CHECK(dense_forward(id, std::vector<double>{3, 4}) == std::vector<double>{3, 4});

    auto affine = make_layer(2, 2, {1, 2, 3, 4}, {1, 1}, Activation::Linear);
    CHECK(dense_forward(affine, std::vector<double>{1, 1}) == std::vector<double>{4, 8});

    auto sig = make_layer(1, 3, {0, 0, 0}, {0.5}, Activation::Sigmoid);
    auto y = dense_forward(sig, std::vector<double>{7, -2, 100});
    REQUIRE(y.size() == 1);
    CHECK(y[0] == doctest::Approx(0.622459).epsilon(1e-6));
}

TEST_CASE("dense_forward rejects wrong input length") {
    auto layer = make_layer(2, 2, {1, 0, 0, 1}, {0, 0}, Activation::Linear);
    CHECK_THROWS_AS(dense_forward(layer, std::vector<double>{1, 2, 3}), ShapeError);
}

TEST_CASE("apply_activation examples") {
    CHECK(apply_activation(Activation::ReLU, std::vector<double>{-1, 2}) == std::vector<double>{0, 2});
    CHECK(apply_activation(Activation::Sigmoid, std::vector<double>{0})[0] == 0.5);
    CHECK(apply_activation(Activation::Sigmoid, std::vector<double>{std::log(3.0)})[0] ==
          doctest::Approx(0.75).epsilon(1e-12));
    CHECK(apply_activation(Activation::Linear, std::vector<double>{-3.5})[0] == -3.5);
    CHECK(apply_activation(Activation::Tanh, std::vector<double>{0.5})[0] == std::tanh(0.5));
}

TEST_CASE("ReLU outputs are non-negative and sigmoid outputs stay inside (0, 1)") {
    Rng rng(11);
    std::vector<double> v(500);
    for (auto& x : v) x = rng.uniform(-30.0, 30.0);
    for (double y : apply_activation(Activation::ReLU, v)) CHECK(y >= 0.0);
    for (double y : apply_activation(Activation::Sigmoid, v)) {
        CHECK(y > 0.0);
        CHECK(y < 1.0);
    }
}

TEST_CASE("activation names round-trip") {
    for (auto a : {Activation::ReLU, Activation::Sigmoid, Activation::Linear, Activation::Tanh}) {
        CHECK(parse_activation(to_string(a)) == a);
    }
    CHECK_THROWS_AS(parse_activation("swish"), FormatError);
}

TEST_CASE("network_forward examples") {
    auto id = identity_net(2);
    auto r = network_forward(id, std::vector<double>{1, 2});
    CHECK(r.output == std::vector<double>{1, 2});

    Network two;
    two.layers.push_back(make_layer(1, 1, {2}, {0}, Activation::Linear));
    two.layers.push_back(make_layer(1, 1, {3}, {0}, Activation::Linear));
    two.latent_index = 0;
    auto r2 = network_forward(two, std::vector<double>{1});
    CHECK(r2.latent == std::vector<double>{2});
    CHECK(r2.output == std::vector<double>{6});

    CHECK_THROWS_AS(network_forward(two, std::vector<double>{1, 2}), ShapeError);
}

TEST_CASE("forward pass is deterministic and matches a loop oracle") {
    ArchitectureSpec spec;
    auto net = build_model(spec, 3);
    Rng rng(4);
    std::vector<double> x(13);
    for (auto& v : x) v = rng.uniform01();
    auto a = network_forward(net, x);
    auto b = network_forward(net, x);
    CHECK(a.output == b.output);
    CHECK(a.latent == b.latent);
    auto ref = forward_ref(net, x);
    REQUIRE(ref.output.size() == a.output.size());
    for (std::size_t i = 0; i < ref.output.size(); ++i) CHECK(a.output[i] == doctest::Approx(ref.output[i]).epsilon(1e-12));
    for (std::size_t i = 0; i < ref.latent.size(); ++i) CHECK(a.latent[i] == doctest::Approx(ref.latent[i]).epsilon(1e-12));
}

TEST_CASE("network_backward base cases") {
    Network one;
    one.layers.push_back(make_layer(1, 1, {0.7}, {0}, Activation::Linear));
    auto fwd = network_forward(one, std::vector<double>{2});
    auto g = network_backward(one, fwd.cache, std::vector<double>{1}, std::vector<double>{0});
    CHECK(g.layers[0].weights(0, 0) == 2.0);
    CHECK(g.layers[0].biases[0] == 1.0);

    auto net = build_model(ArchitectureSpec{}, 9);
    std::vector<double> x(13, 0.3);
    auto f = network_forward(net, x);
    auto zero = network_backward(net, f.cache, std::vector<double>(13, 0.0), std::vector<double>(2, 0.0));
    CHECK(zero == GradientSet::zeros_like(net));
}

TEST_CASE("network_backward rejects mismatched gradients") {
    auto net = build_model(ArchitectureSpec{}, 9);
    std::vector<double> x(13, 0.3);
    auto f = network_forward(net, x);
    CHECK_THROWS_AS(network_backward(net, f.cache, std::vector<double>(12, 0.0), std::vector<double>(2, 0.0)),
                    ShapeError);
    CHECK_THROWS_AS(network_backward(net, f.cache, std::vector<double>(13, 0.0), std::vector<double>(3, 0.0)),
                    ShapeError);
}

TEST_CASE("3-4-2 network gradients match central differences") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        std::vector<std::size_t> dims{3, 4, 2};
        for (auto hidden : {Activation::ReLU, Activation::Tanh, Activation::Sigmoid}) {
            std::vector<Activation> acts{hidden, Activation::Sigmoid};
            auto net = init_network(dims, acts, seed);
            // Non-zero biases so that every code path is exercised.
            Rng rng(seed, 99);
            for (auto& L : net.layers)
                for (auto& b : L.biases) b = rng.uniform(-0.5, 0.5);
            std::vector<double> x{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
            std::vector<double> c{rng.uniform(-1, 1), rng.uniform(-1, 1)};
            std::vector<double> d(net.latent_dim());
            for (auto& v : d) v = rng.uniform(-1, 1);

            // L = c . output + d . latent
            auto loss = [&](const Network& n) {
                auto r = forward_ref(n, x);
                return dot(c, r.output) + dot(d, r.latent);
            };
            auto fwd = network_forward(net, x);
            auto g = network_backward(net, fwd.cache, c, d);

            const double eps = 1e-5;
            double worst = 0.0;
            for (std::size_t k = 0; k < net.layers.size(); ++k) {
                auto& L = net.layers[k];
                for (std::size_t i = 0; i < L.weights.values().size(); ++i) {
                    Network p = net;
                    Network m = net;
                    p.layers[k].weights.values()[i] += eps;
                    m.layers[k].weights.values()[i] -= eps;
                    double num = (loss(p) - loss(m)) / (2 * eps);
                    double ana = g.layers[k].weights.values()[i];
                    if (std::abs(num) > 1e-7 || std::abs(ana) > 1e-7) worst = std::max(worst, rel_err(ana, num));
                }
                for (std::size_t i = 0; i < L.biases.size(); ++i) {
                    Network p = net;
                    Network m = net;
                    p.layers[k].biases[i] += eps;
                    m.layers[k].biases[i] -= eps;
                    double num = (loss(p) - loss(m)) / (2 * eps);
                    double ana = g.layers[k].biases[i];
                    if (std::abs(num) > 1e-7 || std::abs(ana) > 1e-7) worst = std::max(worst, rel_err(ana, num));
                }
            }
            CAPTURE(seed);
            CHECK(worst < 1e-4);
        }
    }
}

TEST_CASE("init_network bound, zero biases and determinism") {
    std::vector<std::size_t> dims{6, 2};
    std::vector<Activation> acts{Activation::Linear};
    auto net = init_network(dims, acts, 1);
    const double bound = std::sqrt(6.0 / 8.0);
    CHECK(bound == doctest::Approx(0.8660).epsilon(1e-4));
    for (double w : net.layers[0].weights.values()) CHECK(std::abs(w) <= bound);

    auto deep = build_model(ArchitectureSpec{}, 5);
    for (const auto& L : deep.layers) {
        const double b = std::sqrt(6.0 / static_cast<double>(L.in_dim() + L.out_dim()));
        for (double w : L.weights.values()) CHECK(std::abs(w) <= b);
        for (double v : L.biases) CHECK(v == 0.0);
    }

    CHECK(init_network(dims, acts, 7) == init_network(dims, acts, 7));
    CHECK(init_network(dims, acts, 1) != init_network(dims, acts, 2));
}

TEST_CASE("init_network rejects bad shapes") {
    std::vector<Activation> none;
    CHECK_THROWS_AS(init_network(std::vector<std::size_t>{}, none, 1), ConfigError);
    CHECK_THROWS_AS(init_network(std::vector<std::size_t>{4}, none, 1), ConfigError);
    std::vector<Activation> one{Activation::Linear};
    CHECK_THROWS_AS(init_network(std::vector<std::size_t>{4, 0}, one, 1), ConfigError);
    CHECK_THROWS_AS(init_network(std::vector<std::size_t>{4, 3, 2}, one, 1), ConfigError);
}

TEST_CASE("init_network places the latent at the first narrowest layer") {
    std::vector<std::size_t> dims{5, 3, 2, 3, 5};
    std::vector<Activation> acts(4, Activation::Tanh);
    CHECK(init_network(dims, acts, 1).latent_index == 1);
}

TEST_CASE("sgd_step examples") {
    Network net;
    net.layers.push_back(make_layer(1, 1, {1.0}, {0.0}, Activation::Linear));
    auto g = GradientSet::zeros_like(net);
    g.layers[0].weights(0, 0) = 0.5;
    auto stepped = sgd_step(net, g, 0.1);
    CHECK(stepped.layers[0].weights(0, 0) == doctest::Approx(0.95).epsilon(1e-15));

    CHECK(sgd_step(net, g, 0.0) == net);
    auto big = build_model(ArchitectureSpec{}, 3);
    CHECK(sgd_step(big, GradientSet::zeros_like(big), 0.5) == big);
}

TEST_CASE("sgd_step rejects mismatched gradients and bad learning rates") {
    auto a = build_model(ArchitectureSpec{}, 3);
    ArchitectureSpec simple;
    simple.kind = ArchitectureKind::SimpleAE;
    auto b = build_model(simple, 3);
    CHECK_THROWS_AS(sgd_step(a, GradientSet::zeros_like(b), 0.1), ShapeError);
    CHECK_THROWS_AS(sgd_step(a, GradientSet::zeros_like(a), -0.1), PreconditionError);
    CHECK_THROWS_AS(sgd_step(a, GradientSet::zeros_like(a), std::numeric_limits<double>::quiet_NaN()),
                    PreconditionError);
}

TEST_CASE("gradient set arithmetic") {
    auto net = build_model(ArchitectureSpec{}, 2);
    auto g = GradientSet::zeros_like(net);
    CHECK(g.congruent_with(net));
    CHECK(g.all_finite());
    auto h = g;
    h.layers[0].weights(0, 0) = 2.0;
    g.add_scaled(h, 0.5);
    CHECK(g.layers[0].weights(0, 0) == 1.0);
    g.scale(3.0);
    CHECK(g.layers[0].weights(0, 0) == 3.0);
    g.layers[1].biases[0] = std::numeric_limits<double>::infinity();
    CHECK_FALSE(g.all_finite());
}

TEST_CASE("gradient_check examples") {
    LossConfig cfg;
    Record rec;
    rec.features = {0.2, 0.7, 0.4};
    auto lin = identity_net(3);
    lin.layers[0].weights(0, 1) = 0.3;
    lin.layers[0].weights(2, 0) = -0.6;
    CHECK(gradient_check(lin, rec, cfg, 1e-5) < 1e-7);

    Rng rng(21);
    Record r13;
    r13.features.resize(13);
    for (auto& v : r13.features) v = rng.uniform01();
    CHECK(gradient_check(build_model(ArchitectureSpec{}, 21), r13, cfg, 1e-5) < 1e-4);

    CHECK_THROWS_AS(gradient_check(lin, rec, cfg, 0.0), PreconditionError);
    CHECK_THROWS_AS(gradient_check(lin, rec, cfg, -1e-5), PreconditionError);

    Record bad = rec;
    bad.features[0] = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(gradient_check(lin, bad, cfg, 1e-5), NumericError);
}

TEST_CASE("supervised gradient_check needs a label") {
    ArchitectureSpec spec;
    spec.kind = ArchitectureKind::SDAE;
    auto net = build_model(spec, 4);
    Record rec;
    rec.features.assign(13, 0.5);
    CHECK_THROWS_AS(gradient_check(net, rec, LossConfig{}, 1e-5, true), PreconditionError);
    rec.label = 1;
    CHECK(gradient_check(net, rec, LossConfig{}, 1e-5, true) < 1e-4);
}

}  // TEST_SUITE
