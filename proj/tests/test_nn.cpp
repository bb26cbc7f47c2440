#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <memory>
#include <vector>

#include "mecsim/error.hpp"
#include "mecsim/layers.hpp"
#include "mecsim/rng.hpp"

using namespace mecsim;

namespace {

// 0.5 * ||net(x) - target||^2, the harness loss for gradient checks.
double sq_loss(Network& net, const std::vector<double>& x, const std::vector<double>& target) {
    const auto y = net.forward(x);
    REQUIRE(y.size() == target.size());
    double loss = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) loss += 0.5 * (y[i] - target[i]) * (y[i] - target[i]);
    return loss;
}

std::vector<double> sq_loss_grad(const std::vector<double>& y, const std::vector<double>& target) {
    std::vector<double> g(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) g[i] = y[i] - target[i];
    return g;
}

// Central finite differences over every parameter; rel error floor guards
// near-zero gradients.
void check_grads_fd(Network& net, const std::vector<double>& x, const std::vector<double>& target) {
    net.zero_grads();
    const auto y = net.forward(x);
    net.backward(sq_loss_grad(y, target));

    const auto params = net.param_view();
    const auto grads = net.grad_view();
    const double h = 1e-6;
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double keep = *params[i];
        *params[i] = keep + h;
        const double lp = sq_loss(net, x, target);
        *params[i] = keep - h;
        const double lm = sq_loss(net, x, target);
        *params[i] = keep;
        const double fd = (lp - lm) / (2.0 * h);
        const double got = *grads[i];
        const double err = std::fabs(fd - got) / std::max(1e-4, std::fabs(fd));
        CHECK(err < 1e-5);
    }
}

std::vector<double> random_vec(Rng& rng, std::size_t n) {
    std::vector<double> v(n);
    for (double& x : v) x = rng.normal();
    return v;
}

Network encoder_shaped(int W, int hidden, int out) {
    Network net;
    net.add(std::make_unique<Conv1d>(2, 8, 3, W, 1));
    net.add(std::make_unique<Relu>(8 * W));
    net.add(std::make_unique<Conv1d>(8, 8, 3, W, 1));
    net.add(std::make_unique<Relu>(8 * W));
    net.add(std::make_unique<Dense>(8 * W, hidden));
    net.add(std::make_unique<Relu>(hidden));
    net.add(std::make_unique<Dense>(hidden, out));
    return net;
}

}  // namespace

TEST_CASE("dense forward matches a hand-computed example") {
    Dense d(2, 2);
    *d.weights() = {1.0, 2.0, 3.0, 4.0};
    *d.bias() = {0.5, -0.5};
    const auto y = d.forward({1.0, -1.0});
    REQUIRE(y.size() == 2);
    CHECK(y[0] == doctest::Approx(-0.5).epsilon(1e-15));
    CHECK(y[1] == doctest::Approx(-1.5).epsilon(1e-15));
}

TEST_CASE("conv1d forward matches a hand-computed example") {
    Conv1d c(1, 1, 3, 4, 1);
    *c.weights() = {1.0, 2.0, 3.0};
    *c.bias() = {0.0};
    const auto y = c.forward({1.0, 2.0, 3.0, 4.0});
    REQUIRE(y.size() == 4);
    CHECK(y[0] == 8.0);   // 2*1 + 3*2, left edge padded
    CHECK(y[1] == 14.0);  // 1*1 + 2*2 + 3*3
    CHECK(y[2] == 20.0);
    CHECK(y[3] == 11.0);  // 1*3 + 2*4, right edge padded
}

TEST_CASE("conv1d bias shifts every output position") {
    Conv1d c(1, 2, 3, 4, 1);
    *c.weights() = std::vector<double>(6, 0.0);
    *c.bias() = {1.25, -2.0};
    const auto y = c.forward({5.0, 6.0, 7.0, 8.0});
    for (int t = 0; t < 4; ++t) {
        CHECK(y[static_cast<std::size_t>(t)] == 1.25);
        CHECK(y[static_cast<std::size_t>(4 + t)] == -2.0);
    }
}

TEST_CASE("relu zeroes negative lanes in both directions") {
    Relu r(4);
    const auto y = r.forward({-1.0, 0.0, 2.0, -3.0});
    CHECK(y == std::vector<double>{0.0, 0.0, 2.0, 0.0});
    const auto gx = r.backward({1.0, 1.0, 1.0, 1.0});
    CHECK(gx == std::vector<double>{0.0, 0.0, 1.0, 0.0});
}

TEST_CASE("dense gradients match finite differences") {
    Rng rng(11);
    Network net;
    net.add(std::make_unique<Dense>(5, 3));
    net.init(rng);
    check_grads_fd(net, random_vec(rng, 5), random_vec(rng, 3));
}

TEST_CASE("conv1d gradients match finite differences") {
    Rng rng(12);
    Network net;
    net.add(std::make_unique<Conv1d>(2, 3, 3, 6, 1));
    net.init(rng);
    check_grads_fd(net, random_vec(rng, 12), random_vec(rng, 18));
}

TEST_CASE("stacked network gradients match finite differences") {
    Rng rng(13);
    Network net;
    net.add(std::make_unique<Conv1d>(2, 3, 3, 6, 1));
    net.add(std::make_unique<Relu>(18));
    net.add(std::make_unique<Dense>(18, 5));
    net.add(std::make_unique<Relu>(5));
    net.add(std::make_unique<Dense>(5, 4));
    net.init(rng);
    // Shift the input away from relu kinks where the derivative jumps.
    auto x = random_vec(rng, 12);
    for (double& v : x) v += 0.05;
    check_grads_fd(net, x, random_vec(rng, 4));
}

TEST_CASE("input gradient flows through the whole stack") {
    Rng rng(14);
    Network net;
    net.add(std::make_unique<Dense>(4, 6));
    net.add(std::make_unique<Relu>(6));
    net.add(std::make_unique<Dense>(6, 2));
    net.init(rng);
    const auto x = random_vec(rng, 4);
    const auto target = random_vec(rng, 2);

    net.zero_grads();
    const auto y = net.forward(x);
    const auto gx = net.backward(sq_loss_grad(y, target));
    REQUIRE(gx.size() == 4);

    const double h = 1e-6;
    for (std::size_t i = 0; i < x.size(); ++i) {
        auto xp = x;
        xp[i] += h;
        auto xm = x;
        xm[i] -= h;
        const double fd = (sq_loss(net, xp, target) - sq_loss(net, xm, target)) / (2.0 * h);
        CHECK(std::fabs(fd - gx[i]) / std::max(1e-4, std::fabs(fd)) < 1e-5);
    }
}

TEST_CASE("backward accumulates gradients across samples") {
    Network net;
    net.add(std::make_unique<Dense>(1, 1));
    auto& d = net.layer(0);
    (*d.weights())[0] = 2.0;
    (*d.bias())[0] = 0.0;

    net.zero_grads();
    net.forward({3.0});
    net.backward({1.0});  // gw += 3, gb += 1
    net.forward({4.0});
    net.backward({1.0});  // gw += 4, gb += 1
    CHECK((*d.weight_grads())[0] == 7.0);
    CHECK((*d.bias_grads())[0] == 2.0);
}

TEST_CASE("sgd momentum follows the classic velocity recursion") {
    Network net;
    net.add(std::make_unique<Dense>(1, 1));
    auto& d = net.layer(0);
    (*d.weights())[0] = 1.0;
    (*d.bias())[0] = 0.0;
    SgdMomentum opt(0.1, 0.9);

    // Constant gradient 0.5 on the weight: v1 = 0.5, v2 = 0.95.
    net.zero_grads();
    (*d.weight_grads())[0] = 0.5;
    opt.step(net);
    CHECK((*d.weights())[0] == doctest::Approx(0.95).epsilon(1e-15));
    net.zero_grads();
    (*d.weight_grads())[0] = 0.5;
    opt.step(net);
    CHECK((*d.weights())[0] == doctest::Approx(0.855).epsilon(1e-15));
}

TEST_CASE("glorot init bounds hold and biases start at zero") {
    Rng rng(15);
    Dense d(100, 50);
    d.init(rng);
    const double a = std::sqrt(6.0 / 150.0);
    double mean = 0.0;
    for (double w : *d.weights()) {
        CHECK(std::fabs(w) <= a);
        mean += w;
    }
    mean /= static_cast<double>(d.weights()->size());
    CHECK(std::fabs(mean) < 0.01);
    for (double b : *d.bias()) CHECK(b == 0.0);
}

TEST_CASE("init is deterministic in the rng seed") {
    Network a = encoder_shaped(8, 16, 4);
    Network b = encoder_shaped(8, 16, 4);
    Rng r1(77), r2(77);
    a.init(r1);
    b.init(r2);
    CHECK(save_network(a) == save_network(b));
}

TEST_CASE("mismatched layer shapes are rejected with the layer index") {
    Network net;
    net.add(std::make_unique<Dense>(4, 3));
    CHECK_THROWS_WITH_AS(net.add(std::make_unique<Relu>(5)), doctest::Contains("layer 1 (relu)"), Error);
    CHECK_THROWS_WITH_AS(net.forward({1.0, 2.0}), doctest::Contains("layer 0 (dense): expected input 4"),
                         Error);
}

TEST_CASE("checkpoints reload bit-identically") {
    Network net = encoder_shaped(16, 32, 4);
    Rng rng(5);
    net.init(rng);
    const std::string text = save_network(net);
    Network back = load_network(text, "mem");
    CHECK(save_network(back) == text);

    const auto x = random_vec(rng, 32);
    const auto y1 = net.forward(x);
    const auto y2 = back.forward(x);
    REQUIRE(y1.size() == y2.size());
    for (std::size_t i = 0; i < y1.size(); ++i) CHECK(y1[i] == y2[i]);
}

TEST_CASE("checkpoint parsing rejects malformed input") {
    CHECK_THROWS_WITH_AS(load_network("giberish\n", "m"), doctest::Contains("not a mecnet"), Error);
    CHECK_THROWS_WITH_AS(load_network("mecnet 1\nlayers 1\n", "m"), doctest::Contains("truncated"), Error);
    CHECK_THROWS_WITH_AS(load_network("mecnet 1\nlayers 1\nmaxpool 2\n", "m"),
                         doctest::Contains("unknown layer"), Error);
    CHECK_THROWS_WITH_AS(load_network("mecnet 1\nlayers 1\ndense 2 1\nw 0x1p+0\nb 0x0p+0\n", "m"),
                         doctest::Contains("expected 2 values, got 1"), Error);
}

TEST_CASE("conv1d construction enforces length preservation") {
    CHECK_THROWS_WITH_AS(Conv1d(1, 1, 3, 4, 0), doctest::Contains("2*pad == kernel-1"), Error);
    CHECK_THROWS_WITH_AS(Conv1d(1, 1, 5, 2, 1), doctest::Contains("kernel wider"), Error);
    CHECK_NOTHROW(Conv1d(1, 1, 5, 5, 2));
}
