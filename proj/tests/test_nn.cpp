#include <doctest.h>

#include <random>

#include "support/gradcheck.hpp"
#include "xfish/nn.hpp"

using namespace xfish;
using namespace xfish::nn;
using xfish::testsupport::check_gradients;

namespace {

Tensor random_tensor(int n, int c, int h, int w, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Tensor t(n, c, h, w);
    for (double& v : t.data) v = u(rng);
    return t;
}

// Scalar loss for layer-level gradient checks: weighted sum of outputs, so
// dLoss/dOut is a fixed random tensor.
struct LayerHarness {
    Layer& layer;
    Tensor input;
    std::vector<double> out_weights;

    double loss() {
        Tensor out = layer.forward(input, true);
        if (out_weights.empty()) {
            std::mt19937_64 rng(7);
            std::uniform_real_distribution<double> u(-1.0, 1.0);
            out_weights.resize(out.size());
            for (double& v : out_weights) v = u(rng);
        }
        double acc = 0.0;
        for (std::size_t i = 0; i < out.size(); ++i) acc += out_weights[i] * out.data[i];
        return acc;
    }

    Tensor run_backward() {
        Tensor out = layer.forward(input, true);
        Tensor grad_out(out.n, out.c, out.h, out.w);
        for (std::size_t i = 0; i < out.size(); ++i) grad_out.data[i] = out_weights[i];
        for (Param* p : layer.params()) p->zero_grad();
        return layer.backward(grad_out);
    }
};

}  // namespace

TEST_CASE("conv forward matches a hand-computed case") {
    // 1x1x3x3 input, single 3x3 kernel, stride 1, pad 1.
    Conv2d conv(1, 1, 3, 1, 1);
    for (std::size_t i = 0; i < 9; ++i) conv.weight.value[i] = 0.0;
    conv.weight.value[4] = 2.0;  // center tap
    conv.weight.value[5] = 1.0;  // right neighbor
    conv.bias.value[0] = 0.5;

    Tensor x(1, 1, 3, 3);
    for (int i = 0; i < 9; ++i) x.data[static_cast<std::size_t>(i)] = i;  // 0..8 row-major

    const Tensor out = conv.forward(x, false);
    CHECK(out.h == 3);
    CHECK(out.w == 3);
    CHECK(out.at(0, 0, 1, 1) == doctest::Approx(2.0 * 4 + 5 + 0.5));
    CHECK(out.at(0, 0, 1, 2) == doctest::Approx(2.0 * 5 + 0 + 0.5));  // right tap off the edge
    CHECK(out.at(0, 0, 0, 0) == doctest::Approx(2.0 * 0 + 1 + 0.5));
}

TEST_CASE("conv strided output geometry") {
    Conv2d conv(3, 8, 3, 2, 1);
    std::mt19937_64 rng(1);
    conv.init_glorot(rng);
    const Tensor out = conv.forward(random_tensor(2, 3, 32, 32, 2), false);
    CHECK(out.n == 2);
    CHECK(out.c == 8);
    CHECK(out.h == 16);
    CHECK(out.w == 16);
}

TEST_CASE("conv gradients match finite differences") {
    Conv2d conv(2, 3, 3, 2, 1);
    std::mt19937_64 rng(3);
    conv.init_glorot(rng);
    LayerHarness harness{conv, random_tensor(2, 2, 8, 8, 4), {}};
    harness.loss();  // fix the output weights
    const Tensor dx = harness.run_backward();

    const auto result = check_gradients(conv.params(), [&] { return harness.loss(); });
    CHECK(result.checked > 0);
    CHECK(result.max_rel_err < 1e-6);

    // Input gradient via FD on a few pixels.
    for (std::size_t idx : {std::size_t{0}, std::size_t{17}, std::size_t{100}}) {
        const double saved = harness.input.data[idx];
        harness.input.data[idx] = saved + 1e-6;
        const double up = harness.loss();
        harness.input.data[idx] = saved - 1e-6;
        const double down = harness.loss();
        harness.input.data[idx] = saved;
        CHECK(dx.data[idx] == doctest::Approx((up - down) / 2e-6).epsilon(1e-5));
    }
}

TEST_CASE("dense and pool gradients match finite differences") {
    SUBCASE("dense") {
        Dense dense(6, 2);
        std::mt19937_64 rng(5);
        dense.init_glorot(rng);
        LayerHarness harness{dense, random_tensor(3, 6, 1, 1, 6), {}};
        harness.loss();
        harness.run_backward();
        CHECK(check_gradients(dense.params(), [&] { return harness.loss(); }).max_rel_err < 1e-6);
    }
    SUBCASE("global max pool routes gradient to the argmax") {
        GlobalMaxPool pool;
        Tensor x(1, 2, 2, 2);
        x.data = {1.0, 5.0, 2.0, 3.0, /*ch1*/ -1.0, -2.0, -0.5, -3.0};
        const Tensor out = pool.forward(x, true);
        CHECK(out.at(0, 0, 0, 0) == 5.0);
        CHECK(out.at(0, 1, 0, 0) == -0.5);
        Tensor gout(1, 2, 1, 1);
        gout.data = {10.0, 20.0};
        const Tensor dx = pool.backward(gout);
        CHECK(dx.data[1] == 10.0);
        CHECK(dx.data[6] == 20.0);
        CHECK(dx.data[0] == 0.0);
    }
}

TEST_CASE("relu masks negative inputs in both directions") {
    ReLU relu;
    Tensor x(1, 1, 1, 4);
    x.data = {-2.0, -0.1, 0.5, 3.0};
    const Tensor out = relu.forward(x, true);
    CHECK(out.data == std::vector<double>{0.0, 0.0, 0.5, 3.0});
    Tensor gout(1, 1, 1, 4);
    gout.data = {1.0, 1.0, 1.0, 1.0};
    const Tensor dx = relu.backward(gout);
    CHECK(dx.data == std::vector<double>{0.0, 0.0, 1.0, 1.0});
}

TEST_CASE("dropout is identity in eval mode and unbiased in training") {
    Dropout drop(0.5);
    Tensor x(1, 1, 1, 1000);
    for (double& v : x.data) v = 1.0;

    const Tensor eval_out = drop.forward(x, false);
    CHECK(eval_out.data == x.data);

    drop.seed(11);
    const Tensor train_out = drop.forward(x, true);
    double mean = 0.0;
    int zeros = 0;
    for (double v : train_out.data) {
        mean += v;
        if (v == 0.0) ++zeros;
    }
    mean /= static_cast<double>(train_out.size());
    CHECK(mean == doctest::Approx(1.0).epsilon(0.1));  // inverted scaling
    CHECK(zeros > 400);
    CHECK(zeros < 600);

    SUBCASE("same seed, same mask") {
        drop.seed(42);
        const Tensor a = drop.forward(x, true);
        drop.seed(42);
        const Tensor b = drop.forward(x, true);
        CHECK(a.data == b.data);
    }
}

TEST_CASE("adam matches the reference update on a scalar") {
    // One parameter w=1, constant gradient 0.5, lr=0.1.
    Param p(1);
    p.value[0] = 1.0;
    Adam adam(0.1);

    // Step 1 by hand: m=0.05, v=0.00025/... with bias correction the first
    // step moves by ~lr * g/|g| (epsilon aside).
    p.grad[0] = 0.5;
    adam.step({&p});
    const double m1 = 0.1 * 0.5;          // (1-beta1)*g
    const double v1 = 0.001 * 0.25;       // (1-beta2)*g^2
    const double mhat1 = m1 / (1 - 0.9);
    const double vhat1 = v1 / (1 - 0.999);
    const double w1 = 1.0 - 0.1 * mhat1 / (std::sqrt(vhat1) + 1e-7);
    CHECK(p.value[0] == doctest::Approx(w1).epsilon(1e-12));

    p.grad[0] = 0.5;
    adam.step({&p});
    const double m2 = 0.9 * m1 + 0.1 * 0.5;
    const double v2 = 0.999 * v1 + 0.001 * 0.25;
    const double mhat2 = m2 / (1 - 0.9 * 0.9);
    const double vhat2 = v2 / (1 - 0.999 * 0.999);
    const double w2 = w1 - 0.1 * mhat2 / (std::sqrt(vhat2) + 1e-7);
    CHECK(p.value[0] == doctest::Approx(w2).epsilon(1e-12));
}

TEST_CASE("bce with logits is stable and consistent with its gradient") {
    CHECK(bce_with_logits(0.0, 1.0) == doctest::Approx(std::log(2.0)));
    CHECK(bce_with_logits(100.0, 1.0) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(bce_with_logits(-500.0, 0.0) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(std::isfinite(bce_with_logits(800.0, 0.0)));

    for (double z : {-3.0, -0.2, 0.0, 1.7}) {
        for (double y : {0.0, 1.0}) {
            const double fd = (bce_with_logits(z + 1e-7, y) - bce_with_logits(z - 1e-7, y)) / 2e-7;
            CHECK(bce_with_logits_grad(z, y) == doctest::Approx(fd).epsilon(1e-5));
        }
    }
}
