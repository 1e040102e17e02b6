#include <doctest.h>

#include <cmath>
#include <random>

#include "xfish/augment.hpp"

using namespace xfish;

namespace {

GrayF random_gray(int rows, int cols, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 255.0);
    GrayF img(rows, cols);
    for (auto& p : img.pix) p = u(rng);
    return img;
}

PreprocessParams small_pp() {
    PreprocessParams pp;
    pp.target_rows = 64;
    pp.target_cols = 64;
    return pp;
}

}  // namespace

TEST_CASE("sampled draws respect every configured range") {
    AugmentConfig config;
    int flips = 0;
    const int n = 10000;
    for (int i = 0; i < n; ++i) {
        const AugmentDraw d = sample_params(config, static_cast<std::uint64_t>(i));
        CHECK(d.rotation_deg >= -20.0);
        CHECK(d.rotation_deg <= 20.0);
        CHECK(d.scale_rows >= 0.9);
        CHECK(d.scale_rows <= 1.0);
        CHECK(d.scale_cols >= 0.9);
        CHECK(d.scale_cols <= 1.0);
        CHECK(d.noise_sigma >= 0.0);
        CHECK(d.noise_sigma <= 8.0);
        for (double j : d.corner_jitter) {
            CHECK(std::abs(j) <= 0.05);
        }
        if (d.hflip) ++flips;
    }
    const double flip_rate = static_cast<double>(flips) / n;
    CHECK(flip_rate >= 0.48);
    CHECK(flip_rate <= 0.52);
}

TEST_CASE("fixed seed reproduces the draw and the full augmentation") {
    AugmentConfig config;
    const AugmentDraw a = sample_params(config, 123);
    const AugmentDraw b = sample_params(config, 123);
    CHECK(a.rotation_deg == b.rotation_deg);
    CHECK(a.hflip == b.hflip);
    CHECK(a.scale_rows == b.scale_rows);
    CHECK(a.corner_jitter == b.corner_jitter);
    CHECK(a.noise_sigma == b.noise_sigma);

    const GrayF img = random_gray(50, 70, 1);
    const GrayF x = augment(img, small_pp(), config, 99);
    const GrayF y = augment(img, small_pp(), config, 99);
    CHECK(x.pix == y.pix);
}

TEST_CASE("disabled augmentation equals the plain preprocessing path") {
    AugmentConfig config;
    config.enabled = false;
    const GrayF img = random_gray(100, 140, 2);
    const GrayF a = augment(img, small_pp(), config, 5);
    const GrayF b = preprocess_only(img, small_pp());
    CHECK(a.pix == b.pix);
}

TEST_CASE("identity draw matches the preprocessing path within 2/255") {
    const GrayF img = random_gray(100, 140, 3);
    AugmentDraw identity;  // rotation 0, no flip, scales 1, zero jitter, sigma 0
    const GrayF a = apply_augment(img, small_pp(), identity, 7);
    const GrayF b = preprocess_only(img, small_pp());
    REQUIRE(a.pix.size() == b.pix.size());
    double max_diff = 0.0;
    for (std::size_t i = 0; i < a.pix.size(); ++i) {
        max_diff = std::max(max_diff, std::abs(a.pix[i] - b.pix[i]));
    }
    CHECK(max_diff <= 2.0 / 255.0);
}

TEST_CASE("output is always the target shape in [0,1]") {
    AugmentConfig config;
    for (auto [rows, cols] : {std::pair{30, 200}, {400, 90}, {64, 64}}) {
        const GrayF out = augment(random_gray(rows, cols, 4), small_pp(), config, 11);
        CHECK(out.rows == 64);
        CHECK(out.cols == 64);
        double lo = 1e9, hi = -1e9;
        for (double v : out.pix) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        CHECK(lo >= 0.0);
        CHECK(hi <= 1.0);
        CHECK(lo == doctest::Approx(0.0));  // normalize_unit attains both ends
        CHECK(hi == doctest::Approx(1.0));
    }
}

TEST_CASE("noise is clipped to [0,255] before normalization") {
    GrayF img(16, 16, 250.0);
    img.at(0, 0) = 0.0;  // keep the image non-constant
    std::mt19937_64 rng(8);
    add_gaussian_noise_clipped(img, 8.0, rng);
    for (double v : img.pix) {
        CHECK(v >= 0.0);
        CHECK(v <= 255.0);
    }
}

TEST_CASE("double horizontal flip is exact") {
    const GrayF img = random_gray(33, 57, 5);
    const GrayF back = hflip(hflip(img));
    CHECK(back.pix == img.pix);
}

TEST_CASE("distinct seeds almost always differ") {
    const GrayF img = random_gray(80, 80, 6);
    AugmentConfig config;
    const PreprocessParams pp = small_pp();
    int differing = 0;
    for (int i = 0; i < 100; ++i) {
        const GrayF a = augment(img, pp, config, 1000 + 2 * static_cast<std::uint64_t>(i));
        const GrayF b = augment(img, pp, config, 1001 + 2 * static_cast<std::uint64_t>(i));
        if (a.pix != b.pix) ++differing;
    }
    CHECK(differing >= 99);
}

TEST_CASE("config validation rejects bad ranges") {
    AugmentConfig config;
    config.rotation_deg_min = 10.0;
    config.rotation_deg_max = -10.0;
    CHECK_THROWS_AS(config.validate(), std::invalid_argument);
    config = AugmentConfig{};
    config.hflip_prob = 1.5;
    CHECK_THROWS_AS(config.validate(), std::invalid_argument);
    config = AugmentConfig{};
    config.noise_sigma_min = -1.0;
    CHECK_THROWS_AS(config.validate(), std::invalid_argument);
}
