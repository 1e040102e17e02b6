#include "xfish/augment.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>

#include "xfish/util.hpp"

namespace xfish {

void AugmentConfig::validate() const {
    if (rotation_deg_min > rotation_deg_max) throw std::invalid_argument("rotation range reversed");
    if (hflip_prob < 0.0 || hflip_prob > 1.0) throw std::invalid_argument("hflip_prob outside [0,1]");
    if (axis_scale_min > axis_scale_max || axis_scale_min <= 0.0) {
        throw std::invalid_argument("axis scale range invalid");
    }
    if (perspective_jitter_fraction < 0.0) {
        throw std::invalid_argument("perspective_jitter_fraction must be >= 0");
    }
    if (noise_sigma_min > noise_sigma_max || noise_sigma_min < 0.0) {
        throw std::invalid_argument("noise sigma range invalid");
    }
}

AugmentDraw sample_params(const AugmentConfig& config, std::uint64_t seed) {
    config.validate();
    std::mt19937_64 rng(seed);
    AugmentDraw draw;
    draw.rotation_deg =
        std::uniform_real_distribution<double>(config.rotation_deg_min, config.rotation_deg_max)(rng);
    draw.hflip = std::bernoulli_distribution(config.hflip_prob)(rng);
    std::uniform_real_distribution<double> scale(config.axis_scale_min, config.axis_scale_max);
    draw.scale_rows = scale(rng);
    draw.scale_cols = scale(rng);
    // Jitter amplitude is resolved against the image side at apply time; the
    // draw stores fractions of the side in [-1,1] * jitter_fraction.
    std::uniform_real_distribution<double> jitter(-config.perspective_jitter_fraction,
                                                  config.perspective_jitter_fraction);
    for (double& j : draw.corner_jitter) j = jitter(rng);
    draw.noise_sigma =
        std::uniform_real_distribution<double>(config.noise_sigma_min, config.noise_sigma_max)(rng);
    return draw;
}

GrayF preprocess_only(const GrayF& gray, const PreprocessParams& pp) {
    pp.validate();
    return normalize_unit(fit_to(pad_border(gray, pp.pad_fraction), pp.target_rows, pp.target_cols));
}

namespace {

double sample_bilinear_zero(const GrayF& img, double y, double x) {
    if (y <= -1.0 || x <= -1.0 || y >= img.rows || x >= img.cols) return 0.0;
    const int y0 = static_cast<int>(std::floor(y));
    const int x0 = static_cast<int>(std::floor(x));
    const double wy = y - y0;
    const double wx = x - x0;
    auto px = [&](int r, int c) -> double {
        if (r < 0 || c < 0 || r >= img.rows || c >= img.cols) return 0.0;
        return img.at(r, c);
    };
    return (1.0 - wy) * ((1.0 - wx) * px(y0, x0) + wx * px(y0, x0 + 1)) +
           wy * ((1.0 - wx) * px(y0 + 1, x0) + wx * px(y0 + 1, x0 + 1));
}

// Homography mapping src quad corners onto dst quad corners (standard DLT
// with h22 = 1).
Eigen::Matrix3d homography_from_corners(const std::array<double, 8>& src,
                                        const std::array<double, 8>& dst) {
    Eigen::Matrix<double, 8, 8> a;
    Eigen::Matrix<double, 8, 1> rhs;
    for (int i = 0; i < 4; ++i) {
        const double sx = src[2 * i], sy = src[2 * i + 1];
        const double dx = dst[2 * i], dy = dst[2 * i + 1];
        a.row(2 * i) << sx, sy, 1, 0, 0, 0, -sx * dx, -sy * dx;
        a.row(2 * i + 1) << 0, 0, 0, sx, sy, 1, -sx * dy, -sy * dy;
        rhs(2 * i) = dx;
        rhs(2 * i + 1) = dy;
    }
    const Eigen::Matrix<double, 8, 1> h = a.fullPivLu().solve(rhs);
    Eigen::Matrix3d m;
    m << h(0), h(1), h(2), h(3), h(4), h(5), h(6), h(7), 1.0;
    return m;
}

}  // namespace

GrayF rotate_bilinear(const GrayF& img, double degrees) {
    if (degrees == 0.0) return img;
    const double rad = degrees * M_PI / 180.0;
    const double cy = (img.rows - 1) / 2.0;
    const double cx = (img.cols - 1) / 2.0;
    const double cosr = std::cos(rad);
    const double sinr = std::sin(rad);
    GrayF out(img.rows, img.cols);
    for (int r = 0; r < img.rows; ++r) {
        for (int c = 0; c < img.cols; ++c) {
            // Inverse-map through the rotation about the image center.
            const double dy = r - cy;
            const double dx = c - cx;
            const double sy = cy + dy * cosr - dx * sinr;
            const double sx = cx + dy * sinr + dx * cosr;
            out.at(r, c) = sample_bilinear_zero(img, sy, sx);
        }
    }
    return out;
}

GrayF hflip(const GrayF& img) {
    GrayF out(img.rows, img.cols);
    for (int r = 0; r < img.rows; ++r) {
        for (int c = 0; c < img.cols; ++c) out.at(r, c) = img.at(r, img.cols - 1 - c);
    }
    return out;
}

GrayF perspective_warp(const GrayF& img, const std::array<double, 8>& corner_jitter) {
    const double w = img.cols - 1.0;
    const double h = img.rows - 1.0;
    const std::array<double, 8> src{0, 0, w, 0, w, h, 0, h};
    std::array<double, 8> dst = src;
    for (int i = 0; i < 8; ++i) dst[i] += corner_jitter[i];
    const Eigen::Matrix3d inv = homography_from_corners(src, dst).inverse();
    GrayF out(img.rows, img.cols);
    for (int r = 0; r < img.rows; ++r) {
        for (int c = 0; c < img.cols; ++c) {
            const Eigen::Vector3d p = inv * Eigen::Vector3d(c, r, 1.0);
            out.at(r, c) = sample_bilinear_zero(img, p(1) / p(2), p(0) / p(2));
        }
    }
    return out;
}

void add_gaussian_noise_clipped(GrayF& img, double sigma, std::mt19937_64& rng) {
    if (sigma <= 0.0) return;
    std::normal_distribution<double> noise(0.0, sigma);
    for (double& v : img.pix) v = std::clamp(v + noise(rng), 0.0, 255.0);
}

GrayF apply_augment(const GrayF& gray, const PreprocessParams& pp, const AugmentDraw& draw,
                    std::uint64_t noise_seed) {
    pp.validate();
    GrayF img = fit_to(pad_border(gray, pp.pad_fraction), pp.target_rows, pp.target_cols);
    img = rotate_bilinear(img, draw.rotation_deg);
    if (draw.hflip) img = hflip(img);
    const int sr = std::max(1, static_cast<int>(std::lround(pp.target_rows * draw.scale_rows)));
    const int sc = std::max(1, static_cast<int>(std::lround(pp.target_cols * draw.scale_cols)));
    if (sr != pp.target_rows || sc != pp.target_cols) {
        img = pad_to(resize_to(img, sr, sc), pp.target_rows, pp.target_cols);
    }
    std::array<double, 8> jitter_px;
    const double side = std::max(pp.target_rows, pp.target_cols);
    for (int i = 0; i < 8; ++i) jitter_px[i] = draw.corner_jitter[i] * side;
    img = perspective_warp(img, jitter_px);
    std::mt19937_64 rng(noise_seed);
    add_gaussian_noise_clipped(img, draw.noise_sigma, rng);
    return normalize_unit(img);
}

GrayF augment(const GrayF& gray, const PreprocessParams& pp, const AugmentConfig& config,
              std::uint64_t seed) {
    if (!config.enabled) return preprocess_only(gray, pp);
    const AugmentDraw draw = sample_params(config, seed);
    return apply_augment(gray, pp, draw, mix_bits(seed));
}

}  // namespace xfish
