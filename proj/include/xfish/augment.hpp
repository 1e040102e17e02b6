#pragma once

#include <array>
#include <cstdint>
#include <random>

#include "xfish/image.hpp"
#include "xfish/imaging.hpp"

namespace xfish {

struct AugmentConfig {
    bool enabled = true;
    double rotation_deg_min = -20.0;
    double rotation_deg_max = 20.0;
    double hflip_prob = 0.5;
    double axis_scale_min = 0.9;
    double axis_scale_max = 1.0;
    double perspective_jitter_fraction = 0.05;
    double noise_sigma_min = 0.0;
    double noise_sigma_max = 8.0;

    void validate() const;
};

/// One sampled set of augmentation parameters.
struct AugmentDraw {
    double rotation_deg = 0.0;
    bool hflip = false;
    double scale_rows = 1.0;
    double scale_cols = 1.0;
    // Corner displacements in pixels: (dx,dy) for top-left, top-right,
    // bottom-right, bottom-left of the image quad.
    std::array<double, 8> corner_jitter{};
    double noise_sigma = 0.0;
};

AugmentDraw sample_params(const AugmentConfig& config, std::uint64_t seed);

/// Validation/test path: 5% zero-pad, fit to the network input shape,
/// normalize to [0,1]. Input is a grayscale image with values in [0,255].
GrayF preprocess_only(const GrayF& gray, const PreprocessParams& pp);

/// Training path: pad + fit, then rotate, horizontal flip, per-axis
/// downscale, zero-pad back to the input shape, perspective warp, additive
/// Gaussian noise clipped to [0,255], and per-image normalization. Fully
/// determined by (image, params, config, seed). Disabled configs route to
/// preprocess_only.
GrayF augment(const GrayF& gray, const PreprocessParams& pp, const AugmentConfig& config,
              std::uint64_t seed);

/// augment() with an explicit parameter draw; the seed only feeds the noise
/// stream.
GrayF apply_augment(const GrayF& gray, const PreprocessParams& pp, const AugmentDraw& draw,
                    std::uint64_t noise_seed);

GrayF rotate_bilinear(const GrayF& img, double degrees);
GrayF hflip(const GrayF& img);
GrayF perspective_warp(const GrayF& img, const std::array<double, 8>& corner_jitter);
void add_gaussian_noise_clipped(GrayF& img, double sigma, std::mt19937_64& rng);

}  // namespace xfish
