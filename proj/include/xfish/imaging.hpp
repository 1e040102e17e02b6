#pragma once

#include "xfish/image.hpp"

namespace xfish {

/// Geometric preprocessing defaults: 5% zero-pad border, then fit to the
/// network input shape.
struct PreprocessParams {
    double pad_fraction = 0.05;
    int target_rows = 512;
    int target_cols = 512;

    void validate() const;
};

/// BT.601 luminance (0.299, 0.587, 0.114), rounded to the nearest level.
GrayU8 to_grayscale(const RgbU8& rgb);

/// Adds a zero border of floor(pad_fraction * dim) pixels per side on each
/// axis; a 1080x1920 frame at 0.05 becomes 1188x2112.
GrayF pad_border(const GrayF& img, double pad_fraction);

/// Bilinear resample to exactly target_rows x target_cols (pixel-center
/// aligned, edges clamped).
GrayF resize_to(const GrayF& img, int target_rows, int target_cols);

/// Centers the input on a zero canvas of the target shape. Throws
/// std::invalid_argument when the input exceeds the target on any axis.
GrayF pad_to(const GrayF& img, int target_rows, int target_cols);

/// Downsizes to the target when the input is larger on any axis, otherwise
/// zero-pads to it (external-domain images can be smaller than the network
/// input).
GrayF fit_to(const GrayF& img, int target_rows, int target_cols);

/// (x - min) / (max - min). Constant images map to all zeros.
GrayF normalize_unit(const GrayF& img);

}  // namespace xfish
