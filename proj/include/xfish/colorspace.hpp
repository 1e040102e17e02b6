#pragma once

#include <vector>

#include "xfish/image.hpp"

namespace xfish {

/// Planar CIELAB image. L in [0,100], a/b roughly [-128,127], all doubles
/// so that only the channel being histogram-processed ever gets quantized.
struct LabImage {
    int rows = 0;
    int cols = 0;
    std::vector<double> L, a, b;
};

/// sRGB (D65) -> CIELAB.
LabImage rgb_to_lab(const RgbU8& rgb);

/// CIELAB -> sRGB, clamped to [0,255].
RgbU8 lab_to_rgb(const LabImage& lab);

/// L in [0,100] scaled onto the 8-bit [0,255] grid and back.
GrayU8 l_channel_u8(const LabImage& lab);
void set_l_channel(LabImage& lab, const GrayU8& l8);

}  // namespace xfish
