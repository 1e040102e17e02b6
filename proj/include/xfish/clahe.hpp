#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "xfish/image.hpp"

namespace xfish {

struct ClaheParams {
    double clip_limit = 2.0;
    int grid_cols = 16;
    int grid_rows = 8;

    void validate() const;
};

/// Contrast-limited adaptive histogram equalization on an 8-bit channel.
/// The image is mirror-padded to a whole tile grid, every tile histogram is
/// clipped and equalized, and each output pixel blends the four surrounding
/// tile mappings bilinearly (edge-clamped tile centers).
GrayU8 clahe(const GrayU8& channel, const ClaheParams& params);

/// CLAHE in CIELAB: RGB -> Lab, the L channel alone is processed, a/b pass
/// through untouched, then back to RGB.
RgbU8 clahe_color(const RgbU8& rgb, const ClaheParams& params);

namespace clahe_detail {

using Histogram = std::array<int, 256>;
using Lut = std::array<std::uint8_t, 256>;

/// Threshold in counts: clip_limit scaled by tile_pixels / 256, never below 1.
int clip_threshold(double clip_limit, int tile_pixels);

/// Clips bins at the threshold and redistributes the excess uniformly in a
/// single pass: every bin gains excess/256, the remainder is spread one count
/// per bin at a fixed stride. Post: every bin <= threshold + excess/256 + 1.
void clip_histogram(Histogram& hist, int threshold);

/// Cumulative-histogram equalization mapping onto [0,255].
Lut equalize_lut(const Histogram& hist, int tile_pixels);

struct TileGrid {
    int tile_rows = 0, tile_cols = 0;   // grid dimensions
    int tile_h = 0, tile_w = 0;         // per-tile pixel dimensions (uniform)
    std::vector<Lut> luts;              // row-major [tile_rows * tile_cols]
    const Lut& lut(int tr, int tc) const { return luts[static_cast<std::size_t>(tr) * tile_cols + tc]; }
};

/// Mirror-pads to a whole multiple of the tile grid (reflect without edge
/// duplication).
GrayU8 pad_to_grid(const GrayU8& img, int grid_rows, int grid_cols);

/// Per-tile clipped-equalization LUTs for a grid-aligned image.
TileGrid build_tile_grid(const GrayU8& padded, const ClaheParams& params);

}  // namespace clahe_detail

}  // namespace xfish
