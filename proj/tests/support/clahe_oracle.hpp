#pragma once

// Independent CLAHE reference: plain (unclipped) tile-wise histogram
// equalization with bilinear blending between tile mappings, written
// straight from the definition. Shared by the unit tests and the
// acceptance suite; intentionally not backed by the production code path.

#include <array>
#include <cmath>
#include <vector>

#include "xfish/image.hpp"

namespace xfish::testsupport {

inline GrayU8 unclipped_tile_equalization(const GrayU8& img, int grid_rows, int grid_cols) {
    const int tile_h = (img.rows + grid_rows - 1) / grid_rows;
    const int tile_w = (img.cols + grid_cols - 1) / grid_cols;
    const int pr = tile_h * grid_rows;
    const int pc = tile_w * grid_cols;

    // reflect-101 padding
    GrayU8 padded(pr, pc);
    for (int r = 0; r < pr; ++r) {
        const int sr = r < img.rows ? r : 2 * img.rows - 2 - r;
        for (int c = 0; c < pc; ++c) {
            const int sc = c < img.cols ? c : 2 * img.cols - 2 - c;
            padded.at(r, c) = img.at(sr, sc);
        }
    }

    // per-tile CDF lookup tables
    std::vector<std::array<double, 256>> luts(static_cast<std::size_t>(grid_rows) * grid_cols);
    for (int tr = 0; tr < grid_rows; ++tr) {
        for (int tc = 0; tc < grid_cols; ++tc) {
            std::array<long long, 256> hist{};
            for (int r = tr * tile_h; r < (tr + 1) * tile_h; ++r) {
                for (int c = tc * tile_w; c < (tc + 1) * tile_w; ++c) ++hist[padded.at(r, c)];
            }
            long long cum = 0;
            auto& lut = luts[static_cast<std::size_t>(tr) * grid_cols + tc];
            for (int b = 0; b < 256; ++b) {
                cum += hist[b];
                lut[b] = std::round(255.0 * cum / (tile_h * tile_w));
            }
        }
    }

    auto lut_at = [&](int tr, int tc, int v) {
        tr = std::clamp(tr, 0, grid_rows - 1);
        tc = std::clamp(tc, 0, grid_cols - 1);
        return luts[static_cast<std::size_t>(tr) * grid_cols + tc][static_cast<std::size_t>(v)];
    };

    GrayU8 out(img.rows, img.cols);
    for (int r = 0; r < img.rows; ++r) {
        const double fy = (r + 0.5) / tile_h - 0.5;
        const int ty = static_cast<int>(std::floor(fy));
        const double wy = std::clamp(fy - ty, 0.0, 1.0);
        for (int c = 0; c < img.cols; ++c) {
            const double fx = (c + 0.5) / tile_w - 0.5;
            const int tx = static_cast<int>(std::floor(fx));
            const double wx = std::clamp(fx - tx, 0.0, 1.0);
            const int v = img.at(r, c);
            const double blended =
                (1.0 - wy) * ((1.0 - wx) * lut_at(ty, tx, v) + wx * lut_at(ty, tx + 1, v)) +
                wy * ((1.0 - wx) * lut_at(ty + 1, tx, v) + wx * lut_at(ty + 1, tx + 1, v));
            out.at(r, c) = clamp_u8(blended);
        }
    }
    return out;
}

}  // namespace xfish::testsupport
