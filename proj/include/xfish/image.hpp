#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

namespace xfish {

/// 8-bit single-channel raster, row-major.
struct GrayU8 {
    int rows = 0;
    int cols = 0;
    std::vector<std::uint8_t> pix;

    GrayU8() = default;
    GrayU8(int r, int c, std::uint8_t fill = 0)
        : rows(r), cols(c), pix(static_cast<std::size_t>(r) * c, fill) {}

    std::uint8_t& at(int r, int c) { return pix[static_cast<std::size_t>(r) * cols + c]; }
    std::uint8_t at(int r, int c) const { return pix[static_cast<std::size_t>(r) * cols + c]; }
    bool empty() const { return pix.empty(); }
};

/// 8-bit interleaved RGB raster (channel order R,G,B).
struct RgbU8 {
    int rows = 0;
    int cols = 0;
    std::vector<std::uint8_t> pix;

    RgbU8() = default;
    RgbU8(int r, int c, std::uint8_t fill = 0)
        : rows(r), cols(c), pix(static_cast<std::size_t>(r) * c * 3, fill) {}

    std::uint8_t& at(int r, int c, int ch) {
        return pix[(static_cast<std::size_t>(r) * cols + c) * 3 + ch];
    }
    std::uint8_t at(int r, int c, int ch) const {
        return pix[(static_cast<std::size_t>(r) * cols + c) * 3 + ch];
    }
    bool empty() const { return pix.empty(); }
};

/// Double-precision single-channel raster. Pipelines carry pixel values in
/// [0,255] until the final normalization step maps them into [0,1].
struct GrayF {
    int rows = 0;
    int cols = 0;
    std::vector<double> pix;

    GrayF() = default;
    GrayF(int r, int c, double fill = 0.0)
        : rows(r), cols(c), pix(static_cast<std::size_t>(r) * c, fill) {}

    double& at(int r, int c) { return pix[static_cast<std::size_t>(r) * cols + c]; }
    double at(int r, int c) const { return pix[static_cast<std::size_t>(r) * cols + c]; }
    bool empty() const { return pix.empty(); }
};

inline GrayF to_float(const GrayU8& g) {
    GrayF out(g.rows, g.cols);
    for (std::size_t i = 0; i < g.pix.size(); ++i) out.pix[i] = static_cast<double>(g.pix[i]);
    return out;
}

inline std::uint8_t clamp_u8(double v) {
    return static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
}

inline GrayU8 to_u8(const GrayF& g) {
    GrayU8 out(g.rows, g.cols);
    for (std::size_t i = 0; i < g.pix.size(); ++i) out.pix[i] = clamp_u8(g.pix[i]);
    return out;
}

}  // namespace xfish
