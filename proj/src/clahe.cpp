#include "xfish/clahe.hpp"

#include <cmath>
#include <stdexcept>

#include "xfish/colorspace.hpp"

namespace xfish {

void ClaheParams::validate() const {
    if (clip_limit <= 0.0) throw std::invalid_argument("clip_limit must be > 0");
    if (grid_rows < 1 || grid_cols < 1) throw std::invalid_argument("tile grid dims must be >= 1");
}

namespace clahe_detail {

int clip_threshold(double clip_limit, int tile_pixels) {
    const double t = clip_limit * tile_pixels / 256.0;
    if (t >= 2147483647.0) return 2147483647;
    return std::max(1, static_cast<int>(std::lround(t)));
}

void clip_histogram(Histogram& hist, int threshold) {
    long long excess = 0;
    for (int& h : hist) {
        if (h > threshold) {
            excess += h - threshold;
            h = threshold;
        }
    }
    if (excess == 0) return;
    const int quot = static_cast<int>(excess / 256);
    int rem = static_cast<int>(excess % 256);
    for (int& h : hist) h += quot;
    if (rem > 0) {
        // Spread the remainder one count per bin at a fixed stride so no
        // region of the histogram is favored.
        const int stride = std::max(1, 256 / rem);
        for (int b = 0; b < 256 && rem > 0; b += stride, --rem) hist[b] += 1;
    }
}

Lut equalize_lut(const Histogram& hist, int tile_pixels) {
    Lut lut{};
    long long cum = 0;
    const double scale = 255.0 / tile_pixels;
    for (int b = 0; b < 256; ++b) {
        cum += hist[b];
        lut[b] = clamp_u8(cum * scale);
    }
    return lut;
}

GrayU8 pad_to_grid(const GrayU8& img, int grid_rows, int grid_cols) {
    const int tile_h = (img.rows + grid_rows - 1) / grid_rows;
    const int tile_w = (img.cols + grid_cols - 1) / grid_cols;
    const int rows = tile_h * grid_rows;
    const int cols = tile_w * grid_cols;
    if (rows == img.rows && cols == img.cols) return img;
    GrayU8 out(rows, cols);
    for (int r = 0; r < rows; ++r) {
        const int sr = r < img.rows ? r : 2 * img.rows - 2 - r;
        for (int c = 0; c < cols; ++c) {
            const int sc = c < img.cols ? c : 2 * img.cols - 2 - c;
            out.at(r, c) = img.at(sr, sc);
        }
    }
    return out;
}

TileGrid build_tile_grid(const GrayU8& padded, const ClaheParams& params) {
    TileGrid grid;
    grid.tile_rows = params.grid_rows;
    grid.tile_cols = params.grid_cols;
    grid.tile_h = padded.rows / params.grid_rows;
    grid.tile_w = padded.cols / params.grid_cols;
    const int tile_pixels = grid.tile_h * grid.tile_w;
    const int threshold = clip_threshold(params.clip_limit, tile_pixels);
    grid.luts.resize(static_cast<std::size_t>(grid.tile_rows) * grid.tile_cols);
    for (int tr = 0; tr < grid.tile_rows; ++tr) {
        for (int tc = 0; tc < grid.tile_cols; ++tc) {
            Histogram hist{};
            const int r0 = tr * grid.tile_h;
            const int c0 = tc * grid.tile_w;
            for (int r = r0; r < r0 + grid.tile_h; ++r) {
                for (int c = c0; c < c0 + grid.tile_w; ++c) {
                    ++hist[padded.at(r, c)];
                }
            }
            clip_histogram(hist, threshold);
            grid.luts[static_cast<std::size_t>(tr) * grid.tile_cols + tc] =
                equalize_lut(hist, tile_pixels);
        }
    }
    return grid;
}

}  // namespace clahe_detail

namespace {

// Index pair + blend weight between adjacent tile centers, edge-clamped.
struct TileBlend {
    int lo, hi;
    double w;
};

TileBlend tile_blend(int pixel, int tile_size, int tiles) {
    const double f = (pixel + 0.5) / tile_size - 0.5;
    int lo = static_cast<int>(std::floor(f));
    double w = f - lo;
    if (lo < 0) { lo = 0; w = 0.0; }
    if (lo >= tiles - 1) { lo = tiles - 1; w = 0.0; }
    return {lo, std::min(lo + 1, tiles - 1), w};
}

}  // namespace

GrayU8 clahe(const GrayU8& channel, const ClaheParams& params) {
    params.validate();
    if (channel.rows < params.grid_rows || channel.cols < params.grid_cols) {
        throw std::invalid_argument("image smaller than the CLAHE tile grid");
    }
    using namespace clahe_detail;
    const GrayU8 padded = pad_to_grid(channel, params.grid_rows, params.grid_cols);
    const TileGrid grid = build_tile_grid(padded, params);

    GrayU8 out(channel.rows, channel.cols);
    for (int r = 0; r < channel.rows; ++r) {
        const TileBlend y = tile_blend(r, grid.tile_h, grid.tile_rows);
        for (int c = 0; c < channel.cols; ++c) {
            const TileBlend x = tile_blend(c, grid.tile_w, grid.tile_cols);
            const std::uint8_t v = channel.at(r, c);
            const double top = (1.0 - x.w) * grid.lut(y.lo, x.lo)[v] + x.w * grid.lut(y.lo, x.hi)[v];
            const double bot = (1.0 - x.w) * grid.lut(y.hi, x.lo)[v] + x.w * grid.lut(y.hi, x.hi)[v];
            out.at(r, c) = clamp_u8((1.0 - y.w) * top + y.w * bot);
        }
    }
    return out;
}

RgbU8 clahe_color(const RgbU8& rgb, const ClaheParams& params) {
    LabImage lab = rgb_to_lab(rgb);
    GrayU8 l8 = l_channel_u8(lab);
    l8 = clahe(l8, params);
    set_l_channel(lab, l8);
    return lab_to_rgb(lab);
}

}  // namespace xfish
