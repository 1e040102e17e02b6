#include "xfish/imaging.hpp"

#include <cmath>
#include <stdexcept>

namespace xfish {

void PreprocessParams::validate() const {
    if (pad_fraction < 0.0) throw std::invalid_argument("pad_fraction must be >= 0");
    if (target_rows <= 0 || target_cols <= 0) {
        throw std::invalid_argument("target dimensions must be positive");
    }
}

GrayU8 to_grayscale(const RgbU8& rgb) {
    GrayU8 out(rgb.rows, rgb.cols);
    for (int r = 0; r < rgb.rows; ++r) {
        for (int c = 0; c < rgb.cols; ++c) {
            const double y = 0.299 * rgb.at(r, c, 0) + 0.587 * rgb.at(r, c, 1) +
                             0.114 * rgb.at(r, c, 2);
            out.at(r, c) = clamp_u8(y);
        }
    }
    return out;
}

GrayF pad_border(const GrayF& img, double pad_fraction) {
    if (pad_fraction < 0.0) throw std::invalid_argument("pad_fraction must be >= 0");
    const int pr = static_cast<int>(std::floor(pad_fraction * img.rows));
    const int pc = static_cast<int>(std::floor(pad_fraction * img.cols));
    GrayF out(img.rows + 2 * pr, img.cols + 2 * pc, 0.0);
    for (int r = 0; r < img.rows; ++r) {
        for (int c = 0; c < img.cols; ++c) {
            out.at(r + pr, c + pc) = img.at(r, c);
        }
    }
    return out;
}

GrayF resize_to(const GrayF& img, int target_rows, int target_cols) {
    if (target_rows <= 0 || target_cols <= 0) {
        throw std::invalid_argument("resize target must be positive");
    }
    if (img.rows == target_rows && img.cols == target_cols) return img;
    GrayF out(target_rows, target_cols);
    const double sr = static_cast<double>(img.rows) / target_rows;
    const double sc = static_cast<double>(img.cols) / target_cols;
    for (int r = 0; r < target_rows; ++r) {
        double fy = (r + 0.5) * sr - 0.5;
        fy = std::clamp(fy, 0.0, static_cast<double>(img.rows - 1));
        const int y0 = static_cast<int>(fy);
        const int y1 = std::min(y0 + 1, img.rows - 1);
        const double wy = fy - y0;
        for (int c = 0; c < target_cols; ++c) {
            double fx = (c + 0.5) * sc - 0.5;
            fx = std::clamp(fx, 0.0, static_cast<double>(img.cols - 1));
            const int x0 = static_cast<int>(fx);
            const int x1 = std::min(x0 + 1, img.cols - 1);
            const double wx = fx - x0;
            out.at(r, c) = (1.0 - wy) * ((1.0 - wx) * img.at(y0, x0) + wx * img.at(y0, x1)) +
                           wy * ((1.0 - wx) * img.at(y1, x0) + wx * img.at(y1, x1));
        }
    }
    return out;
}

GrayF pad_to(const GrayF& img, int target_rows, int target_cols) {
    if (img.rows > target_rows || img.cols > target_cols) {
        throw std::invalid_argument("pad_to: input exceeds target shape");
    }
    if (img.rows == target_rows && img.cols == target_cols) return img;
    GrayF out(target_rows, target_cols, 0.0);
    const int or_ = (target_rows - img.rows) / 2;
    const int oc = (target_cols - img.cols) / 2;
    for (int r = 0; r < img.rows; ++r) {
        for (int c = 0; c < img.cols; ++c) {
            out.at(r + or_, c + oc) = img.at(r, c);
        }
    }
    return out;
}

GrayF fit_to(const GrayF& img, int target_rows, int target_cols) {
    if (img.rows <= target_rows && img.cols <= target_cols) {
        return pad_to(img, target_rows, target_cols);
    }
    return resize_to(img, target_rows, target_cols);
}

GrayF normalize_unit(const GrayF& img) {
    if (img.empty()) return img;
    double lo = img.pix[0], hi = img.pix[0];
    for (double v : img.pix) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    GrayF out(img.rows, img.cols);
    if (hi <= lo) return out;  // constant image -> zeros
    const double inv = 1.0 / (hi - lo);
    for (std::size_t i = 0; i < img.pix.size(); ++i) out.pix[i] = (img.pix[i] - lo) * inv;
    return out;
}

}  // namespace xfish
