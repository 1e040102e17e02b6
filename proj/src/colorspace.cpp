#include "xfish/colorspace.hpp"

#include <cmath>

namespace xfish {

namespace {

// D65 reference white.
constexpr double kXn = 0.95047;
constexpr double kYn = 1.0;
constexpr double kZn = 1.08883;

double srgb_to_linear(double c) {
    return c <= 0.04045 ? c / 12.92 : std::pow((c + 0.055) / 1.055, 2.4);
}

double linear_to_srgb(double c) {
    return c <= 0.0031308 ? 12.92 * c : 1.055 * std::pow(c, 1.0 / 2.4) - 0.055;
}

double lab_f(double t) {
    constexpr double d3 = (6.0 / 29.0) * (6.0 / 29.0) * (6.0 / 29.0);
    return t > d3 ? std::cbrt(t) : t / (3.0 * (6.0 / 29.0) * (6.0 / 29.0)) + 4.0 / 29.0;
}

double lab_f_inv(double t) {
    constexpr double d = 6.0 / 29.0;
    return t > d ? t * t * t : 3.0 * d * d * (t - 4.0 / 29.0);
}

}  // namespace

LabImage rgb_to_lab(const RgbU8& rgb) {
    LabImage lab;
    lab.rows = rgb.rows;
    lab.cols = rgb.cols;
    const std::size_t n = static_cast<std::size_t>(rgb.rows) * rgb.cols;
    lab.L.resize(n);
    lab.a.resize(n);
    lab.b.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double r = srgb_to_linear(rgb.pix[3 * i + 0] / 255.0);
        const double g = srgb_to_linear(rgb.pix[3 * i + 1] / 255.0);
        const double b = srgb_to_linear(rgb.pix[3 * i + 2] / 255.0);
        const double x = 0.4124564 * r + 0.3575761 * g + 0.1804375 * b;
        const double y = 0.2126729 * r + 0.7151522 * g + 0.0721750 * b;
        const double z = 0.0193339 * r + 0.1191920 * g + 0.9503041 * b;
        const double fx = lab_f(x / kXn);
        const double fy = lab_f(y / kYn);
        const double fz = lab_f(z / kZn);
        lab.L[i] = 116.0 * fy - 16.0;
        lab.a[i] = 500.0 * (fx - fy);
        lab.b[i] = 200.0 * (fy - fz);
    }
    return lab;
}

RgbU8 lab_to_rgb(const LabImage& lab) {
    RgbU8 out(lab.rows, lab.cols);
    const std::size_t n = static_cast<std::size_t>(lab.rows) * lab.cols;
    for (std::size_t i = 0; i < n; ++i) {
        const double fy = (lab.L[i] + 16.0) / 116.0;
        const double fx = fy + lab.a[i] / 500.0;
        const double fz = fy - lab.b[i] / 200.0;
        const double x = kXn * lab_f_inv(fx);
        const double y = kYn * lab_f_inv(fy);
        const double z = kZn * lab_f_inv(fz);
        const double r = 3.2404542 * x - 1.5371385 * y - 0.4985314 * z;
        const double g = -0.9692660 * x + 1.8760108 * y + 0.0415560 * z;
        const double b = 0.0556434 * x - 0.2040259 * y + 1.0572252 * z;
        out.pix[3 * i + 0] = clamp_u8(255.0 * linear_to_srgb(std::clamp(r, 0.0, 1.0)));
        out.pix[3 * i + 1] = clamp_u8(255.0 * linear_to_srgb(std::clamp(g, 0.0, 1.0)));
        out.pix[3 * i + 2] = clamp_u8(255.0 * linear_to_srgb(std::clamp(b, 0.0, 1.0)));
    }
    return out;
}

GrayU8 l_channel_u8(const LabImage& lab) {
    GrayU8 out(lab.rows, lab.cols);
    for (std::size_t i = 0; i < lab.L.size(); ++i) {
        out.pix[i] = clamp_u8(lab.L[i] * 255.0 / 100.0);
    }
    return out;
}

void set_l_channel(LabImage& lab, const GrayU8& l8) {
    for (std::size_t i = 0; i < lab.L.size(); ++i) {
        lab.L[i] = l8.pix[i] * 100.0 / 255.0;
    }
}

}  // namespace xfish
