#include "xfish/synthetic.hpp"

#include <cmath>
#include <random>

#include "xfish/image_io.hpp"
#include "xfish/util.hpp"

namespace fs = std::filesystem;

namespace xfish {

namespace {

struct Texture {
    double base;
    double amp1, fy1, fx1, ph1;
    double amp2, fy2, fx2, ph2;
    double noise;
};

Texture random_texture(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Texture t;
    t.base = 70.0 + 60.0 * u(rng);
    t.amp1 = 15.0 + 20.0 * u(rng);
    t.fy1 = 2.0 + 8.0 * u(rng);
    t.fx1 = 2.0 + 8.0 * u(rng);
    t.ph1 = 6.28 * u(rng);
    t.amp2 = 5.0 + 15.0 * u(rng);
    t.fy2 = 10.0 + 20.0 * u(rng);
    t.fx2 = 10.0 + 20.0 * u(rng);
    t.ph2 = 6.28 * u(rng);
    t.noise = 4.0 + 6.0 * u(rng);
    return t;
}

GrayF render_background(const Texture& t, int rows, int cols, double drift,
                        std::mt19937_64& rng) {
    GrayF img(rows, cols);
    std::normal_distribution<double> noise(0.0, t.noise);
    for (int r = 0; r < rows; ++r) {
        const double y = static_cast<double>(r) / rows;
        for (int c = 0; c < cols; ++c) {
            const double x = static_cast<double>(c) / cols;
            double v = t.base;
            v += t.amp1 * std::sin(t.fy1 * y + t.fx1 * x * 6.28 + t.ph1 + drift);
            v += t.amp2 * std::sin(t.fy2 * y * 6.28 + t.ph2 - drift) *
                 std::cos(t.fx2 * x * 6.28 + t.ph2);
            v += noise(rng);
            img.at(r, c) = std::clamp(v, 0.0, 255.0);
        }
    }
    return img;
}

struct Blob {
    double cy, cx;        // center, fraction of the frame
    double ry, rx;        // radii, fraction of the frame
    double angle;
    double vy, vx;        // drift per frame, fraction of the frame
    double brightness;    // additive intensity at the core
};

Blob random_blob(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Blob b;
    b.cy = 0.25 + 0.5 * u(rng);
    b.cx = 0.25 + 0.5 * u(rng);
    b.ry = 0.06 + 0.06 * u(rng);
    b.rx = b.ry * (1.8 + 1.2 * u(rng));  // elongated, fish-like
    b.angle = 3.14 * u(rng);
    b.vy = 0.01 * (u(rng) - 0.5);
    b.vx = 0.02 * (u(rng) - 0.5);
    b.brightness = 90.0 + 60.0 * u(rng);
    return b;
}

void draw_blob(GrayF& img, const Blob& b, int frame_index) {
    const double cy = (b.cy + b.vy * frame_index) * img.rows;
    const double cx = (b.cx + b.vx * frame_index) * img.cols;
    const double ry = b.ry * img.rows;
    const double rx = b.rx * img.cols;
    const double cosa = std::cos(b.angle);
    const double sina = std::sin(b.angle);
    const int r0 = std::max(0, static_cast<int>(cy - rx - ry));
    const int r1 = std::min(img.rows - 1, static_cast<int>(cy + rx + ry));
    const int c0 = std::max(0, static_cast<int>(cx - rx - ry));
    const int c1 = std::min(img.cols - 1, static_cast<int>(cx + rx + ry));
    for (int r = r0; r <= r1; ++r) {
        for (int c = c0; c <= c1; ++c) {
            const double dy = r - cy;
            const double dx = c - cx;
            const double u = (dx * cosa + dy * sina) / rx;
            const double v = (-dx * sina + dy * cosa) / ry;
            const double d2 = u * u + v * v;
            if (d2 >= 1.0) continue;
            // Bright body with a soft edge and a darker outline band.
            const double body = b.brightness * (1.0 - d2);
            const double rim = d2 > 0.55 ? -40.0 * (d2 - 0.55) : 0.0;
            img.at(r, c) = std::clamp(img.at(r, c) + body + rim * 2.0, 0.0, 255.0);
        }
    }
}

void write_frame(const GrayF& img, const fs::path& path) {
    write_png(to_u8(img), path);
}

}  // namespace

SyntheticSummary make_synthetic(const fs::path& out_dir, const SyntheticOptions& opts,
                                std::uint64_t seed) {
    SyntheticSummary summary;
    char name[64];

    for (int h = 0; h < opts.habitats; ++h) {
        std::snprintf(name, sizeof(name), "h%02d", h + 1);
        const fs::path habitat_dir = out_dir / "project" / name;
        std::mt19937_64 habitat_rng(derive_seed(seed, 0x4a, static_cast<std::uint64_t>(h)));
        const Texture texture = random_texture(habitat_rng);

        for (int kind = 0; kind < 2; ++kind) {
            const bool valid = kind == 0;
            const int clips = valid ? opts.valid_clips_per_habitat : opts.empty_clips_per_habitat;
            for (int k = 0; k < clips; ++k) {
                std::snprintf(name, sizeof(name), "c%02d", k + 1);
                const fs::path clip_dir = habitat_dir / (valid ? "valid" : "empty") / name;
                fs::create_directories(clip_dir);
                std::mt19937_64 rng(derive_seed(seed, valid ? 0xf1u : 0xe0u,
                                                static_cast<std::uint64_t>(h * 1000 + k)));
                std::uniform_int_distribution<int> blob_count(1, 3);
                std::vector<Blob> blobs;
                if (valid) {
                    const int n = blob_count(rng);
                    for (int i = 0; i < n; ++i) blobs.push_back(random_blob(rng));
                }
                for (int f = 0; f < opts.frames_per_clip; ++f) {
                    GrayF img = render_background(texture, opts.frame_rows, opts.frame_cols,
                                                  0.05 * f, rng);
                    for (const Blob& b : blobs) draw_blob(img, b, f);
                    std::snprintf(name, sizeof(name), "frame_%06d.png", f);
                    write_frame(img, clip_dir / name);
                    ++summary.project_frames;
                }
            }
        }
    }

    // General-domain negatives: a different texture family (gradients and
    // rectangles), never any blob.
    const fs::path neg_dir = out_dir / "external_negative";
    fs::create_directories(neg_dir);
    for (int i = 0; i < opts.external_negatives; ++i) {
        std::mt19937_64 rng(derive_seed(seed, 0xbe, static_cast<std::uint64_t>(i)));
        std::uniform_real_distribution<double> u(0.0, 1.0);
        GrayF img(opts.frame_rows, opts.frame_cols);
        const double lo = 40.0 + 80.0 * u(rng);
        const double hi = lo + 40.0 + 80.0 * u(rng);
        const bool horizontal = u(rng) < 0.5;
        for (int r = 0; r < img.rows; ++r) {
            for (int c = 0; c < img.cols; ++c) {
                const double t = horizontal ? static_cast<double>(c) / img.cols
                                            : static_cast<double>(r) / img.rows;
                img.at(r, c) = lo + (hi - lo) * t;
            }
        }
        const int rects = 1 + static_cast<int>(3 * u(rng));
        for (int k = 0; k < rects; ++k) {
            const int rr = static_cast<int>(u(rng) * (img.rows - 10));
            const int cc = static_cast<int>(u(rng) * (img.cols - 10));
            const int rh = 5 + static_cast<int>(u(rng) * img.rows / 3);
            const int rw = 5 + static_cast<int>(u(rng) * img.cols / 3);
            const double level = 255.0 * u(rng);
            for (int r = rr; r < std::min(img.rows, rr + rh); ++r) {
                for (int c = cc; c < std::min(img.cols, cc + rw); ++c) {
                    img.at(r, c) = 0.5 * img.at(r, c) + 0.5 * level;
                }
            }
        }
        std::snprintf(name, sizeof(name), "neg_%06d.png", i);
        write_frame(img, neg_dir / name);
        ++summary.external_negatives;
    }

    // Fish-domain positives: the same blob generator over flat noisy
    // backgrounds unlike any project habitat.
    const fs::path pos_dir = out_dir / "external_positive";
    fs::create_directories(pos_dir);
    for (int i = 0; i < opts.external_positives; ++i) {
        std::mt19937_64 rng(derive_seed(seed, 0xfe, static_cast<std::uint64_t>(i)));
        std::uniform_real_distribution<double> u(0.0, 1.0);
        std::normal_distribution<double> noise(0.0, 8.0);
        GrayF img(opts.frame_rows, opts.frame_cols);
        const double base = 50.0 + 100.0 * u(rng);
        for (double& v : img.pix) v = std::clamp(base + noise(rng), 0.0, 255.0);
        const int n = 1 + static_cast<int>(2 * u(rng));
        for (int k = 0; k < n; ++k) draw_blob(img, random_blob(rng), 0);
        std::snprintf(name, sizeof(name), "pos_%06d.png", i);
        write_frame(img, pos_dir / name);
        ++summary.external_positives;
    }

    return summary;
}

}  // namespace xfish
