#include "xfish/localizer.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "xfish/augment.hpp"
#include "xfish/image_io.hpp"
#include "xfish/imaging.hpp"

namespace fs = std::filesystem;

namespace xfish {

HeatMap compute_heatmap(Model& localizer, const GrayF& preprocessed) {
    if (localizer.head() != HeadVariant::XFishHm) {
        throw std::invalid_argument("heatmaps require an XFishHm model, got " +
                                    to_string(localizer.head()));
    }
    if (preprocessed.rows != localizer.input_rows() || preprocessed.cols != localizer.input_cols()) {
        throw std::invalid_argument("heatmap input shape mismatch");
    }
    nn::Tensor t(1, 1, preprocessed.rows, preprocessed.cols);
    std::copy(preprocessed.pix.begin(), preprocessed.pix.end(), t.data.begin());
    ForwardResult out = localizer.forward(t, false);
    return std::move(out.heatmaps[0]);
}

GrayF upscale_heatmap(const HeatMap& hm, int target_rows, int target_cols) {
    GrayF grid(hm.rows, hm.cols);
    std::copy(hm.values.begin(), hm.values.end(), grid.pix.begin());
    return resize_to(grid, target_rows, target_cols);
}

RgbU8 overlay(const GrayF& base, const GrayF& heat, double alpha) {
    if (base.rows != heat.rows || base.cols != heat.cols) {
        throw std::invalid_argument("overlay: base and heatmap shapes differ");
    }
    RgbU8 out(base.rows, base.cols);
    for (int r = 0; r < base.rows; ++r) {
        for (int c = 0; c < base.cols; ++c) {
            const double g = 255.0 * std::clamp(base.at(r, c), 0.0, 1.0);
            const double h = std::clamp(heat.at(r, c), 0.0, 1.0);
            const double w = alpha * h;  // zero heat leaves the base untouched
            out.at(r, c, 0) = clamp_u8((1.0 - w) * g + w * 255.0);
            out.at(r, c, 1) = clamp_u8((1.0 - w) * g);
            out.at(r, c, 2) = clamp_u8((1.0 - w) * g);
        }
    }
    return out;
}

TriageResult triage(Model& model, const std::string& clip_id, const std::vector<fs::path>& frames,
                    const PreprocessParams& pp, double threshold) {
    if (frames.empty()) throw std::invalid_argument("triage: clip has no frames");
    TriageResult result;
    result.clip_id = clip_id;
    for (std::size_t i = 0; i < frames.size(); ++i) {
        GrayF img;
        try {
            img = preprocess_only(to_float(read_gray(frames[i])), pp);
        } catch (const std::runtime_error&) {
            result.skipped.push_back(frames[i].string());
            continue;
        }
        nn::Tensor t(1, 1, img.rows, img.cols);
        std::copy(img.pix.begin(), img.pix.end(), t.data.begin());
        const ForwardResult out = model.forward(t, false);
        FrameTriage ft;
        ft.index = static_cast<int>(i);
        ft.path = frames[i].string();
        ft.score = out.probs[0];  // max over the heatmap for Hm variants
        ft.keep = ft.score >= threshold;
        result.clip_score = std::max(result.clip_score, ft.score);
        result.frames.push_back(std::move(ft));
    }
    result.keep = result.clip_score >= threshold;
    return result;
}

void write_triage_json(const std::vector<TriageResult>& results, const fs::path& path) {
    nlohmann::json j = nlohmann::json::array();
    for (const TriageResult& r : results) {
        nlohmann::json frames = nlohmann::json::array();
        for (const FrameTriage& f : r.frames) {
            frames.push_back({{"index", f.index}, {"path", f.path}, {"score", f.score},
                              {"keep", f.keep}});
        }
        j.push_back({{"clip_id", r.clip_id},
                     {"keep", r.keep},
                     {"clip_score", r.clip_score},
                     {"per_frame", frames},
                     {"skipped", r.skipped}});
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write triage report: " + path.string());
    out << j.dump(2) << "\n";
}

std::vector<CellRegion> heatmap_regions(const HeatMap& hm, double cell_threshold) {
    std::vector<CellRegion> regions;
    std::vector<int> region_of(hm.values.size(), -1);
    for (int r = 0; r < hm.rows; ++r) {
        for (int c = 0; c < hm.cols; ++c) {
            if (hm.at(r, c) < cell_threshold || region_of[static_cast<std::size_t>(r) * hm.cols + c] >= 0) {
                continue;
            }
            // Flood fill a new region.
            CellRegion region{r, c, r, c, hm.at(r, c)};
            const int id = static_cast<int>(regions.size());
            std::vector<std::pair<int, int>> stack{{r, c}};
            region_of[static_cast<std::size_t>(r) * hm.cols + c] = id;
            while (!stack.empty()) {
                const auto [y, x] = stack.back();
                stack.pop_back();
                region.row_min = std::min(region.row_min, y);
                region.row_max = std::max(region.row_max, y);
                region.col_min = std::min(region.col_min, x);
                region.col_max = std::max(region.col_max, x);
                region.peak = std::max(region.peak, hm.at(y, x));
                constexpr int dy[4] = {-1, 1, 0, 0};
                constexpr int dx[4] = {0, 0, -1, 1};
                for (int k = 0; k < 4; ++k) {
                    const int ny = y + dy[k], nx = x + dx[k];
                    if (ny < 0 || nx < 0 || ny >= hm.rows || nx >= hm.cols) continue;
                    std::size_t idx = static_cast<std::size_t>(ny) * hm.cols + nx;
                    if (region_of[idx] >= 0 || hm.values[idx] < cell_threshold) continue;
                    region_of[idx] = id;
                    stack.emplace_back(ny, nx);
                }
            }
            regions.push_back(region);
        }
    }
    return regions;
}

}  // namespace xfish
