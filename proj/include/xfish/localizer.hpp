#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "xfish/image.hpp"
#include "xfish/model.hpp"

namespace xfish {

/// Heatmap of one preprocessed [0,1] grayscale image. The model must be an
/// XFishHm localizer.
HeatMap compute_heatmap(Model& localizer, const GrayF& preprocessed);

/// Bilinear upscale of the coarse heatmap grid back to image resolution;
/// values stay inside [0,1].
GrayF upscale_heatmap(const HeatMap& hm, int target_rows, int target_cols);

/// Heat rendered as a red channel alpha-blended over the grayscale base
/// (both [0,1], same shape). Pixels where the heatmap is 0 pass through
/// unchanged.
RgbU8 overlay(const GrayF& base, const GrayF& heat, double alpha);

struct FrameTriage {
    int index = 0;
    std::string path;
    double score = 0.0;
    bool keep = false;
};

struct TriageResult {
    std::string clip_id;
    double clip_score = 0.0;  // max over frame scores
    bool keep = false;        // clip_score >= threshold
    std::vector<FrameTriage> frames;
    std::vector<std::string> skipped;  // undecodable frames
};

/// Scores every frame of a clip with the classifier (Mp variants use the
/// scalar output; Hm uses max over the heatmap) and keeps the clip iff any
/// frame reaches the threshold.
TriageResult triage(Model& model, const std::string& clip_id,
                    const std::vector<std::filesystem::path>& frames, const PreprocessParams& pp,
                    double threshold = 0.5);

void write_triage_json(const std::vector<TriageResult>& results,
                       const std::filesystem::path& path);

/// Connected heatmap cells above the cell threshold (4-connectivity),
/// reported as inclusive cell-grid boxes. Exposed for inspection only; no
/// accuracy contract.
struct CellRegion {
    int row_min = 0, col_min = 0, row_max = 0, col_max = 0;
    double peak = 0.0;
};

std::vector<CellRegion> heatmap_regions(const HeatMap& hm, double cell_threshold = 0.5);

}  // namespace xfish
