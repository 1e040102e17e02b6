#pragma once

#include <cstdint>
#include <filesystem>

#include "xfish/image.hpp"

namespace xfish {

/// Desk-scale synthetic dataset: elliptical blob "fish" swimming over
/// habitat-specific procedural textures, plus external-domain stand-ins.
/// Written as the standard clip-folder tree:
///   <out>/project/<habitat>/{valid,empty}/<clip>/frame_%06d.png
///   <out>/external_negative/*.png   (general-domain, no blobs)
///   <out>/external_positive/*.png   (blobs on out-of-project backgrounds)
struct SyntheticOptions {
    int habitats = 4;
    int valid_clips_per_habitat = 2;
    int empty_clips_per_habitat = 2;
    int frames_per_clip = 32;
    int frame_rows = 128;
    int frame_cols = 128;
    int external_negatives = 200;
    int external_positives = 200;
};

struct SyntheticSummary {
    int project_frames = 0;
    int external_negatives = 0;
    int external_positives = 0;
};

SyntheticSummary make_synthetic(const std::filesystem::path& out_dir, const SyntheticOptions& opts,
                                std::uint64_t seed);

}  // namespace xfish
