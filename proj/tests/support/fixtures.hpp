#pragma once

// Shared desk-scale fixtures: a synthetic clip tree rendered once per
// process, scanned and split through the real pipeline.

#include <filesystem>
#include <random>
#include <string>

#include "xfish/dataset.hpp"
#include "xfish/multidomain.hpp"
#include "xfish/synthetic.hpp"
#include "xfish/trainer.hpp"

namespace xfish::testsupport {

struct TempDir {
    std::filesystem::path path;
    explicit TempDir(const std::string& tag) {
        path = std::filesystem::temp_directory_path() /
               (tag + "_" + std::to_string(std::random_device{}()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
};

struct DeskDataset {
    TempDir dir;
    DatasetManifest manifest;
    SplitResult project;  // stratified split of the manifest's train frames
    DomainSource negatives;
    DomainSource positives;

    DeskDataset(int frame_side, int frames_per_clip, int externals, std::uint64_t seed)
        : dir("xfish_desk") {
        SyntheticOptions opts;
        opts.habitats = 2;
        opts.valid_clips_per_habitat = 1;
        opts.empty_clips_per_habitat = 1;
        opts.frames_per_clip = frames_per_clip;
        opts.frame_rows = frame_side;
        opts.frame_cols = frame_side;
        opts.external_negatives = externals;
        opts.external_positives = externals;
        make_synthetic(dir.path, opts, seed);

        manifest = split_frames(scan_clip_folders(dir.path / "project"), 4);
        project = stratified_split(samples_from_manifest(manifest, Split::train), 0.8, seed);

        negatives.name = "gen_neg";
        negatives.role = DomainRole::external_negative;
        positives.name = "fish_pos";
        positives.role = DomainRole::external_positive;
        for (const auto& e :
             std::filesystem::directory_iterator(dir.path / "external_negative")) {
            negatives.pool.push_back(e.path());
        }
        for (const auto& e :
             std::filesystem::directory_iterator(dir.path / "external_positive")) {
            positives.pool.push_back(e.path());
        }
        std::sort(negatives.pool.begin(), negatives.pool.end());
        std::sort(positives.pool.begin(), positives.pool.end());
    }
};

}  // namespace xfish::testsupport
