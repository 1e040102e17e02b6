#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace xfish {

enum class ClipLabel { fish, empty };

std::string to_string(ClipLabel label);
ClipLabel clip_label_from_string(const std::string& s);

/// One video clip, pre-extracted into an ordered frame folder. All frames
/// inherit the clip's label.
struct ClipRecord {
    std::string clip_id;
    std::string habitat_id;
    ClipLabel label = ClipLabel::empty;
    std::vector<std::filesystem::path> frame_paths;
};

enum class Split { train, test };

struct FrameRef {
    std::filesystem::path path;
    std::string clip_id;
    std::string habitat_id;
    ClipLabel label = ClipLabel::empty;
    Split split = Split::train;

    bool operator==(const FrameRef&) const = default;
};

struct DatasetManifest {
    std::vector<FrameRef> entries;
    std::string created_at;  // ISO-8601 UTC
    int interval = 10;

    bool operator==(const DatasetManifest&) const = default;
};

/// Walks `<root>/<habitat>/{valid,empty}/<clip>/` and returns one ClipRecord
/// per clip folder, frames sorted by filename. Habitats are free to have
/// only one of the two subfolders. Clips with no image files are skipped
/// with a warning naming the path.
std::vector<ClipRecord> scan_clip_folders(const std::filesystem::path& root,
                                          std::vector<std::string>* warnings = nullptr);

/// Frame-level train/test split: within each clip, 0-based frame indices
/// 0, interval, 2*interval, ... go to train, everything else to test.
DatasetManifest split_frames(const std::vector<ClipRecord>& clips, int interval = 10);

/// Line-oriented CSV with a JSON header line carrying the protocol params.
void save_manifest(const DatasetManifest& manifest, const std::filesystem::path& path);
DatasetManifest load_manifest(const std::filesystem::path& path);

/// Paths referenced by the manifest that do not exist on disk. Parsing and
/// validation are separate: load_manifest never touches the frame files.
std::vector<std::filesystem::path> validate_manifest(const DatasetManifest& manifest);

}  // namespace xfish
