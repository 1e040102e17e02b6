#include "xfish/dataset.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "xfish/image_io.hpp"
#include "xfish/util.hpp"

namespace fs = std::filesystem;

namespace xfish {

std::string to_string(ClipLabel label) {
    return label == ClipLabel::fish ? "fish" : "empty";
}

ClipLabel clip_label_from_string(const std::string& s) {
    if (s == "fish") return ClipLabel::fish;
    if (s == "empty") return ClipLabel::empty;
    throw ConfigError("unknown clip label: '" + s + "'");
}

namespace {

std::string utc_now_iso8601() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::vector<fs::path> sorted_subdirs(const fs::path& dir) {
    std::vector<fs::path> out;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (e.is_directory()) out.push_back(e.path());
    }
    std::sort(out.begin(), out.end());
    return out;
}

void scan_label_dir(const fs::path& habitat_dir, ClipLabel label,
                    std::vector<ClipRecord>& clips, std::vector<std::string>* warnings) {
    const fs::path dir = habitat_dir / (label == ClipLabel::fish ? "valid" : "empty");
    if (!fs::is_directory(dir)) return;
    for (const fs::path& clip_dir : sorted_subdirs(dir)) {
        ClipRecord rec;
        rec.habitat_id = habitat_dir.filename().string();
        rec.clip_id = rec.habitat_id + "/" + clip_dir.filename().string();
        rec.label = label;
        for (const auto& e : fs::directory_iterator(clip_dir)) {
            if (e.is_regular_file() && is_image_file(e.path())) rec.frame_paths.push_back(e.path());
        }
        std::sort(rec.frame_paths.begin(), rec.frame_paths.end());
        if (rec.frame_paths.empty()) {
            if (warnings) warnings->push_back("skipping clip with no frames: " + clip_dir.string());
            continue;
        }
        clips.push_back(std::move(rec));
    }
}

}  // namespace

std::vector<ClipRecord> scan_clip_folders(const fs::path& root, std::vector<std::string>* warnings) {
    if (!fs::is_directory(root)) {
        throw ConfigError("dataset root does not exist: " + root.string());
    }
    std::vector<ClipRecord> clips;
    for (const fs::path& habitat_dir : sorted_subdirs(root)) {
        scan_label_dir(habitat_dir, ClipLabel::fish, clips, warnings);
        scan_label_dir(habitat_dir, ClipLabel::empty, clips, warnings);
    }
    return clips;
}

DatasetManifest split_frames(const std::vector<ClipRecord>& clips, int interval) {
    if (interval < 1) throw std::invalid_argument("interval must be >= 1");
    DatasetManifest m;
    m.interval = interval;
    m.created_at = utc_now_iso8601();
    for (const ClipRecord& clip : clips) {
        for (std::size_t i = 0; i < clip.frame_paths.size(); ++i) {
            FrameRef ref;
            ref.path = clip.frame_paths[i];
            ref.clip_id = clip.clip_id;
            ref.habitat_id = clip.habitat_id;
            ref.label = clip.label;
            ref.split = (i % static_cast<std::size_t>(interval) == 0) ? Split::train : Split::test;
            m.entries.push_back(std::move(ref));
        }
    }
    return m;
}

namespace {

constexpr const char* kManifestMagic = "# xfish-manifest v1 ";
constexpr const char* kManifestColumns = "path,clip_id,habitat_id,label,split";

void check_field(const std::string& value, const char* what) {
    if (value.find(',') != std::string::npos || value.find('\n') != std::string::npos) {
        throw ConfigError(std::string("manifest field '") + what + "' contains a delimiter: " + value);
    }
}

}  // namespace

void save_manifest(const DatasetManifest& manifest, const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write manifest: " + path.string());
    nlohmann::json header = {{"interval", manifest.interval}, {"created_at", manifest.created_at}};
    out << kManifestMagic << header.dump() << "\n" << kManifestColumns << "\n";
    for (const FrameRef& e : manifest.entries) {
        check_field(e.path.string(), "path");
        check_field(e.clip_id, "clip_id");
        check_field(e.habitat_id, "habitat_id");
        out << e.path.string() << ',' << e.clip_id << ',' << e.habitat_id << ','
            << to_string(e.label) << ',' << (e.split == Split::train ? "train" : "test") << "\n";
    }
    if (!out) throw ConfigError("write failed: " + path.string());
}

DatasetManifest load_manifest(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read manifest: " + path.string());
    DatasetManifest m;
    std::string line;
    int line_no = 0;

    auto parse_error = [&](const std::string& what) {
        return ConfigError("manifest parse error at " + path.string() + ":" +
                           std::to_string(line_no) + ": " + what);
    };

    ++line_no;
    if (!std::getline(in, line) || line.rfind(kManifestMagic, 0) != 0) {
        throw parse_error("missing 'xfish-manifest v1' header line");
    }
    try {
        nlohmann::json header = nlohmann::json::parse(line.substr(std::strlen(kManifestMagic)));
        m.interval = header.at("interval").get<int>();
        m.created_at = header.at("created_at").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw parse_error(std::string("bad header JSON: ") + e.what());
    }

    ++line_no;
    if (!std::getline(in, line) || line != kManifestColumns) {
        throw parse_error("expected column line '" + std::string(kManifestColumns) + "'");
    }

    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) fields.push_back(field);
        if (fields.size() != 5) {
            throw parse_error("expected 5 comma-separated fields, got " +
                              std::to_string(fields.size()));
        }
        FrameRef ref;
        ref.path = fields[0];
        ref.clip_id = fields[1];
        ref.habitat_id = fields[2];
        try {
            ref.label = clip_label_from_string(fields[3]);
        } catch (const ConfigError&) {
            throw parse_error("bad label field '" + fields[3] + "'");
        }
        if (fields[4] == "train") {
            ref.split = Split::train;
        } else if (fields[4] == "test") {
            ref.split = Split::test;
        } else {
            throw parse_error("bad split field '" + fields[4] + "'");
        }
        m.entries.push_back(std::move(ref));
    }
    return m;
}

std::vector<fs::path> validate_manifest(const DatasetManifest& manifest) {
    std::vector<fs::path> missing;
    for (const FrameRef& e : manifest.entries) {
        if (!fs::exists(e.path)) missing.push_back(e.path);
    }
    return missing;
}

}  // namespace xfish
