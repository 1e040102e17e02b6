#include "xfish/runconfig.hpp"

#include <algorithm>
#include <fstream>

#include <nlohmann/json.hpp>

#include "xfish/image_io.hpp"
#include "xfish/util.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace xfish {

namespace {

class FieldErrors {
public:
    void add(const std::string& field, const std::string& what) {
        errors_.push_back("  " + field + ": " + what);
    }
    bool empty() const { return errors_.empty(); }
    [[noreturn]] void raise(const fs::path& path) const {
        std::string msg = "invalid run config " + path.string() + ":";
        for (const std::string& e : errors_) msg += "\n" + e;
        throw ConfigError(msg);
    }

private:
    std::vector<std::string> errors_;
};

template <typename T>
void read_field(const json& j, const char* key, T& out, FieldErrors& errors,
                const std::string& prefix) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception&) {
        errors.add(prefix + key, "wrong type");
    }
}

void read_range(const json& j, const char* key, double& lo, double& hi, FieldErrors& errors,
                const std::string& prefix) {
    if (!j.contains(key)) return;
    try {
        const auto arr = j.at(key).get<std::vector<double>>();
        if (arr.size() != 2) {
            errors.add(prefix + key, "expected [low, high]");
            return;
        }
        lo = arr[0];
        hi = arr[1];
    } catch (const json::exception&) {
        errors.add(prefix + key, "expected [low, high]");
    }
}

}  // namespace

RunConfig load_run_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config: " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("config is not valid JSON (" + path.string() + "): " + e.what());
    }

    RunConfig cfg;
    FieldErrors errors;

    read_field(j, "seed", cfg.seed, errors, "");
    std::string manifest;
    read_field(j, "manifest", manifest, errors, "");
    cfg.manifest = manifest;

    bool lr_given = false;
    if (j.contains("model")) {
        const json& m = j.at("model");
        std::string head = to_string(cfg.head);
        read_field(m, "head", head, errors, "model.");
        try {
            cfg.head = head_from_string(head);
        } catch (const ConfigError&) {
            errors.add("model.head", "expected XFishMp | XFishHmMp | XFishHm");
        }
        if (m.contains("backbone")) {
            const json& b = m.at("backbone");
            read_field(b, "name", cfg.backbone.name, errors, "model.backbone.");
            read_field(b, "output_stride", cfg.backbone.output_stride, errors, "model.backbone.");
            read_field(b, "feature_channels", cfg.backbone.feature_channels, errors,
                       "model.backbone.");
            read_field(b, "pretrained", cfg.backbone.pretrained, errors, "model.backbone.");
        }
    }

    if (j.contains("preprocess")) {
        const json& p = j.at("preprocess");
        read_field(p, "pad_fraction", cfg.preprocess.pad_fraction, errors, "preprocess.");
        if (p.contains("target")) {
            try {
                const auto t = p.at("target").get<std::vector<int>>();
                if (t.size() != 2) {
                    errors.add("preprocess.target", "expected [rows, cols]");
                } else {
                    cfg.preprocess.target_rows = t[0];
                    cfg.preprocess.target_cols = t[1];
                }
            } catch (const json::exception&) {
                errors.add("preprocess.target", "expected [rows, cols]");
            }
        }
    }

    if (j.contains("train")) {
        const json& t = j.at("train");
        read_field(t, "batch_size", cfg.train.batch_size, errors, "train.");
        if (t.contains("initial_lr")) {
            lr_given = true;
            read_field(t, "initial_lr", cfg.train.initial_lr, errors, "train.");
        }
        read_field(t, "lr_patience", cfg.train.lr_patience, errors, "train.");
        read_field(t, "restart_patience", cfg.train.restart_patience, errors, "train.");
        read_field(t, "restart_lr_decay", cfg.train.restart_lr_decay, errors, "train.");
        read_field(t, "max_restarts", cfg.train.max_restarts, errors, "train.");
        read_field(t, "finetune_lr_divisor", cfg.train.finetune_lr_divisor, errors, "train.");
        read_field(t, "max_epochs", cfg.train.max_epochs, errors, "train.");
    }
    if (!lr_given) cfg.train.initial_lr = default_initial_lr(to_string(cfg.head));

    if (j.contains("augment")) {
        const json& a = j.at("augment");
        read_field(a, "enabled", cfg.augment.enabled, errors, "augment.");
        read_range(a, "rotation_deg", cfg.augment.rotation_deg_min, cfg.augment.rotation_deg_max,
                   errors, "augment.");
        read_field(a, "hflip_prob", cfg.augment.hflip_prob, errors, "augment.");
        read_range(a, "axis_scale_range", cfg.augment.axis_scale_min, cfg.augment.axis_scale_max,
                   errors, "augment.");
        read_field(a, "perspective_jitter_fraction", cfg.augment.perspective_jitter_fraction,
                   errors, "augment.");
        read_range(a, "noise_sigma_range", cfg.augment.noise_sigma_min, cfg.augment.noise_sigma_max,
                   errors, "augment.");
    }

    if (j.contains("split")) {
        read_field(j.at("split"), "train_fraction", cfg.train_fraction, errors, "split.");
    }

    if (j.contains("sources")) {
        if (!j.at("sources").is_array()) {
            errors.add("sources", "expected an array");
        } else {
            int idx = 0;
            for (const json& s : j.at("sources")) {
                const std::string prefix = "sources[" + std::to_string(idx) + "].";
                SourceConfig sc;
                read_field(s, "name", sc.name, errors, prefix);
                std::string role;
                read_field(s, "role", role, errors, prefix);
                if (role == "external_negative") {
                    sc.role = DomainRole::external_negative;
                } else if (role == "external_positive") {
                    sc.role = DomainRole::external_positive;
                } else {
                    errors.add(prefix + "role", "expected external_negative | external_positive");
                }
                std::string dir;
                read_field(s, "dir", dir, errors, prefix);
                sc.dir = dir;
                read_field(s, "draw_count", sc.draw_count, errors, prefix);
                if (sc.draw_count < 0) errors.add(prefix + "draw_count", "must be >= 0");
                if (sc.name.empty()) errors.add(prefix + "name", "must not be empty");
                cfg.sources.push_back(std::move(sc));
                ++idx;
            }
        }
    }

    if (cfg.manifest.empty()) errors.add("manifest", "required");
    try {
        cfg.preprocess.validate();
    } catch (const std::invalid_argument& e) {
        errors.add("preprocess", e.what());
    }
    try {
        cfg.train.validate();
    } catch (const std::invalid_argument& e) {
        errors.add("train", e.what());
    }
    try {
        cfg.augment.validate();
    } catch (const std::invalid_argument& e) {
        errors.add("augment", e.what());
    }
    if (cfg.train_fraction <= 0.0 || cfg.train_fraction >= 1.0) {
        errors.add("split.train_fraction", "must be in (0,1)");
    }

    if (!errors.empty()) errors.raise(path);
    return cfg;
}

DomainSource load_domain_source(const SourceConfig& cfg) {
    if (!fs::is_directory(cfg.dir)) {
        throw ConfigError("source '" + cfg.name + "': directory not found: " + cfg.dir.string());
    }
    DomainSource src;
    src.name = cfg.name;
    src.role = cfg.role;
    src.draw_count = cfg.draw_count;
    for (const auto& e : fs::directory_iterator(cfg.dir)) {
        if (e.is_regular_file() && is_image_file(e.path())) src.pool.push_back(e.path());
    }
    std::sort(src.pool.begin(), src.pool.end());
    if (src.pool.empty()) {
        throw ConfigError("source '" + cfg.name + "': no images under " + cfg.dir.string());
    }
    return src;
}

}  // namespace xfish
