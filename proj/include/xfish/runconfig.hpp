#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "xfish/augment.hpp"
#include "xfish/model.hpp"
#include "xfish/multidomain.hpp"
#include "xfish/schedule.hpp"

namespace xfish {

struct SourceConfig {
    std::string name;
    DomainRole role = DomainRole::external_negative;
    std::filesystem::path dir;
    int draw_count = 0;
};

/// One experiment = one JSON file: dataset manifest, head/backbone, training
/// schedule, augmentation ranges, external domain sources, seed.
struct RunConfig {
    std::uint64_t seed = 42;
    std::filesystem::path manifest;
    HeadVariant head = HeadVariant::XFishHmMp;
    BackboneSpec backbone;
    PreprocessParams preprocess;
    TrainConfig train;
    AugmentConfig augment;
    double train_fraction = 0.8;
    std::vector<SourceConfig> sources;
};

/// Parses and validates; every schema violation is reported (field-by-field)
/// in a single ConfigError.
RunConfig load_run_config(const std::filesystem::path& path);

/// Expands a source's directory into a DomainSource pool (sorted for
/// determinism). Throws ConfigError when the directory holds no images.
DomainSource load_domain_source(const SourceConfig& cfg);

}  // namespace xfish
