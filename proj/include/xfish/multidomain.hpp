#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace xfish {

enum class SampleDomain { project, general_negative, fish_positive };

/// Path-level training sample; pixels are loaded lazily at batch time.
struct TrainSample {
    std::filesystem::path path;
    int label = 0;  // 0 = no-fish, 1 = fish
    SampleDomain domain = SampleDomain::project;

    bool operator==(const TrainSample&) const = default;
};

enum class DomainRole { external_negative, external_positive };

/// External image pool with a weak label fixed by its role.
struct DomainSource {
    std::string name;
    DomainRole role = DomainRole::external_negative;
    std::vector<std::filesystem::path> pool;
    int draw_count = 0;  // per training epoch
};

struct SplitResult {
    std::vector<TrainSample> train;
    std::vector<TrainSample> validation;
};

/// Label-stratified split. Train takes round(fraction * class size) of each
/// class; classes with fewer than 2 samples go entirely to train with a
/// warning.
SplitResult stratified_split(const std::vector<TrainSample>& samples, double train_fraction,
                             std::uint64_t seed, std::vector<std::string>* warnings = nullptr);

struct EpochComposition {
    int epoch_index = 0;
    std::uint64_t seed = 0;
    int n_project = 0;
    std::map<std::string, int> per_source;
};

/// Per-epoch multi-domain training set: the fixed project training samples
/// plus draw_count images re-drawn per epoch from each external source.
///
/// Validation composition stays frozen: the project validation split is
/// fixed up front, and each source reserves a proportional external
/// validation draw at construction; reserved images never enter a training
/// epoch.
class MultiDomainSampler {
public:
    MultiDomainSampler(std::vector<TrainSample> project_train, std::vector<DomainSource> sources,
                       std::uint64_t base_seed, double train_fraction = 0.8);

    /// Project train + per-source draws, sampled without replacement within
    /// the epoch. Deterministic in (base_seed, epoch_index).
    std::vector<TrainSample> draw_epoch(int epoch_index) const;

    EpochComposition composition(int epoch_index) const;

    /// Frozen external validation samples (append these to the project
    /// validation split once, at startup).
    const std::vector<TrainSample>& validation_externals() const { return validation_externals_; }

    int epoch_size() const;

private:
    std::vector<TrainSample> project_train_;
    std::vector<DomainSource> sources_;            // pools with validation reserves removed
    std::vector<TrainSample> validation_externals_;
    std::uint64_t base_seed_ = 0;
};

int weak_label_for(DomainRole role);
SampleDomain domain_for(DomainRole role);

}  // namespace xfish
