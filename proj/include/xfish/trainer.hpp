#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "xfish/augment.hpp"
#include "xfish/dataset.hpp"
#include "xfish/model.hpp"
#include "xfish/multidomain.hpp"
#include "xfish/schedule.hpp"

namespace xfish {

/// Emitted when a training step produces a non-finite loss.
class TrainError : public std::runtime_error {
public:
    explicit TrainError(const std::string& msg) : std::runtime_error(msg) {}
};

struct EpochRecord {
    int epoch = 0;
    double lr = 0.0;
    double train_loss = 0.0;
    double train_acc = 0.0;
    double val_acc = 0.0;
    std::string action;

    bool operator==(const EpochRecord&) const = default;
};

struct TrainReport {
    std::vector<EpochRecord> epochs;
    double best_val_acc = 0.0;
    int best_epoch = -1;
    std::string best_checkpoint;  // checkpoint base path
    double wall_seconds = 0.0;
    std::uint64_t seed = 0;
};

void write_train_report(const TrainReport& report, const std::filesystem::path& path);
TrainReport read_train_report(const std::filesystem::path& path);

/// Frames of one manifest split as weakly-labelled samples (fish -> 1).
std::vector<TrainSample> samples_from_manifest(const DatasetManifest& manifest, Split split);

/// Produces the training list for one epoch (fixed set, or a multi-domain
/// re-draw).
using EpochSampleFn = std::function<std::vector<TrainSample>(int epoch_index)>;

EpochSampleFn fixed_source(std::vector<TrainSample> samples);
EpochSampleFn multidomain_source(const MultiDomainSampler& sampler);

/// Binary accuracy of the frozen model on preprocessed (never augmented)
/// samples, at threshold 0.5.
double validation_accuracy(Model& model, const std::vector<TrainSample>& samples,
                           const PreprocessParams& pp, int batch_size = 4);

/// Adam + binary cross-entropy training loop with the plateau/restart
/// schedule. The best checkpoint (highest validation accuracy seen) is kept
/// under run_dir/best; restarts reload it. Deterministic given the seed.
TrainReport train(Model& model, const EpochSampleFn& epoch_samples,
                  const std::vector<TrainSample>& validation, const TrainConfig& config,
                  const PreprocessParams& pp, const AugmentConfig& aug, SchedulePhase phase,
                  std::uint64_t seed, const std::filesystem::path& run_dir,
                  std::ostream* log = nullptr);

/// One fine-tuning cycle: initial lr divided by finetune_lr_divisor, no
/// restarts (stagnation stops the run).
TrainReport finetune(Model& model, const EpochSampleFn& epoch_samples,
                     const std::vector<TrainSample>& validation, const TrainConfig& config,
                     const PreprocessParams& pp, const AugmentConfig& aug, std::uint64_t seed,
                     const std::filesystem::path& run_dir, std::ostream* log = nullptr);

}  // namespace xfish
