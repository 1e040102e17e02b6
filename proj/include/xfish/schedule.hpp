#pragma once

#include <string>

namespace xfish {

/// Training-pipeline knobs. Baseline defaults follow the reference setup:
/// batches of four, lr halving after 10 stagnant epochs, restart from the
/// best weights after 32 (at most twice, initial lr scaled by 0.9 each time),
/// fine-tuning at lr/10 with a single cycle.
struct TrainConfig {
    int batch_size = 4;
    double initial_lr = 1e-4;
    int lr_patience = 10;
    int restart_patience = 32;
    double restart_lr_decay = 0.9;
    int max_restarts = 2;
    double finetune_lr_divisor = 10.0;
    int max_epochs = 200;

    void validate() const;
};

/// 1e-5 for XFishMp, 1e-4 for the heatmap heads.
double default_initial_lr(const std::string& head_name);

enum class SchedulePhase { baseline, finetune };

struct ScheduleState {
    double lr = 0.0;
    double initial_lr = 0.0;
    double best_val_acc = -1.0;
    int epochs_since_improve_lr = 0;
    int epochs_since_improve_restart = 0;
    int restarts_used = 0;
    SchedulePhase phase = SchedulePhase::baseline;
};

ScheduleState make_schedule_state(double initial_lr, SchedulePhase phase = SchedulePhase::baseline);

enum class ScheduleAction { proceed, halve_lr, restart, stop };

std::string to_string(ScheduleAction action);

struct ScheduleStep {
    ScheduleState state;
    ScheduleAction action = ScheduleAction::proceed;
};

/// Pure epoch-end transition. Strict improvement resets both stagnation
/// counters; hitting lr_patience halves the lr; hitting restart_patience
/// restarts from the best weights with lr = initial_lr * decay^(k+1) while
/// restarts remain (baseline) and stops otherwise. The fine-tune phase never
/// restarts: one cycle only.
ScheduleStep step_schedule(const ScheduleState& state, double epoch_val_acc,
                           const TrainConfig& config);

}  // namespace xfish
