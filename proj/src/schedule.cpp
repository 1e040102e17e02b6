#include "xfish/schedule.hpp"

#include <cmath>
#include <stdexcept>

namespace xfish {

void TrainConfig::validate() const {
    if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
    if (initial_lr <= 0.0) throw std::invalid_argument("initial_lr must be > 0");
    if (lr_patience < 1 || restart_patience < 1) {
        throw std::invalid_argument("patiences must be >= 1");
    }
    if (restart_lr_decay <= 0.0 || restart_lr_decay > 1.0) {
        throw std::invalid_argument("restart_lr_decay must be in (0,1]");
    }
    if (max_restarts < 0) throw std::invalid_argument("max_restarts must be >= 0");
    if (finetune_lr_divisor <= 0.0) throw std::invalid_argument("finetune_lr_divisor must be > 0");
    if (max_epochs < 1) throw std::invalid_argument("max_epochs must be >= 1");
}

double default_initial_lr(const std::string& head_name) {
    return head_name == "XFishMp" ? 1e-5 : 1e-4;
}

ScheduleState make_schedule_state(double initial_lr, SchedulePhase phase) {
    ScheduleState s;
    s.lr = initial_lr;
    s.initial_lr = initial_lr;
    s.phase = phase;
    return s;
}

std::string to_string(ScheduleAction action) {
    switch (action) {
        case ScheduleAction::proceed: return "continue";
        case ScheduleAction::halve_lr: return "halve_lr";
        case ScheduleAction::restart: return "restart";
        case ScheduleAction::stop: return "stop";
    }
    return "?";
}

ScheduleStep step_schedule(const ScheduleState& state, double epoch_val_acc,
                           const TrainConfig& config) {
    if (epoch_val_acc < 0.0 || epoch_val_acc > 1.0) {
        throw std::invalid_argument("validation accuracy outside [0,1]");
    }
    ScheduleStep step{state, ScheduleAction::proceed};
    ScheduleState& s = step.state;

    if (epoch_val_acc > s.best_val_acc) {  // strict: ties count as stagnation
        s.best_val_acc = epoch_val_acc;
        s.epochs_since_improve_lr = 0;
        s.epochs_since_improve_restart = 0;
        return step;
    }

    ++s.epochs_since_improve_lr;
    ++s.epochs_since_improve_restart;

    if (s.epochs_since_improve_restart >= config.restart_patience) {
        if (s.phase == SchedulePhase::finetune || s.restarts_used >= config.max_restarts) {
            step.action = ScheduleAction::stop;
            return step;
        }
        ++s.restarts_used;
        s.lr = s.initial_lr * std::pow(config.restart_lr_decay, s.restarts_used);
        s.epochs_since_improve_lr = 0;
        s.epochs_since_improve_restart = 0;
        step.action = ScheduleAction::restart;
        return step;
    }

    if (s.epochs_since_improve_lr >= config.lr_patience) {
        s.lr *= 0.5;
        s.epochs_since_improve_lr = 0;
        step.action = ScheduleAction::halve_lr;
        return step;
    }

    return step;
}

}  // namespace xfish
