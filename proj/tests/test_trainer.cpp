#include <doctest.h>

#include <cmath>

#include "support/fixtures.hpp"
#include "xfish/trainer.hpp"
#include "xfish/util.hpp"

using namespace xfish;
using testsupport::DeskDataset;
using testsupport::TempDir;

namespace {

// One small blob-vs-background dataset per test binary run.
DeskDataset& desk() {
    static DeskDataset dataset(32, 12, 24, 2026);
    return dataset;
}

BackboneSpec small_backbone() {
    BackboneSpec spec;
    spec.feature_channels = 24;
    return spec;
}

PreprocessParams small_pp() {
    PreprocessParams pp;
    pp.target_rows = 32;
    pp.target_cols = 32;
    return pp;
}

TrainConfig fast_config() {
    TrainConfig config;
    config.initial_lr = 3e-3;  // ~150 Adam steps total; the defaults are far slower
    config.max_epochs = 50;
    return config;
}

}  // namespace

TEST_CASE("training fits the separable synthetic dataset") {
    Model model(small_backbone(), HeadVariant::XFishHmMp, 32, 32, 1);
    AugmentConfig aug;
    TempDir run("xfish_run");

    const TrainReport report =
        train(model, fixed_source(desk().project.train), desk().project.validation, fast_config(),
              small_pp(), aug, SchedulePhase::baseline, 7, run.path);

    REQUIRE(!report.epochs.empty());
    double best_train_acc = 0.0;
    for (const EpochRecord& e : report.epochs) best_train_acc = std::max(best_train_acc, e.train_acc);
    CHECK(best_train_acc >= 0.95);
    CHECK(report.best_val_acc >= 0.9);

    SUBCASE("loss trends down over the first epochs") {
        REQUIRE(report.epochs.size() >= 5);
        CHECK(report.epochs[4].train_loss < report.epochs[0].train_loss);
    }

    SUBCASE("schedule trace replays through step_schedule") {
        ScheduleState s = make_schedule_state(fast_config().initial_lr);
        for (const EpochRecord& e : report.epochs) {
            CHECK(e.lr == doctest::Approx(s.lr).epsilon(1e-12));
            const ScheduleStep step = step_schedule(s, e.val_acc, fast_config());
            CHECK(e.action == to_string(step.action));
            s = step.state;
        }
    }

    SUBCASE("resuming from the best checkpoint reproduces its accuracy") {
        LoadedCheckpoint best = load_checkpoint(report.best_checkpoint);
        const double acc =
            validation_accuracy(best.model, desk().project.validation, best.preprocess);
        CHECK(acc == doctest::Approx(report.best_val_acc).epsilon(1e-6));
    }

    SUBCASE("train report round trips through JSON") {
        write_train_report(report, run.path / "report.json");
        const TrainReport loaded = read_train_report(run.path / "report.json");
        CHECK(loaded.epochs == report.epochs);
        CHECK(loaded.best_val_acc == report.best_val_acc);
    }
}

TEST_CASE("training is deterministic given the seed") {
    AugmentConfig aug;
    TrainConfig config = fast_config();
    config.max_epochs = 3;
    TempDir run_a("xfish_run_a");
    TempDir run_b("xfish_run_b");

    Model a(small_backbone(), HeadVariant::XFishHmMp, 32, 32, 3);
    Model b(small_backbone(), HeadVariant::XFishHmMp, 32, 32, 3);
    const TrainReport ra = train(a, fixed_source(desk().project.train),
                                 desk().project.validation, config, small_pp(), aug,
                                 SchedulePhase::baseline, 11, run_a.path);
    const TrainReport rb = train(b, fixed_source(desk().project.train),
                                 desk().project.validation, config, small_pp(), aug,
                                 SchedulePhase::baseline, 11, run_b.path);
    CHECK(ra.epochs == rb.epochs);
}

TEST_CASE("monotone validation accuracy never changes the lr") {
    // Drive the schedule exactly as the trainer does, with an improving
    // accuracy stream.
    TrainConfig config = fast_config();
    ScheduleState s = make_schedule_state(config.initial_lr);
    for (int epoch = 0; epoch < 40; ++epoch) {
        const ScheduleStep step = step_schedule(s, 0.5 + 0.01 * epoch, config);
        CHECK(step.action == ScheduleAction::proceed);
        CHECK(step.state.lr == config.initial_lr);
        s = step.state;
    }
}

TEST_CASE("non-finite loss aborts with lr and batch composition") {
    Model model(small_backbone(), HeadVariant::XFishHmMp, 32, 32, 5);
    // Poison the head bias: it feeds the logits directly (a NaN planted
    // before a ReLU would be masked to zero instead).
    model.params().back()->value[0] = std::numeric_limits<double>::quiet_NaN();
    AugmentConfig aug;
    TrainConfig config = fast_config();
    config.max_epochs = 1;
    TempDir run("xfish_run_nan");
    try {
        train(model, fixed_source(desk().project.train), desk().project.validation, config,
              small_pp(), aug, SchedulePhase::baseline, 13, run.path);
        FAIL("expected TrainError");
    } catch (const TrainError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("lr=") != std::string::npos);
        CHECK(msg.find(".png") != std::string::npos);
    }
}

TEST_CASE("finetune starts at a tenth of the configured lr and never restarts") {
    TrainConfig config;
    config.initial_lr = default_initial_lr("XFishMp");
    config.max_epochs = 2;
    CHECK(config.initial_lr / config.finetune_lr_divisor == doctest::Approx(1e-6));
    config.initial_lr = default_initial_lr("XFishHmMp");
    CHECK(config.initial_lr / config.finetune_lr_divisor == doctest::Approx(1e-5));

    Model model(small_backbone(), HeadVariant::XFishHmMp, 32, 32, 6);
    AugmentConfig aug;
    TempDir run("xfish_run_ft");
    MultiDomainSampler sampler(desk().project.train, {desk().negatives, desk().positives}, 17);
    auto validation = desk().project.validation;
    const auto& externals = sampler.validation_externals();
    validation.insert(validation.end(), externals.begin(), externals.end());

    const TrainReport report = finetune(model, multidomain_source(sampler), validation, config,
                                        small_pp(), aug, 19, run.path);
    REQUIRE(!report.epochs.empty());
    CHECK(report.epochs[0].lr == doctest::Approx(1e-5));
    for (const EpochRecord& e : report.epochs) CHECK(e.action != "restart");
}

TEST_CASE("restart reloads the best weights and decays the initial lr") {
    // Patience small enough to force restarts quickly on a hard-to-improve
    // stream: empty-only validation means accuracy saturates immediately.
    Model model(small_backbone(), HeadVariant::XFishHmMp, 32, 32, 7);
    AugmentConfig aug;
    aug.enabled = false;
    TrainConfig config = fast_config();
    config.lr_patience = 2;
    config.restart_patience = 4;
    config.max_epochs = 30;
    TempDir run("xfish_run_restart");

    const TrainReport report =
        train(model, fixed_source(desk().project.train), desk().project.validation, config,
              small_pp(), aug, SchedulePhase::baseline, 23, run.path);

    int restarts = 0, stops = 0;
    double lr_after_restart = 0.0;
    for (const EpochRecord& e : report.epochs) {
        if (e.action == "restart") {
            ++restarts;
            lr_after_restart = config.initial_lr * std::pow(config.restart_lr_decay, restarts);
        } else if (restarts > 0 && e.action == "continue" && lr_after_restart > 0.0) {
            CHECK(e.lr == doctest::Approx(lr_after_restart));
            lr_after_restart = 0.0;  // only check the first epoch after the restart
        } else if (e.action == "stop") {
            ++stops;
        }
    }
    CHECK(restarts <= 2);
    if (stops > 0) CHECK(restarts == 2);
}
