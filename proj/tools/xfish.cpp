// xfish — weakly supervised fish detection: dataset preparation, training,
// evaluation, and clip triage driven by a single JSON run config.

#include <CLI11.hpp>

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "xfish/clahe.hpp"
#include "xfish/dataset.hpp"
#include "xfish/image_io.hpp"
#include "xfish/localizer.hpp"
#include "xfish/metrics.hpp"
#include "xfish/runconfig.hpp"
#include "xfish/synthetic.hpp"
#include "xfish/trainer.hpp"
#include "xfish/util.hpp"

namespace fs = std::filesystem;
using namespace xfish;

namespace {

bool deterministic_mode() {
    const char* v = std::getenv("XFISH_DETERMINISTIC");
    return v == nullptr || std::string(v) != "0";
}

std::string timestamp_tag() {
    const std::time_t t = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y%m%d-%H%M%S", &tm);
    return buf;
}

fs::path make_run_dir(const std::string& given, const std::string& command) {
    fs::path dir = given.empty() ? fs::path("runs") / (command + "-" + timestamp_tag())
                                 : fs::path(given);
    fs::create_directories(dir);
    return dir;
}

void snapshot_config(const fs::path& config_file, const fs::path& run_dir) {
    fs::copy_file(config_file, run_dir / "config.json", fs::copy_options::overwrite_existing);
}

struct TrainingSetup {
    DatasetManifest manifest;
    SplitResult project;
    std::vector<TrainSample> validation;
    std::unique_ptr<MultiDomainSampler> sampler;  // null without external sources
    EpochSampleFn source;
};

TrainingSetup prepare_training(const RunConfig& cfg) {
    TrainingSetup setup;
    setup.manifest = load_manifest(cfg.manifest);
    const auto train_frames = samples_from_manifest(setup.manifest, Split::train);
    if (train_frames.empty()) throw ConfigError("manifest has no train-split frames");

    std::vector<std::string> warnings;
    setup.project = stratified_split(train_frames, cfg.train_fraction, cfg.seed, &warnings);
    for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
    setup.validation = setup.project.validation;

    if (!cfg.sources.empty()) {
        std::vector<DomainSource> sources;
        for (const SourceConfig& sc : cfg.sources) sources.push_back(load_domain_source(sc));
        setup.sampler = std::make_unique<MultiDomainSampler>(setup.project.train, sources,
                                                             cfg.seed, cfg.train_fraction);
        const auto& ext = setup.sampler->validation_externals();
        setup.validation.insert(setup.validation.end(), ext.begin(), ext.end());
        setup.source = multidomain_source(*setup.sampler);
    } else {
        setup.source = fixed_source(setup.project.train);
    }
    if (setup.validation.empty()) throw ConfigError("validation split is empty");
    return setup;
}

void print_eval_summary(const EvalReport& report, double threshold) {
    const ConfusionMatrix& cm = report.confusion;
    std::cout << "threshold " << threshold << "\n"
              << "           Predicted-      Predicted+\n"
              << "Actual-    TN=" << cm.tn << "    FP=" << cm.fp << " ("
              << format_rate_percent(cm.fp, cm.negatives()) << "% FP/N)\n"
              << "Actual+    FN=" << cm.fn << " (" << format_rate_percent(cm.fn, cm.positives())
              << "% FN/P)    TP=" << cm.tp << "\n";
    if (report.roc) {
        std::cout << "AUC " << report.roc->auc << "\n";
    } else {
        std::cout << "AUC unavailable: " << report.roc_error << "\n";
    }
    std::cout << "throughput " << report.throughput_ips << " imgs/sec over "
              << report.frame_scores.size() << " frames";
    if (!report.unreadable.empty()) {
        std::cout << " (" << report.unreadable.size() << " unreadable, excluded)";
    }
    std::cout << "\n";
}

int cmd_prepare(const fs::path& root, const fs::path& out_manifest, int interval, bool use_clahe,
                fs::path clahe_out) {
    std::vector<std::string> warnings;
    const auto clips = scan_clip_folders(root, &warnings);
    for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
    const DatasetManifest manifest = split_frames(clips, interval);
    if (out_manifest.has_parent_path()) fs::create_directories(out_manifest.parent_path());
    save_manifest(manifest, out_manifest);
    std::cout << "manifest: " << out_manifest.string() << " (" << manifest.entries.size()
              << " frames, " << clips.size() << " clips)\n";

    if (use_clahe) {
        if (clahe_out.empty()) clahe_out = out_manifest.parent_path() / "clahe_tree";
        ClaheParams params;  // clip 2.0, 16x8 tiles
        DatasetManifest processed = manifest;
        for (std::size_t i = 0; i < manifest.entries.size(); ++i) {
            const FrameRef& e = manifest.entries[i];
            const fs::path rel = fs::relative(e.path, root);
            const fs::path dst = clahe_out / rel;
            fs::create_directories(dst.parent_path());
            write_png(clahe_color(read_rgb(e.path), params), dst);
            processed.entries[i].path = dst;
        }
        fs::path processed_manifest = out_manifest;
        processed_manifest.replace_extension(".clahe" + out_manifest.extension().string());
        save_manifest(processed, processed_manifest);
        std::cout << "clahe tree: " << clahe_out.string() << "\n"
                  << "clahe manifest: " << processed_manifest.string() << "\n";
    }
    return 0;
}

int cmd_train(const fs::path& config_file, const std::string& run_dir_arg) {
    const RunConfig cfg = load_run_config(config_file);
    const fs::path run_dir = make_run_dir(run_dir_arg, "train");
    snapshot_config(config_file, run_dir);

    TrainingSetup setup = prepare_training(cfg);
    Model model(cfg.backbone, cfg.head, cfg.preprocess.target_rows, cfg.preprocess.target_cols,
                cfg.seed);
    std::cout << to_string(cfg.head) << " (" << model.parameter_count() << " parameters), "
              << setup.project.train.size() << " project train / " << setup.validation.size()
              << " validation\n";

    const TrainReport report =
        train(model, setup.source, setup.validation, cfg.train, cfg.preprocess, cfg.augment,
              SchedulePhase::baseline, cfg.seed, run_dir, &std::cout);
    write_train_report(report, run_dir / "train_report.json");
    std::cout << "best val acc " << report.best_val_acc << " (epoch " << report.best_epoch
              << ") -> " << report.best_checkpoint << "\n";
    return 0;
}

int cmd_finetune(const fs::path& config_file, const fs::path& from, const std::string& run_dir_arg) {
    const RunConfig cfg = load_run_config(config_file);
    const fs::path run_dir = make_run_dir(run_dir_arg, "finetune");
    snapshot_config(config_file, run_dir);

    LoadedCheckpoint ckpt = load_checkpoint(from);
    TrainingSetup setup = prepare_training(cfg);
    std::cout << "fine-tuning " << to_string(ckpt.model.head()) << " from " << from.string()
              << " at lr " << cfg.train.initial_lr / cfg.train.finetune_lr_divisor << "\n";

    const TrainReport report = finetune(ckpt.model, setup.source, setup.validation, cfg.train,
                                        ckpt.preprocess, cfg.augment, cfg.seed, run_dir,
                                        &std::cout);
    write_train_report(report, run_dir / "train_report.json");
    std::cout << "best val acc " << report.best_val_acc << " (epoch " << report.best_epoch
              << ") -> " << report.best_checkpoint << "\n";
    return 0;
}

int cmd_eval(const fs::path& checkpoint, const fs::path& manifest_path, double threshold,
             const std::string& out_arg, int batch) {
    LoadedCheckpoint ckpt = load_checkpoint(checkpoint);
    const DatasetManifest manifest = load_manifest(manifest_path);
    const fs::path out_dir = make_run_dir(out_arg, "eval");

    const EvalReport report =
        evaluate_model(ckpt.model, manifest, ckpt.preprocess, batch, threshold);
    write_eval_report(report, threshold, out_dir / "eval_report.json", !deterministic_mode());
    write_scores_csv(report, out_dir / "scores.csv");
    if (report.roc) write_roc_svg(*report.roc, out_dir / "roc.svg");
    print_eval_summary(report, threshold);
    std::cout << "report: " << (out_dir / "eval_report.json").string() << "\n";
    return 0;
}

int cmd_triage(const fs::path& checkpoint, const fs::path& clip_dir, double threshold,
               bool save_overlays, const std::string& out_arg) {
    LoadedCheckpoint ckpt = load_checkpoint(checkpoint);
    if (!fs::is_directory(clip_dir)) throw ConfigError("clip directory not found: " + clip_dir.string());

    // A clip folder holds frames directly; a folder of clip folders is
    // triaged clip by clip.
    std::vector<std::pair<std::string, std::vector<fs::path>>> clips;
    std::vector<fs::path> direct_frames;
    for (const auto& e : fs::directory_iterator(clip_dir)) {
        if (e.is_regular_file() && is_image_file(e.path())) direct_frames.push_back(e.path());
    }
    std::sort(direct_frames.begin(), direct_frames.end());
    if (!direct_frames.empty()) {
        clips.emplace_back(clip_dir.filename().string(), std::move(direct_frames));
    } else {
        std::vector<fs::path> subdirs;
        for (const auto& e : fs::directory_iterator(clip_dir)) {
            if (e.is_directory()) subdirs.push_back(e.path());
        }
        std::sort(subdirs.begin(), subdirs.end());
        for (const fs::path& sub : subdirs) {
            std::vector<fs::path> frames;
            for (const auto& e : fs::directory_iterator(sub)) {
                if (e.is_regular_file() && is_image_file(e.path())) frames.push_back(e.path());
            }
            std::sort(frames.begin(), frames.end());
            if (!frames.empty()) clips.emplace_back(sub.filename().string(), std::move(frames));
        }
    }
    if (clips.empty()) throw ConfigError("no frames found under " + clip_dir.string());

    Model* localizer = nullptr;
    std::unique_ptr<Model> converted;
    if (save_overlays) {
        if (ckpt.model.head() == HeadVariant::XFishHmMp) {
            converted = std::make_unique<Model>(convert_to_localizer(ckpt.model));
            localizer = converted.get();
        } else if (ckpt.model.head() == HeadVariant::XFishHm) {
            localizer = &ckpt.model;
        } else {
            throw ConfigError("--save-overlays needs a heatmap-capable checkpoint (XFishHmMp)");
        }
    }

    const fs::path out_dir = make_run_dir(out_arg, "triage");
    std::vector<TriageResult> results;
    int kept = 0;
    for (auto& [clip_id, frames] : clips) {
        TriageResult result = triage(ckpt.model, clip_id, frames, ckpt.preprocess, threshold);
        if (result.keep) ++kept;
        for (const auto& skipped : result.skipped) {
            std::cerr << "warning: skipped undecodable frame " << skipped << "\n";
        }
        if (localizer) {
            const fs::path overlay_dir = out_dir / "overlays" / clip_id;
            fs::create_directories(overlay_dir);
            for (const FrameTriage& f : result.frames) {
                const GrayF pre = preprocess_only(to_float(read_gray(f.path)), ckpt.preprocess);
                const HeatMap hm = compute_heatmap(*localizer, pre);
                const GrayF up = upscale_heatmap(hm, pre.rows, pre.cols);
                write_png(overlay(pre, up, 0.5),
                          overlay_dir / fs::path(f.path).filename().replace_extension(".png"));
            }
        }
        results.push_back(std::move(result));
    }
    write_triage_json(results, out_dir / "triage.json");
    std::cout << kept << "/" << results.size() << " clips kept at threshold " << threshold << "\n"
              << "report: " << (out_dir / "triage.json").string() << "\n";
    return 0;
}

int cmd_bench(const fs::path& checkpoint, const fs::path& manifest_path, int batch) {
    LoadedCheckpoint ckpt = load_checkpoint(checkpoint);
    const DatasetManifest manifest = load_manifest(manifest_path);
    const EvalReport report = evaluate_model(ckpt.model, manifest, ckpt.preprocess, batch, 0.5);
    std::cout << report.throughput_ips << " imgs/sec (batch " << batch << ", "
              << report.frame_scores.size() << " frames)\n";
    return 0;
}

int cmd_make_synthetic(const fs::path& out, const SyntheticOptions& opts, std::uint64_t seed) {
    const SyntheticSummary summary = make_synthetic(out, opts, seed);
    std::cout << "project frames: " << summary.project_frames << "\n"
              << "external negatives: " << summary.external_negatives << "\n"
              << "external positives: " << summary.external_positives << "\n"
              << "tree: " << out.string() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"weakly supervised fish detection pipeline"};
    app.require_subcommand(1);

    // prepare
    auto* prepare = app.add_subcommand("prepare", "scan clip folders into a train/test manifest");
    std::string prepare_root, prepare_out, clahe_out;
    int interval = 10;
    bool use_clahe = false;
    prepare->add_option("--root", prepare_root, "dataset root (<habitat>/{valid,empty}/<clip>)")
        ->required();
    prepare->add_option("--out", prepare_out, "output manifest path")->required();
    prepare->add_option("--interval", interval, "train-frame interval (default 10)");
    prepare->add_flag("--clahe", use_clahe, "also write a CLAHE-processed image tree + manifest");
    prepare->add_option("--clahe-out", clahe_out, "destination for the processed tree");

    // extract-frames
    auto* extract = app.add_subcommand("extract-frames", "decode a video into a frame folder");
    std::string video, frames_out;
    extract->add_option("--video", video, "input video file")->required();
    extract->add_option("--out", frames_out, "output frame folder")->required();

    // train / finetune
    auto* train_cmd = app.add_subcommand("train", "baseline training from a run config");
    std::string config_file, run_dir;
    train_cmd->add_option("--config", config_file, "run config JSON")->required();
    train_cmd->add_option("--run-dir", run_dir, "run directory (default runs/<cmd>-<time>)");

    auto* finetune_cmd = app.add_subcommand("finetune", "one fine-tuning cycle from a checkpoint");
    std::string ft_config, ft_from, ft_run_dir;
    finetune_cmd->add_option("--config", ft_config, "run config JSON")->required();
    finetune_cmd->add_option("--from", ft_from, "checkpoint base path")->required();
    finetune_cmd->add_option("--run-dir", ft_run_dir, "run directory");

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint on a manifest's test split");
    std::string eval_ckpt, eval_manifest, eval_out;
    double threshold = 0.5;
    int eval_batch = 4;
    eval_cmd->add_option("--checkpoint", eval_ckpt, "checkpoint base path")->required();
    eval_cmd->add_option("--manifest", eval_manifest, "dataset manifest")->required();
    eval_cmd->add_option("--threshold", threshold, "detection threshold (default 0.5)");
    eval_cmd->add_option("--batch", eval_batch, "batch size");
    eval_cmd->add_option("--out", eval_out, "output directory");

    // triage
    auto* triage_cmd = app.add_subcommand("triage", "flag empty clips/frames under a directory");
    std::string triage_ckpt, triage_clips, triage_out;
    double triage_threshold = 0.5;
    bool save_overlays = false;
    triage_cmd->add_option("--checkpoint", triage_ckpt, "checkpoint base path")->required();
    triage_cmd->add_option("--clips", triage_clips, "clip folder (or folder of clip folders)")
        ->required();
    triage_cmd->add_option("--threshold", triage_threshold, "detection threshold");
    triage_cmd->add_flag("--save-overlays", save_overlays, "write heatmap overlays per frame");
    triage_cmd->add_option("--out", triage_out, "output directory");

    // bench
    auto* bench_cmd = app.add_subcommand("bench", "measure inference throughput");
    std::string bench_ckpt, bench_manifest;
    int bench_batch = 1;
    bench_cmd->add_option("--checkpoint", bench_ckpt, "checkpoint base path")->required();
    bench_cmd->add_option("--manifest", bench_manifest, "dataset manifest")->required();
    bench_cmd->add_option("--batch", bench_batch, "batch size (default 1)");

    // make-synthetic
    auto* synth_cmd = app.add_subcommand("make-synthetic", "generate the desk-scale blob dataset");
    std::string synth_out;
    SyntheticOptions synth_opts;
    std::uint64_t synth_seed = 2026;
    synth_cmd->add_option("--out", synth_out, "output directory")->required();
    synth_cmd->add_option("--habitats", synth_opts.habitats, "habitat count");
    synth_cmd->add_option("--valid-clips", synth_opts.valid_clips_per_habitat, "fish clips per habitat");
    synth_cmd->add_option("--empty-clips", synth_opts.empty_clips_per_habitat, "empty clips per habitat");
    synth_cmd->add_option("--frames-per-clip", synth_opts.frames_per_clip, "frames per clip");
    synth_cmd->add_option("--size", synth_opts.frame_rows, "square frame side in pixels");
    synth_cmd->add_option("--external-negatives", synth_opts.external_negatives, "negative pool size");
    synth_cmd->add_option("--external-positives", synth_opts.external_positives, "positive pool size");
    synth_cmd->add_option("--seed", synth_seed, "generator seed");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;  // usage errors exit 2, --help exits 0
    }

    try {
        if (prepare->parsed()) {
            return cmd_prepare(prepare_root, prepare_out, interval, use_clahe, clahe_out);
        }
        if (extract->parsed()) {
            const int n = extract_frames(video, frames_out);
            std::cout << n << " frames -> " << frames_out << "\n";
            return 0;
        }
        if (train_cmd->parsed()) return cmd_train(config_file, run_dir);
        if (finetune_cmd->parsed()) return cmd_finetune(ft_config, ft_from, ft_run_dir);
        if (eval_cmd->parsed()) {
            return cmd_eval(eval_ckpt, eval_manifest, threshold, eval_out, eval_batch);
        }
        if (triage_cmd->parsed()) {
            return cmd_triage(triage_ckpt, triage_clips, triage_threshold, save_overlays,
                              triage_out);
        }
        if (bench_cmd->parsed()) return cmd_bench(bench_ckpt, bench_manifest, bench_batch);
        if (synth_cmd->parsed()) {
            synth_opts.frame_cols = synth_opts.frame_rows;
            return cmd_make_synthetic(synth_out, synth_opts, synth_seed);
        }
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
