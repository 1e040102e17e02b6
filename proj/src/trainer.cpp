#include "xfish/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <ostream>
#include <random>
#include <sstream>

#include <nlohmann/json.hpp>

#include "xfish/image_io.hpp"
#include "xfish/util.hpp"

namespace fs = std::filesystem;

namespace xfish {

namespace {

GrayF load_gray_image(const fs::path& path) {
    return to_float(read_gray(path));
}

nn::Tensor batch_tensor(const std::vector<GrayF>& images) {
    nn::Tensor t(static_cast<int>(images.size()), 1, images[0].rows, images[0].cols);
    for (std::size_t s = 0; s < images.size(); ++s) {
        std::copy(images[s].pix.begin(), images[s].pix.end(),
                  t.data.begin() + static_cast<std::ptrdiff_t>(s * t.sample_size()));
    }
    return t;
}

}  // namespace

std::vector<TrainSample> samples_from_manifest(const DatasetManifest& manifest, Split split) {
    std::vector<TrainSample> out;
    for (const FrameRef& e : manifest.entries) {
        if (e.split != split) continue;
        TrainSample s;
        s.path = e.path;
        s.label = e.label == ClipLabel::fish ? 1 : 0;
        s.domain = SampleDomain::project;
        out.push_back(std::move(s));
    }
    return out;
}

EpochSampleFn fixed_source(std::vector<TrainSample> samples) {
    return [samples = std::move(samples)](int) { return samples; };
}

EpochSampleFn multidomain_source(const MultiDomainSampler& sampler) {
    return [&sampler](int epoch) { return sampler.draw_epoch(epoch); };
}

double validation_accuracy(Model& model, const std::vector<TrainSample>& samples,
                           const PreprocessParams& pp, int batch_size) {
    if (samples.empty()) throw std::invalid_argument("validation set is empty");
    long long correct = 0;
    std::vector<GrayF> images;
    std::vector<int> labels;
    auto flush = [&]() {
        if (images.empty()) return;
        const ForwardResult out = model.forward(batch_tensor(images), false);
        for (std::size_t i = 0; i < labels.size(); ++i) {
            const int pred = out.probs[i] >= 0.5 ? 1 : 0;
            if (pred == labels[i]) ++correct;
        }
        images.clear();
        labels.clear();
    };
    for (const TrainSample& s : samples) {
        images.push_back(preprocess_only(load_gray_image(s.path), pp));
        labels.push_back(s.label);
        if (static_cast<int>(images.size()) == batch_size) flush();
    }
    flush();
    return static_cast<double>(correct) / static_cast<double>(samples.size());
}

namespace {

struct ValCache {
    std::vector<nn::Tensor> batches;
    std::vector<std::vector<int>> labels;
};

ValCache cache_validation(const std::vector<TrainSample>& samples, const PreprocessParams& pp,
                          int batch_size) {
    ValCache cache;
    std::vector<GrayF> images;
    std::vector<int> labels;
    for (const TrainSample& s : samples) {
        images.push_back(preprocess_only(load_gray_image(s.path), pp));
        labels.push_back(s.label);
        if (static_cast<int>(images.size()) == batch_size) {
            cache.batches.push_back(batch_tensor(images));
            cache.labels.push_back(labels);
            images.clear();
            labels.clear();
        }
    }
    if (!images.empty()) {
        cache.batches.push_back(batch_tensor(images));
        cache.labels.push_back(labels);
    }
    return cache;
}

double cached_val_accuracy(Model& model, const ValCache& cache, std::size_t total) {
    long long correct = 0;
    for (std::size_t b = 0; b < cache.batches.size(); ++b) {
        const ForwardResult out = model.forward(cache.batches[b], false);
        for (std::size_t i = 0; i < cache.labels[b].size(); ++i) {
            const int pred = out.probs[i] >= 0.5 ? 1 : 0;
            if (pred == cache.labels[b][i]) ++correct;
        }
    }
    return static_cast<double>(correct) / static_cast<double>(total);
}

}  // namespace

TrainReport train(Model& model, const EpochSampleFn& epoch_samples,
                  const std::vector<TrainSample>& validation, const TrainConfig& config,
                  const PreprocessParams& pp, const AugmentConfig& aug, SchedulePhase phase,
                  std::uint64_t seed, const fs::path& run_dir, std::ostream* log) {
    config.validate();
    pp.validate();
    if (validation.empty()) throw std::invalid_argument("validation set is empty");
    const auto t_start = std::chrono::steady_clock::now();
    fs::create_directories(run_dir);

    const double start_lr = phase == SchedulePhase::finetune
                                ? config.initial_lr / config.finetune_lr_divisor
                                : config.initial_lr;
    ScheduleState state = make_schedule_state(start_lr, phase);
    nn::Adam adam(state.lr);

    const ValCache val_cache = cache_validation(validation, pp, config.batch_size);

    TrainReport report;
    report.seed = seed;
    const fs::path best_base = run_dir / "best";
    std::vector<std::vector<double>> best_weights;

    for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
        std::vector<TrainSample> samples = epoch_samples(epoch);
        if (samples.empty()) throw std::invalid_argument("epoch sample list is empty");
        std::mt19937_64 shuffle_rng(derive_seed(seed, static_cast<std::uint64_t>(epoch), 0x5f));
        std::shuffle(samples.begin(), samples.end(), shuffle_rng);
        model.reseed_dropout(derive_seed(seed, static_cast<std::uint64_t>(epoch), 0xd7));

        double loss_sum = 0.0;
        long long correct = 0;
        std::size_t done = 0;
        while (done < samples.size()) {
            const std::size_t batch_end =
                std::min(done + static_cast<std::size_t>(config.batch_size), samples.size());
            std::vector<GrayF> images;
            std::vector<double> labels;
            for (std::size_t i = done; i < batch_end; ++i) {
                images.push_back(augment(load_gray_image(samples[i].path), pp, aug,
                                         derive_seed(seed, static_cast<std::uint64_t>(epoch), i)));
                labels.push_back(static_cast<double>(samples[i].label));
            }
            const nn::Tensor batch = batch_tensor(images);
            const ForwardResult out = model.forward(batch, true);

            double batch_loss = 0.0;
            std::vector<double> dlogits(labels.size());
            for (std::size_t i = 0; i < labels.size(); ++i) {
                batch_loss += nn::bce_with_logits(out.logits[i], labels[i]);
                dlogits[i] = nn::bce_with_logits_grad(out.logits[i], labels[i]) /
                             static_cast<double>(labels.size());
                const int pred = out.probs[i] >= 0.5 ? 1 : 0;
                if (pred == static_cast<int>(labels[i])) ++correct;
            }
            batch_loss /= static_cast<double>(labels.size());
            if (!std::isfinite(batch_loss)) {
                std::ostringstream msg;
                msg << "non-finite loss at epoch " << epoch << " (lr=" << state.lr << "; batch:";
                for (std::size_t i = done; i < batch_end; ++i) {
                    msg << ' ' << samples[i].path.string() << "[y=" << samples[i].label << ']';
                }
                msg << ')';
                throw TrainError(msg.str());
            }
            loss_sum += batch_loss * static_cast<double>(labels.size());

            model.zero_grads();
            model.backward(dlogits);
            adam.step(model.params());
            done = batch_end;
        }

        EpochRecord rec;
        rec.epoch = epoch;
        rec.lr = state.lr;
        rec.train_loss = loss_sum / static_cast<double>(samples.size());
        rec.train_acc = static_cast<double>(correct) / static_cast<double>(samples.size());
        rec.val_acc = cached_val_accuracy(model, val_cache, validation.size());

        if (rec.val_acc > state.best_val_acc) {
            best_weights = model.weights();
            save_checkpoint(model, pp, 0.5, best_base);
            report.best_val_acc = rec.val_acc;
            report.best_epoch = epoch;
            report.best_checkpoint = best_base.string();
        }

        const ScheduleStep step = step_schedule(state, rec.val_acc, config);
        state = step.state;
        rec.action = to_string(step.action);
        report.epochs.push_back(rec);
        if (log) {
            (*log) << "epoch " << rec.epoch << " lr=" << rec.lr << " loss=" << rec.train_loss
                   << " train_acc=" << rec.train_acc << " val_acc=" << rec.val_acc << " ["
                   << rec.action << "]\n";
        }

        if (step.action == ScheduleAction::stop) break;
        if (step.action == ScheduleAction::halve_lr) {
            adam.set_lr(state.lr);
        } else if (step.action == ScheduleAction::restart) {
            model.set_weights(best_weights);
            adam = nn::Adam(state.lr);
        }
    }

    report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return report;
}

TrainReport finetune(Model& model, const EpochSampleFn& epoch_samples,
                     const std::vector<TrainSample>& validation, const TrainConfig& config,
                     const PreprocessParams& pp, const AugmentConfig& aug, std::uint64_t seed,
                     const fs::path& run_dir, std::ostream* log) {
    return train(model, epoch_samples, validation, config, pp, aug, SchedulePhase::finetune, seed,
                 run_dir, log);
}

void write_train_report(const TrainReport& report, const fs::path& path) {
    nlohmann::json j;
    j["seed"] = report.seed;
    j["best_val_acc"] = report.best_val_acc;
    j["best_epoch"] = report.best_epoch;
    j["best_checkpoint"] = report.best_checkpoint;
    j["wall_seconds"] = report.wall_seconds;
    j["epochs"] = nlohmann::json::array();
    for (const EpochRecord& e : report.epochs) {
        j["epochs"].push_back({{"epoch", e.epoch},
                               {"lr", e.lr},
                               {"train_loss", e.train_loss},
                               {"train_acc", e.train_acc},
                               {"val_acc", e.val_acc},
                               {"action", e.action}});
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write train report: " + path.string());
    out << j.dump(2) << "\n";
}

TrainReport read_train_report(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read train report: " + path.string());
    nlohmann::json j;
    try {
        in >> j;
        TrainReport report;
        report.seed = j.at("seed").get<std::uint64_t>();
        report.best_val_acc = j.at("best_val_acc").get<double>();
        report.best_epoch = j.at("best_epoch").get<int>();
        report.best_checkpoint = j.at("best_checkpoint").get<std::string>();
        report.wall_seconds = j.at("wall_seconds").get<double>();
        for (const auto& e : j.at("epochs")) {
            EpochRecord rec;
            rec.epoch = e.at("epoch").get<int>();
            rec.lr = e.at("lr").get<double>();
            rec.train_loss = e.at("train_loss").get<double>();
            rec.train_acc = e.at("train_acc").get<double>();
            rec.val_acc = e.at("val_acc").get<double>();
            rec.action = e.at("action").get<std::string>();
            report.epochs.push_back(rec);
        }
        return report;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("bad train report " + path.string() + ": " + e.what());
    }
}

}  // namespace xfish
