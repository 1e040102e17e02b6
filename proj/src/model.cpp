#include "xfish/model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "xfish/util.hpp"

namespace fs = std::filesystem;

namespace xfish {

std::string to_string(HeadVariant head) {
    switch (head) {
        case HeadVariant::XFishMp: return "XFishMp";
        case HeadVariant::XFishHmMp: return "XFishHmMp";
        case HeadVariant::XFishHm: return "XFishHm";
    }
    return "?";
}

HeadVariant head_from_string(const std::string& s) {
    if (s == "XFishMp") return HeadVariant::XFishMp;
    if (s == "XFishHmMp") return HeadVariant::XFishHmMp;
    if (s == "XFishHm") return HeadVariant::XFishHm;
    throw ConfigError("unknown head variant: '" + s + "'");
}

double HeatMap::max_value() const {
    return *std::max_element(values.begin(), values.end());
}

std::unique_ptr<nn::Conv2d> gray_to_rgb_layer() {
    auto conv = std::make_unique<nn::Conv2d>(1, 3, 1, 1, 0);
    conv->init_replicate();
    return conv;
}

namespace {

bool is_power_of_two(int v) { return v > 0 && (v & (v - 1)) == 0; }

// Channel plan for the tiny backbone: geometric ramp from 16 up to the
// requested feature width across the strided blocks.
std::vector<int> tiny_channel_plan(int n_blocks, int feature_channels) {
    std::vector<int> plan(static_cast<std::size_t>(n_blocks));
    for (int i = 0; i < n_blocks; ++i) {
        if (n_blocks == 1) {
            plan[static_cast<std::size_t>(i)] = feature_channels;
            continue;
        }
        const double t = static_cast<double>(i) / (n_blocks - 1);
        plan[static_cast<std::size_t>(i)] = std::max(
            1, static_cast<int>(std::lround(16.0 * std::pow(feature_channels / 16.0, t))));
    }
    plan.back() = feature_channels;
    return plan;
}

}  // namespace

Model::Model(const BackboneSpec& spec, HeadVariant head, int input_rows, int input_cols,
             std::uint64_t init_seed)
    : spec_(spec), head_(head), input_rows_(input_rows), input_cols_(input_cols) {
    if (spec.name != "tiny") {
        throw ConfigError("unknown backbone '" + spec.name + "' (available: tiny)");
    }
    if (spec.pretrained) {
        throw ConfigError("backbone 'tiny' has no pretrained weights; set pretrained=false or "
                          "start from a checkpoint");
    }
    if (!is_power_of_two(spec.output_stride) || spec.output_stride < 2) {
        throw ConfigError("output_stride must be a power of two >= 2");
    }
    if (spec.feature_channels < 1) throw ConfigError("feature_channels must be >= 1");
    if (input_rows % spec.output_stride != 0 || input_cols % spec.output_stride != 0) {
        throw ConfigError("input size " + std::to_string(input_rows) + "x" +
                          std::to_string(input_cols) + " is not divisible by output_stride " +
                          std::to_string(spec.output_stride));
    }

    std::mt19937_64 rng(init_seed);
    trunk_.push_back(gray_to_rgb_layer());

    const int n_blocks = static_cast<int>(std::lround(std::log2(spec.output_stride)));
    const std::vector<int> plan = tiny_channel_plan(n_blocks, spec.feature_channels);
    int in_ch = 3;
    for (int b = 0; b < n_blocks; ++b) {
        auto conv = std::make_unique<nn::Conv2d>(in_ch, plan[static_cast<std::size_t>(b)], 3, 2, 1);
        conv->init_glorot(rng);
        in_ch = plan[static_cast<std::size_t>(b)];
        trunk_.push_back(std::move(conv));
        trunk_.push_back(std::make_unique<nn::ReLU>());
    }

    if (head_ == HeadVariant::XFishMp) {
        pool_ = std::make_unique<nn::GlobalMaxPool>();
        dropout_ = std::make_unique<nn::Dropout>(0.5);
        dropout_->seed(derive_seed(init_seed, 0xD0));
        dense_ = std::make_unique<nn::Dense>(spec.feature_channels, 1);
        dense_->init_glorot(rng);
    } else {
        head_conv_ = std::make_unique<nn::Conv2d>(spec.feature_channels, 1, 1, 1, 0);
        head_conv_->init_glorot(rng);
    }
}

ForwardResult Model::forward(const nn::Tensor& batch, bool training) {
    if (batch.c != 1 || batch.h != input_rows_ || batch.w != input_cols_) {
        throw std::invalid_argument("model expects [N,1," + std::to_string(input_rows_) + "," +
                                    std::to_string(input_cols_) + "] input");
    }
    last_n_ = batch.n;
    nn::Tensor x = batch;
    for (auto& layer : trunk_) x = layer->forward(x, training);

    ForwardResult result;
    result.logits.resize(static_cast<std::size_t>(batch.n));
    if (head_ == HeadVariant::XFishMp) {
        x = pool_->forward(x, training);
        x = dropout_->forward(x, training);
        x = dense_->forward(x, training);
        for (int s = 0; s < batch.n; ++s) result.logits[static_cast<std::size_t>(s)] = x.at(s, 0, 0, 0);
    } else {
        x = head_conv_->forward(x, training);  // [N,1,hm_h,hm_w]
        const std::size_t hw = x.sample_size();
        hm_argmax_.assign(static_cast<std::size_t>(batch.n), 0);
        result.heatmaps.resize(static_cast<std::size_t>(batch.n));
        for (int s = 0; s < batch.n; ++s) {
            const double* plane = x.data.data() + static_cast<std::size_t>(s) * hw;
            std::size_t best = 0;
            HeatMap& hm = result.heatmaps[static_cast<std::size_t>(s)];
            hm.rows = x.h;
            hm.cols = x.w;
            hm.values.resize(hw);
            for (std::size_t i = 0; i < hw; ++i) {
                hm.values[i] = nn::sigmoid(plane[i]);
                if (plane[i] > plane[best]) best = i;
            }
            hm_argmax_[static_cast<std::size_t>(s)] = best;
            result.logits[static_cast<std::size_t>(s)] = plane[best];
        }
    }
    result.probs.resize(result.logits.size());
    for (std::size_t i = 0; i < result.logits.size(); ++i) {
        result.probs[i] = nn::sigmoid(result.logits[i]);
    }
    return result;
}

void Model::backward(const std::vector<double>& dlogits) {
    nn::Tensor grad;
    if (head_ == HeadVariant::XFishMp) {
        grad = nn::Tensor(last_n_, 1, 1, 1);
        for (int s = 0; s < last_n_; ++s) grad.at(s, 0, 0, 0) = dlogits[static_cast<std::size_t>(s)];
        grad = dense_->backward(grad);
        grad = dropout_->backward(grad);
        grad = pool_->backward(grad);
    } else {
        grad = nn::Tensor(last_n_, 1, heatmap_rows(), heatmap_cols());
        const std::size_t hw = grad.sample_size();
        for (int s = 0; s < last_n_; ++s) {
            grad.data[static_cast<std::size_t>(s) * hw + hm_argmax_[static_cast<std::size_t>(s)]] =
                dlogits[static_cast<std::size_t>(s)];
        }
        grad = head_conv_->backward(grad);
    }
    for (auto it = trunk_.rbegin(); it != trunk_.rend(); ++it) grad = (*it)->backward(grad);
}

std::vector<nn::Param*> Model::params() {
    std::vector<nn::Param*> out;
    for (auto& layer : trunk_) {
        for (nn::Param* p : layer->params()) out.push_back(p);
    }
    if (dense_) {
        for (nn::Param* p : dense_->params()) out.push_back(p);
    }
    if (head_conv_) {
        for (nn::Param* p : head_conv_->params()) out.push_back(p);
    }
    return out;
}

std::size_t Model::parameter_count() const {
    std::size_t n = 0;
    for (const nn::Param* p : const_cast<Model*>(this)->params()) n += p->value.size();
    return n;
}

void Model::zero_grads() {
    for (nn::Param* p : params()) p->zero_grad();
}

void Model::reseed_dropout(std::uint64_t seed) {
    if (dropout_) dropout_->seed(seed);
}

std::vector<std::vector<double>> Model::weights() const {
    std::vector<std::vector<double>> out;
    for (const nn::Param* p : const_cast<Model*>(this)->params()) out.push_back(p->value);
    return out;
}

void Model::set_weights(const std::vector<std::vector<double>>& w) {
    std::vector<nn::Param*> ps = params();
    if (w.size() != ps.size()) throw std::invalid_argument("weight tensor count mismatch");
    for (std::size_t i = 0; i < ps.size(); ++i) {
        if (w[i].size() != ps[i]->value.size()) {
            throw std::invalid_argument("weight tensor " + std::to_string(i) + " size mismatch");
        }
        ps[i]->value = w[i];
    }
}

Model build_model(const BackboneSpec& spec, HeadVariant head, int input_rows, int input_cols,
                  std::uint64_t init_seed) {
    return Model(spec, head, input_rows, input_cols, init_seed);
}

Model convert_to_localizer(const Model& classifier) {
    if (classifier.head() != HeadVariant::XFishHmMp) {
        throw std::invalid_argument("convert_to_localizer expects an XFishHmMp model, got " +
                                    to_string(classifier.head()));
    }
    Model localizer(classifier.backbone(), HeadVariant::XFishHm, classifier.input_rows(),
                    classifier.input_cols(), 0);
    localizer.set_weights(classifier.weights());
    return localizer;
}

namespace {

constexpr char kWeightsMagic[8] = {'X', 'F', 'W', 'T', '0', '0', '0', '1'};
constexpr int kSidecarSchemaVersion = 1;

}  // namespace

void save_checkpoint(const Model& model, const PreprocessParams& preprocess, double threshold,
                     const fs::path& base) {
    // Atomic: write both files to temp names, then rename.
    const fs::path wpath = base.string() + ".weights";
    const fs::path jpath = base.string() + ".json";
    const fs::path wtmp = wpath.string() + ".tmp";
    const fs::path jtmp = jpath.string() + ".tmp";

    {
        std::ofstream out(wtmp, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write checkpoint: " + wtmp.string());
        out.write(kWeightsMagic, sizeof(kWeightsMagic));
        const auto tensors = model.weights();
        const std::uint32_t count = static_cast<std::uint32_t>(tensors.size());
        out.write(reinterpret_cast<const char*>(&count), sizeof(count));
        for (const auto& t : tensors) {
            const std::uint64_t n = t.size();
            out.write(reinterpret_cast<const char*>(&n), sizeof(n));
            out.write(reinterpret_cast<const char*>(t.data()),
                      static_cast<std::streamsize>(n * sizeof(double)));
        }
        if (!out) throw std::runtime_error("checkpoint write failed: " + wtmp.string());
    }

    nlohmann::json sidecar = {
        {"schema_version", kSidecarSchemaVersion},
        {"head", to_string(model.head())},
        {"backbone",
         {{"name", model.backbone().name},
          {"output_stride", model.backbone().output_stride},
          {"feature_channels", model.backbone().feature_channels},
          {"pretrained", model.backbone().pretrained}}},
        {"input", {{"rows", model.input_rows()}, {"cols", model.input_cols()}}},
        {"preprocess",
         {{"pad_fraction", preprocess.pad_fraction},
          {"target", {preprocess.target_rows, preprocess.target_cols}}}},
        {"threshold", threshold},
    };
    {
        std::ofstream out(jtmp);
        if (!out) throw std::runtime_error("cannot write checkpoint sidecar: " + jtmp.string());
        out << sidecar.dump(2) << "\n";
    }
    fs::rename(wtmp, wpath);
    fs::rename(jtmp, jpath);
}

LoadedCheckpoint load_checkpoint(const fs::path& base) {
    const fs::path wpath = base.string() + ".weights";
    const fs::path jpath = base.string() + ".json";
    if (!fs::exists(jpath) || !fs::exists(wpath)) {
        throw ConfigError("checkpoint not found: " + base.string() + " (.json/.weights)");
    }

    nlohmann::json sidecar;
    {
        std::ifstream in(jpath);
        try {
            in >> sidecar;
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError("bad checkpoint sidecar " + jpath.string() + ": " + e.what());
        }
    }
    if (sidecar.value("schema_version", 0) != kSidecarSchemaVersion) {
        throw ConfigError("unsupported checkpoint schema version in " + jpath.string());
    }

    BackboneSpec spec;
    PreprocessParams preprocess;
    HeadVariant head;
    int rows, cols;
    double threshold;
    try {
        const auto& bb = sidecar.at("backbone");
        spec.name = bb.at("name").get<std::string>();
        spec.output_stride = bb.at("output_stride").get<int>();
        spec.feature_channels = bb.at("feature_channels").get<int>();
        spec.pretrained = false;  // weights come from the blob
        head = head_from_string(sidecar.at("head").get<std::string>());
        rows = sidecar.at("input").at("rows").get<int>();
        cols = sidecar.at("input").at("cols").get<int>();
        const auto& pp = sidecar.at("preprocess");
        preprocess.pad_fraction = pp.at("pad_fraction").get<double>();
        preprocess.target_rows = pp.at("target").at(0).get<int>();
        preprocess.target_cols = pp.at("target").at(1).get<int>();
        threshold = sidecar.at("threshold").get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("bad checkpoint sidecar " + jpath.string() + ": " + e.what());
    }

    Model model(spec, head, rows, cols, 0);

    std::ifstream in(wpath, std::ios::binary);
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || !std::equal(magic, magic + 8, kWeightsMagic)) {
        throw ConfigError("bad checkpoint weights file: " + wpath.string());
    }
    std::uint32_t count = 0;
    in.read(reinterpret_cast<char*>(&count), sizeof(count));
    std::vector<std::vector<double>> tensors(count);
    for (auto& t : tensors) {
        std::uint64_t n = 0;
        in.read(reinterpret_cast<char*>(&n), sizeof(n));
        if (!in || n > (1ULL << 32)) throw ConfigError("corrupt checkpoint: " + wpath.string());
        t.resize(n);
        in.read(reinterpret_cast<char*>(t.data()), static_cast<std::streamsize>(n * sizeof(double)));
    }
    if (!in) throw ConfigError("truncated checkpoint: " + wpath.string());
    try {
        model.set_weights(tensors);
    } catch (const std::invalid_argument& e) {
        throw ConfigError("checkpoint does not match its sidecar architecture: " +
                          std::string(e.what()));
    }
    return LoadedCheckpoint{std::move(model), preprocess, threshold};
}

}  // namespace xfish
