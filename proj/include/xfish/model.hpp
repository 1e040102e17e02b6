#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "xfish/imaging.hpp"
#include "xfish/nn.hpp"

namespace xfish {

/// Any stride-32 feature extractor qualifies; "tiny" is the bundled
/// desk-scale CNN (log2(stride) strided 3x3 conv blocks, ~50k parameters at
/// 64 feature channels).
struct BackboneSpec {
    std::string name = "tiny";
    int output_stride = 32;
    int feature_channels = 64;
    bool pretrained = false;
};

enum class HeadVariant { XFishMp, XFishHmMp, XFishHm };

std::string to_string(HeadVariant head);
HeadVariant head_from_string(const std::string& s);

/// Spatial grid of [0,1] fish-evidence activations, input downsized by the
/// backbone stride.
struct HeatMap {
    int rows = 0;
    int cols = 0;
    std::vector<double> values;

    double at(int r, int c) const { return values[static_cast<std::size_t>(r) * cols + c]; }
    double max_value() const;
};

struct ForwardResult {
    std::vector<double> logits;     // per-sample pre-sigmoid score (max cell for Hm variants)
    std::vector<double> probs;      // sigmoid(logits)
    std::vector<HeatMap> heatmaps;  // XFishHmMp / XFishHm only
};

/// The three network variants share a trainable gray-to-RGB 1x1 front layer
/// and the backbone; they differ only in the head:
///   XFishMp   — global spatial max pool, dropout 0.5, one-unit dense, sigmoid
///   XFishHmMp — single-channel 1x1 convolution (sigmoid heatmap), global max
///   XFishHm   — XFishHmMp without the final pool
class Model {
public:
    Model(const BackboneSpec& spec, HeadVariant head, int input_rows, int input_cols,
          std::uint64_t init_seed);

    /// batch: [N,1,rows,cols], values in [0,1].
    ForwardResult forward(const nn::Tensor& batch, bool training = false);

    /// Backpropagates dLoss/dlogit per sample; call after forward(training).
    void backward(const std::vector<double>& dlogits);

    std::vector<nn::Param*> params();
    std::size_t parameter_count() const;
    void zero_grads();
    void reseed_dropout(std::uint64_t seed);

    std::vector<std::vector<double>> weights() const;
    void set_weights(const std::vector<std::vector<double>>& w);

    const BackboneSpec& backbone() const { return spec_; }
    HeadVariant head() const { return head_; }
    int input_rows() const { return input_rows_; }
    int input_cols() const { return input_cols_; }
    int heatmap_rows() const { return input_rows_ / spec_.output_stride; }
    int heatmap_cols() const { return input_cols_ / spec_.output_stride; }

private:
    BackboneSpec spec_;
    HeadVariant head_;
    int input_rows_, input_cols_;

    std::vector<std::unique_ptr<nn::Layer>> trunk_;  // gray-to-RGB + backbone blocks
    // XFishMp head:
    std::unique_ptr<nn::GlobalMaxPool> pool_;
    std::unique_ptr<nn::Dropout> dropout_;
    std::unique_ptr<nn::Dense> dense_;
    // XFishHmMp / XFishHm head:
    std::unique_ptr<nn::Conv2d> head_conv_;

    std::vector<std::size_t> hm_argmax_;  // per-sample argmax over heatmap logits
    int last_n_ = 0;
};

Model build_model(const BackboneSpec& spec, HeadVariant head, int input_rows, int input_cols,
                  std::uint64_t init_seed);

/// Weight-preserving surgery: drops the final max pool of an XFishHmMp so
/// the network emits its heatmap. max(heatmap) of the result equals the
/// source's scalar output on every input.
Model convert_to_localizer(const Model& classifier);

/// Trainable 1-channel -> 3-channel 1x1 convolution, initialized to copy the
/// gray channel into all three outputs.
std::unique_ptr<nn::Conv2d> gray_to_rgb_layer();

/// Checkpoint = `<base>.weights` blob + `<base>.json` sidecar (head kind,
/// backbone spec, input size, preprocessing params, threshold).
void save_checkpoint(const Model& model, const PreprocessParams& preprocess, double threshold,
                     const std::filesystem::path& base);

struct LoadedCheckpoint {
    Model model;
    PreprocessParams preprocess;
    double threshold = 0.5;
};

LoadedCheckpoint load_checkpoint(const std::filesystem::path& base);

}  // namespace xfish
