#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <vector>

namespace xfish::nn {

/// Dense NCHW tensor, double precision throughout so analytic gradients can
/// be checked against float64 finite differences.
struct Tensor {
    int n = 0, c = 0, h = 0, w = 0;
    std::vector<double> data;

    Tensor() = default;
    Tensor(int n_, int c_, int h_, int w_)
        : n(n_), c(c_), h(h_), w(w_),
          data(static_cast<std::size_t>(n_) * c_ * h_ * w_, 0.0) {}

    double& at(int in, int ic, int ih, int iw) {
        return data[((static_cast<std::size_t>(in) * c + ic) * h + ih) * w + iw];
    }
    double at(int in, int ic, int ih, int iw) const {
        return data[((static_cast<std::size_t>(in) * c + ic) * h + ih) * w + iw];
    }
    std::size_t size() const { return data.size(); }
    std::size_t sample_size() const { return static_cast<std::size_t>(c) * h * w; }
};

struct Param {
    std::vector<double> value;
    std::vector<double> grad;

    explicit Param(std::size_t n = 0) : value(n, 0.0), grad(n, 0.0) {}
    void zero_grad() { std::fill(grad.begin(), grad.end(), 0.0); }
};

class Layer {
public:
    virtual ~Layer() = default;
    virtual Tensor forward(const Tensor& x, bool training) = 0;
    virtual Tensor backward(const Tensor& grad_out) = 0;
    virtual std::vector<Param*> params() { return {}; }
};

/// 2-D convolution, square kernel, zero padding. Weight layout
/// [out_ch][in_ch][k][k]; forward/backward run as im2col GEMMs.
class Conv2d : public Layer {
public:
    Conv2d(int in_ch, int out_ch, int kernel, int stride, int pad);

    void init_glorot(std::mt19937_64& rng);
    /// 1x1 replication init for the gray-to-RGB front layer: every output
    /// channel copies the input channel (weights 1, bias 0).
    void init_replicate();

    Tensor forward(const Tensor& x, bool training) override;
    Tensor backward(const Tensor& grad_out) override;
    std::vector<Param*> params() override { return {&weight, &bias}; }

    int out_dim(int in_dim) const { return (in_dim + 2 * pad_ - kernel_) / stride_ + 1; }

    Param weight;
    Param bias;

private:
    void im2col(const Tensor& x, int sample, std::vector<double>& cols) const;

    int in_ch_, out_ch_, kernel_, stride_, pad_;
    Tensor input_;  // cached for backward
};

class ReLU : public Layer {
public:
    Tensor forward(const Tensor& x, bool training) override;
    Tensor backward(const Tensor& grad_out) override;

private:
    Tensor input_;
};

/// Spatial max over H x W per (sample, channel): [N,C,H,W] -> [N,C,1,1].
class GlobalMaxPool : public Layer {
public:
    Tensor forward(const Tensor& x, bool training) override;
    Tensor backward(const Tensor& grad_out) override;

private:
    std::vector<std::size_t> argmax_;
    int in_h_ = 0, in_w_ = 0, in_c_ = 0, in_n_ = 0;
};

/// Inverted dropout; identity in eval mode. The mask stream is owned by the
/// layer so training and gradient checks can re-seed it deterministically.
class Dropout : public Layer {
public:
    explicit Dropout(double prob) : prob_(prob) {}

    void seed(std::uint64_t s) { rng_.seed(s); }
    Tensor forward(const Tensor& x, bool training) override;
    Tensor backward(const Tensor& grad_out) override;

private:
    double prob_;
    std::mt19937_64 rng_{0};
    std::vector<double> mask_;
};

/// Fully connected layer on [N,C,1,1] inputs.
class Dense : public Layer {
public:
    Dense(int in_features, int units);

    void init_glorot(std::mt19937_64& rng);
    Tensor forward(const Tensor& x, bool training) override;
    Tensor backward(const Tensor& grad_out) override;
    std::vector<Param*> params() override { return {&weight, &bias}; }

    Param weight;  // [units][in_features]
    Param bias;    // [units]

private:
    int in_features_, units_;
    Tensor input_;
};

/// Adam with bias correction; epsilon sits outside the square root.
class Adam {
public:
    explicit Adam(double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-7)
        : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

    void step(const std::vector<Param*>& params);
    void reset();
    void set_lr(double lr) { lr_ = lr; }
    double lr() const { return lr_; }

private:
    double lr_, beta1_, beta2_, eps_;
    long long t_ = 0;
    std::vector<std::vector<double>> m_, v_;
};

double sigmoid(double z);

/// Numerically stable binary cross-entropy from the pre-sigmoid logit.
double bce_with_logits(double logit, double label);

/// d(bce)/d(logit) = sigmoid(logit) - label.
double bce_with_logits_grad(double logit, double label);

}  // namespace xfish::nn
