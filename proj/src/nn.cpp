#include "xfish/nn.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>

namespace xfish::nn {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using MapConstMat = Eigen::Map<const RowMat>;

}  // namespace

Conv2d::Conv2d(int in_ch, int out_ch, int kernel, int stride, int pad)
    : weight(static_cast<std::size_t>(out_ch) * in_ch * kernel * kernel),
      bias(static_cast<std::size_t>(out_ch)),
      in_ch_(in_ch), out_ch_(out_ch), kernel_(kernel), stride_(stride), pad_(pad) {
    if (in_ch < 1 || out_ch < 1 || kernel < 1 || stride < 1 || pad < 0) {
        throw std::invalid_argument("bad Conv2d geometry");
    }
}

void Conv2d::init_glorot(std::mt19937_64& rng) {
    const double fan_in = static_cast<double>(in_ch_) * kernel_ * kernel_;
    const double fan_out = static_cast<double>(out_ch_) * kernel_ * kernel_;
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (double& w : weight.value) w = dist(rng);
    std::fill(bias.value.begin(), bias.value.end(), 0.0);
}

void Conv2d::init_replicate() {
    if (kernel_ != 1 || in_ch_ != 1) {
        throw std::logic_error("replication init is defined for 1x1 single-input convolutions");
    }
    std::fill(weight.value.begin(), weight.value.end(), 1.0);
    std::fill(bias.value.begin(), bias.value.end(), 0.0);
}

void Conv2d::im2col(const Tensor& x, int sample, std::vector<double>& cols) const {
    const int oh = out_dim(x.h);
    const int ow = out_dim(x.w);
    const std::size_t ohw = static_cast<std::size_t>(oh) * ow;
    cols.assign(static_cast<std::size_t>(in_ch_) * kernel_ * kernel_ * ohw, 0.0);
    for (int c = 0; c < in_ch_; ++c) {
        for (int ki = 0; ki < kernel_; ++ki) {
            for (int kj = 0; kj < kernel_; ++kj) {
                const std::size_t row = (static_cast<std::size_t>(c) * kernel_ + ki) * kernel_ + kj;
                double* dst = cols.data() + row * ohw;
                for (int oy = 0; oy < oh; ++oy) {
                    const int iy = oy * stride_ + ki - pad_;
                    if (iy < 0 || iy >= x.h) continue;
                    for (int ox = 0; ox < ow; ++ox) {
                        const int ix = ox * stride_ + kj - pad_;
                        if (ix < 0 || ix >= x.w) continue;
                        dst[static_cast<std::size_t>(oy) * ow + ox] = x.at(sample, c, iy, ix);
                    }
                }
            }
        }
    }
}

Tensor Conv2d::forward(const Tensor& x, bool training) {
    if (x.c != in_ch_) throw std::invalid_argument("Conv2d: channel mismatch");
    const int oh = out_dim(x.h);
    const int ow = out_dim(x.w);
    if (oh < 1 || ow < 1) throw std::invalid_argument("Conv2d: output collapsed to zero");
    if (training) input_ = x;

    Tensor out(x.n, out_ch_, oh, ow);
    const std::size_t ohw = static_cast<std::size_t>(oh) * ow;
    const std::size_t ckk = static_cast<std::size_t>(in_ch_) * kernel_ * kernel_;
    std::vector<double> cols;
    MapConstMat wmat(weight.value.data(), out_ch_, static_cast<Eigen::Index>(ckk));
    for (int s = 0; s < x.n; ++s) {
        im2col(x, s, cols);
        MapConstMat cmat(cols.data(), static_cast<Eigen::Index>(ckk),
                         static_cast<Eigen::Index>(ohw));
        MapMat omat(out.data.data() + static_cast<std::size_t>(s) * out.sample_size(), out_ch_,
                    static_cast<Eigen::Index>(ohw));
        omat.noalias() = wmat * cmat;
        for (int f = 0; f < out_ch_; ++f) omat.row(f).array() += bias.value[f];
    }
    return out;
}

Tensor Conv2d::backward(const Tensor& grad_out) {
    const Tensor& x = input_;
    if (x.n == 0) throw std::logic_error("Conv2d::backward before a training forward");
    const int oh = grad_out.h;
    const int ow = grad_out.w;
    const std::size_t ohw = static_cast<std::size_t>(oh) * ow;
    const std::size_t ckk = static_cast<std::size_t>(in_ch_) * kernel_ * kernel_;

    Tensor dx(x.n, x.c, x.h, x.w);
    std::vector<double> cols;
    std::vector<double> dcols(ckk * ohw);
    MapConstMat wmat(weight.value.data(), out_ch_, static_cast<Eigen::Index>(ckk));
    MapMat dwmat(weight.grad.data(), out_ch_, static_cast<Eigen::Index>(ckk));
    for (int s = 0; s < x.n; ++s) {
        MapConstMat gmat(grad_out.data.data() + static_cast<std::size_t>(s) * grad_out.sample_size(),
                         out_ch_, static_cast<Eigen::Index>(ohw));
        im2col(x, s, cols);
        MapConstMat cmat(cols.data(), static_cast<Eigen::Index>(ckk),
                         static_cast<Eigen::Index>(ohw));
        dwmat.noalias() += gmat * cmat.transpose();
        for (int f = 0; f < out_ch_; ++f) bias.grad[f] += gmat.row(f).sum();

        MapMat dcmat(dcols.data(), static_cast<Eigen::Index>(ckk), static_cast<Eigen::Index>(ohw));
        dcmat.noalias() = wmat.transpose() * gmat;
        // col2im: scatter-add the column gradients back onto the input.
        for (int c = 0; c < in_ch_; ++c) {
            for (int ki = 0; ki < kernel_; ++ki) {
                for (int kj = 0; kj < kernel_; ++kj) {
                    const std::size_t row =
                        (static_cast<std::size_t>(c) * kernel_ + ki) * kernel_ + kj;
                    const double* src = dcols.data() + row * ohw;
                    for (int oy = 0; oy < oh; ++oy) {
                        const int iy = oy * stride_ + ki - pad_;
                        if (iy < 0 || iy >= x.h) continue;
                        for (int ox = 0; ox < ow; ++ox) {
                            const int ix = ox * stride_ + kj - pad_;
                            if (ix < 0 || ix >= x.w) continue;
                            dx.at(s, c, iy, ix) += src[static_cast<std::size_t>(oy) * ow + ox];
                        }
                    }
                }
            }
        }
    }
    return dx;
}

Tensor ReLU::forward(const Tensor& x, bool training) {
    if (training) input_ = x;
    Tensor out = x;
    for (double& v : out.data) v = v > 0.0 ? v : 0.0;
    return out;
}

Tensor ReLU::backward(const Tensor& grad_out) {
    Tensor dx = grad_out;
    for (std::size_t i = 0; i < dx.data.size(); ++i) {
        if (input_.data[i] <= 0.0) dx.data[i] = 0.0;
    }
    return dx;
}

Tensor GlobalMaxPool::forward(const Tensor& x, bool training) {
    Tensor out(x.n, x.c, 1, 1);
    argmax_.assign(static_cast<std::size_t>(x.n) * x.c, 0);
    in_h_ = x.h;
    in_w_ = x.w;
    in_c_ = x.c;
    in_n_ = x.n;
    (void)training;
    const std::size_t hw = static_cast<std::size_t>(x.h) * x.w;
    for (int s = 0; s < x.n; ++s) {
        for (int c = 0; c < x.c; ++c) {
            const double* plane = x.data.data() + (static_cast<std::size_t>(s) * x.c + c) * hw;
            std::size_t best = 0;
            for (std::size_t i = 1; i < hw; ++i) {
                if (plane[i] > plane[best]) best = i;
            }
            argmax_[static_cast<std::size_t>(s) * x.c + c] = best;
            out.at(s, c, 0, 0) = plane[best];
        }
    }
    return out;
}

Tensor GlobalMaxPool::backward(const Tensor& grad_out) {
    Tensor dx(in_n_, in_c_, in_h_, in_w_);
    const std::size_t hw = static_cast<std::size_t>(in_h_) * in_w_;
    for (int s = 0; s < in_n_; ++s) {
        for (int c = 0; c < in_c_; ++c) {
            double* plane = dx.data.data() + (static_cast<std::size_t>(s) * in_c_ + c) * hw;
            plane[argmax_[static_cast<std::size_t>(s) * in_c_ + c]] = grad_out.at(s, c, 0, 0);
        }
    }
    return dx;
}

Tensor Dropout::forward(const Tensor& x, bool training) {
    if (!training || prob_ <= 0.0) {
        mask_.clear();
        return x;
    }
    const double keep = 1.0 - prob_;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    mask_.resize(x.data.size());
    Tensor out = x;
    for (std::size_t i = 0; i < x.data.size(); ++i) {
        mask_[i] = u(rng_) < prob_ ? 0.0 : 1.0 / keep;
        out.data[i] *= mask_[i];
    }
    return out;
}

Tensor Dropout::backward(const Tensor& grad_out) {
    if (mask_.empty()) return grad_out;
    Tensor dx = grad_out;
    for (std::size_t i = 0; i < dx.data.size(); ++i) dx.data[i] *= mask_[i];
    return dx;
}

Dense::Dense(int in_features, int units)
    : weight(static_cast<std::size_t>(units) * in_features), bias(static_cast<std::size_t>(units)),
      in_features_(in_features), units_(units) {}

void Dense::init_glorot(std::mt19937_64& rng) {
    const double limit = std::sqrt(6.0 / (in_features_ + units_));
    std::uniform_real_distribution<double> dist(-limit, limit);
    for (double& w : weight.value) w = dist(rng);
    std::fill(bias.value.begin(), bias.value.end(), 0.0);
}

Tensor Dense::forward(const Tensor& x, bool training) {
    if (x.c != in_features_ || x.h != 1 || x.w != 1) {
        throw std::invalid_argument("Dense expects [N,in_features,1,1] input");
    }
    if (training) input_ = x;
    Tensor out(x.n, units_, 1, 1);
    for (int s = 0; s < x.n; ++s) {
        for (int u = 0; u < units_; ++u) {
            double acc = bias.value[u];
            const double* w = weight.value.data() + static_cast<std::size_t>(u) * in_features_;
            const double* xs = x.data.data() + static_cast<std::size_t>(s) * in_features_;
            for (int c = 0; c < in_features_; ++c) acc += w[c] * xs[c];
            out.at(s, u, 0, 0) = acc;
        }
    }
    return out;
}

Tensor Dense::backward(const Tensor& grad_out) {
    const Tensor& x = input_;
    Tensor dx(x.n, x.c, 1, 1);
    for (int s = 0; s < x.n; ++s) {
        const double* xs = x.data.data() + static_cast<std::size_t>(s) * in_features_;
        double* dxs = dx.data.data() + static_cast<std::size_t>(s) * in_features_;
        for (int u = 0; u < units_; ++u) {
            const double g = grad_out.at(s, u, 0, 0);
            bias.grad[u] += g;
            double* dw = weight.grad.data() + static_cast<std::size_t>(u) * in_features_;
            const double* w = weight.value.data() + static_cast<std::size_t>(u) * in_features_;
            for (int c = 0; c < in_features_; ++c) {
                dw[c] += g * xs[c];
                dxs[c] += g * w[c];
            }
        }
    }
    return dx;
}

void Adam::step(const std::vector<Param*>& params) {
    if (m_.size() != params.size()) {
        m_.assign(params.size(), {});
        v_.assign(params.size(), {});
        for (std::size_t i = 0; i < params.size(); ++i) {
            m_[i].assign(params[i]->value.size(), 0.0);
            v_[i].assign(params[i]->value.size(), 0.0);
        }
        t_ = 0;
    }
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
        Param& p = *params[i];
        for (std::size_t j = 0; j < p.value.size(); ++j) {
            const double g = p.grad[j];
            m_[i][j] = beta1_ * m_[i][j] + (1.0 - beta1_) * g;
            v_[i][j] = beta2_ * v_[i][j] + (1.0 - beta2_) * g * g;
            p.value[j] -= lr_ * (m_[i][j] / bc1) / (std::sqrt(v_[i][j] / bc2) + eps_);
        }
    }
}

void Adam::reset() {
    m_.clear();
    v_.clear();
    t_ = 0;
}

double sigmoid(double z) {
    if (z >= 0.0) {
        return 1.0 / (1.0 + std::exp(-z));
    }
    const double e = std::exp(z);
    return e / (1.0 + e);
}

double bce_with_logits(double logit, double label) {
    // max(z,0) - y*z + log(1 + exp(-|z|))
    return std::max(logit, 0.0) - label * logit + std::log1p(std::exp(-std::abs(logit)));
}

double bce_with_logits_grad(double logit, double label) {
    return sigmoid(logit) - label;
}

}  // namespace xfish::nn
