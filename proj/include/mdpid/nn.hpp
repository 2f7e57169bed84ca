#pragma once

// Minimal deterministic tensor/layer engine with exact backpropagation.
// Real = double for gradient-check test mode, float for training.
// Every forward is pure; layers cache what backward needs, so one layer
// instance handles one sample at a time (the training loop is sequential
// over a batch, accumulating gradients in fixed order).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "mdpid/common.hpp"

namespace mdpid {

template <typename Real>
struct Tensor {
    std::vector<std::size_t> shape;
    std::vector<Real> values;
    std::vector<Real> grad;

    Tensor() = default;
    explicit Tensor(std::vector<std::size_t> s) : shape(std::move(s)) {
        values.assign(numel_of(shape), Real(0));
        grad.assign(values.size(), Real(0));
    }

    static std::size_t numel_of(const std::vector<std::size_t>& s) {
        std::size_t n = 1;
        for (std::size_t d : s) n *= d;
        return n;
    }

    std::size_t numel() const { return values.size(); }
    void zero_grad() { std::fill(grad.begin(), grad.end(), Real(0)); }
};

// He-uniform fan-in initialization: uniform on [-sqrt(6/fan_in), +sqrt(6/fan_in)],
// giving variance 2/fan_in. Fully determined by the RNG state.
template <typename Real>
void he_uniform_init(Tensor<Real>& t, std::size_t fan_in, Rng& rng) {
    const double limit = std::sqrt(6.0 / static_cast<double>(std::max<std::size_t>(fan_in, 1)));
    for (Real& v : t.values) v = static_cast<Real>(rng.uniform(-limit, limit));
}

template <typename Real>
void sgd_step(const std::vector<Tensor<Real>*>& params, Real lr) {
    for (Tensor<Real>* t : params)
        for (std::size_t i = 0; i < t->values.size(); ++i)
            t->values[i] -= lr * t->grad[i];
}

template <typename Real>
void zero_grads(const std::vector<Tensor<Real>*>& params) {
    for (Tensor<Real>* t : params) t->zero_grad();
}

enum class Padding { Same, Valid };

// 3x3 convolution (cross-correlation), stride 1.
template <typename Real>
class Conv2d {
public:
    Tensor<Real> weight;  // C_out x C_in x 3 x 3
    Tensor<Real> bias;    // C_out

    Conv2d() = default;
    Conv2d(std::size_t c_in, std::size_t c_out, Padding pad = Padding::Same)
        : weight({c_out, c_in, 3, 3}), bias({c_out}), pad_(pad) {}

    void init(Rng& rng) {
        he_uniform_init(weight, weight.shape[1] * 9, rng);
        std::fill(bias.values.begin(), bias.values.end(), Real(0));
    }

    Tensor<Real> forward(const Tensor<Real>& x) {
        check_input(x);
        input_ = x;
        const std::size_t c_in = x.shape[0], h = x.shape[1], w = x.shape[2];
        const std::size_t c_out = weight.shape[0];
        const long off = (pad_ == Padding::Same) ? -1 : 0;
        const std::size_t oh = (pad_ == Padding::Same) ? h : h - 2;
        const std::size_t ow = (pad_ == Padding::Same) ? w : w - 2;
        Tensor<Real> y({c_out, oh, ow});
        for (std::size_t co = 0; co < c_out; ++co)
            for (std::size_t oy = 0; oy < oh; ++oy)
                for (std::size_t ox = 0; ox < ow; ++ox) {
                    Real acc = bias.values[co];
                    for (std::size_t ci = 0; ci < c_in; ++ci)
                        for (int dy = 0; dy < 3; ++dy) {
                            const long iy = static_cast<long>(oy) + dy + off;
                            if (iy < 0 || iy >= static_cast<long>(h)) continue;
                            for (int dx = 0; dx < 3; ++dx) {
                                const long ix = static_cast<long>(ox) + dx + off;
                                if (ix < 0 || ix >= static_cast<long>(w)) continue;
                                acc += weight.values[((co * c_in + ci) * 3 + dy) * 3 + dx] *
                                       x.values[(ci * h + iy) * w + ix];
                            }
                        }
                    y.values[(co * oh + oy) * ow + ox] = acc;
                }
        return y;
    }

    Tensor<Real> backward(const Tensor<Real>& gy) {
        const std::size_t c_in = input_.shape[0], h = input_.shape[1], w = input_.shape[2];
        const std::size_t c_out = weight.shape[0];
        const std::size_t oh = gy.shape[1], ow = gy.shape[2];
        const long off = (pad_ == Padding::Same) ? -1 : 0;
        Tensor<Real> gx(input_.shape);
        for (std::size_t co = 0; co < c_out; ++co)
            for (std::size_t oy = 0; oy < oh; ++oy)
                for (std::size_t ox = 0; ox < ow; ++ox) {
                    const Real g = gy.values[(co * oh + oy) * ow + ox];
                    bias.grad[co] += g;
                    for (std::size_t ci = 0; ci < c_in; ++ci)
                        for (int dy = 0; dy < 3; ++dy) {
                            const long iy = static_cast<long>(oy) + dy + off;
                            if (iy < 0 || iy >= static_cast<long>(h)) continue;
                            for (int dx = 0; dx < 3; ++dx) {
                                const long ix = static_cast<long>(ox) + dx + off;
                                if (ix < 0 || ix >= static_cast<long>(w)) continue;
                                const std::size_t wi = ((co * c_in + ci) * 3 + dy) * 3 + dx;
                                const std::size_t xi = (ci * h + iy) * w + ix;
                                weight.grad[wi] += g * input_.values[xi];
                                gx.values[xi] += g * weight.values[wi];
                            }
                        }
                }
        return gx;
    }

    Padding padding() const { return pad_; }

private:
    void check_input(const Tensor<Real>& x) const {
        if (x.shape.size() != 3 || x.shape[0] != weight.shape[1])
            throw ShapeMismatch("conv2d: input must be C_in x H x W");
        if (pad_ == Padding::Valid && (x.shape[1] < 3 || x.shape[2] < 3))
            throw ShapeMismatch("conv2d: input smaller than kernel in valid mode");
    }

    Padding pad_ = Padding::Same;
    Tensor<Real> input_;
};

// 2x2 max pooling, stride 2; gradient routes to the argmax, first index on ties.
template <typename Real>
class MaxPool2d {
public:
    Tensor<Real> forward(const Tensor<Real>& x) {
        if (x.shape.size() != 3) throw ShapeMismatch("maxpool2d: input must be C x H x W");
        in_shape_ = x.shape;
        const std::size_t c = x.shape[0], h = x.shape[1], w = x.shape[2];
        const std::size_t oh = h / 2, ow = w / 2;
        if (oh == 0 || ow == 0) throw ShapeMismatch("maxpool2d: input too small to pool");
        Tensor<Real> y({c, oh, ow});
        argmax_.assign(y.numel(), 0);
        for (std::size_t ci = 0; ci < c; ++ci)
            for (std::size_t oy = 0; oy < oh; ++oy)
                for (std::size_t ox = 0; ox < ow; ++ox) {
                    std::size_t best = (ci * h + 2 * oy) * w + 2 * ox;
                    Real best_v = x.values[best];
                    for (int dy = 0; dy < 2; ++dy)
                        for (int dx = 0; dx < 2; ++dx) {
                            const std::size_t idx = (ci * h + 2 * oy + dy) * w + 2 * ox + dx;
                            if (x.values[idx] > best_v) {
                                best_v = x.values[idx];
                                best = idx;
                            }
                        }
                    const std::size_t oi = (ci * oh + oy) * ow + ox;
                    y.values[oi] = best_v;
                    argmax_[oi] = best;
                }
        return y;
    }

    Tensor<Real> backward(const Tensor<Real>& gy) {
        Tensor<Real> gx(in_shape_);
        for (std::size_t i = 0; i < gy.values.size(); ++i)
            gx.values[argmax_[i]] += gy.values[i];
        return gx;
    }

private:
    std::vector<std::size_t> in_shape_;
    std::vector<std::size_t> argmax_;
};

// ELU: x for x > 0, alpha*(exp(x)-1) otherwise.
template <typename Real>
class Elu {
public:
    explicit Elu(Real alpha = Real(1)) : alpha_(alpha) {}

    Tensor<Real> forward(const Tensor<Real>& x) {
        input_ = x;
        Tensor<Real> y(x.shape);
        for (std::size_t i = 0; i < x.values.size(); ++i) {
            const Real v = x.values[i];
            y.values[i] = v > Real(0) ? v : alpha_ * (std::exp(v) - Real(1));
        }
        return y;
    }

    Tensor<Real> backward(const Tensor<Real>& gy) {
        Tensor<Real> gx(input_.shape);
        for (std::size_t i = 0; i < gy.values.size(); ++i) {
            const Real v = input_.values[i];
            gx.values[i] = gy.values[i] * (v > Real(0) ? Real(1) : alpha_ * std::exp(v));
        }
        return gx;
    }

private:
    Real alpha_;
    Tensor<Real> input_;
};

// Fully connected layer: y = W x + b.
template <typename Real>
class Linear {
public:
    Tensor<Real> weight;  // out x in
    Tensor<Real> bias;    // out

    Linear() = default;
    Linear(std::size_t in, std::size_t out) : weight({out, in}), bias({out}) {}

    void init(Rng& rng) {
        he_uniform_init(weight, weight.shape[1], rng);
        std::fill(bias.values.begin(), bias.values.end(), Real(0));
    }

    Tensor<Real> forward(const Tensor<Real>& x) {
        const std::size_t in = weight.shape[1], out = weight.shape[0];
        if (x.numel() != in) throw ShapeMismatch("linear: input size mismatch");
        input_ = x;
        Tensor<Real> y({out});
        for (std::size_t o = 0; o < out; ++o) {
            Real acc = bias.values[o];
            const Real* row = weight.values.data() + o * in;
            for (std::size_t i = 0; i < in; ++i) acc += row[i] * x.values[i];
            y.values[o] = acc;
        }
        return y;
    }

    Tensor<Real> backward(const Tensor<Real>& gy) {
        const std::size_t in = weight.shape[1], out = weight.shape[0];
        Tensor<Real> gx(input_.shape);
        for (std::size_t o = 0; o < out; ++o) {
            const Real g = gy.values[o];
            bias.grad[o] += g;
            const Real* row = weight.values.data() + o * in;
            Real* wg = weight.grad.data() + o * in;
            for (std::size_t i = 0; i < in; ++i) {
                wg[i] += g * input_.values[i];
                gx.values[i] += g * row[i];
            }
        }
        return gx;
    }

private:
    Tensor<Real> input_;
};

template <typename Real>
class Sigmoid {
public:
    Tensor<Real> forward(const Tensor<Real>& x) {
        output_ = Tensor<Real>(x.shape);
        for (std::size_t i = 0; i < x.values.size(); ++i) {
            const Real v = x.values[i];
            output_.values[i] = v >= Real(0) ? Real(1) / (Real(1) + std::exp(-v))
                                             : std::exp(v) / (Real(1) + std::exp(v));
        }
        return output_;
    }

    Tensor<Real> backward(const Tensor<Real>& gy) {
        Tensor<Real> gx(output_.shape);
        for (std::size_t i = 0; i < gy.values.size(); ++i) {
            const Real y = output_.values[i];
            gx.values[i] = gy.values[i] * y * (Real(1) - y);
        }
        return gx;
    }

private:
    Tensor<Real> output_;
};

// Numerically stable softmax (max subtraction).
template <typename Real>
std::vector<Real> softmax(const std::vector<Real>& logits) {
    Real mx = logits[0];
    for (Real v : logits) mx = std::max(mx, v);
    std::vector<Real> y(logits.size());
    Real sum = Real(0);
    for (std::size_t i = 0; i < logits.size(); ++i) {
        y[i] = std::exp(logits[i] - mx);
        sum += y[i];
    }
    for (Real& v : y) v /= sum;
    return y;
}

// d logits from d probs: gx_i = y_i * (gy_i - sum_j y_j gy_j).
template <typename Real>
std::vector<Real> softmax_backward(const std::vector<Real>& y, const std::vector<Real>& gy) {
    Real dot = Real(0);
    for (std::size_t i = 0; i < y.size(); ++i) dot += y[i] * gy[i];
    std::vector<Real> gx(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) gx[i] = y[i] * (gy[i] - dot);
    return gx;
}

inline constexpr double kProbClamp = 1e-12;

// Mean negative log-likelihood over a batch of one-hot labels.
template <typename Real>
Real cross_entropy(const std::vector<std::vector<Real>>& onehot,
                   const std::vector<std::vector<Real>>& probs) {
    if (onehot.size() != probs.size() || onehot.empty())
        throw ShapeMismatch("cross_entropy: batch size mismatch or empty batch");
    Real total = Real(0);
    for (std::size_t i = 0; i < probs.size(); ++i) {
        if (onehot[i].size() != probs[i].size())
            throw ShapeMismatch("cross_entropy: class count mismatch");
        for (std::size_t j = 0; j < probs[i].size(); ++j) {
            const Real p = std::max(probs[i][j], static_cast<Real>(kProbClamp));
            total -= onehot[i][j] * std::log(p);
        }
    }
    return total / static_cast<Real>(probs.size());
}

// d CE / d probs for one sample with integer label, pre-scaled by 1/batch.
template <typename Real>
std::vector<Real> cross_entropy_backward(const std::vector<Real>& probs, std::size_t label,
                                         std::size_t batch_size) {
    std::vector<Real> g(probs.size(), Real(0));
    const Real p = std::max(probs[label], static_cast<Real>(kProbClamp));
    g[label] = -Real(1) / (p * static_cast<Real>(batch_size));
    return g;
}

// ---- gradient verification ----

struct GradCheckReport {
    double max_rel_err = 0.0;
    std::size_t checked = 0;

    bool pass(double tol) const { return checked > 0 && max_rel_err < tol; }
};

// Central finite differences against pre-populated analytic gradients.
// `loss` must recompute the forward pass from the current parameter values.
template <typename Real>
GradCheckReport grad_check(const std::vector<Tensor<Real>*>& params,
                           const std::function<double()>& loss, double h = 1e-5) {
    GradCheckReport rep;
    for (Tensor<Real>* t : params) {
        for (std::size_t i = 0; i < t->values.size(); ++i) {
            const Real orig = t->values[i];
            t->values[i] = orig + static_cast<Real>(h);
            const double lp = loss();
            t->values[i] = orig - static_cast<Real>(h);
            const double lm = loss();
            t->values[i] = orig;
            const double fd = (lp - lm) / (2.0 * h);
            const double an = static_cast<double>(t->grad[i]);
            const double denom = std::max({std::abs(fd), std::abs(an), 1e-6});
            rep.max_rel_err = std::max(rep.max_rel_err, std::abs(fd - an) / denom);
            ++rep.checked;
        }
    }
    return rep;
}

}  // namespace mdpid
