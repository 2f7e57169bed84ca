#pragma once

// The multi-characteristic model: FN1 (CNN over the TDS window), FN2 (FCN
// over the four statistical features), CN (FCN over both, emitting 2X sigmoid
// gates), and the fused output
//   fused_i = f1_i * c_i + f2_i * c_{X+i},   probs = softmax(fused)
// trained jointly with cross-entropy and plain SGD. Includes sample window
// assembly, evaluation, and the MCL1 checkpoint format.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "mdpid/common.hpp"
#include "mdpid/features.hpp"
#include "mdpid/nn.hpp"
#include "mdpid/radar_io.hpp"
#include "mdpid/spectrogram.hpp"

namespace mdpid {

struct ModelConfig {
    std::size_t num_classes = 5;  // X
    std::size_t tds_rows = 45;
    std::size_t tds_cols = 205;
    std::vector<std::size_t> conv_channels = {16, 32, 64, 64};
    std::size_t fn1_hidden = 128;
    std::vector<std::size_t> fn2_hidden = {5, 5};
    std::vector<std::size_t> cn_hidden = {1000, 100};

    std::size_t feature_dim() const { return 4; }
    std::size_t cn_input_dim() const { return tds_rows * tds_cols + feature_dim(); }
};

// One training/evaluation sample: a TDS window plus the feature vector over
// the longer window starting at the same frame.
struct Sample {
    std::vector<float> tds;  // tds_rows * tds_cols, raw dB
    std::size_t tds_rows = 0;
    std::size_t tds_cols = 0;
    std::array<double, 4> features{};
    int label = kUnlabeled;
    std::uint32_t recording_id = 0;
    std::uint32_t start_frame = 0;
};

struct Normalization {
    double tds_mean = 0.0;
    double tds_std = 1.0;
    std::array<double, 4> feat_mean{};
    std::array<double, 4> feat_std{1.0, 1.0, 1.0, 1.0};
};

inline Normalization compute_normalization(const std::vector<Sample>& samples) {
    if (samples.empty()) throw EmptyDataset("compute_normalization: no samples");
    Normalization n;
    double sum = 0.0, sq = 0.0;
    std::size_t count = 0;
    std::array<double, 4> fsum{}, fsq{};
    for (const Sample& s : samples) {
        for (float v : s.tds) {
            sum += v;
            sq += static_cast<double>(v) * v;
            ++count;
        }
        for (std::size_t j = 0; j < 4; ++j) {
            fsum[j] += s.features[j];
            fsq[j] += s.features[j] * s.features[j];
        }
    }
    n.tds_mean = sum / static_cast<double>(count);
    n.tds_std = std::sqrt(std::max(sq / count - n.tds_mean * n.tds_mean, 0.0));
    if (n.tds_std < 1e-8) n.tds_std = 1.0;
    const double m = static_cast<double>(samples.size());
    for (std::size_t j = 0; j < 4; ++j) {
        n.feat_mean[j] = fsum[j] / m;
        n.feat_std[j] = std::sqrt(std::max(fsq[j] / m - n.feat_mean[j] * n.feat_mean[j], 0.0));
        if (n.feat_std[j] < 1e-8) n.feat_std[j] = 1.0;
    }
    return n;
}

template <typename Real>
struct ForwardResult {
    std::vector<Real> f1;     // FN1 logits, X
    std::vector<Real> f2;     // FN2 logits, X
    std::vector<Real> gates;  // CN output, 2X
    std::vector<Real> fused;  // X
    std::vector<Real> probs;  // X, sums to 1
    bool gates_forced = false;
};

template <typename Real>
class MclModel {
public:
    ModelConfig cfg;
    Normalization norm;

    MclModel() = default;

    explicit MclModel(const ModelConfig& c) : cfg(c) {
        if (cfg.num_classes < 2) throw ShapeInconsistent("model: need at least 2 classes");
        if (cfg.conv_channels.empty()) throw ShapeInconsistent("model: need conv layers");
        // trace shapes through the conv stack
        std::size_t h = cfg.tds_rows, w = cfg.tds_cols, ch = 1;
        for (std::size_t c_out : cfg.conv_channels) {
            convs_.emplace_back(ch, c_out, Padding::Same);
            pools_.emplace_back();
            conv_acts_.emplace_back();
            ch = c_out;
            h /= 2;
            w /= 2;
            if (h == 0 || w == 0)
                throw ShapeInconsistent("model: TDS window too small for the conv stack");
        }
        flatten_dim_ = ch * h * w;
        fn1_fc1_ = Linear<Real>(flatten_dim_, cfg.fn1_hidden);
        fn1_fc2_ = Linear<Real>(cfg.fn1_hidden, cfg.num_classes);

        std::size_t prev = cfg.feature_dim();
        for (std::size_t hdim : cfg.fn2_hidden) {
            fn2_.emplace_back(prev, hdim);
            fn2_acts_.emplace_back();
            prev = hdim;
        }
        fn2_.emplace_back(prev, cfg.num_classes);

        prev = cfg.cn_input_dim();
        for (std::size_t hdim : cfg.cn_hidden) {
            cn_.emplace_back(prev, hdim);
            cn_acts_.emplace_back();
            prev = hdim;
        }
        cn_.emplace_back(prev, 2 * cfg.num_classes);
    }

    void init(std::uint64_t seed) {
        Rng rng(seed);
        for (auto& c : convs_) c.init(rng);
        fn1_fc1_.init(rng);
        fn1_fc2_.init(rng);
        for (auto& l : fn2_) l.init(rng);
        for (auto& l : cn_) l.init(rng);
    }

    std::size_t flatten_dim() const { return flatten_dim_; }
    std::size_t cn_input_dim() const { return cfg.cn_input_dim(); }
    std::size_t cn_output_dim() const { return 2 * cfg.num_classes; }

    std::vector<std::pair<std::string, Tensor<Real>*>> named_parameters() {
        std::vector<std::pair<std::string, Tensor<Real>*>> out;
        for (std::size_t i = 0; i < convs_.size(); ++i) {
            out.emplace_back("fn1.conv" + std::to_string(i) + ".weight", &convs_[i].weight);
            out.emplace_back("fn1.conv" + std::to_string(i) + ".bias", &convs_[i].bias);
        }
        out.emplace_back("fn1.fc1.weight", &fn1_fc1_.weight);
        out.emplace_back("fn1.fc1.bias", &fn1_fc1_.bias);
        out.emplace_back("fn1.fc2.weight", &fn1_fc2_.weight);
        out.emplace_back("fn1.fc2.bias", &fn1_fc2_.bias);
        for (std::size_t i = 0; i < fn2_.size(); ++i) {
            out.emplace_back("fn2." + std::to_string(i) + ".weight", &fn2_[i].weight);
            out.emplace_back("fn2." + std::to_string(i) + ".bias", &fn2_[i].bias);
        }
        for (std::size_t i = 0; i < cn_.size(); ++i) {
            out.emplace_back("cn." + std::to_string(i) + ".weight", &cn_[i].weight);
            out.emplace_back("cn." + std::to_string(i) + ".bias", &cn_[i].bias);
        }
        return out;
    }

    std::vector<Tensor<Real>*> parameters() {
        std::vector<Tensor<Real>*> out;
        for (auto& [name, t] : named_parameters()) out.push_back(t);
        return out;
    }

    // Forward pass for one sample. `force_gates`, when non-null, bypasses CN
    // (test hook for the fusion semantics).
    ForwardResult<Real> forward(const Sample& s, const std::vector<Real>* force_gates = nullptr) {
        check_sample(s);
        const std::size_t x_dim = cfg.num_classes;

        Tensor<Real> m({1, cfg.tds_rows, cfg.tds_cols});
        for (std::size_t i = 0; i < s.tds.size(); ++i)
            m.values[i] = static_cast<Real>((s.tds[i] - norm.tds_mean) / norm.tds_std);
        Tensor<Real> n({cfg.feature_dim()});
        for (std::size_t j = 0; j < 4; ++j)
            n.values[j] =
                static_cast<Real>((s.features[j] - norm.feat_mean[j]) / norm.feat_std[j]);

        // FN1
        Tensor<Real> t = m;
        for (std::size_t i = 0; i < convs_.size(); ++i) {
            t = convs_[i].forward(t);
            t = pools_[i].forward(t);
            t = conv_acts_[i].forward(t);
        }
        t.shape = {flatten_dim_};
        t = fn1_fc1_.forward(t);
        t = fn1_act_.forward(t);
        t = fn1_fc2_.forward(t);

        ForwardResult<Real> res;
        res.f1 = t.values;

        // FN2
        Tensor<Real> u = n;
        for (std::size_t i = 0; i < fn2_.size(); ++i) {
            u = fn2_[i].forward(u);
            if (i + 1 < fn2_.size()) u = fn2_acts_[i].forward(u);
        }
        res.f2 = u.values;

        // CN over the concatenated inputs
        if (force_gates != nullptr) {
            if (force_gates->size() != 2 * x_dim)
                throw ShapeMismatch("forward: forced gates must have size 2X");
            res.gates = *force_gates;
            res.gates_forced = true;
        } else {
            Tensor<Real> c({cn_input_dim()});
            std::copy(m.values.begin(), m.values.end(), c.values.begin());
            std::copy(n.values.begin(), n.values.end(),
                      c.values.begin() + static_cast<std::ptrdiff_t>(m.numel()));
            for (std::size_t i = 0; i < cn_.size(); ++i) {
                c = cn_[i].forward(c);
                if (i + 1 < cn_.size()) c = cn_acts_[i].forward(c);
            }
            c = cn_sigmoid_.forward(c);
            res.gates = c.values;
        }

        res.fused.resize(x_dim);
        for (std::size_t i = 0; i < x_dim; ++i)
            res.fused[i] = res.f1[i] * res.gates[i] + res.f2[i] * res.gates[x_dim + i];
        res.probs = softmax(res.fused);
        return res;
    }

    // Backward for the sample most recently passed through forward().
    // Accumulates parameter gradients scaled by 1/batch_size.
    void backward(const ForwardResult<Real>& res, std::size_t label, std::size_t batch_size) {
        const std::size_t x_dim = cfg.num_classes;
        if (label >= x_dim) throw ShapeMismatch("backward: label out of range");

        const std::vector<Real> dprobs = cross_entropy_backward(res.probs, label, batch_size);
        const std::vector<Real> dfused = softmax_backward(res.probs, dprobs);

        Tensor<Real> df1({x_dim}), df2({x_dim}), dgates({2 * x_dim});
        for (std::size_t i = 0; i < x_dim; ++i) {
            df1.values[i] = dfused[i] * res.gates[i];
            df2.values[i] = dfused[i] * res.gates[x_dim + i];
            dgates.values[i] = dfused[i] * res.f1[i];
            dgates.values[x_dim + i] = dfused[i] * res.f2[i];
        }

        // FN1
        Tensor<Real> g = fn1_fc2_.backward(df1);
        g = fn1_act_.backward(g);
        g = fn1_fc1_.backward(g);
        std::size_t h = cfg.tds_rows, w = cfg.tds_cols;
        std::vector<std::size_t> hs, ws;
        for (std::size_t i = 0; i < convs_.size(); ++i) {
            h /= 2;
            w /= 2;
            hs.push_back(h);
            ws.push_back(w);
        }
        g.shape = {cfg.conv_channels.back(), hs.back(), ws.back()};
        for (std::size_t i = convs_.size(); i-- > 0;) {
            g = conv_acts_[i].backward(g);
            g = pools_[i].backward(g);
            g = convs_[i].backward(g);
        }

        // FN2
        Tensor<Real> g2 = df2;
        for (std::size_t i = fn2_.size(); i-- > 0;) {
            g2 = fn2_[i].backward(g2);
            if (i > 0) g2 = fn2_acts_[i - 1].backward(g2);
        }

        // CN (skipped when gates were forced)
        if (!res.gates_forced) {
            Tensor<Real> gc = cn_sigmoid_.backward(dgates);
            for (std::size_t i = cn_.size(); i-- > 0;) {
                gc = cn_[i].backward(gc);
                if (i > 0) gc = cn_acts_[i - 1].backward(gc);
            }
        }
    }

    std::size_t predict(const Sample& s) {
        const ForwardResult<Real> res = forward(s);
        return static_cast<std::size_t>(
            std::max_element(res.probs.begin(), res.probs.end()) - res.probs.begin());
    }

private:
    void check_sample(const Sample& s) const {
        if (s.tds_rows != cfg.tds_rows || s.tds_cols != cfg.tds_cols ||
            s.tds.size() != cfg.tds_rows * cfg.tds_cols)
            throw ShapeMismatch("forward: sample TDS window does not match model config");
    }

    std::vector<Conv2d<Real>> convs_;
    std::vector<MaxPool2d<Real>> pools_;
    std::vector<Elu<Real>> conv_acts_;
    Linear<Real> fn1_fc1_, fn1_fc2_;
    Elu<Real> fn1_act_;
    std::vector<Linear<Real>> fn2_;
    std::vector<Elu<Real>> fn2_acts_;
    std::vector<Linear<Real>> cn_;
    std::vector<Elu<Real>> cn_acts_;
    Sigmoid<Real> cn_sigmoid_;
    std::size_t flatten_dim_ = 0;
};

template <typename Real>
MclModel<Real> build_model(const ModelConfig& cfg, std::uint64_t seed) {
    MclModel<Real> m(cfg);
    m.init(seed);
    return m;
}

// Mean cross-entropy over the batch; populates parameter gradients.
template <typename Real>
double loss_and_grad(MclModel<Real>& model, const std::vector<const Sample*>& batch) {
    if (batch.empty()) throw EmptyDataset("loss_and_grad: empty batch");
    zero_grads(model.parameters());
    double loss = 0.0;
    for (const Sample* s : batch) {
        const ForwardResult<Real> res = model.forward(*s);
        const std::size_t label = static_cast<std::size_t>(s->label);
        const double p =
            std::max(static_cast<double>(res.probs[label]), kProbClamp);
        loss -= std::log(p);
        model.backward(res, label, batch.size());
    }
    return loss / static_cast<double>(batch.size());
}

struct ConfusionMatrix {
    std::size_t classes = 0;
    std::vector<std::size_t> counts;  // rows = true, columns = predicted

    explicit ConfusionMatrix(std::size_t x = 0) : classes(x), counts(x * x, 0) {}

    std::size_t& at(std::size_t truth, std::size_t pred) {
        return counts[truth * classes + pred];
    }
    std::size_t at(std::size_t truth, std::size_t pred) const {
        return counts[truth * classes + pred];
    }
    std::size_t total() const {
        std::size_t t = 0;
        for (std::size_t c : counts) t += c;
        return t;
    }
    std::size_t trace() const {
        std::size_t t = 0;
        for (std::size_t i = 0; i < classes; ++i) t += at(i, i);
        return t;
    }
    double accuracy() const {
        const std::size_t t = total();
        return t == 0 ? 0.0 : static_cast<double>(trace()) / static_cast<double>(t);
    }
    std::size_t row_sum(std::size_t truth) const {
        std::size_t t = 0;
        for (std::size_t j = 0; j < classes; ++j) t += at(truth, j);
        return t;
    }
};

struct EvalResult {
    double accuracy = 0.0;
    double mean_loss = 0.0;
    ConfusionMatrix confusion;
};

template <typename Real>
EvalResult evaluate(MclModel<Real>& model, const std::vector<Sample>& samples) {
    if (samples.empty()) throw EmptyDataset("evaluate: no samples");
    EvalResult r;
    r.confusion = ConfusionMatrix(model.cfg.num_classes);
    double loss = 0.0;
    for (const Sample& s : samples) {
        const ForwardResult<Real> res = model.forward(s);
        const std::size_t pred = static_cast<std::size_t>(
            std::max_element(res.probs.begin(), res.probs.end()) - res.probs.begin());
        const std::size_t label = static_cast<std::size_t>(s.label);
        r.confusion.at(label, pred) += 1;
        loss -= std::log(std::max(static_cast<double>(res.probs[label]), kProbClamp));
    }
    r.mean_loss = loss / static_cast<double>(samples.size());
    r.accuracy = r.confusion.accuracy();
    return r;
}

struct TrainOptions {
    double learning_rate = 0.001;
    std::size_t epochs = 500;
    std::size_t batch_size = 32;
    std::uint64_t seed = 0;
    // stop once validation accuracy reaches this (it cannot improve further);
    // > 1 disables
    double early_stop_val_acc = 2.0;
};

struct EpochStats {
    std::size_t epoch = 0;
    double train_loss = 0.0;
    double train_acc = 0.0;
    double val_loss = 0.0;
    double val_acc = 0.0;
};

using TrainingLog = std::vector<EpochStats>;

// Epoch loop with seeded shuffling; the model is left at the parameters of
// the best validation-accuracy epoch.
template <typename Real>
TrainingLog train(MclModel<Real>& model, const std::vector<Sample>& train_set,
                  const std::vector<Sample>& val_set, const TrainOptions& opts) {
    if (train_set.empty() || val_set.empty())
        throw EmptyDataset("train: empty training or validation set");
    for (const Sample& s : train_set)
        if (s.label < 0 || static_cast<std::size_t>(s.label) >= model.cfg.num_classes)
            throw ShapeMismatch("train: sample label out of range");

    Rng rng(opts.seed);
    std::vector<std::size_t> order(train_set.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    TrainingLog log;
    double best_val_acc = -1.0;
    std::vector<std::vector<Real>> best_params;
    auto params = model.parameters();

    for (std::size_t epoch = 0; epoch < opts.epochs; ++epoch) {
        rng.shuffle(order);
        double epoch_loss = 0.0;
        std::size_t correct = 0;
        std::size_t batches = 0;
        for (std::size_t b = 0; b < order.size(); b += opts.batch_size) {
            const std::size_t end = std::min(order.size(), b + opts.batch_size);
            zero_grads(params);
            double batch_loss = 0.0;
            for (std::size_t i = b; i < end; ++i) {
                const Sample& s = train_set[order[i]];
                const ForwardResult<Real> res = model.forward(s);
                const std::size_t label = static_cast<std::size_t>(s.label);
                batch_loss -= std::log(
                    std::max(static_cast<double>(res.probs[label]), kProbClamp));
                const std::size_t pred = static_cast<std::size_t>(
                    std::max_element(res.probs.begin(), res.probs.end()) - res.probs.begin());
                correct += (pred == label) ? 1 : 0;
                model.backward(res, label, end - b);
            }
            batch_loss /= static_cast<double>(end - b);
            if (!std::isfinite(batch_loss)) throw DivergedLoss("train: non-finite loss");
            sgd_step(params, static_cast<Real>(opts.learning_rate));
            epoch_loss += batch_loss;
            ++batches;
        }

        EpochStats st;
        st.epoch = epoch;
        st.train_loss = epoch_loss / static_cast<double>(batches);
        st.train_acc = static_cast<double>(correct) / static_cast<double>(train_set.size());
        const EvalResult vr = evaluate(model, val_set);
        st.val_loss = vr.mean_loss;
        st.val_acc = vr.accuracy;
        log.push_back(st);

        if (st.val_acc > best_val_acc) {
            best_val_acc = st.val_acc;
            best_params.clear();
            for (Tensor<Real>* t : params) best_params.push_back(t->values);
        }
        if (st.val_acc >= opts.early_stop_val_acc) break;
    }

    if (!best_params.empty())
        for (std::size_t i = 0; i < params.size(); ++i) params[i]->values = best_params[i];
    return log;
}

// ---- sample window assembly ----

struct SampleOptions {
    std::size_t stride = 15;          // 1 s at the reference frame rate
    std::size_t tds_window = 45;      // rows fed to FN1
    std::size_t feature_window = 165; // rows behind the FN2 features
    double rel_threshold_db = kDefaultEnvelopeThresholdDb;
    std::uint32_t recording_id = 0;
};

// For each start s (step = stride) with s + feature_window <= rows:
// M = TDS rows [s, s + tds_window), N = features over [s, s + feature_window),
// label = majority person id over the M window.
inline std::vector<Sample> build_samples(const Tds& tds, const RadarConfig& cfg,
                                         const std::vector<int>& frame_labels,
                                         const SampleOptions& opts) {
    if (tds.rows < opts.feature_window)
        throw TooShort("build_samples: recording shorter than the feature window");
    if (opts.tds_window > opts.feature_window || opts.tds_window < 2 || opts.stride == 0)
        throw ConfigError("build_samples: invalid window/stride configuration");
    if (frame_labels.size() != tds.rows)
        throw ShapeMismatch("build_samples: label count does not match TDS rows");

    std::vector<Sample> out;
    for (std::size_t s = 0; s + opts.feature_window <= tds.rows; s += opts.stride) {
        const double frame_dur =
            tds.rows > 1 ? tds.frame_times[1] - tds.frame_times[0] : cfg.frame_duration();
        const TdsWindow fw = make_window(tds, s, opts.feature_window, frame_dur);
        const FeatureVector fv =
            extract_features_or_fallback(fw, cfg, opts.rel_threshold_db);

        Sample smp;
        smp.tds_rows = opts.tds_window;
        smp.tds_cols = tds.cols;
        smp.tds.resize(opts.tds_window * tds.cols);
        for (std::size_t i = 0; i < opts.tds_window; ++i)
            for (std::size_t j = 0; j < tds.cols; ++j)
                smp.tds[i * tds.cols + j] = static_cast<float>(tds.at(s + i, j));
        smp.features = fv.as_array();
        smp.recording_id = opts.recording_id;
        smp.start_frame = static_cast<std::uint32_t>(s);

        // majority vote over the M window
        std::vector<std::pair<int, std::size_t>> tally;
        for (std::size_t i = s; i < s + opts.tds_window; ++i) {
            const int l = frame_labels[i];
            bool found = false;
            for (auto& [id, n] : tally)
                if (id == l) {
                    ++n;
                    found = true;
                }
            if (!found) tally.emplace_back(l, 1);
        }
        std::size_t best = 0;
        for (std::size_t i = 1; i < tally.size(); ++i)
            if (tally[i].second > tally[best].second) best = i;
        smp.label = tally[best].first;

        out.push_back(std::move(smp));
    }
    return out;
}

// ---- MCL1 checkpoint ----

inline void save_checkpoint(MclModel<float>& model, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open checkpoint for writing: " + path);
    os.write("MCL1", 4);
    const ModelConfig& c = model.cfg;
    put_u32(os, static_cast<std::uint32_t>(c.num_classes));
    put_u32(os, static_cast<std::uint32_t>(c.tds_rows));
    put_u32(os, static_cast<std::uint32_t>(c.tds_cols));
    put_u32(os, static_cast<std::uint32_t>(c.conv_channels.size()));
    for (std::size_t ch : c.conv_channels) put_u32(os, static_cast<std::uint32_t>(ch));
    put_u32(os, static_cast<std::uint32_t>(c.fn1_hidden));
    put_u32(os, static_cast<std::uint32_t>(c.fn2_hidden.size()));
    for (std::size_t h : c.fn2_hidden) put_u32(os, static_cast<std::uint32_t>(h));
    put_u32(os, static_cast<std::uint32_t>(c.cn_hidden.size()));
    for (std::size_t h : c.cn_hidden) put_u32(os, static_cast<std::uint32_t>(h));
    put_f64(os, model.norm.tds_mean);
    put_f64(os, model.norm.tds_std);
    for (double v : model.norm.feat_mean) put_f64(os, v);
    for (double v : model.norm.feat_std) put_f64(os, v);

    auto named = model.named_parameters();
    put_u32(os, static_cast<std::uint32_t>(named.size()));
    for (auto& [name, t] : named) {
        put_u16(os, static_cast<std::uint16_t>(name.size()));
        os.write(name.data(), static_cast<std::streamsize>(name.size()));
        put_u32(os, static_cast<std::uint32_t>(t->shape.size()));
        for (std::size_t d : t->shape) put_u32(os, static_cast<std::uint32_t>(d));
        for (float v : t->values) put_f32(os, v);
    }
    if (!os) throw IoError("failed writing checkpoint: " + path);
}

inline MclModel<float> load_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open checkpoint: " + path);
    char magic[4] = {};
    if (!get_bytes(is, reinterpret_cast<unsigned char*>(magic), 4) ||
        std::string(magic, 4) != "MCL1")
        throw BadMagic("not an MCL1 checkpoint: " + path);

    ModelConfig c;
    c.num_classes = get_u32(is);
    c.tds_rows = get_u32(is);
    c.tds_cols = get_u32(is);
    c.conv_channels.resize(get_u32(is));
    for (auto& ch : c.conv_channels) ch = get_u32(is);
    c.fn1_hidden = get_u32(is);
    c.fn2_hidden.resize(get_u32(is));
    for (auto& h : c.fn2_hidden) h = get_u32(is);
    c.cn_hidden.resize(get_u32(is));
    for (auto& h : c.cn_hidden) h = get_u32(is);

    MclModel<float> model(c);
    model.norm.tds_mean = get_f64(is);
    model.norm.tds_std = get_f64(is);
    for (double& v : model.norm.feat_mean) v = get_f64(is);
    for (double& v : model.norm.feat_std) v = get_f64(is);

    auto named = model.named_parameters();
    const std::uint32_t count = get_u32(is);
    if (count != named.size())
        throw HeaderMismatch("checkpoint tensor count does not match architecture");
    for (auto& [name, t] : named) {
        const std::uint16_t len = get_u16(is);
        std::string got(len, '\0');
        if (!get_bytes(is, reinterpret_cast<unsigned char*>(got.data()), len))
            throw IoError("truncated checkpoint: " + path);
        if (got != name) throw HeaderMismatch("checkpoint tensor name mismatch: " + got);
        std::vector<std::size_t> shape(get_u32(is));
        for (auto& d : shape) d = get_u32(is);
        if (shape != t->shape) throw HeaderMismatch("checkpoint tensor shape mismatch: " + name);
        for (float& v : t->values) v = get_f32(is);
    }
    return model;
}

}  // namespace mdpid
