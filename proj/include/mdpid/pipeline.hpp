#pragma once

// End-to-end glue: frames -> TDS -> denoise -> crop -> sample windows,
// the MCS1 sample store, the leakage-free train/validation split, and the
// CSV/PGM emitters used by the CLI.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "mdpid/common.hpp"
#include "mdpid/features.hpp"
#include "mdpid/mcl.hpp"
#include "mdpid/radar_io.hpp"
#include "mdpid/spectrogram.hpp"

namespace mdpid {

struct PrepareOptions {
    std::size_t target_cells = 205;
    double noise_margin = 3.0;
    double rel_threshold_db = kDefaultEnvelopeThresholdDb;
    std::size_t stride = 15;
    std::size_t tds_window = 45;
    std::size_t feature_window = 165;
    PadPolicy pad_policy = PadPolicy::Strict;
    unsigned threads = 1;
};

// TDS of one recording after denoising and zero-Doppler crop. The noise
// model is estimated from the recording itself (per-bin median/MAD over time
// is robust to a sparse moving target).
inline Tds prepare_tds(const FrameRecording& rec, const PrepareOptions& opts) {
    Tds tds = assemble_tds(rec.frames, rec.config, opts.pad_policy, opts.threads);
    if (tds.rows >= 8) {
        const NoiseModel nm = estimate_noise_model(tds, opts.noise_margin);
        tds = denoise_tds(tds, nm);
    }
    return remove_zero_doppler_and_crop(tds, opts.target_cells);
}

inline std::vector<Sample> prepare_samples(const FrameRecording& rec,
                                           const PrepareOptions& opts,
                                           std::uint32_t recording_id = 0) {
    const Tds tds = prepare_tds(rec, opts);
    SampleOptions so;
    so.stride = opts.stride;
    so.tds_window = opts.tds_window;
    so.feature_window = opts.feature_window;
    so.rel_threshold_db = opts.rel_threshold_db;
    so.recording_id = recording_id;
    return build_samples(tds, rec.config, rec.labels, so);
}

// ---- MCS1 sample store ----
// magic "MCS1", u32 sample_count, u32 tds_rows, u32 tds_cols,
// u32 feature_window; per sample: u32 recording_id, u32 start_frame,
// i32 label, 4 x f64 features, rows*cols f32 TDS values.

struct SampleStore {
    std::size_t tds_rows = 0;
    std::size_t tds_cols = 0;
    std::size_t feature_window = 0;
    std::vector<Sample> samples;
};

inline void save_sample_store(const SampleStore& store, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open sample store for writing: " + path);
    os.write("MCS1", 4);
    put_u32(os, static_cast<std::uint32_t>(store.samples.size()));
    put_u32(os, static_cast<std::uint32_t>(store.tds_rows));
    put_u32(os, static_cast<std::uint32_t>(store.tds_cols));
    put_u32(os, static_cast<std::uint32_t>(store.feature_window));
    for (const Sample& s : store.samples) {
        put_u32(os, s.recording_id);
        put_u32(os, s.start_frame);
        put_u32(os, static_cast<std::uint32_t>(s.label));
        for (double f : s.features) put_f64(os, f);
        for (float v : s.tds) put_f32(os, v);
    }
    if (!os) throw IoError("failed writing sample store: " + path);
}

inline SampleStore load_sample_store(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open sample store: " + path);
    char magic[4] = {};
    if (!get_bytes(is, reinterpret_cast<unsigned char*>(magic), 4) ||
        std::string(magic, 4) != "MCS1")
        throw BadMagic("not an MCS1 sample store: " + path);
    SampleStore store;
    const std::uint32_t count = get_u32(is);
    store.tds_rows = get_u32(is);
    store.tds_cols = get_u32(is);
    store.feature_window = get_u32(is);
    store.samples.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        Sample s;
        s.tds_rows = store.tds_rows;
        s.tds_cols = store.tds_cols;
        s.recording_id = get_u32(is);
        s.start_frame = get_u32(is);
        s.label = static_cast<int>(get_u32(is));
        for (double& f : s.features) f = get_f64(is);
        s.tds.resize(store.tds_rows * store.tds_cols);
        for (float& v : s.tds) v = get_f32(is);
        store.samples.push_back(std::move(s));
    }
    return store;
}

// Blockwise chronological split per recording. Windows that straddle the
// cutoff are dropped so no frame feeds both sides.
inline void split_train_val(const std::vector<Sample>& all, double val_fraction,
                            std::size_t feature_window, std::vector<Sample>& train_out,
                            std::vector<Sample>& val_out) {
    if (val_fraction <= 0.0 || val_fraction >= 1.0)
        throw ConfigError("split: validation fraction must be in (0, 1)");
    std::map<std::uint32_t, std::uint32_t> last_end;  // recording -> frames spanned
    for (const Sample& s : all) {
        const std::uint32_t end = s.start_frame + static_cast<std::uint32_t>(feature_window);
        auto [it, inserted] = last_end.emplace(s.recording_id, end);
        if (!inserted) it->second = std::max(it->second, end);
    }
    train_out.clear();
    val_out.clear();
    for (const Sample& s : all) {
        const double span = static_cast<double>(last_end[s.recording_id]);
        const std::uint32_t cutoff =
            static_cast<std::uint32_t>(span * (1.0 - val_fraction));
        if (s.start_frame + feature_window <= cutoff)
            train_out.push_back(s);
        else if (s.start_frame >= cutoff)
            val_out.push_back(s);
    }
}

// ---- text emitters ----

inline void write_tds_csv(const Tds& tds, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open CSV for writing: " + path);
    os << std::setprecision(17);
    os << "time_s";
    for (double f : tds.doppler_axis) os << "," << f;
    os << "\n";
    for (std::size_t i = 0; i < tds.rows; ++i) {
        os << tds.frame_times[i];
        for (std::size_t j = 0; j < tds.cols; ++j) os << "," << tds.at(i, j);
        os << "\n";
    }
}

// 8-bit grayscale PGM, rows = time, min-max scaled.
inline void write_tds_pgm(const Tds& tds, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open PGM for writing: " + path);
    double lo = tds.values[0], hi = tds.values[0];
    for (double v : tds.values) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    const double span = (hi > lo) ? hi - lo : 1.0;
    os << "P5\n" << tds.cols << " " << tds.rows << "\n255\n";
    for (double v : tds.values) {
        const int g = static_cast<int>(255.0 * (v - lo) / span + 0.5);
        os.put(static_cast<char>(std::clamp(g, 0, 255)));
    }
}

inline void write_features_csv(const std::vector<Sample>& samples, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open CSV for writing: " + path);
    os << std::setprecision(17);
    os << "window_start_frame,x1,x2,x3,x4,label\n";
    for (const Sample& s : samples) {
        os << s.start_frame;
        for (double f : s.features) os << "," << f;
        os << "," << s.label << "\n";
    }
}

inline std::string training_log_csv(const TrainingLog& log) {
    std::ostringstream os;
    os << std::setprecision(17);
    os << "epoch,train_loss,train_acc,val_loss,val_acc\n";
    for (const EpochStats& st : log)
        os << st.epoch << "," << st.train_loss << "," << st.train_acc << "," << st.val_loss
           << "," << st.val_acc << "\n";
    return os.str();
}

inline void write_training_log_csv(const TrainingLog& log, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open CSV for writing: " + path);
    os << training_log_csv(log);
}

inline void write_confusion_csv(const ConfusionMatrix& cm, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open CSV for writing: " + path);
    os << "true\\pred";
    for (std::size_t j = 0; j < cm.classes; ++j) os << "," << j;
    os << "\n";
    for (std::size_t i = 0; i < cm.classes; ++i) {
        os << i;
        for (std::size_t j = 0; j < cm.classes; ++j) os << "," << cm.at(i, j);
        os << "\n";
    }
}

}  // namespace mdpid
