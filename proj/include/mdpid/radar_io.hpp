#pragma once

// Radar configuration, the MDF1 raw complex-frame file format, label
// sidecars, and bin <-> physical-unit conversions.
//
// MDF1 layout (little-endian):
//   magic "MDF1"
//   u32 samples_per_chirp (K)
//   u32 chirps_per_frame  (L)
//   u32 frame_count
//   f64 chirp_duration_s
//   f64 carrier_frequency_hz
//   payload: frames in order, each frame row-major over k then l,
//            each sample two f32 (re, im)
//
// Labels live in a sidecar CSV "<path>.labels.csv", one `frame_index,person_id`
// line per labeled frame.

#include <cmath>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "mdpid/common.hpp"

namespace mdpid {

inline constexpr double kSpeedOfLight = 299792458.0;
inline constexpr int kUnlabeled = -1;

struct RadarConfig {
    std::size_t samples_per_chirp = 256;   // K, fast time
    std::size_t chirps_per_frame = 256;    // L, slow time
    double chirp_duration_s = 256e-6;
    double carrier_frequency_hz = 77e9;    // common automotive-band default

    double wavelength() const { return kSpeedOfLight / carrier_frequency_hz; }
    double prf() const { return 1.0 / chirp_duration_s; }
    double frame_duration() const {
        return static_cast<double>(chirps_per_frame) * chirp_duration_s;
    }
    double frame_rate() const { return 1.0 / frame_duration(); }

    void validate() const {
        if (samples_per_chirp < 2 || chirps_per_frame < 2)
            throw ConfigError("radar config: K and L must both be >= 2");
        if (!(chirp_duration_s > 0.0))
            throw ConfigError("radar config: chirp duration must be positive");
        if (!(carrier_frequency_hz > 0.0))
            throw ConfigError("radar config: carrier frequency must be positive");
    }
};

// One K x L complex data frame; fast-time index k = sample, slow-time
// index l = chirp. Stored row-major over k then l, as on disk.
struct Frame {
    std::size_t num_samples = 0;  // K
    std::size_t num_chirps = 0;   // L
    std::vector<std::complex<float>> data;

    Frame() = default;
    Frame(std::size_t k, std::size_t l)
        : num_samples(k), num_chirps(l), data(k * l) {}

    std::complex<float>& at(std::size_t k, std::size_t l) {
        return data[k * num_chirps + l];
    }
    const std::complex<float>& at(std::size_t k, std::size_t l) const {
        return data[k * num_chirps + l];
    }
};

struct FrameRecording {
    RadarConfig config;
    std::vector<Frame> frames;
    std::vector<int> labels;  // per frame; kUnlabeled when unknown

    void validate() const {
        config.validate();
        if (labels.size() != frames.size())
            throw ShapeMismatch("recording: label count does not match frame count");
        for (const Frame& f : frames) {
            if (f.num_samples != config.samples_per_chirp ||
                f.num_chirps != config.chirps_per_frame)
                throw ShapeMismatch("recording: frame dimensions do not match config");
            for (const auto& s : f.data)
                if (!std::isfinite(s.real()) || !std::isfinite(s.imag()))
                    throw NonFiniteSample("recording: non-finite sample");
        }
    }
};

inline std::string label_sidecar_path(const std::string& mdf_path) {
    return mdf_path + ".labels.csv";
}

inline void write_labels(const FrameRecording& rec, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open label file for writing: " + path);
    for (std::size_t i = 0; i < rec.labels.size(); ++i) {
        if (rec.labels[i] != kUnlabeled)
            os << i << "," << rec.labels[i] << "\n";
    }
    if (!os) throw IoError("failed writing label file: " + path);
}

inline void read_labels(FrameRecording& rec, const std::string& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open label file: " + path);
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::size_t idx = 0;
        int id = 0;
        char comma = 0;
        if (!(ls >> idx >> comma >> id) || comma != ',')
            throw IoError("malformed label line: " + line);
        if (idx >= rec.frames.size())
            throw HeaderMismatch("label frame index out of range: " + line);
        rec.labels[idx] = id;
    }
}

inline void write_recording(const FrameRecording& rec, const std::string& path) {
    rec.validate();
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot open file for writing: " + path);
    os.write("MDF1", 4);
    put_u32(os, static_cast<std::uint32_t>(rec.config.samples_per_chirp));
    put_u32(os, static_cast<std::uint32_t>(rec.config.chirps_per_frame));
    put_u32(os, static_cast<std::uint32_t>(rec.frames.size()));
    put_f64(os, rec.config.chirp_duration_s);
    put_f64(os, rec.config.carrier_frequency_hz);
    for (const Frame& f : rec.frames)
        for (const auto& s : f.data) {
            put_f32(os, s.real());
            put_f32(os, s.imag());
        }
    if (!os) throw IoError("failed writing: " + path);
    os.close();

    bool any_label = false;
    for (int l : rec.labels) any_label = any_label || (l != kUnlabeled);
    if (any_label) write_labels(rec, label_sidecar_path(path));
}

inline FrameRecording read_recording(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open file: " + path);
    char magic[4] = {};
    if (!get_bytes(is, reinterpret_cast<unsigned char*>(magic), 4) ||
        std::string(magic, 4) != "MDF1")
        throw BadMagic("not an MDF1 file: " + path);

    FrameRecording rec;
    rec.config.samples_per_chirp = get_u32(is);
    rec.config.chirps_per_frame = get_u32(is);
    const std::uint32_t count = get_u32(is);
    rec.config.chirp_duration_s = get_f64(is);
    rec.config.carrier_frequency_hz = get_f64(is);
    rec.config.validate();

    const std::size_t k = rec.config.samples_per_chirp;
    const std::size_t l = rec.config.chirps_per_frame;
    rec.frames.reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
        Frame f(k, l);
        for (auto& s : f.data) {
            float re, im;
            try {
                re = get_f32(is);
                im = get_f32(is);
            } catch (const IoError&) {
                throw HeaderMismatch("truncated payload in " + path);
            }
            if (!std::isfinite(re) || !std::isfinite(im))
                throw NonFiniteSample("non-finite sample in " + path);
            s = {re, im};
        }
        rec.frames.push_back(std::move(f));
    }
    // trailing bytes mean the header undercounts
    if (is.peek() != std::char_traits<char>::eof())
        throw HeaderMismatch("payload longer than header claims in " + path);

    rec.labels.assign(rec.frames.size(), kUnlabeled);
    const std::string sidecar = label_sidecar_path(path);
    if (std::filesystem::exists(sidecar)) read_labels(rec, sidecar);
    return rec;
}

// Doppler frequency of a FFT-shifted bin; bin L/2 maps to exactly 0 Hz.
inline double doppler_bin_to_hz(std::size_t bin, const RadarConfig& cfg) {
    const double l = static_cast<double>(cfg.chirps_per_frame);
    return (static_cast<double>(bin) - l / 2.0) * cfg.prf() / l;
}

// V = f * lambda / 2, signed.
inline double doppler_hz_to_velocity(double hz, const RadarConfig& cfg) {
    return hz * cfg.wavelength() / 2.0;
}

inline double velocity_to_doppler_hz(double v, const RadarConfig& cfg) {
    return 2.0 * v / cfg.wavelength();
}

// Velocity span of one Doppler bin, the quantum used in feature tolerances.
inline double doppler_bin_hz(const RadarConfig& cfg) {
    return cfg.prf() / static_cast<double>(cfg.chirps_per_frame);
}

}  // namespace mdpid
