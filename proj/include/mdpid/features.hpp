#pragma once

// The four signal statistical features over a TDS time window:
//   x1 torso Doppler speed (m/s)   -- mean |argmax velocity| per frame
//   x2 Doppler bandwidth (Hz)      -- max(upper env) - min(lower env)
//   x3 torso bandwidth (Hz)        -- avg(upper env) - avg(lower env)
//   x4 limb motion period (s)      -- T_w / extremum count of the upper env
//
// Envelopes use a per-row threshold relative to the row maximum (default
// 10 dB down), which makes every feature invariant to constant dB offsets.

#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

#include "mdpid/common.hpp"
#include "mdpid/radar_io.hpp"
#include "mdpid/spectrogram.hpp"

namespace mdpid {

inline constexpr double kDefaultEnvelopeThresholdDb = 10.0;

// A view of Z consecutive TDS rows.
struct TdsWindow {
    const Tds* tds = nullptr;
    std::size_t start = 0;
    std::size_t len = 0;          // Z
    double frame_duration = 0.0;  // seconds

    std::size_t cols() const { return tds->cols; }
    double at(std::size_t i, std::size_t j) const { return tds->at(start + i, j); }
    double doppler_hz(std::size_t j) const { return tds->doppler_axis[j]; }
    double duration() const { return static_cast<double>(len) * frame_duration; }
};

inline TdsWindow make_window(const Tds& tds, std::size_t start, std::size_t len,
                             double frame_duration) {
    if (len < 2 || start + len > tds.rows)
        throw EmptyWindow("make_window: window must hold >= 2 rows inside the TDS");
    return TdsWindow{&tds, start, len, frame_duration};
}

struct Envelope {
    std::vector<double> upper;  // Hz per row
    std::vector<double> lower;  // Hz per row
};

struct FeatureVector {
    double torso_speed_mps = 0.0;       // x1
    double doppler_bandwidth_hz = 0.0;  // x2
    double torso_bandwidth_hz = 0.0;    // x3
    double limb_period_s = 0.0;         // x4

    std::array<double, 4> as_array() const {
        return {torso_speed_mps, doppler_bandwidth_hz, torso_bandwidth_hz, limb_period_s};
    }
};

// Row argmax bin; ties resolve to the lowest index.
inline std::size_t row_argmax(const TdsWindow& w, std::size_t i) {
    std::size_t best = 0;
    double best_v = w.at(i, 0);
    for (std::size_t j = 1; j < w.cols(); ++j)
        if (w.at(i, j) > best_v) {
            best_v = w.at(i, j);
            best = j;
        }
    return best;
}

// Per row: upper = Doppler of the highest-frequency bin within
// rel_threshold_db of the row max, lower = the lowest-frequency such bin.
// The argmax bin always qualifies, so upper >= lower holds by construction.
inline Envelope extract_envelopes(const TdsWindow& w,
                                  double rel_threshold_db = kDefaultEnvelopeThresholdDb) {
    if (w.len == 0) throw EmptyWindow("extract_envelopes: empty window");
    Envelope env;
    env.upper.resize(w.len);
    env.lower.resize(w.len);
    for (std::size_t i = 0; i < w.len; ++i) {
        const std::size_t amax = row_argmax(w, i);
        const double thr = w.at(i, amax) - rel_threshold_db;
        std::size_t hi = amax, lo = amax;
        for (std::size_t j = amax + 1; j < w.cols(); ++j)
            if (w.at(i, j) >= thr) hi = j;
        for (std::size_t j = 0; j < amax; ++j)
            if (w.at(i, j) >= thr) {
                lo = j;
                break;
            }
        env.upper[i] = w.doppler_hz(hi);
        env.lower[i] = w.doppler_hz(lo);
    }
    return env;
}

// x1: per row, velocity of the maximal-energy Doppler bin; average of
// absolute values over the window.
inline double torso_doppler_frequency(const TdsWindow& w, const RadarConfig& cfg) {
    if (w.len == 0) throw EmptyWindow("torso_doppler_frequency: empty window");
    double acc = 0.0;
    for (std::size_t i = 0; i < w.len; ++i) {
        const double hz = w.doppler_hz(row_argmax(w, i));
        acc += std::abs(doppler_hz_to_velocity(hz, cfg));
    }
    return acc / static_cast<double>(w.len);
}

inline double doppler_bandwidth(const Envelope& env) {
    if (env.upper.empty()) throw EmptyWindow("doppler_bandwidth: empty envelope");
    double umax = env.upper[0], lmin = env.lower[0];
    for (double u : env.upper) umax = std::max(umax, u);
    for (double l : env.lower) lmin = std::min(lmin, l);
    return umax - lmin;
}

inline double torso_bandwidth(const Envelope& env) {
    if (env.upper.empty()) throw EmptyWindow("torso_bandwidth: empty envelope");
    double usum = 0.0, lsum = 0.0;
    for (double u : env.upper) usum += u;
    for (double l : env.lower) lsum += l;
    const double n = static_cast<double>(env.upper.size());
    return usum / n - lsum / n;
}

namespace detail {

// Centered 3-point moving average; endpoints average the two values present.
inline std::vector<double> smooth3(const std::vector<double>& v) {
    const std::size_t n = v.size();
    std::vector<double> s(n);
    for (std::size_t i = 0; i < n; ++i) {
        double acc = v[i];
        double cnt = 1.0;
        if (i > 0) { acc += v[i - 1]; cnt += 1.0; }
        if (i + 1 < n) { acc += v[i + 1]; cnt += 1.0; }
        s[i] = acc / cnt;
    }
    return s;
}

// Strict local extrema with plateaus collapsed to a single count: compress
// equal-value runs, then compare each interior run against its neighbors.
inline std::size_t count_extrema(const std::vector<double>& v) {
    std::vector<double> runs;
    for (double x : v)
        if (runs.empty() || runs.back() != x) runs.push_back(x);
    std::size_t count = 0;
    for (std::size_t r = 1; r + 1 < runs.size(); ++r) {
        const bool mx = runs[r] > runs[r - 1] && runs[r] > runs[r + 1];
        const bool mn = runs[r] < runs[r - 1] && runs[r] < runs[r + 1];
        if (mx || mn) ++count;
    }
    return count;
}

}  // namespace detail

// x4 = T_w / (number of extrema of the smoothed upper envelope).
inline double limb_period(const TdsWindow& w, const Envelope& env) {
    if (env.upper.size() != w.len || w.len == 0)
        throw EmptyWindow("limb_period: envelope does not match window");
    const std::size_t n = detail::count_extrema(detail::smooth3(env.upper));
    if (n == 0) throw NoExtremum("limb_period: envelope has no interior extremum");
    return w.duration() / static_cast<double>(n);
}

inline FeatureVector extract_features(const TdsWindow& w, const RadarConfig& cfg,
                                      double rel_threshold_db = kDefaultEnvelopeThresholdDb) {
    const Envelope env = extract_envelopes(w, rel_threshold_db);
    FeatureVector f;
    f.torso_speed_mps = torso_doppler_frequency(w, cfg);
    f.doppler_bandwidth_hz = doppler_bandwidth(env);
    f.torso_bandwidth_hz = torso_bandwidth(env);
    f.limb_period_s = limb_period(w, env);  // may throw NoExtremum
    return f;
}

// Pipeline-facing variant: a window with no envelope extremum (static scene)
// falls back to x4 = T_w instead of failing the whole recording.
inline FeatureVector extract_features_or_fallback(
    const TdsWindow& w, const RadarConfig& cfg,
    double rel_threshold_db = kDefaultEnvelopeThresholdDb) {
    try {
        return extract_features(w, cfg, rel_threshold_db);
    } catch (const NoExtremum&) {
        const Envelope env = extract_envelopes(w, rel_threshold_db);
        FeatureVector f;
        f.torso_speed_mps = torso_doppler_frequency(w, cfg);
        f.doppler_bandwidth_hz = doppler_bandwidth(env);
        f.torso_bandwidth_hz = torso_bandwidth(env);
        f.limb_period_s = w.duration();
        return f;
    }
}

}  // namespace mdpid
