#pragma once

// Time-Doppler spectrogram assembly: range-Doppler maps, per-frame Doppler
// energy vectors in dB, robust noise floor estimation, floor-clamp denoising,
// and the zero-Doppler removal / symmetric crop.

#include <algorithm>
#include <cmath>
#include <vector>

#include "mdpid/common.hpp"
#include "mdpid/fft.hpp"
#include "mdpid/radar_io.hpp"

namespace mdpid {

// |S| floor inside log10; the energy sum is undefined at exact zeros.
inline constexpr double kDbFloor = 1e-12;

using Rdm = Matrix2c;

inline Rdm compute_rdm(const Frame& frame, PadPolicy policy = PadPolicy::Strict) {
    return fft2d(frame, policy);
}

// e_v = sum_u 20*log10(max(|S(u,v)|, eps)), one value per Doppler cell.
inline std::vector<double> doppler_energy(const Rdm& rdm) {
    std::vector<double> e(rdm.cols, 0.0);
    for (std::size_t v = 0; v < rdm.cols; ++v) {
        double acc = 0.0;
        for (std::size_t u = 0; u < rdm.rows; ++u) {
            const double mag = std::max(std::abs(rdm.at(u, v)), kDbFloor);
            acc += 20.0 * std::log10(mag);
        }
        e[v] = acc;
    }
    return e;
}

// n frames x D Doppler cells, dB, rows ordered by time. Columns are in
// FFT-shifted order: doppler_axis is strictly increasing and (pre-crop)
// column L/2 is exactly 0 Hz.
struct Tds {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> values;
    std::vector<double> doppler_axis;  // Hz per column
    std::vector<double> frame_times;   // seconds per row

    Tds() = default;
    Tds(std::size_t r, std::size_t c)
        : rows(r), cols(c), values(r * c), doppler_axis(c), frame_times(r) {}

    double& at(std::size_t i, std::size_t j) { return values[i * cols + j]; }
    double at(std::size_t i, std::size_t j) const { return values[i * cols + j]; }
};

inline Tds assemble_tds(const std::vector<Frame>& frames, const RadarConfig& cfg,
                        PadPolicy policy = PadPolicy::Strict, unsigned threads = 1) {
    if (frames.empty()) throw EmptyDataset("assemble_tds: no frames");
    const std::size_t l = (policy == PadPolicy::Strict)
                              ? cfg.chirps_per_frame
                              : next_power_of_two(cfg.chirps_per_frame);
    Tds tds(frames.size(), l);
    parallel_for(frames.size(), threads, [&](std::size_t i) {
        const std::vector<double> e = doppler_energy(compute_rdm(frames[i], policy));
        // fftshift: shifted column j holds unshifted bin (j + L/2) mod L
        for (std::size_t j = 0; j < l; ++j)
            tds.at(i, j) = e[(j + l / 2) % l];
        tds.frame_times[i] = static_cast<double>(i) * cfg.frame_duration();
    });
    for (std::size_t j = 0; j < l; ++j) tds.doppler_axis[j] = doppler_bin_to_hz(j, cfg);
    return tds;
}

// Per-bin robust noise statistics over time plus the clamp margin.
struct NoiseModel {
    std::vector<double> location;  // per-column median, dB
    std::vector<double> scale;     // per-column MAD, dB
    double margin = 3.0;

    double threshold(std::size_t col) const {
        return location[col] + margin * scale[col];
    }
};

namespace detail {
inline double median_inplace(std::vector<double>& v) {
    const std::size_t n = v.size();
    const std::size_t mid = n / 2;
    std::nth_element(v.begin(), v.begin() + mid, v.end());
    double m = v[mid];
    if (n % 2 == 0) {
        std::nth_element(v.begin(), v.begin() + mid - 1, v.begin() + mid);
        m = 0.5 * (m + v[mid - 1]);
    }
    return m;
}
}  // namespace detail

inline NoiseModel estimate_noise_model(const Tds& calibration, double margin = 3.0) {
    if (calibration.rows < 8)
        throw TooFewFrames("estimate_noise_model: need at least 8 rows");
    NoiseModel nm;
    nm.margin = margin;
    nm.location.resize(calibration.cols);
    nm.scale.resize(calibration.cols);
    std::vector<double> col(calibration.rows);
    for (std::size_t j = 0; j < calibration.cols; ++j) {
        for (std::size_t i = 0; i < calibration.rows; ++i) col[i] = calibration.at(i, j);
        const double med = detail::median_inplace(col);
        for (std::size_t i = 0; i < calibration.rows; ++i)
            col[i] = std::abs(calibration.at(i, j) - med);
        nm.location[j] = med;
        nm.scale[j] = detail::median_inplace(col);
    }
    return nm;
}

// Floor-clamp: entries below the per-bin threshold are raised to it,
// entries above pass through. Idempotent.
inline Tds denoise_tds(const Tds& tds, const NoiseModel& nm) {
    if (nm.location.size() != tds.cols || nm.scale.size() != tds.cols)
        throw ShapeMismatch("denoise_tds: noise model width does not match TDS");
    Tds out = tds;
    for (std::size_t j = 0; j < tds.cols; ++j) {
        const double thr = nm.threshold(j);
        for (std::size_t i = 0; i < tds.rows; ++i)
            out.at(i, j) = std::max(tds.at(i, j), thr);
    }
    return out;
}

// Keeps the central (target_cells + 1) shifted bins around the zero-Doppler
// column, then deletes the zero column, leaving exactly target_cells columns.
// Pure column selection; values are untouched.
inline Tds remove_zero_doppler_and_crop(const Tds& tds, std::size_t target_cells = 205) {
    if (tds.cols < target_cells + 1)
        throw TooFewBins("crop: TDS has fewer bins than target_cells + 1");
    const std::size_t keep = target_cells + 1;
    const std::size_t zero = tds.cols / 2;
    const std::size_t lo = zero - keep / 2;
    const std::size_t hi = lo + keep - 1;

    Tds out(tds.rows, target_cells);
    out.frame_times = tds.frame_times;
    std::size_t jj = 0;
    for (std::size_t j = lo; j <= hi; ++j) {
        if (j == zero) continue;
        out.doppler_axis[jj] = tds.doppler_axis[j];
        for (std::size_t i = 0; i < tds.rows; ++i) out.at(i, jj) = tds.at(i, j);
        ++jj;
    }
    return out;
}

}  // namespace mdpid
