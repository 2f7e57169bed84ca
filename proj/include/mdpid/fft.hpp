#pragma once

// Radix-2 iterative FFT and the 2D transform used to form range-Doppler maps.
// Forward transform carries no normalization factor:
//   S(u,v) = sum_l sum_k s(k,l) * exp(-j*2*pi*(u*k/K + v*l/L))

#include <cmath>
#include <complex>
#include <vector>

#include "mdpid/common.hpp"
#include "mdpid/radar_io.hpp"

namespace mdpid {

enum class PadPolicy {
    Strict,   // reject non-power-of-two sizes
    ZeroPad,  // zero-pad to the next power of two
};

inline bool is_power_of_two(std::size_t n) { return n >= 1 && (n & (n - 1)) == 0; }

inline std::size_t next_power_of_two(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

// In-place radix-2 decimation-in-time FFT. Size must be a power of two.
inline void fft_inplace(std::vector<std::complex<double>>& a) {
    const std::size_t n = a.size();
    if (!is_power_of_two(n))
        throw NonPowerOfTwo("fft: size must be a power of two");
    // bit reversal
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    const double pi = 3.14159265358979323846264338327950288;
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = -2.0 * pi / static_cast<double>(len);
        const std::complex<double> wlen(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t j = 0; j < len / 2; ++j) {
                const std::complex<double> u = a[i + j];
                const std::complex<double> v = a[i + j + len / 2] * w;
                a[i + j] = u + v;
                a[i + j + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
}

struct Matrix2c {
    std::size_t rows = 0;  // range bins u (fast time K)
    std::size_t cols = 0;  // Doppler bins v (slow time L)
    std::vector<std::complex<double>> values;

    Matrix2c() = default;
    Matrix2c(std::size_t r, std::size_t c) : rows(r), cols(c), values(r * c) {}

    std::complex<double>& at(std::size_t u, std::size_t v) { return values[u * cols + v]; }
    const std::complex<double>& at(std::size_t u, std::size_t v) const {
        return values[u * cols + v];
    }
};

// 2D FFT of a frame: fast-time transform along k, slow-time along l.
inline Matrix2c fft2d(const Frame& frame, PadPolicy policy = PadPolicy::Strict) {
    std::size_t k = frame.num_samples;
    std::size_t l = frame.num_chirps;
    if (policy == PadPolicy::Strict) {
        if (!is_power_of_two(k) || !is_power_of_two(l))
            throw NonPowerOfTwo("fft2d: frame dimensions must be powers of two");
    } else {
        k = next_power_of_two(k);
        l = next_power_of_two(l);
    }
    for (const auto& s : frame.data)
        if (!std::isfinite(s.real()) || !std::isfinite(s.imag()))
            throw NonFinite("fft2d: non-finite input sample");

    Matrix2c out(k, l);
    for (std::size_t kk = 0; kk < frame.num_samples; ++kk)
        for (std::size_t ll = 0; ll < frame.num_chirps; ++ll)
            out.at(kk, ll) = std::complex<double>(frame.at(kk, ll));

    std::vector<std::complex<double>> col(k);
    for (std::size_t v = 0; v < l; ++v) {
        for (std::size_t u = 0; u < k; ++u) col[u] = out.at(u, v);
        fft_inplace(col);
        for (std::size_t u = 0; u < k; ++u) out.at(u, v) = col[u];
    }
    std::vector<std::complex<double>> row(l);
    for (std::size_t u = 0; u < k; ++u) {
        for (std::size_t v = 0; v < l; ++v) row[v] = out.at(u, v);
        fft_inplace(row);
        for (std::size_t v = 0; v < l; ++v) out.at(u, v) = row[v];
    }
    return out;
}

}  // namespace mdpid
