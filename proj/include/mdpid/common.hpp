#pragma once

// Shared plumbing: error types, deterministic RNG, little-endian binary IO,
// and a chunked parallel map used by the frame pipeline.

#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <istream>
#include <ostream>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace mdpid {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct BadMagic : Error { using Error::Error; };
struct HeaderMismatch : Error { using Error::Error; };
struct NonFiniteSample : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };
struct NonPowerOfTwo : Error { using Error::Error; };
struct NonFinite : Error { using Error::Error; };
struct ShapeMismatch : Error { using Error::Error; };
struct TooFewFrames : Error { using Error::Error; };
struct TooFewBins : Error { using Error::Error; };
struct EmptyWindow : Error { using Error::Error; };
struct NoExtremum : Error { using Error::Error; };
struct EmptyDataset : Error { using Error::Error; };
struct DivergedLoss : Error { using Error::Error; };
struct TooShort : Error { using Error::Error; };
struct InvalidProfile : Error { using Error::Error; };
struct ShapeInconsistent : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };

// Deterministic RNG. mt19937_64's output sequence is fully specified by the
// standard; the uniform/normal transforms below avoid the
// implementation-defined std::*_distribution classes so that results are
// bit-identical across toolchains.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    // uniform in [0, 1)
    double uniform() {
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) {
        return lo + (hi - lo) * uniform();
    }

    // standard normal via Box-Muller
    double normal() {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double two_pi = 6.283185307179586476925286766559;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
    }

    std::uint64_t below(std::uint64_t n) { return n == 0 ? 0 : gen_() % n; }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

private:
    std::mt19937_64 gen_;
};

// ---- little-endian binary IO ----

inline void put_bytes(std::ostream& os, const unsigned char* b, std::size_t n) {
    os.write(reinterpret_cast<const char*>(b), static_cast<std::streamsize>(n));
}

inline void put_u16(std::ostream& os, std::uint16_t v) {
    unsigned char b[2] = {static_cast<unsigned char>(v & 0xff),
                          static_cast<unsigned char>((v >> 8) & 0xff)};
    put_bytes(os, b, 2);
}

inline void put_u32(std::ostream& os, std::uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    put_bytes(os, b, 4);
}

inline void put_u64(std::ostream& os, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
    put_bytes(os, b, 8);
}

inline void put_f32(std::ostream& os, float v) {
    put_u32(os, std::bit_cast<std::uint32_t>(v));
}

inline void put_f64(std::ostream& os, double v) {
    put_u64(os, std::bit_cast<std::uint64_t>(v));
}

inline bool get_bytes(std::istream& is, unsigned char* b, std::size_t n) {
    is.read(reinterpret_cast<char*>(b), static_cast<std::streamsize>(n));
    return static_cast<std::size_t>(is.gcount()) == n;
}

inline std::uint16_t get_u16(std::istream& is) {
    unsigned char b[2];
    if (!get_bytes(is, b, 2)) throw IoError("unexpected end of file");
    return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
}

inline std::uint32_t get_u32(std::istream& is) {
    unsigned char b[4];
    if (!get_bytes(is, b, 4)) throw IoError("unexpected end of file");
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
    return v;
}

inline std::uint64_t get_u64(std::istream& is) {
    unsigned char b[8];
    if (!get_bytes(is, b, 8)) throw IoError("unexpected end of file");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    return v;
}

inline float get_f32(std::istream& is) { return std::bit_cast<float>(get_u32(is)); }
inline double get_f64(std::istream& is) { return std::bit_cast<double>(get_u64(is)); }

// Chunked parallel map over [0, n). Each index writes only its own slot, so
// the result is identical for any thread count.
inline void parallel_for(std::size_t n, unsigned threads,
                         const std::function<void(std::size_t)>& fn) {
    if (threads <= 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    const unsigned t = std::min<unsigned>(threads, static_cast<unsigned>(n));
    std::vector<std::thread> pool;
    pool.reserve(t);
    const std::size_t chunk = (n + t - 1) / t;
    for (unsigned w = 0; w < t; ++w) {
        const std::size_t lo = w * chunk;
        const std::size_t hi = std::min(n, lo + chunk);
        if (lo >= hi) break;
        pool.emplace_back([lo, hi, &fn] {
            for (std::size_t i = lo; i < hi; ++i) fn(i);
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace mdpid
