#pragma once

// Synthetic FMCW pedestrian simulator. Each walker is a torso scatterer at a
// constant Doppler plus a swinging-limb scatterer whose instantaneous Doppler
// is f_t + A_d * sin(2*pi*f_g*t). Phases come from integrating the
// instantaneous frequency, so the spectrogram shows clean sidebands:
//   upper envelope ~ f_t + A_d * max(sin, 0)  -> one maximum and one plateau
//   minimum per gait cycle, giving x4 = 1/(2*f_g)
//   lower envelope min ~ f_t - A_d            -> x2 = 2*A_d
// All scatterers sit in one fixed mid-range bin; noise is Gaussian in I/Q.

#include <cmath>
#include <complex>
#include <cstdint>
#include <vector>

#include "mdpid/common.hpp"
#include "mdpid/radar_io.hpp"

namespace mdpid {

struct WalkerProfile {
    double torso_speed_mps = 1.0;
    double limb_doppler_amplitude_hz = 60.0;  // A_d, peak deviation around f_t
    double gait_frequency_hz = 1.0;           // f_g, limb swing rate
    double torso_reflectivity = 1.0;          // linear amplitude
    double limb_reflectivity = 1.0;
    double noise_floor = 0.0;                 // I/Q noise std, linear
    int id = 0;

    void validate() const {
        if (torso_speed_mps < 0.0 || limb_doppler_amplitude_hz < 0.0 ||
            torso_reflectivity < 0.0 || limb_reflectivity < 0.0 || noise_floor < 0.0)
            throw InvalidProfile("walker profile: amplitudes and speeds must be >= 0");
        if (!(gait_frequency_hz > 0.0))
            throw InvalidProfile("walker profile: gait frequency must be positive");
        if (id < 0) throw InvalidProfile("walker profile: id must be >= 0");
    }
};

inline FrameRecording simulate_walker(const WalkerProfile& profile, const RadarConfig& cfg,
                                      double duration_s, std::uint64_t seed) {
    profile.validate();
    cfg.validate();
    if (duration_s < cfg.frame_duration())
        throw InvalidProfile("simulate_walker: duration shorter than one frame");

    const std::size_t k_dim = cfg.samples_per_chirp;
    const std::size_t l_dim = cfg.chirps_per_frame;
    const std::size_t n_frames =
        static_cast<std::size_t>(duration_s / cfg.frame_duration());
    const double f_torso = velocity_to_doppler_hz(profile.torso_speed_mps, cfg);
    const double two_pi = 6.283185307179586476925286766559;
    const std::size_t range_bin = k_dim / 4;  // fixed mid-range placement

    Rng rng(seed);
    FrameRecording rec;
    rec.config = cfg;
    rec.frames.reserve(n_frames);
    rec.labels.assign(n_frames, profile.id);

    for (std::size_t m = 0; m < n_frames; ++m) {
        Frame frame(k_dim, l_dim);
        for (std::size_t l = 0; l < l_dim; ++l) {
            const double t =
                (static_cast<double>(m) * static_cast<double>(l_dim) + static_cast<double>(l)) *
                cfg.chirp_duration_s;
            // torso: constant Doppler
            const double torso_phase = two_pi * f_torso * t;
            // limb: phase = 2*pi * integral of (f_t + A_d*sin(2*pi*f_g*tau))
            const double limb_phase =
                two_pi * f_torso * t +
                profile.limb_doppler_amplitude_hz / profile.gait_frequency_hz *
                    (1.0 - std::cos(two_pi * profile.gait_frequency_hz * t));
            const std::complex<double> slow =
                profile.torso_reflectivity *
                    std::complex<double>(std::cos(torso_phase), std::sin(torso_phase)) +
                profile.limb_reflectivity *
                    std::complex<double>(std::cos(limb_phase), std::sin(limb_phase));
            for (std::size_t k = 0; k < k_dim; ++k) {
                const double range_phase =
                    two_pi * static_cast<double>(k) * static_cast<double>(range_bin) /
                    static_cast<double>(k_dim);
                std::complex<double> s =
                    slow * std::complex<double>(std::cos(range_phase), std::sin(range_phase));
                if (profile.noise_floor > 0.0)
                    s += profile.noise_floor * std::complex<double>(rng.normal(), rng.normal());
                frame.at(k, l) = std::complex<float>(static_cast<float>(s.real()),
                                                     static_cast<float>(s.imag()));
            }
        }
        rec.frames.push_back(std::move(frame));
    }
    return rec;
}

// One recording per profile, labels set to the profile id. Per-recording
// seeds are derived from the dataset seed by index.
inline std::vector<FrameRecording> make_dataset(const std::vector<WalkerProfile>& profiles,
                                                double per_class_duration_s,
                                                const RadarConfig& cfg, std::uint64_t seed) {
    std::vector<FrameRecording> out;
    out.reserve(profiles.size());
    for (std::size_t i = 0; i < profiles.size(); ++i)
        out.push_back(simulate_walker(profiles[i], cfg, per_class_duration_s,
                                      seed + 0x9e3779b97f4a7c15ull * (i + 1)));
    return out;
}

}  // namespace mdpid
