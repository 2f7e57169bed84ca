#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>
#include <vector>

#include "mdpid/features.hpp"
#include "oracles.hpp"

using namespace mdpid;

namespace {

constexpr double kQuiet = -100.0;  // bins far below any threshold

// TDS with an explicit Doppler axis and a per-(row, bin) dB generator.
Tds make_tds(const std::vector<double>& axis, std::size_t rows,
             const std::function<double(std::size_t, std::size_t)>& f) {
    Tds t(rows, axis.size());
    t.doppler_axis = axis;
    for (std::size_t i = 0; i < rows; ++i) {
        t.frame_times[i] = static_cast<double>(i);
        for (std::size_t j = 0; j < axis.size(); ++j) t.at(i, j) = f(i, j);
    }
    return t;
}

std::vector<double> linear_axis(double lo, double step, std::size_t n) {
    std::vector<double> a(n);
    for (std::size_t j = 0; j < n; ++j) a[j] = lo + step * static_cast<double>(j);
    return a;
}

RadarConfig wavelength_config(double wavelength) {
    RadarConfig cfg;
    cfg.carrier_frequency_hz = kSpeedOfLight / wavelength;
    return cfg;
}

oracle::FeatureOracle run_oracle(const Tds& tds, const TdsWindow& w, double wavelength,
                                 double threshold_db = kDefaultEnvelopeThresholdDb) {
    std::vector<std::vector<double>> win(w.len, std::vector<double>(w.cols()));
    for (std::size_t i = 0; i < w.len; ++i)
        for (std::size_t j = 0; j < w.cols(); ++j) win[i][j] = w.at(i, j);
    return oracle::features_oracle(win, tds.doppler_axis, wavelength, w.duration(),
                                   threshold_db);
}

}  // namespace

TEST_CASE("point target: envelopes collapse onto the single hot bin") {
    const auto axis = linear_axis(-40, 10, 9);  // bin 4 = 0 Hz... axis -40..40
    const Tds tds = make_tds(axis, 6, [](std::size_t, std::size_t j) {
        return j == 6 ? 0.0 : kQuiet;  // lone target at +20 Hz
    });
    const TdsWindow w = make_window(tds, 0, 6, 0.1);
    const Envelope env = extract_envelopes(w);
    for (std::size_t i = 0; i < 6; ++i) {
        CHECK(env.upper[i] == 20.0);
        CHECK(env.lower[i] == 20.0);
    }
    CHECK(doppler_bandwidth(env) == 0.0);
    CHECK(torso_bandwidth(env) == 0.0);
    CHECK_THROWS_AS(limb_period(w, env), NoExtremum);  // flat envelope

    const FeatureVector f = extract_features_or_fallback(w, wavelength_config(2.0));
    CHECK(f.limb_period_s == doctest::Approx(0.6).epsilon(1e-12));  // T_w fallback
    CHECK(f.torso_speed_mps == doctest::Approx(20.0).epsilon(1e-12));  // v = f*lambda/2
}

TEST_CASE("x1 is 0.195 m/s for a 100 Hz target at 3.9 mm wavelength") {
    const auto axis = linear_axis(0, 50, 5);  // 0,50,100,150,200 Hz
    const Tds tds = make_tds(axis, 4, [](std::size_t, std::size_t j) {
        return j == 2 ? -10.0 : kQuiet;
    });
    const TdsWindow w = make_window(tds, 0, 4, 0.0655);
    CHECK(torso_doppler_frequency(w, wavelength_config(0.0039)) ==
          doctest::Approx(0.195).epsilon(1e-12));
}

TEST_CASE("symmetric band gives x2 = x3 = 2*f_b") {
    const auto axis = linear_axis(-50, 10, 11);
    // band |f| <= 30 within 10 dB of the max at 0 Hz
    const Tds tds = make_tds(axis, 5, [&axis](std::size_t, std::size_t j) {
        return std::abs(axis[j]) <= 30.0 ? -5.0 - std::abs(axis[j]) / 10.0 : kQuiet;
    });
    const TdsWindow w = make_window(tds, 0, 5, 0.1);
    const Envelope env = extract_envelopes(w);
    for (std::size_t i = 0; i < 5; ++i) {
        CHECK(env.upper[i] == 30.0);
        CHECK(env.lower[i] == -30.0);
    }
    CHECK(doppler_bandwidth(env) == 60.0);
    CHECK(torso_bandwidth(env) == 60.0);
}

TEST_CASE("alternating target position drives x2 above x3") {
    const auto axis = linear_axis(-40, 20, 5);  // -40,-20,0,20,40
    // even rows: target at +40; odd rows: target at -40
    const Tds tds = make_tds(axis, 8, [](std::size_t i, std::size_t j) {
        const std::size_t hot = (i % 2 == 0) ? 4 : 0;
        return j == hot ? 0.0 : kQuiet;
    });
    const TdsWindow w = make_window(tds, 0, 8, 0.25);
    const Envelope env = extract_envelopes(w);
    CHECK(doppler_bandwidth(env) == 80.0);           // max upper - min lower
    CHECK(torso_bandwidth(env) == 0.0);              // means cancel
    // period: envelope alternates 40,-40,... -> smoothing keeps the alternation
    const FeatureVector f = extract_features(w, wavelength_config(2.0));
    CHECK(f.doppler_bandwidth_hz >= f.torso_bandwidth_hz);
    CHECK(f.limb_period_s > 0.0);
}

TEST_CASE("x4 of a slow square-wave envelope: known extremum count") {
    // Upper envelope visits 4 interior extrema over an 11 s window ->
    // x4 = 11/4 = 2.75 s. Build rows whose argmax walks up-down twice.
    const auto axis = linear_axis(0, 10, 8);
    const std::vector<std::size_t> hot = {0, 3, 0, 3, 0};  // peaks at rows 1 and 3, valleys at 2
    const Tds tds = make_tds(axis, hot.size(), [&hot](std::size_t i, std::size_t j) {
        return j == hot[i] ? 0.0 : kQuiet;
    });
    const TdsWindow w = make_window(tds, 0, hot.size(), 11.0 / 5.0);
    const Envelope env = extract_envelopes(w);
    // smoothed envelope still alternates: 3 interior extrema of the run list
    const auto sm = detail::smooth3(env.upper);
    const std::size_t n = detail::count_extrema(sm);
    CHECK(n == 3);
    CHECK(limb_period(w, env) == doctest::Approx(11.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("x4 of a sinusoidal envelope with period P is P/2") {
    // Upper envelope = sinusoid over two full periods -> 2 maxima + 2 minima
    // minus edge effects; with 2 periods over T_w and interior-only counting
    // we get 4 extrema when the window starts and ends mid-slope.
    const auto axis = linear_axis(-100, 5, 41);
    const std::size_t rows = 80;
    const double P = 2.0;          // seconds
    const double dt = 0.05;        // 80 rows * 0.05 = 4 s = 2 periods
    const Tds tds = make_tds(axis, rows, [&](std::size_t i, std::size_t j) {
        const double f = 50.0 * std::sin(2.0 * M_PI * (static_cast<double>(i) * dt + 0.1) / P);
        const std::size_t hot = static_cast<std::size_t>(std::lround((f + 100.0) / 5.0));
        return j == hot ? 0.0 : kQuiet;
    });
    const TdsWindow w = make_window(tds, 0, rows, dt);
    const FeatureVector f = extract_features(w, wavelength_config(2.0));
    CHECK(f.limb_period_s == doctest::Approx(P / 2.0).epsilon(0.05));
}

TEST_CASE("monotone envelope has no extremum") {
    const auto axis = linear_axis(0, 10, 12);
    const Tds tds = make_tds(axis, 10, [](std::size_t i, std::size_t j) {
        return j == i ? 0.0 : kQuiet;  // argmax climbs one bin per row
    });
    const TdsWindow w = make_window(tds, 0, 10, 0.1);
    CHECK_THROWS_AS(extract_features(w, wavelength_config(2.0)), NoExtremum);
}

TEST_CASE("features are invariant to a constant dB offset") {
    Rng rng(31);
    const auto axis = linear_axis(-80, 8, 21);
    const Tds base = make_tds(axis, 16, [&rng](std::size_t, std::size_t) {
        return -60.0 + rng.uniform(0, 30);
    });
    Tds shifted = base;
    for (double& v : shifted.values) v += 17.25;
    const RadarConfig cfg = wavelength_config(0.0039);
    const TdsWindow wa = make_window(base, 0, 16, 0.064);
    const TdsWindow wb = make_window(shifted, 0, 16, 0.064);
    const FeatureVector fa = extract_features_or_fallback(wa, cfg);
    const FeatureVector fb = extract_features_or_fallback(wb, cfg);
    CHECK(fa.torso_speed_mps == doctest::Approx(fb.torso_speed_mps).epsilon(1e-12));
    CHECK(fa.doppler_bandwidth_hz == fb.doppler_bandwidth_hz);
    CHECK(fa.torso_bandwidth_hz == fb.torso_bandwidth_hz);
    CHECK(fa.limb_period_s == fb.limb_period_s);
}

TEST_CASE("envelope and bandwidth invariants over random windows") {
    Rng rng(47);
    const auto axis = linear_axis(-120, 6, 41);
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t rows = 4 + rng.below(12);
        const Tds tds = make_tds(axis, rows, [&rng](std::size_t, std::size_t) {
            return -70.0 + rng.uniform(0, 40);
        });
        const TdsWindow w = make_window(tds, 0, rows, 0.064);
        const Envelope env = extract_envelopes(w);
        for (std::size_t i = 0; i < rows; ++i) CHECK(env.upper[i] >= env.lower[i]);
        CHECK(doppler_bandwidth(env) >= torso_bandwidth(env));
        CHECK(doppler_bandwidth(env) >= 0.0);
    }
}

TEST_CASE("shifting the Doppler axis shifts x1 but not the bandwidths") {
    Rng rng(53);
    const auto axis = linear_axis(-60, 4, 31);
    auto shifted_axis = axis;
    for (double& a : shifted_axis) a += 100.0;
    const std::size_t rows = 12;
    std::vector<std::vector<double>> grid(rows, std::vector<double>(axis.size()));
    for (auto& row : grid)
        for (double& v : row) v = -65.0 + rng.uniform(0, 25);
    auto fill = [&grid](std::size_t i, std::size_t j) { return grid[i][j]; };
    const Tds a = make_tds(axis, rows, fill);
    const Tds b = make_tds(shifted_axis, rows, fill);
    const RadarConfig cfg = wavelength_config(2.0);
    const FeatureVector fa = extract_features_or_fallback(make_window(a, 0, rows, 0.1), cfg);
    const FeatureVector fb = extract_features_or_fallback(make_window(b, 0, rows, 0.1), cfg);
    CHECK(fa.doppler_bandwidth_hz == doctest::Approx(fb.doppler_bandwidth_hz).epsilon(1e-12));
    CHECK(fa.torso_bandwidth_hz == doctest::Approx(fb.torso_bandwidth_hz).epsilon(1e-12));
    CHECK(fa.limb_period_s == doctest::Approx(fb.limb_period_s).epsilon(1e-12));
}

TEST_CASE("features match the independent scalar oracle") {
    Rng rng(61);
    const auto axis = linear_axis(-90, 9, 21);
    const RadarConfig cfg = wavelength_config(0.0039);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t rows = 5 + rng.below(20);
        const Tds tds = make_tds(axis, rows, [&rng](std::size_t, std::size_t) {
            return -70.0 + rng.uniform(0, 35);
        });
        const TdsWindow w = make_window(tds, 0, rows, 0.0655);
        const FeatureVector f = extract_features_or_fallback(w, cfg);
        const oracle::FeatureOracle o = run_oracle(tds, w, cfg.wavelength());
        CHECK(std::abs(f.torso_speed_mps - o.x1) < 1e-9);
        CHECK(std::abs(f.doppler_bandwidth_hz - o.x2) < 1e-9);
        CHECK(std::abs(f.torso_bandwidth_hz - o.x3) < 1e-9);
        if (o.x4_defined)
            CHECK(std::abs(f.limb_period_s - o.x4) < 1e-9);
        else
            CHECK(f.limb_period_s == doctest::Approx(w.duration()).epsilon(1e-12));
    }
}

TEST_CASE("window construction bounds") {
    const auto axis = linear_axis(0, 1, 4);
    const Tds tds = make_tds(axis, 6, [](std::size_t, std::size_t) { return 0.0; });
    CHECK_THROWS_AS(make_window(tds, 0, 1, 0.1), EmptyWindow);
    CHECK_THROWS_AS(make_window(tds, 5, 2, 0.1), EmptyWindow);
    CHECK_NOTHROW(make_window(tds, 4, 2, 0.1));
    CHECK(make_window(tds, 1, 4, 0.5).duration() == doctest::Approx(2.0));
}
