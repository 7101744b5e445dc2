#include "handval/errors.hpp"
#include "handval/segmentation.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace handval;

namespace {

DistanceSeries series_from(const std::vector<double>& values, double fps = 30.0) {
    DistanceSeries s;
    s.label = DistanceLabel::IFT_TT;
    s.system = TrackingSystem::reference();
    s.samples.resize(values.size());
    for (std::size_t i = 0; i < values.size(); ++i)
        s.samples[i] = {static_cast<double>(i) / fps, values[i]};
    return s;
}

DistanceSeries sine_series(double amp, double base, double freq, double duration, double fps = 30.0) {
    std::vector<double> v(static_cast<std::size_t>(std::llround(duration * fps)));
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double t = static_cast<double>(i) / fps;
        v[i] = base + amp * std::sin(2 * M_PI * freq * t);
    }
    return series_from(v, fps);
}

// Interior peak count of A*sin(2*pi*f*t) sampled on [0, (n-1)/fps]:
// peaks at (k + 1/4)/f, troughs at (k + 3/4)/f, endpoints excluded.
int expected_peaks(double freq, std::size_t n, double fps, double phase_frac) {
    int count = 0;
    const double t_last = static_cast<double>(n - 1) / fps;
    for (int k = 0;; ++k) {
        const double t = (k + phase_frac) / freq;
        if (t >= t_last) break;
        if (t > 0.0) ++count;
    }
    return count;
}

} // namespace

TEST_CASE("sinusoid extrema alternate and match the closed-form count") {
    const double f = 1.25;
    const auto s = sine_series(40.0, 60.0, f, 15.0);
    const auto ext = find_extrema(s, {});
    const int peaks = expected_peaks(f, s.size(), 30.0, 0.25);
    const int troughs = expected_peaks(f, s.size(), 30.0, 0.75);
    CHECK(static_cast<int>(ext.maxima.size()) == peaks);
    CHECK(static_cast<int>(ext.minima.size()) == troughs);
    CHECK(std::abs(peaks - 19) <= 1);

    // strict alternation
    std::size_t mi = 0, ni = 0;
    std::vector<std::pair<std::size_t, bool>> merged;
    while (mi < ext.maxima.size() || ni < ext.minima.size()) {
        if (ni >= ext.minima.size() || (mi < ext.maxima.size() && ext.maxima[mi] < ext.minima[ni]))
            merged.push_back({ext.maxima[mi++], true});
        else
            merged.push_back({ext.minima[ni++], false});
    }
    for (std::size_t i = 1; i < merged.size(); ++i) CHECK(merged[i].second != merged[i - 1].second);
}

TEST_CASE("monotone ramp has no extrema") {
    std::vector<double> ramp(300);
    for (std::size_t i = 0; i < ramp.size(); ++i) ramp[i] = static_cast<double>(i);
    CHECK_THROWS_AS(find_extrema(series_from(ramp), {}), NoExtremaError);
}

TEST_CASE("small fast ripple is rejected by the prominence threshold") {
    const double f = 1.25;
    std::vector<double> v(450);
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double t = static_cast<double>(i) / 30.0;
        v[i] = 60.0 + 40.0 * std::sin(2 * M_PI * f * t) + 0.4 * std::sin(2 * M_PI * 10.0 * f * t);
    }
    SegmentationConfig config;
    config.prominence_fraction = 0.1;
    config.min_separation_s = 0.05; // separation alone must not be what rejects the ripple
    const auto ext = find_extrema(series_from(v), config);
    const int expected = expected_peaks(f, v.size(), 30.0, 0.25);
    CHECK(static_cast<int>(ext.maxima.size()) == expected);
}

TEST_CASE("plateau ties resolve to the leftmost sample") {
    std::vector<double> v{0, 1, 5, 5, 5, 1, 0, 1, 6, 1, 0};
    SegmentationConfig config;
    config.min_separation_s = 0.01;
    const auto ext = find_extrema(series_from(v, 1.0), config);
    REQUIRE(ext.maxima.size() == 2);
    CHECK(ext.maxima[0] == 2); // first sample of the 5,5,5 plateau
    CHECK(ext.maxima[1] == 8);
}

TEST_CASE("segments of a raised cosine carry ROM = peak-to-trough and DUR = period") {
    const double f = 1.25, amp = 40.0; // ROM = 2*amp = 8 cm
    const auto s = sine_series(amp, 60.0, f, 15.0);
    const auto segs = segment(s, {});
    CHECK(std::abs(static_cast<int>(segs.size()) - 18) <= 1);
    const double sample_period = 1.0 / 30.0;
    for (const auto& seg : segs) {
        CHECK(seg.rom_cm == doctest::Approx(2 * amp / 10.0).epsilon(0.02));
        CHECK(std::abs(seg.dur_s - 1.0 / f) <= sample_period + 1e-12);
        CHECK(seg.t_start < seg.t_end);
        CHECK(seg.idx_max_start < seg.idx_min);
        CHECK(seg.idx_min < seg.idx_max_end);
    }
}

TEST_CASE("two-cycle triangle wave yields one interior segment") {
    // peaks 100 at samples 10 and 30, trough 20 at sample 20, fps 10
    std::vector<double> v(41);
    auto tri = [](double x) { return x; };
    for (int i = 0; i <= 10; ++i) v[i] = 20.0 + 8.0 * tri(i);
    for (int i = 11; i <= 20; ++i) v[i] = 100.0 - 8.0 * (i - 10);
    for (int i = 21; i <= 30; ++i) v[i] = 20.0 + 8.0 * (i - 20);
    for (int i = 31; i <= 40; ++i) v[i] = 100.0 - 8.0 * (i - 30);
    const auto segs = segment(series_from(v, 10.0), {});
    REQUIRE(segs.size() == 1);
    CHECK(segs[0].rom_cm == doctest::Approx(8.0));
    CHECK(segs[0].idx_max_start == 10);
    CHECK(segs[0].idx_min == 20);
    CHECK(segs[0].idx_max_end == 30);
}

TEST_CASE("a single cycle gives no enclosing pair") {
    std::vector<double> v(21);
    for (int i = 0; i <= 10; ++i) v[i] = static_cast<double>(i);
    for (int i = 11; i <= 20; ++i) v[i] = 20.0 - i;
    CHECK_THROWS_AS(segment(series_from(v, 10.0), {}), NoExtremaError);
}

TEST_CASE("segment count equals retained maxima minus one on alternating data") {
    const auto s = sine_series(30.0, 50.0, 1.9166666666666667, 15.0);
    const auto ext = find_extrema(s, {});
    const auto segs = segment(s, {});
    CHECK(segs.size() == ext.maxima.size() - 1);
    double total = 0.0;
    for (const auto& seg : segs) total += seg.dur_s;
    CHECK(total <= 15.0);
}

TEST_CASE("segmentation is shift invariant and scale equivariant") {
    const auto s = sine_series(35.0, 70.0, 1.25, 12.0);
    const auto base = segment(s, {});
    auto shifted = s;
    for (auto& smp : shifted.samples) smp.d += 123.0;
    const auto seg_shifted = segment(shifted, {});
    REQUIRE(seg_shifted.size() == base.size());
    for (std::size_t i = 0; i < base.size(); ++i) {
        CHECK(seg_shifted[i].rom_cm == doctest::Approx(base[i].rom_cm).epsilon(1e-12));
        CHECK(seg_shifted[i].dur_s == doctest::Approx(base[i].dur_s));
    }
    auto scaled = s;
    for (auto& smp : scaled.samples) smp.d *= 3.0;
    const auto seg_scaled = segment(scaled, {});
    REQUIRE(seg_scaled.size() == base.size());
    for (std::size_t i = 0; i < base.size(); ++i) {
        CHECK(seg_scaled[i].rom_cm == doctest::Approx(3.0 * base[i].rom_cm).epsilon(1e-12));
        CHECK(seg_scaled[i].dur_s == doctest::Approx(base[i].dur_s));
    }
}

TEST_CASE("tempo sweep: mean duration tracks the metronome") {
    for (double bpm : {75.0, 115.0, 140.0}) {
        const double f = bpm / 60.0;
        const auto segs = segment(sine_series(25.0, 50.0, f, 15.0), {});
        auto [roms, durs] = segment_parameters(segs);
        REQUIRE(!durs.empty());
        double mean_dur = 0.0;
        for (double d : durs) mean_dur += d;
        mean_dur /= static_cast<double>(durs.size());
        CHECK(mean_dur == doctest::Approx(60.0 / bpm).epsilon(0.02));
        for (double r : roms) CHECK(r == doctest::Approx(5.0).epsilon(0.02));
    }
}

TEST_CASE("parameter extraction preserves order and rejects empty input") {
    const auto segs = segment(sine_series(40.0, 60.0, 1.25, 15.0), {});
    auto [roms, durs] = segment_parameters(segs);
    CHECK(roms.size() == segs.size());
    CHECK(durs.size() == segs.size());
    for (std::size_t i = 0; i < segs.size(); ++i) {
        CHECK(roms[i] == segs[i].rom_cm);
        CHECK(durs[i] == segs[i].dur_s);
    }
    CHECK_THROWS_AS(segment_parameters({}), EmptySegmentListError);
}

TEST_CASE("smoothing suppresses additive noise enough to segment") {
    std::mt19937_64 rng(8);
    std::normal_distribution<double> noise(0.0, 1.0);
    auto s = sine_series(40.0, 60.0, 1.25, 15.0);
    for (auto& smp : s.samples) smp.d += noise(rng);
    SegmentationConfig config;
    config.smoothing_window = 5;
    const auto segs = segment(s, config);
    CHECK(std::abs(static_cast<int>(segs.size()) - 18) <= 1);
}

TEST_CASE("configuration validation") {
    const auto s = sine_series(40.0, 60.0, 1.25, 15.0);
    SegmentationConfig bad;
    bad.prominence_fraction = 0.0;
    CHECK_THROWS_AS(find_extrema(s, bad), Error);
    bad = {};
    bad.min_separation_s = 0.0;
    CHECK_THROWS_AS(find_extrema(s, bad), Error);
}
