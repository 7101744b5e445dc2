#include "handval/metrics.hpp"

#include "handval/errors.hpp"

#include <fftw3.h>
#include <fmt/format.h>

#include <cmath>
#include <mutex>
#include <numeric>

namespace handval {

namespace {

void require_pair(const DistanceSeries& a, const DistanceSeries& b) {
    if (a.samples.size() != b.samples.size())
        throw LengthMismatchError(
            fmt::format("series lengths differ: {} vs {}", a.samples.size(), b.samples.size()));
    if (a.samples.empty()) throw EmptySeriesError("metric on empty series");
}

} // namespace

double rmse_cm(const DistanceSeries& reference, const DistanceSeries& candidate) {
    require_pair(reference, candidate);
    double acc = 0.0;
    for (std::size_t i = 0; i < reference.samples.size(); ++i) {
        const double e = reference.samples[i].d - candidate.samples[i].d;
        acc += e * e;
    }
    return std::sqrt(acc / static_cast<double>(reference.samples.size())) / 10.0;
}

std::pair<double, std::size_t> prmse_pct(const DistanceSeries& reference,
                                         const DistanceSeries& candidate, double floor_mm) {
    require_pair(reference, candidate);
    if (floor_mm < 0.0) throw Error("prmse floor must be non-negative");
    double acc = 0.0;
    std::size_t used = 0;
    for (std::size_t i = 0; i < reference.samples.size(); ++i) {
        const double y = reference.samples[i].d;
        if (std::abs(y) < floor_mm) continue;
        const double r = (y - candidate.samples[i].d) / y;
        acc += r * r;
        ++used;
    }
    if (used == 0)
        throw AllExcludedError(fmt::format("all {} samples fall below the {} mm floor",
                                           reference.samples.size(), floor_mm));
    return {std::sqrt(acc / static_cast<double>(used)) * 100.0, reference.samples.size() - used};
}

double pearson(const DistanceSeries& reference, const DistanceSeries& candidate) {
    require_pair(reference, candidate);
    const std::size_t n = reference.samples.size();
    if (n < 2) throw DegenerateSeriesError("correlation needs at least two samples");
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += reference.samples[i].d;
        my += candidate.samples[i].d;
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = reference.samples[i].d - mx;
        const double dy = candidate.samples[i].d - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0)
        throw DegenerateSeriesError("correlation undefined for a zero-variance series");
    const double rho = sxy / std::sqrt(sxx * syy);
    return std::clamp(rho, -1.0, 1.0);
}

TrajectoryMetrics trajectory_metrics(const DistanceSeries& reference, const DistanceSeries& candidate,
                                     double prmse_floor_mm) {
    TrajectoryMetrics m;
    m.rmse_cm = rmse_cm(reference, candidate);
    auto [pct, excluded] = prmse_pct(reference, candidate, prmse_floor_mm);
    m.prmse_pct = pct;
    m.n_excluded_prmse = excluded;
    m.pearson_rho = pearson(reference, candidate);
    m.n_samples = reference.samples.size();
    return m;
}

std::vector<double> periodogram(const std::vector<double>& values) {
    const std::size_t n = values.size();
    if (n < 2) throw TooShortError("periodogram needs at least two samples");

    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(n);
    std::vector<double> in(n);
    for (std::size_t i = 0; i < n; ++i) in[i] = values[i] - mean;

    const std::size_t n_bins = n / 2 + 1;
    std::vector<double> out(n_bins);
    {
        // FFTW planning mutates shared state; executing a plan is thread-safe.
        static std::mutex plan_mutex;
        std::lock_guard<std::mutex> lock(plan_mutex);
        fftw_complex* spectrum = fftw_alloc_complex(n_bins);
        fftw_plan plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), in.data(), spectrum, FFTW_ESTIMATE);
        fftw_execute(plan);
        const double scale = static_cast<double>(n) * static_cast<double>(n);
        for (std::size_t k = 0; k < n_bins; ++k)
            out[k] = (spectrum[k][0] * spectrum[k][0] + spectrum[k][1] * spectrum[k][1]) / scale;
        fftw_destroy_plan(plan);
        fftw_free(spectrum);
    }
    return out;
}

SpectralFeatures spectral_features(const DistanceSeries& series, double band_lo_hz, double band_hi_hz) {
    if (series.samples.size() < 2) throw TooShortError("spectral features need at least two samples");
    const double dt = median_dt(series);
    if (dt <= 0.0) throw TooShortError("series has no usable sample period");
    const std::size_t n = series.samples.size();
    const double duration = static_cast<double>(n) * dt;
    if (duration < 5.0)
        throw TooShortError(fmt::format("series spans {:.3f} s, at least 5 s required", duration));
    if (!(band_lo_hz < band_hi_hz) || band_lo_hz < 0.0)
        throw Error(fmt::format("invalid band [{}, {}] Hz", band_lo_hz, band_hi_hz));
    const double nyquist = 0.5 / dt;
    if (band_hi_hz > nyquist + 1e-12)
        throw Error(fmt::format("band upper edge {} Hz beyond Nyquist {} Hz", band_hi_hz, nyquist));

    const auto power = periodogram(series.values());
    const double resolution = 1.0 / duration;

    SpectralFeatures feat;
    feat.band_lo_hz = band_lo_hz;
    feat.band_hi_hz = band_hi_hz;
    feat.resolution_hz = resolution;

    bool found = false;
    for (std::size_t k = 0; k < power.size(); ++k) {
        const double f = static_cast<double>(k) * resolution;
        if (f < band_lo_hz || f > band_hi_hz) continue;
        if (!found || power[k] > feat.pow_dom) {
            feat.f_dom_hz = f;
            feat.pow_dom = power[k];
            found = true;
        }
    }
    if (!found)
        throw BandEmptyError(fmt::format("no periodogram bin falls inside [{}, {}] Hz (resolution {} Hz)",
                                         band_lo_hz, band_hi_hz, resolution));
    if (feat.pow_dom == 0.0)
        throw DegenerateSeriesError("series has zero in-band power after mean removal");
    return feat;
}

} // namespace handval
