#pragma once

#include "handval/types.hpp"

#include <cstddef>
#include <utility>
#include <vector>

namespace handval {

struct TrajectoryMetrics {
    double rmse_cm = 0.0;
    double prmse_pct = 0.0;
    double pearson_rho = 0.0;
    std::size_t n_samples = 0;
    std::size_t n_excluded_prmse = 0;
};

/// Root mean square error between aligned equal-length series, in cm.
double rmse_cm(const DistanceSeries& reference, const DistanceSeries& candidate);

/// Percentage RMSE: sqrt(mean(((ref - cand)/ref)^2)) * 100, computed over
/// samples with |ref| >= floor_mm. Returns the percentage and the number of
/// excluded samples; throws AllExcludedError when nothing survives.
std::pair<double, std::size_t> prmse_pct(const DistanceSeries& reference,
                                         const DistanceSeries& candidate, double floor_mm);

/// Sample Pearson correlation coefficient ((n-1) covariance convention).
double pearson(const DistanceSeries& reference, const DistanceSeries& candidate);

TrajectoryMetrics trajectory_metrics(const DistanceSeries& reference,
                                     const DistanceSeries& candidate, double prmse_floor_mm);

struct SpectralFeatures {
    double f_dom_hz = 0.0;
    double pow_dom = 0.0; // periodogram power; unit-amplitude sinusoid = 0.25
    double band_lo_hz = 0.0;
    double band_hi_hz = 0.0;
    double resolution_hz = 0.0; // 1 / duration
};

/// Plain periodogram |X_k|^2 / N^2 of the mean-removed, rectangular-windowed
/// values, for bins k = 0 .. N/2.
std::vector<double> periodogram(const std::vector<double>& values);

/// Dominant frequency and power inside [band_lo, band_hi] Hz from the
/// mean-removed periodogram. Needs at least 5 s of samples and a band that
/// contains at least one bin.
SpectralFeatures spectral_features(const DistanceSeries& series, double band_lo_hz, double band_hi_hz);

} // namespace handval
