#pragma once

#include "handval/types.hpp"

#include <cstddef>
#include <utility>
#include <vector>

namespace handval {

struct SegmentationConfig {
    double prominence_fraction = 0.10; // of the global value range, in (0, 1)
    double min_separation_s = 0.2;     // between same-type extrema
    int smoothing_window = 0;          // centred moving average, samples; 0 = off
};

/// One movement repetition: a local-maximum pair enclosing one minimum.
/// ROM is the opening maximum minus the enclosed minimum, reported in cm;
/// DUR is the inter-maximum interval in seconds.
struct Segment {
    double t_start = 0.0;
    double t_end = 0.0;
    std::size_t idx_max_start = 0;
    std::size_t idx_min = 0;
    std::size_t idx_max_end = 0;
    double rom_cm = 0.0;
    double dur_s = 0.0;
};

struct ExtremaResult {
    std::vector<std::size_t> maxima; // strictly alternating with minima
    std::vector<std::size_t> minima;
};

/// Local extrema of the (optionally smoothed) series. Retained extrema have
/// prominence of at least prominence_fraction * (global max - global min),
/// are at least min_separation apart from same-type neighbours, and strictly
/// alternate. Plateau ties resolve to the leftmost sample. Throws
/// NoExtremaError when fewer than two maxima survive.
ExtremaResult find_extrema(const DistanceSeries& series, const SegmentationConfig& config);

/// Splits the series into repetitions, one per consecutive maxima pair.
/// Values are taken from the smoothed series when smoothing is enabled so
/// detection and parameters stay consistent.
std::vector<Segment> segment(const DistanceSeries& series, const SegmentationConfig& config);

/// Per-segment parameter vectors (ROM in cm, DUR in s), in segment order.
std::pair<std::vector<double>, std::vector<double>>
segment_parameters(const std::vector<Segment>& segments);

} // namespace handval
