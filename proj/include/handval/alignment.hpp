#pragma once

#include "handval/types.hpp"

#include <utility>
#include <vector>

namespace handval {

/// Corrections applied to make a reference/candidate pair directly
/// comparable: amplitude (vertical) offset and integer sample (horizontal)
/// lag at the candidate rate. Both output series share the candidate grid
/// and have zero mean difference.
struct AlignmentResult {
    double vertical_offset_mm = 0.0;
    int lag_samples = 0;
    double lag_seconds = 0.0;
    DistanceSeries aligned_reference;
    DistanceSeries aligned_candidate;
};

/// Linear interpolation of a series onto the given timestamps. Targets up to
/// one source period outside the span clamp to the nearest sample; anything
/// farther throws OutOfSpanError.
DistanceSeries resample(const DistanceSeries& series, const std::vector<double>& target_times);

/// Integer lag (in samples) that maximises the cross-correlation of the
/// mean-removed series over [-max_lag, +max_lag]. Positive means the
/// candidate lags the reference. Both series must share a grid and be longer
/// than 2*max_lag. The comparison window is held fixed across lag
/// hypotheses so the estimate carries no overlap-length bias.
int estimate_lag(const DistanceSeries& reference, const DistanceSeries& candidate, int max_lag);

/// Mean difference between the series and the reference shifted to remove
/// it; the candidate is left untouched.
std::pair<double, DistanceSeries> remove_vertical_offset(const DistanceSeries& reference,
                                                         const DistanceSeries& candidate);

/// Full alignment: resample the reference onto the candidate grid, estimate
/// the lag, crop both to the lag-aligned overlap, then remove the vertical
/// offset. Requires at least 5 s of overlapping span.
AlignmentResult align(const DistanceSeries& reference, const DistanceSeries& candidate, int max_lag);

/// Applies a known lag: pairs reference[i] with candidate[i + lag] and crops
/// to the valid range. Used to align secondary distance channels with the
/// lag estimated on a trial's primary channel.
AlignmentResult align_with_lag(const DistanceSeries& reference, const DistanceSeries& candidate,
                               int lag_samples);

} // namespace handval
