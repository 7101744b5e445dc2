#include "handval/alignment.hpp"

#include "handval/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace handval {

namespace {

double mean_of(const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double variance_of(const std::vector<double>& v) {
    const double m = mean_of(v);
    double acc = 0.0;
    for (double x : v) acc += (x - m) * (x - m);
    return acc / static_cast<double>(v.size());
}

} // namespace

DistanceSeries resample(const DistanceSeries& series, const std::vector<double>& target_times) {
    if (series.samples.size() < 2)
        throw TooFewSamplesError("resample needs at least two source samples");
    const double period = median_dt(series);
    const double t0 = series.t_front();
    const double t1 = series.t_back();
    constexpr double eps = 1e-9;

    DistanceSeries out;
    out.label = series.label;
    out.system = series.system;
    out.samples.reserve(target_times.size());

    for (double t : target_times) {
        if (t < t0 - period - eps || t > t1 + period + eps)
            throw OutOfSpanError(fmt::format(
                "target time {} s exceeds source span [{}, {}] s by more than one period", t, t0, t1));
        double d;
        if (t <= t0) {
            d = series.samples.front().d;
        } else if (t >= t1) {
            d = series.samples.back().d;
        } else {
            auto it = std::upper_bound(series.samples.begin(), series.samples.end(), t,
                                       [](double value, const DistanceSample& s) { return value < s.t; });
            const auto& hi = *it;
            const auto& lo = *(it - 1);
            const double u = (t - lo.t) / (hi.t - lo.t);
            d = lo.d + (hi.d - lo.d) * u;
        }
        out.samples.push_back({t, d});
    }
    return out;
}

int estimate_lag(const DistanceSeries& reference, const DistanceSeries& candidate, int max_lag) {
    if (max_lag < 0) throw Error("max_lag must be non-negative");
    if (!same_grid(reference, candidate))
        throw GridMismatchError("lag estimation needs both series on a common grid");
    const auto ref = reference.values();
    const auto cand = candidate.values();
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(ref.size());
    if (n <= 2 * static_cast<std::ptrdiff_t>(max_lag))
        throw Error(fmt::format("series of length {} too short for max_lag {}", n, max_lag));
    if (variance_of(ref) == 0.0 || variance_of(cand) == 0.0)
        throw DegenerateSeriesError("cannot estimate lag on a zero-variance series");

    // Fixed candidate window [max_lag, n - max_lag) slid against the full
    // reference; every lag hypothesis sees the same candidate samples.
    const std::ptrdiff_t w0 = max_lag;
    const std::ptrdiff_t w1 = n - max_lag;
    const std::ptrdiff_t m = w1 - w0;

    double cand_mean = 0.0;
    for (std::ptrdiff_t i = w0; i < w1; ++i) cand_mean += cand[i];
    cand_mean /= static_cast<double>(m);
    std::vector<double> xc(m);
    double xc_norm2 = 0.0;
    for (std::ptrdiff_t i = 0; i < m; ++i) {
        xc[i] = cand[w0 + i] - cand_mean;
        xc_norm2 += xc[i] * xc[i];
    }
    if (xc_norm2 == 0.0)
        throw DegenerateSeriesError("candidate window has zero variance");

    // Prefix sums for per-window mean/energy of the reference.
    std::vector<double> s1(n + 1, 0.0), s2(n + 1, 0.0);
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        s1[i + 1] = s1[i] + ref[i];
        s2[i + 1] = s2[i] + ref[i] * ref[i];
    }

    // Normalized correlation scores are compared with a small tolerance:
    // exactly periodic signals tie at whole-period shifts up to rounding
    // noise, and ties resolve to the smallest magnitude lag.
    constexpr double tie_tol = 1e-9;
    const double xc_norm = std::sqrt(xc_norm2);
    int best_k = 0;
    double best_score = -std::numeric_limits<double>::infinity();
    bool any = false;
    for (int k = -max_lag; k <= max_lag; ++k) {
        const std::ptrdiff_t r0 = w0 - k;
        const std::ptrdiff_t r1 = w1 - k;
        const double sum = s1[r1] - s1[r0];
        const double sum2 = s2[r1] - s2[r0];
        const double var_term = sum2 - sum * sum / static_cast<double>(m);
        if (var_term <= 0.0) continue; // flat reference window, uninformative
        double dot = 0.0;
        for (std::ptrdiff_t i = 0; i < m; ++i) dot += xc[i] * ref[r0 + i];
        const double score = dot / (std::sqrt(var_term) * xc_norm); // xc is zero-mean, so dot is centred
        const bool better =
            !any || score > best_score + tie_tol ||
            (score > best_score - tie_tol &&
             (std::abs(k) < std::abs(best_k) || (std::abs(k) == std::abs(best_k) && k < best_k)));
        if (better) {
            best_score = std::max(best_score, score);
            best_k = k;
            any = true;
        }
    }
    if (!any)
        throw DegenerateSeriesError("no informative reference window in the lag search range");
    return best_k;
}

std::pair<double, DistanceSeries> remove_vertical_offset(const DistanceSeries& reference,
                                                         const DistanceSeries& candidate) {
    if (reference.samples.size() != candidate.samples.size())
        throw LengthMismatchError(fmt::format("series lengths differ: {} vs {}",
                                              reference.samples.size(), candidate.samples.size()));
    if (reference.samples.empty())
        throw LengthMismatchError("cannot remove the offset of empty series");
    double offset = 0.0;
    for (std::size_t i = 0; i < reference.samples.size(); ++i)
        offset += reference.samples[i].d - candidate.samples[i].d;
    offset /= static_cast<double>(reference.samples.size());

    DistanceSeries shifted = reference;
    for (auto& s : shifted.samples) s.d -= offset;
    return {offset, std::move(shifted)};
}

namespace {

AlignmentResult finish_alignment(const DistanceSeries& ref_on_grid, const DistanceSeries& cand_on_grid,
                                 int lag) {
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(ref_on_grid.samples.size());
    const std::ptrdiff_t keep = n - std::abs(lag);
    if (keep < 2)
        throw InsufficientOverlapError("lag correction leaves fewer than two overlapping samples");

    DistanceSeries ref_part, cand_part;
    ref_part.label = ref_on_grid.label;
    ref_part.system = ref_on_grid.system;
    cand_part.label = cand_on_grid.label;
    cand_part.system = cand_on_grid.system;
    ref_part.samples.reserve(keep);
    cand_part.samples.reserve(keep);
    for (std::ptrdiff_t i = 0; i < keep; ++i) {
        const std::ptrdiff_t ri = lag >= 0 ? i : i - lag;
        const std::ptrdiff_t ci = lag >= 0 ? i + lag : i;
        // Both aligned series live on the candidate's (cropped) clock.
        const double t = cand_on_grid.samples[ci].t;
        ref_part.samples.push_back({t, ref_on_grid.samples[ri].d});
        cand_part.samples.push_back({t, cand_on_grid.samples[ci].d});
    }

    auto [offset, shifted_ref] = remove_vertical_offset(ref_part, cand_part);

    AlignmentResult result;
    result.vertical_offset_mm = offset;
    result.lag_samples = lag;
    result.lag_seconds = static_cast<double>(lag) * median_dt(cand_on_grid);
    result.aligned_reference = std::move(shifted_ref);
    result.aligned_candidate = std::move(cand_part);
    return result;
}

std::pair<DistanceSeries, DistanceSeries> to_common_grid(const DistanceSeries& reference,
                                                         const DistanceSeries& candidate) {
    if (reference.samples.size() < 2 || candidate.samples.size() < 2)
        throw TooFewSamplesError("alignment needs at least two samples per series");
    const double lo = std::max(reference.t_front(), candidate.t_front());
    const double hi = std::min(reference.t_back(), candidate.t_back());
    if (hi - lo < 5.0)
        throw InsufficientOverlapError(
            fmt::format("overlapping span is {:.3f} s, at least 5 s required", hi - lo));

    constexpr double eps = 1e-9;
    DistanceSeries cand_crop;
    cand_crop.label = candidate.label;
    cand_crop.system = candidate.system;
    std::vector<double> grid;
    for (const auto& s : candidate.samples) {
        if (s.t >= lo - eps && s.t <= hi + eps) {
            cand_crop.samples.push_back(s);
            grid.push_back(s.t);
        }
    }
    return {resample(reference, grid), std::move(cand_crop)};
}

} // namespace

AlignmentResult align(const DistanceSeries& reference, const DistanceSeries& candidate, int max_lag) {
    auto [ref_rs, cand_crop] = to_common_grid(reference, candidate);
    const int lag = estimate_lag(ref_rs, cand_crop, max_lag);
    return finish_alignment(ref_rs, cand_crop, lag);
}

AlignmentResult align_with_lag(const DistanceSeries& reference, const DistanceSeries& candidate,
                               int lag_samples) {
    auto [ref_rs, cand_crop] = to_common_grid(reference, candidate);
    return finish_alignment(ref_rs, cand_crop, lag_samples);
}

} // namespace handval
