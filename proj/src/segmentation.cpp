#include "handval/segmentation.hpp"

#include "handval/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>

namespace handval {

namespace {

void check_config(const SegmentationConfig& c) {
    if (!(c.prominence_fraction > 0.0 && c.prominence_fraction < 1.0))
        throw Error(fmt::format("prominence_fraction {} outside (0, 1)", c.prominence_fraction));
    if (!(c.min_separation_s > 0.0))
        throw Error(fmt::format("min_separation_s {} must be positive", c.min_separation_s));
    if (c.smoothing_window < 0)
        throw Error("smoothing_window must be non-negative");
}

std::vector<double> smooth(const std::vector<double>& v, int window) {
    if (window <= 1) return v;
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(v.size());
    const std::ptrdiff_t half = window / 2;
    std::vector<double> out(v.size());
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, i - half);
        const std::ptrdiff_t hi = std::min(n - 1, i + half);
        double acc = 0.0;
        for (std::ptrdiff_t j = lo; j <= hi; ++j) acc += v[j];
        out[i] = acc / static_cast<double>(hi - lo + 1);
    }
    return out;
}

// Candidate extrema on plateau runs; leftmost sample of each run qualifies.
struct Candidate {
    std::size_t idx;
    bool is_max;
    double prominence;
};

std::vector<Candidate> raw_extrema(const std::vector<double>& v) {
    std::vector<std::size_t> run_start; // first index of each equal-value run
    run_start.push_back(0);
    for (std::size_t i = 1; i < v.size(); ++i)
        if (v[i] != v[run_start.back()]) run_start.push_back(i);

    std::vector<Candidate> out;
    for (std::size_t r = 1; r + 1 < run_start.size(); ++r) {
        const double prev = v[run_start[r - 1]];
        const double here = v[run_start[r]];
        const double next = v[run_start[r + 1]];
        if (here > prev && here > next) out.push_back({run_start[r], true, 0.0});
        if (here < prev && here < next) out.push_back({run_start[r], false, 0.0});
    }
    return out;
}

// Height of a peak above the higher of its two saddles. A saddle is the
// lowest level between the peak and the nearest strictly higher sample on
// that side (or the series edge). Minima use the mirrored definition.
double prominence_at(const std::vector<double>& v, std::size_t idx, bool is_max) {
    const double ref = v[idx];
    const auto better = [&](double a, double b) { return is_max ? a > b : a < b; };

    double left_saddle = ref;
    for (std::size_t i = idx; i-- > 0;) {
        if (better(v[i], ref)) break;
        if (better(left_saddle, v[i])) left_saddle = v[i];
    }
    double right_saddle = ref;
    for (std::size_t i = idx + 1; i < v.size(); ++i) {
        if (better(v[i], ref)) break;
        if (better(right_saddle, v[i])) right_saddle = v[i];
    }
    const double saddle = is_max ? std::max(left_saddle, right_saddle)
                                 : std::min(left_saddle, right_saddle);
    return std::abs(ref - saddle);
}

std::vector<std::size_t> enforce_separation(const std::vector<Candidate>& sorted_by_time,
                                            const std::vector<double>& t, bool want_max,
                                            double min_sep) {
    // Greedy by prominence; earlier extrema win ties.
    std::vector<const Candidate*> pool;
    for (const auto& c : sorted_by_time)
        if (c.is_max == want_max) pool.push_back(&c);
    std::stable_sort(pool.begin(), pool.end(), [](const Candidate* a, const Candidate* b) {
        return a->prominence > b->prominence;
    });
    std::vector<std::size_t> kept;
    for (const auto* c : pool) {
        bool ok = true;
        for (std::size_t k : kept)
            if (std::abs(t[c->idx] - t[k]) < min_sep) { ok = false; break; }
        if (ok) kept.push_back(c->idx);
    }
    std::sort(kept.begin(), kept.end());
    return kept;
}

} // namespace

ExtremaResult find_extrema(const DistanceSeries& series, const SegmentationConfig& config) {
    check_config(config);
    if (series.samples.size() < 3)
        throw NoExtremaError("series too short to contain interior extrema");

    const std::vector<double> v = smooth(series.values(), config.smoothing_window);
    const std::vector<double> t = series.times();

    const auto [lo_it, hi_it] = std::minmax_element(v.begin(), v.end());
    const double range = *hi_it - *lo_it;
    if (range == 0.0) throw NoExtremaError("series is constant");

    auto candidates = raw_extrema(v);
    for (auto& c : candidates) c.prominence = prominence_at(v, c.idx, c.is_max);

    const double threshold = config.prominence_fraction * range;
    std::erase_if(candidates, [&](const Candidate& c) { return c.prominence < threshold; });

    const auto maxima = enforce_separation(candidates, t, true, config.min_separation_s);
    const auto minima = enforce_separation(candidates, t, false, config.min_separation_s);

    // Merge in time order, then keep the strongest of any same-type streak so
    // that maxima and minima strictly alternate.
    struct Mark {
        std::size_t idx;
        bool is_max;
    };
    std::vector<Mark> merged;
    merged.reserve(maxima.size() + minima.size());
    std::size_t i = 0, j = 0;
    while (i < maxima.size() || j < minima.size()) {
        if (j >= minima.size() || (i < maxima.size() && maxima[i] < minima[j]))
            merged.push_back({maxima[i++], true});
        else
            merged.push_back({minima[j++], false});
    }
    std::vector<Mark> alternating;
    for (const auto& m : merged) {
        if (!alternating.empty() && alternating.back().is_max == m.is_max) {
            auto& prev = alternating.back();
            const bool replace = m.is_max ? v[m.idx] > v[prev.idx] : v[m.idx] < v[prev.idx];
            if (replace) prev = m;
        } else {
            alternating.push_back(m);
        }
    }

    ExtremaResult result;
    for (const auto& m : alternating)
        (m.is_max ? result.maxima : result.minima).push_back(m.idx);
    if (result.maxima.size() < 2)
        throw NoExtremaError(fmt::format("{} maxima survive filtering, at least 2 required",
                                         result.maxima.size()));
    return result;
}

std::vector<Segment> segment(const DistanceSeries& series, const SegmentationConfig& config) {
    const ExtremaResult ext = find_extrema(series, config);
    const std::vector<double> v = smooth(series.values(), config.smoothing_window);
    const std::vector<double> t = series.times();

    std::vector<Segment> out;
    std::size_t min_cursor = 0;
    for (std::size_t i = 0; i + 1 < ext.maxima.size(); ++i) {
        const std::size_t a = ext.maxima[i];
        const std::size_t b = ext.maxima[i + 1];
        while (min_cursor < ext.minima.size() && ext.minima[min_cursor] < a) ++min_cursor;
        if (min_cursor >= ext.minima.size() || ext.minima[min_cursor] > b) continue;
        const std::size_t m = ext.minima[min_cursor];

        Segment s;
        s.t_start = t[a];
        s.t_end = t[b];
        s.idx_max_start = a;
        s.idx_min = m;
        s.idx_max_end = b;
        s.rom_cm = (v[a] - v[m]) / 10.0;
        s.dur_s = t[b] - t[a];
        out.push_back(s);
    }
    return out;
}

std::pair<std::vector<double>, std::vector<double>>
segment_parameters(const std::vector<Segment>& segments) {
    if (segments.empty()) throw EmptySegmentListError("no segments to extract parameters from");
    std::vector<double> roms, durs;
    roms.reserve(segments.size());
    durs.reserve(segments.size());
    for (const auto& s : segments) {
        roms.push_back(s.rom_cm);
        durs.push_back(s.dur_s);
    }
    return {std::move(roms), std::move(durs)};
}

} // namespace handval
