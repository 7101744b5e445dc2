#pragma once

#include "handval/trial.hpp"
#include "handval/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace handval::synth {

enum class ExcursionProfile { Wide, Free, Small };

/// Amplitude scaling for the three requested excursion styles.
double excursion_scale(ExcursionProfile p);

std::string to_string(ExcursionProfile p);
ExcursionProfile excursion_profile_from_string(const std::string& s);

/// Parameters of one synthetic trial. The motion is metronome-locked with a
/// seeded, metronome-anchored human-variability model: per-cycle timing and
/// amplitude jitter plus sensor position jitter on the reference markers.
/// An exactly periodic waveform would leave the injected temporal lag
/// unidentifiable (any whole period is an equivalent shift), so the jitter
/// is load-bearing for lag-recovery experiments, not decoration.
struct MotionSpec {
    Task task = Task::SFT;
    double bpm = 115.0;
    double duration_s = 15.0;
    double fps = 30.0;
    double amplitude_mm = 70.0; // peak-to-trough excursion before profile scaling
    double baseline_mm = 50.0;  // mean level of the characteristic distance
    ExcursionProfile excursion = ExcursionProfile::Free;
    std::uint64_t seed = 0;

    double timing_jitter_s = 0.008;  // SD of per-beat tap-time error
    double amplitude_jitter = 0.03;  // relative SD of per-cycle excursion
    double position_jitter_mm = 0.2; // per-axis sensor jitter (reference only)

    DistanceBand distance_band = DistanceBand::Near60to80cm;
    ViewingAngle viewing_angle = ViewingAngle::Frontal;
    std::string subject_id = "synth-01";
};

/// Sensible per-task defaults (baseline/amplitude levels, bpm).
MotionSpec default_spec(Task task);

/// Controlled candidate-system degradations, applied in a fixed order:
/// squeeze (about the trial-mean distance), offset, noise, lag shift,
/// dropout. The identity spec reproduces the input bit for bit.
struct DegradationSpec {
    double noise_sigma_mm = 0.0; // additive Gaussian per distance sample
    double offset_mm = 0.0;      // constant additive distance offset
    int lag_samples = 0;         // shift at the candidate rate; positive = candidate lags
    double squeeze_factor = 1.0; // d' = mean + s * (d - mean), s in (0, 1]
    double dropout_rate = 0.0;   // fraction of frames removed, in [0, 0.2]
    std::uint64_t seed = 0;

    bool is_identity() const;
};

/// Reference-style trial (wrist bone markers + task fingertips) sampled at
/// spec.fps with sensor jitter.
Trial generate_trial(const MotionSpec& spec);

/// Candidate-style trial (single wrist joint + task fingertips) sampled
/// clean at the given rate; all candidate noise comes from degrade().
Trial generate_candidate_trial(const MotionSpec& spec, double fps);

/// Applies the degradation chain to a copy of the trial. Distance-level
/// transforms move each task fingertip along its line to the task anchor so
/// the characteristic distances change exactly as specified.
Trial degrade(const Trial& gold, const DegradationSpec& spec);

struct BenchmarkTrial {
    std::string id;
    std::string preset; // clean | noisy | lagged | squeezed | combined
    MotionSpec motion;
    DegradationSpec degradation;
    Trial reference; // gold, 120 fps
    Trial candidate; // degraded, 30 fps
    bool candidate_as_landmarks = false; // emit the candidate in landmark schema
};

/// Deterministic benchmark: tasks x tempi x degradation presets, reference
/// at 120 fps against a degraded 30 fps candidate. Same seed, same suite.
std::vector<BenchmarkTrial> make_benchmark_suite(std::uint64_t seed);

/// Seeded uniform random walk, used where lag/metric experiments need a
/// broadband aperiodic signal.
DistanceSeries random_walk_series(std::size_t n, double fps, double step_mm, std::uint64_t seed);

} // namespace handval::synth
