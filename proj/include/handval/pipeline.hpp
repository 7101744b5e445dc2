#pragma once

#include "handval/agreement.hpp"
#include "handval/alignment.hpp"
#include "handval/metrics.hpp"
#include "handval/segmentation.hpp"
#include "handval/trial.hpp"

#include <optional>
#include <string>
#include <vector>

namespace handval {

struct Config {
    int max_lag_samples = 60;  // 2 s at the 30 fps candidate rate
    double prmse_floor_mm = 5.0;
    double band_lo_hz = 0.5; // voluntary-movement band brackets 75-140 bpm
    double band_hi_hz = 4.0;
    SegmentationConfig segmentation;
};

/// Canonical textual form of the configuration; hashed into reports so runs
/// are auditable.
std::string config_canonical(const Config& config);
std::string config_digest(const Config& config);

/// The distance every task is assessed on; segmentation and spectral
/// features use this channel.
DistanceLabel primary_label(Task task);

/// The task's characteristic inter-joint distances for one system, wrist
/// midpoint derived when needed. Frames missing from either joint of a pair
/// are dropped from that pair and counted.
std::vector<DistanceSeries> characteristic_distances(const Trial& trial, std::size_t* dropped_samples,
                                                     std::vector<std::string>* warnings);

struct LabelResult {
    DistanceLabel label = DistanceLabel::IFT_TT;
    TrajectoryMetrics metrics;
    double vertical_offset_mm = 0.0;
    std::optional<SpectralFeatures> spectral_reference;
    std::optional<SpectralFeatures> spectral_candidate;
};

struct SegmentRow {
    double t_start = 0.0;
    double t_end = 0.0;
    double rom_cm = 0.0;
    double dur_s = 0.0;
};

struct TrialReport {
    std::string id;
    std::string reference_path;
    std::string candidate_path;
    TrialMetadata metadata;

    int lag_samples = 0;
    double lag_seconds = 0.0;
    double vertical_offset_mm = 0.0; // primary channel
    std::size_t dropped_frames_reference = 0;
    std::size_t dropped_frames_candidate = 0;

    DistanceLabel primary = DistanceLabel::IFT_TT;
    std::vector<LabelResult> labels;
    std::vector<SegmentRow> segments_reference;
    std::vector<SegmentRow> segments_candidate;

    // Ordinally paired per-segment parameters (after truncation to the
    // shorter list), the cohort-level unit of agreement analysis.
    std::vector<double> rom_reference, rom_candidate;
    std::vector<double> dur_reference, dur_candidate;
    std::optional<double> f_dom_reference, f_dom_candidate;
    std::optional<double> pow_dom_reference, pow_dom_candidate;

    std::optional<double> hand_length_reference_cm, hand_length_candidate_cm; // SOH

    // Aligned primary channel, plot-ready.
    DistanceSeries aligned_reference, aligned_candidate;
    bool has_aligned = false;

    std::vector<std::string> warnings;
};

/// Single-trial pipeline: characteristic distances, alignment, metrics,
/// segmentation, spectral features. SOH trials yield hand lengths only.
TrialReport run_validation(const Trial& reference, const Trial& candidate, const Config& config,
                           const std::string& id = "trial");

TrialReport run_validation_files(const std::string& reference_path, const std::string& candidate_path,
                                 const Config& config, const std::string& id = "");

struct StratumRow {
    std::string task, speed, distance_band, viewing_angle, label;
    std::size_t n = 0;
    double rmse_mean = 0, rmse_sd = 0;
    double prmse_mean = 0, prmse_sd = 0;
    double rho_mean = 0, rho_sd = 0;
    bool sd_available = false;
};

struct CohortReport {
    std::vector<TrialReport> trials;
    std::vector<AgreementReport> agreement; // ROM, DUR, F_DOM, POW_DOM
    std::vector<StratumRow> strata;
    std::vector<std::string> warnings;
    std::string tool_version;
    std::string config_hash;
    std::vector<std::pair<std::string, std::string>> input_digests;
};

/// Pools per-segment and per-trial parameters across trials into agreement
/// statistics and per-protocol-factor strata summaries.
CohortReport aggregate(std::vector<TrialReport> trials, const Config& config);

} // namespace handval
