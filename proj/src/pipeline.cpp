#include "handval/pipeline.hpp"

#include "handval/digest.hpp"
#include "handval/errors.hpp"
#include "handval/kinematics.hpp"
#include "handval/trajectory_io.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace handval {

namespace {

constexpr const char* kToolVersion = "0.1.0";

JointTrajectory wrist_anchor(const Trial& trial, std::size_t* dropped,
                             std::vector<std::string>* warnings) {
    if (const auto* wrist = trial.find(joints::WRIST)) return *wrist;
    const auto* wob = trial.find(joints::WOB);
    const auto* wib = trial.find(joints::WIB);
    if (!wob || !wib)
        throw MissingJointError(fmt::format("system {} provides neither WRIST nor the WOB/WIB pair",
                                            trial.system.label()));
    JointTrajectory a = *wib, b = *wob;
    const std::size_t gone = intersect_grids(a, b);
    if (gone > 0) {
        if (dropped) *dropped += gone;
        if (warnings)
            warnings->push_back(fmt::format("{}: {} wrist-marker samples without a counterpart dropped",
                                            trial.system.label(), gone));
    }
    return derive_wb(a, b);
}

DistanceSeries pair_distance(const Trial& trial, const JointTrajectory& anchor, const JointId& mover,
                             DistanceLabel label, std::size_t* dropped,
                             std::vector<std::string>* warnings) {
    const auto* m = trial.find(mover);
    if (!m)
        throw MissingJointError(
            fmt::format("system {} lacks joint {}", trial.system.label(), mover.name));
    JointTrajectory a = anchor, b = *m;
    const std::size_t gone = intersect_grids(a, b);
    if (gone > 0) {
        if (dropped) *dropped += gone;
        if (warnings)
            warnings->push_back(fmt::format("{}: {} samples dropped pairing {} with {}",
                                            trial.system.label(), gone, mover.name, anchor.joint.name));
    }
    return distance_series(b, a, label);
}

double mean_of(const std::vector<double>& v) {
    double acc = 0.0;
    for (double x : v) acc += x;
    return acc / static_cast<double>(v.size());
}

double sample_sd(const std::vector<double>& v) {
    const double m = mean_of(v);
    double acc = 0.0;
    for (double x : v) acc += (x - m) * (x - m);
    return std::sqrt(acc / static_cast<double>(v.size() - 1));
}

} // namespace

std::string config_canonical(const Config& c) {
    return fmt::format("max_lag_samples={};prmse_floor_mm={};band_lo_hz={};band_hi_hz={};"
                       "prominence_fraction={};min_separation_s={};smoothing_window={}",
                       c.max_lag_samples, c.prmse_floor_mm, c.band_lo_hz, c.band_hi_hz,
                       c.segmentation.prominence_fraction, c.segmentation.min_separation_s,
                       c.segmentation.smoothing_window);
}

std::string config_digest(const Config& c) { return fnv1a64_hex(config_canonical(c)); }

DistanceLabel primary_label(Task task) {
    switch (task) {
    case Task::OC:
    case Task::SOH: return DistanceLabel::MT_WB;
    case Task::SFT: return DistanceLabel::IFT_TT;
    case Task::MFT: return DistanceLabel::TT_ALL;
    }
    return DistanceLabel::IFT_TT;
}

std::vector<DistanceSeries> characteristic_distances(const Trial& trial, std::size_t* dropped_samples,
                                                     std::vector<std::string>* warnings) {
    std::vector<DistanceSeries> out;
    switch (trial.metadata.task) {
    case Task::OC:
    case Task::SOH: {
        const JointTrajectory wb = wrist_anchor(trial, dropped_samples, warnings);
        out.push_back(pair_distance(trial, wb, joints::MT, DistanceLabel::MT_WB, dropped_samples,
                                    warnings));
        break;
    }
    case Task::SFT: {
        const auto* tt = trial.find(joints::TT);
        if (!tt)
            throw MissingJointError(fmt::format("system {} lacks joint TT", trial.system.label()));
        out.push_back(pair_distance(trial, *tt, joints::IFT, DistanceLabel::IFT_TT, dropped_samples,
                                    warnings));
        break;
    }
    case Task::MFT: {
        const auto* tt = trial.find(joints::TT);
        if (!tt)
            throw MissingJointError(fmt::format("system {} lacks joint TT", trial.system.label()));
        const std::pair<JointId, DistanceLabel> fingers[4] = {
            {joints::IFT, DistanceLabel::IFT_TT},
            {joints::MT, DistanceLabel::MT_TT},
            {joints::RFT, DistanceLabel::RFT_TT},
            {joints::PT, DistanceLabel::PT_TT},
        };
        for (const auto& [joint, label] : fingers)
            out.push_back(pair_distance(trial, *tt, joint, label, dropped_samples, warnings));
        out.push_back(tt_all(out[0], out[1], out[2], out[3]));
        break;
    }
    }
    return out;
}

namespace {

const DistanceSeries* find_label(const std::vector<DistanceSeries>& v, DistanceLabel label) {
    for (const auto& s : v)
        if (s.label == label) return &s;
    return nullptr;
}

std::optional<SpectralFeatures> try_spectral(const DistanceSeries& s, const Config& config,
                                             std::vector<std::string>* warnings,
                                             const std::string& what) {
    try {
        return spectral_features(s, config.band_lo_hz, config.band_hi_hz);
    } catch (const Error& e) {
        if (warnings)
            warnings->push_back(fmt::format("spectral features unavailable for {}: {}", what, e.what()));
        return std::nullopt;
    }
}

} // namespace

TrialReport run_validation(const Trial& reference, const Trial& candidate, const Config& config,
                           const std::string& id) {
    if (reference.metadata.task != candidate.metadata.task)
        throw TaskMismatchError(fmt::format("{}: reference task {} vs candidate task {}", id,
                                            to_string(reference.metadata.task),
                                            to_string(candidate.metadata.task)));

    TrialReport report;
    report.id = id;
    report.metadata = reference.metadata;
    report.primary = primary_label(reference.metadata.task);
    report.dropped_frames_reference = reference.dropped_frames;
    report.dropped_frames_candidate = candidate.dropped_frames;
    for (const auto& w : reference.warnings) report.warnings.push_back("reference: " + w);
    for (const auto& w : candidate.warnings) report.warnings.push_back("candidate: " + w);
    for (auto& w : protocol_warnings(reference.metadata)) report.warnings.push_back(std::move(w));

    auto ref_distances =
        characteristic_distances(reference, &report.dropped_frames_reference, &report.warnings);
    auto cand_distances =
        characteristic_distances(candidate, &report.dropped_frames_candidate, &report.warnings);

    if (reference.metadata.task == Task::SOH) {
        // Static hold: the trial exists to measure hand length.
        auto hand_len = [&](const Trial& trial) {
            std::size_t dropped = 0;
            const JointTrajectory wb = wrist_anchor(trial, &dropped, nullptr);
            const auto* mt = trial.find(joints::MT);
            if (!mt)
                throw MissingJointError(
                    fmt::format("system {} lacks joint MT", trial.system.label()));
            JointTrajectory a = *mt, b = wb;
            intersect_grids(a, b);
            return hand_length_cm(a, b, &report.warnings);
        };
        report.hand_length_reference_cm = hand_len(reference);
        report.hand_length_candidate_cm = hand_len(candidate);
        return report;
    }

    const auto* ref_primary = find_label(ref_distances, report.primary);
    const auto* cand_primary = find_label(cand_distances, report.primary);
    if (!ref_primary || !cand_primary)
        throw MissingJointError(fmt::format("{}: primary distance {} unavailable", id,
                                            to_string(report.primary)));

    const AlignmentResult primary_alignment = align(*ref_primary, *cand_primary, config.max_lag_samples);
    report.lag_samples = primary_alignment.lag_samples;
    report.lag_seconds = primary_alignment.lag_seconds;
    report.vertical_offset_mm = primary_alignment.vertical_offset_mm;
    report.aligned_reference = primary_alignment.aligned_reference;
    report.aligned_candidate = primary_alignment.aligned_candidate;
    report.has_aligned = true;

    for (const auto& cand_series : cand_distances) {
        const auto* ref_series = find_label(ref_distances, cand_series.label);
        if (!ref_series) continue;
        // One temporal lag per trial (hardware-grade sync); the offset is
        // re-estimated per channel.
        const AlignmentResult a = cand_series.label == report.primary
                                      ? primary_alignment
                                      : align_with_lag(*ref_series, cand_series, report.lag_samples);
        LabelResult result;
        result.label = cand_series.label;
        result.vertical_offset_mm = a.vertical_offset_mm;
        result.metrics =
            trajectory_metrics(a.aligned_reference, a.aligned_candidate, config.prmse_floor_mm);
        if (result.metrics.n_excluded_prmse > 0)
            report.warnings.push_back(fmt::format("{}: {} samples below the {} mm floor excluded from PRMSE",
                                                  to_string(cand_series.label),
                                                  result.metrics.n_excluded_prmse, config.prmse_floor_mm));
        result.spectral_reference = try_spectral(a.aligned_reference, config, &report.warnings,
                                                 fmt::format("reference {}", to_string(cand_series.label)));
        result.spectral_candidate = try_spectral(a.aligned_candidate, config, &report.warnings,
                                                 fmt::format("candidate {}", to_string(cand_series.label)));
        report.labels.push_back(std::move(result));
    }

    // Segmentation runs with one configuration on both systems' aligned
    // primary channel; for MFT that channel is TT_ALL by construction.
    auto to_rows = [](const std::vector<Segment>& segs) {
        std::vector<SegmentRow> rows;
        rows.reserve(segs.size());
        for (const auto& s : segs) rows.push_back({s.t_start, s.t_end, s.rom_cm, s.dur_s});
        return rows;
    };
    try {
        const auto ref_segments = segment(primary_alignment.aligned_reference, config.segmentation);
        const auto cand_segments = segment(primary_alignment.aligned_candidate, config.segmentation);
        report.segments_reference = to_rows(ref_segments);
        report.segments_candidate = to_rows(cand_segments);
        if (ref_segments.size() != cand_segments.size())
            report.warnings.push_back(
                fmt::format("segment counts differ ({} reference vs {} candidate); pairs truncated",
                            ref_segments.size(), cand_segments.size()));
        const std::size_t paired = std::min(ref_segments.size(), cand_segments.size());
        for (std::size_t i = 0; i < paired; ++i) {
            report.rom_reference.push_back(ref_segments[i].rom_cm);
            report.rom_candidate.push_back(cand_segments[i].rom_cm);
            report.dur_reference.push_back(ref_segments[i].dur_s);
            report.dur_candidate.push_back(cand_segments[i].dur_s);
        }
    } catch (const NoExtremaError& e) {
        report.warnings.push_back(fmt::format("segmentation failed: {}", e.what()));
    }

    for (const auto& lr : report.labels) {
        if (lr.label != report.primary) continue;
        if (lr.spectral_reference) {
            report.f_dom_reference = lr.spectral_reference->f_dom_hz;
            report.pow_dom_reference = lr.spectral_reference->pow_dom;
        }
        if (lr.spectral_candidate) {
            report.f_dom_candidate = lr.spectral_candidate->f_dom_hz;
            report.pow_dom_candidate = lr.spectral_candidate->pow_dom;
        }
    }
    return report;
}

TrialReport run_validation_files(const std::string& reference_path, const std::string& candidate_path,
                                 const Config& config, const std::string& id) {
    const Trial ref = parse_trajectory_file(reference_path);
    const Trial cand = parse_trajectory_file(candidate_path);
    TrialReport report =
        run_validation(ref, cand, config, id.empty() ? reference_path : id);
    report.reference_path = reference_path;
    report.candidate_path = candidate_path;
    return report;
}

CohortReport aggregate(std::vector<TrialReport> trials, const Config& config) {
    if (trials.empty()) throw EmptyInputError("cohort aggregation needs at least one trial report");

    CohortReport cohort;
    cohort.tool_version = kToolVersion;
    cohort.config_hash = config_digest(config);

    std::vector<double> rom_x, rom_y, dur_x, dur_y, f_x, f_y, p_x, p_y;
    for (const auto& t : trials) {
        rom_x.insert(rom_x.end(), t.rom_reference.begin(), t.rom_reference.end());
        rom_y.insert(rom_y.end(), t.rom_candidate.begin(), t.rom_candidate.end());
        dur_x.insert(dur_x.end(), t.dur_reference.begin(), t.dur_reference.end());
        dur_y.insert(dur_y.end(), t.dur_candidate.begin(), t.dur_candidate.end());
        if (t.f_dom_reference && t.f_dom_candidate) {
            f_x.push_back(*t.f_dom_reference);
            f_y.push_back(*t.f_dom_candidate);
        }
        if (t.pow_dom_reference && t.pow_dom_candidate) {
            p_x.push_back(*t.pow_dom_reference);
            p_y.push_back(*t.pow_dom_candidate);
        }
        for (const auto& w : t.warnings) cohort.warnings.push_back(t.id + ": " + w);
    }

    auto add_agreement = [&](const char* name, const std::vector<double>& x,
                             const std::vector<double>& y) {
        try {
            cohort.agreement.push_back(agreement_report(name, x, y));
        } catch (const Error& e) {
            cohort.warnings.push_back(fmt::format("agreement for {} unavailable: {}", name, e.what()));
        }
    };
    add_agreement("ROM", rom_x, rom_y);
    add_agreement("DUR", dur_x, dur_y);
    add_agreement("F_DOM", f_x, f_y);
    add_agreement("POW_DOM", p_x, p_y);

    // Strata follow the protocol factors; one row per populated cell.
    struct Acc {
        std::vector<double> rmse, prmse, rho;
    };
    std::vector<std::pair<StratumRow, Acc>> cells;
    auto cell_for = [&](const TrialReport& t, DistanceLabel label) -> Acc& {
        StratumRow key;
        key.task = to_string(t.metadata.task);
        key.speed = t.metadata.speed_bpm ? std::to_string(*t.metadata.speed_bpm) : "none";
        key.distance_band = to_string(t.metadata.distance_band);
        key.viewing_angle = to_string(t.metadata.viewing_angle);
        key.label = to_string(label);
        for (auto& [row, acc] : cells) {
            if (row.task == key.task && row.speed == key.speed &&
                row.distance_band == key.distance_band && row.viewing_angle == key.viewing_angle &&
                row.label == key.label)
                return acc;
        }
        cells.emplace_back(key, Acc{});
        return cells.back().second;
    };
    for (const auto& t : trials) {
        for (const auto& lr : t.labels) {
            Acc& acc = cell_for(t, lr.label);
            acc.rmse.push_back(lr.metrics.rmse_cm);
            acc.prmse.push_back(lr.metrics.prmse_pct);
            acc.rho.push_back(lr.metrics.pearson_rho);
        }
    }
    for (auto& [row, acc] : cells) {
        row.n = acc.rmse.size();
        row.rmse_mean = mean_of(acc.rmse);
        row.prmse_mean = mean_of(acc.prmse);
        row.rho_mean = mean_of(acc.rho);
        row.sd_available = row.n >= 2;
        if (row.sd_available) {
            row.rmse_sd = sample_sd(acc.rmse);
            row.prmse_sd = sample_sd(acc.prmse);
            row.rho_sd = sample_sd(acc.rho);
        }
        cohort.strata.push_back(row);
    }
    std::sort(cohort.strata.begin(), cohort.strata.end(), [](const StratumRow& a, const StratumRow& b) {
        return std::tie(a.task, a.speed, a.distance_band, a.viewing_angle, a.label) <
               std::tie(b.task, b.speed, b.distance_band, b.viewing_angle, b.label);
    });

    std::sort(trials.begin(), trials.end(),
              [](const TrialReport& a, const TrialReport& b) { return a.id < b.id; });
    cohort.trials = std::move(trials);
    return cohort;
}

} // namespace handval
