#include "handval/report.hpp"

#include "handval/errors.hpp"

#include <fmt/format.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>

namespace handval {

namespace {

using nlohmann::json;

json opt_json(const std::optional<double>& v) { return v ? json(sig6(*v)) : json(nullptr); }

json spectral_json(const std::optional<SpectralFeatures>& s) {
    if (!s) return nullptr;
    json j;
    j["f_dom_hz"] = sig6(s->f_dom_hz);
    j["pow_dom"] = sig6(s->pow_dom);
    j["band_lo_hz"] = sig6(s->band_lo_hz);
    j["band_hi_hz"] = sig6(s->band_hi_hz);
    j["resolution_hz"] = sig6(s->resolution_hz);
    return j;
}

json metadata_json(const TrialMetadata& m) {
    json j;
    j["task"] = to_string(m.task);
    j["speed_bpm"] = m.speed_bpm ? json(*m.speed_bpm) : json(nullptr);
    j["distance_band"] = to_string(m.distance_band);
    j["viewing_angle"] = to_string(m.viewing_angle);
    j["subject_id"] = m.subject_id;
    j["duration_s"] = sig6(m.duration_s);
    return j;
}

json coefficient_json(const AgreementCoefficient& c) {
    json j;
    j["value"] = sig6(c.value);
    j["ci_low"] = sig6(c.ci_low);
    j["ci_high"] = sig6(c.ci_high);
    j["high_agreement"] = c.high_agreement;
    if (c.p_value) j["p_value"] = sig6(*c.p_value);
    return j;
}

json agreement_json(const AgreementReport& a) {
    json j;
    json ba;
    ba["bias"] = sig6(a.ba.bias);
    ba["sd_diff"] = sig6(a.ba.sd_diff);
    ba["loa_low"] = sig6(a.ba.loa_low);
    ba["loa_high"] = sig6(a.ba.loa_high);
    ba["pct_within"] = sig6(a.ba.pct_within);
    ba["pairs"] = a.ba.pairs;
    j["bland_altman"] = ba;
    j["icc"] = coefficient_json(a.icc_coeff);
    j["icc"]["form"] = "two-way random effects, absolute agreement, single rater";
    j["ccc"] = coefficient_json(a.ccc_coeff);
    j["pairs_dropped"] = a.pairs_dropped;
    return j;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError(fmt::format("cannot open {} for writing", path.string()));
    out << text;
    if (!out) throw IoError(fmt::format("failed writing {}", path.string()));
}

std::string g6(double v) { return fmt::format("{:.6}", sig6(v)); }

} // namespace

double sig6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return std::strtod(buf, nullptr);
}

json trial_report_json(const TrialReport& r, bool include_aligned) {
    json j;
    j["id"] = r.id;
    j["reference_file"] = r.reference_path;
    j["candidate_file"] = r.candidate_path;
    j["metadata"] = metadata_json(r.metadata);
    j["dropped_frames"] = {{"reference", r.dropped_frames_reference},
                           {"candidate", r.dropped_frames_candidate}};

    if (r.metadata.task == Task::SOH) {
        j["hand_length_cm"] = {{"reference", opt_json(r.hand_length_reference_cm)},
                               {"candidate", opt_json(r.hand_length_candidate_cm)}};
    } else {
        j["alignment"] = {{"lag_samples", r.lag_samples},
                          {"lag_seconds", sig6(r.lag_seconds)},
                          {"vertical_offset_mm", sig6(r.vertical_offset_mm)},
                          {"primary_distance", to_string(r.primary)}};
        json distances;
        for (const auto& lr : r.labels) {
            json d;
            d["rmse_cm"] = sig6(lr.metrics.rmse_cm);
            d["prmse_pct"] = sig6(lr.metrics.prmse_pct);
            d["prmse_excluded"] = lr.metrics.n_excluded_prmse;
            d["pearson_rho"] = sig6(lr.metrics.pearson_rho);
            d["n_samples"] = lr.metrics.n_samples;
            d["vertical_offset_mm"] = sig6(lr.vertical_offset_mm);
            d["spectral"] = {{"reference", spectral_json(lr.spectral_reference)},
                             {"candidate", spectral_json(lr.spectral_candidate)}};
            distances[to_string(lr.label)] = d;
        }
        j["distances"] = distances;

        auto segments_json = [](const std::vector<SegmentRow>& rows) {
            json arr = json::array();
            for (const auto& s : rows)
                arr.push_back({{"t_start_s", sig6(s.t_start)},
                               {"t_end_s", sig6(s.t_end)},
                               {"rom_cm", sig6(s.rom_cm)},
                               {"dur_s", sig6(s.dur_s)}});
            return arr;
        };
        j["segments"] = {{"reference", segments_json(r.segments_reference)},
                         {"candidate", segments_json(r.segments_candidate)},
                         {"paired", r.rom_reference.size()}};
        j["spectral_summary"] = {{"f_dom_reference_hz", opt_json(r.f_dom_reference)},
                                 {"f_dom_candidate_hz", opt_json(r.f_dom_candidate)},
                                 {"pow_dom_reference", opt_json(r.pow_dom_reference)},
                                 {"pow_dom_candidate", opt_json(r.pow_dom_candidate)}};
    }
    if (include_aligned && r.has_aligned) {
        json aligned;
        json t = json::array(), ref = json::array(), cand = json::array();
        for (std::size_t i = 0; i < r.aligned_reference.samples.size(); ++i) {
            t.push_back(sig6(r.aligned_reference.samples[i].t));
            ref.push_back(sig6(r.aligned_reference.samples[i].d));
            cand.push_back(sig6(r.aligned_candidate.samples[i].d));
        }
        aligned["t_s"] = t;
        aligned["reference_mm"] = ref;
        aligned["candidate_mm"] = cand;
        j["aligned"] = aligned;
    }
    j["warnings"] = r.warnings;
    return j;
}

json cohort_report_json(const CohortReport& r) {
    json j;
    j["tool_version"] = r.tool_version;
    j["config_hash"] = r.config_hash;
    json inputs = json::array();
    for (const auto& [path, digest] : r.input_digests)
        inputs.push_back({{"path", path}, {"digest", digest}});
    j["inputs"] = inputs;

    json agreement;
    for (const auto& a : r.agreement) agreement[a.parameter] = agreement_json(a);
    j["agreement"] = agreement;

    json strata = json::array();
    for (const auto& s : r.strata) {
        json row;
        row["task"] = s.task;
        row["speed_bpm"] = s.speed;
        row["distance_band"] = s.distance_band;
        row["viewing_angle"] = s.viewing_angle;
        row["distance"] = s.label;
        row["n"] = s.n;
        row["rmse_cm"] = {{"mean", sig6(s.rmse_mean)},
                          {"sd", s.sd_available ? json(sig6(s.rmse_sd)) : json(nullptr)}};
        row["prmse_pct"] = {{"mean", sig6(s.prmse_mean)},
                            {"sd", s.sd_available ? json(sig6(s.prmse_sd)) : json(nullptr)}};
        row["pearson_rho"] = {{"mean", sig6(s.rho_mean)},
                              {"sd", s.sd_available ? json(sig6(s.rho_sd)) : json(nullptr)}};
        strata.push_back(row);
    }
    j["strata"] = strata;

    json trials = json::array();
    for (const auto& t : r.trials) trials.push_back(trial_report_json(t));
    j["trials"] = trials;
    j["warnings"] = r.warnings;
    return j;
}

void emit(const CohortReport& report, EmitFormat format, const std::string& out_dir) {
    namespace fs = std::filesystem;
    const fs::path dir(out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError(fmt::format("cannot create {}: {}", out_dir, ec.message()));

    switch (format) {
    case EmitFormat::Json: {
        write_text(dir / "report.json", cohort_report_json(report).dump(2) + "\n");
        return;
    }
    case EmitFormat::CsvTables: {
        std::string agreement = "parameter,ICC_low,ICC,ICC_high,CCC_low,CCC,CCC_high\n";
        for (const auto& a : report.agreement)
            agreement += fmt::format("{},{},{},{},{},{},{}\n", a.parameter, g6(a.icc_coeff.ci_low),
                                     g6(a.icc_coeff.value), g6(a.icc_coeff.ci_high),
                                     g6(a.ccc_coeff.ci_low), g6(a.ccc_coeff.value),
                                     g6(a.ccc_coeff.ci_high));
        write_text(dir / "agreement.csv", agreement);

        std::string segments = "trial,system,segment,t_start_s,t_end_s,rom_cm,dur_s\n";
        for (const auto& t : report.trials) {
            for (std::size_t i = 0; i < t.segments_reference.size(); ++i) {
                const auto& s = t.segments_reference[i];
                segments += fmt::format("{},reference,{},{},{},{},{}\n", t.id, i, g6(s.t_start),
                                        g6(s.t_end), g6(s.rom_cm), g6(s.dur_s));
            }
            for (std::size_t i = 0; i < t.segments_candidate.size(); ++i) {
                const auto& s = t.segments_candidate[i];
                segments += fmt::format("{},candidate,{},{},{},{},{}\n", t.id, i, g6(s.t_start),
                                        g6(s.t_end), g6(s.rom_cm), g6(s.dur_s));
            }
        }
        write_text(dir / "segments.csv", segments);

        std::string strata =
            "task,speed_bpm,distance_band,viewing_angle,distance,n,"
            "rmse_mean_cm,rmse_sd_cm,prmse_mean_pct,prmse_sd_pct,rho_mean,rho_sd\n";
        for (const auto& s : report.strata)
            strata += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{}\n", s.task, s.speed,
                                  s.distance_band, s.viewing_angle, s.label, s.n, g6(s.rmse_mean),
                                  s.sd_available ? g6(s.rmse_sd) : "", g6(s.prmse_mean),
                                  s.sd_available ? g6(s.prmse_sd) : "", g6(s.rho_mean),
                                  s.sd_available ? g6(s.rho_sd) : "");
        write_text(dir / "strata.csv", strata);

        std::string trials =
            "trial,task,speed_bpm,distance_band,viewing_angle,distance,"
            "lag_samples,vertical_offset_mm,rmse_cm,prmse_pct,pearson_rho\n";
        for (const auto& t : report.trials)
            for (const auto& lr : t.labels)
                trials += fmt::format(
                    "{},{},{},{},{},{},{},{},{},{},{}\n", t.id, to_string(t.metadata.task),
                    t.metadata.speed_bpm ? std::to_string(*t.metadata.speed_bpm) : "none",
                    to_string(t.metadata.distance_band), to_string(t.metadata.viewing_angle),
                    to_string(lr.label), t.lag_samples, g6(lr.vertical_offset_mm),
                    g6(lr.metrics.rmse_cm), g6(lr.metrics.prmse_pct), g6(lr.metrics.pearson_rho));
        write_text(dir / "trials.csv", trials);
        return;
    }
    case EmitFormat::PlotData: {
        for (const auto& t : report.trials) {
            if (!t.has_aligned) continue;
            std::string plot = "t_s,reference_mm,candidate_mm\n";
            for (std::size_t i = 0; i < t.aligned_reference.samples.size(); ++i)
                plot += fmt::format("{},{},{}\n", g6(t.aligned_reference.samples[i].t),
                                    g6(t.aligned_reference.samples[i].d),
                                    g6(t.aligned_candidate.samples[i].d));
            write_text(dir / fmt::format("aligned_{}.csv", t.id), plot);
        }
        for (const auto& a : report.agreement) {
            std::string points = "mean,diff\n";
            for (const auto& [mean, diff] : a.ba.points)
                points += fmt::format("{},{}\n", g6(mean), g6(diff));
            write_text(dir / fmt::format("bland_altman_{}.csv", a.parameter), points);
        }
        return;
    }
    }
}

} // namespace handval
