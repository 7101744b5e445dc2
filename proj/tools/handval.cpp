// Command-line driver: validates hand-tracking trials against a motion
// capture reference, batches cohorts, segments single files, and generates
// the synthetic benchmark suite.

#include "handval/digest.hpp"
#include "handval/errors.hpp"
#include "handval/pipeline.hpp"
#include "handval/report.hpp"
#include "handval/synth.hpp"
#include "handval/trajectory_io.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitParse = 2;

void add_config_options(CLI::App* cmd, handval::Config& config) {
    cmd->add_option("--max_lag", config.max_lag_samples, "lag search half-window, samples");
    cmd->add_option("--prmse_floor_mm", config.prmse_floor_mm,
                    "reference samples below this magnitude are excluded from PRMSE");
    cmd->add_option("--band_lo_hz", config.band_lo_hz, "voluntary-movement band lower edge");
    cmd->add_option("--band_hi_hz", config.band_hi_hz, "voluntary-movement band upper edge");
    cmd->add_option("--prominence_fraction", config.segmentation.prominence_fraction,
                    "extremum prominence threshold, fraction of the global range");
    cmd->add_option("--min_separation_s", config.segmentation.min_separation_s,
                    "minimum spacing between same-type extrema");
    cmd->add_option("--smoothing_window", config.segmentation.smoothing_window,
                    "moving-average window in samples, 0 disables");
    const char* env_config = std::getenv("HANDVAL_CONFIG");
    cmd->set_config("--config", env_config ? env_config : "", "TOML-style configuration file");
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw handval::IoError(fmt::format("cannot open {} for writing", path.string()));
    out << text;
}

void emit_all(const handval::CohortReport& report, const std::string& out_dir) {
    handval::emit(report, handval::EmitFormat::Json, out_dir);
    handval::emit(report, handval::EmitFormat::CsvTables, out_dir);
    handval::emit(report, handval::EmitFormat::PlotData, out_dir);
}

handval::synth::MotionSpec motion_spec_from_json(const json& j) {
    using namespace handval;
    const Task task = task_from_string(j.value("task", std::string("SFT")));
    synth::MotionSpec spec = synth::default_spec(task);
    if (j.contains("bpm")) spec.bpm = j.at("bpm").get<double>();
    if (j.contains("duration_s")) spec.duration_s = j.at("duration_s").get<double>();
    if (j.contains("fps")) spec.fps = j.at("fps").get<double>();
    if (j.contains("amplitude_mm")) spec.amplitude_mm = j.at("amplitude_mm").get<double>();
    if (j.contains("baseline_mm")) spec.baseline_mm = j.at("baseline_mm").get<double>();
    if (j.contains("excursion"))
        spec.excursion = synth::excursion_profile_from_string(j.at("excursion").get<std::string>());
    if (j.contains("seed")) spec.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("timing_jitter_s")) spec.timing_jitter_s = j.at("timing_jitter_s").get<double>();
    if (j.contains("amplitude_jitter")) spec.amplitude_jitter = j.at("amplitude_jitter").get<double>();
    if (j.contains("position_jitter_mm"))
        spec.position_jitter_mm = j.at("position_jitter_mm").get<double>();
    if (j.contains("distance_band"))
        spec.distance_band = distance_band_from_string(j.at("distance_band").get<std::string>());
    if (j.contains("viewing_angle"))
        spec.viewing_angle = viewing_angle_from_string(j.at("viewing_angle").get<std::string>());
    if (j.contains("subject_id")) spec.subject_id = j.at("subject_id").get<std::string>();
    return spec;
}

handval::synth::DegradationSpec degradation_spec_from_json(const json& j) {
    handval::synth::DegradationSpec spec;
    if (j.contains("noise_sigma_mm")) spec.noise_sigma_mm = j.at("noise_sigma_mm").get<double>();
    if (j.contains("offset_mm")) spec.offset_mm = j.at("offset_mm").get<double>();
    if (j.contains("lag_samples")) spec.lag_samples = j.at("lag_samples").get<int>();
    if (j.contains("squeeze_factor")) spec.squeeze_factor = j.at("squeeze_factor").get<double>();
    if (j.contains("dropout_rate")) spec.dropout_rate = j.at("dropout_rate").get<double>();
    if (j.contains("seed")) spec.seed = j.at("seed").get<std::uint64_t>();
    return spec;
}

json motion_spec_json(const handval::synth::MotionSpec& s) {
    using handval::to_string;
    json j;
    j["task"] = to_string(s.task);
    j["bpm"] = s.bpm;
    j["duration_s"] = s.duration_s;
    j["fps"] = s.fps;
    j["amplitude_mm"] = s.amplitude_mm;
    j["baseline_mm"] = s.baseline_mm;
    j["excursion"] = handval::synth::to_string(s.excursion);
    j["seed"] = s.seed;
    j["timing_jitter_s"] = s.timing_jitter_s;
    j["amplitude_jitter"] = s.amplitude_jitter;
    j["position_jitter_mm"] = s.position_jitter_mm;
    j["distance_band"] = to_string(s.distance_band);
    j["viewing_angle"] = to_string(s.viewing_angle);
    j["subject_id"] = s.subject_id;
    return j;
}

json degradation_spec_json(const handval::synth::DegradationSpec& s) {
    json j;
    j["noise_sigma_mm"] = s.noise_sigma_mm;
    j["offset_mm"] = s.offset_mm;
    j["lag_samples"] = s.lag_samples;
    j["squeeze_factor"] = s.squeeze_factor;
    j["dropout_rate"] = s.dropout_rate;
    j["seed"] = s.seed;
    return j;
}

void write_trial_pair(const fs::path& dir, const std::string& id, const handval::Trial& reference,
                      const handval::Trial& candidate, bool candidate_as_landmarks,
                      const handval::synth::MotionSpec& motion,
                      const handval::synth::DegradationSpec& degradation, json& manifest_trials) {
    using namespace handval;
    const std::string ref_name = id + "_reference.csv";
    const std::string cand_name = id + "_candidate.csv";
    write_trajectory_file((dir / ref_name).string(), reference, FileSchema::WorldMm);
    write_trajectory_file((dir / cand_name).string(), candidate,
                          candidate_as_landmarks ? FileSchema::LandmarkPx : FileSchema::WorldMm);
    json truth;
    truth["id"] = id;
    truth["motion"] = motion_spec_json(motion);
    truth["degradation"] = degradation_spec_json(degradation);
    truth["reference_file"] = ref_name;
    truth["candidate_file"] = cand_name;
    write_file(dir / (id + "_truth.json"), truth.dump(2) + "\n");
    manifest_trials.push_back({{"id", id}, {"reference", ref_name}, {"candidate", cand_name}});
}

int run_validate(const std::string& ref_path, const std::string& cand_path,
                 const handval::Config& config, const std::string& out_dir, bool debug) {
    using namespace handval;
    TrialReport trial = run_validation_files(ref_path, cand_path, config);
    if (out_dir.empty()) {
        std::cout << trial_report_json(trial, debug).dump(2) << "\n";
        return kExitOk;
    }
    CohortReport cohort = aggregate({trial}, config);
    cohort.input_digests = {{ref_path, digest_file(ref_path)}, {cand_path, digest_file(cand_path)}};
    emit_all(cohort, out_dir);
    if (debug) {
        fs::create_directories(out_dir);
        write_file(fs::path(out_dir) / "trial_debug.json", trial_report_json(trial, true).dump(2) + "\n");
    }
    std::cout << fmt::format("wrote report for 1 trial to {}\n", out_dir);
    return kExitOk;
}

int run_cohort(const std::string& manifest_path, const handval::Config& config,
               const std::string& out_dir) {
    using namespace handval;
    std::ifstream in(manifest_path);
    if (!in) throw IoError(fmt::format("cannot open {} for reading", manifest_path));
    json manifest;
    try {
        manifest = json::parse(in);
    } catch (const json::exception& e) {
        throw ParseError(manifest_path, 0, fmt::format("manifest is not valid JSON: {}", e.what()));
    }
    if (!manifest.contains("trials") || !manifest.at("trials").is_array())
        throw ParseError(manifest_path, 0, "manifest lacks a trials array");

    const fs::path base = fs::path(manifest_path).parent_path();
    std::vector<TrialReport> reports;
    std::vector<std::pair<std::string, std::string>> digests;
    for (const auto& entry : manifest.at("trials")) {
        const std::string id = entry.at("id").get<std::string>();
        const auto resolve = [&](const std::string& p) {
            return fs::path(p).is_absolute() ? p : (base / p).string();
        };
        const std::string ref = resolve(entry.at("reference").get<std::string>());
        const std::string cand = resolve(entry.at("candidate").get<std::string>());
        reports.push_back(run_validation_files(ref, cand, config, id));
        digests.emplace_back(ref, digest_file(ref));
        digests.emplace_back(cand, digest_file(cand));
    }
    CohortReport cohort = aggregate(std::move(reports), config);
    cohort.input_digests = std::move(digests);
    emit_all(cohort, out_dir);
    std::cout << fmt::format("wrote report for {} trials to {}\n", cohort.trials.size(), out_dir);
    return kExitOk;
}

int run_synth(const std::string& what, const std::string& out_dir, std::uint64_t seed) {
    using namespace handval;
    const fs::path dir(out_dir);
    fs::create_directories(dir);
    json manifest_trials = json::array();

    if (what == "benchmark") {
        const auto suite = synth::make_benchmark_suite(seed);
        for (const auto& bt : suite)
            write_trial_pair(dir, bt.id, bt.reference, bt.candidate, bt.candidate_as_landmarks,
                             bt.motion, bt.degradation, manifest_trials);
        json manifest;
        manifest["seed"] = seed;
        manifest["trials"] = manifest_trials;
        write_file(dir / "manifest.json", manifest.dump(2) + "\n");
        std::cout << fmt::format("wrote {} benchmark trials to {}\n", suite.size(), out_dir);
        return kExitOk;
    }

    std::ifstream in(what);
    if (!in) throw IoError(fmt::format("cannot open {} for reading", what));
    json spec_json;
    try {
        spec_json = json::parse(in);
    } catch (const json::exception& e) {
        throw ParseError(what, 0, fmt::format("spec is not valid JSON: {}", e.what()));
    }
    synth::MotionSpec motion = motion_spec_from_json(
        spec_json.contains("motion") ? spec_json.at("motion") : spec_json);
    synth::DegradationSpec degradation;
    if (spec_json.contains("degradation"))
        degradation = degradation_spec_from_json(spec_json.at("degradation"));
    const Trial reference = synth::generate_trial(motion);
    const Trial candidate = synth::degrade(synth::generate_candidate_trial(motion, 30.0), degradation);
    const std::string id = spec_json.value("id", std::string("trial"));
    write_trial_pair(dir, id, reference, candidate, spec_json.value("candidate_as_landmarks", false),
                     motion, degradation, manifest_trials);
    json manifest;
    manifest["trials"] = manifest_trials;
    write_file(dir / "manifest.json", manifest.dump(2) + "\n");
    std::cout << fmt::format("wrote trial {} to {}\n", id, out_dir);
    return kExitOk;
}

int run_segment(const std::string& path, const handval::Config& config, const std::string& out_path) {
    using namespace handval;
    const Trial trial = parse_trajectory_file(path);
    std::size_t dropped = 0;
    std::vector<std::string> warnings;
    const auto distances = characteristic_distances(trial, &dropped, &warnings);
    const DistanceLabel primary = primary_label(trial.metadata.task);
    const DistanceSeries* series = nullptr;
    for (const auto& s : distances)
        if (s.label == primary) series = &s;
    if (!series) throw MissingJointError("primary distance unavailable");

    const auto segments = segment(*series, config.segmentation);
    std::string csv = "segment,t_start_s,t_end_s,rom_cm,dur_s\n";
    for (std::size_t i = 0; i < segments.size(); ++i)
        csv += fmt::format("{},{:.6},{:.6},{:.6},{:.6}\n", i, segments[i].t_start, segments[i].t_end,
                           segments[i].rom_cm, segments[i].dur_s);
    if (out_path.empty())
        std::cout << csv;
    else
        write_file(out_path, csv);
    for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"hand-tracking validation toolkit"};
    app.require_subcommand(1);

    handval::Config config;

    auto* validate = app.add_subcommand("validate", "compare one candidate trial against its reference");
    std::string ref_path, cand_path, out_dir;
    bool debug = false;
    validate->add_option("reference", ref_path, "reference trajectory file")->required();
    validate->add_option("candidate", cand_path, "candidate trajectory file")->required();
    validate->add_option("--out", out_dir, "output directory (stdout JSON when omitted)");
    validate->add_flag("--debug", debug, "include aligned intermediate series");
    add_config_options(validate, config);

    auto* cohort = app.add_subcommand("cohort", "validate every trial in a manifest and aggregate");
    std::string manifest_path, cohort_out = "handval_report";
    cohort->add_option("manifest", manifest_path, "manifest JSON listing trial file pairs")->required();
    cohort->add_option("--out", cohort_out, "output directory");
    add_config_options(cohort, config);

    auto* synth_cmd = app.add_subcommand("synth", "generate synthetic trials with known ground truth");
    std::string synth_what, synth_out;
    std::uint64_t synth_seed = 0;
    synth_cmd->add_option("spec", synth_what, "'benchmark' or a motion/degradation spec JSON file")
        ->required();
    synth_cmd->add_option("--out", synth_out, "output directory")->required();
    synth_cmd->add_option("--seed", synth_seed, "suite seed");

    auto* segment_cmd = app.add_subcommand("segment", "segment one file's primary distance");
    std::string segment_path, segment_out;
    segment_cmd->add_option("file", segment_path, "trajectory file")->required();
    segment_cmd->add_option("--out", segment_out, "output CSV (stdout when omitted)");
    add_config_options(segment_cmd, config);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitParse;
    }

    try {
        if (validate->parsed()) return run_validate(ref_path, cand_path, config, out_dir, debug);
        if (cohort->parsed()) return run_cohort(manifest_path, config, cohort_out);
        if (synth_cmd->parsed()) return run_synth(synth_what, synth_out, synth_seed);
        if (segment_cmd->parsed()) return run_segment(segment_path, config, segment_out);
    } catch (const handval::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitParse;
    } catch (const handval::SchemaMismatchError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitParse;
    } catch (const handval::VersionUnsupportedError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitParse;
    } catch (const handval::IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitParse;
    } catch (const handval::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitValidation;
    }
    return kExitOk;
}
