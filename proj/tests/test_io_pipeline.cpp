#include "handval/digest.hpp"
#include "handval/errors.hpp"
#include "handval/pipeline.hpp"
#include "handval/report.hpp"
#include "handval/synth.hpp"
#include "handval/trajectory_io.hpp"

#include <doctest.h>
#include <fmt/format.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace handval;

namespace {

namespace fs = std::filesystem;

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("handval_test_" + std::to_string(reinterpret_cast<std::uintptr_t>(this)));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST_CASE("world-schema round trip is exact on the data model") {
    synth::MotionSpec spec = synth::default_spec(Task::SFT);
    spec.seed = 5;
    const Trial trial = synth::generate_trial(spec);
    const std::string text = serialize_trial(trial, FileSchema::WorldMm);
    const Trial back = parse_trajectory_text(text, "mem");

    CHECK(back.system.label() == trial.system.label());
    CHECK(back.fps == trial.fps);
    CHECK(back.metadata.task == trial.metadata.task);
    CHECK(back.metadata.subject_id == trial.metadata.subject_id);
    REQUIRE(back.joints.size() == trial.joints.size());
    for (std::size_t j = 0; j < trial.joints.size(); ++j) {
        const auto* orig = trial.find(back.joints[j].joint);
        REQUIRE(orig);
        REQUIRE(back.joints[j].samples.size() == orig->samples.size());
        for (std::size_t i = 0; i < orig->samples.size(); ++i) {
            CHECK(back.joints[j].samples[i].t == orig->samples[i].t);
            CHECK((back.joints[j].samples[i].p == orig->samples[i].p));
        }
    }

    SUBCASE("serialization is deterministic") {
        CHECK(serialize_trial(trial, FileSchema::WorldMm) == text);
    }
}

TEST_CASE("landmark-schema files reproduce 3D ground truth through the uplift") {
    synth::MotionSpec spec = synth::default_spec(Task::MFT);
    spec.seed = 12;
    const Trial cand = synth::generate_candidate_trial(spec, 30.0);
    const std::string text = serialize_trial(cand, FileSchema::LandmarkPx);
    const Trial back = parse_trajectory_text(text, "mem");
    REQUIRE(back.joints.size() == cand.joints.size());
    for (const auto& joint : cand.joints) {
        const auto* lifted = back.find(joint.joint);
        REQUIRE(lifted);
        REQUIRE(lifted->samples.size() == joint.samples.size());
        for (std::size_t i = 0; i < joint.samples.size(); ++i)
            CHECK((lifted->samples[i].p - joint.samples[i].p).norm() < 1e-6);
    }
}

TEST_CASE("depth holes drop frames and are counted, never read as zero") {
    synth::MotionSpec spec = synth::default_spec(Task::SFT);
    spec.duration_s = 6.0;
    const Trial cand = synth::generate_candidate_trial(spec, 30.0);
    std::string text = serialize_trial(cand, FileSchema::LandmarkPx);

    // blank out d_wrist on every row of the second frame
    std::istringstream in(text);
    std::string line, rebuilt;
    std::size_t lineno = 0;
    const std::string frame_t = fmt::format("{}", cand.joints.front().samples[1].t);
    while (std::getline(in, line)) {
        ++lineno;
        if (lineno > 2 && line.rfind(frame_t + ",", 0) == 0)
            line = line.substr(0, line.find_last_of(',') + 1);
        rebuilt += line + "\n";
    }
    const Trial back = parse_trajectory_text(rebuilt, "mem");
    CHECK(back.dropped_frames == 1);
    REQUIRE(!back.warnings.empty());
    CHECK(back.joints.front().samples.size() == cand.joints.front().samples.size() - 1);
}

TEST_CASE("strict parsing failures carry the line number") {
    synth::MotionSpec spec = synth::default_spec(Task::SFT);
    spec.duration_s = 6.0;
    const Trial trial = synth::generate_trial(spec);
    const std::string good = serialize_trial(trial, FileSchema::WorldMm);

    SUBCASE("unsupported version") {
        std::string bad = good;
        bad.replace(bad.find("\"format_version\":1"), 18, "\"format_version\":9");
        CHECK_THROWS_AS(parse_trajectory_text(bad, "mem"), VersionUnsupportedError);
    }
    SUBCASE("missing version") {
        std::string bad = good;
        bad.replace(bad.find("\"format_version\":1"), 18, "\"format_versionx\":1");
        CHECK_THROWS_AS(parse_trajectory_text(bad, "mem"), ParseError);
    }
    SUBCASE("unknown schema") {
        std::string bad = good;
        bad.replace(bad.find("world_mm"), 8, "world_cm");
        CHECK_THROWS_AS(parse_trajectory_text(bad, "mem"), SchemaMismatchError);
    }
    SUBCASE("malformed numeric field") {
        std::string bad = good;
        const auto pos = bad.find('\n', bad.find('\n') + 1) + 1; // first data row
        const auto comma = bad.find(',', pos);
        bad.replace(pos, comma - pos, "abc");
        try {
            parse_trajectory_text(bad, "mem");
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(e.line_number == 3);
            CHECK(std::string(e.what()).find("mem:3") != std::string::npos);
        }
    }
    SUBCASE("non-monotone timestamps") {
        // duplicate the first data row after the second one: same joint, same t
        std::istringstream in(good);
        std::string line, rebuilt, first_row;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            rebuilt += line + "\n";
            if (lineno == 3) first_row = line;
            if (lineno == 4) rebuilt += first_row + "\n";
        }
        CHECK_THROWS_AS(parse_trajectory_text(rebuilt, "mem"), ParseError);
    }
    SUBCASE("wrong field count") {
        std::string bad = good;
        const auto pos = bad.find('\n', bad.find('\n') + 1) + 1;
        bad.insert(pos, "1,2\n");
        CHECK_THROWS_AS(parse_trajectory_text(bad, "mem"), ParseError);
    }
}

TEST_CASE("validation of a trial against itself is perfect") {
    synth::MotionSpec spec = synth::default_spec(Task::OC);
    spec.seed = 3;
    const Trial reference = synth::generate_trial(spec);
    const TrialReport report = run_validation(reference, reference, Config{}, "self");
    CHECK(report.lag_samples == 0);
    CHECK(std::abs(report.vertical_offset_mm) < 1e-9);
    REQUIRE(report.labels.size() == 1);
    CHECK(report.labels[0].label == DistanceLabel::MT_WB); // the OC distance
    CHECK(report.labels[0].metrics.rmse_cm == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(report.labels[0].metrics.prmse_pct == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(report.labels[0].metrics.pearson_rho == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(report.rom_reference == report.rom_candidate);
}

TEST_CASE("task mismatch is rejected") {
    const Trial a = synth::generate_trial(synth::default_spec(Task::OC));
    const Trial b = synth::generate_trial(synth::default_spec(Task::SFT));
    CHECK_THROWS_AS(run_validation(a, b, Config{}, "bad"), TaskMismatchError);
}

TEST_CASE("lagged candidates report the injected lag") {
    synth::MotionSpec spec = synth::default_spec(Task::SFT);
    spec.fps = 120.0;
    spec.seed = 21;
    const Trial reference = synth::generate_trial(spec);
    synth::DegradationSpec dspec;
    dspec.lag_samples = 6;
    dspec.noise_sigma_mm = 2.0;
    dspec.seed = 8;
    const Trial candidate = synth::degrade(synth::generate_candidate_trial(spec, 30.0), dspec);
    const TrialReport report = run_validation(reference, candidate, Config{}, "lagged");
    CHECK(report.lag_samples == 6);
    CHECK(report.lag_seconds == doctest::Approx(0.2).epsilon(1e-6));
}

TEST_CASE("static hold trials yield hand lengths instead of motion metrics") {
    synth::MotionSpec spec = synth::default_spec(Task::SOH);
    const Trial reference = synth::generate_trial(spec);
    const Trial candidate = synth::generate_candidate_trial(spec, 30.0);
    const TrialReport report = run_validation(reference, candidate, Config{}, "soh");
    REQUIRE(report.hand_length_reference_cm.has_value());
    REQUIRE(report.hand_length_candidate_cm.has_value());
    CHECK(*report.hand_length_reference_cm == doctest::Approx(18.0).epsilon(0.01));
    CHECK(report.labels.empty());
    CHECK(!report.has_aligned);
}

TEST_CASE("multi-finger trials carry all four sub-distances plus the composite") {
    synth::MotionSpec spec = synth::default_spec(Task::MFT);
    spec.fps = 120.0;
    const Trial reference = synth::generate_trial(spec);
    const Trial candidate = synth::generate_candidate_trial(spec, 30.0);
    const TrialReport report = run_validation(reference, candidate, Config{}, "mft");
    CHECK(report.labels.size() == 5);
    CHECK(report.primary == DistanceLabel::TT_ALL);
    REQUIRE(report.f_dom_reference.has_value());
    CHECK(*report.f_dom_reference == doctest::Approx(115.0 / 60.0).epsilon(0.05));
}

TEST_CASE("aggregate pools segments and stratifies by protocol factors") {
    Config config;
    std::vector<TrialReport> reports;
    for (int speed : {75, 115, 140}) {
        synth::MotionSpec spec = synth::default_spec(Task::SFT);
        spec.bpm = speed;
        spec.fps = 120.0;
        spec.seed = static_cast<std::uint64_t>(speed);
        const Trial reference = synth::generate_trial(spec);
        synth::DegradationSpec dspec;
        dspec.noise_sigma_mm = 2.0;
        dspec.seed = 17;
        const Trial candidate = synth::degrade(synth::generate_candidate_trial(spec, 30.0), dspec);
        reports.push_back(
            run_validation(reference, candidate, config, "sft_" + std::to_string(speed)));
    }
    const CohortReport cohort = aggregate(reports, config);
    CHECK(cohort.trials.size() == 3);
    REQUIRE(cohort.agreement.size() == 4);
    CHECK(cohort.agreement[0].parameter == "ROM");
    CHECK(cohort.agreement[1].parameter == "DUR");
    CHECK(cohort.agreement[2].parameter == "F_DOM");
    CHECK(cohort.agreement[3].parameter == "POW_DOM");

    // one strata cell per speed, each with a single trial
    CHECK(cohort.strata.size() == 3);
    for (const auto& row : cohort.strata) {
        CHECK(row.n == 1);
        CHECK(!row.sd_available);
    }
    CHECK(cohort.config_hash == config_digest(config));
    CHECK_THROWS_AS(aggregate({}, config), EmptyInputError);

    SUBCASE("json rendering is stable and numeric fields are rounded") {
        const auto j1 = cohort_report_json(cohort);
        const auto j2 = cohort_report_json(cohort);
        CHECK(j1.dump() == j2.dump());
        CHECK(j1.at("agreement").contains("ROM"));
        CHECK(j1.at("trials").size() == 3);
    }
}

TEST_CASE("single-trial cohort equals the trial with SDs unavailable") {
    Config config;
    synth::MotionSpec spec = synth::default_spec(Task::OC);
    spec.fps = 120.0;
    const Trial reference = synth::generate_trial(spec);
    const Trial candidate = synth::generate_candidate_trial(spec, 30.0);
    const auto report = run_validation(reference, candidate, config, "only");
    const CohortReport cohort = aggregate({report}, config);
    REQUIRE(cohort.trials.size() == 1);
    CHECK(cohort.trials[0].id == "only");
    for (const auto& row : cohort.strata) CHECK(!row.sd_available);
}

TEST_CASE("emit writes deterministic files in all three formats") {
    TempDir tmp;
    Config config;
    synth::MotionSpec spec = synth::default_spec(Task::SFT);
    spec.fps = 120.0;
    const Trial reference = synth::generate_trial(spec);
    synth::DegradationSpec dspec;
    dspec.noise_sigma_mm = 1.0;
    const Trial candidate = synth::degrade(synth::generate_candidate_trial(spec, 30.0), dspec);
    const CohortReport cohort =
        aggregate({run_validation(reference, candidate, config, "t0")}, config);

    const auto out1 = tmp.path / "a";
    const auto out2 = tmp.path / "b";
    for (const auto& dir : {out1, out2}) {
        emit(cohort, EmitFormat::Json, dir.string());
        emit(cohort, EmitFormat::CsvTables, dir.string());
        emit(cohort, EmitFormat::PlotData, dir.string());
    }
    for (const char* name : {"report.json", "agreement.csv", "segments.csv", "strata.csv",
                             "trials.csv", "aligned_t0.csv"}) {
        CHECK(slurp(out1 / name) == slurp(out2 / name));
    }
    const std::string agreement = slurp(out1 / "agreement.csv");
    CHECK(agreement.rfind("parameter,ICC_low,ICC,ICC_high,CCC_low,CCC,CCC_high\n", 0) == 0);
    const std::string plot = slurp(out1 / "aligned_t0.csv");
    CHECK(plot.rfind("t_s,reference_mm,candidate_mm\n", 0) == 0);
}

TEST_CASE("file-level round trip through disk") {
    TempDir tmp;
    synth::MotionSpec spec = synth::default_spec(Task::OC);
    spec.seed = 99;
    const Trial trial = synth::generate_trial(spec);
    const auto path = (tmp.path / "trial.csv").string();
    write_trajectory_file(path, trial, FileSchema::WorldMm);
    const Trial back = parse_trajectory_file(path);
    CHECK(serialize_trial(back, FileSchema::WorldMm) == serialize_trial(trial, FileSchema::WorldMm));
    CHECK(digest_file(path) == fnv1a64_hex(slurp(path)));
}

TEST_CASE("sig6 rounds to six significant digits") {
    CHECK(sig6(0.15811388300841898) == doctest::Approx(0.158114).epsilon(1e-12));
    CHECK(sig6(123456.789) == doctest::Approx(123457.0));
    CHECK(sig6(0.0) == 0.0);
}
