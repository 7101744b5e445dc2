#include "handval/synth.hpp"

#include "handval/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace handval {

const JointTrajectory* Trial::find(const JointId& joint) const {
    for (const auto& j : joints)
        if (j.joint == joint) return &j;
    return nullptr;
}

JointTrajectory* Trial::find(const JointId& joint) {
    for (auto& j : joints)
        if (j.joint == joint) return &j;
    return nullptr;
}

} // namespace handval

namespace handval::synth {

namespace {

constexpr double kTau = 2.0 * std::numbers::pi;

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::mt19937_64 rng_for(std::uint64_t seed, std::uint64_t stream) {
    return std::mt19937_64{splitmix64(seed ^ splitmix64(stream))};
}

// Raised-cosine open/close cycles between consecutive contact instants.
// Contact level is fixed; the per-cycle excursion may vary.
struct CycleChannel {
    std::vector<double> contact_t; // strictly increasing cycle boundaries
    std::vector<double> cycle_amp; // excursion of cycle i = [contact_t[i], contact_t[i+1])
    double contact_mm = 0.0;

    double value(double t) const {
        if (cycle_amp.empty()) return contact_mm;
        auto it = std::upper_bound(contact_t.begin(), contact_t.end(), t);
        std::size_t i = it == contact_t.begin()
                            ? 0
                            : static_cast<std::size_t>(it - contact_t.begin()) - 1;
        if (i + 1 >= contact_t.size()) i = contact_t.size() - 2;
        const double u = (t - contact_t[i]) / (contact_t[i + 1] - contact_t[i]);
        return contact_mm + 0.5 * cycle_amp[i] * (1.0 - std::cos(kTau * u));
    }
};

// Open-hand level with a raised-cosine dip (one beat wide) at each tap.
struct PulseChannel {
    std::vector<double> tap_t;
    std::vector<double> tap_amp;
    double open_mm = 0.0;
    double width_s = 0.0;

    double value(double t) const {
        double v = open_mm;
        auto it = std::lower_bound(tap_t.begin(), tap_t.end(), t - width_s);
        for (std::size_t i = static_cast<std::size_t>(it - tap_t.begin());
             i < tap_t.size() && tap_t[i] <= t + width_s; ++i) {
            const double x = (t - tap_t[i]) / width_s;
            if (std::abs(x) < 0.5) v -= tap_amp[i] * 0.5 * (1.0 + std::cos(kTau * x));
        }
        return v;
    }
};

struct FingerChannel {
    JointId joint;
    Vec3 direction; // unit vector from the anchor
    CycleChannel cycles;
    PulseChannel pulses;
    bool pulsed = false;

    double distance(double t) const { return pulsed ? pulses.value(t) : cycles.value(t); }
};

struct Motion {
    MotionSpec spec;
    Vec3 wb_center{0, 0, 0};
    Vec3 wob_offset{0, 0, 0};
    Vec3 wib_offset{0, 0, 0};
    Vec3 tt_offset{0, 0, 0}; // thumb anchor relative to the wrist centre
    std::vector<FingerChannel> fingers;

    Vec3 sway(double t) const {
        return {3.0 * std::sin(kTau * 0.067 * t + 0.4), 2.5 * std::sin(kTau * 0.103 * t + 1.3),
                4.0 * std::sin(kTau * 0.049 * t + 2.1)};
    }

    bool thumb_anchored() const { return spec.task == Task::SFT || spec.task == Task::MFT; }
};

void validate_spec(const MotionSpec& spec) {
    if (spec.duration_s <= 0.0) throw InvalidSpecError("duration_s must be positive");
    if (spec.fps <= 0.0) throw InvalidSpecError("fps must be positive");
    if (spec.bpm <= 0.0) throw InvalidSpecError("bpm must be positive");
    if (spec.task != Task::SOH && spec.amplitude_mm <= 0.0)
        throw InvalidSpecError("amplitude_mm must be positive for dynamic tasks");
    if (spec.amplitude_mm < 0.0) throw InvalidSpecError("amplitude_mm must be non-negative");
    if (spec.baseline_mm <= 0.0) throw InvalidSpecError("baseline_mm must be positive");
    if (spec.timing_jitter_s < 0.0 || spec.amplitude_jitter < 0.0 || spec.position_jitter_mm < 0.0)
        throw InvalidSpecError("jitter parameters must be non-negative");
    if (spec.task != Task::SOH) {
        const double excursion = spec.amplitude_mm * excursion_scale(spec.excursion);
        if (spec.task != Task::MFT && excursion / 2.0 >= spec.baseline_mm)
            throw InvalidSpecError("half excursion must stay below the baseline distance");
    }
}

CycleChannel make_cycles(const MotionSpec& spec, double excursion_mm, std::mt19937_64& rng) {
    const double period = 60.0 / spec.bpm;
    CycleChannel ch;
    ch.contact_mm = spec.baseline_mm - 0.5 * excursion_mm;
    std::normal_distribution<double> time_jitter(0.0, spec.timing_jitter_s);
    std::normal_distribution<double> amp_jitter(0.0, spec.amplitude_jitter);
    const long k_lo = static_cast<long>(std::floor(-2.0 / period)) - 1;
    const long k_hi = static_cast<long>(std::ceil((spec.duration_s + 2.0) / period)) + 1;
    for (long k = k_lo; k <= k_hi; ++k) {
        double dt = spec.timing_jitter_s > 0.0 ? time_jitter(rng) : 0.0;
        dt = std::clamp(dt, -0.2 * period, 0.2 * period);
        // Noiseless channels reduce to baseline + A/2 * cos(2*pi*f*t).
        ch.contact_t.push_back((static_cast<double>(k) + 0.5) * period + dt);
        double a = spec.amplitude_jitter > 0.0 ? amp_jitter(rng) : 0.0;
        ch.cycle_amp.push_back(excursion_mm * std::max(0.1, 1.0 + std::clamp(a, -0.3, 0.3)));
    }
    return ch;
}

PulseChannel make_pulses(const MotionSpec& spec, double dip_mm, double open_mm, int finger_index,
                         std::mt19937_64& rng) {
    const double beat = 60.0 / spec.bpm;
    PulseChannel ch;
    ch.open_mm = open_mm;
    ch.width_s = beat;
    std::normal_distribution<double> time_jitter(0.0, spec.timing_jitter_s);
    std::normal_distribution<double> amp_jitter(0.0, spec.amplitude_jitter);
    const long k_lo = static_cast<long>(std::floor(-2.0 / (4.0 * beat))) - 1;
    const long k_hi = static_cast<long>(std::ceil((spec.duration_s + 2.0) / (4.0 * beat))) + 1;
    for (long k = k_lo; k <= k_hi; ++k) {
        double dt = spec.timing_jitter_s > 0.0 ? time_jitter(rng) : 0.0;
        dt = std::clamp(dt, -0.2 * beat, 0.2 * beat);
        ch.tap_t.push_back((static_cast<double>(4 * k + finger_index) + 0.5) * beat + dt);
        double a = spec.amplitude_jitter > 0.0 ? amp_jitter(rng) : 0.0;
        ch.tap_amp.push_back(dip_mm * std::max(0.1, 1.0 + std::clamp(a, -0.3, 0.3)));
    }
    return ch;
}

Vec3 unit(double x, double y, double z) { return Vec3(x, y, z).normalized(); }

Motion make_motion(const MotionSpec& spec) {
    validate_spec(spec);
    Motion m;
    m.spec = spec;
    const double depth = spec.distance_band == DistanceBand::Near60to80cm ? 700.0 : 900.0;
    m.wb_center = {0.0, -10.0, depth};
    m.wob_offset = {-34.0, 2.0, 5.0};
    m.wib_offset = {34.0, -2.0, -5.0}; // midpoint of WOB/WIB is exactly the wrist centre
    m.tt_offset = {-25.0, -95.0, -40.0};

    const double excursion = spec.amplitude_mm * excursion_scale(spec.excursion);
    auto rng = rng_for(spec.seed, 0x7A);
    switch (spec.task) {
    case Task::OC: {
        FingerChannel f;
        f.joint = joints::MT;
        f.direction = unit(0.15, -0.92, -0.36);
        f.cycles = make_cycles(spec, excursion, rng);
        m.fingers.push_back(std::move(f));
        break;
    }
    case Task::SOH: {
        FingerChannel f;
        f.joint = joints::MT;
        f.direction = unit(0.15, -0.92, -0.36);
        f.cycles.contact_mm = spec.baseline_mm;
        m.fingers.push_back(std::move(f));
        break;
    }
    case Task::SFT: {
        FingerChannel f;
        f.joint = joints::IFT;
        f.direction = unit(0.55, -0.75, -0.37);
        f.cycles = make_cycles(spec, excursion, rng);
        m.fingers.push_back(std::move(f));
        break;
    }
    case Task::MFT: {
        const JointId joint_ids[4] = {joints::IFT, joints::MT, joints::RFT, joints::PT};
        const Vec3 dirs[4] = {unit(0.55, -0.75, -0.37), unit(0.25, -0.90, -0.36),
                              unit(-0.05, -0.93, -0.35), unit(-0.35, -0.85, -0.40)};
        const double dip_scale[4] = {1.0, 0.9, 0.75, 0.6};
        const double open_offset[4] = {15.0, 20.0, 10.0, 0.0};
        for (int i = 0; i < 4; ++i) {
            FingerChannel f;
            f.joint = joint_ids[i];
            f.direction = dirs[i];
            f.pulsed = true;
            f.pulses = make_pulses(spec, excursion * dip_scale[i],
                                   spec.baseline_mm + open_offset[i], i, rng);
            m.fingers.push_back(std::move(f));
        }
        break;
    }
    }
    return m;
}

std::vector<std::pair<JointId, Vec3>> positions_at(const Motion& m, double t, bool reference_markers) {
    std::vector<std::pair<JointId, Vec3>> out;
    const Vec3 sway = m.sway(t);
    const Vec3 wrist = m.wb_center + sway;
    if (reference_markers) {
        out.emplace_back(joints::WOB, wrist + m.wob_offset);
        out.emplace_back(joints::WIB, wrist + m.wib_offset);
    } else {
        out.emplace_back(joints::WRIST, wrist);
    }
    const Vec3 anchor = m.thumb_anchored() ? Vec3(wrist + m.tt_offset) : wrist;
    if (m.thumb_anchored()) out.emplace_back(joints::TT, anchor);
    for (const auto& f : m.fingers)
        out.emplace_back(f.joint, anchor + f.distance(t) * f.direction);
    return out;
}

TrialMetadata metadata_for(const MotionSpec& spec) {
    TrialMetadata meta;
    meta.task = spec.task;
    if (spec.task != Task::SOH) meta.speed_bpm = static_cast<int>(std::lround(spec.bpm));
    meta.distance_band = spec.distance_band;
    meta.viewing_angle = spec.viewing_angle;
    meta.subject_id = spec.subject_id;
    meta.duration_s = spec.duration_s;
    return meta;
}

Trial sample_trial(const Motion& m, double fps, const TrackingSystem& system, bool reference_markers,
                   double jitter_sigma_mm, std::uint64_t jitter_stream) {
    const MotionSpec& spec = m.spec;
    Trial trial;
    trial.metadata = metadata_for(spec);
    trial.system = system;
    trial.fps = fps;
    trial.intrinsics = CameraIntrinsics{600.0, 600.0, 640.0, 360.0};

    const std::size_t n = static_cast<std::size_t>(std::llround(spec.duration_s * fps));
    auto rng = rng_for(spec.seed, jitter_stream);
    std::normal_distribution<double> jitter(0.0, jitter_sigma_mm > 0.0 ? jitter_sigma_mm : 1.0);

    const auto first = positions_at(m, 0.0, reference_markers);
    trial.joints.resize(first.size());
    for (std::size_t j = 0; j < first.size(); ++j) {
        trial.joints[j].joint = first[j].first;
        trial.joints[j].system = system;
        trial.joints[j].fps = fps;
        trial.joints[j].samples.reserve(n);
    }
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / fps;
        const auto points = positions_at(m, t, reference_markers);
        for (std::size_t j = 0; j < points.size(); ++j) {
            Vec3 p = points[j].second;
            if (jitter_sigma_mm > 0.0) p += Vec3(jitter(rng), jitter(rng), jitter(rng));
            trial.joints[j].samples.push_back({t, p});
        }
    }
    return trial;
}

struct DistancePairs {
    JointId anchor;
    std::vector<JointId> movers;
};

DistancePairs task_pairs(Task task, const Trial& trial) {
    DistancePairs pairs;
    switch (task) {
    case Task::OC:
    case Task::SOH:
        pairs.anchor = trial.has(joints::WRIST) ? joints::WRIST : joints::WB;
        pairs.movers = {joints::MT};
        break;
    case Task::SFT:
        pairs.anchor = joints::TT;
        pairs.movers = {joints::IFT};
        break;
    case Task::MFT:
        pairs.anchor = joints::TT;
        pairs.movers = {joints::IFT, joints::MT, joints::RFT, joints::PT};
        break;
    }
    return pairs;
}

// Anchor positions per sample; derives the wrist midpoint when the trial
// carries the two wrist bone markers instead of a wrist joint.
std::vector<Vec3> anchor_positions(const Trial& trial, const JointId& anchor) {
    if (const auto* j = trial.find(anchor)) {
        std::vector<Vec3> out(j->samples.size());
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = j->samples[i].p;
        return out;
    }
    if (anchor == joints::WB) {
        const auto* wob = trial.find(joints::WOB);
        const auto* wib = trial.find(joints::WIB);
        if (wob && wib && wob->samples.size() == wib->samples.size()) {
            std::vector<Vec3> out(wob->samples.size());
            for (std::size_t i = 0; i < out.size(); ++i)
                out[i] = 0.5 * (wob->samples[i].p + wib->samples[i].p);
            return out;
        }
    }
    throw InvalidSpecError(fmt::format("trial lacks the {} anchor joint", anchor.name));
}

} // namespace

double excursion_scale(ExcursionProfile p) {
    switch (p) {
    case ExcursionProfile::Wide: return 1.0;
    case ExcursionProfile::Free: return 0.7;
    case ExcursionProfile::Small: return 0.4;
    }
    return 1.0;
}

std::string to_string(ExcursionProfile p) {
    switch (p) {
    case ExcursionProfile::Wide: return "wide";
    case ExcursionProfile::Free: return "free";
    case ExcursionProfile::Small: return "small";
    }
    return "?";
}

ExcursionProfile excursion_profile_from_string(const std::string& s) {
    if (s == "wide") return ExcursionProfile::Wide;
    if (s == "free") return ExcursionProfile::Free;
    if (s == "small") return ExcursionProfile::Small;
    throw Error("unknown excursion profile: " + s);
}

MotionSpec default_spec(Task task) {
    MotionSpec spec;
    spec.task = task;
    switch (task) {
    case Task::OC:
        spec.baseline_mm = 120.0;
        spec.amplitude_mm = 80.0;
        break;
    case Task::SFT:
        spec.baseline_mm = 50.0;
        spec.amplitude_mm = 70.0;
        break;
    case Task::MFT:
        spec.baseline_mm = 95.0;
        spec.amplitude_mm = 70.0;
        break;
    case Task::SOH:
        spec.baseline_mm = 180.0; // hand length 18 cm
        spec.amplitude_mm = 0.0;
        break;
    }
    return spec;
}

bool DegradationSpec::is_identity() const {
    return noise_sigma_mm == 0.0 && offset_mm == 0.0 && lag_samples == 0 && squeeze_factor == 1.0 &&
           dropout_rate == 0.0;
}

Trial generate_trial(const MotionSpec& spec) {
    const Motion motion = make_motion(spec);
    return sample_trial(motion, spec.fps, TrackingSystem::reference(), true,
                        spec.position_jitter_mm, 0x2);
}

Trial generate_candidate_trial(const MotionSpec& spec, double fps) {
    const Motion motion = make_motion(spec);
    return sample_trial(motion, fps, TrackingSystem::candidate_rgbd(), false, 0.0, 0x3);
}

Trial degrade(const Trial& gold, const DegradationSpec& spec) {
    if (!(spec.squeeze_factor > 0.0 && spec.squeeze_factor <= 1.0))
        throw InvalidSpecError(fmt::format("squeeze_factor {} outside (0, 1]", spec.squeeze_factor));
    if (spec.dropout_rate < 0.0 || spec.dropout_rate > 0.2)
        throw InvalidSpecError(fmt::format("dropout_rate {} outside [0, 0.2]", spec.dropout_rate));
    if (spec.noise_sigma_mm < 0.0) throw InvalidSpecError("noise_sigma_mm must be non-negative");

    Trial out = gold;
    if (spec.is_identity()) return out;

    const DistancePairs pairs = task_pairs(gold.metadata.task, gold);
    const std::vector<Vec3> anchor = anchor_positions(out, pairs.anchor);

    for (std::size_t mi = 0; mi < pairs.movers.size(); ++mi) {
        auto* mover = out.find(pairs.movers[mi]);
        if (!mover) throw InvalidSpecError(fmt::format("trial lacks joint {}", pairs.movers[mi].name));
        if (mover->samples.size() != anchor.size())
            throw GridMismatchError("anchor and mover joints disagree on the frame grid");

        std::vector<double> d(mover->samples.size());
        for (std::size_t i = 0; i < d.size(); ++i) d[i] = (mover->samples[i].p - anchor[i]).norm();
        double mu = 0.0;
        for (double v : d) mu += v;
        mu /= static_cast<double>(d.size());

        auto rng = rng_for(spec.seed, 0x10 + mi);
        std::normal_distribution<double> noise(0.0, spec.noise_sigma_mm > 0.0 ? spec.noise_sigma_mm : 1.0);
        for (std::size_t i = 0; i < d.size(); ++i) {
            double nd = mu + spec.squeeze_factor * (d[i] - mu) + spec.offset_mm;
            if (spec.noise_sigma_mm > 0.0) nd += noise(rng);
            nd = std::max(nd, 1e-3);
            const Vec3 dir = (mover->samples[i].p - anchor[i]) / d[i];
            mover->samples[i].p = anchor[i] + nd * dir;
        }
    }

    if (spec.lag_samples != 0) {
        const int lag = spec.lag_samples;
        for (auto& joint : out.joints) {
            const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(joint.samples.size());
            std::vector<Vec3> shifted(n);
            for (std::ptrdiff_t i = 0; i < n; ++i) {
                const std::ptrdiff_t src = std::clamp<std::ptrdiff_t>(i - lag, 0, n - 1);
                shifted[i] = joint.samples[src].p;
            }
            for (std::ptrdiff_t i = 0; i < n; ++i) joint.samples[i].p = shifted[i];
        }
    }

    if (spec.dropout_rate > 0.0 && !out.joints.empty()) {
        const std::size_t n = out.joints.front().samples.size();
        const std::size_t max_run = std::max<std::size_t>(1, static_cast<std::size_t>(out.fps) - 1);
        auto rng = rng_for(spec.seed, 0x99);
        std::uniform_real_distribution<double> coin(0.0, 1.0);
        std::vector<bool> drop(n, false);
        std::size_t run = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (run < max_run && coin(rng) < spec.dropout_rate) {
                drop[i] = true;
                ++run;
            } else {
                run = 0;
            }
        }
        for (auto& joint : out.joints) {
            std::vector<TrajectorySample> kept;
            kept.reserve(n);
            for (std::size_t i = 0; i < joint.samples.size(); ++i)
                if (!drop[i]) kept.push_back(joint.samples[i]);
            joint.samples = std::move(kept);
        }
    }
    return out;
}

std::vector<BenchmarkTrial> make_benchmark_suite(std::uint64_t seed) {
    struct Preset {
        const char* name;
        DegradationSpec spec;
    };
    const Preset presets[] = {
        {"clean", {}},
        {"noisy", {.noise_sigma_mm = 2.0}},
        {"lagged", {.noise_sigma_mm = 2.0, .lag_samples = 6}},
        {"squeezed", {.noise_sigma_mm = 2.0, .squeeze_factor = 0.5}},
        {"combined",
         {.noise_sigma_mm = 2.0, .offset_mm = 12.0, .lag_samples = 6, .squeeze_factor = 0.7,
          .dropout_rate = 0.05}},
    };
    struct Cell {
        Task task;
        double bpm;
    };
    const Cell cells[] = {
        {Task::OC, 75},  {Task::OC, 115},  {Task::OC, 140}, {Task::SFT, 75},
        {Task::SFT, 115}, {Task::SFT, 140}, {Task::MFT, 115},
    };

    std::vector<BenchmarkTrial> suite;
    std::size_t index = 0;
    auto build = [&](Task task, double bpm, const Preset& preset) {
        MotionSpec ms = default_spec(task);
        ms.bpm = bpm;
        ms.fps = 120.0;
        ms.excursion = bpm < 100   ? ExcursionProfile::Wide
                       : bpm < 130 ? ExcursionProfile::Free
                                   : ExcursionProfile::Small;
        ms.seed = splitmix64(seed ^ (0xA000 + index));
        ms.distance_band = index % 2 == 0 ? DistanceBand::Near60to80cm : DistanceBand::Far80to100cm;
        ms.viewing_angle =
            task == Task::SFT && index % 3 == 1 ? ViewingAngle::Lateral : ViewingAngle::Frontal;
        ms.subject_id = fmt::format("synth-{:02d}", index % 10 + 1);

        DegradationSpec ds = preset.spec;
        ds.seed = splitmix64(ms.seed ^ 0xD00D);

        BenchmarkTrial bt;
        bt.id = fmt::format("{:03d}_{}_{}bpm_{}", index, to_string(task), static_cast<int>(bpm),
                            preset.name);
        bt.preset = preset.name;
        bt.motion = ms;
        bt.degradation = ds;
        bt.reference = generate_trial(ms);
        bt.candidate = degrade(generate_candidate_trial(ms, 30.0), ds);
        bt.candidate_as_landmarks = index % 2 == 1;
        suite.push_back(std::move(bt));
        ++index;
    };

    for (const auto& cell : cells)
        for (const auto& preset : presets) build(cell.task, cell.bpm, preset);
    // Static hold trials feed the hand-length check; no dynamics to degrade.
    build(Task::SOH, 115, presets[0]);
    build(Task::SOH, 115, presets[1]);
    return suite;
}

DistanceSeries random_walk_series(std::size_t n, double fps, double step_mm, std::uint64_t seed) {
    auto rng = rng_for(seed, 0x11);
    std::normal_distribution<double> step(0.0, step_mm);
    DistanceSeries out;
    out.label = DistanceLabel::IFT_TT;
    out.system = TrackingSystem::reference();
    out.samples.resize(n);
    double d = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        d += step(rng);
        out.samples[i] = {static_cast<double>(i) / fps, d};
    }
    return out;
}

} // namespace handval::synth
