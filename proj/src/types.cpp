#include "handval/types.hpp"

#include "handval/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace handval {

std::string TrackingSystem::label() const {
    switch (kind) {
    case Kind::Reference: return "reference";
    case Kind::CandidateRGB: return "candidate_rgb";
    case Kind::CandidateRGBD: return "candidate_rgbd";
    case Kind::Other: return name;
    }
    return name;
}

TrackingSystem tracking_system_from_label(const std::string& label) {
    if (label == "reference") return TrackingSystem::reference();
    if (label == "candidate_rgb") return TrackingSystem::candidate_rgb();
    if (label == "candidate_rgbd") return TrackingSystem::candidate_rgbd();
    return TrackingSystem::other(label);
}

std::string to_string(Task t) {
    switch (t) {
    case Task::OC: return "OC";
    case Task::SFT: return "SFT";
    case Task::MFT: return "MFT";
    case Task::SOH: return "SOH";
    }
    return "?";
}

std::string to_string(DistanceBand b) {
    return b == DistanceBand::Near60to80cm ? "near_60_80cm" : "far_80_100cm";
}

std::string to_string(ViewingAngle v) {
    return v == ViewingAngle::Frontal ? "frontal" : "lateral";
}

Task task_from_string(const std::string& s) {
    if (s == "OC") return Task::OC;
    if (s == "SFT") return Task::SFT;
    if (s == "MFT") return Task::MFT;
    if (s == "SOH") return Task::SOH;
    throw Error("unknown task: " + s);
}

DistanceBand distance_band_from_string(const std::string& s) {
    if (s == "near_60_80cm") return DistanceBand::Near60to80cm;
    if (s == "far_80_100cm") return DistanceBand::Far80to100cm;
    throw Error("unknown distance band: " + s);
}

ViewingAngle viewing_angle_from_string(const std::string& s) {
    if (s == "frontal") return ViewingAngle::Frontal;
    if (s == "lateral") return ViewingAngle::Lateral;
    throw Error("unknown viewing angle: " + s);
}

std::vector<std::string> protocol_warnings(const TrialMetadata& meta) {
    std::vector<std::string> out;
    const std::string task = to_string(meta.task);
    if (meta.task == Task::MFT && meta.speed_bpm && *meta.speed_bpm != 115)
        out.push_back(fmt::format("protocol: MFT is specified at 115 bpm only, got {}", *meta.speed_bpm));
    if (meta.task == Task::OC && meta.viewing_angle == ViewingAngle::Lateral)
        out.push_back("protocol: OC is recorded frontally only");
    if (meta.task == Task::MFT && meta.viewing_angle == ViewingAngle::Lateral)
        out.push_back("protocol: MFT is recorded frontally only");
    if (meta.task == Task::SOH && meta.speed_bpm)
        out.push_back("protocol: SOH is a static task, speed_bpm ignored");
    if (meta.task != Task::SOH && meta.speed_bpm) {
        const int bpm = *meta.speed_bpm;
        if (bpm != 75 && bpm != 115 && bpm != 140)
            out.push_back(fmt::format("protocol: {} uses tempi 75/115/140 bpm, got {}", task, bpm));
    }
    return out;
}

void validate_trajectory(const JointTrajectory& traj) {
    for (std::size_t i = 0; i < traj.samples.size(); ++i) {
        const auto& s = traj.samples[i];
        if (!std::isfinite(s.t) || !s.p.allFinite())
            throw Error(fmt::format("trajectory {}: non-finite sample at index {}", traj.joint.name, i));
        if (i > 0 && s.t <= traj.samples[i - 1].t)
            throw Error(fmt::format("trajectory {}: timestamps not strictly increasing at index {}",
                                    traj.joint.name, i));
    }
}

std::vector<std::string> spacing_warnings(const JointTrajectory& traj) {
    std::vector<std::string> out;
    if (traj.fps <= 0.0 || traj.samples.size() < 2) return out;
    const double nominal = 1.0 / traj.fps;
    std::size_t irregular = 0;
    for (std::size_t i = 1; i < traj.samples.size(); ++i) {
        const double dt = traj.samples[i].t - traj.samples[i - 1].t;
        if (std::abs(dt - nominal) > 0.10 * nominal) ++irregular;
    }
    if (irregular > 0)
        out.push_back(fmt::format("trajectory {}: {} of {} sample gaps deviate more than 10% from 1/fps",
                                  traj.joint.name, irregular, traj.samples.size() - 1));
    return out;
}

const LandmarkFrame::Landmark* LandmarkFrame::find(const JointId& joint) const {
    for (const auto& lm : landmarks)
        if (lm.joint == joint) return &lm;
    return nullptr;
}

std::string to_string(DistanceLabel l) {
    switch (l) {
    case DistanceLabel::MT_WB: return "MT_WB";
    case DistanceLabel::IFT_TT: return "IFT_TT";
    case DistanceLabel::MT_TT: return "MT_TT";
    case DistanceLabel::RFT_TT: return "RFT_TT";
    case DistanceLabel::PT_TT: return "PT_TT";
    case DistanceLabel::TT_ALL: return "TT_ALL";
    }
    return "?";
}

DistanceLabel distance_label_from_string(const std::string& s) {
    if (s == "MT_WB") return DistanceLabel::MT_WB;
    if (s == "IFT_TT") return DistanceLabel::IFT_TT;
    if (s == "MT_TT") return DistanceLabel::MT_TT;
    if (s == "RFT_TT") return DistanceLabel::RFT_TT;
    if (s == "PT_TT") return DistanceLabel::PT_TT;
    if (s == "TT_ALL") return DistanceLabel::TT_ALL;
    throw Error("unknown distance label: " + s);
}

std::vector<double> DistanceSeries::values() const {
    std::vector<double> v(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) v[i] = samples[i].d;
    return v;
}

std::vector<double> DistanceSeries::times() const {
    std::vector<double> v(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) v[i] = samples[i].t;
    return v;
}

double median_dt(const DistanceSeries& series) {
    if (series.samples.size() < 2) return 0.0;
    std::vector<double> gaps(series.samples.size() - 1);
    for (std::size_t i = 1; i < series.samples.size(); ++i)
        gaps[i - 1] = series.samples[i].t - series.samples[i - 1].t;
    auto mid = gaps.begin() + static_cast<std::ptrdiff_t>(gaps.size() / 2);
    std::nth_element(gaps.begin(), mid, gaps.end());
    return *mid;
}

namespace {
constexpr double kGridTolS = 1e-9;
} // namespace

bool same_grid(const DistanceSeries& a, const DistanceSeries& b) {
    if (a.samples.size() != b.samples.size()) return false;
    for (std::size_t i = 0; i < a.samples.size(); ++i)
        if (std::abs(a.samples[i].t - b.samples[i].t) > kGridTolS) return false;
    return true;
}

bool same_grid(const JointTrajectory& a, const JointTrajectory& b) {
    if (a.samples.size() != b.samples.size()) return false;
    for (std::size_t i = 0; i < a.samples.size(); ++i)
        if (std::abs(a.samples[i].t - b.samples[i].t) > kGridTolS) return false;
    return true;
}

} // namespace handval
