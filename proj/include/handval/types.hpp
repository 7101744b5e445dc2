#pragma once

#include <Eigen/Core>

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace handval {

using Vec3 = Eigen::Vector3d;

/// Identifier of a tracked joint / marker. Known markers have canonical
/// upper-case names; any other name is accepted for extended keypoint sets.
struct JointId {
    std::string name;

    auto operator<=>(const JointId&) const = default;
};

namespace joints {
inline const JointId WOB{"WOB"};     // wrist outer bone marker
inline const JointId WIB{"WIB"};     // wrist inner bone marker
inline const JointId WB{"WB"};       // derived wrist midpoint, never raw input
inline const JointId WRIST{"WRIST"}; // wrist joint of landmark-based trackers
inline const JointId IFT{"IFT"};     // index finger tip
inline const JointId TT{"TT"};       // thumb tip
inline const JointId MT{"MT"};       // middle finger tip
inline const JointId RFT{"RFT"};     // ring finger tip
inline const JointId PT{"PT"};       // pinkie tip
} // namespace joints

struct TrackingSystem {
    enum class Kind { Reference, CandidateRGB, CandidateRGBD, Other };

    Kind kind = Kind::Reference;
    std::string name; // set when kind == Other

    static TrackingSystem reference() { return {Kind::Reference, {}}; }
    static TrackingSystem candidate_rgb() { return {Kind::CandidateRGB, {}}; }
    static TrackingSystem candidate_rgbd() { return {Kind::CandidateRGBD, {}}; }
    static TrackingSystem other(std::string n) { return {Kind::Other, std::move(n)}; }

    bool is_reference() const { return kind == Kind::Reference; }

    std::string label() const;

    bool operator==(const TrackingSystem&) const = default;
};

/// Parses a system label ("reference", "candidate_rgb", ...); anything else
/// becomes an Other system with that name.
TrackingSystem tracking_system_from_label(const std::string& label);

enum class Task { OC, SFT, MFT, SOH };
enum class DistanceBand { Near60to80cm, Far80to100cm };
enum class ViewingAngle { Frontal, Lateral };

std::string to_string(Task t);
std::string to_string(DistanceBand b);
std::string to_string(ViewingAngle v);
Task task_from_string(const std::string& s);
DistanceBand distance_band_from_string(const std::string& s);
ViewingAngle viewing_angle_from_string(const std::string& s);

struct TrialMetadata {
    Task task = Task::SFT;
    std::optional<int> speed_bpm;
    DistanceBand distance_band = DistanceBand::Near60to80cm;
    ViewingAngle viewing_angle = ViewingAngle::Frontal;
    std::string subject_id;
    double duration_s = 0.0;
};

/// Protocol consistency checks. Inconsistencies are reported, never fatal.
std::vector<std::string> protocol_warnings(const TrialMetadata& meta);

struct TrajectorySample {
    double t = 0.0; // seconds
    Vec3 p{0, 0, 0}; // millimetres
};

/// Time-stamped 3D positions of one joint as seen by one tracking system.
struct JointTrajectory {
    JointId joint;
    TrackingSystem system;
    std::vector<TrajectorySample> samples;
    double fps = 0.0; // nominal rate, Hz

    std::size_t size() const { return samples.size(); }
    bool empty() const { return samples.empty(); }
    double t_front() const { return samples.front().t; }
    double t_back() const { return samples.back().t; }
};

/// Throws on hard invariant violations (non-increasing time, non-finite
/// coordinates). Sample-spacing deviations are soft and reported separately.
void validate_trajectory(const JointTrajectory& traj);

/// Flags consecutive samples whose spacing deviates from 1/fps by more than
/// 10%. Returns human-readable warnings, empty when the grid is regular.
std::vector<std::string> spacing_warnings(const JointTrajectory& traj);

struct CameraIntrinsics {
    double fx = 0.0; // pixels
    double fy = 0.0;
    double cx = 0.0;
    double cy = 0.0;

    bool operator==(const CameraIntrinsics&) const = default;
};

/// One frame of 2.5D landmarks: pixel coordinates plus a relative depth
/// parameter per joint, anchored by the measured wrist depth. A missing
/// wrist depth (depth-map hole) is a distinct state, never 0 mm.
struct LandmarkFrame {
    struct Landmark {
        JointId joint;
        double u = 0.0;    // pixels
        double v = 0.0;    // pixels
        double z_im = 0.0; // relative depth, dimensionless; 0 at the wrist
    };

    double t = 0.0;
    std::vector<Landmark> landmarks;
    std::optional<double> d_wrist_mm; // nullopt == depth hole
    CameraIntrinsics intrinsics;

    const Landmark* find(const JointId& joint) const;
};

enum class DistanceLabel { MT_WB, IFT_TT, MT_TT, RFT_TT, PT_TT, TT_ALL };

std::string to_string(DistanceLabel l);
DistanceLabel distance_label_from_string(const std::string& s);

struct DistanceSample {
    double t = 0.0; // seconds
    double d = 0.0; // millimetres
};

/// Scalar time series of one inter-joint distance, the unit of comparison
/// between tracking systems.
struct DistanceSeries {
    DistanceLabel label = DistanceLabel::IFT_TT;
    TrackingSystem system;
    std::vector<DistanceSample> samples;

    std::size_t size() const { return samples.size(); }
    bool empty() const { return samples.empty(); }
    std::vector<double> values() const;
    std::vector<double> times() const;
    double t_front() const { return samples.front().t; }
    double t_back() const { return samples.back().t; }
};

/// Median spacing between consecutive samples; the effective sample period.
double median_dt(const DistanceSeries& series);

/// True when both series share the same timestamps within 1e-9 s.
bool same_grid(const DistanceSeries& a, const DistanceSeries& b);
bool same_grid(const JointTrajectory& a, const JointTrajectory& b);

} // namespace handval
