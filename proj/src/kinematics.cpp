#include "handval/kinematics.hpp"

#include "handval/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace handval {

double fuse_depth(const LandmarkFrame& frame, const JointId& joint) {
    if (!frame.d_wrist_mm)
        throw DepthHoleError(fmt::format("t={}: wrist depth is a depth-map hole", frame.t));
    if (*frame.d_wrist_mm <= 0.0)
        throw DepthHoleError(fmt::format("t={}: wrist depth {} mm is not positive", frame.t, *frame.d_wrist_mm));
    const auto* lm = frame.find(joint);
    if (!lm)
        throw MissingJointError(fmt::format("t={}: joint {} not present in frame", frame.t, joint.name));
    const double scale = 1.0 + lm->z_im;
    if (scale <= 0.0)
        throw NonPhysicalDepthError(
            fmt::format("t={}: joint {}: 1 + z_im = {} gives non-physical depth", frame.t, joint.name, scale));
    return *frame.d_wrist_mm * scale;
}

Vec3 backproject(double u, double v, double depth_mm, const CameraIntrinsics& k) {
    if (k.fx <= 0.0 || k.fy <= 0.0)
        throw InvalidIntrinsicsError(fmt::format("fx={}, fy={} must be positive", k.fx, k.fy));
    if (depth_mm <= 0.0)
        throw NonPhysicalDepthError(fmt::format("depth {} mm must be positive", depth_mm));
    return {(u - k.cx) * depth_mm / k.fx, (v - k.cy) * depth_mm / k.fy, depth_mm};
}

std::pair<double, double> project_point(const Vec3& p_mm, const CameraIntrinsics& k) {
    if (k.fx <= 0.0 || k.fy <= 0.0)
        throw InvalidIntrinsicsError(fmt::format("fx={}, fy={} must be positive", k.fx, k.fy));
    if (p_mm.z() <= 0.0)
        throw NonPhysicalDepthError(fmt::format("point depth {} mm must be positive", p_mm.z()));
    return {k.cx + k.fx * p_mm.x() / p_mm.z(), k.cy + k.fy * p_mm.y() / p_mm.z()};
}

LandmarkFrame make_landmark_frame(double t, const std::vector<std::pair<JointId, Vec3>>& points_mm,
                                  const JointId& wrist, const CameraIntrinsics& k) {
    const auto wrist_it = std::find_if(points_mm.begin(), points_mm.end(),
                                       [&](const auto& jp) { return jp.first == wrist; });
    if (wrist_it == points_mm.end())
        throw MissingJointError(fmt::format("t={}: wrist joint {} absent from point set", t, wrist.name));
    const double d_wrist = wrist_it->second.z();
    if (d_wrist <= 0.0)
        throw NonPhysicalDepthError(fmt::format("t={}: wrist depth {} mm must be positive", t, d_wrist));

    LandmarkFrame frame;
    frame.t = t;
    frame.intrinsics = k;
    frame.d_wrist_mm = d_wrist;
    frame.landmarks.reserve(points_mm.size());
    for (const auto& [joint, p] : points_mm) {
        auto [u, v] = project_point(p, k);
        // z_im = 0 at the wrist falls out of the encoding for joint == wrist
        frame.landmarks.push_back({joint, u, v, p.z() / d_wrist - 1.0});
    }
    return frame;
}

std::vector<std::pair<JointId, Vec3>> uplift_frame(const LandmarkFrame& frame) {
    if (!frame.d_wrist_mm || *frame.d_wrist_mm <= 0.0)
        throw DepthHoleError(fmt::format("t={}: wrist depth unusable, frame cannot be lifted", frame.t));
    std::vector<std::pair<JointId, Vec3>> out;
    out.reserve(frame.landmarks.size());
    for (const auto& lm : frame.landmarks) {
        const double d = fuse_depth(frame, lm.joint);
        out.emplace_back(lm.joint, backproject(lm.u, lm.v, d, frame.intrinsics));
    }
    return out;
}

JointTrajectory derive_wb(const JointTrajectory& wib, const JointTrajectory& wob) {
    if (!same_grid(wib, wob))
        throw GridMismatchError("WIB and WOB trajectories are not on the same timestamp grid");
    JointTrajectory wb;
    wb.joint = joints::WB;
    wb.system = wib.system;
    wb.fps = wib.fps;
    wb.samples.resize(wib.samples.size());
    for (std::size_t i = 0; i < wib.samples.size(); ++i)
        wb.samples[i] = {wib.samples[i].t, 0.5 * (wib.samples[i].p + wob.samples[i].p)};
    return wb;
}

DistanceSeries distance_series(const JointTrajectory& a, const JointTrajectory& b, DistanceLabel label) {
    if (!same_grid(a, b))
        throw GridMismatchError(fmt::format("{} and {} trajectories are not on the same timestamp grid",
                                            a.joint.name, b.joint.name));
    DistanceSeries out;
    out.label = label;
    out.system = a.system;
    out.samples.resize(a.samples.size());
    for (std::size_t i = 0; i < a.samples.size(); ++i)
        out.samples[i] = {a.samples[i].t, (a.samples[i].p - b.samples[i].p).norm()};
    return out;
}

DistanceSeries tt_all(const DistanceSeries& index_tt, const DistanceSeries& middle_tt,
                      const DistanceSeries& ring_tt, const DistanceSeries& pinkie_tt) {
    const DistanceSeries* parts[4] = {&index_tt, &middle_tt, &ring_tt, &pinkie_tt};
    const DistanceLabel expected[4] = {DistanceLabel::IFT_TT, DistanceLabel::MT_TT,
                                       DistanceLabel::RFT_TT, DistanceLabel::PT_TT};
    for (int i = 0; i < 4; ++i)
        if (parts[i]->label != expected[i])
            throw WrongLabelsError(fmt::format("argument {} carries label {}, expected {}", i,
                                               to_string(parts[i]->label), to_string(expected[i])));
    for (int i = 1; i < 4; ++i)
        if (!same_grid(*parts[0], *parts[i]))
            throw GridMismatchError("finger-to-thumb distance series are not on a shared grid");

    DistanceSeries out;
    out.label = DistanceLabel::TT_ALL;
    out.system = index_tt.system;
    out.samples.resize(index_tt.samples.size());
    for (std::size_t i = 0; i < index_tt.samples.size(); ++i) {
        double sum = 0.0;
        for (const auto* part : parts) sum += part->samples[i].d;
        out.samples[i] = {index_tt.samples[i].t, sum};
    }
    return out;
}

double hand_length_cm(const JointTrajectory& mt, const JointTrajectory& wb,
                      std::vector<std::string>* warnings) {
    if (!same_grid(mt, wb))
        throw GridMismatchError("MT and WB trajectories are not on the same timestamp grid");
    if (mt.samples.size() < 2 || mt.t_back() - mt.t_front() < 1.0)
        throw TooFewSamplesError("hand length needs at least one second of static samples");
    double acc = 0.0;
    for (std::size_t i = 0; i < mt.samples.size(); ++i)
        acc += (mt.samples[i].p - wb.samples[i].p).norm();
    const double cm = acc / static_cast<double>(mt.samples.size()) / 10.0;
    if (warnings && (cm < 12.0 || cm > 25.0))
        warnings->push_back(fmt::format("hand length {:.2f} cm outside the plausible adult band [12, 25] cm", cm));
    return cm;
}

std::size_t intersect_grids(JointTrajectory& a, JointTrajectory& b) {
    constexpr double tol = 1e-9;
    std::vector<TrajectorySample> ka, kb;
    std::size_t i = 0, j = 0;
    while (i < a.samples.size() && j < b.samples.size()) {
        const double ta = a.samples[i].t, tb = b.samples[j].t;
        if (std::abs(ta - tb) <= tol) {
            ka.push_back(a.samples[i]);
            kb.push_back(b.samples[j]);
            ++i, ++j;
        } else if (ta < tb) {
            ++i;
        } else {
            ++j;
        }
    }
    const std::size_t dropped = (a.samples.size() - ka.size()) + (b.samples.size() - kb.size());
    a.samples = std::move(ka);
    b.samples = std::move(kb);
    return dropped;
}

} // namespace handval
