#pragma once

#include "handval/types.hpp"

#include <utility>
#include <vector>

namespace handval {

/// Absolute depth of a joint, fused from the measured wrist depth and the
/// tracker's relative per-joint depth estimate:
///
///     d_joint = d_wrist * (1 + z_im)
///
/// Throws DepthHoleError when the wrist depth is a depth-map hole,
/// MissingJointError when the joint is absent from the frame, and
/// NonPhysicalDepthError when 1 + z_im <= 0.
double fuse_depth(const LandmarkFrame& frame, const JointId& joint);

/// Pinhole back-projection of a pixel at known depth into camera-centred
/// coordinates (millimetres): ((u-cx)*d/fx, (v-cy)*d/fy, d).
Vec3 backproject(double u, double v, double depth_mm, const CameraIntrinsics& k);

/// Pinhole projection of a camera-frame point to pixel coordinates.
/// Inverse of backproject for points in front of the camera.
std::pair<double, double> project_point(const Vec3& p_mm, const CameraIntrinsics& k);

/// Builds a landmark frame from known 3D camera-frame points: projects each
/// point to pixels and encodes its depth relative to the wrist point.
/// The wrist landmark gets z_im = 0 by construction.
LandmarkFrame make_landmark_frame(double t,
                                  const std::vector<std::pair<JointId, Vec3>>& points_mm,
                                  const JointId& wrist,
                                  const CameraIntrinsics& k);

/// Lifts every landmark of a frame to camera-centred 3D via fuse_depth +
/// backproject. Fails frame-level only when the wrist depth is unusable.
std::vector<std::pair<JointId, Vec3>> uplift_frame(const LandmarkFrame& frame);

/// Midpoint trajectory of the two wrist markers; the derived WB reference.
JointTrajectory derive_wb(const JointTrajectory& wib, const JointTrajectory& wob);

/// Per-sample Euclidean distance between two joints tracked by one system.
DistanceSeries distance_series(const JointTrajectory& a, const JointTrajectory& b,
                               DistanceLabel label);

/// Sum of the four finger-tip-to-thumb distances (the TT_ALL composite).
/// Inputs must carry labels IFT_TT, MT_TT, RFT_TT, PT_TT on a shared grid.
DistanceSeries tt_all(const DistanceSeries& index_tt, const DistanceSeries& middle_tt,
                      const DistanceSeries& ring_tt, const DistanceSeries& pinkie_tt);

/// Mean middle-finger-tip-to-wrist distance over a static hold, in cm.
/// Requires at least one second of samples. Values outside the plausible
/// adult band [12, 25] cm append a warning when a sink is provided.
double hand_length_cm(const JointTrajectory& mt, const JointTrajectory& wb,
                      std::vector<std::string>* warnings = nullptr);

/// Restricts both trajectories to their shared timestamps. Returns the
/// number of samples dropped from either input.
std::size_t intersect_grids(JointTrajectory& a, JointTrajectory& b);

} // namespace handval
