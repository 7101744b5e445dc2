#pragma once

#include "handval/types.hpp"

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace handval {

/// One tracking system's view of one recorded trial: every joint trajectory
/// plus the trial metadata. Produced by the file parser and by the synthetic
/// generator alike.
struct Trial {
    TrialMetadata metadata;
    TrackingSystem system;
    double fps = 0.0;
    std::optional<CameraIntrinsics> intrinsics;
    std::vector<JointTrajectory> joints;
    std::size_t dropped_frames = 0; // frames skipped at ingest (depth holes etc.)
    std::vector<std::string> warnings;

    const JointTrajectory* find(const JointId& joint) const;
    JointTrajectory* find(const JointId& joint);
    bool has(const JointId& joint) const { return find(joint) != nullptr; }
};

} // namespace handval
