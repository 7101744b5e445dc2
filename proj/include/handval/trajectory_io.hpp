#pragma once

#include "handval/trial.hpp"

#include <string>

namespace handval {

enum class FileSchema { WorldMm, LandmarkPx };

inline constexpr int kFormatVersion = 1;

/// Serialises a trial: one JSON header line, one column-header line, then
/// CSV rows ordered by time. Floats use shortest round-trip formatting so
/// parse(emit(trial)) reproduces the data model exactly. The landmark schema
/// encodes each frame relative to the wrist depth and requires a WRIST joint
/// and camera intrinsics.
std::string serialize_trial(const Trial& trial, FileSchema schema);

void write_trajectory_file(const std::string& path, const Trial& trial, FileSchema schema);

/// Strict parser for both schemas. Malformed content aborts with the file
/// path and line number; landmark frames whose wrist depth is a depth-map
/// hole are skipped and counted, never treated as zero.
Trial parse_trajectory_file(const std::string& path);

/// Parses from memory; `origin` names the source in error messages.
Trial parse_trajectory_text(const std::string& text, const std::string& origin);

} // namespace handval
