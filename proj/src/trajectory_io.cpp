#include "handval/trajectory_io.hpp"

#include "handval/digest.hpp"
#include "handval/errors.hpp"
#include "handval/kinematics.hpp"

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include <charconv>
#include <fstream>
#include <sstream>
#include <string_view>

namespace handval {

namespace {

using nlohmann::json;

constexpr std::string_view kWorldHeader = "t_s,joint,x_mm,y_mm,z_mm";
constexpr std::string_view kLandmarkHeader = "t_s,joint,u_px,v_px,z_im,d_wrist_mm";

std::string fmt_double(double v) { return fmt::format("{}", v); }

double parse_double(std::string_view sv, const std::string& origin, std::size_t line) {
    double v = 0.0;
    const auto* end = sv.data() + sv.size();
    auto [ptr, ec] = std::from_chars(sv.data(), end, v);
    if (ec != std::errc{} || ptr != end)
        throw ParseError(origin, line, fmt::format("'{}' is not a number", sv));
    return v;
}

std::vector<std::string_view> split_csv(std::string_view row) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = row.find(',', start);
        if (comma == std::string_view::npos) {
            out.push_back(row.substr(start));
            break;
        }
        out.push_back(row.substr(start, comma - start));
        start = comma + 1;
    }
    return out;
}

json metadata_to_json(const TrialMetadata& m) {
    json j;
    j["task"] = to_string(m.task);
    j["speed_bpm"] = m.speed_bpm ? json(*m.speed_bpm) : json(nullptr);
    j["distance_band"] = to_string(m.distance_band);
    j["viewing_angle"] = to_string(m.viewing_angle);
    j["subject_id"] = m.subject_id;
    j["duration_s"] = m.duration_s;
    return j;
}

TrialMetadata metadata_from_json(const json& j, const std::string& origin) {
    try {
        TrialMetadata m;
        m.task = task_from_string(j.at("task").get<std::string>());
        if (j.contains("speed_bpm") && !j.at("speed_bpm").is_null())
            m.speed_bpm = j.at("speed_bpm").get<int>();
        m.distance_band = distance_band_from_string(j.at("distance_band").get<std::string>());
        m.viewing_angle = viewing_angle_from_string(j.at("viewing_angle").get<std::string>());
        m.subject_id = j.at("subject_id").get<std::string>();
        m.duration_s = j.at("duration_s").get<double>();
        return m;
    } catch (const json::exception& e) {
        throw ParseError(origin, 1, fmt::format("bad metadata object: {}", e.what()));
    }
}

struct FrameRow {
    std::size_t line;
    double t;
    std::string joint;
    double u, v, z_im;
    bool has_d_wrist;
    double d_wrist;
};

} // namespace

std::string fnv1a64_hex(std::string_view bytes) { return fmt::format("{:016x}", fnv1a64(bytes)); }

std::string digest_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(fmt::format("cannot open {} for reading", path));
    std::ostringstream buf;
    buf << in.rdbuf();
    return fnv1a64_hex(buf.str());
}

std::string serialize_trial(const Trial& trial, FileSchema schema) {
    json header;
    header["format_version"] = kFormatVersion;
    header["schema"] = schema == FileSchema::WorldMm ? "world_mm" : "landmark_px";
    header["system"] = trial.system.label();
    header["fps"] = trial.fps;
    header["metadata"] = metadata_to_json(trial.metadata);
    if (schema == FileSchema::LandmarkPx) {
        if (!trial.intrinsics)
            throw IoError("landmark schema needs camera intrinsics");
        json k;
        k["fx"] = trial.intrinsics->fx;
        k["fy"] = trial.intrinsics->fy;
        k["cx"] = trial.intrinsics->cx;
        k["cy"] = trial.intrinsics->cy;
        header["intrinsics"] = k;
    }

    std::string out = header.dump();
    out.push_back('\n');

    if (schema == FileSchema::WorldMm) {
        out.append(kWorldHeader);
        out.push_back('\n');
        // Rows ordered by time; ties keep the trial's joint order.
        struct Row {
            double t;
            std::size_t joint_index;
            const TrajectorySample* s;
        };
        std::vector<Row> rows;
        for (std::size_t ji = 0; ji < trial.joints.size(); ++ji)
            for (const auto& s : trial.joints[ji].samples) rows.push_back({s.t, ji, &s});
        std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
            return a.t != b.t ? a.t < b.t : a.joint_index < b.joint_index;
        });
        for (const auto& r : rows)
            out += fmt::format("{},{},{},{},{}\n", fmt_double(r.t), trial.joints[r.joint_index].joint.name,
                               fmt_double(r.s->p.x()), fmt_double(r.s->p.y()), fmt_double(r.s->p.z()));
        return out;
    }

    // Landmark schema: re-encode each shared-timestamp frame about the wrist.
    const auto* wrist = trial.find(joints::WRIST);
    if (!wrist) throw IoError("landmark schema needs a WRIST joint trajectory");
    out.append(kLandmarkHeader);
    out.push_back('\n');
    std::vector<std::size_t> cursor(trial.joints.size(), 0);
    for (std::size_t i = 0; i < wrist->samples.size(); ++i) {
        const double t = wrist->samples[i].t;
        std::vector<std::pair<JointId, Vec3>> points;
        for (std::size_t ji = 0; ji < trial.joints.size(); ++ji) {
            const auto& joint = trial.joints[ji];
            while (cursor[ji] < joint.samples.size() && joint.samples[cursor[ji]].t < t)
                ++cursor[ji];
            if (cursor[ji] < joint.samples.size() && joint.samples[cursor[ji]].t == t)
                points.emplace_back(joint.joint, joint.samples[cursor[ji]].p);
        }
        const LandmarkFrame frame = make_landmark_frame(t, points, joints::WRIST, *trial.intrinsics);
        for (const auto& lm : frame.landmarks)
            out += fmt::format("{},{},{},{},{},{}\n", fmt_double(t), lm.joint.name, fmt_double(lm.u),
                               fmt_double(lm.v), fmt_double(lm.z_im), fmt_double(*frame.d_wrist_mm));
    }
    return out;
}

void write_trajectory_file(const std::string& path, const Trial& trial, FileSchema schema) {
    std::ofstream outfile(path, std::ios::binary);
    if (!outfile) throw IoError(fmt::format("cannot open {} for writing", path));
    outfile << serialize_trial(trial, schema);
    if (!outfile) throw IoError(fmt::format("failed writing {}", path));
}

Trial parse_trajectory_text(const std::string& text, const std::string& origin) {
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;

    if (!std::getline(in, line)) throw ParseError(origin, 1, "empty file");
    ++line_no;
    json header;
    try {
        header = json::parse(line);
    } catch (const json::exception& e) {
        throw ParseError(origin, 1, fmt::format("header is not valid JSON: {}", e.what()));
    }
    if (!header.contains("format_version"))
        throw ParseError(origin, 1, "header lacks the mandatory format_version field");
    if (header.at("format_version") != kFormatVersion)
        throw VersionUnsupportedError(
            fmt::format("{}: format_version {} unsupported (expected {})", origin,
                        header.at("format_version").dump(), kFormatVersion));

    std::string schema_name;
    try {
        schema_name = header.at("schema").get<std::string>();
    } catch (const json::exception&) {
        throw ParseError(origin, 1, "header lacks the schema field");
    }
    FileSchema schema;
    if (schema_name == "world_mm")
        schema = FileSchema::WorldMm;
    else if (schema_name == "landmark_px")
        schema = FileSchema::LandmarkPx;
    else
        throw SchemaMismatchError(fmt::format("{}: unknown schema '{}'", origin, schema_name));

    Trial trial;
    try {
        trial.system = tracking_system_from_label(header.at("system").get<std::string>());
        trial.fps = header.at("fps").get<double>();
    } catch (const json::exception& e) {
        throw ParseError(origin, 1, fmt::format("bad header: {}", e.what()));
    }
    if (!(trial.fps > 0.0)) throw ParseError(origin, 1, "fps must be positive");
    if (!header.contains("metadata")) throw ParseError(origin, 1, "header lacks the metadata object");
    trial.metadata = metadata_from_json(header.at("metadata"), origin);
    if (header.contains("intrinsics")) {
        try {
            const auto& k = header.at("intrinsics");
            trial.intrinsics = CameraIntrinsics{k.at("fx").get<double>(), k.at("fy").get<double>(),
                                                k.at("cx").get<double>(), k.at("cy").get<double>()};
        } catch (const json::exception& e) {
            throw ParseError(origin, 1, fmt::format("bad intrinsics object: {}", e.what()));
        }
    }
    if (schema == FileSchema::LandmarkPx && !trial.intrinsics)
        throw SchemaMismatchError(fmt::format("{}: landmark schema requires intrinsics", origin));

    if (!std::getline(in, line)) throw ParseError(origin, 2, "missing column header");
    ++line_no;
    const std::string_view expected = schema == FileSchema::WorldMm ? kWorldHeader : kLandmarkHeader;
    if (line != expected)
        throw SchemaMismatchError(
            fmt::format("{}:2: column header '{}' does not match schema row layout '{}'", origin, line,
                        expected));

    const std::size_t expected_fields = schema == FileSchema::WorldMm ? 5 : 6;
    std::vector<FrameRow> landmark_rows;
    double last_t = -std::numeric_limits<double>::infinity();

    auto joint_index = [&](const std::string& name) -> std::size_t {
        for (std::size_t i = 0; i < trial.joints.size(); ++i)
            if (trial.joints[i].joint.name == name) return i;
        JointTrajectory jt;
        jt.joint = JointId{name};
        jt.system = trial.system;
        jt.fps = trial.fps;
        trial.joints.push_back(std::move(jt));
        return trial.joints.size() - 1;
    };

    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) throw ParseError(origin, line_no, "blank row");
        const auto fields = split_csv(line);
        if (fields.size() != expected_fields)
            throw ParseError(origin, line_no,
                             fmt::format("{} fields, expected {}", fields.size(), expected_fields));
        const double t = parse_double(fields[0], origin, line_no);
        if (t < last_t)
            throw ParseError(origin, line_no, fmt::format("timestamp {} precedes previous row", t));
        last_t = t;
        const std::string joint_name{fields[1]};
        if (joint_name.empty()) throw ParseError(origin, line_no, "empty joint name");

        if (schema == FileSchema::WorldMm) {
            const double x = parse_double(fields[2], origin, line_no);
            const double y = parse_double(fields[3], origin, line_no);
            const double z = parse_double(fields[4], origin, line_no);
            if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(z))
                throw ParseError(origin, line_no, "non-finite coordinate");
            auto& jt = trial.joints[joint_index(joint_name)];
            if (!jt.samples.empty() && t <= jt.samples.back().t)
                throw ParseError(origin, line_no,
                                 fmt::format("joint {} timestamps not strictly increasing", joint_name));
            jt.samples.push_back({t, Vec3(x, y, z)});
        } else {
            FrameRow row;
            row.line = line_no;
            row.t = t;
            row.joint = joint_name;
            row.u = parse_double(fields[2], origin, line_no);
            row.v = parse_double(fields[3], origin, line_no);
            row.z_im = parse_double(fields[4], origin, line_no);
            row.has_d_wrist = !fields[5].empty();
            row.d_wrist = row.has_d_wrist ? parse_double(fields[5], origin, line_no) : 0.0;
            landmark_rows.push_back(std::move(row));
        }
    }

    if (schema == FileSchema::LandmarkPx) {
        std::size_t i = 0;
        while (i < landmark_rows.size()) {
            std::size_t j = i;
            while (j < landmark_rows.size() && landmark_rows[j].t == landmark_rows[i].t) ++j;

            LandmarkFrame frame;
            frame.t = landmark_rows[i].t;
            frame.intrinsics = *trial.intrinsics;
            bool hole = false;
            bool has_wrist = false;
            for (std::size_t r = i; r < j; ++r) {
                const auto& row = landmark_rows[r];
                if (!row.has_d_wrist) {
                    hole = true;
                } else if (frame.d_wrist_mm && *frame.d_wrist_mm != row.d_wrist) {
                    throw ParseError(origin, row.line, "rows of one frame disagree on d_wrist_mm");
                } else {
                    frame.d_wrist_mm = row.d_wrist;
                }
                if (row.joint == joints::WRIST.name) {
                    has_wrist = true;
                    if (std::abs(row.z_im) > 1e-12)
                        throw ParseError(origin, row.line,
                                         "the WRIST landmark must have z_im = 0 by construction");
                }
                frame.landmarks.push_back({JointId{row.joint}, row.u, row.v, row.z_im});
            }
            if (hole || !has_wrist || !frame.d_wrist_mm) {
                ++trial.dropped_frames; // depth hole or missing wrist reference
            } else {
                for (const auto& [joint, p] : uplift_frame(frame)) {
                    auto& jt = trial.joints[joint_index(joint.name)];
                    if (!jt.samples.empty() && frame.t <= jt.samples.back().t)
                        throw ParseError(origin, landmark_rows[i].line,
                                         fmt::format("joint {} timestamps not strictly increasing",
                                                     joint.name));
                    jt.samples.push_back({frame.t, p});
                }
            }
            i = j;
        }
        if (trial.dropped_frames > 0)
            trial.warnings.push_back(fmt::format(
                "{} frames skipped (wrist depth hole or missing wrist landmark)", trial.dropped_frames));
    }

    for (const auto& jt : trial.joints) {
        validate_trajectory(jt);
        for (auto& w : spacing_warnings(jt)) trial.warnings.push_back(std::move(w));
    }
    for (auto& w : protocol_warnings(trial.metadata)) trial.warnings.push_back(std::move(w));
    return trial;
}

Trial parse_trajectory_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(fmt::format("cannot open {} for reading", path));
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_trajectory_text(buf.str(), path);
}

} // namespace handval
