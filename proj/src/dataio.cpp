#include "bat/dataio.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace bat {

namespace {

float read_f32le(const unsigned char* p) {
    std::uint32_t bits = 0;
    for (int i = 0; i < 4; ++i) bits |= static_cast<std::uint32_t>(p[i]) << (8 * i);
    return std::bit_cast<float>(bits);
}

void write_f32le(std::string& out, float v) {
    std::uint32_t bits = std::bit_cast<std::uint32_t>(v);
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

}  // namespace

PointCloud read_velodyne_scan(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw FormatError("cannot open scan: " + path);
    std::string buf(std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>{});
    if (buf.size() % 16 != 0)
        throw FormatError("scan " + path + " has " + std::to_string(buf.size()) +
                          " bytes, not a multiple of 16");
    const std::size_t n = buf.size() / 16;
    PointCloud out(n, 3);
    const unsigned char* p = reinterpret_cast<const unsigned char*>(buf.data());
    for (std::size_t i = 0; i < n; ++i) {
        out.at(i, 0) = read_f32le(p + 16 * i);
        out.at(i, 1) = read_f32le(p + 16 * i + 4);
        out.at(i, 2) = read_f32le(p + 16 * i + 8);
    }
    return out;
}

void write_velodyne_scan(const std::string& path, const PointCloud& points) {
    if (points.cols() != 3 && points.rows() != 0)
        throw DimensionError("scan points must be (n,3), got " + std::to_string(points.cols()) +
                             " columns");
    std::string out;
    out.reserve(points.rows() * 16);
    for (std::size_t i = 0; i < points.rows(); ++i) {
        write_f32le(out, static_cast<float>(points.at(i, 0)));
        write_f32le(out, static_cast<float>(points.at(i, 1)));
        write_f32le(out, static_cast<float>(points.at(i, 2)));
        write_f32le(out, 0.0f);
    }
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw FormatError("cannot open scan for writing: " + path);
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!f) throw FormatError("write failed for scan: " + path);
}

std::vector<TrackSequence> read_annotations(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ParseError("cannot open annotations: " + path);

    std::vector<TrackSequence> sequences;
    std::map<std::string, std::size_t> by_id;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(f, line)) {
        ++line_no;
        const std::string where = path + " line " + std::to_string(line_no);
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        std::istringstream in(line);
        std::string id;
        if (!(in >> id)) continue;
        std::size_t frame_idx;
        double v[7];
        if (!(in >> frame_idx >> v[0] >> v[1] >> v[2] >> v[3] >> v[4] >> v[5] >> v[6]))
            throw ParseError("malformed record at " + where);
        std::string extra;
        if (in >> extra) throw ParseError("trailing tokens at " + where);

        Frame frame;
        try {
            frame.box = Box7({v[0], v[1], v[2]}, v[3], v[4], v[5], v[6]);
        } catch (const ArgumentError& e) {
            throw ParseError(std::string(e.what()) + " at " + where);
        }
        frame.index = frame_idx;

        auto it = by_id.find(id);
        if (it == by_id.end()) {
            by_id[id] = sequences.size();
            sequences.push_back({id, "synthetic", {}});
            it = by_id.find(id);
        }
        for (const Frame& existing : sequences[it->second].frames)
            if (existing.index == frame_idx)
                throw ParseError("duplicate frame " + std::to_string(frame_idx) + " for sequence " +
                                 id + " at " + where);
        sequences[it->second].frames.push_back(std::move(frame));
    }
    for (auto& seq : sequences)
        std::sort(seq.frames.begin(), seq.frames.end(),
                  [](const Frame& a, const Frame& b) { return a.index < b.index; });
    return sequences;
}

void write_annotations(const std::string& path, const std::vector<TrackSequence>& sequences) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw FormatError("cannot open annotations for writing: " + path);
    f.precision(17);
    for (const auto& seq : sequences)
        for (const auto& fr : seq.frames)
            f << seq.id << ' ' << fr.index << ' ' << fr.box.center.x << ' ' << fr.box.center.y
              << ' ' << fr.box.center.z << ' ' << fr.box.w << ' ' << fr.box.l << ' ' << fr.box.h
              << ' ' << fr.box.heading << '\n';
    if (!f) throw FormatError("write failed for annotations: " + path);
}

std::string scan_path(const std::string& dir, const std::string& seq_id, std::size_t frame_idx) {
    char name[32];
    std::snprintf(name, sizeof(name), "%06zu.bin", frame_idx);
    return dir + "/" + seq_id + "/" + name;
}

std::vector<TrackSequence> load_dataset(const std::string& dir) {
    auto sequences = read_annotations(dir + "/annotations.txt");
    for (auto& seq : sequences)
        for (auto& fr : seq.frames) fr.points = read_velodyne_scan(scan_path(dir, seq.id, fr.index));
    return sequences;
}

void write_dataset(const std::string& dir, const std::vector<TrackSequence>& sequences) {
    std::filesystem::create_directories(dir);
    write_annotations(dir + "/annotations.txt", sequences);
    for (const auto& seq : sequences) {
        std::filesystem::create_directories(dir + "/" + seq.id);
        for (const auto& fr : seq.frames)
            write_velodyne_scan(scan_path(dir, seq.id, fr.index), fr.points);
    }
}

namespace {

TargetShape parse_shape(const std::string& s) {
    if (s == "cuboid") return TargetShape::Cuboid;
    if (s == "lshape") return TargetShape::LShape;
    if (s == "cylinder") return TargetShape::Cylinder;
    throw ConfigError("unknown shape: " + s);
}

const char* shape_name(TargetShape s) {
    switch (s) {
        case TargetShape::Cuboid: return "cuboid";
        case TargetShape::LShape: return "lshape";
        case TargetShape::Cylinder: return "cylinder";
    }
    return "cuboid";
}

std::vector<double> parse_numbers(const std::string& s, const std::string& key) {
    std::istringstream in(s);
    std::vector<double> out;
    double v;
    while (in >> v) out.push_back(v);
    if (!in.eof()) throw ConfigError("key " + key + " holds non-numeric data: " + s);
    return out;
}

std::vector<Waypoint> parse_waypoints(const std::string& s, const std::string& key) {
    std::vector<Waypoint> out;
    std::istringstream groups(s);
    std::string part;
    while (std::getline(groups, part, ';')) {
        auto nums = parse_numbers(part, key);
        if (nums.empty()) continue;
        if (nums.size() != 4)
            throw ConfigError("key " + key + " needs 'x y z heading' per waypoint, got " + part);
        out.push_back({{nums[0], nums[1], nums[2]}, nums[3]});
    }
    if (out.empty()) throw ConfigError("key " + key + " holds no waypoints");
    return out;
}

std::string format_waypoints(const std::vector<Waypoint>& ws) {
    std::ostringstream out;
    out.precision(17);
    for (std::size_t i = 0; i < ws.size(); ++i) {
        if (i) out << " ; ";
        out << ws[i].position.x << ' ' << ws[i].position.y << ' ' << ws[i].position.z << ' '
            << ws[i].heading;
    }
    return out.str();
}

BodySpec parse_body(const Config& cfg, const std::string& prefix) {
    BodySpec body;
    body.shape = parse_shape(cfg.get_str(prefix + ".shape", "cuboid"));
    auto size = parse_numbers(cfg.get_str(prefix + ".size", "1.8 4.2 1.6"), prefix + ".size");
    if (size.size() != 3) throw ConfigError("key " + prefix + ".size needs 'w l h'");
    body.w = size[0];
    body.l = size[1];
    body.h = size[2];
    body.waypoints = parse_waypoints(cfg.get_str(prefix + ".waypoints"), prefix + ".waypoints");
    return body;
}

}  // namespace

SceneSpec SceneSpec::from_config(const Config& cfg) {
    SceneSpec spec;
    spec.id = cfg.get_str("id", spec.id);
    spec.category = cfg.get_str("category", spec.category);
    long frames = cfg.get_int("frames", static_cast<long>(spec.frames));
    if (frames < 1) throw ConfigError("frames must be at least 1");
    spec.frames = static_cast<std::size_t>(frames);
    spec.seed = static_cast<std::uint64_t>(cfg.get_int("seed", 0));
    spec.target = parse_body(cfg, "target");

    long nd = cfg.get_int("distractors", 0);
    if (nd < 0) throw ConfigError("distractors must be nonnegative");
    for (long i = 0; i < nd; ++i)
        spec.distractors.push_back(parse_body(cfg, "distractor" + std::to_string(i)));

    auto origin = parse_numbers(cfg.get_str("sensor.origin", "0 0 1"), "sensor.origin");
    if (origin.size() != 3) throw ConfigError("key sensor.origin needs 'x y z'");
    spec.sensor_origin = {origin[0], origin[1], origin[2]};
    spec.angular_resolution =
        cfg.get_double("sensor.angular_resolution", spec.angular_resolution);
    spec.max_range = cfg.get_double("sensor.max_range", spec.max_range);
    spec.dropout = cfg.get_double("sensor.dropout", spec.dropout);
    if (spec.angular_resolution <= 0.0) throw ConfigError("sensor.angular_resolution must be > 0");
    if (spec.max_range <= 0.0) throw ConfigError("sensor.max_range must be > 0");
    if (spec.dropout < 0.0 || spec.dropout > 1.0)
        throw ConfigError("sensor.dropout must lie in [0, 1]");
    return spec;
}

Config SceneSpec::to_config() const {
    Config cfg;
    cfg.set("id", id);
    cfg.set("category", category);
    cfg.set("frames", std::to_string(frames));
    cfg.set("seed", std::to_string(seed));
    auto put_body = [&cfg](const std::string& prefix, const BodySpec& body) {
        cfg.set(prefix + ".shape", shape_name(body.shape));
        std::ostringstream size;
        size.precision(17);
        size << body.w << ' ' << body.l << ' ' << body.h;
        cfg.set(prefix + ".size", size.str());
        cfg.set(prefix + ".waypoints", format_waypoints(body.waypoints));
    };
    put_body("target", target);
    cfg.set("distractors", std::to_string(distractors.size()));
    for (std::size_t i = 0; i < distractors.size(); ++i)
        put_body("distractor" + std::to_string(i), distractors[i]);
    std::ostringstream origin;
    origin.precision(17);
    origin << sensor_origin.x << ' ' << sensor_origin.y << ' ' << sensor_origin.z;
    cfg.set("sensor.origin", origin.str());
    std::ostringstream ar, mr, dr;
    ar.precision(17);
    mr.precision(17);
    dr.precision(17);
    ar << angular_resolution;
    mr << max_range;
    dr << dropout;
    cfg.set("sensor.angular_resolution", ar.str());
    cfg.set("sensor.max_range", mr.str());
    cfg.set("sensor.dropout", dr.str());
    return cfg;
}

namespace {

// Shell samples hug the surface but sit a hair inside the bounding box so
// containment survives frame round trips.
constexpr double kInset = 0.998;

struct SurfacePoint {
    Vec3 p;
    Vec3 n;
};

std::size_t steps_for(double extent, double spacing) {
    return std::max<std::size_t>(2, static_cast<std::size_t>(extent / spacing) + 1);
}

void sample_cuboid(double w, double l, double h, double spacing,
                   std::vector<SurfacePoint>& out, Vec3 shift = {0, 0, 0}) {
    const double hx = 0.5 * w, hy = 0.5 * l, hz = 0.5 * h;
    const double half[3] = {hx, hy, hz};
    for (int axis = 0; axis < 3; ++axis)
        for (int sign = -1; sign <= 1; sign += 2) {
            int u = (axis + 1) % 3, v = (axis + 2) % 3;
            std::size_t nu = steps_for(2 * half[u], spacing);
            std::size_t nv = steps_for(2 * half[v], spacing);
            for (std::size_t i = 0; i < nu; ++i)
                for (std::size_t j = 0; j < nv; ++j) {
                    double c[3];
                    c[axis] = sign * half[axis];
                    c[u] = -half[u] + 2 * half[u] * (nu == 1 ? 0.5 : double(i) / (nu - 1));
                    c[v] = -half[v] + 2 * half[v] * (nv == 1 ? 0.5 : double(j) / (nv - 1));
                    Vec3 n{0, 0, 0};
                    (&n.x)[axis] = sign;
                    out.push_back({Vec3{c[0], c[1], c[2]} + shift, n});
                }
        }
}

std::vector<SurfacePoint> sample_shape(const BodySpec& body, double spacing) {
    std::vector<SurfacePoint> out;
    const double w = kInset * body.w, l = kInset * body.l, h = kInset * body.h;
    switch (body.shape) {
        case TargetShape::Cuboid: {
            sample_cuboid(w, l, h, spacing, out);
            break;
        }
        case TargetShape::LShape: {
            // Two blocks meeting at the origin corner: a long spine along +-y
            // on the -x side and a short foot on the +x side, rear half.
            sample_cuboid(w / 2, l, h, spacing, out, {-w / 4, 0, 0});
            sample_cuboid(w / 2, l / 2, h, spacing, out, {w / 4, -l / 4, 0});
            break;
        }
        case TargetShape::Cylinder: {
            const double r = 0.5 * std::min(w, l);
            std::size_t na = std::max<std::size_t>(8, static_cast<std::size_t>(2 * M_PI * r / spacing) + 1);
            std::size_t nz = steps_for(h, spacing);
            for (std::size_t a = 0; a < na; ++a) {
                double ang = 2 * M_PI * double(a) / double(na);
                Vec3 n{std::cos(ang), std::sin(ang), 0.0};
                for (std::size_t zi = 0; zi < nz; ++zi) {
                    double z = -h / 2 + h * (nz == 1 ? 0.5 : double(zi) / (nz - 1));
                    out.push_back({{r * n.x, r * n.y, z}, n});
                }
            }
            for (int sign = -1; sign <= 1; sign += 2) {
                std::size_t nr = std::max<std::size_t>(1, static_cast<std::size_t>(r / spacing));
                for (std::size_t ri = 1; ri <= nr; ++ri) {
                    double rr = r * double(ri) / double(nr);
                    std::size_t nc = std::max<std::size_t>(4, static_cast<std::size_t>(2 * M_PI * rr / spacing));
                    for (std::size_t a = 0; a < nc; ++a) {
                        double ang = 2 * M_PI * double(a) / double(nc);
                        out.push_back({{rr * std::cos(ang), rr * std::sin(ang), sign * h / 2},
                                       {0.0, 0.0, double(sign)}});
                    }
                }
                out.push_back({{0.0, 0.0, sign * h / 2}, {0.0, 0.0, double(sign)}});
            }
            break;
        }
    }
    return out;
}

Waypoint interpolate(const std::vector<Waypoint>& ws, double u) {
    if (ws.size() == 1) return ws[0];
    double s = u * double(ws.size() - 1);
    std::size_t i = std::min(static_cast<std::size_t>(s), ws.size() - 2);
    double f = s - double(i);
    Waypoint out;
    out.position = ws[i].position * (1.0 - f) + ws[i + 1].position * f;
    out.heading = ws[i].heading * (1.0 - f) + ws[i + 1].heading * f;
    return out;
}

std::uint64_t stream_seed(std::uint64_t base, std::size_t frame, std::size_t body) {
    std::uint64_t x = base;
    x ^= 0x9E3779B97F4A7C15ull * (static_cast<std::uint64_t>(frame) + 1);
    x ^= 0xBF58476D1CE4E5B9ull * (static_cast<std::uint64_t>(body) + 1);
    return x;
}

Box7 body_box(const BodySpec& body, double u) {
    Waypoint wp = interpolate(body.waypoints, u);
    return Box7(wp.position, body.w, body.l, body.h, wrap_angle(wp.heading));
}

void append_body_points(const BodySpec& body, const Box7& box, const SceneSpec& spec,
                        Rng& rng, std::vector<Vec3>& out) {
    double range_to_center = (box.center - spec.sensor_origin).norm();
    double spacing = std::max(0.02, spec.angular_resolution * std::max(1.0, range_to_center));
    auto surface = sample_shape(body, spacing);
    const double c = std::cos(box.heading), s = std::sin(box.heading);
    for (const auto& sp : surface) {
        Vec3 p = from_object_frame(sp.p, box);
        Vec3 n{c * sp.n.x - s * sp.n.y, s * sp.n.x + c * sp.n.y, sp.n.z};
        Vec3 to_sensor = spec.sensor_origin - p;
        if (n.dot(to_sensor) <= 1e-9) continue;
        if (to_sensor.norm() > spec.max_range) continue;
        if (spec.dropout > 0.0 && rng.uniform() < spec.dropout) continue;
        out.push_back(p);
    }
}

}  // namespace

TrackSequence generate_scene(const SceneSpec& spec) {
    if (spec.frames < 1) throw ArgumentError("scene needs at least one frame");
    if (spec.dropout < 0.0 || spec.dropout > 1.0)
        throw ArgumentError("dropout must lie in [0, 1]");

    TrackSequence seq;
    seq.id = spec.id;
    seq.category = spec.category;
    seq.frames.resize(spec.frames);
    for (std::size_t t = 0; t < spec.frames; ++t) {
        double u = spec.frames == 1 ? 0.0 : double(t) / double(spec.frames - 1);
        Box7 gt = body_box(spec.target, u);

        std::vector<Vec3> pts;
        Rng target_rng(stream_seed(spec.seed, t, 0));
        append_body_points(spec.target, gt, spec, target_rng, pts);
        for (std::size_t d = 0; d < spec.distractors.size(); ++d) {
            Rng rng(stream_seed(spec.seed, t, d + 1));
            append_body_points(spec.distractors[d], body_box(spec.distractors[d], u), spec, rng,
                               pts);
        }

        Frame& frame = seq.frames[t];
        frame.index = t;
        frame.box = gt;
        frame.points = Mat(pts.size(), 3);
        for (std::size_t i = 0; i < pts.size(); ++i) frame.points.set_row3(i, pts[i]);
    }
    return seq;
}

std::pair<std::vector<TrackSequence>, std::vector<TrackSequence>> split_train_test(
    const std::vector<TrackSequence>& sequences, double ratio, std::uint64_t seed) {
    if (!(ratio > 0.0 && ratio < 1.0))
        throw ArgumentError("split ratio must lie strictly between 0 and 1");

    std::vector<std::string> ids;
    for (const auto& s : sequences) ids.push_back(s.id);
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());

    Rng rng(seed);
    for (std::size_t i = ids.size(); i > 1; --i)
        std::swap(ids[i - 1], ids[rng.index(i)]);

    std::size_t n_train = static_cast<std::size_t>(std::llround(ratio * double(ids.size())));
    std::set<std::string> train_ids(ids.begin(), ids.begin() + n_train);

    std::pair<std::vector<TrackSequence>, std::vector<TrackSequence>> out;
    for (const auto& s : sequences)
        (train_ids.count(s.id) ? out.first : out.second).push_back(s);
    return out;
}

std::size_t points_in_box(const PointCloud& points, const Box7& box) {
    std::size_t n = 0;
    for (std::size_t i = 0; i < points.rows(); ++i)
        if (contains(box, points.row3(i))) ++n;
    return n;
}

bool has_points_in_first_box(const TrackSequence& seq) {
    if (seq.frames.empty()) return false;
    return points_in_box(seq.frames[0].points, seq.frames[0].box) > 0;
}

}  // namespace bat
