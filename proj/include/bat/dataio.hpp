#pragma once

#include <string>
#include <utility>
#include <vector>

#include "bat/box.hpp"
#include "bat/common.hpp"
#include "bat/config.hpp"

namespace bat {

struct Frame {
    PointCloud points;
    Box7 box;
    std::size_t index = 0;
};

struct TrackSequence {
    std::string id;
    std::string category = "synthetic";
    std::vector<Frame> frames;
};

enum class TargetShape { Cuboid, LShape, Cylinder };

struct Waypoint {
    Vec3 position;
    double heading = 0.0;
};

struct BodySpec {
    TargetShape shape = TargetShape::Cuboid;
    double w = 1.8, l = 4.2, h = 1.6;
    std::vector<Waypoint> waypoints;
};

// Everything needed to generate one synthetic sequence deterministically.
struct SceneSpec {
    std::string id = "seq";
    std::string category = "synthetic";
    std::size_t frames = 20;
    std::uint64_t seed = 0;
    BodySpec target;
    std::vector<BodySpec> distractors;
    Vec3 sensor_origin{0.0, 0.0, 1.0};
    // Radians between adjacent sample rays; point spacing grows with range.
    double angular_resolution = 0.004;
    double max_range = 120.0;
    double dropout = 0.0;

    static SceneSpec from_config(const Config& cfg);
    Config to_config() const;
};

// 16-byte little-endian float records (x, y, z, intensity); intensity is
// dropped on read and written as zero.
PointCloud read_velodyne_scan(const std::string& path);
void write_velodyne_scan(const std::string& path, const PointCloud& points);

// One whitespace-separated record per line: seq_id frame_idx x y z w l h
// theta. '#' starts a comment. Frames come back grouped by id and sorted.
// The returned sequences carry empty point clouds.
std::vector<TrackSequence> read_annotations(const std::string& path);
void write_annotations(const std::string& path, const std::vector<TrackSequence>& sequences);

// Annotations at <dir>/annotations.txt, scans at <dir>/<seq_id>/<frame>.bin
// with the frame index printed as six digits.
std::vector<TrackSequence> load_dataset(const std::string& dir);
void write_dataset(const std::string& dir, const std::vector<TrackSequence>& sequences);
std::string scan_path(const std::string& dir, const std::string& seq_id, std::size_t frame_idx);

TrackSequence generate_scene(const SceneSpec& spec);

// Deterministic disjoint split by sequence id.
std::pair<std::vector<TrackSequence>, std::vector<TrackSequence>> split_train_test(
    const std::vector<TrackSequence>& sequences, double ratio, std::uint64_t seed);

// Sequences whose first box holds no points cannot seed a tracker and are
// skipped by evaluation.
bool has_points_in_first_box(const TrackSequence& seq);

std::size_t points_in_box(const PointCloud& points, const Box7& box);

}  // namespace bat
