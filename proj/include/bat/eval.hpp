#pragma once

#include <string>
#include <utility>
#include <vector>

#include "bat/tracker.hpp"

namespace bat {

// Per-frame overlap and center distance between prediction and ground truth,
// frames 1..T-1 (the first box is given, not predicted).
std::vector<double> per_frame_iou(const TrackResult& results, const TrackSequence& gt);
std::vector<double> per_frame_distance(const TrackResult& results, const TrackSequence& gt);

// 100 x mean IoU: the exact area under the success-rate-vs-threshold step
// function. Sequences with no evaluated frames score 100.
double success_score(const TrackResult& results, const TrackSequence& gt);

// 100 x mean of clamp((2 - d)/2, 0, 1): the exact normalized area under the
// precision-vs-distance-threshold curve over [0, 2] meters.
double precision_score(const TrackResult& results, const TrackSequence& gt);

struct OpeScores {
    double success = 100.0;
    double precision = 100.0;
    std::size_t frames = 0;
};

// Frame-weighted aggregate over paired (results, ground truth) sequences;
// pairs must line up by id.
OpeScores ope_scores(const std::vector<TrackResult>& results,
                     const std::vector<TrackSequence>& gt);

struct SparsityBin {
    double lo = 0.0;
    double hi = 0.0;
    std::size_t count = 0;
    bool occupied = false;
    double mean_success = 0.0;
};

// Groups sequences by the number of points inside the first frame's box and
// averages per-sequence Success within each bin. Edges must ascend; bins are
// [0, e0), [e0, e1), ..., [last, inf).
std::vector<SparsityBin> sparsity_report(const std::vector<TrackResult>& results,
                                         const std::vector<TrackSequence>& gt,
                                         const std::vector<double>& edges = {10, 30, 50, 100,
                                                                             150});

struct BoxcloudMseReport {
    std::vector<double> edges;
    std::vector<std::size_t> counts;
    std::vector<double> mses;
    std::size_t points = 0;
    double median = 0.0;
};

std::vector<std::size_t> histogram(const std::vector<double>& values,
                                   const std::vector<double>& edges);

// Per-point squared error between the predicted and true box coordinates of
// in-box search seeds, collected over ShortTerm-style frame pairs.
BoxcloudMseReport boxcloud_mse_report(const BatModel& model,
                                      const std::vector<TrackSequence>& sequences,
                                      const TrackerConfig& tcfg, std::uint64_t seed,
                                      const std::vector<double>& edges = {0.05, 0.1, 0.2, 0.5,
                                                                          1.0, 2.0, 5.0});

// Plot-ready (threshold, fraction-above) pairs on an even grid.
std::vector<std::pair<double, double>> success_curve(const std::vector<double>& ious,
                                                     std::size_t n_points = 101);
std::vector<std::pair<double, double>> precision_curve(const std::vector<double>& distances,
                                                       std::size_t n_points = 101);

struct SeqScore {
    std::string id;
    double success = 0.0;
    double precision = 0.0;
    std::size_t frames = 0;
};

void write_scores_csv(const std::string& path, const std::vector<SeqScore>& rows,
                      const OpeScores& total);
void write_curve(const std::string& path, const std::vector<std::pair<double, double>>& points);
void write_sparsity_csv(const std::string& path, const std::vector<SparsityBin>& bins);
void write_mse_csv(const std::string& path, const BoxcloudMseReport& report);

}  // namespace bat
