#include "bat/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "bat/boxcloud.hpp"

namespace bat {

namespace {

void check_paired(const TrackResult& results, const TrackSequence& gt) {
    if (results.frames.size() != gt.frames.size())
        throw ArgumentError("evaluation needs one prediction per ground-truth frame, got " +
                            std::to_string(results.frames.size()) + " vs " +
                            std::to_string(gt.frames.size()));
}

double mean_or_perfect(const std::vector<double>& values) {
    if (values.empty()) return 1.0;
    double sum = 0.0;
    for (double v : values) sum += v;
    return sum / double(values.size());
}

}  // namespace

std::vector<double> per_frame_iou(const TrackResult& results, const TrackSequence& gt) {
    check_paired(results, gt);
    std::vector<double> out;
    for (std::size_t t = 1; t < gt.frames.size(); ++t)
        out.push_back(iou_3d(results.frames[t].box, gt.frames[t].box));
    return out;
}

std::vector<double> per_frame_distance(const TrackResult& results, const TrackSequence& gt) {
    check_paired(results, gt);
    std::vector<double> out;
    for (std::size_t t = 1; t < gt.frames.size(); ++t)
        out.push_back((results.frames[t].box.center - gt.frames[t].box.center).norm());
    return out;
}

double success_score(const TrackResult& results, const TrackSequence& gt) {
    return 100.0 * mean_or_perfect(per_frame_iou(results, gt));
}

double precision_score(const TrackResult& results, const TrackSequence& gt) {
    auto dists = per_frame_distance(results, gt);
    std::vector<double> scores;
    scores.reserve(dists.size());
    for (double d : dists) scores.push_back(std::clamp((2.0 - d) / 2.0, 0.0, 1.0));
    return 100.0 * mean_or_perfect(scores);
}

OpeScores ope_scores(const std::vector<TrackResult>& results,
                     const std::vector<TrackSequence>& gt) {
    if (results.size() != gt.size())
        throw ArgumentError("evaluation needs one result set per sequence");
    OpeScores total;
    double iou_sum = 0.0, prec_sum = 0.0;
    for (std::size_t s = 0; s < gt.size(); ++s) {
        if (results[s].seq_id != gt[s].id)
            throw ArgumentError("result/ground-truth pairing mismatch: " + results[s].seq_id +
                                " vs " + gt[s].id);
        for (double u : per_frame_iou(results[s], gt[s])) {
            iou_sum += u;
            ++total.frames;
        }
        for (double d : per_frame_distance(results[s], gt[s]))
            prec_sum += std::clamp((2.0 - d) / 2.0, 0.0, 1.0);
    }
    if (total.frames > 0) {
        total.success = 100.0 * iou_sum / double(total.frames);
        total.precision = 100.0 * prec_sum / double(total.frames);
    }
    return total;
}

std::vector<SparsityBin> sparsity_report(const std::vector<TrackResult>& results,
                                         const std::vector<TrackSequence>& gt,
                                         const std::vector<double>& edges) {
    if (results.size() != gt.size())
        throw ArgumentError("sparsity report needs one result set per sequence");
    if (edges.empty()) throw ArgumentError("sparsity report needs at least one bin edge");
    for (std::size_t i = 1; i < edges.size(); ++i)
        if (edges[i] <= edges[i - 1]) throw ArgumentError("bin edges must ascend");

    std::vector<SparsityBin> bins(edges.size() + 1);
    for (std::size_t b = 0; b < bins.size(); ++b) {
        bins[b].lo = b == 0 ? 0.0 : edges[b - 1];
        bins[b].hi = b == edges.size() ? std::numeric_limits<double>::infinity() : edges[b];
    }

    for (std::size_t s = 0; s < gt.size(); ++s) {
        if (gt[s].frames.empty()) continue;
        double n = double(points_in_box(gt[s].frames[0].points, gt[s].frames[0].box));
        std::size_t b = 0;
        while (b < edges.size() && n >= edges[b]) ++b;
        bins[b].mean_success += success_score(results[s], gt[s]);
        bins[b].count += 1;
    }
    for (auto& bin : bins) {
        bin.occupied = bin.count > 0;
        if (bin.occupied) bin.mean_success /= double(bin.count);
    }
    return bins;
}

std::vector<std::size_t> histogram(const std::vector<double>& values,
                                   const std::vector<double>& edges) {
    for (std::size_t i = 1; i < edges.size(); ++i)
        if (edges[i] <= edges[i - 1]) throw ArgumentError("histogram edges must ascend");
    std::vector<std::size_t> counts(edges.size() + 1, 0);
    for (double v : values) {
        std::size_t b = 0;
        while (b < edges.size() && v >= edges[b]) ++b;
        counts[b] += 1;
    }
    return counts;
}

BoxcloudMseReport boxcloud_mse_report(const BatModel& model,
                                      const std::vector<TrackSequence>& sequences,
                                      const TrackerConfig& tcfg, std::uint64_t seed,
                                      const std::vector<double>& edges) {
    BoxcloudMseReport report;
    report.edges = edges;
    Rng rng(seed);
    for (const auto& seq : sequences) {
        for (std::size_t t = 1; t < seq.frames.size(); ++t) {
            std::vector<HistoryEntry> history = {{&seq.frames[0].points, seq.frames[0].box}};
            std::pair<PointCloud, Box7> tmpl;
            PointCloud search;
            const Box7& ref = seq.frames[t - 1].box;
            try {
                tmpl = make_template(history, TemplateStrategy::FirstGT, tcfg.n_template_points,
                                     rng);
                search = make_search_area(seq.frames[t].points, ref, tcfg.search_margin,
                                          tcfg.n_search_points, rng);
            } catch (const EmptySetError&) {
                continue;
            }
            auto fwd = model.forward(tmpl.first, tmpl.second, search, nullptr);

            Vec3 gt_center = to_object_frame(seq.frames[t].box.center, ref);
            Box7 gt_local(gt_center, seq.frames[t].box.w, seq.frames[t].box.l, seq.frames[t].box.h,
                          wrap_angle(seq.frames[t].box.heading - ref.heading));
            Mat truth = compute_boxcloud(fwd.fused.positions, gt_local);
            for (std::size_t i = 0; i < fwd.fused.positions.rows(); ++i) {
                if (!contains(gt_local, fwd.fused.positions.row3(i))) continue;
                double sq = 0.0;
                for (std::size_t j = 0; j < 9; ++j) {
                    double diff = fwd.fused.predicted_boxcloud[i * 9 + j] - truth.at(i, j);
                    sq += diff * diff;
                }
                report.mses.push_back(sq / 9.0);
            }
        }
    }
    report.points = report.mses.size();
    report.counts = histogram(report.mses, edges);
    if (!report.mses.empty()) {
        std::vector<double> sorted = report.mses;
        std::sort(sorted.begin(), sorted.end());
        std::size_t n = sorted.size();
        report.median = n % 2 == 1 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
    }
    return report;
}

namespace {

std::vector<std::pair<double, double>> fraction_above_curve(const std::vector<double>& values,
                                                            double lo, double hi,
                                                            std::size_t n_points) {
    if (n_points < 2) throw ArgumentError("curves need at least two points");
    std::vector<std::pair<double, double>> out;
    out.reserve(n_points);
    for (std::size_t i = 0; i < n_points; ++i) {
        double tau = lo + (hi - lo) * double(i) / double(n_points - 1);
        std::size_t above = 0;
        for (double v : values)
            if (v > tau) ++above;
        out.push_back({tau, values.empty() ? 1.0 : double(above) / double(values.size())});
    }
    return out;
}

}  // namespace

std::vector<std::pair<double, double>> success_curve(const std::vector<double>& ious,
                                                     std::size_t n_points) {
    return fraction_above_curve(ious, 0.0, 1.0, n_points);
}

std::vector<std::pair<double, double>> precision_curve(const std::vector<double>& distances,
                                                       std::size_t n_points) {
    // Precision counts frames CLOSER than the threshold, so flip the sign.
    std::vector<double> negated;
    negated.reserve(distances.size());
    for (double d : distances) negated.push_back(-d);
    auto curve = fraction_above_curve(negated, -2.0, 0.0, n_points);
    for (auto& p : curve) p.first = -p.first;
    std::reverse(curve.begin(), curve.end());
    return curve;
}

void write_scores_csv(const std::string& path, const std::vector<SeqScore>& rows,
                      const OpeScores& total) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw FormatError("cannot open scores csv for writing: " + path);
    f.precision(12);
    f << "sequence,frames,success,precision\n";
    for (const auto& r : rows)
        f << r.id << ',' << r.frames << ',' << r.success << ',' << r.precision << '\n';
    f << "TOTAL," << total.frames << ',' << total.success << ',' << total.precision << '\n';
    if (!f) throw FormatError("write failed for scores csv: " + path);
}

void write_curve(const std::string& path, const std::vector<std::pair<double, double>>& points) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw FormatError("cannot open curve file for writing: " + path);
    f.precision(12);
    for (const auto& [x, y] : points) f << x << ' ' << y << '\n';
    if (!f) throw FormatError("write failed for curve file: " + path);
}

void write_sparsity_csv(const std::string& path, const std::vector<SparsityBin>& bins) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw FormatError("cannot open sparsity csv for writing: " + path);
    f.precision(12);
    f << "lo,hi,count,mean_success\n";
    for (const auto& b : bins) {
        f << b.lo << ',' << b.hi << ',' << b.count << ',';
        if (b.occupied)
            f << b.mean_success;
        else
            f << "absent";
        f << '\n';
    }
    if (!f) throw FormatError("write failed for sparsity csv: " + path);
}

void write_mse_csv(const std::string& path, const BoxcloudMseReport& report) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw FormatError("cannot open mse csv for writing: " + path);
    f.precision(12);
    f << "lo,hi,count\n";
    for (std::size_t b = 0; b < report.counts.size(); ++b) {
        double lo = b == 0 ? 0.0 : report.edges[b - 1];
        f << lo << ',';
        if (b == report.edges.size())
            f << "inf";
        else
            f << report.edges[b];
        f << ',' << report.counts[b] << '\n';
    }
    f << "points," << report.points << ",\n";
    f << "median," << report.median << ",\n";
    if (!f) throw FormatError("write failed for mse csv: " + path);
}

}  // namespace bat
