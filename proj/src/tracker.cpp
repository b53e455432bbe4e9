#include "bat/tracker.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

#include "bat/point_ops.hpp"

namespace bat {

namespace {

void append_object_frame_crop(const PointCloud& points, const Box7& box,
                              std::vector<Vec3>& out) {
    for (std::size_t i = 0; i < points.rows(); ++i) {
        Vec3 p = points.row3(i);
        if (contains(box, p)) out.push_back(to_object_frame(p, box));
    }
}

PointCloud to_cloud(const std::vector<Vec3>& pts) {
    PointCloud out(pts.size(), 3);
    for (std::size_t i = 0; i < pts.size(); ++i) out.set_row3(i, pts[i]);
    return out;
}

}  // namespace

std::pair<PointCloud, Box7> make_template(const std::vector<HistoryEntry>& history,
                                          TemplateStrategy strategy, std::size_t n_points,
                                          Rng& rng) {
    if (history.empty()) throw ArgumentError("template history is empty");

    std::vector<std::size_t> picks;
    switch (strategy) {
        case TemplateStrategy::FirstGT: picks = {0}; break;
        case TemplateStrategy::PreviousResult: picks = {history.size() - 1}; break;
        case TemplateStrategy::FirstAndPrevious:
            picks = {0};
            if (history.size() > 1) picks.push_back(history.size() - 1);
            break;
        case TemplateStrategy::AllPrevious:
            for (std::size_t i = 0; i < history.size(); ++i) picks.push_back(i);
            break;
    }

    std::vector<Vec3> merged;
    for (std::size_t i : picks)
        append_object_frame_crop(*history[i].points, history[i].box, merged);
    if (merged.empty()) throw EmptySetError("template crop holds no points");

    const Box7& first = history[0].box;
    Box7 template_box({0.0, 0.0, 0.0}, first.w, first.l, first.h, 0.0);
    return {random_subsample(to_cloud(merged), n_points, rng), template_box};
}

PointCloud make_search_area(const PointCloud& frame, const Box7& ref_box, double margin,
                            std::size_t n_points, Rng& rng) {
    if (margin <= 0.0) throw ArgumentError("search margin must be positive");
    Box7 region = enlarge(ref_box, margin);
    std::vector<Vec3> inside;
    for (std::size_t i = 0; i < frame.rows(); ++i) {
        Vec3 p = frame.row3(i);
        if (contains(region, p)) inside.push_back(to_object_frame(p, ref_box));
    }
    if (inside.empty()) throw EmptySetError("search region holds no points");
    return random_subsample(to_cloud(inside), n_points, rng);
}

Box7 to_world_box(const Proposal& best, const Box7& ref_box, const Box7& size_source) {
    Vec3 center = from_object_frame(best.center, ref_box);
    return Box7(center, size_source.w, size_source.l, size_source.h,
                wrap_angle(best.heading + ref_box.heading));
}

Tracker::Tracker(const BatModel& model_, const TrackerConfig& cfg_) : model(&model_), cfg(cfg_) {
    if (cfg.k != model->cfg.k)
        throw ArgumentError("tracker k does not match the model's neighbor count");
    if (cfg.fusion != model->cfg.fusion)
        throw ArgumentError("tracker fusion mode does not match the model's");
    if (cfg.search_margin <= 0.0) throw ArgumentError("search margin must be positive");
    if (cfg.k < 1) throw ArgumentError("k must be at least 1");
}

std::pair<Box7, double> Tracker::track_frame(const PointCloud& template_points,
                                             const Box7& template_box,
                                             const PointCloud& search_points, const Box7& ref_box,
                                             const Box7& size_source) const {
    auto fwd = model->forward(template_points, template_box, search_points, nullptr);
    Proposal best = select_best(to_proposals(fwd.proposals));
    return {to_world_box(best, ref_box, size_source), best.score};
}

TrackResult Tracker::track_sequence(const TrackSequence& seq, std::uint64_t seed) const {
    if (seq.frames.empty()) throw ArgumentError("sequence has no frames");

    TrackResult result;
    result.seq_id = seq.id;
    Rng rng(seed);

    const Box7 first_box = seq.frames[0].box;
    std::vector<HistoryEntry> history;
    history.push_back({&seq.frames[0].points, first_box});

    FrameResult fr0;
    fr0.index = seq.frames[0].index;
    fr0.box = first_box;
    fr0.score = 1.0;
    fr0.n_points = points_in_box(seq.frames[0].points, first_box);
    result.frames.push_back(fr0);

    PointCloud held_template;
    Box7 held_template_box;
    bool have_template = false;
    Box7 previous_pred = first_box;

    for (std::size_t t = 1; t < seq.frames.size(); ++t) {
        auto start = std::chrono::steady_clock::now();
        FrameResult fr;
        fr.index = seq.frames[t].index;

        const Box7& previous_gt = seq.frames[t - 1].box;
        Box7 ref_box = cfg.search_mode == SearchMode::ShortTerm ? previous_gt : previous_pred;

        try {
            std::pair<PointCloud, Box7> tmpl;
            try {
                tmpl = make_template(history, cfg.template_strategy, cfg.n_template_points, rng);
                held_template = tmpl.first;
                held_template_box = tmpl.second;
                have_template = true;
            } catch (const EmptySetError&) {
                if (!have_template) throw;
                tmpl = {held_template, held_template_box};
            }

            std::vector<Vec3> region_points;
            Box7 region = enlarge(ref_box, cfg.search_margin);
            for (std::size_t i = 0; i < seq.frames[t].points.rows(); ++i) {
                Vec3 p = seq.frames[t].points.row3(i);
                if (contains(region, p)) region_points.push_back(p);
            }
            fr.n_points = region_points.size();
            if (region_points.empty()) throw EmptySetError("search region holds no points");
            PointCloud search = random_subsample(to_cloud(region_points), cfg.n_search_points, rng);
            for (std::size_t i = 0; i < search.rows(); ++i)
                search.set_row3(i, to_object_frame(search.row3(i), ref_box));

            auto [box, score] = track_frame(tmpl.first, tmpl.second, search, ref_box, first_box);
            fr.box = box;
            fr.score = score;
        } catch (const EmptySetError&) {
            fr.box = Box7(previous_pred.center, first_box.w, first_box.l, first_box.h,
                          previous_pred.heading);
            fr.score = 0.0;
            fr.n_points = 0;
        }

        auto end = std::chrono::steady_clock::now();
        fr.micros =
            std::chrono::duration_cast<std::chrono::microseconds>(end - start).count();
        result.frames.push_back(fr);

        previous_pred = fr.box;
        Box7 history_box = cfg.search_mode == SearchMode::ShortTerm ? seq.frames[t].box : fr.box;
        history.push_back({&seq.frames[t].points, history_box});
    }
    return result;
}

TrainingSample make_training_sample(const TrackSequence& seq, std::size_t t,
                                    const SampleGenConfig& cfg, Rng& rng) {
    if (t == 0 || t >= seq.frames.size())
        throw ArgumentError("training samples need a frame index in [1, frames)");

    std::vector<HistoryEntry> history;
    history.push_back({&seq.frames[0].points, seq.frames[0].box});
    if (t >= 2) history.push_back({&seq.frames[t - 1].points, seq.frames[t - 1].box});

    TrainingSample sample;
    auto tmpl = make_template(history, TemplateStrategy::FirstAndPrevious, cfg.n_template_points,
                              rng);
    sample.template_points = tmpl.first;
    sample.template_box = tmpl.second;

    const Box7& gt = seq.frames[t].box;
    double dx = rng.uniform(-cfg.max_shift, cfg.max_shift);
    double dy = rng.uniform(-cfg.max_shift, cfg.max_shift);
    double dtheta = rng.uniform(-cfg.max_rotation, cfg.max_rotation);
    Box7 shifted(gt.center + Vec3{dx, dy, 0.0}, gt.w, gt.l, gt.h, wrap_angle(gt.heading + dtheta));

    sample.search_points = make_search_area(seq.frames[t].points, shifted, cfg.search_margin,
                                            cfg.n_search_points, rng);
    Vec3 ref_center = to_object_frame(gt.center, shifted);
    sample.reference_box =
        Box7(ref_center, gt.w, gt.l, gt.h, wrap_angle(gt.heading - shifted.heading));
    return sample;
}

void write_track_result(const std::string& path, const TrackResult& result) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw FormatError("cannot open track result for writing: " + path);
    f.precision(17);
    for (const auto& fr : result.frames)
        f << fr.index << ' ' << fr.box.center.x << ' ' << fr.box.center.y << ' ' << fr.box.center.z
          << ' ' << fr.box.w << ' ' << fr.box.l << ' ' << fr.box.h << ' ' << fr.box.heading << ' '
          << fr.score << ' ' << fr.micros << '\n';
    if (!f) throw FormatError("write failed for track result: " + path);
}

TrackResult read_track_result(const std::string& path, const std::string& seq_id) {
    std::ifstream f(path);
    if (!f) throw ParseError("cannot open track result: " + path);
    TrackResult result;
    result.seq_id = seq_id;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(f, line)) {
        ++line_no;
        std::istringstream in(line);
        FrameResult fr;
        double v[7];
        if (!(in >> fr.index >> v[0] >> v[1] >> v[2] >> v[3] >> v[4] >> v[5] >> v[6] >> fr.score >>
              fr.micros))
            throw ParseError("malformed record at " + path + " line " + std::to_string(line_no));
        try {
            fr.box = Box7({v[0], v[1], v[2]}, v[3], v[4], v[5], v[6]);
        } catch (const ArgumentError& e) {
            throw ParseError(std::string(e.what()) + " at " + path + " line " +
                             std::to_string(line_no));
        }
        result.frames.push_back(fr);
    }
    return result;
}

}  // namespace bat
