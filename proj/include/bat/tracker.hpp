#pragma once

#include <numbers>
#include <string>
#include <vector>

#include "bat/dataio.hpp"
#include "bat/model.hpp"

namespace bat {

enum class TemplateStrategy { FirstGT, PreviousResult, FirstAndPrevious, AllPrevious };
enum class SearchMode { LongTerm, ShortTerm };

struct TrackerConfig {
    std::size_t k = 4;
    FusionMode fusion = FusionMode::Baff;
    TemplateStrategy template_strategy = TemplateStrategy::FirstAndPrevious;
    SearchMode search_mode = SearchMode::LongTerm;
    double search_margin = 2.0;
    std::size_t n_template_points = 128;
    std::size_t n_search_points = 256;
};

struct FrameResult {
    std::size_t index = 0;
    Box7 box;
    double score = 0.0;
    // Search-region population before subsampling; zero when the frame fell
    // back to the held box.
    std::size_t n_points = 0;
    long micros = 0;
};

struct TrackResult {
    std::string seq_id;
    std::vector<FrameResult> frames;
};

// One history entry per already-processed frame: its cloud and the box the
// tracker would crop the target with (ground truth for frame 0).
struct HistoryEntry {
    const PointCloud* points = nullptr;
    Box7 box;
};

// Merged object-frame crop of the strategy-selected history boxes plus the
// origin-centered first box. Throws EmptySetError when the crop is empty.
std::pair<PointCloud, Box7> make_template(const std::vector<HistoryEntry>& history,
                                          TemplateStrategy strategy, std::size_t n_points,
                                          Rng& rng);

// Points inside the enlarged reference box, expressed in its object frame.
// The reference box itself is the retained transform back to world.
PointCloud make_search_area(const PointCloud& frame, const Box7& ref_box, double margin,
                            std::size_t n_points, Rng& rng);

Box7 to_world_box(const Proposal& best, const Box7& ref_box, const Box7& size_source);

struct Tracker {
    const BatModel* model = nullptr;
    TrackerConfig cfg;

    Tracker() = default;
    // Validates that k and fusion agree with what the model was built with.
    Tracker(const BatModel& model, const TrackerConfig& cfg);

    // Single-frame inference; returns the best proposal mapped to world.
    std::pair<Box7, double> track_frame(const PointCloud& template_points,
                                        const Box7& template_box, const PointCloud& search_points,
                                        const Box7& ref_box, const Box7& size_source) const;

    TrackResult track_sequence(const TrackSequence& seq, std::uint64_t seed) const;
};

// One supervised pair: object-frame template and search clouds plus the
// reference box expressed in the search frame.
struct TrainingSample {
    PointCloud template_points;
    Box7 template_box;
    PointCloud search_points;
    Box7 reference_box;
};

struct SampleGenConfig {
    double max_shift = 0.3;
    double max_rotation = 10.0 * std::numbers::pi / 180.0;
    double search_margin = 2.0;
    std::size_t n_template_points = 128;
    std::size_t n_search_points = 256;
};

// Builds the sample for frame t of a sequence from ground truth alone:
// template from the first and (t-1)-th boxes, search from the t-th box under
// a random horizontal shift and heading twist. Throws EmptySetError when
// either crop is empty; callers skip such pairs.
TrainingSample make_training_sample(const TrackSequence& seq, std::size_t t,
                                    const SampleGenConfig& cfg, Rng& rng);

void write_track_result(const std::string& path, const TrackResult& result);
TrackResult read_track_result(const std::string& path, const std::string& seq_id);

}  // namespace bat
