#pragma once

#include <vector>

#include "bat/backbone.hpp"
#include "bat/common.hpp"
#include "bat/nn.hpp"
#include "bat/tensor.hpp"

namespace bat {

// Search seeds enriched with target-specific features and the predicted
// per-seed box-distance rows.
struct FusedSearch {
    Mat positions;
    Tensor features;
    Tensor predicted_boxcloud;
};

enum class FusionMode {
    // Group top-k template points per search seed by box-distance
    // similarity, aggregate [position; feature; boxcloud; search feature].
    Baff,
    // Similarity-weighted aggregation over all template points; the
    // template box-distance rows are concatenated when enabled.
    Vanilla,
    // As Baff but grouping by learned-feature distance instead of
    // box-distance rows.
    FeatureComparison,
};

// Fusion head: predicts search-seed box-distance rows and fuses template
// context into each search seed.
struct Baff {
    std::size_t feature_width = 64;
    FusionMode mode = FusionMode::Baff;
    // Vanilla only: include template box-distance rows in the aggregation
    // input. Off reproduces the plain similarity-fusion baseline.
    bool use_boxcloud = true;
    Mlp bcnet;
    Mlp mini;

    Baff() = default;
    Baff(std::size_t feature_width, FusionMode mode, bool use_boxcloud, Rng& rng);

    Tensor predict_boxcloud(const SeedSet& search, Tape* tape) const;

    // k is ignored in Vanilla mode (all template points aggregate).
    FusedSearch fuse(const SeedSet& tmpl, const Mat& template_bc, const SeedSet& search,
                     std::size_t k, Tape* tape) const;

    void collect(std::vector<NamedTensor>& out);

    std::size_t mini_input_width() const;
};

// Masked smooth-L1 between predicted and reference box-distance rows,
// averaged over masked points. mask[i] is 1 for points inside the
// reference box, 0 otherwise; an all-zero mask yields 0 with zero gradient.
Tensor boxcloud_loss(const Tensor& pred, const Mat& reference, const std::vector<double>& mask);

}  // namespace bat
