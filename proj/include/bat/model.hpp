#pragma once

#include <vector>

#include "bat/backbone.hpp"
#include "bat/baff.hpp"
#include "bat/box.hpp"
#include "bat/rpn.hpp"

namespace bat {

struct ModelConfig {
    std::size_t feature_width = 64;
    std::size_t template_seeds = 32;
    std::size_t search_seeds = 64;
    std::size_t k = 4;
    FusionMode fusion = FusionMode::Baff;
    // Gates the box-distance machinery: the template rows fed to vanilla
    // aggregation and the prediction loss.
    bool use_boxcloud = true;
    double lambda_rpn = 1.0;
    BackboneConfig backbone;
    RpnConfig rpn;
};

// Full tracking network: shared encoder, fusion head, proposal head.
struct BatModel {
    ModelConfig cfg;
    Backbone backbone;
    Baff baff;
    Rpn rpn;

    BatModel() = default;
    BatModel(const ModelConfig& cfg, Rng& rng);

    // Named views over every parameter; values alias model storage.
    std::vector<NamedTensor> params();

    struct Forward {
        SeedSet template_seeds;
        SeedSet search_seeds;
        Mat template_boxcloud;
        FusedSearch fused;
        VoteSet votes;
        ProposalSet proposals;
    };

    // template_points live in the template box's object frame and
    // search_points in the search frame; template_box sits at the origin.
    Forward forward(const Mat& template_points, const Box7& template_box,
                    const Mat& search_points, Tape* tape) const;
};

struct SampleLoss {
    Tensor total;
    Tensor bc;
    RpnLossTerms rpn;
};

// reference_box is the ground-truth box in the search frame.
SampleLoss sample_loss(const BatModel& model, const BatModel::Forward& fwd,
                       const Box7& reference_box);

}  // namespace bat
