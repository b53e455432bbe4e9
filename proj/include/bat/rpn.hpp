#pragma once

#include <vector>

#include "bat/baff.hpp"
#include "bat/box.hpp"
#include "bat/common.hpp"
#include "bat/nn.hpp"
#include "bat/tensor.hpp"

namespace bat {

// Per-seed votes toward the target center plus targetness logits.
struct VoteSet {
    Tensor vote_positions;
    Tensor vote_features;
    Tensor seed_scores;
};

// Differentiable proposal bundle; rows align across fields.
struct ProposalSet {
    Tensor centers;
    Tensor headings;
    Tensor scores;
    Mat cluster_centers;
};

struct Proposal {
    Vec3 center;
    double heading = 0.0;
    double score = 0.0;
};

struct RpnLossTerms {
    Tensor total;
    Tensor vote;
    Tensor seed;
    Tensor prop_score;
    Tensor prop_reg;
};

struct RpnConfig {
    std::size_t feature_width = 64;
    std::size_t n_proposals = 16;
    double cluster_radius = 0.3;
    std::size_t cluster_max_k = 8;
    // Proposals whose center lies within this distance of the reference
    // center count as positive in the loss.
    double positive_radius = 0.3;
};

struct Rpn {
    RpnConfig cfg;
    Mlp vote_net;
    Mlp score_net;
    Mlp prop_mini;
    Mlp prop_head;

    Rpn() = default;
    Rpn(const RpnConfig& cfg, Rng& rng);

    VoteSet vote(const FusedSearch& fused, Tape* tape) const;
    ProposalSet cluster_and_propose(const VoteSet& votes, Tape* tape) const;
    void collect(std::vector<NamedTensor>& out);
};

RpnLossTerms rpn_loss(const Mat& seed_positions, const VoteSet& votes, const ProposalSet& props,
                      const Box7& reference, double positive_radius = 0.3);

std::vector<Proposal> to_proposals(const ProposalSet& props);
Proposal select_best(const std::vector<Proposal>& proposals);

}  // namespace bat
