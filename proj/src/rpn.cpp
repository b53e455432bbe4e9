#include "bat/rpn.hpp"

#include <cmath>
#include <cstring>

#include "bat/point_ops.hpp"

namespace bat {

Rpn::Rpn(const RpnConfig& cfg_, Rng& rng) : cfg(cfg_) {
    const std::size_t d = cfg.feature_width;
    vote_net = Mlp({d, d, d, 3 + d}, false, rng);
    score_net = Mlp({d, d, d, 1}, false, rng);
    prop_mini = Mlp({3 + d + 1, d, d}, true, rng);
    prop_head = Mlp({d, 5}, false, rng);
    // Zero offsets at init keep votes on their seeds, which stabilizes
    // clustering before training has shaped the head.
    Linear& last = vote_net.layers.back();
    std::memset(last.w.data(), 0, last.w.size() * sizeof(double));
    std::memset(last.b.data(), 0, last.b.size() * sizeof(double));
}

VoteSet Rpn::vote(const FusedSearch& fused, Tape* tape) const {
    Tensor out = vote_net.apply(fused.features, tape);
    Tensor dpos = slice_cols(out, 0, 3);
    Tensor dfeat = slice_cols(out, 3, 3 + cfg.feature_width);
    Tensor positions = add(Tensor::from_mat(fused.positions), dpos);
    Tensor features = add(fused.features, dfeat);
    Tensor scores = score_net.apply(fused.features, tape);
    return {positions, features, scores};
}

ProposalSet Rpn::cluster_and_propose(const VoteSet& votes, Tape* tape) const {
    const std::size_t m = votes.vote_positions.rows();
    if (cfg.n_proposals == 0 || cfg.n_proposals > m)
        throw ArgumentError("proposal count " + std::to_string(cfg.n_proposals) +
                            " must be in [1, vote count " + std::to_string(m) + "]");

    Tensor scored = concat_last_dim({votes.vote_features, votes.seed_scores});
    Mat positions = votes.vote_positions.detached().to_mat();
    IndexMatrix sel = farthest_point_sampling(positions, cfg.n_proposals, 0);
    Mat centers = positions.gather(sel.row_vec(0));
    IndexMatrix groups = ball_query(centers, positions, cfg.cluster_radius, cfg.cluster_max_k);

    const std::size_t p = cfg.n_proposals;
    const std::size_t kk = cfg.cluster_max_k;
    std::vector<std::uint32_t> member_idx(p * kk);
    std::vector<std::uint32_t> center_idx(p * kk);
    for (std::size_t g = 0; g < p; ++g)
        for (std::size_t j = 0; j < kk; ++j) {
            member_idx[g * kk + j] = groups.at(g, j);
            center_idx[g * kk + j] = sel.at(0, g);
        }

    Tensor rel = sub(gather_rows(votes.vote_positions, member_idx),
                     gather_rows(votes.vote_positions, center_idx));
    Tensor rows = concat_last_dim({rel, gather_rows(scored, member_idx)});
    Tensor pooled = max_pool_groups(prop_mini.apply(rows, tape), kk);
    Tensor out = prop_head.apply(pooled, tape);

    std::vector<std::uint32_t> center_rows(sel.row_vec(0));
    Tensor center_pos = gather_rows(votes.vote_positions, center_rows);
    Tensor prop_centers = add(center_pos, slice_cols(out, 0, 3));
    Tensor headings = slice_cols(out, 3, 4);
    Tensor scores = slice_cols(out, 4, 5);
    return {prop_centers, headings, scores, centers};
}

void Rpn::collect(std::vector<NamedTensor>& out) {
    vote_net.collect("rpn.vote", out);
    score_net.collect("rpn.seedscore", out);
    prop_mini.collect("rpn.prop.mini", out);
    prop_head.collect("rpn.prop.head", out);
}

RpnLossTerms rpn_loss(const Mat& seed_positions, const VoteSet& votes, const ProposalSet& props,
                      const Box7& reference, double positive_radius) {
    const std::size_t m = seed_positions.rows();
    if (votes.vote_positions.rows() != m)
        throw DimensionError("vote rows " + std::to_string(votes.vote_positions.rows()) +
                             " do not match seed rows " + std::to_string(m));

    Tensor center_target({m, 3});
    Tensor vote_mask({m});
    Tensor seed_labels({m, 1});
    const double ref_center[3] = {reference.center.x, reference.center.y, reference.center.z};
    for (std::size_t i = 0; i < m; ++i) {
        double inside = contains(reference, seed_positions.row3(i)) ? 1.0 : 0.0;
        seed_labels.data()[i] = inside;
        vote_mask.data()[i] = inside;
        for (std::size_t c = 0; c < 3; ++c) center_target.data()[i * 3 + c] = ref_center[c];
    }
    Tensor l_vote = smooth_l1(votes.vote_positions, center_target, vote_mask);

    Tensor ones({m, 1});
    for (std::size_t i = 0; i < m; ++i) ones.data()[i] = 1.0;
    Tensor l_seed = binary_cross_entropy(sigmoid(votes.seed_scores), seed_labels, ones);

    const std::size_t p = props.centers.rows();
    Tensor prop_labels({p, 1});
    Tensor prop_ones({p, 1});
    Tensor reg_target({p, 4});
    Tensor reg_mask({p});
    for (std::size_t i = 0; i < p; ++i) {
        Vec3 c{props.centers[i * 3], props.centers[i * 3 + 1], props.centers[i * 3 + 2]};
        double pos = (c - reference.center).norm() <= positive_radius ? 1.0 : 0.0;
        prop_labels.data()[i] = pos;
        prop_ones.data()[i] = 1.0;
        reg_mask.data()[i] = pos;
        for (std::size_t c4 = 0; c4 < 3; ++c4) reg_target.data()[i * 4 + c4] = ref_center[c4];
        reg_target.data()[i * 4 + 3] = reference.heading;
    }
    Tensor l_prop_score = binary_cross_entropy(sigmoid(props.scores), prop_labels, prop_ones);
    Tensor reg_pred = concat_last_dim({props.centers, props.headings});
    Tensor l_prop_reg = smooth_l1(reg_pred, reg_target, reg_mask);

    Tensor total = add(add(l_vote, l_seed), add(l_prop_score, l_prop_reg));
    return {total, l_vote, l_seed, l_prop_score, l_prop_reg};
}

std::vector<Proposal> to_proposals(const ProposalSet& props) {
    const std::size_t p = props.centers.rows();
    std::vector<Proposal> out(p);
    for (std::size_t i = 0; i < p; ++i) {
        out[i].center = {props.centers[i * 3], props.centers[i * 3 + 1], props.centers[i * 3 + 2]};
        out[i].heading = wrap_angle(props.headings[i]);
        out[i].score = props.scores[i];
    }
    return out;
}

Proposal select_best(const std::vector<Proposal>& proposals) {
    if (proposals.empty()) throw EmptySetError("select_best on empty proposal list");
    std::size_t best = 0;
    for (std::size_t i = 1; i < proposals.size(); ++i)
        if (proposals[i].score > proposals[best].score) best = i;
    return proposals[best];
}

}  // namespace bat
