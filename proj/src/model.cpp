#include "bat/model.hpp"

#include "bat/boxcloud.hpp"

namespace bat {

BatModel::BatModel(const ModelConfig& cfg_, Rng& rng) : cfg(cfg_) {
    cfg.backbone.feature_width = cfg.feature_width;
    cfg.rpn.feature_width = cfg.feature_width;
    backbone = Backbone(cfg.backbone, rng);
    baff = Baff(cfg.feature_width, cfg.fusion, cfg.use_boxcloud, rng);
    rpn = Rpn(cfg.rpn, rng);
}

std::vector<NamedTensor> BatModel::params() {
    std::vector<NamedTensor> out;
    backbone.collect(out);
    baff.collect(out);
    rpn.collect(out);
    return out;
}

BatModel::Forward BatModel::forward(const Mat& template_points, const Box7& template_box,
                                    const Mat& search_points, Tape* tape) const {
    Forward fwd;
    fwd.template_seeds = backbone.encode(template_points, cfg.template_seeds, tape);
    fwd.search_seeds = backbone.encode(search_points, cfg.search_seeds, tape);
    fwd.template_boxcloud = compute_boxcloud(fwd.template_seeds.positions, template_box);
    fwd.fused = baff.fuse(fwd.template_seeds, fwd.template_boxcloud, fwd.search_seeds, cfg.k, tape);
    fwd.votes = rpn.vote(fwd.fused, tape);
    fwd.proposals = rpn.cluster_and_propose(fwd.votes, tape);
    return fwd;
}

SampleLoss sample_loss(const BatModel& model, const BatModel::Forward& fwd,
                       const Box7& reference_box) {
    SampleLoss out;
    if (model.cfg.use_boxcloud) {
        Mat ref_bc = compute_boxcloud(fwd.fused.positions, reference_box);
        std::vector<double> mask(fwd.fused.positions.rows());
        for (std::size_t i = 0; i < mask.size(); ++i)
            mask[i] = contains(reference_box, fwd.fused.positions.row3(i)) ? 1.0 : 0.0;
        out.bc = boxcloud_loss(fwd.fused.predicted_boxcloud, ref_bc, mask);
    } else {
        out.bc = Tensor::scalar(0.0);
    }
    out.rpn = rpn_loss(fwd.fused.positions, fwd.votes, fwd.proposals, reference_box,
                       model.cfg.rpn.positive_radius);
    out.total = add(out.bc, scale(out.rpn.total, model.cfg.lambda_rpn));
    return out;
}

}  // namespace bat
