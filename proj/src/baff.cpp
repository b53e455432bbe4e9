#include "bat/baff.hpp"

#include "bat/boxcloud.hpp"
#include "bat/kernels.hpp"
#include "bat/point_ops.hpp"

namespace bat {

std::size_t Baff::mini_input_width() const {
    const std::size_t d = feature_width;
    if (mode == FusionMode::Vanilla) return 1 + 3 + (use_boxcloud ? 9 : 0) + d;
    return 3 + d + 9 + d;
}

Baff::Baff(std::size_t feature_width_, FusionMode mode_, bool use_boxcloud_, Rng& rng)
    : feature_width(feature_width_), mode(mode_), use_boxcloud(use_boxcloud_) {
    const std::size_t d = feature_width;
    bcnet = Mlp({d, d, 9}, false, rng);
    mini = Mlp({mini_input_width(), d, d, d}, true, rng);
}

Tensor Baff::predict_boxcloud(const SeedSet& search, Tape* tape) const {
    return bcnet.apply(search.features, tape);
}

namespace {

// Row indices repeating each of 0..n-1 reps times: 0,0,..,1,1,..
std::vector<std::uint32_t> repeat_each(std::size_t n, std::size_t reps) {
    std::vector<std::uint32_t> idx(n * reps);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < reps; ++j) idx[i * reps + j] = static_cast<std::uint32_t>(i);
    return idx;
}

// Tiled indices 0..n-1 repeated reps times: 0,1,..,n-1,0,1,..
std::vector<std::uint32_t> tile(std::size_t n, std::size_t reps) {
    std::vector<std::uint32_t> idx(n * reps);
    for (std::size_t i = 0; i < reps; ++i)
        for (std::size_t j = 0; j < n; ++j) idx[i * n + j] = static_cast<std::uint32_t>(j);
    return idx;
}

}  // namespace

FusedSearch Baff::fuse(const SeedSet& tmpl, const Mat& template_bc, const SeedSet& search,
                       std::size_t k, Tape* tape) const {
    const std::size_t m1 = tmpl.positions.rows();
    const std::size_t m2 = search.positions.rows();
    if (m1 == 0 || m2 == 0) throw EmptySetError("fuse on empty seed set");
    if (template_bc.rows() != m1)
        throw DimensionError("template box-distance rows " + std::to_string(template_bc.rows()) +
                             " do not match template size " + std::to_string(m1));

    Tensor pred_bc = predict_boxcloud(search, tape);

    if (mode == FusionMode::Vanilla) {
        Tensor sim = cosine_rows(search.features, tmpl.features);
        Tensor sim_col = reshape(sim, {m2 * m1, 1});
        std::vector<std::uint32_t> t_idx = tile(m1, m2);
        std::vector<std::uint32_t> s_idx = repeat_each(m2, m1);

        std::vector<Tensor> parts;
        parts.push_back(sim_col);
        parts.push_back(gather_rows(Tensor::from_mat(tmpl.positions), t_idx));
        if (use_boxcloud) parts.push_back(gather_rows(Tensor::from_mat(template_bc), t_idx));
        parts.push_back(gather_rows(search.features, s_idx));

        Tensor fused = max_pool_groups(mini.apply(concat_last_dim(parts), tape), m1);
        return {search.positions, fused, pred_bc};
    }

    if (k == 0 || k > m1)
        throw ArgumentError("neighbor count " + std::to_string(k) +
                            " must be in [1, template size " + std::to_string(m1) + "]");

    // Index selection never carries gradient; distances come from detached
    // values in both grouping modes.
    Mat dist(m1, m2);
    if (mode == FusionMode::Baff) {
        dist = pairwise_distance_map(template_bc, pred_bc.detached().to_mat());
    } else {
        Mat tf = tmpl.features.detached().to_mat();
        Mat sf = search.features.detached().to_mat();
        kernels::pairwise_sqdist(tf, sf, dist);
    }
    IndexMatrix nearest = topk_smallest(dist, k);

    std::vector<std::uint32_t> t_idx(m2 * k);
    for (std::size_t i = 0; i < m2; ++i)
        for (std::size_t j = 0; j < k; ++j) t_idx[i * k + j] = nearest.at(j, i);
    std::vector<std::uint32_t> s_idx = repeat_each(m2, k);

    Tensor rows = concat_last_dim({gather_rows(Tensor::from_mat(tmpl.positions), t_idx),
                                   gather_rows(tmpl.features, t_idx),
                                   gather_rows(Tensor::from_mat(template_bc), t_idx),
                                   gather_rows(search.features, s_idx)});
    Tensor fused = max_pool_groups(mini.apply(rows, tape), k);
    return {search.positions, fused, pred_bc};
}

void Baff::collect(std::vector<NamedTensor>& out) {
    bcnet.collect("baff.bcnet", out);
    mini.collect("baff.mini", out);
}

Tensor boxcloud_loss(const Tensor& pred, const Mat& reference, const std::vector<double>& mask) {
    if (pred.rank() != 2 || pred.cols() != 9)
        throw DimensionError("predicted box-distance rows must be (n,9), got " +
                             shape_str(pred.shape()));
    if (reference.rows() != pred.rows() || reference.cols() != 9)
        throw DimensionError("reference box-distance rows (" + std::to_string(reference.rows()) +
                             ",9) expected, got (" + std::to_string(reference.rows()) + "," +
                             std::to_string(reference.cols()) + ")");
    if (mask.size() != pred.rows())
        throw DimensionError("mask size " + std::to_string(mask.size()) +
                             " does not match row count " + std::to_string(pred.rows()));

    Tensor target = Tensor::from_mat(reference);
    Tensor row_mask({pred.rows()});
    for (std::size_t i = 0; i < pred.rows(); ++i) row_mask.data()[i] = mask[i];
    return smooth_l1(pred, target, row_mask);
}

}  // namespace bat
