#include "bat/backbone.hpp"

#include "bat/point_ops.hpp"

namespace bat {

SeedSet set_abstraction(const SeedSet& in, std::size_t m_out, double radius,
                        std::size_t max_k, const Mlp& mlp, Tape* tape) {
    const std::size_t n = in.positions.rows();
    if (n == 0) throw EmptySetError("set_abstraction on empty seed set");
    if (in.features.size() != 0 && in.features.rows() != n)
        throw DimensionError("seed features rows " + std::to_string(in.features.rows()) +
                             " do not match positions rows " + std::to_string(n));

    IndexMatrix sel = farthest_point_sampling(in.positions, m_out, 0);
    Mat centers = in.positions.gather(sel.row_vec(0));
    IndexMatrix groups = ball_query(centers, in.positions, radius, max_k);

    Mat rel(m_out * max_k, 3);
    std::vector<std::uint32_t> flat(m_out * max_k);
    for (std::size_t g = 0; g < m_out; ++g) {
        Vec3 c = centers.row3(g);
        for (std::size_t j = 0; j < max_k; ++j) {
            std::uint32_t idx = groups.at(g, j);
            flat[g * max_k + j] = idx;
            rel.set_row3(g * max_k + j, in.positions.row3(idx) - c);
        }
    }

    Tensor input = Tensor::from_mat(rel);
    if (in.features.size() != 0)
        input = concat_last_dim({input, gather_rows(in.features, flat)});

    Tensor lifted = mlp.apply(input, tape);
    return {centers, max_pool_groups(lifted, max_k)};
}

Backbone::Backbone(const BackboneConfig& cfg_, Rng& rng) : cfg(cfg_) {
    const std::size_t d = cfg.feature_width;
    layer1 = Mlp({3, d, d}, true, rng);
    layer2 = Mlp({3 + d, d, d}, true, rng);
}

SeedSet Backbone::encode(const Mat& points, std::size_t n_seeds, Tape* tape) const {
    if (points.rows() == 0) throw EmptySetError("encode on empty cloud");
    SeedSet raw{points, Tensor()};
    SeedSet mid = set_abstraction(raw, 2 * n_seeds, cfg.radius1, cfg.max_k, layer1, tape);
    return set_abstraction(mid, n_seeds, cfg.radius2, cfg.max_k, layer2, tape);
}

void Backbone::collect(std::vector<NamedTensor>& out) {
    layer1.collect("backbone.layer1", out);
    layer2.collect("backbone.layer2", out);
}

}  // namespace bat
