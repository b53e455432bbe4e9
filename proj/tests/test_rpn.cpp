#include <cmath>

#include "bat/rpn.hpp"
#include "doctest.h"
#include "grad_check.hpp"

using namespace bat;

namespace {

FusedSearch random_fused(size_t n, size_t d, Rng& rng, double span = 2.0) {
    Mat pos(n, 3);
    for (size_t i = 0; i < n * 3; ++i) pos.data()[i] = rng.uniform(-span, span);
    return {pos, battest::random_tensor({n, d}, rng),
            battest::random_tensor({n, 9}, rng, 0.0, 3.0)};
}

RpnConfig small_cfg(size_t n_proposals = 3) {
    RpnConfig cfg;
    cfg.feature_width = 6;
    cfg.n_proposals = n_proposals;
    cfg.cluster_radius = 1.0;
    cfg.cluster_max_k = 4;
    return cfg;
}

}  // namespace

TEST_SUITE_BEGIN("rpn");

TEST_CASE("initial votes coincide with seeds") {
    Rng rng(1);
    Rpn rpn(small_cfg(), rng);
    Rng rs(2);
    FusedSearch fused = random_fused(7, 6, rs);
    VoteSet votes = rpn.vote(fused, nullptr);
    REQUIRE(votes.vote_positions.shape() == std::vector<size_t>{7, 3});
    REQUIRE(votes.vote_features.shape() == std::vector<size_t>{7, 6});
    REQUIRE(votes.seed_scores.shape() == std::vector<size_t>{7, 1});
    for (size_t i = 0; i < 7; ++i) {
        CHECK(votes.vote_positions[i * 3] == fused.positions.row3(i).x);
        CHECK(votes.vote_positions[i * 3 + 1] == fused.positions.row3(i).y);
        CHECK(votes.vote_positions[i * 3 + 2] == fused.positions.row3(i).z);
    }
}

TEST_CASE("proposal count always equals the configured count") {
    Rng rng(3);
    Rpn rpn(small_cfg(3), rng);
    Rng rs(4);
    FusedSearch fused = random_fused(9, 6, rs);
    VoteSet votes = rpn.vote(fused, nullptr);
    ProposalSet props = rpn.cluster_and_propose(votes, nullptr);
    CHECK(props.centers.shape() == std::vector<size_t>{3, 3});
    CHECK(props.headings.shape() == std::vector<size_t>{3, 1});
    CHECK(props.scores.shape() == std::vector<size_t>{3, 1});
    CHECK(to_proposals(props).size() == 3);
}

TEST_CASE("degenerate single cluster emits center plus learned residual") {
    Rng rng(5);
    Rpn rpn(small_cfg(1), rng);
    const size_t n = 5, d = 6;
    Mat pos(n, 3);
    for (size_t i = 0; i < n; ++i) pos.set_row3(i, {1.0, 2.0, 3.0});
    Rng rs(6);
    FusedSearch fused{pos, battest::random_tensor({n, d}, rs),
                      battest::random_tensor({n, 9}, rs)};
    VoteSet votes = rpn.vote(fused, nullptr);
    // Force identical votes as zero-init already guarantees.
    ProposalSet props = rpn.cluster_and_propose(votes, nullptr);
    CHECK(props.cluster_centers.rows() == 1);
    CHECK(props.cluster_centers.row3(0).x == 1.0);
    Vec3 delta = Vec3{props.centers[0], props.centers[1], props.centers[2]} - Vec3{1.0, 2.0, 3.0};
    CHECK(std::isfinite(delta.norm()));
}

TEST_CASE("clustering rejects bad proposal counts") {
    Rng rng(7);
    Rpn rpn(small_cfg(10), rng);
    Rng rs(8);
    FusedSearch fused = random_fused(4, 6, rs);
    VoteSet votes = rpn.vote(fused, nullptr);
    CHECK_THROWS_AS(rpn.cluster_and_propose(votes, nullptr), ArgumentError);
}

TEST_CASE("repeated calls are bit identical") {
    Rng rng(9);
    Rpn rpn(small_cfg(), rng);
    Rng rs(10);
    FusedSearch fused = random_fused(8, 6, rs);
    VoteSet v1 = rpn.vote(fused, nullptr);
    VoteSet v2 = rpn.vote(fused, nullptr);
    ProposalSet p1 = rpn.cluster_and_propose(v1, nullptr);
    ProposalSet p2 = rpn.cluster_and_propose(v2, nullptr);
    for (size_t i = 0; i < p1.centers.size(); ++i) CHECK(p1.centers[i] == p2.centers[i]);
    for (size_t i = 0; i < p1.scores.size(); ++i) CHECK(p1.scores[i] == p2.scores[i]);
}

TEST_CASE("translating seeds translates proposal centers") {
    Rng rng(11);
    Rpn rpn(small_cfg(), rng);
    Rng rs(12);
    FusedSearch fused = random_fused(8, 6, rs);
    const Vec3 t{5.0, -3.0, 2.0};
    FusedSearch moved = fused;
    Mat mp(8, 3);
    for (size_t i = 0; i < 8; ++i) mp.set_row3(i, fused.positions.row3(i) + t);
    moved.positions = mp;

    ProposalSet a = rpn.cluster_and_propose(rpn.vote(fused, nullptr), nullptr);
    ProposalSet b = rpn.cluster_and_propose(rpn.vote(moved, nullptr), nullptr);
    for (size_t i = 0; i < a.centers.rows(); ++i) {
        CHECK(b.centers[i * 3] == doctest::Approx(a.centers[i * 3] + t.x).epsilon(1e-12));
        CHECK(b.centers[i * 3 + 1] == doctest::Approx(a.centers[i * 3 + 1] + t.y).epsilon(1e-12));
        CHECK(b.centers[i * 3 + 2] == doctest::Approx(a.centers[i * 3 + 2] + t.z).epsilon(1e-12));
        CHECK(b.scores[i] == a.scores[i]);
        CHECK(b.headings[i] == a.headings[i]);
    }
}

TEST_CASE("loss decomposes into four nonnegative terms") {
    Rng rng(13);
    Rpn rpn(small_cfg(), rng);
    Rng rs(14);
    FusedSearch fused = random_fused(10, 6, rs);
    VoteSet votes = rpn.vote(fused, nullptr);
    ProposalSet props = rpn.cluster_and_propose(votes, nullptr);
    Box7 gt({0.0, 0.0, 0.0}, 2.0, 2.0, 2.0, 0.3);
    RpnLossTerms terms = rpn_loss(fused.positions, votes, props, gt);
    CHECK(terms.vote[0] >= 0.0);
    CHECK(terms.seed[0] >= 0.0);
    CHECK(terms.prop_score[0] >= 0.0);
    CHECK(terms.prop_reg[0] >= 0.0);
    CHECK(terms.total[0] ==
          doctest::Approx(terms.vote[0] + terms.seed[0] + terms.prop_score[0] + terms.prop_reg[0])
              .epsilon(1e-12));
}

TEST_CASE("seeds outside the box zero the vote term") {
    Rng rng(15);
    Rpn rpn(small_cfg(), rng);
    Rng rs(16);
    FusedSearch fused = random_fused(6, 6, rs);
    Mat far_pos(6, 3);
    for (size_t i = 0; i < 6; ++i) far_pos.set_row3(i, {100.0 + i, 100.0, 100.0});
    fused.positions = far_pos;
    VoteSet votes = rpn.vote(fused, nullptr);
    ProposalSet props = rpn.cluster_and_propose(votes, nullptr);
    Box7 gt({0.0, 0.0, 0.0}, 1.0, 1.0, 1.0, 0.0);
    RpnLossTerms terms = rpn_loss(fused.positions, votes, props, gt);
    CHECK(terms.vote[0] == 0.0);
    CHECK(terms.prop_reg[0] == 0.0);
}

TEST_CASE("near-perfect predictions approach zero loss") {
    const size_t n = 6;
    Mat seeds(n, 3);
    Rng rs(17);
    for (size_t i = 0; i < n * 3; ++i) seeds.data()[i] = rs.uniform(-0.4, 0.4);
    Box7 gt({0.0, 0.0, 0.0}, 1.0, 1.0, 1.0, 0.0);

    Tensor vote_pos({n, 3});
    Tensor logits({n, 1});
    for (size_t i = 0; i < n; ++i) {
        logits.data()[i] = 30.0;
        for (size_t c = 0; c < 3; ++c) vote_pos.data()[i * 3 + c] = 0.0;
    }
    VoteSet votes{vote_pos, battest::random_tensor({n, 6}, rs), logits};
    ProposalSet props{Tensor({2, 3}), Tensor({2, 1}), Tensor({2, 1}, {30.0, 30.0}), Mat(2, 3)};
    RpnLossTerms terms = rpn_loss(seeds, votes, props, gt);
    CHECK(terms.total[0] < 1e-8);
}

TEST_CASE("select_best picks highest score with lowest index ties") {
    std::vector<Proposal> ps(3);
    ps[0].score = 0.1;
    ps[1].score = 0.9;
    ps[2].score = 0.9;
    ps[1].center = {1, 0, 0};
    Proposal best = select_best(ps);
    CHECK(best.score == 0.9);
    CHECK(best.center.x == 1.0);

    for (auto& p : ps) p.score = p.score * 3.0 + 2.0;
    CHECK(select_best(ps).center.x == 1.0);

    CHECK(select_best({ps[0]}).score == ps[0].score);
    CHECK_THROWS_AS(select_best({}), EmptySetError);
}

TEST_CASE("proposal headings are normalized in plain form") {
    ProposalSet props{Tensor({1, 3}), Tensor({1, 1}, {7.0}), Tensor({1, 1}, {0.5}), Mat(1, 3)};
    auto plain = to_proposals(props);
    CHECK(plain[0].heading == doctest::Approx(7.0 - 2.0 * 3.14159265358979323846).epsilon(1e-12));
}

TEST_CASE("loss gradients match finite differences through the whole head") {
    Rng rng(18);
    RpnConfig cfg = small_cfg(2);
    Rpn rpn(cfg, rng);
    Rng rs(19);
    FusedSearch fused = random_fused(6, 6, rs, 0.8);
    Box7 gt({0.1, -0.1, 0.0}, 1.4, 1.4, 1.4, 0.2);

    std::vector<NamedTensor> named;
    rpn.collect(named);
    std::vector<Tensor> params;
    for (auto& p : named) params.push_back(p.value);
    battest::check_gradients(
        params,
        [&](Tape& tape) {
            VoteSet votes = rpn.vote(fused, &tape);
            ProposalSet props = rpn.cluster_and_propose(votes, &tape);
            return rpn_loss(fused.positions, votes, props, gt).total;
        },
        1e-5, 1e-4, 1e-7);
}

TEST_SUITE_END();
