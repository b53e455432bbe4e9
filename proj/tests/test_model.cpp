#include <cmath>

#include "bat/model.hpp"
#include "doctest.h"
#include "grad_check.hpp"

using namespace bat;

namespace {

ModelConfig micro_cfg() {
    ModelConfig cfg;
    cfg.feature_width = 8;
    cfg.template_seeds = 4;
    cfg.search_seeds = 6;
    cfg.k = 2;
    cfg.rpn.n_proposals = 2;
    cfg.rpn.cluster_max_k = 4;
    return cfg;
}

Mat box_cloud_sample(const Box7& box, std::size_t n, Rng& rng) {
    Mat pts(n, 3);
    for (std::size_t i = 0; i < n; ++i) {
        Vec3 local{rng.uniform(-0.5, 0.5) * box.w, rng.uniform(-0.5, 0.5) * box.l,
                   rng.uniform(-0.5, 0.5) * box.h};
        pts.set_row3(i, from_object_frame(local, box));
    }
    return pts;
}

struct Instance {
    Box7 template_box{{0, 0, 0}, 1.8, 4.2, 1.6, 0.0};
    Box7 reference_box{{0.6, 0.3, 0.05}, 1.8, 4.2, 1.6, 0.15};
    Mat template_points;
    Mat search_points;

    explicit Instance(std::uint64_t seed) {
        Rng rng(seed);
        template_points = box_cloud_sample(template_box, 16, rng);
        Mat inner = box_cloud_sample(reference_box, 18, rng);
        Mat outer = box_cloud_sample(enlarge(reference_box, 0.8), 6, rng);
        search_points = Mat(24, 3);
        for (std::size_t i = 0; i < 18; ++i) search_points.set_row3(i, inner.row3(i));
        for (std::size_t i = 0; i < 6; ++i) search_points.set_row3(18 + i, outer.row3(i));
    }
};

}  // namespace

TEST_SUITE_BEGIN("model");

TEST_CASE("forward produces aligned shapes end to end") {
    Rng rng(21);
    BatModel model(micro_cfg(), rng);
    Instance inst(4);

    auto fwd = model.forward(inst.template_points, inst.template_box, inst.search_points, nullptr);
    CHECK(fwd.template_seeds.positions.rows() == 4);
    CHECK(fwd.template_seeds.features.shape() == std::vector<std::size_t>{4, 8});
    CHECK(fwd.search_seeds.positions.rows() == 6);
    CHECK(fwd.search_seeds.features.shape() == std::vector<std::size_t>{6, 8});
    CHECK(fwd.template_boxcloud.rows() == 4);
    CHECK(fwd.template_boxcloud.cols() == 9);
    CHECK(fwd.fused.positions.rows() == 6);
    CHECK(fwd.fused.features.shape() == std::vector<std::size_t>{6, 8});
    CHECK(fwd.fused.predicted_boxcloud.shape() == std::vector<std::size_t>{6, 9});
    CHECK(fwd.votes.vote_positions.shape() == std::vector<std::size_t>{6, 3});
    CHECK(fwd.votes.seed_scores.shape() == std::vector<std::size_t>{6, 1});
    CHECK(fwd.proposals.centers.shape() == std::vector<std::size_t>{2, 3});
    CHECK(fwd.proposals.scores.shape() == std::vector<std::size_t>{2, 1});
    for (std::size_t i = 0; i < 6; ++i)
        for (std::size_t j = 0; j < 3; ++j)
            CHECK(fwd.fused.positions.at(i, j) == fwd.search_seeds.positions.at(i, j));
}

TEST_CASE("loss decomposes into boxcloud plus weighted rpn terms") {
    ModelConfig cfg = micro_cfg();
    Instance inst(7);

    Rng r1(33);
    BatModel m1(cfg, r1);
    Tape t1;
    auto f1 = m1.forward(inst.template_points, inst.template_box, inst.search_points, &t1);
    auto l1 = sample_loss(m1, f1, inst.reference_box);
    CHECK(std::isfinite(l1.total.value()));
    CHECK(l1.total.value() > 0.0);
    CHECK(l1.total.value() == l1.bc.value() + l1.rpn.total.value());

    cfg.lambda_rpn = 2.0;
    Rng r2(33);
    BatModel m2(cfg, r2);
    Tape t2;
    auto f2 = m2.forward(inst.template_points, inst.template_box, inst.search_points, &t2);
    auto l2 = sample_loss(m2, f2, inst.reference_box);
    CHECK(l2.bc.value() == l1.bc.value());
    CHECK(l2.rpn.total.value() == l1.rpn.total.value());
    CHECK(l2.total.value() == l2.bc.value() + 2.0 * l2.rpn.total.value());
}

TEST_CASE("repeated runs are bit-identical") {
    Instance inst(9);
    double first = 0.0;
    for (int run = 0; run < 2; ++run) {
        Rng rng(5);
        BatModel model(micro_cfg(), rng);
        Tape tape;
        auto fwd = model.forward(inst.template_points, inst.template_box, inst.search_points, &tape);
        auto loss = sample_loss(model, fwd, inst.reference_box);
        if (run == 0)
            first = loss.total.value();
        else
            CHECK(loss.total.value() == first);
    }
}

TEST_CASE("ablation variants run and gate the boxcloud loss") {
    Instance inst(11);
    auto run = [&](FusionMode mode, bool use_bc) {
        ModelConfig cfg = micro_cfg();
        cfg.fusion = mode;
        cfg.use_boxcloud = use_bc;
        Rng rng(19);
        BatModel model(cfg, rng);
        Tape tape;
        auto fwd = model.forward(inst.template_points, inst.template_box, inst.search_points, &tape);
        return sample_loss(model, fwd, inst.reference_box);
    };

    auto vanilla_plain = run(FusionMode::Vanilla, false);
    CHECK(vanilla_plain.bc.value() == 0.0);
    CHECK(std::isfinite(vanilla_plain.total.value()));
    CHECK(vanilla_plain.total.value() == vanilla_plain.rpn.total.value());

    auto vanilla_bc = run(FusionMode::Vanilla, true);
    CHECK(vanilla_bc.bc.value() > 0.0);
    CHECK(std::isfinite(vanilla_bc.total.value()));

    auto feature_cmp = run(FusionMode::FeatureComparison, true);
    CHECK(std::isfinite(feature_cmp.total.value()));

    auto full = run(FusionMode::Baff, true);
    CHECK(std::isfinite(full.total.value()));
    CHECK(full.total.value() != vanilla_bc.total.value());
}

TEST_CASE("gradients reach the upstream layers and stay finite") {
    Rng rng(13);
    BatModel model(micro_cfg(), rng);
    Instance inst(2);

    Tape tape;
    auto fwd = model.forward(inst.template_points, inst.template_box, inst.search_points, &tape);
    auto loss = sample_loss(model, fwd, inst.reference_box);
    tape.backward(loss.total);

    auto params = model.params();
    REQUIRE(params.size() == 36);
    for (auto& p : params) {
        Tensor g = tape.grad(tape.watch(p.value));
        bool nonzero = false;
        for (std::size_t i = 0; i < g.size(); ++i) {
            REQUIRE(std::isfinite(g[i]));
            if (g[i] != 0.0) nonzero = true;
        }
        INFO("param ", p.name);
        CHECK(g.size() == p.value.size());
        // The vote head's last layer starts at zero, so its hidden layers
        // see no gradient until the first step moves it off zero.
        bool behind_zero_init = p.name == "rpn.vote.w0" || p.name == "rpn.vote.b0" ||
                                p.name == "rpn.vote.w1" || p.name == "rpn.vote.b1";
        CHECK(nonzero == !behind_zero_init);
    }
}

TEST_CASE("full graph gradients match finite differences") {
    Rng rng(31);
    BatModel model(micro_cfg(), rng);
    Instance inst(6);

    std::vector<Tensor> params;
    for (auto& p : model.params()) params.push_back(p.value);
    auto forward = [&](Tape& tape) {
        auto fwd = model.forward(inst.template_points, inst.template_box, inst.search_points, &tape);
        return sample_loss(model, fwd, inst.reference_box).total;
    };
    battest::check_gradients(params, forward, 1e-5, 1e-4, 1e-7);
}

TEST_CASE("empty inputs are rejected") {
    Rng rng(3);
    BatModel model(micro_cfg(), rng);
    Instance inst(8);
    Mat empty(0, 3);
    CHECK_THROWS_AS(model.forward(empty, inst.template_box, inst.search_points, nullptr),
                    EmptySetError);
    CHECK_THROWS_AS(model.forward(inst.template_points, inst.template_box, empty, nullptr),
                    EmptySetError);
}

TEST_SUITE_END();
