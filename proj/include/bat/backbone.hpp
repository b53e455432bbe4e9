#pragma once

#include <vector>

#include "bat/common.hpp"
#include "bat/nn.hpp"
#include "bat/tensor.hpp"

namespace bat {

// Seed positions with their learned features. Raw input clouds carry an
// empty feature tensor; the first abstraction layer then consumes relative
// positions only.
struct SeedSet {
    Mat positions;
    Tensor features;
};

struct BackboneConfig {
    std::size_t feature_width = 64;
    double radius1 = 0.3;
    double radius2 = 0.5;
    std::size_t max_k = 16;
};

// Groups each sampled center's neighborhood, lifts every member through a
// shared MLP, and max-pools per group.
SeedSet set_abstraction(const SeedSet& in, std::size_t m_out, double radius,
                        std::size_t max_k, const Mlp& mlp, Tape* tape);

// Two-stage set-abstraction encoder shared between template and search
// clouds. Layer sizes run input -> 2*n_seeds -> n_seeds.
struct Backbone {
    BackboneConfig cfg;
    Mlp layer1;
    Mlp layer2;

    Backbone() = default;
    Backbone(const BackboneConfig& cfg, Rng& rng);

    SeedSet encode(const Mat& points, std::size_t n_seeds, Tape* tape) const;
    void collect(std::vector<NamedTensor>& out);
};

}  // namespace bat
