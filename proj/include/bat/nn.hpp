#pragma once

#include <string>
#include <vector>

#include "bat/checkpoint.hpp"
#include "bat/common.hpp"
#include "bat/tensor.hpp"

namespace bat {

// Fully connected layer, weights (in, out), bias (out). Both are drawn
// uniform in [-1/sqrt(in), 1/sqrt(in)], weights first, row-major.
struct Linear {
    Tensor w;
    Tensor b;

    Linear() = default;
    Linear(std::size_t in, std::size_t out, Rng& rng);

    // tape == nullptr runs detached inference.
    Tensor apply(const Tensor& x, Tape* tape) const;
};

// Stack of Linear layers with ReLU between them. relu_last controls the
// activation after the final layer: heads emitting coordinates or logits
// keep it off, feature encoders keep it on.
struct Mlp {
    std::vector<Linear> layers;
    bool relu_last = false;

    Mlp() = default;
    Mlp(const std::vector<std::size_t>& widths, bool relu_last, Rng& rng);

    Tensor apply(const Tensor& x, Tape* tape) const;

    // Appends {prefix.w0, prefix.b0, prefix.w1, ...}; the returned tensors
    // alias layer storage, so writing through them updates the layers.
    void collect(const std::string& prefix, std::vector<NamedTensor>& out);
};

// Copies values from src into the same-named tensor of dst. Shapes must
// match; every dst name must be present in src.
void assign_params(std::vector<NamedTensor>& dst, const std::vector<NamedTensor>& src);

}  // namespace bat
