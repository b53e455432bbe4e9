#pragma once

#include <doctest.h>

#include <functional>
#include <vector>

#include "bat/tensor.hpp"

namespace battest {

// Central finite differences against the tape gradient for every entry of
// every parameter. forward() must watch the given tensors on the tape it
// receives and return a scalar loss.
inline void check_gradients(std::vector<bat::Tensor> params,
                            const std::function<bat::Tensor(bat::Tape&)>& forward,
                            double step = 1e-5, double rel_tol = 1e-6, double abs_tol = 1e-8) {
    bat::Tape tape;
    bat::Tensor loss = forward(tape);
    tape.backward(loss);
    for (std::size_t pi = 0; pi < params.size(); ++pi) {
        bat::Tensor analytic = tape.grad(tape.watch(params[pi]));
        double* vals = params[pi].data();
        for (std::size_t i = 0; i < params[pi].size(); ++i) {
            const double saved = vals[i];
            vals[i] = saved + step;
            bat::Tape tp;
            const double lo_plus = forward(tp).value();
            vals[i] = saved - step;
            bat::Tape tm;
            const double lo_minus = forward(tm).value();
            vals[i] = saved;
            const double fd = (lo_plus - lo_minus) / (2.0 * step);
            const double an = analytic[i];
            const double err = std::fabs(an - fd);
            const double bound = std::max(abs_tol, rel_tol * std::max(std::fabs(an), std::fabs(fd)));
            INFO("param ", pi, " entry ", i, ": analytic ", an, " fd ", fd);
            CHECK(err <= bound);
        }
    }
}

inline bat::Tensor random_tensor(std::vector<std::size_t> shape, bat::Rng& rng, double lo = -1.0,
                                 double hi = 1.0) {
    bat::Tensor t(std::move(shape));
    for (std::size_t i = 0; i < t.size(); ++i) t.data()[i] = rng.uniform(lo, hi);
    return t;
}

}  // namespace battest
