#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "bat/model.hpp"
#include "bat/tracker.hpp"

namespace bat {

struct AdamConfig {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// First/second gradient moments per parameter, aligned by index.
struct AdamState {
    AdamConfig cfg;
    std::vector<Tensor> m;
    std::vector<Tensor> v;
    std::size_t t = 0;
};

// Bias-corrected Adam update, in place. Throws NumericError naming the
// parameter on a non-finite gradient entry.
void adam_apply(std::vector<NamedTensor>& params, const std::vector<Tensor>& grads,
                AdamState& state, double lr);

struct TrainConfig {
    std::size_t epochs = 60;
    std::size_t batch_size = 8;
    double base_lr = 1e-3;
    double lr_decay = 5.0;
    std::size_t lr_epochs = 12;
    std::uint64_t seed = 0;
    // Zero means only the final checkpoint; empty path disables saving.
    std::size_t checkpoint_every = 20;
    std::string checkpoint_path;
    SampleGenConfig samples;
};

double lr_schedule(const TrainConfig& cfg, std::size_t epoch);

struct TrainStats {
    std::size_t steps = 0;
    std::vector<double> step_losses;
    double final_loss = 0.0;
};

// Supervised pairs are drawn per epoch from every (sequence, frame t>=1)
// combination; pairs whose crops come up empty are skipped. All randomness
// flows from cfg.seed.
TrainStats train(BatModel& model, const std::vector<TrackSequence>& data, const TrainConfig& cfg,
                 std::ostream* log);

}  // namespace bat
