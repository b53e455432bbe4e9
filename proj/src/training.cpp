#include "bat/training.hpp"

#include <chrono>
#include <cmath>
#include <ostream>

#include "bat/checkpoint.hpp"

namespace bat {

void adam_apply(std::vector<NamedTensor>& params, const std::vector<Tensor>& grads,
                AdamState& state, double lr) {
    if (params.size() != grads.size())
        throw ArgumentError("adam_apply: params and grads disagree in count");
    if (state.m.empty()) {
        for (const auto& p : params) {
            state.m.push_back(Tensor(p.value.shape()));
            state.v.push_back(Tensor(p.value.shape()));
        }
    }
    if (state.m.size() != params.size())
        throw ArgumentError("adam_apply: optimizer state does not match parameter count");

    state.t += 1;
    const double b1 = state.cfg.beta1, b2 = state.cfg.beta2;
    const double corr1 = 1.0 - std::pow(b1, double(state.t));
    const double corr2 = 1.0 - std::pow(b2, double(state.t));
    for (std::size_t pi = 0; pi < params.size(); ++pi) {
        Tensor& p = params[pi].value;
        if (grads[pi].size() != p.size())
            throw ArgumentError("adam_apply: gradient shape mismatch for " + params[pi].name);
        double* pd = p.data();
        double* md = state.m[pi].data();
        double* vd = state.v[pi].data();
        for (std::size_t i = 0; i < p.size(); ++i) {
            const double g = grads[pi][i];
            if (!std::isfinite(g))
                throw NumericError("non-finite gradient in parameter " + params[pi].name);
            md[i] = b1 * md[i] + (1.0 - b1) * g;
            vd[i] = b2 * vd[i] + (1.0 - b2) * g * g;
            const double mhat = md[i] / corr1;
            const double vhat = vd[i] / corr2;
            pd[i] -= lr * mhat / (std::sqrt(vhat) + state.cfg.eps);
        }
    }
}

double lr_schedule(const TrainConfig& cfg, std::size_t epoch) {
    return cfg.base_lr / std::pow(cfg.lr_decay, double(epoch / cfg.lr_epochs));
}

TrainStats train(BatModel& model, const std::vector<TrackSequence>& data, const TrainConfig& cfg,
                 std::ostream* log) {
    if (cfg.batch_size == 0) throw ArgumentError("batch size must be positive");
    if (cfg.lr_epochs == 0) throw ArgumentError("lr schedule period must be positive");

    std::vector<std::pair<std::size_t, std::size_t>> pool;
    for (std::size_t s = 0; s < data.size(); ++s)
        for (std::size_t t = 1; t < data[s].frames.size(); ++t) pool.push_back({s, t});
    if (pool.empty()) throw ArgumentError("training set holds no consecutive frame pairs");

    auto params = model.params();
    AdamState state;
    Rng rng(cfg.seed);
    TrainStats stats;

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        const double lr = lr_schedule(cfg, epoch);
        for (std::size_t i = pool.size(); i > 1; --i)
            std::swap(pool[i - 1], pool[rng.index(i)]);

        std::size_t step_in_epoch = 0;
        for (std::size_t start = 0; start < pool.size(); start += cfg.batch_size) {
            auto t0 = std::chrono::steady_clock::now();
            Tape tape;
            Tensor total = Tensor::scalar(0.0);
            double bc_sum = 0.0, vote_sum = 0.0, seed_sum = 0.0, score_sum = 0.0, reg_sum = 0.0;
            std::size_t n_ok = 0;
            const std::size_t stop = std::min(start + cfg.batch_size, pool.size());
            for (std::size_t bi = start; bi < stop; ++bi) {
                const auto [s, t] = pool[bi];
                TrainingSample sample;
                try {
                    sample = make_training_sample(data[s], t, cfg.samples, rng);
                } catch (const EmptySetError&) {
                    continue;
                }
                auto fwd = model.forward(sample.template_points, sample.template_box,
                                         sample.search_points, &tape);
                auto loss = sample_loss(model, fwd, sample.reference_box);
                total = add(total, loss.total);
                bc_sum += loss.bc.value();
                vote_sum += loss.rpn.vote.value();
                seed_sum += loss.rpn.seed.value();
                score_sum += loss.rpn.prop_score.value();
                reg_sum += loss.rpn.prop_reg.value();
                ++n_ok;
            }
            if (n_ok == 0) continue;

            Tensor batch_loss = scale(total, 1.0 / double(n_ok));
            tape.backward(batch_loss);
            std::vector<Tensor> grads;
            grads.reserve(params.size());
            for (auto& p : params) grads.push_back(tape.grad(tape.watch(p.value)));
            adam_apply(params, grads, state, lr);

            auto t1 = std::chrono::steady_clock::now();
            const double ms =
                std::chrono::duration_cast<std::chrono::duration<double, std::milli>>(t1 - t0)
                    .count();
            const double lval = batch_loss.value();
            stats.step_losses.push_back(lval);
            stats.final_loss = lval;
            ++stats.steps;
            if (log)
                (*log) << "epoch " << epoch << " step " << step_in_epoch << " loss " << lval
                       << " bc " << bc_sum / double(n_ok) << " vote " << vote_sum / double(n_ok)
                       << " seed " << seed_sum / double(n_ok) << " score "
                       << score_sum / double(n_ok) << " reg " << reg_sum / double(n_ok) << " lr "
                       << lr << " ms " << ms << "\n";
            ++step_in_epoch;
        }

        if (!cfg.checkpoint_path.empty() && cfg.checkpoint_every > 0 &&
            (epoch + 1) % cfg.checkpoint_every == 0)
            save_checkpoint(cfg.checkpoint_path, params);
    }
    if (!cfg.checkpoint_path.empty()) save_checkpoint(cfg.checkpoint_path, params);
    return stats;
}

}  // namespace bat
