#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "sensegen/checkpoint.hpp"
#include "sensegen/discriminator.hpp"
#include "sensegen/generator.hpp"
#include "sensegen/rng.hpp"

namespace sensegen {

enum class ClipMode { global_norm, per_element };

struct TrainConfig {
  std::size_t minibatch = 32;
  std::size_t d_epochs = 200;
  std::size_t g_epochs = 100;
  std::size_t rounds = 10;
  std::size_t tbptt_window = 100;
  double learning_rate = 1e-3;
  // discriminator phases use this rate when > 0, learning_rate otherwise
  double d_learning_rate = 0.0;
  double rmsprop_decay = 0.9;
  double rmsprop_eps = 1e-6;
  double clip_norm = 5.0;
  std::uint64_t seed = 0;
  // how many minibatches form one round's sampled set
  std::size_t minibatches_per_round = 8;
  double holdout_fraction = 0.25;
  ClipMode clip_mode = ClipMode::global_norm;
  // retrain the discriminator from a fresh init every round instead of
  // continuing; keeps it a per-round evaluator of the current generator
  bool d_reset_per_round = false;

  void validate() const;
};

nlohmann::json to_json(const TrainConfig& cfg);
TrainConfig train_config_from_json(const nlohmann::json& j);

// cache <- decay*cache + (1-decay)*g^2; p <- p - lr*g/(sqrt(cache)+eps)
class RmsProp {
public:
  RmsProp(double learning_rate, double decay, double eps);

  void step(std::span<const ParamRef> params, const std::vector<Tensor>& grads);

  std::size_t steps() const { return steps_; }
  const std::vector<Tensor>& cache() const { return cache_; }

private:
  double lr_, decay_, eps_;
  std::vector<Tensor> cache_;
  std::size_t steps_ = 0;
};

struct GenTrainResult {
  std::vector<double> epoch_mean_nll;  // mean per-window NLL, one entry per epoch
};

// Minibatch NLL training over fixed-length windows (tbptt_window + 1 values
// each). LSTM state resets to zero at every window start.
GenTrainResult train_generator(GeneratorModel& model,
                               const std::vector<std::vector<double>>& windows,
                               const TrainConfig& cfg);

struct DiscTrainResult {
  std::vector<double> epoch_accuracy;  // held-out accuracy, one entry per epoch
};

// Per epoch: draw m windows per class, one cross-entropy step. A balanced
// holdout_fraction slice of each side is never trained on and supplies the
// accuracy history.
DiscTrainResult train_discriminator(DiscriminatorModel& model,
                                    const std::vector<std::vector<double>>& real,
                                    const std::vector<std::vector<double>>& fake,
                                    const TrainConfig& cfg);

struct RoundMetrics {
  std::size_t round = 0;  // 1-based
  double d_accuracy = 0.0;
  double g_nll = 0.0;
};

using RoundCallback =
    std::function<void(const RoundMetrics&, GeneratorModel&, DiscriminatorModel&)>;

// Alternation over cfg.rounds: sample real and generated windows, train the
// discriminator, resample, train the generator on real data only. The
// generator loss never sees the discriminator (no adversarial term).
// on_round, when set, fires after each completed round.
std::vector<RoundMetrics> alternating_loop(GeneratorModel& gen, DiscriminatorModel& disc,
                                           const std::vector<double>& series,
                                           const TrainConfig& cfg,
                                           const RoundCallback& on_round = {});

// ---- deterministic next-step baseline (the rejected setup) ----

struct BaselineConfig {
  std::size_t lstm_layers = 1;
  std::size_t lstm_units = 16;
  std::size_t fc_units = 8;
};

// Same trunk as the generator but a single linear output treated as the
// next-step prediction.
struct BaselineModel {
  BaselineConfig config;
  std::vector<LSTMParams> stack;
  DenseParams fc4;
  DenseParams out;

  static BaselineModel init(const BaselineConfig& cfg, std::uint64_t seed);
  std::vector<ParamRef> parameters();
};

// One-step predictions y_1..y_{T-1} for a window x_1..x_T.
std::vector<double> baseline_predictions(const BaselineModel& m,
                                         std::span<const double> window);

// Sum over t of (x_{t+1} - y_t)^2.
double rmse_baseline_loss(const BaselineModel& m, std::span<const double> window);

struct BaselineTrainResult {
  std::vector<double> epoch_mean_sq_error;  // per prediction step
};

BaselineTrainResult train_baseline(BaselineModel& model,
                                   const std::vector<std::vector<double>>& windows,
                                   const TrainConfig& cfg);

}  // namespace sensegen
