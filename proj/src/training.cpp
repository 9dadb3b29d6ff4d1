#include "sensegen/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "sensegen/data.hpp"
#include "sensegen/errors.hpp"

namespace sensegen {

void TrainConfig::validate() const {
  if (minibatch == 0 || d_epochs == 0 || g_epochs == 0 || rounds == 0 ||
      tbptt_window == 0 || minibatches_per_round == 0) {
    throw ConfigError("train config: counts must be positive");
  }
  if (learning_rate < 0.0) throw ConfigError("train config: learning_rate must be >= 0");
  if (d_learning_rate < 0.0) {
    throw ConfigError("train config: d_learning_rate must be >= 0");
  }
  if (rmsprop_decay <= 0.0 || rmsprop_decay >= 1.0) {
    throw ConfigError("train config: rmsprop_decay must lie in (0,1)");
  }
  if (rmsprop_eps <= 0.0) throw ConfigError("train config: rmsprop_eps must be positive");
  if (clip_norm <= 0.0) throw ConfigError("train config: clip_norm must be positive");
  if (holdout_fraction < 0.0 || holdout_fraction >= 1.0) {
    throw ConfigError("train config: holdout_fraction must lie in [0,1)");
  }
}

nlohmann::json to_json(const TrainConfig& cfg) {
  return {{"minibatch", cfg.minibatch},
          {"d_epochs", cfg.d_epochs},
          {"g_epochs", cfg.g_epochs},
          {"rounds", cfg.rounds},
          {"tbptt_window", cfg.tbptt_window},
          {"learning_rate", cfg.learning_rate},
          {"d_learning_rate", cfg.d_learning_rate},
          {"rmsprop_decay", cfg.rmsprop_decay},
          {"rmsprop_eps", cfg.rmsprop_eps},
          {"clip_norm", cfg.clip_norm},
          {"seed", cfg.seed},
          {"minibatches_per_round", cfg.minibatches_per_round},
          {"holdout_fraction", cfg.holdout_fraction},
          {"clip_mode", cfg.clip_mode == ClipMode::global_norm ? "global_norm" : "per_element"},
          {"d_reset_per_round", cfg.d_reset_per_round}};
}

TrainConfig train_config_from_json(const nlohmann::json& j) {
  TrainConfig cfg;
  cfg.minibatch = j.at("minibatch").get<std::size_t>();
  cfg.d_epochs = j.at("d_epochs").get<std::size_t>();
  cfg.g_epochs = j.at("g_epochs").get<std::size_t>();
  cfg.rounds = j.at("rounds").get<std::size_t>();
  cfg.tbptt_window = j.at("tbptt_window").get<std::size_t>();
  cfg.learning_rate = j.at("learning_rate").get<double>();
  cfg.d_learning_rate = j.value("d_learning_rate", 0.0);
  cfg.rmsprop_decay = j.at("rmsprop_decay").get<double>();
  cfg.rmsprop_eps = j.at("rmsprop_eps").get<double>();
  cfg.clip_norm = j.at("clip_norm").get<double>();
  cfg.seed = j.at("seed").get<std::uint64_t>();
  cfg.minibatches_per_round = j.at("minibatches_per_round").get<std::size_t>();
  cfg.holdout_fraction = j.at("holdout_fraction").get<double>();
  std::string mode = j.at("clip_mode").get<std::string>();
  cfg.clip_mode = mode == "per_element" ? ClipMode::per_element : ClipMode::global_norm;
  cfg.d_reset_per_round = j.value("d_reset_per_round", false);
  return cfg;
}

RmsProp::RmsProp(double learning_rate, double decay, double eps)
    : lr_(learning_rate), decay_(decay), eps_(eps) {
  if (decay_ <= 0.0 || decay_ >= 1.0) throw ContractError("rmsprop: decay must lie in (0,1)");
  if (eps_ <= 0.0) throw ContractError("rmsprop: eps must be positive");
}

void RmsProp::step(std::span<const ParamRef> params, const std::vector<Tensor>& grads) {
  if (params.size() != grads.size()) {
    throw ContractError("rmsprop: " + std::to_string(params.size()) + " params vs " +
                        std::to_string(grads.size()) + " gradients");
  }
  if (cache_.empty()) {
    for (const ParamRef& p : params) cache_.push_back(Tensor::zeros(p.tensor->shape()));
  }
  if (cache_.size() != params.size()) {
    throw ContractError("rmsprop: state tracks a different parameter set");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor& p = *params[i].tensor;
    const Tensor& g = grads[i];
    Tensor& c = cache_[i];
    if (!p.same_shape(g) || !p.same_shape(c)) {
      throw ContractError("rmsprop: shape mismatch on '" + params[i].name + "': param " +
                          p.shape_str() + " vs grad " + g.shape_str());
    }
    for (std::size_t k = 0; k < p.size(); ++k) {
      c[k] = decay_ * c[k] + (1.0 - decay_) * g[k] * g[k];
      p[k] -= lr_ * g[k] / (std::sqrt(c[k]) + eps_);
    }
  }
  ++steps_;
}

namespace {

std::vector<Tensor> clip_by_mode(std::vector<Tensor> grads, const TrainConfig& cfg) {
  return cfg.clip_mode == ClipMode::global_norm
             ? clip_gradients(std::move(grads), cfg.clip_norm)
             : clip_gradients_per_element(std::move(grads), cfg.clip_norm);
}

std::vector<Tensor> grads_for(const Gradients& grads, const std::vector<Var>& vars) {
  std::vector<Tensor> out;
  out.reserve(vars.size());
  for (Var v : vars) out.push_back(grads.at(v));
  return out;
}

// Sample count indices from [0, n): a shuffled prefix when the pool is big
// enough, independent draws otherwise.
std::vector<std::size_t> sample_indices(std::size_t n, std::size_t count, Rng& rng) {
  std::vector<std::size_t> idx;
  if (count <= n) {
    idx.resize(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    rng.shuffle(idx);
    idx.resize(count);
  } else {
    idx.reserve(count);
    for (std::size_t i = 0; i < count; ++i) idx.push_back(rng.index(n));
  }
  return idx;
}

std::vector<std::vector<double>> pick(const std::vector<std::vector<double>>& pool,
                                      const std::vector<std::size_t>& idx) {
  std::vector<std::vector<double>> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(pool[i]);
  return out;
}

}  // namespace

GenTrainResult train_generator(GeneratorModel& model,
                               const std::vector<std::vector<double>>& windows,
                               const TrainConfig& cfg) {
  cfg.validate();
  if (windows.empty()) throw ConfigError("train_generator: empty dataset");
  for (const auto& w : windows) {
    if (w.size() != cfg.tbptt_window + 1) {
      throw ConfigError("train_generator: window of " + std::to_string(w.size()) +
                        " values, expected tbptt_window+1 = " +
                        std::to_string(cfg.tbptt_window + 1));
    }
  }

  std::vector<ParamRef> params = model.parameters();
  RmsProp opt(cfg.learning_rate, cfg.rmsprop_decay, cfg.rmsprop_eps);
  Rng shuffle_rng = Rng(cfg.seed).fork("train-generator/shuffle");

  GenTrainResult result;
  std::vector<double> window_nll(windows.size(), 0.0);
  std::vector<std::size_t> order(windows.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (std::size_t epoch = 0; epoch < cfg.g_epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    for (std::size_t start = 0; start < order.size(); start += cfg.minibatch) {
      std::size_t stop = std::min(order.size(), start + cfg.minibatch);
      Tape tape;
      GeneratorVars vars = lift(tape, model);
      Var batch_loss{};
      for (std::size_t i = start; i < stop; ++i) {
        Var loss = sequence_nll(model, vars, windows[order[i]]);
        window_nll[order[i]] = loss.value()[0];
        batch_loss = i == start ? loss : add(batch_loss, loss);
      }
      batch_loss = axpb(batch_loss, 1.0 / static_cast<double>(stop - start), 0.0);
      Gradients grads = tape.backward(batch_loss);
      opt.step(params, clip_by_mode(grads_for(grads, vars.flat()), cfg));
    }
    // sum in index order so the epoch mean is order-independent
    double total = 0.0;
    for (double v : window_nll) total += v;
    result.epoch_mean_nll.push_back(total / static_cast<double>(windows.size()));
  }
  return result;
}

namespace {

struct Split {
  std::vector<std::vector<double>> train;
  std::vector<std::vector<double>> holdout;
};

Split split_holdout(const std::vector<std::vector<double>>& pool, double fraction,
                    Rng& rng) {
  std::vector<std::size_t> idx(pool.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  rng.shuffle(idx);
  std::size_t n_hold = static_cast<std::size_t>(
      std::floor(fraction * static_cast<double>(pool.size())));
  if (n_hold >= pool.size()) n_hold = pool.size() - 1;
  Split s;
  for (std::size_t i = 0; i < idx.size(); ++i) {
    (i < n_hold ? s.holdout : s.train).push_back(pool[idx[i]]);
  }
  return s;
}

}  // namespace

DiscTrainResult train_discriminator(DiscriminatorModel& model,
                                    const std::vector<std::vector<double>>& real,
                                    const std::vector<std::vector<double>>& fake,
                                    const TrainConfig& cfg) {
  cfg.validate();
  if (real.empty() || fake.empty()) {
    throw ConfigError("train_discriminator: both window sources must be non-empty");
  }

  Rng rng = Rng(cfg.seed).fork("train-discriminator");
  Split real_split = split_holdout(real, cfg.holdout_fraction, rng);
  Split fake_split = split_holdout(fake, cfg.holdout_fraction, rng);
  // fall back to the training windows when the pools are too small to hold out
  const auto& real_eval = real_split.holdout.empty() ? real_split.train : real_split.holdout;
  const auto& fake_eval = fake_split.holdout.empty() ? fake_split.train : fake_split.holdout;

  std::vector<ParamRef> params = model.parameters();
  double lr = cfg.d_learning_rate > 0.0 ? cfg.d_learning_rate : cfg.learning_rate;
  RmsProp opt(lr, cfg.rmsprop_decay, cfg.rmsprop_eps);

  DiscTrainResult result;
  for (std::size_t epoch = 0; epoch < cfg.d_epochs; ++epoch) {
    auto real_batch =
        pick(real_split.train, sample_indices(real_split.train.size(), cfg.minibatch, rng));
    auto fake_batch =
        pick(fake_split.train, sample_indices(fake_split.train.size(), cfg.minibatch, rng));
    Tape tape;
    DiscriminatorVars vars = lift(tape, model);
    Var loss = bce_loss(model, vars, real_batch, fake_batch);
    Gradients grads = tape.backward(loss);
    opt.step(params, clip_by_mode(grads_for(grads, vars.flat()), cfg));
    result.epoch_accuracy.push_back(accuracy(model, real_eval, fake_eval));
  }
  return result;
}

namespace {

// Fake windows for the discriminator: one continuous trace, first window
// dropped as warm-up so the zero-seed transient never reaches training.
std::vector<std::vector<double>> generated_windows(const GeneratorModel& gen,
                                                   std::size_t count,
                                                   std::size_t window_len, Rng& rng) {
  std::vector<double> trace = generate(gen, (count + 1) * window_len, 0.0, rng);
  std::vector<double> body(trace.begin() + static_cast<std::ptrdiff_t>(window_len),
                           trace.end());
  return window_series(body, window_len, window_len);
}

}  // namespace

std::vector<RoundMetrics> alternating_loop(GeneratorModel& gen, DiscriminatorModel& disc,
                                           const std::vector<double>& series,
                                           const TrainConfig& cfg,
                                           const RoundCallback& on_round) {
  cfg.validate();
  std::size_t d_window = disc.config.window_len;
  if (series.size() < d_window || series.size() < cfg.tbptt_window + 1) {
    throw ConfigError("alternating_loop: series of " + std::to_string(series.size()) +
                      " values is shorter than the configured windows");
  }

  auto d_pool = window_series(series, d_window, d_window);
  std::size_t g_stride = std::max<std::size_t>(1, (cfg.tbptt_window + 1) / 2);
  auto g_pool = window_series(series, cfg.tbptt_window + 1, g_stride);

  Rng master = Rng(cfg.seed).fork("alternating-loop");
  std::size_t per_round = cfg.minibatches_per_round * cfg.minibatch;

  std::vector<RoundMetrics> metrics;
  for (std::size_t round = 1; round <= cfg.rounds; ++round) {
    std::string tag = "round-" + std::to_string(round);
    Rng round_rng = master.fork(tag);

    // (1) real and (2) generated minibatch sets
    auto real_d = pick(d_pool, sample_indices(d_pool.size(), per_round, round_rng));
    Rng gen_rng = round_rng.fork("sample-fake");
    auto fake_d = generated_windows(gen, per_round, d_window, gen_rng);

    // (3) discriminator phase
    if (cfg.d_reset_per_round) {
      disc = DiscriminatorModel::init(disc.config,
                                      round_rng.fork("reset-disc").next_u64());
    }
    TrainConfig d_cfg = cfg;
    d_cfg.seed = round_rng.fork("train-disc").next_u64();
    DiscTrainResult d_result = train_discriminator(disc, real_d, fake_d, d_cfg);
    // round accuracy: mean over the last quarter of the phase, a steadier
    // read of the converged discriminator than a single-epoch snapshot
    std::size_t tail = std::max<std::size_t>(1, d_result.epoch_accuracy.size() / 4);
    double d_accuracy = 0.0;
    for (std::size_t e = d_result.epoch_accuracy.size() - tail;
         e < d_result.epoch_accuracy.size(); ++e) {
      d_accuracy += d_result.epoch_accuracy[e];
    }
    d_accuracy /= static_cast<double>(tail);

    // (4) fresh samples; the generated set is drawn but the generator phase
    // consumes only real data
    auto real_g = pick(g_pool, sample_indices(g_pool.size(), per_round, round_rng));
    Rng gen_rng2 = round_rng.fork("resample-fake");
    (void)generated_windows(gen, per_round, d_window, gen_rng2);

    // (5) generator phase, NLL only
    TrainConfig g_cfg = cfg;
    g_cfg.seed = round_rng.fork("train-gen").next_u64();
    GenTrainResult g_result = train_generator(gen, real_g, g_cfg);

    metrics.push_back(RoundMetrics{round, d_accuracy, g_result.epoch_mean_nll.back()});
    if (on_round) on_round(metrics.back(), gen, disc);
  }
  return metrics;
}

BaselineModel BaselineModel::init(const BaselineConfig& cfg, std::uint64_t seed) {
  if (cfg.lstm_layers == 0 || cfg.lstm_units == 0 || cfg.fc_units == 0) {
    throw ConfigError("baseline config: all counts must be >= 1");
  }
  Rng rng = Rng(seed).fork("baseline-init");
  BaselineModel m;
  m.config = cfg;
  std::size_t in = 1;
  for (std::size_t l = 0; l < cfg.lstm_layers; ++l) {
    m.stack.push_back(init_lstm(in, cfg.lstm_units, rng));
    in = cfg.lstm_units;
  }
  m.fc4 = init_dense(cfg.fc_units, in, Activation::sigmoid, rng);
  m.out = init_dense(1, cfg.fc_units, Activation::linear, rng);
  return m;
}

std::vector<ParamRef> BaselineModel::parameters() {
  std::vector<ParamRef> refs;
  for (std::size_t l = 0; l < stack.size(); ++l) {
    auto layer = params_of(stack[l], "lstm" + std::to_string(l));
    refs.insert(refs.end(), layer.begin(), layer.end());
  }
  auto f4 = params_of(fc4, "fc4");
  refs.insert(refs.end(), f4.begin(), f4.end());
  auto o = params_of(out, "out");
  refs.insert(refs.end(), o.begin(), o.end());
  return refs;
}

std::vector<double> baseline_predictions(const BaselineModel& m,
                                         std::span<const double> window) {
  if (window.size() < 2) {
    throw ContractError("baseline: window must hold at least 2 values");
  }
  std::vector<LSTMState> states;
  for (std::size_t l = 0; l < m.stack.size(); ++l) {
    states.push_back(LSTMState::zeros(m.stack[l].hidden_dim()));
  }
  std::vector<double> preds;
  preds.reserve(window.size() - 1);
  for (std::size_t t = 0; t + 1 < window.size(); ++t) {
    Tensor input = Tensor::vector({window[t]});
    const Tensor* layer_in = &input;
    for (std::size_t l = 0; l < states.size(); ++l) {
      states[l] = lstm_step(m.stack[l], *layer_in, states[l]);
      layer_in = &states[l].h;
    }
    preds.push_back(dense_forward(m.out, dense_forward(m.fc4, states.back().h))[0]);
  }
  return preds;
}

double rmse_baseline_loss(const BaselineModel& m, std::span<const double> window) {
  std::vector<double> preds = baseline_predictions(m, window);
  double total = 0.0;
  for (std::size_t t = 0; t < preds.size(); ++t) {
    double e = window[t + 1] - preds[t];
    total += e * e;
  }
  return total;
}

namespace {

struct BaselineVars {
  std::vector<LSTMVars> stack;
  DenseVars fc4;
  DenseVars out;

  std::vector<Var> flat() const {
    std::vector<Var> all;
    for (const LSTMVars& l : stack) {
      auto vs = vars_of(l);
      all.insert(all.end(), vs.begin(), vs.end());
    }
    auto f4 = vars_of(fc4);
    all.insert(all.end(), f4.begin(), f4.end());
    auto o = vars_of(out);
    all.insert(all.end(), o.begin(), o.end());
    return all;
  }
};

BaselineVars lift(Tape& tape, const BaselineModel& m) {
  BaselineVars v;
  for (const LSTMParams& p : m.stack) v.stack.push_back(lift(tape, p));
  v.fc4 = lift(tape, m.fc4);
  v.out = lift(tape, m.out);
  return v;
}

Var taped_baseline_loss(Tape& tape, const BaselineModel& m, const BaselineVars& v,
                        std::span<const double> window) {
  if (window.size() < 2) {
    throw ContractError("baseline: window must hold at least 2 values");
  }
  std::vector<LSTMStateVars> states;
  for (std::size_t l = 0; l < v.stack.size(); ++l) {
    states.push_back(lift(tape, LSTMState::zeros(m.stack[l].hidden_dim())));
  }
  Var total{};
  for (std::size_t t = 0; t + 1 < window.size(); ++t) {
    Var input = tape.leaf(Tensor::vector({window[t]}));
    for (std::size_t l = 0; l < states.size(); ++l) {
      states[l] = lstm_step(v.stack[l], input, states[l]);
      input = states[l].h;
    }
    Var y = dense_forward(v.out, dense_forward(v.fc4, states.back().h));
    Var err = axpb(y, -1.0, window[t + 1]);  // x_{t+1} - y_t
    Var sq = mul(err, err);
    total = t == 0 ? sq : add(total, sq);
  }
  return sum(total);
}

}  // namespace

BaselineTrainResult train_baseline(BaselineModel& model,
                                   const std::vector<std::vector<double>>& windows,
                                   const TrainConfig& cfg) {
  cfg.validate();
  if (windows.empty()) throw ConfigError("train_baseline: empty dataset");
  std::size_t steps_per_window = windows[0].size() - 1;

  std::vector<ParamRef> params = model.parameters();
  RmsProp opt(cfg.learning_rate, cfg.rmsprop_decay, cfg.rmsprop_eps);
  Rng shuffle_rng = Rng(cfg.seed).fork("train-baseline/shuffle");

  BaselineTrainResult result;
  std::vector<double> window_loss(windows.size(), 0.0);
  std::vector<std::size_t> order(windows.size());
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (std::size_t epoch = 0; epoch < cfg.g_epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    for (std::size_t start = 0; start < order.size(); start += cfg.minibatch) {
      std::size_t stop = std::min(order.size(), start + cfg.minibatch);
      Tape tape;
      BaselineVars vars = lift(tape, model);
      Var batch_loss{};
      for (std::size_t i = start; i < stop; ++i) {
        Var loss = taped_baseline_loss(tape, model, vars, windows[order[i]]);
        window_loss[order[i]] = loss.value()[0];
        batch_loss = i == start ? loss : add(batch_loss, loss);
      }
      batch_loss = axpb(batch_loss, 1.0 / static_cast<double>(stop - start), 0.0);
      Gradients grads = tape.backward(batch_loss);
      opt.step(params, clip_by_mode(grads_for(grads, vars.flat()), cfg));
    }
    double total = 0.0;
    for (double v : window_loss) total += v;
    result.epoch_mean_sq_error.push_back(
        total / static_cast<double>(windows.size() * steps_per_window));
  }
  return result;
}

}  // namespace sensegen
