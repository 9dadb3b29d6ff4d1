#include "sensegen/generator.hpp"

#include <string>

#include "sensegen/errors.hpp"

namespace sensegen {

void GeneratorConfig::validate() const {
  if (lstm_layers == 0 || lstm_units == 0 || fc_units == 0 || mixtures == 0) {
    throw ConfigError("generator config: all counts must be >= 1");
  }
  if (sigma_floor < 0.0) throw ConfigError("generator config: sigma_floor must be >= 0");
}

GeneratorModel GeneratorModel::init(const GeneratorConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  Rng rng = Rng(seed).fork("generator-init");
  GeneratorModel m;
  m.config = cfg;
  std::size_t in = 1;
  for (std::size_t l = 0; l < cfg.lstm_layers; ++l) {
    m.stack.push_back(init_lstm(in, cfg.lstm_units, rng));
    in = cfg.lstm_units;
  }
  m.fc4 = init_dense(cfg.fc_units, in, Activation::sigmoid, rng);
  Activation head_act =
      cfg.head == HeadMode::sigmoid_literal ? Activation::sigmoid : Activation::linear;
  m.fc5 = init_dense(cfg.head_width(), cfg.fc_units, head_act, rng);
  return m;
}

GeneratorModel GeneratorModel::zeros(const GeneratorConfig& cfg) {
  cfg.validate();
  GeneratorModel m;
  m.config = cfg;
  std::size_t in = 1;
  for (std::size_t l = 0; l < cfg.lstm_layers; ++l) {
    m.stack.push_back(zeros_lstm(in, cfg.lstm_units));
    in = cfg.lstm_units;
  }
  m.fc4 = zeros_dense(cfg.fc_units, in, Activation::sigmoid);
  Activation head_act =
      cfg.head == HeadMode::sigmoid_literal ? Activation::sigmoid : Activation::linear;
  m.fc5 = zeros_dense(cfg.head_width(), cfg.fc_units, head_act);
  return m;
}

std::vector<ParamRef> GeneratorModel::parameters() {
  std::vector<ParamRef> refs;
  for (std::size_t l = 0; l < stack.size(); ++l) {
    auto layer = params_of(stack[l], "lstm" + std::to_string(l));
    refs.insert(refs.end(), layer.begin(), layer.end());
  }
  auto f4 = params_of(fc4, "fc4");
  refs.insert(refs.end(), f4.begin(), f4.end());
  auto f5 = params_of(fc5, "fc5");
  refs.insert(refs.end(), f5.begin(), f5.end());
  return refs;
}

void GeneratorModel::validate() const {
  config.validate();
  if (stack.size() != config.lstm_layers) {
    throw ConfigError("generator: stack has " + std::to_string(stack.size()) +
                      " layers, config says " + std::to_string(config.lstm_layers));
  }
  std::size_t in = 1;
  for (const LSTMParams& p : stack) {
    if (p.input_dim() != in || p.hidden_dim() != config.lstm_units) {
      throw ConfigError("generator: LSTM layer shape chain broken at input width " +
                        std::to_string(in));
    }
    in = p.hidden_dim();
  }
  if (fc4.input_dim() != in || fc4.output_dim() != config.fc_units) {
    throw ConfigError("generator: fc4 expects " + std::to_string(in) + " -> " +
                      std::to_string(config.fc_units));
  }
  if (fc5.input_dim() != config.fc_units || fc5.output_dim() != config.head_width()) {
    throw ConfigError("generator: fc5 expects " + std::to_string(config.fc_units) +
                      " -> " + std::to_string(config.head_width()));
  }
}

namespace {

std::vector<LSTMState> zero_states(const GeneratorConfig& cfg) {
  std::vector<LSTMState> states;
  states.reserve(cfg.lstm_layers);
  for (std::size_t l = 0; l < cfg.lstm_layers; ++l) {
    states.push_back(LSTMState::zeros(cfg.lstm_units));
  }
  return states;
}

GMMParams head_step(const GeneratorModel& m, const Tensor& top_h) {
  Tensor l4 = dense_forward(m.fc4, top_h);
  Tensor l5 = dense_forward(m.fc5, l4);
  return split_head(l5, m.config.sigma_floor);
}

}  // namespace

GeneratorOutput forward(const GeneratorModel& m, std::span<const double> xs,
                        std::vector<LSTMState> states) {
  m.validate();
  if (xs.empty()) throw ContractError("generator forward: empty input sequence");
  if (states.empty()) states = zero_states(m.config);

  GeneratorOutput out;
  out.mixtures.reserve(xs.size());
  for (double x : xs) {
    Tensor input = Tensor::vector({x});
    const Tensor* layer_in = &input;
    for (std::size_t l = 0; l < states.size(); ++l) {
      states[l] = lstm_step(m.stack[l], *layer_in, states[l]);
      layer_in = &states[l].h;
    }
    out.mixtures.push_back(head_step(m, states.back().h));
  }
  out.states = std::move(states);
  return out;
}

double sequence_nll(const GeneratorModel& m, std::span<const double> window) {
  if (window.size() < 2) {
    throw ContractError("sequence_nll: window must hold at least 2 values");
  }
  GeneratorOutput out = forward(m, window.subspan(0, window.size() - 1));
  return nll(out.mixtures, window.subspan(1));
}

std::vector<double> generate(const GeneratorModel& m, std::size_t length,
                             double seed_value, Rng& rng) {
  m.validate();
  std::vector<LSTMState> states = zero_states(m.config);
  std::vector<double> values;
  values.reserve(length);
  double x = seed_value;
  for (std::size_t t = 0; t < length; ++t) {
    Tensor input = Tensor::vector({x});
    const Tensor* layer_in = &input;
    for (std::size_t l = 0; l < states.size(); ++l) {
      states[l] = lstm_step(m.stack[l], *layer_in, states[l]);
      layer_in = &states[l].h;
    }
    GMMParams g = head_step(m, states.back().h);
    double draw = sample(g, rng);
    // keep the feedback inside the normalized data domain
    if (draw < 0.0) draw = 0.0;
    if (draw > 1.0) draw = 1.0;
    values.push_back(draw);
    x = draw;
  }
  return values;
}

std::vector<Var> GeneratorVars::flat() const {
  std::vector<Var> all;
  for (const LSTMVars& l : stack) {
    auto vs = vars_of(l);
    all.insert(all.end(), vs.begin(), vs.end());
  }
  auto f4 = vars_of(fc4);
  all.insert(all.end(), f4.begin(), f4.end());
  auto f5 = vars_of(fc5);
  all.insert(all.end(), f5.begin(), f5.end());
  return all;
}

GeneratorVars lift(Tape& tape, const GeneratorModel& m) {
  m.validate();
  GeneratorVars v;
  for (const LSTMParams& p : m.stack) v.stack.push_back(lift(tape, p));
  v.fc4 = lift(tape, m.fc4);
  v.fc5 = lift(tape, m.fc5);
  return v;
}

std::vector<GMMVars> forward(const GeneratorModel& m, const GeneratorVars& v,
                             std::span<const double> xs) {
  if (xs.empty()) throw ContractError("generator forward: empty input sequence");
  Tape& tape = *v.fc4.w.tape;
  std::vector<LSTMStateVars> states;
  for (std::size_t l = 0; l < v.stack.size(); ++l) {
    states.push_back(lift(tape, LSTMState::zeros(m.config.lstm_units)));
  }
  std::vector<GMMVars> mixtures;
  mixtures.reserve(xs.size());
  for (double x : xs) {
    Var input = tape.leaf(Tensor::vector({x}));
    for (std::size_t l = 0; l < states.size(); ++l) {
      states[l] = lstm_step(v.stack[l], input, states[l]);
      input = states[l].h;
    }
    Var l4 = dense_forward(v.fc4, states.back().h);
    Var l5 = dense_forward(v.fc5, l4);
    mixtures.push_back(split_head(l5, m.config.sigma_floor));
  }
  return mixtures;
}

Var sequence_nll(const GeneratorModel& m, const GeneratorVars& v,
                 std::span<const double> window) {
  if (window.size() < 2) {
    throw ContractError("sequence_nll: window must hold at least 2 values");
  }
  std::vector<GMMVars> mixtures = forward(m, v, window.subspan(0, window.size() - 1));
  return nll(mixtures, window.subspan(1));
}

}  // namespace sensegen
