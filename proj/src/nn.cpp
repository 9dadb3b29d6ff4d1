#include "sensegen/nn.hpp"

#include <cmath>

#include "sensegen/errors.hpp"

namespace sensegen {

LSTMState lstm_step(const LSTMParams& p, const Tensor& x, const LSTMState& s) {
  using namespace tops;
  Tensor f = sigmoid(add(add(matmul(p.w_xf, x), matmul(p.w_hf, s.h)), p.b_f));
  Tensor i = sigmoid(add(add(matmul(p.w_xi, x), matmul(p.w_hi, s.h)), p.b_i));
  Tensor o = sigmoid(add(add(matmul(p.w_xo, x), matmul(p.w_ho, s.h)), p.b_o));
  Tensor g = tanh(add(add(matmul(p.w_hc, s.h), matmul(p.w_xc, x)), p.b_c));
  Tensor c = add(mul(f, s.c), mul(i, g));
  Tensor h = mul(o, tanh(c));
  return LSTMState{std::move(h), std::move(c)};
}

std::pair<std::vector<Tensor>, std::vector<LSTMState>> lstm_unroll(
    std::span<const LSTMParams> stack, std::span<const Tensor> xs,
    std::vector<LSTMState> states) {
  if (xs.empty()) throw ContractError("lstm_unroll: empty input sequence");
  if (states.size() != stack.size()) {
    throw ContractError("lstm_unroll: " + std::to_string(states.size()) +
                        " states for " + std::to_string(stack.size()) + " layers");
  }
  std::vector<Tensor> top;
  top.reserve(xs.size());
  for (const Tensor& x : xs) {
    const Tensor* input = &x;
    for (std::size_t l = 0; l < stack.size(); ++l) {
      states[l] = lstm_step(stack[l], *input, states[l]);
      input = &states[l].h;
    }
    top.push_back(states.back().h);
  }
  return {std::move(top), std::move(states)};
}

Tensor dense_forward(const DenseParams& p, const Tensor& x) {
  Tensor z = tops::add(tops::matmul(p.w, x), p.b);
  return p.act == Activation::sigmoid ? tops::sigmoid(z) : z;
}

LSTMVars lift(Tape& tape, const LSTMParams& p) {
  return LSTMVars{tape.leaf(p.w_xf), tape.leaf(p.w_hf), tape.leaf(p.b_f),
                  tape.leaf(p.w_xi), tape.leaf(p.w_hi), tape.leaf(p.b_i),
                  tape.leaf(p.w_xo), tape.leaf(p.w_ho), tape.leaf(p.b_o),
                  tape.leaf(p.w_xc), tape.leaf(p.w_hc), tape.leaf(p.b_c)};
}

DenseVars lift(Tape& tape, const DenseParams& p) {
  return DenseVars{tape.leaf(p.w), tape.leaf(p.b), p.act};
}

LSTMStateVars lift(Tape& tape, const LSTMState& s) {
  return LSTMStateVars{tape.leaf(s.h), tape.leaf(s.c)};
}

LSTMStateVars lstm_step(const LSTMVars& p, Var x, const LSTMStateVars& s) {
  Var f = sigmoid(add(add(matmul(p.w_xf, x), matmul(p.w_hf, s.h)), p.b_f));
  Var i = sigmoid(add(add(matmul(p.w_xi, x), matmul(p.w_hi, s.h)), p.b_i));
  Var o = sigmoid(add(add(matmul(p.w_xo, x), matmul(p.w_ho, s.h)), p.b_o));
  Var g = tanh(add(add(matmul(p.w_hc, s.h), matmul(p.w_xc, x)), p.b_c));
  Var c = add(mul(f, s.c), mul(i, g));
  Var h = mul(o, tanh(c));
  return LSTMStateVars{h, c};
}

std::pair<std::vector<Var>, std::vector<LSTMStateVars>> lstm_unroll(
    std::span<const LSTMVars> stack, std::span<const Var> xs,
    std::vector<LSTMStateVars> states) {
  if (xs.empty()) throw ContractError("lstm_unroll: empty input sequence");
  if (states.size() != stack.size()) {
    throw ContractError("lstm_unroll: " + std::to_string(states.size()) +
                        " states for " + std::to_string(stack.size()) + " layers");
  }
  std::vector<Var> top;
  top.reserve(xs.size());
  for (Var x : xs) {
    Var input = x;
    for (std::size_t l = 0; l < stack.size(); ++l) {
      states[l] = lstm_step(stack[l], input, states[l]);
      input = states[l].h;
    }
    top.push_back(states.back().h);
  }
  return {std::move(top), std::move(states)};
}

Var dense_forward(const DenseVars& p, Var x) {
  Var z = add(matmul(p.w, x), p.b);
  return p.act == Activation::sigmoid ? sigmoid(z) : z;
}

std::vector<Var> vars_of(const LSTMVars& v) {
  return {v.w_xf, v.w_hf, v.b_f, v.w_xi, v.w_hi, v.b_i,
          v.w_xo, v.w_ho, v.b_o, v.w_xc, v.w_hc, v.b_c};
}

std::vector<Var> vars_of(const DenseVars& v) { return {v.w, v.b}; }

std::vector<ParamRef> params_of(LSTMParams& p, const std::string& prefix) {
  return {{prefix + ".w_xf", &p.w_xf}, {prefix + ".w_hf", &p.w_hf}, {prefix + ".b_f", &p.b_f},
          {prefix + ".w_xi", &p.w_xi}, {prefix + ".w_hi", &p.w_hi}, {prefix + ".b_i", &p.b_i},
          {prefix + ".w_xo", &p.w_xo}, {prefix + ".w_ho", &p.w_ho}, {prefix + ".b_o", &p.b_o},
          {prefix + ".w_xc", &p.w_xc}, {prefix + ".w_hc", &p.w_hc}, {prefix + ".b_c", &p.b_c}};
}

std::vector<ParamRef> params_of(DenseParams& p, const std::string& prefix) {
  return {{prefix + ".w", &p.w}, {prefix + ".b", &p.b}};
}

namespace {

Tensor uniform_matrix(std::size_t rows, std::size_t cols, double bound, Rng& rng) {
  Tensor t({rows, cols});
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(-bound, bound);
  return t;
}

void require_positive(std::size_t n, const char* what) {
  if (n == 0) throw ConfigError(std::string(what) + " must be positive");
}

}  // namespace

LSTMParams init_lstm(std::size_t input_dim, std::size_t hidden_dim, Rng& rng) {
  require_positive(input_dim, "lstm input_dim");
  require_positive(hidden_dim, "lstm hidden_dim");
  double sx = 1.0 / std::sqrt(static_cast<double>(input_dim));
  double sh = 1.0 / std::sqrt(static_cast<double>(hidden_dim));
  LSTMParams p;
  p.w_xf = uniform_matrix(hidden_dim, input_dim, sx, rng);
  p.w_hf = uniform_matrix(hidden_dim, hidden_dim, sh, rng);
  p.b_f = Tensor::full({hidden_dim}, 1.0);  // forget gate open at start
  p.w_xi = uniform_matrix(hidden_dim, input_dim, sx, rng);
  p.w_hi = uniform_matrix(hidden_dim, hidden_dim, sh, rng);
  p.b_i = Tensor::zeros({hidden_dim});
  p.w_xo = uniform_matrix(hidden_dim, input_dim, sx, rng);
  p.w_ho = uniform_matrix(hidden_dim, hidden_dim, sh, rng);
  p.b_o = Tensor::zeros({hidden_dim});
  p.w_xc = uniform_matrix(hidden_dim, input_dim, sx, rng);
  p.w_hc = uniform_matrix(hidden_dim, hidden_dim, sh, rng);
  p.b_c = Tensor::zeros({hidden_dim});
  return p;
}

DenseParams init_dense(std::size_t output_dim, std::size_t input_dim, Activation act,
                       Rng& rng) {
  require_positive(output_dim, "dense output_dim");
  require_positive(input_dim, "dense input_dim");
  double s = 1.0 / std::sqrt(static_cast<double>(input_dim));
  return DenseParams{uniform_matrix(output_dim, input_dim, s, rng),
                     Tensor::zeros({output_dim}), act};
}

LSTMParams zeros_lstm(std::size_t input_dim, std::size_t hidden_dim) {
  require_positive(input_dim, "lstm input_dim");
  require_positive(hidden_dim, "lstm hidden_dim");
  LSTMParams p;
  p.w_xf = Tensor::zeros({hidden_dim, input_dim});
  p.w_hf = Tensor::zeros({hidden_dim, hidden_dim});
  p.b_f = Tensor::zeros({hidden_dim});
  p.w_xi = p.w_xf;
  p.w_hi = p.w_hf;
  p.b_i = p.b_f;
  p.w_xo = p.w_xf;
  p.w_ho = p.w_hf;
  p.b_o = p.b_f;
  p.w_xc = p.w_xf;
  p.w_hc = p.w_hf;
  p.b_c = p.b_f;
  return p;
}

DenseParams zeros_dense(std::size_t output_dim, std::size_t input_dim, Activation act) {
  require_positive(output_dim, "dense output_dim");
  require_positive(input_dim, "dense input_dim");
  return DenseParams{Tensor::zeros({output_dim, input_dim}), Tensor::zeros({output_dim}),
                     act};
}

double global_norm(const std::vector<Tensor>& grads) {
  double sq = 0.0;
  for (const Tensor& g : grads) {
    const double* d = g.data();
    for (std::size_t i = 0; i < g.size(); ++i) sq += d[i] * d[i];
  }
  return std::sqrt(sq);
}

std::vector<Tensor> clip_gradients(std::vector<Tensor> grads, double max_norm) {
  if (max_norm <= 0.0) throw ContractError("clip_gradients: max_norm must be positive");
  double norm = global_norm(grads);
  if (norm > max_norm) {
    double scale = max_norm / norm;
    for (Tensor& g : grads) {
      double* d = g.data();
      for (std::size_t i = 0; i < g.size(); ++i) d[i] *= scale;
    }
  }
  return grads;
}

std::vector<Tensor> clip_gradients_per_element(std::vector<Tensor> grads, double limit) {
  if (limit <= 0.0) throw ContractError("clip_gradients_per_element: limit must be positive");
  for (Tensor& g : grads) {
    double* d = g.data();
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (d[i] > limit) d[i] = limit;
      if (d[i] < -limit) d[i] = -limit;
    }
  }
  return grads;
}

}  // namespace sensegen
