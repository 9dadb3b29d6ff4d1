#pragma once

#include <span>
#include <string>
#include <vector>

#include "sensegen/rng.hpp"
#include "sensegen/tape.hpp"
#include "sensegen/tensor.hpp"

namespace sensegen {

// One LSTM layer: input, forget and output gates plus the candidate cell,
// each with input weights, recurrent weights and a bias.
struct LSTMParams {
  Tensor w_xf, w_hf, b_f;
  Tensor w_xi, w_hi, b_i;
  Tensor w_xo, w_ho, b_o;
  Tensor w_xc, w_hc, b_c;

  std::size_t input_dim() const { return w_xf.cols(); }
  std::size_t hidden_dim() const { return w_xf.rows(); }
};

// Recurrent memory of one layer.
struct LSTMState {
  Tensor h, c;

  static LSTMState zeros(std::size_t hidden_dim) {
    return LSTMState{Tensor::zeros({hidden_dim}), Tensor::zeros({hidden_dim})};
  }
};

enum class Activation { sigmoid, linear };

struct DenseParams {
  Tensor w;  // [out, in]
  Tensor b;  // [out]
  Activation act = Activation::linear;

  std::size_t input_dim() const { return w.cols(); }
  std::size_t output_dim() const { return w.rows(); }
};

// Named handle to a parameter tensor inside a model.
struct ParamRef {
  std::string name;
  Tensor* tensor;
};

// ---- forward math on plain tensors (inference paths) ----

LSTMState lstm_step(const LSTMParams& p, const Tensor& x, const LSTMState& s);

// Stacked driver: layer n consumes layer n-1's output at the same timestep.
// Returns every top-layer h_t plus the final state of each layer.
std::pair<std::vector<Tensor>, std::vector<LSTMState>> lstm_unroll(
    std::span<const LSTMParams> stack, std::span<const Tensor> xs,
    std::vector<LSTMState> states);

Tensor dense_forward(const DenseParams& p, const Tensor& x);

// ---- taped variants (training paths) ----

struct LSTMVars {
  Var w_xf, w_hf, b_f;
  Var w_xi, w_hi, b_i;
  Var w_xo, w_ho, b_o;
  Var w_xc, w_hc, b_c;
};

struct LSTMStateVars {
  Var h, c;
};

struct DenseVars {
  Var w, b;
  Activation act;
};

LSTMVars lift(Tape& tape, const LSTMParams& p);
DenseVars lift(Tape& tape, const DenseParams& p);
LSTMStateVars lift(Tape& tape, const LSTMState& s);

LSTMStateVars lstm_step(const LSTMVars& p, Var x, const LSTMStateVars& s);
std::pair<std::vector<Var>, std::vector<LSTMStateVars>> lstm_unroll(
    std::span<const LSTMVars> stack, std::span<const Var> xs,
    std::vector<LSTMStateVars> states);
Var dense_forward(const DenseVars& p, Var x);

// Collect the Vars of a lifted layer in ParamRef order.
std::vector<Var> vars_of(const LSTMVars& v);
std::vector<Var> vars_of(const DenseVars& v);
std::vector<ParamRef> params_of(LSTMParams& p, const std::string& prefix);
std::vector<ParamRef> params_of(DenseParams& p, const std::string& prefix);

// ---- initialization ----

// Weights ~ uniform(-s, s) with s = 1/sqrt(fan_in); biases zero except the
// forget-gate bias, which starts at 1.
LSTMParams init_lstm(std::size_t input_dim, std::size_t hidden_dim, Rng& rng);
DenseParams init_dense(std::size_t output_dim, std::size_t input_dim, Activation act,
                       Rng& rng);
LSTMParams zeros_lstm(std::size_t input_dim, std::size_t hidden_dim);
DenseParams zeros_dense(std::size_t output_dim, std::size_t input_dim, Activation act);

// ---- gradient clipping ----

double global_norm(const std::vector<Tensor>& grads);

// Global-norm clipping: if ||g|| > max_norm, scale every entry by
// max_norm / ||g||.
std::vector<Tensor> clip_gradients(std::vector<Tensor> grads, double max_norm);

// Literal per-element clamp into [-limit, limit].
std::vector<Tensor> clip_gradients_per_element(std::vector<Tensor> grads, double limit);

}  // namespace sensegen
