#pragma once

#include <span>
#include <vector>

#include "sensegen/rng.hpp"
#include "sensegen/tape.hpp"
#include "sensegen/tensor.hpp"

namespace sensegen {

// Per-timestep Gaussian mixture: weights, means and standard deviations of
// K components describing the next-step value distribution.
struct GMMParams {
  Tensor pi;
  Tensor mu;
  Tensor sigma;

  std::size_t components() const { return pi.size(); }
};

// Map a head vector of width 3K onto mixture parameters:
// pi = softmax(first K), mu = middle K raw, sigma = exp(last K).
// sigma_floor > 0 clamps sigma from below (training guard); 0 disables it.
GMMParams split_head(const Tensor& head, double sigma_floor = 0.0);

// log sum_k pi_k N(x; mu_k, sigma_k), evaluated as log-sum-exp over
// log pi_k + log N_k so tails stay finite.
double gmm_log_pdf(const GMMParams& g, double x);

// Negative log likelihood of targets under per-step mixtures.
double nll(std::span<const GMMParams> mixtures, std::span<const double> targets);

// Ancestral sampling: component ~ Categorical(pi), value ~ N(mu_k, sigma_k).
double sample(const GMMParams& g, Rng& rng);

// ---- taped variants ----

struct GMMVars {
  Var log_pi;  // stable log-softmax of the weight logits
  Var pi;
  Var mu;
  Var sigma;

  std::size_t components() const { return pi.value().size(); }
};

GMMVars split_head(Var head, double sigma_floor = 0.0);
Var gmm_log_pdf(const GMMVars& g, double x);
Var nll(std::span<const GMMVars> mixtures, std::span<const double> targets);

}  // namespace sensegen
