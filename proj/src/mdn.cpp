#include "sensegen/mdn.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "sensegen/errors.hpp"

namespace sensegen {

namespace {

const double kLog2Pi = std::log(2.0 * std::numbers::pi);

void validate(const GMMParams& g) {
  std::size_t k = g.pi.size();
  if (k == 0 || g.mu.size() != k || g.sigma.size() != k) {
    throw ShapeError("gmm: inconsistent component counts " + g.pi.shape_str() + ", " +
                     g.mu.shape_str() + ", " + g.sigma.shape_str());
  }
  for (std::size_t i = 0; i < k; ++i) {
    if (!(g.sigma[i] > 0.0)) {
      throw DomainError("gmm: sigma[" + std::to_string(i) + "] = " +
                        std::to_string(g.sigma[i]) + " is not positive");
    }
  }
}

std::size_t head_components(std::size_t width) {
  if (width == 0 || width % 3 != 0) {
    throw ShapeError("split_head: width " + std::to_string(width) +
                     " is not divisible by 3");
  }
  return width / 3;
}

}  // namespace

GMMParams split_head(const Tensor& head, double sigma_floor) {
  std::size_t k = head_components(head.size());
  GMMParams g;
  g.pi = tops::softmax(tops::slice(head, 0, k));
  g.mu = tops::slice(head, k, k);
  g.sigma = tops::exp(tops::slice(head, 2 * k, k));
  if (sigma_floor > 0.0) g.sigma = tops::clamp_min(g.sigma, sigma_floor);
  return g;
}

double gmm_log_pdf(const GMMParams& g, double x) {
  validate(g);
  std::size_t k = g.components();
  Tensor terms({k});
  for (std::size_t i = 0; i < k; ++i) {
    double z = (x - g.mu[i]) / g.sigma[i];
    terms[i] = std::log(g.pi[i]) - std::log(g.sigma[i]) - 0.5 * kLog2Pi - 0.5 * z * z;
  }
  return tops::log_sum_exp(terms);
}

double nll(std::span<const GMMParams> mixtures, std::span<const double> targets) {
  if (mixtures.empty() || mixtures.size() != targets.size()) {
    throw ContractError("nll: " + std::to_string(mixtures.size()) + " mixtures vs " +
                        std::to_string(targets.size()) + " targets");
  }
  double total = 0.0;
  for (std::size_t t = 0; t < mixtures.size(); ++t) {
    total += gmm_log_pdf(mixtures[t], targets[t]);
  }
  return -total;
}

double sample(const GMMParams& g, Rng& rng) {
  validate(g);
  std::size_t k = g.components();
  double u = rng.uniform();
  double cum = 0.0;
  std::size_t pick = k - 1;
  for (std::size_t i = 0; i < k; ++i) {
    cum += g.pi[i];
    if (u < cum) {
      pick = i;
      break;
    }
  }
  return g.mu[pick] + g.sigma[pick] * rng.normal();
}

GMMVars split_head(Var head, double sigma_floor) {
  std::size_t k = head_components(head.value().size());
  Var z_pi = slice(head, 0, k);
  Var mu = slice(head, k, k);
  Var z_sigma = slice(head, 2 * k, k);
  Var log_pi = sub_bcast(z_pi, log_sum_exp(z_pi));
  Var pi = exp(log_pi);
  Var sigma = exp(z_sigma);
  if (sigma_floor > 0.0) sigma = clamp_min(sigma, sigma_floor);
  return GMMVars{log_pi, pi, mu, sigma};
}

Var gmm_log_pdf(const GMMVars& g, double x) {
  // log pi_k - log sigma_k - log(2 pi)/2 - ((x - mu_k)/sigma_k)^2 / 2
  Var diff = axpb(g.mu, -1.0, x);
  Var z = div(diff, g.sigma);
  Var quad = axpb(mul(z, z), -0.5, -0.5 * kLog2Pi);
  Var log_n = sub(quad, log(g.sigma));
  return log_sum_exp(add(g.log_pi, log_n));
}

Var nll(std::span<const GMMVars> mixtures, std::span<const double> targets) {
  if (mixtures.empty() || mixtures.size() != targets.size()) {
    throw ContractError("nll: " + std::to_string(mixtures.size()) + " mixtures vs " +
                        std::to_string(targets.size()) + " targets");
  }
  Var total = gmm_log_pdf(mixtures[0], targets[0]);
  for (std::size_t t = 1; t < mixtures.size(); ++t) {
    total = add(total, gmm_log_pdf(mixtures[t], targets[t]));
  }
  return axpb(total, -1.0, 0.0);
}

}  // namespace sensegen
