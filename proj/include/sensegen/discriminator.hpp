#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sensegen/nn.hpp"

namespace sensegen {

struct DiscriminatorConfig {
  std::size_t lstm_units = 64;
  std::size_t fc_units = 16;
  std::size_t window_len = 400;
  // when true, score() rejects windows whose length differs from window_len
  bool strict_window = true;

  void validate() const;
};

// Binary real-vs-synthetic scorer: LSTM -> sigmoid dense -> 1-unit sigmoid.
struct DiscriminatorModel {
  DiscriminatorConfig config;
  LSTMParams lstm;
  DenseParams fc;
  DenseParams out;

  static DiscriminatorModel init(const DiscriminatorConfig& cfg, std::uint64_t seed);
  static DiscriminatorModel zeros(const DiscriminatorConfig& cfg);

  std::vector<ParamRef> parameters();
  void validate() const;
};

// P(window is real), strictly inside (0,1).
double score(const DiscriminatorModel& m, std::span<const double> window);

// Cross-entropy over a balanced minibatch:
// -(sum_i log D(real_i) + log(1 - D(fake_i))), scores clamped to
// [1e-12, 1-1e-12] inside the logs.
double bce_loss(const DiscriminatorModel& m,
                std::span<const std::vector<double>> real,
                std::span<const std::vector<double>> fake);

// Fraction of correct decisions; a score exactly at the threshold counts as
// a fake classification.
double accuracy(const DiscriminatorModel& m,
                std::span<const std::vector<double>> real,
                std::span<const std::vector<double>> fake, double threshold = 0.5);

// ---- taped (training) path ----

struct DiscriminatorVars {
  LSTMVars lstm;
  DenseVars fc;
  DenseVars out;

  std::vector<Var> flat() const;
};

DiscriminatorVars lift(Tape& tape, const DiscriminatorModel& m);
Var score(const DiscriminatorModel& m, const DiscriminatorVars& v,
          std::span<const double> window);
Var bce_loss(const DiscriminatorModel& m, const DiscriminatorVars& v,
             std::span<const std::vector<double>> real,
             std::span<const std::vector<double>> fake);

}  // namespace sensegen
