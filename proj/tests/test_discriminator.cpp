#include <doctest.h>

#include <cmath>

#include "fd_check.hpp"
#include "ref_models.hpp"
#include "sensegen/discriminator.hpp"
#include "sensegen/errors.hpp"
#include "sensegen/rng.hpp"

using namespace sensegen;

namespace {

DiscriminatorConfig tiny_config(std::size_t window_len) {
  DiscriminatorConfig cfg;
  cfg.lstm_units = 4;
  cfg.fc_units = 3;
  cfg.window_len = window_len;
  return cfg;
}

// Hand-built separator: scores constant-one windows ~1 and constant-zero
// windows ~0 (saturated sigmoids).
DiscriminatorModel perfect_separator() {
  DiscriminatorConfig cfg;
  cfg.lstm_units = 1;
  cfg.fc_units = 1;
  cfg.window_len = 4;
  DiscriminatorModel m = DiscriminatorModel::zeros(cfg);
  m.lstm.w_xc = Tensor::matrix(1, 1, {50.0});  // candidate follows sign of x
  m.lstm.b_i = Tensor::vector({50.0});         // input gate open
  m.lstm.b_f = Tensor::vector({-50.0});        // forget closed
  m.lstm.b_o = Tensor::vector({50.0});         // output open
  m.fc.w = Tensor::matrix(1, 1, {200.0});
  m.fc.b = Tensor::vector({-76.0});
  m.out.w = Tensor::matrix(1, 1, {2000.0});
  m.out.b = Tensor::vector({-1000.0});
  return m;
}

const std::vector<std::vector<double>> kOnes{{1, 1, 1, 1}, {1, 1, 1, 1}};
const std::vector<std::vector<double>> kZeros{{0, 0, 0, 0}, {0, 0, 0, 0}};

}  // namespace

TEST_CASE("zero-parameter model scores one half exactly") {
  DiscriminatorModel m = DiscriminatorModel::zeros(tiny_config(8));
  std::vector<double> window(8, 0.77);
  CHECK(score(m, window) == 0.5);
}

TEST_CASE("default config accepts a 400-step window") {
  DiscriminatorModel m = DiscriminatorModel::zeros(DiscriminatorConfig{});
  std::vector<double> window(400, 0.2);
  CHECK(score(m, window) == 0.5);
}

TEST_CASE("tiny model matches the straight-line reference") {
  DiscriminatorModel m = DiscriminatorModel::init(tiny_config(10), 71);
  Rng rng(5);
  for (int round = 0; round < 10; ++round) {
    std::vector<double> window;
    for (int i = 0; i < 10; ++i) window.push_back(rng.uniform());
    CHECK(score(m, window) ==
          doctest::Approx(seref::discriminator_score(m, window)).epsilon(1e-12));
  }
}

TEST_CASE("strict mode rejects mismatched window lengths") {
  DiscriminatorModel m = DiscriminatorModel::zeros(tiny_config(10));
  std::vector<double> window(9, 0.5);
  CHECK_THROWS_AS(score(m, window), ContractError);

  m.config.strict_window = false;
  CHECK(score(m, window) == 0.5);
  CHECK_THROWS_AS(score(m, std::vector<double>{}), ContractError);
}

TEST_CASE("scores stay strictly inside (0,1)") {
  DiscriminatorModel m = DiscriminatorModel::init(tiny_config(16), 73);
  Rng rng(7);
  for (int round = 0; round < 20; ++round) {
    std::vector<double> window;
    for (int i = 0; i < 16; ++i) window.push_back(rng.uniform(-3, 3));
    double s = score(m, window);
    CHECK(s > 0.0);
    CHECK(s < 1.0);
  }
}

TEST_CASE("bce of the constant-half model is 2 log 2 per pair") {
  DiscriminatorConfig cfg = tiny_config(4);
  DiscriminatorModel m = DiscriminatorModel::zeros(cfg);
  std::vector<std::vector<double>> real{{0.1, 0.2, 0.3, 0.4}};
  std::vector<std::vector<double>> fake{{0.9, 0.8, 0.7, 0.6}};
  CHECK(bce_loss(m, real, fake) == doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-14));
  CHECK(bce_loss(m, real, fake) == doctest::Approx(1.386294).epsilon(1e-6));
}

TEST_CASE("bce with saturated perfect scores stays near zero via clamping") {
  DiscriminatorModel m = perfect_separator();
  CHECK(score(m, kOnes[0]) == 1.0);   // saturated sigmoid
  CHECK(score(m, kZeros[0]) == 0.0);
  double loss = bce_loss(m, kOnes, kZeros);
  CHECK(std::isfinite(loss));
  CHECK(loss >= 0.0);
  CHECK(loss <= 4.8e-11);
}

TEST_CASE("bce matches an independent scalar-summation oracle") {
  DiscriminatorModel m = DiscriminatorModel::init(tiny_config(6), 79);
  Rng rng(11);
  std::vector<std::vector<double>> real, fake;
  for (int i = 0; i < 3; ++i) {
    std::vector<double> r, f;
    for (int t = 0; t < 6; ++t) {
      r.push_back(rng.uniform());
      f.push_back(rng.uniform());
    }
    real.push_back(r);
    fake.push_back(f);
  }
  double oracle = 0.0;
  for (int i = 0; i < 3; ++i) {
    double sr = seref::discriminator_score(m, real[i]);
    double sf = seref::discriminator_score(m, fake[i]);
    oracle -= std::log(std::clamp(sr, 1e-12, 1.0 - 1e-12)) +
              std::log(std::clamp(1.0 - sf, 1e-12, 1.0 - 1e-12));
  }
  CHECK(bce_loss(m, real, fake) == doctest::Approx(oracle).epsilon(1e-12));

  Tape tape;
  DiscriminatorVars vars = lift(tape, m);
  CHECK(bce_loss(m, vars, real, fake).value()[0] ==
        doctest::Approx(oracle).epsilon(1e-12));
}

TEST_CASE("bce rejects empty or lopsided batches") {
  DiscriminatorModel m = DiscriminatorModel::zeros(tiny_config(4));
  std::vector<std::vector<double>> one{{0.1, 0.2, 0.3, 0.4}};
  std::vector<std::vector<double>> none;
  CHECK_THROWS_AS(bce_loss(m, none, one), ContractError);
  CHECK_THROWS_AS(bce_loss(m, one, none), ContractError);
  std::vector<std::vector<double>> two{{0.1, 0.2, 0.3, 0.4}, {0.5, 0.5, 0.5, 0.5}};
  CHECK_THROWS_AS(bce_loss(m, one, two), ContractError);
}

TEST_CASE("bce is non-negative") {
  Rng rng(13);
  for (int round = 0; round < 5; ++round) {
    DiscriminatorModel m = DiscriminatorModel::init(tiny_config(5), 100 + round);
    std::vector<std::vector<double>> real, fake;
    for (int i = 0; i < 2; ++i) {
      std::vector<double> r, f;
      for (int t = 0; t < 5; ++t) {
        r.push_back(rng.uniform());
        f.push_back(rng.uniform());
      }
      real.push_back(r);
      fake.push_back(f);
    }
    CHECK(bce_loss(m, real, fake) >= 0.0);
  }
}

TEST_CASE("bce gradient matches finite differences") {
  DiscriminatorModel m = DiscriminatorModel::init(tiny_config(6), 83);
  Rng rng(17);
  std::vector<std::vector<double>> real, fake;
  for (int i = 0; i < 2; ++i) {
    std::vector<double> r, f;
    for (int t = 0; t < 6; ++t) {
      r.push_back(rng.uniform());
      f.push_back(rng.uniform());
    }
    real.push_back(r);
    fake.push_back(f);
  }
  std::vector<ParamRef> params = m.parameters();
  auto loss = [&] { return bce_loss(m, real, fake); };

  Tape tape;
  DiscriminatorVars vars = lift(tape, m);
  Gradients grads = tape.backward(bce_loss(m, vars, real, fake));
  std::vector<Tensor> analytic;
  for (Var v : vars.flat()) analytic.push_back(grads.at(v));

  FdReport report = check_gradients_fd(params, analytic, loss, 1e-5, 1e-4, 1e-7);
  INFO("worst ", report.worst_param, " rel ", report.worst_rel);
  CHECK(report.ok());
}

TEST_CASE("accuracy of a perfect separator is one") {
  DiscriminatorModel m = perfect_separator();
  CHECK(accuracy(m, kOnes, kZeros) == 1.0);
}

TEST_CASE("constant-half scores land on the tie-break rule") {
  DiscriminatorModel m = DiscriminatorModel::zeros(tiny_config(4));
  // every score is exactly 0.5: real windows wrong, fake windows right
  CHECK(accuracy(m, kOnes, kZeros) == 0.5);
}

TEST_CASE("accuracy is invariant under shuffling within each batch") {
  DiscriminatorModel m = DiscriminatorModel::init(tiny_config(5), 89);
  Rng rng(19);
  std::vector<std::vector<double>> real, fake;
  for (int i = 0; i < 6; ++i) {
    std::vector<double> r, f;
    for (int t = 0; t < 5; ++t) {
      r.push_back(rng.uniform());
      f.push_back(rng.uniform());
    }
    real.push_back(r);
    fake.push_back(f);
  }
  double base = accuracy(m, real, fake);
  Rng shuffle_rng(23);
  for (int round = 0; round < 5; ++round) {
    shuffle_rng.shuffle(real);
    shuffle_rng.shuffle(fake);
    CHECK(accuracy(m, real, fake) == base);
  }
}
