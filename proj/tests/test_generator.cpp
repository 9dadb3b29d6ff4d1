#include <doctest.h>

#include <cmath>

#include "fd_check.hpp"
#include "ref_models.hpp"
#include "sensegen/errors.hpp"
#include "sensegen/generator.hpp"
#include "sensegen/rng.hpp"

using namespace sensegen;

namespace {

GeneratorConfig tiny_config() {
  GeneratorConfig cfg;
  cfg.lstm_layers = 1;
  cfg.lstm_units = 4;
  cfg.fc_units = 3;
  cfg.mixtures = 2;
  return cfg;
}

}  // namespace

TEST_CASE("zero-parameter model emits the closed-form mixture") {
  GeneratorModel model = GeneratorModel::zeros(GeneratorConfig{});
  GeneratorOutput out = forward(model, std::vector<double>{0.42});
  REQUIRE(out.mixtures.size() == 1);
  const GMMParams& g = out.mixtures[0];
  REQUIRE(g.components() == 24);
  for (std::size_t i = 0; i < 24; ++i) {
    CHECK(std::fabs(g.pi[i] - 1.0 / 24.0) <= 1e-12);
    CHECK(std::fabs(g.mu[i] - 0.5) <= 1e-12);
    CHECK(std::fabs(g.sigma[i] - std::exp(0.5)) <= 1e-12);
  }
}

TEST_CASE("default config consumes a 400-step window") {
  GeneratorModel model = GeneratorModel::zeros(GeneratorConfig{});
  std::vector<double> xs(400, 0.3);
  GeneratorOutput out = forward(model, xs);
  CHECK(out.mixtures.size() == 400);
  CHECK(out.states.size() == 3);
}

TEST_CASE("tiny model matches the straight-line reference") {
  GeneratorModel model = GeneratorModel::init(tiny_config(), 123);
  std::vector<double> xs{0.2, 0.8, 0.5, 0.1, 0.9, 0.4};
  GeneratorOutput out = forward(model, xs);
  std::vector<seref::RefGmm> ref = seref::generator_forward(model, xs);
  REQUIRE(out.mixtures.size() == ref.size());
  for (std::size_t t = 0; t < ref.size(); ++t) {
    for (std::size_t k = 0; k < 2; ++k) {
      CHECK(out.mixtures[t].pi[k] == doctest::Approx(ref[t].pi[k]).epsilon(1e-12));
      CHECK(out.mixtures[t].mu[k] == doctest::Approx(ref[t].mu[k]).epsilon(1e-12));
      CHECK(out.mixtures[t].sigma[k] == doctest::Approx(ref[t].sigma[k]).epsilon(1e-12));
    }
  }
}

TEST_CASE("sequence_nll on a length-2 window reduces to one mixture step") {
  GeneratorModel model = GeneratorModel::init(tiny_config(), 7);
  std::vector<double> window{0.3, 0.6};
  GeneratorOutput out = forward(model, std::vector<double>{0.3});
  std::vector<double> target{0.6};
  CHECK(sequence_nll(model, window) ==
        doctest::Approx(nll(out.mixtures, target)).epsilon(1e-14));
}

TEST_CASE("sequence_nll is finite on noise windows") {
  GeneratorModel model = GeneratorModel::init(tiny_config(), 11);
  Rng rng(13);
  std::vector<double> window;
  for (int i = 0; i < 30; ++i) window.push_back(rng.uniform());
  CHECK(std::isfinite(sequence_nll(model, window)));
}

TEST_CASE("sequence_nll rejects short windows") {
  GeneratorModel model = GeneratorModel::zeros(tiny_config());
  CHECK_THROWS_AS(sequence_nll(model, std::vector<double>{0.5}), ContractError);
}

TEST_CASE("taped and plain sequence_nll agree") {
  GeneratorModel model = GeneratorModel::init(tiny_config(), 17);
  std::vector<double> window{0.1, 0.7, 0.3, 0.5};
  Tape tape;
  GeneratorVars vars = lift(tape, model);
  Var loss = sequence_nll(model, vars, window);
  CHECK(loss.value()[0] == doctest::Approx(sequence_nll(model, window)).epsilon(1e-12));
}

TEST_CASE("generate returns exactly the requested length") {
  GeneratorModel model = GeneratorModel::init(tiny_config(), 19);
  Rng rng(1);
  CHECK(generate(model, 1, 0.0, rng).size() == 1);
  Rng rng2(1);
  CHECK(generate(model, 37, 0.0, rng2).size() == 37);
}

TEST_CASE("generation is deterministic per seed and varies across seeds") {
  GeneratorModel model = GeneratorModel::init(tiny_config(), 23);
  Rng a(5), b(5), c(6);
  std::vector<double> first = generate(model, 50, 0.0, a);
  std::vector<double> second = generate(model, 50, 0.0, b);
  std::vector<double> third = generate(model, 50, 0.0, c);
  bool same = true, differs = false;
  for (std::size_t i = 0; i < 50; ++i) {
    if (first[i] != second[i]) same = false;
    if (first[i] != third[i]) differs = true;
  }
  CHECK(same);
  CHECK(differs);
}

TEST_CASE("a 400-step generation stays finite") {
  GeneratorModel model = GeneratorModel::init(tiny_config(), 29);
  Rng rng(2);
  std::vector<double> trace = generate(model, 400, 0.0, rng);
  CHECK(trace.size() == 400);
  for (double v : trace) {
    CHECK(std::isfinite(v));
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
}

TEST_CASE("forward is prefix-consistent") {
  GeneratorModel model = GeneratorModel::init(tiny_config(), 31);
  std::vector<double> xs{0.2, 0.4, 0.6, 0.8, 0.5, 0.3, 0.7};
  GeneratorOutput full = forward(model, xs);
  for (std::size_t t = 1; t <= xs.size(); ++t) {
    GeneratorOutput prefix = forward(model, std::span(xs).subspan(0, t));
    for (std::size_t s = 0; s < t; ++s) {
      for (std::size_t k = 0; k < 2; ++k) {
        // identical computation prefix, bitwise equal
        CHECK(prefix.mixtures[s].pi[k] == full.mixtures[s].pi[k]);
        CHECK(prefix.mixtures[s].mu[k] == full.mixtures[s].mu[k]);
        CHECK(prefix.mixtures[s].sigma[k] == full.mixtures[s].sigma[k]);
      }
    }
  }
}

TEST_CASE("sigmoid-literal head bounds mu and sigma") {
  GeneratorModel model = GeneratorModel::init(tiny_config(), 37);
  Rng rng(3);
  std::vector<double> xs;
  for (int i = 0; i < 40; ++i) xs.push_back(rng.uniform());
  GeneratorOutput out = forward(model, xs);
  for (const GMMParams& g : out.mixtures) {
    for (std::size_t k = 0; k < g.components(); ++k) {
      CHECK(g.mu[k] > 0.0);
      CHECK(g.mu[k] < 1.0);
      CHECK(g.sigma[k] > 1.0);
      CHECK(g.sigma[k] < std::exp(1.0));
    }
  }
}

TEST_CASE("linear head frees mu and sigma") {
  GeneratorConfig cfg = tiny_config();
  cfg.head = HeadMode::linear;
  GeneratorModel model = GeneratorModel::init(cfg, 41);
  CHECK(model.fc5.act == Activation::linear);
  GeneratorOutput out = forward(model, std::vector<double>{0.5});
  CHECK(out.mixtures[0].sigma[0] > 0.0);
}

TEST_CASE("config validation rejects zero counts") {
  GeneratorConfig cfg = tiny_config();
  cfg.mixtures = 0;
  CHECK_THROWS_AS(GeneratorModel::zeros(cfg), ConfigError);
}

TEST_CASE("forward rejects a broken shape chain") {
  GeneratorModel model = GeneratorModel::init(tiny_config(), 43);
  model.fc4.w = Tensor::zeros({3, 5});  // wrong input width
  CHECK_THROWS_AS(forward(model, std::vector<double>{0.5}), ConfigError);
}

TEST_CASE("end-to-end gradient on a small instance matches finite differences") {
  GeneratorModel model = GeneratorModel::init(tiny_config(), 47);
  std::vector<double> window{0.44, 0.52, 0.61, 0.35, 0.58};
  std::vector<ParamRef> params = model.parameters();
  auto loss = [&] { return sequence_nll(model, window); };

  Tape tape;
  GeneratorVars vars = lift(tape, model);
  Gradients grads = tape.backward(sequence_nll(model, vars, window));
  std::vector<Tensor> analytic;
  for (Var v : vars.flat()) analytic.push_back(grads.at(v));

  FdReport report = check_gradients_fd(params, analytic, loss, 1e-5, 1e-4, 1e-7);
  INFO("worst ", report.worst_param, " rel ", report.worst_rel);
  CHECK(report.ok());
}
