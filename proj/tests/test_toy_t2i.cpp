#include <random>

#include <gtest/gtest.h>

#include "gass/io/config.hpp"
#include "gass/toy_t2i.hpp"
#include "support.hpp"

using namespace gass;
namespace ts = testing_support;

namespace {

ToyModel small_model(int t_steps = 20) {
  io::RunConfig cfg;
  cfg.total_steps = t_steps;
  return io::build_model(cfg);
}

}  // namespace

TEST(Schedule, LinearShape) {
  const auto s = NoiseSchedule::linear(50);
  EXPECT_EQ(s.total_steps(), 50);
  EXPECT_EQ(s.alpha_bar(0), 1.0);
  EXPECT_NEAR(s.alpha_bar(50), 0.01, 1e-15);
  EXPECT_EQ(s.sigma(0), 0.0);
  EXPECT_NO_THROW(s.validate());
  NoiseSchedule bad{{1.0, 0.5, 0.6}};
  EXPECT_THROW(bad.validate(), Error);
}

TEST(PredictX0, NoNoiseReturnsInput) {
  const auto model = small_model();
  std::mt19937 gen(1);
  const Vector x = ts::gaussian(gen, 12);
  EXPECT_EQ(predict_x0(model.mixture, model.schedule, x, 0), x);
}

TEST(PredictX0, SingleComponentPosterior) {
  GaussianMixture mix{{1.0}, {Vector::Zero(5)}, 0.4};
  const auto s = NoiseSchedule::linear(10);
  std::mt19937 gen(2);
  for (int t = 1; t <= 10; ++t) {
    const Vector x = ts::gaussian(gen, 5);
    const double a = s.alpha_bar(t), var = 1 - a, s0 = 0.16;
    const Vector expected = std::sqrt(a) * s0 * x / (a * s0 + var);
    EXPECT_LE((predict_x0(mix, s, x, t) - expected).cwiseAbs().maxCoeff(), 1e-14);
  }
}

TEST(PredictX0, SymmetricPairMidpoint) {
  const Vector mu = Vector::LinSpaced(4, 1, 4);
  const Vector c = Vector::Constant(4, 0.5);
  GaussianMixture mix{{0.5, 0.5}, {c + mu, c - mu}, 0.3};
  const auto s = NoiseSchedule::linear(10);
  const int t = 6;
  const Vector x = std::sqrt(s.alpha_bar(t)) * c;  // equidistant from both noised means
  const double a = s.alpha_bar(t), v = 1 - a, s0 = 0.09;
  // Responsibilities are 1/2 each, so the result is the shrunk global mean.
  const Vector expected = (v * c + std::sqrt(a) * s0 * x) / (a * s0 + v);
  EXPECT_LE((predict_x0(mix, s, x, t) - expected).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(PredictX0, FiniteFarFromData) {
  const auto model = small_model();
  const Vector far = Vector::Constant(12, 1e4);
  EXPECT_TRUE(predict_x0(model.mixture, model.schedule, far, 10).allFinite());
}

TEST(ReverseStep, Cases) {
  const auto s = NoiseSchedule::linear(2);
  std::mt19937 gen(3);
  const Vector x0 = ts::gaussian(gen, 3);
  const Vector consistent = std::sqrt(s.alpha_bar(2)) * x0;
  EXPECT_LE((reverse_step(s, consistent, x0, 2) - std::sqrt(s.alpha_bar(1)) * x0).norm(), 1e-14);
  const Vector xt = ts::gaussian(gen, 3);
  EXPECT_EQ(reverse_step(s, xt, x0, 1), x0);
  // Two steps by hand.
  const Vector xh2 = ts::gaussian(gen, 3), xh1 = ts::gaussian(gen, 3);
  const Vector eps2 = (xt - std::sqrt(s.alpha_bar(2)) * xh2) / std::sqrt(1 - s.alpha_bar(2));
  const Vector x1 = std::sqrt(s.alpha_bar(1)) * xh2 + std::sqrt(1 - s.alpha_bar(1)) * eps2;
  EXPECT_LE((reverse_step(s, xt, xh2, 2) - x1).norm(), 1e-14);
  EXPECT_LE((reverse_step(s, x1, xh1, 1) - xh1).norm(), 1e-14);
}

TEST(ReverseStep, ZeroSigma) {
  NoiseSchedule s{{1.0, 1.0}};
  try {
    reverse_step(s, Vector::Ones(2), Vector::Ones(2), 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ZeroSigma);
  }
}

TEST(GassInterval, DefaultIsMidTrajectory) {
  const auto i = GassInterval::around(50, 20);
  ASSERT_EQ(i.steps.size(), 20u);
  EXPECT_EQ(i.steps.front(), 15);
  EXPECT_EQ(i.steps.back(), 34);
  EXPECT_NO_THROW(i.validate(50));
  EXPECT_THROW(GassInterval{{0}}.validate(50), Error);
  EXPECT_THROW(GassInterval{{50}}.validate(50), Error);
  EXPECT_THROW((GassInterval{{5, 5}}.validate(50)), Error);
}

TEST(Sampler, VanillaSingleComponentConcentrates) {
  const Vector mu = Vector::LinSpaced(12, -1, 1);
  ToyModel model{GaussianMixture{{1.0}, {mu}, 0.3}, NoiseSchedule::linear(100), ProxyEncoder(12, 8, 7), {}};
  model.anchor = make_text_anchor(model.encoder, model.mixture);
  const int b = 16;
  const auto out = sample_batch(model, b, std::nullopt, 5);
  Vector mean = Vector::Zero(12);
  for (const auto& x : out.samples) mean += x / b;
  EXPECT_LE((mean - mu).cwiseAbs().maxCoeff(), 3 * 0.3 / std::sqrt(double(b)));
  // Terminal step is a fixed point of the denoiser at t = 0.
  for (const auto& x : out.samples) EXPECT_EQ(predict_x0(model.mixture, model.schedule, x, 0), x);
}

TEST(Sampler, DeterministicAndEmptyIntervalEqualsVanilla) {
  const auto model = small_model();
  const auto a = sample_batch(model, 6, std::nullopt, 3);
  const auto b = sample_batch(model, 6, std::nullopt, 3);
  GassOptions empty;
  const auto c = sample_batch(model, 6, empty, 3);
  for (int i = 0; i < 6; ++i) {
    EXPECT_EQ(a.samples[i], b.samples[i]);
    EXPECT_EQ(a.samples[i], c.samples[i]);
  }
  EXPECT_TRUE(c.record.steps.empty());
}

TEST(Sampler, ZeroRangeMatchesVanilla) {
  const auto model = small_model();
  GassOptions o;
  o.interval = GassInterval::around(20, 8);
  o.expansion = {0.0, 0.0, true, 0};
  const auto v = sample_batch(model, 6, std::nullopt, 4);
  const auto g = sample_batch(model, 6, o, 4);
  ASSERT_EQ(g.record.steps.size(), 8u);
  for (int i = 0; i < 6; ++i) EXPECT_LE((v.samples[i] - g.samples[i]).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Sampler, RecordsInterventions) {
  const auto model = small_model();
  GassOptions o;
  o.interval = GassInterval::around(20, 5);
  const auto g = sample_batch(model, 5, o, 6);
  ASSERT_EQ(g.record.steps.size(), 5u);
  for (const auto& s : g.record.steps) {
    EXPECT_TRUE(o.interval.contains(s.t));
    EXPECT_EQ(s.before.spp, s.before.d_dep + s.before.d_ind);
    EXPECT_EQ(s.before.energies.size(), 7u);  // min(10, d - 1)
    for (double n : s.target_norms) EXPECT_NEAR(n, 1.0, 1e-9);
    EXPECT_FALSE(s.trace.losses.empty());
    EXPECT_LE(s.trace.losses[s.trace.best_step], s.trace.losses.front());
  }
  EXPECT_EQ(g.record.final_embeddings.size(), 5u);
}

TEST(Sampler, StepsOutsideIntervalEvolveLikeVanilla) {
  // Replay: from the GASS trajectory's state just after its last
  // intervention, plain reverse steps must reproduce the rest exactly.
  const auto model = small_model();
  GassOptions o;
  o.interval = GassInterval{{12, 13, 14}};
  const auto g = sample_batch(model, 4, o, 8, true);
  const int T = model.schedule.total_steps();
  // latent_history[k] is the state at step T - k.
  const std::size_t k_after = static_cast<std::size_t>(T - 12 + 1);  // x_11
  SamplerState mid{g.record.latent_history[k_after], 11};
  const auto tail = run_sampler(model, mid, std::nullopt, 8, true);
  for (int i = 0; i < 4; ++i) EXPECT_EQ(tail.samples[i], g.samples[i]);

  // Before the first intervention the trajectory matches vanilla.
  const auto v = sample_batch(model, 4, std::nullopt, 8, true);
  for (std::size_t k = 0; k <= static_cast<std::size_t>(T - 14); ++k)
    for (int i = 0; i < 4; ++i) EXPECT_EQ(v.record.latent_history[k][i], g.record.latent_history[k][i]);
}

TEST(Sampler, HoldShiftsReusesDraws) {
  const auto model = small_model();
  GassOptions o;
  o.interval = GassInterval::around(20, 4);
  o.hold_shifts = true;
  EXPECT_NO_THROW(sample_batch(model, 4, o, 1));
}
