#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "summix/ctc/ctc.hpp"
#include "summix/numcore/error.hpp"
#include "summix/numcore/gradcheck.hpp"
#include "support/oracles.hpp"
#include "support/test_util.hpp"

namespace summix {
namespace {

using testing::within;

struct Case {
  MaskedBatch<double> logits;
  std::vector<LabelSequence> targets;
};

Case random_case(Rng& rng, std::size_t max_T, std::size_t max_U, std::size_t max_V, std::size_t B = 3) {
  const std::size_t V = static_cast<std::size_t>(rng.uniform_int(1, static_cast<std::int64_t>(max_V)));
  const std::size_t T = static_cast<std::size_t>(rng.uniform_int(1, static_cast<std::int64_t>(max_T)));
  Case c{{oracle::random_tensor({B, T, V + 1}, rng, 1.5), oracle::random_lengths(B, T, rng)}, {}};
  zero_padding(c.logits.values, c.logits.lengths);
  for (std::size_t b = 0; b < B; ++b) {
    LabelSequence target(static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(max_U))));
    for (int& l : target) l = static_cast<int>(rng.uniform_int(1, static_cast<std::int64_t>(V)));
    c.targets.push_back(target);
  }
  return c;
}

std::vector<double> losses(const Case& c) {
  Tape<double> tape(false);
  const auto r = ctc_loss(tape, as_constant(tape, c.logits), c.targets);
  const auto& v = r.per_sequence.value().vec();
  return {v.begin(), v.end()};
}

double log_softmax_at(const std::vector<double>& row, std::size_t k) {
  double z = 0;
  for (double v : row) z += std::exp(v);
  return row[k] - std::log(z);
}

TEST(Ctc, SingleFrameSingleLabel) {
  MaskedBatch<double> logits{Tensor<double>({1, 1, 2}), {1}};
  logits.values(0, 0, 0) = 0.3;
  logits.values(0, 0, 1) = -0.7;
  const auto l = losses({logits, {{1}}});
  EXPECT_NEAR(l[0], -log_softmax_at({0.3, -0.7}, 1), 1e-15);
}

TEST(Ctc, TwoFramesThreeAlignments) {
  Rng rng(1);
  MaskedBatch<double> logits{oracle::random_tensor({1, 2, 3}, rng), {2}};
  auto p = [&](std::size_t t, std::size_t k) {
    return std::exp(log_softmax_at({logits.values(0, t, 0), logits.values(0, t, 1), logits.values(0, t, 2)}, k));
  };
  const double want = p(0, 2) * p(1, 2) + p(0, 2) * p(1, 0) + p(0, 0) * p(1, 2);
  EXPECT_NEAR(losses({logits, {{2}}})[0], -std::log(want), 1e-14);
}

TEST(Ctc, UniformLogitsMatchEnumeration) {
  MaskedBatch<double> logits{Tensor<double>({1, 4, 3}), {4}};
  const Case c{logits, {{1, 2}}};
  EXPECT_NEAR(losses(c)[0], ctc_brute_force(c.logits, c.targets)[0], 1e-12);
  // 3^4 equally likely paths; those collapsing to "ab" can be counted.
  int count = 0;
  for (int code = 0; code < 81; ++code) {
    int path[4], prev = 0;
    LabelSequence out;
    for (int t = 0, c2 = code; t < 4; ++t, c2 /= 3) path[t] = c2 % 3;
    for (int t = 0; t < 4; ++t) {
      if (path[t] != 0 && path[t] != prev) out.push_back(path[t]);
      prev = path[t];
    }
    count += out == LabelSequence{1, 2};
  }
  EXPECT_NEAR(losses(c)[0], -std::log(count / 81.0), 1e-12);
}

TEST(Ctc, MatchesBruteForce) {
  Rng rng(2);
  double worst = 0;
  int infinite = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const Case c = random_case(rng, 8, 3, 3);
    const auto got = losses(c);
    const auto want = ctc_brute_force(c.logits, c.targets);
    for (std::size_t b = 0; b < got.size(); ++b) {
      if (std::isinf(want[b])) {
        EXPECT_TRUE(std::isinf(got[b]));
        ++infinite;
        continue;
      }
      worst = std::max(worst, std::abs(got[b] - want[b]));
    }
  }
  EXPECT_LE(worst, 1e-12);
  EXPECT_GT(infinite, 0);  // the sweep covers infeasible targets too
}

TEST(Ctc, EmptyTargetIsAllBlank) {
  Rng rng(3);
  MaskedBatch<double> logits{oracle::random_tensor({1, 1, 3}, rng), {1}};
  const Case c{logits, {{}}};
  EXPECT_NEAR(losses(c)[0], -log_softmax_at({logits.values(0, 0, 0), logits.values(0, 0, 1), logits.values(0, 0, 2)}, 0),
              1e-15);
  EXPECT_NEAR(ctc_brute_force(c.logits, c.targets)[0], losses(c)[0], 1e-15);
}

TEST(Ctc, FeasibilityRule) {
  EXPECT_TRUE(ctc_feasible({1, 2, 3}, 3));
  EXPECT_FALSE(ctc_feasible({1, 1}, 2));
  EXPECT_TRUE(ctc_feasible({1, 1}, 3));
  EXPECT_TRUE(ctc_feasible({}, 1));
  EXPECT_FALSE(ctc_feasible({1, 2}, 1));
}

TEST(Ctc, InfeasibleTargetIsFlaggedWithoutGradient) {
  Rng rng(4);
  MaskedBatch<double> batch{oracle::random_tensor({2, 3, 3}, rng), {2, 3}};
  zero_padding(batch.values, batch.lengths);
  Parameter<double> logits{"logits", batch.values};
  Tape<double> tape;
  const std::vector<LabelSequence> targets{{1, 1}, {1, 1}};
  const auto r = ctc_loss(tape, as_tracked(tape, logits, batch.lengths), targets);
  EXPECT_EQ(r.infeasible, (std::vector<bool>{true, false}));
  EXPECT_TRUE(std::isinf(r.per_sequence.value()[0]));
  EXPECT_TRUE(std::isfinite(r.per_sequence.value()[1]));
  EXPECT_DOUBLE_EQ(r.mean.value()[0], r.per_sequence.value()[1]);
  EXPECT_TRUE(std::isinf(ctc_brute_force(batch, targets)[0]));
  tape.backward(r.mean);
  const auto g = tape.grad(logits);
  for (std::size_t i = 0; i < 9; ++i) EXPECT_EQ(g[i], 0.0);
  double other = 0;
  for (std::size_t i = 9; i < 18; ++i) other += std::abs(g[i]);
  EXPECT_GT(other, 0.0);
}

TEST(Ctc, LossIsAProbability) {
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const Case c = random_case(rng, 8, 3, 3);
    for (double l : losses(c)) {
      EXPECT_GE(l, 0.0);
      EXPECT_LE(std::exp(-l), 1.0);
    }
  }
}

TEST(Ctc, Gradcheck) {
  Rng rng(6);
  for (int trial = 0; trial < 10; ++trial) {
    Case c = random_case(rng, 7, 3, 4);
    for (std::size_t b = 0; b < c.targets.size(); ++b) {
      while (!ctc_feasible(c.targets[b], static_cast<std::size_t>(c.logits.lengths[b]))) c.targets[b].pop_back();
    }
    Parameter<double> logits{"logits", c.logits.values};
    const auto w = oracle::random_tensor({c.targets.size()}, rng);
    auto loss = [&](Tape<double>& tape) {
      return weighted_sum(tape, ctc_loss(tape, as_tracked(tape, logits, c.logits.lengths), c.targets).per_sequence, w);
    };
    EXPECT_TRUE(within(finite_difference_check(loss, {&logits}), 1e-6));
    auto mean_loss = [&](Tape<double>& tape) {
      return ctc_loss(tape, as_tracked(tape, logits, c.logits.lengths), c.targets).mean;
    };
    EXPECT_TRUE(within(finite_difference_check(mean_loss, {&logits}), 1e-6));
  }
}

TEST(Ctc, GradientIsSoftmaxMinusOccupancy) {
  // Per frame the logit gradient sums to zero.
  Rng rng(7);
  Case c = random_case(rng, 6, 2, 3, 1);
  c.targets[0] = {};
  Parameter<double> logits{"logits", c.logits.values};
  Tape<double> tape;
  tape.backward(ctc_loss(tape, as_tracked(tape, logits, c.logits.lengths), c.targets).mean);
  const auto g = tape.grad(logits);
  for (std::size_t t = 0; t < static_cast<std::size_t>(c.logits.lengths[0]); ++t) {
    double s = 0;
    for (std::size_t k = 0; k < c.logits.features(); ++k) s += g(0, t, k);
    EXPECT_NEAR(s, 0.0, 1e-14);
  }
}

TEST(Ctc, RejectsBadLabelsAndOversizedEnumeration) {
  MaskedBatch<double> small{Tensor<double>({1, 3, 3}), {3}};
  Tape<double> tape(false);
  EXPECT_THROW(ctc_loss(tape, as_constant(tape, small), {{3}}), ConfigError);
  EXPECT_THROW(ctc_loss(tape, as_constant(tape, small), {{0}}), ConfigError);
  EXPECT_THROW(ctc_loss(tape, as_constant(tape, small), {{1}, {1}}), DimensionError);
  EXPECT_THROW(ctc_brute_force({Tensor<double>({1, 11, 3}), {11}}, {{1}}), CapacityError);
  EXPECT_THROW(ctc_brute_force({Tensor<double>({1, 3, 6}), {3}}, {{1}}), CapacityError);
}

TEST(CtcGreedy, CollapsesRepeatsAndDropsBlanks) {
  const int path[] = {0, 1, 1, 0, 2};
  Tensor<double> logits({2, 5, 3});
  for (std::size_t t = 0; t < 5; ++t) {
    logits(0, t, static_cast<std::size_t>(path[t])) = 1.0;
    logits(1, t, 0) = 1.0;
  }
  const auto out = ctc_greedy_decode(logits, {5, 5});
  EXPECT_EQ(out[0], (LabelSequence{1, 2}));
  EXPECT_TRUE(out[1].empty());
}

TEST(CtcGreedy, TiesGoToLowestIndexAndBlankSeparatesRepeats) {
  Tensor<double> logits({1, 4, 3});
  // frame 0: tie between 1 and 2; frame 1: blank; frame 2: 1; frame 3: all tied.
  logits(0, 0, 1) = logits(0, 0, 2) = 2.0;
  logits(0, 1, 0) = 1.0;
  logits(0, 2, 1) = 1.0;
  EXPECT_EQ(ctc_greedy_decode(logits, {4})[0], (LabelSequence{1, 1}));
}

TEST(CtcGreedy, MatchesReference) {
  Rng rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    const Case c = random_case(rng, 12, 0, 5, 4);
    std::vector<float> as_float(c.logits.values.vec().begin(), c.logits.values.vec().end());
    const auto got = ctc_greedy_decode(c.logits.values, c.logits.lengths);
    const auto got_f = ctc_greedy_decode(c.logits.values.cast<float>(), c.logits.lengths);
    for (std::size_t b = 0; b < got.size(); ++b) {
      std::vector<int> best;
      for (int t = 0; t < c.logits.lengths[b]; ++t) {
        int arg = 0;
        for (std::size_t k = 1; k < c.logits.features(); ++k)
          if (c.logits.values(b, static_cast<std::size_t>(t), k) > c.logits.values(b, static_cast<std::size_t>(t), static_cast<std::size_t>(arg)))
            arg = static_cast<int>(k);
        best.push_back(arg);
      }
      LabelSequence want;
      for (std::size_t t = 0; t < best.size(); ++t)
        if (best[t] != 0 && (t == 0 || best[t] != best[t - 1])) want.push_back(best[t]);
      EXPECT_EQ(got[b], want);
      EXPECT_EQ(got_f[b], want);
    }
  }
}

}  // namespace
}  // namespace summix
