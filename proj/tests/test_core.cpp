#include <gtest/gtest.h>

#include <random>

#include "sixv/core.hpp"

using namespace sixv;

TEST(QPochhammer, EmptyProductIsOne) {
  EXPECT_EQ(q_pochhammer<double>(3.7, -1.2, 0), 1.0);
  EXPECT_EQ(q_pochhammer<cplx>({0.3, 2.0}, {0.1, 0.4}, 0), cplx(1.0));
}

TEST(QPochhammer, HandExpandedValue) {
  // (1 - 0.5)(1 - 0.25)
  EXPECT_DOUBLE_EQ(q_pochhammer(0.5, 0.5, 2), 0.375);
}

TEST(QPochhammer, VanishesAtOne) {
  for (int n = 1; n < 6; ++n) EXPECT_EQ(q_pochhammer(1.0, 0.37, n), 0.0);
}

TEST(QPochhammer, Recurrence) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> d(-1.5, 1.5);
  for (int trial = 0; trial < 200; ++trial) {
    const cplx a(d(rng), d(rng)), q(d(rng) / 2, d(rng) / 2);
    const int n = static_cast<int>(rng() % 21);
    const cplx lhs = q_pochhammer(a, q, n + 1);
    const cplx rhs = q_pochhammer(a, q, n) * (1.0 - a * std::pow(q, n));
    EXPECT_LT(std::abs(lhs - rhs), 1e-12 * std::max(1.0, std::abs(rhs)));
  }
}

TEST(Signature, RejectsIncreasingParts) { EXPECT_THROW(Signature({1, 2}), DomainError); }

TEST(Signature, MultiplicityExamples) {
  EXPECT_EQ(signature_multiplicities(Signature{5, 4, 2}), (Multiplicities{{5, 1}, {4, 1}, {2, 1}}));
  EXPECT_TRUE(signature_multiplicities(Signature{}).empty());
  EXPECT_EQ(signature_multiplicities(Signature{3, 3, 0}), (Multiplicities{{3, 2}, {0, 1}}));
  EXPECT_THROW(signature_multiplicities(Signature{2, -1}), DomainError);
}

TEST(Signature, RoundTripThroughMultiplicities) {
  int checked = 0;
  for (int n = 0; n <= 6; ++n) {
    std::vector<int> parts(n);
    auto rec = [&](auto&& self, int i, int hi) -> void {
      if (i == n) {
        const Signature s(parts);
        EXPECT_EQ(Signature::from_multiplicities(s.multiplicities()), s);
        int total = 0;
        for (const auto& [p, m] : s.multiplicities()) total += m;
        EXPECT_EQ(total, n);
        ++checked;
        return;
      }
      for (int x = 0; x <= hi; ++x) {
        parts[i] = x;
        self(self, i + 1, x);
      }
    };
    rec(rec, 0, 10);
  }
  EXPECT_EQ(checked, 1 + 11 + 66 + 286 + 1001 + 3003 + 8008);
}

TEST(Signature, BasicViews) {
  const Signature s{4, 4, 1, 0};
  EXPECT_EQ(s.weight(), 9);
  EXPECT_FALSE(s.strict());
  EXPECT_TRUE(s.nonnegative());
  EXPECT_TRUE((Signature{5, 2, 1}).strict());
  EXPECT_EQ(s.multiplicity(4), 2);
  EXPECT_EQ(s.str(), "(4,4,1,0)");
}

TEST(Signature, ColexOrder) {
  ColexLess less;
  EXPECT_TRUE(less(Signature{3, 1}, Signature{2, 2}));
  EXPECT_TRUE(less(Signature{2, 1}, Signature{3, 1}));
  EXPECT_TRUE(less(Signature{9}, Signature{1, 0}));
  EXPECT_FALSE(less(Signature{2, 1}, Signature{2, 1}));
}

TEST(Signature, JsonArray) {
  json j = Signature{3, 1, 0};
  EXPECT_EQ(j.dump(), "[3,1,0]");
  EXPECT_EQ(j.get<Signature>(), (Signature{3, 1, 0}));
}

TEST(ModelParams, AcceptsFerroelectricChain) {
  const auto p = ModelParams::make(0.5, 2.0, 0.25);
  EXPECT_DOUBLE_EQ(p.s(), std::sqrt(2.0));
  EXPECT_LT(p.u() * p.v(), 1.0);
  EXPECT_GT(p.u(), 1.0 / std::sqrt(p.q()));
}

TEST(ModelParams, RejectsViolations) {
  EXPECT_THROW(ModelParams::make(1.2, 2.0, 0.25), DomainError);
  EXPECT_THROW(ModelParams::make(0.5, 1.3, 0.25), DomainError);
  EXPECT_THROW(ModelParams::make(0.5, 2.0, 0.5), DomainError);
  EXPECT_THROW(ModelParams::make(0.5, 2.0, -0.1), DomainError);
  EXPECT_THROW(ModelParams::make(0.5, 2.0, 0.25, {2.0, 1.2}, {}), DomainError);
  EXPECT_THROW(ModelParams::make(0.5, 2.0, 0.25, {}, {0.25, 0.6}), DomainError);
  try {
    ModelParams::make(0.5, 1.0, 0.25);
  } catch (const DomainError& e) {
    EXPECT_EQ(e.constraint(), "ferroelectric-order");
  }
}

TEST(ModelParams, RandomDrawsSatisfyChain) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> d(0.0, 1.0);
  int accepted = 0;
  for (int t = 0; t < 500; ++t) {
    const double q = 0.05 + 0.9 * d(rng), u = 0.5 + 4 * d(rng), v = d(rng);
    try {
      const auto p = ModelParams::make(q, u, v);
      EXPECT_LT(p.u() * p.v(), 1.0);
      EXPECT_GT(p.u(), std::pow(q, -0.5));
      ++accepted;
    } catch (const DomainError&) {
      EXPECT_TRUE(!(u > std::pow(q, -0.5)) || !(u * v < 1.0));
    }
  }
  EXPECT_GT(accepted, 10);
}

TEST(ModelParams, JsonRoundTrip) {
  const auto p = ModelParams::make(0.5, 2.0, 0.25, {2.0, 2.2}, {});
  const json j = p;
  EXPECT_EQ(j.at("q"), 0.5);
  const auto back = j.get<ModelParams>();
  EXPECT_EQ(back.rows(3), (std::vector<double>{2.0, 2.2, 2.0}));
  EXPECT_DOUBLE_EQ(back.v(), 0.25);
}

TEST(Delta, Examples) {
  EXPECT_DOUBLE_EQ(delta_parameter(1, 1, 1, 1, 1, 1), 0.5);
  EXPECT_DOUBLE_EQ(delta_parameter(1, 2, 1, 1, 1, 3), 0.0);
  EXPECT_THROW(delta_parameter(1, 1, 0, 1, 1, 1), DomainError);
}
