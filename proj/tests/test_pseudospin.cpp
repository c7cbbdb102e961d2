#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "frozencore/exact_oracle.hpp"
#include "frozencore/pseudospin.hpp"
#include "two_level_oracle.hpp"

using namespace frozencore;

namespace {

double signed_log_uniform(std::mt19937_64 &rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
  std::bernoulli_distribution sign(0.5);
  return (sign(rng) ? -1.0 : 1.0) * std::exp(u(rng));
}

PairCluster random_cluster(std::mt19937_64 &rng) {
  PairCluster c;
  c.j1 = signed_log_uniform(rng, 1e-2, 5.0);
  c.j2 = signed_log_uniform(rng, 1e-2, 5.0);
  c.c1a = signed_log_uniform(rng, 1e-3, 2.0);
  c.c2a = signed_log_uniform(rng, 1e-3, 2.0);
  c.c12 = signed_log_uniform(rng, 1e-3, 2.0);
  return c;
}

} // namespace

TEST(Params, DetuningsPerQubitKind) {
  PairCluster c;
  c.j1 = 5;
  c.j2 = 2;
  c.c1a = 0.5;
  c.c2a = 0.25;
  const auto n = detunings(c, QubitKind::Nuclear);
  EXPECT_DOUBLE_EQ(n.plus, 3.25);
  EXPECT_DOUBLE_EQ(n.minus, 2.75);
  const auto e = detunings(c, QubitKind::Electron);
  EXPECT_DOUBLE_EQ(e.plus, 3.0);
  EXPECT_DOUBLE_EQ(e.minus, -3.0);
}

TEST(Params, FrequenciesAndAngles) {
  const auto p = make_params(Detunings{3.0, -4.0}, 4.0);
  EXPECT_DOUBLE_EQ(p.omega_plus, 1.25);
  EXPECT_DOUBLE_EQ(p.omega_minus, 0.25 * std::sqrt(32.0));
  EXPECT_DOUBLE_EQ(p.theta_plus, std::atan2(4.0, 3.0));
  const auto z = make_params(Detunings{-1.0, -1.0}, -0.0);
  EXPECT_DOUBLE_EQ(z.theta_plus, std::numbers::pi);
}

TEST(Envelope, MatchesTwoLevelUnitary) {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> tau(0.0, 10.0);
  for (int i = 0; i < 10000; ++i) {
    const double dp = signed_log_uniform(rng, 1e-3, 10.0), dm = signed_log_uniform(rng, 1e-3, 10.0);
    const double c = signed_log_uniform(rng, 1e-3, 10.0);
    const double t = tau(rng);
    const double closed = hahn_envelope(make_params(Detunings{dp, dm}, c), t);
    const double exact = oracle2::echo(dp, dm, c, t);
    ASSERT_LE(std::fabs(closed - exact), 1e-12 * exact) << "draw " << i;
  }
}

TEST(Envelope, BoundedBetweenZeroAndOne) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> tau(0.0, 100.0);
  for (int i = 0; i < 100000; ++i) {
    const auto p = make_params(Detunings{signed_log_uniform(rng, 1e-4, 1e4), signed_log_uniform(rng, 1e-4, 1e4)},
                               signed_log_uniform(rng, 1e-4, 1e4));
    const double t = tau(rng);
    const double l = hahn_envelope(p, t);
    ASSERT_GE(l, 0.0);
    ASSERT_LE(l, 1.0 + 1e-15);
    const double th = thermal_envelope(p, t);
    ASSERT_GE(th, 0.0);
    ASSERT_LE(th, 1.0);
  }
}

TEST(Envelope, NoCouplingOrNoBranchDifferenceMeansNoDecay) {
  std::mt19937_64 rng(8);
  for (int i = 0; i < 1000; ++i) {
    const double d1 = signed_log_uniform(rng, 1e-3, 1e3), d2 = signed_log_uniform(rng, 1e-3, 1e3);
    EXPECT_DOUBLE_EQ(hahn_envelope(make_params(Detunings{d1, d2}, 0.0), 0.37 * i), 1.0);
    EXPECT_DOUBLE_EQ(hahn_envelope(make_params(Detunings{d1, d1}, d2), 0.37 * i), 1.0);
  }
  EXPECT_DOUBLE_EQ(hahn_envelope(make_params(Detunings{1.0, -2.0}, 3.0), 0.0), 1.0);
}

TEST(Envelope, RejectsNegativeTau) {
  const auto p = make_params(Detunings{1, 2}, 3);
  EXPECT_THROW(hahn_envelope(p, -1e-9), std::invalid_argument);
  EXPECT_THROW(thermal_envelope(p, -1.0), std::invalid_argument);
}

TEST(Envelope, ThermalIsOneMinusAlphaSquared) {
  const auto p = make_params(Detunings{0.3, -0.7}, 0.4);
  for (double t : {0.1, 1.0, 3.3}) {
    double a, b;
    detail::EchoKernel(p).alpha_beta(t, a, b);
    EXPECT_DOUBLE_EQ(thermal_envelope(p, t), 1.0 - a * a);
    EXPECT_NEAR(thermal_envelope(p, t), 0.5 * (1.0 + (1.0 - 2.0 * a * a)), 1e-15);
  }
}

TEST(Grid, LogSpacedWithLeadingZero) {
  const auto g = make_tau_grid(1e-4, 10.0, 200);
  ASSERT_EQ(g.size(), 200u);
  EXPECT_EQ(g[0], 0.0);
  EXPECT_DOUBLE_EQ(g[1], 1e-4);
  EXPECT_NEAR(g.back(), 10.0, 1e-12);
  for (std::size_t i = 1; i < g.size(); ++i) EXPECT_GT(g[i], g[i - 1]);
  EXPECT_THROW(make_tau_grid(1e-4, 10.0, 1), std::invalid_argument);
  EXPECT_THROW(make_tau_grid(0.0, 10.0, 5), std::invalid_argument);
}

TEST(Product, EmptyBathIsFlat) {
  const auto g = make_tau_grid(1e-3, 1.0, 20);
  const auto curve = cce2_product({}, g);
  for (double v : curve.values) EXPECT_EQ(v, 1.0);
  for (std::size_t i = 0; i < g.size(); ++i) EXPECT_EQ(curve.times[i], 2.0 * g[i]);
}

TEST(Product, EqualsProductOfEnvelopes) {
  std::mt19937_64 rng(21);
  std::vector<PairCluster> clusters;
  for (int i = 0; i < 50; ++i) clusters.push_back(random_cluster(rng));
  const auto g = make_tau_grid(1e-2, 5.0, 40);
  const auto curve = cce2_product(clusters, g);
  for (std::size_t t = 0; t < g.size(); ++t) {
    double prod = 1.0;
    for (const auto &c : clusters) prod *= hahn_envelope(make_params(c, QubitKind::Nuclear), g[t]);
    EXPECT_NEAR(curve.values[t], prod, 1e-12 * std::max(prod, 1e-300) + 1e-300);
  }
}

TEST(Product, WeightActsAsDuplication) {
  std::mt19937_64 rng(4);
  const PairCluster c = random_cluster(rng);
  PairCluster w = c;
  w.weight = 3.0;
  const auto g = make_tau_grid(1e-2, 5.0, 30);
  const std::vector<PairCluster> triple{c, c, c};
  const std::vector<PairCluster> single{w};
  const auto a = cce2_product(triple, g), b = cce2_product(single, g);
  for (std::size_t t = 0; t < g.size(); ++t) EXPECT_NEAR(a.values[t], b.values[t], 1e-13);
  const auto one = cce2_product(std::vector<PairCluster>{c}, g);
  for (std::size_t t = 0; t < g.size(); ++t) EXPECT_NEAR(a.values[t], std::pow(one.values[t], 3), 1e-13);
}

TEST(Product, IndependentOfThreadsAndChunking) {
  std::mt19937_64 rng(99);
  std::vector<PairCluster> clusters;
  for (int i = 0; i < 20000; ++i) clusters.push_back(random_cluster(rng));
  const auto g = make_tau_grid(1e-3, 5.0, 25);
  ProductOptions a;
  a.chunk_size = 1000;
  a.threads = 1;
  ProductOptions b = a;
  b.threads = 4;
  const auto ca = cce2_product(clusters, g, a), cb = cce2_product(clusters, g, b);
  for (std::size_t t = 0; t < g.size(); ++t) EXPECT_EQ(ca.values[t], cb.values[t]);
  ProductOptions c = a;
  c.chunk_size = 737;
  const auto cc = cce2_product(clusters, g, c);
  for (std::size_t t = 0; t < g.size(); ++t) EXPECT_NEAR(ca.values[t], cc.values[t], 1e-12 * ca.values[t] + 1e-300);
}

TEST(Product, UnderflowClampsToZero) {
  PairCluster strong;
  strong.j1 = 1.0;
  strong.j2 = 1.0;
  strong.c1a = 2.0;
  strong.c2a = -2.0;
  strong.c12 = 4.0;
  strong.weight = 1e6;
  const std::vector<double> g{0.0, 0.3, 0.5};
  const auto curve = cce2_product(std::vector<PairCluster>{strong}, g);
  EXPECT_EQ(curve.values[0], 1.0);
  for (std::size_t t = 1; t < g.size(); ++t) {
    EXPECT_GE(curve.values[t], 0.0);
    EXPECT_LT(curve.values[t], 1e-300);
  }
}

TEST(Product, RejectsBadGrids) {
  EXPECT_THROW(cce2_product({}, std::vector<double>{}), std::invalid_argument);
  EXPECT_THROW(cce2_product({}, std::vector<double>{0.0, 0.2, 0.1}), std::invalid_argument);
  EXPECT_THROW(cce2_product({}, std::vector<double>{-1.0, 0.2}), std::invalid_argument);
}

// Qubit plus two disjoint pairs, 32 states: with Ising qubit-bath terms the
// echo factorizes exactly into the pair envelopes.
TEST(Product, FiveSpinIsingFactorizes) {
  using namespace frozencore::oracle;
  std::mt19937_64 rng(31);
  for (int draw = 0; draw < 10; ++draw) {
    const PairCluster p1 = random_cluster(rng), p2 = random_cluster(rng);
    SpinRegister reg(5);
    Matrix h = Matrix::Zero(reg.dim(), reg.dim());
    auto add_pair = [&](const PairCluster &c, int a, int b) {
      h += c.c12 * (reg.sz(a) * reg.sz(b) - 0.25 * (reg.sp(a) * reg.sm(b) + reg.sm(a) * reg.sp(b)));
      h += c.c1a * reg.sz(0) * reg.sz(a) + c.c2a * reg.sz(0) * reg.sz(b);
      h += 0.5 * (c.j1 * reg.sz(a) + c.j2 * reg.sz(b));
    };
    add_pair(p1, 1, 2);
    add_pair(p2, 3, 4);
    Vector psi0 = Vector::Zero(reg.dim());
    psi0(reg.index({true, true, false, true, false})) = 1.0 / std::sqrt(2.0);
    psi0(reg.index({false, true, false, true, false})) = 1.0 / std::sqrt(2.0);
    const std::vector<PairCluster> both{p1, p2};
    for (double tau : {0.05, 0.4, 1.3, 4.0}) {
      const double exact = std::abs(echo_coherence(h, reg, 0, psi0, tau));
      const double closed = cce2_product(both, std::vector<double>{tau}).values[0];
      EXPECT_NEAR(exact, closed, 1e-10);
    }
  }
}
