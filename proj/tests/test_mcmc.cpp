#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <vector>

#include "fixtures.hpp"
#include "qpmcmc/mcmc.hpp"

using namespace qpmcmc;

namespace {

// States 0..N-1 on a cycle; the kernel stays put or moves one step either way.
struct CycleKernel {
  int n;
  int sample(const int& s, Rng& rng) const {
    const auto k = rng.below(3);
    return k == 0 ? s : (k == 1 ? (s + 1) % n : (s + n - 1) % n);
  }
  double pmf(const int& a, const int& b) const {
    const int d = ((b - a) % n + n) % n;
    return d == 0 || d == 1 || d == n - 1 ? 1.0 / 3.0 : 0.0;
  }
  std::vector<int> support(const int& s) const { return {s, (s + 1) % n, (s + n - 1) % n}; }
};

struct TableTarget {
  std::vector<double> mass;
  double evaluate(const int& s) const { return mass[static_cast<std::size_t>(s)]; }
  double bounded_evaluate(const int& s) const {
    return mass[static_cast<std::size_t>(s)] / *std::max_element(mass.begin(), mass.end());
  }
};

// Two states; stays or swaps with probability 1/2 each.
struct SwapKernel {
  int sample(const int& s, Rng& rng) const { return rng.below(2) ? 1 - s : s; }
  double pmf(const int&, const int&) const { return 0.5; }
};

struct NonEnumerable {
  int sample(const int& s, Rng&) const { return s; }
  double pmf(const int& a, const int& b) const { return a == b ? 1.0 : 0.0; }
};

template <class Step>
std::vector<double> frequencies(int n, std::size_t iterations, Step&& step) {
  std::vector<double> f(static_cast<std::size_t>(n), 0.0);
  int s = 0;
  for (std::size_t i = 0; i < iterations; ++i) {
    s = step(s);
    f[static_cast<std::size_t>(s)] += 1.0;
  }
  for (double& x : f) x /= static_cast<double>(iterations);
  return f;
}

std::vector<double> normalized(std::vector<double> v) {
  double total = 0.0;
  for (double x : v) total += x;
  for (double& x : v) x /= total;
  return v;
}

}  // namespace

TEST(BarkerSelect, EqualWeightsAreFair) {
  Rng rng(1);
  const std::array<double, 2> w{1.0, 1.0};
  int ones = 0;
  for (int i = 0; i < 100000; ++i) ones += static_cast<int>(barker_select(w, rng));
  EXPECT_NEAR(ones / 100000.0, 0.5, 0.005);
}

TEST(BarkerSelect, ProportionalToWeight) {
  Rng rng(2);
  const std::array<double, 2> w{1.0, 3.0};
  int ones = 0;
  for (int i = 0; i < 100000; ++i) ones += static_cast<int>(barker_select(w, rng));
  EXPECT_NEAR(ones / 100000.0, 0.75, 0.005);
  EXPECT_EQ(selection_pmf(w), (std::vector<double>{0.25, 0.75}));
}

TEST(BarkerSelect, ScaleInvariant) {
  const std::vector<double> w{0.3, 1.7, 0.0, 2.5};
  for (double c : {1e-9, 0.5, 4.0, 1e7}) {
    std::vector<double> scaled;
    for (double x : w) scaled.push_back(c * x);
    const auto a = selection_pmf(w), b = selection_pmf(scaled);
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-15);
    // Same draws too: the uniform is scaled by the total.
    Rng r1(5), r2(5);
    for (int k = 0; k < 1000; ++k) ASSERT_EQ(barker_select(w, r1), barker_select(scaled, r2));
  }
}

TEST(BarkerSelect, NeverPicksZeroWeight) {
  Rng rng(3);
  const std::array<double, 3> w{0.0, 1.0, 0.0};
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(barker_select(w, rng), 1u);
}

TEST(BarkerSelect, Errors) {
  Rng rng(4);
  const std::array<double, 3> zeros{0.0, 0.0, 0.0};
  try {
    barker_select(zeros, rng);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::degenerate_selection);
  }
  const std::array<double, 2> negative{1.0, -0.5};
  EXPECT_THROW(barker_select(negative, rng), Error);
  const std::array<double, 2> nan{1.0, std::nan("")};
  EXPECT_THROW(barker_select(nan, rng), Error);
}

TEST(BarkerStep, UniformTargetMovesHalfOfProposals) {
  const TableTarget target{{1.0, 1.0}};
  const SwapKernel kernel;
  Rng rng(9);
  OracleLedger ledger;
  int moved = 0;
  for (int i = 0; i < 200000; ++i) moved += barker_step(0, target, kernel, rng, ledger);
  // q̄(0,1) = 1/2, accepted with probability 1/2.
  EXPECT_NEAR(moved / 200000.0, 0.25, 0.004);
  EXPECT_EQ(ledger.qbar_calls, 200000u);
  EXPECT_EQ(ledger.target_calls, 400000u);
}

TEST(BarkerStep, ZeroMassProposalNeverAccepted) {
  const TableTarget target{{1.0, 0.0}};
  const SwapKernel kernel;
  Rng rng(10);
  OracleLedger ledger;
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(barker_step(0, target, kernel, rng, ledger), 0);
}

TEST(BarkerStep, StationaryOnCycle) {
  const TableTarget target{{1.0, 2.0, 0.5, 4.0, 3.0}};
  const CycleKernel kernel{5};
  Rng rng(12);
  OracleLedger ledger;
  const auto f = frequencies(5, 400000, [&](int s) { return barker_step(s, target, kernel, rng, ledger); });
  EXPECT_LT(fixtures::total_variation(f, normalized(target.mass)), 0.01);
}

TEST(PmcmcStep, StationaryOnCycle) {
  const TableTarget target{{1.0, 2.0, 0.5, 4.0, 3.0, 0.1, 2.2}};
  const CycleKernel kernel{7};
  Rng rng(13);
  OracleLedger ledger;
  const auto f = frequencies(7, 300000, [&](int s) { return pmcmc_step(s, target, kernel, 4, rng, ledger); });
  EXPECT_LT(fixtures::total_variation(f, normalized(target.mass)), 0.01);
  EXPECT_EQ(ledger.qbar_calls, 300000u * 5);
  EXPECT_EQ(ledger.target_calls, 300000u * 5);
}

TEST(PmcmcStep, StationaryOnTwoSpinIsing) {
  const auto inst = fixtures::make(2, {{0, 1}}, {}, 1, 0.5);
  const phylo::IsingModel model(inst.net, 1);
  Rng rng(14);
  OracleLedger ledger;
  const auto f = fixtures::occupancy(inst.net, inst.state, 200000, [&](const phylo::TraitState& s) {
    return pmcmc_step(model, s, 3, rng, ledger).state;
  });
  EXPECT_LT(fixtures::total_variation(f, phylo::exact_distribution(inst.net, inst.state)), 0.01);
}

TEST(PmcmcStep, RejectsZeroProposals) {
  const TableTarget target{{1.0, 1.0, 1.0}};
  const CycleKernel kernel{3};
  Rng rng(1);
  OracleLedger ledger;
  EXPECT_THROW(pmcmc_step(0, target, kernel, 0, rng, ledger), Error);
}

TEST(JointProposal, AnchorIndependentOnCycle) {
  const CycleKernel kernel{6};
  const std::vector<std::vector<int>> sets{{0, 1, 2}, {0, 0, 1}, {3, 4, 4, 5}, {1, 1}};
  for (const auto& set : sets) {
    const double first = joint_proposal_pmf<int>(set, 0, kernel);
    EXPECT_GT(first, 0.0);
    for (std::size_t a = 1; a < set.size(); ++a) {
      EXPECT_NEAR(joint_proposal_pmf<int>(set, a, kernel), first, 1e-15);
    }
  }
}

TEST(JointProposal, NoCommonOffsetIsZero) {
  const CycleKernel kernel{10};
  const std::vector<int> far{0, 5};
  EXPECT_EQ(joint_proposal_pmf<int>(far, 0, kernel), 0.0);
}

TEST(JointProposal, NeedsEnumerableKernel) {
  const NonEnumerable kernel;
  const std::vector<int> set{0, 0};
  try {
    joint_proposal_pmf<int>(set, 0, kernel);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::enumeration_unavailable);
  }
}

TEST(ChainConfig, Validation) {
  ChainConfig c;
  c.algorithm = Algorithm::qpmcmc2_statevector;
  c.proposals = 6;
  try {
    c.validate();
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::superposition_width);
  }
  c.proposals = 7;
  EXPECT_NO_THROW(c.validate());
  c.algorithm = Algorithm::qpmcmc2_collapsed;
  c.proposals = 128;
  EXPECT_NO_THROW(c.validate());
  c.thinning = 0;
  EXPECT_THROW(c.validate(), Error);
}
