#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "qpmcmc/diagnostics.hpp"
#include "qpmcmc/random.hpp"

using namespace qpmcmc;
using namespace qpmcmc::diagnostics;

namespace {

std::vector<double> gaussian(std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> out(n);
  // Box-Muller keeps the draws independent of the standard library.
  for (std::size_t i = 0; i < n; i += 2) {
    const double u1 = 1.0 - rng.uniform(), u2 = rng.uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    out[i] = r * std::cos(2 * M_PI * u2);
    if (i + 1 < n) out[i + 1] = r * std::sin(2 * M_PI * u2);
  }
  return out;
}

std::vector<double> ar1(double phi, std::size_t n, std::uint64_t seed) {
  auto noise = gaussian(n, seed);
  std::vector<double> x(n);
  x[0] = noise[0] / std::sqrt(1 - phi * phi);
  for (std::size_t i = 1; i < n; ++i) x[i] = phi * x[i - 1] + noise[i];
  return x;
}

}  // namespace

TEST(Autocorrelation, IidNoise) {
  const auto x = gaussian(20000, 1);
  const auto rho = autocorrelation(x, 5);
  EXPECT_EQ(rho[0], 1.0);
  for (std::size_t k = 1; k < rho.size(); ++k) EXPECT_LT(std::abs(rho[k]), 3.0 / std::sqrt(20000.0));
}

TEST(Autocorrelation, Ar1) {
  const auto x = ar1(0.5, 100000, 2);
  const auto rho = autocorrelation(x, 5);
  for (std::size_t k = 1; k <= 5; ++k) EXPECT_NEAR(rho[k], std::pow(0.5, static_cast<double>(k)), 0.02);
}

TEST(Autocorrelation, ConstantSeries) {
  const std::vector<double> flat(100, 3.25);
  try {
    autocorrelation(flat, 3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::zero_variance);
  }
  EXPECT_THROW(ess(flat), Error);
}

TEST(Ess, IidNoise) {
  const auto x = gaussian(50000, 3);
  EXPECT_NEAR(ess(x).ess / 50000.0, 1.0, 0.1);
}

TEST(Ess, Ar1Half) {
  const auto x = ar1(0.5, 100000, 4);
  EXPECT_NEAR(ess(x).ess / 100000.0, 1.0 / 3.0, 1.0 / 30.0);
}

TEST(Ess, AlternatingSeriesClamped) {
  std::vector<double> x(1000);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = i % 2 ? 1.0 : -1.0;
  const auto r = ess(x);
  EXPECT_GT(r.ess, 0.0);
  EXPECT_LE(r.ess, 1000.0);
}

TEST(Ess, TooShort) {
  const std::vector<double> x{1, 2, 3};
  EXPECT_THROW(ess(x), Error);
}

TEST(Ess, PerTenThousandOracles) {
  EssReport r;
  r.ess = 500.0;
  OracleLedger ledger{30000, 20000, 20000, 0, 0};
  EXPECT_DOUBLE_EQ(ess_per_10k_oracles(r, ledger), 100.0);
  EXPECT_DOUBLE_EQ(with_oracles(r, ledger).ess_per_10k_oracles, 100.0);
  EXPECT_THROW(ess_per_10k_oracles(r, OracleLedger{}), Error);
  EXPECT_TRUE(to_json(r)["ess_per_10k_oracles"].is_null());
}
