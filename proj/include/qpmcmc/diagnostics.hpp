#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include <json.hpp>

#include "error.hpp"
#include "ledger.hpp"
#include "phylo/network.hpp"
#include "phylo/trait_state.hpp"

namespace qpmcmc::diagnostics {

struct EssReport {
  std::size_t series_length = 0;
  double ess = 0.0;
  /// NaN until combined with a ledger.
  double ess_per_10k_oracles = std::numeric_limits<double>::quiet_NaN();
  std::size_t autocorrelation_cutoff_lag = 0;
};

namespace detail {

struct Centered {
  std::vector<double> values;
  double variance = 0.0;  // biased (divides by S)
};

inline Centered center(std::span<const double> series) {
  Centered out;
  double mean = 0.0;
  for (double x : series) {
    if (!std::isfinite(x)) throw Error(ErrorCode::invalid_argument, "series contains non-finite values");
    mean += x;
  }
  mean /= static_cast<double>(series.size());
  out.values.reserve(series.size());
  double scale = 0.0;
  for (double x : series) {
    out.values.push_back(x - mean);
    out.variance += (x - mean) * (x - mean);
    scale = std::max(scale, std::abs(x));
  }
  out.variance /= static_cast<double>(series.size());
  // Spread below rounding noise of the values counts as constant.
  const double floor = scale * std::numeric_limits<double>::epsilon();
  if (!(out.variance > floor * floor)) throw Error(ErrorCode::zero_variance, "zero variance");
  return out;
}

inline double autocovariance(const std::vector<double>& centered, std::size_t lag) {
  double total = 0.0;
  const std::size_t n = centered.size();
  for (std::size_t i = 0; i + lag < n; ++i) total += centered[i] * centered[i + lag];
  return total / static_cast<double>(n);
}

}  // namespace detail

/// Biased-normalisation autocorrelation ρ̂(0..max_lag); max_lag is clamped to S-1.
inline std::vector<double> autocorrelation(std::span<const double> series, std::size_t max_lag) {
  if (series.size() < 2) throw Error(ErrorCode::invalid_argument, "autocorrelation needs at least 2 values");
  const auto c = detail::center(series);
  max_lag = std::min(max_lag, series.size() - 1);
  std::vector<double> rho(max_lag + 1);
  rho[0] = 1.0;
  for (std::size_t k = 1; k <= max_lag; ++k) rho[k] = detail::autocovariance(c.values, k) / c.variance;
  return rho;
}

/// Effective sample size S / τ with Geyer's initial monotone positive
/// sequence estimator: τ = -1 + 2 Σ_k Γ_k, Γ_k = ρ(2k) + ρ(2k+1), summed
/// while Γ_k > 0 and forced non-increasing. The result is clamped to (0, S].
inline EssReport ess(std::span<const double> series) {
  const std::size_t n = series.size();
  if (n < 10) throw Error(ErrorCode::invalid_argument, "ESS needs at least 10 values");
  const auto c = detail::center(series);

  double sum = 0.0;
  double previous = std::numeric_limits<double>::infinity();
  std::size_t cutoff = 0;
  for (std::size_t k = 0; 2 * k + 1 < n; ++k) {
    const double rho_even = k == 0 ? 1.0 : detail::autocovariance(c.values, 2 * k) / c.variance;
    const double rho_odd = detail::autocovariance(c.values, 2 * k + 1) / c.variance;
    double gamma = rho_even + rho_odd;
    if (!(gamma > 0.0)) break;
    gamma = std::min(gamma, previous);
    previous = gamma;
    sum += gamma;
    cutoff = 2 * k + 1;
  }

  EssReport report;
  report.series_length = n;
  report.autocorrelation_cutoff_lag = cutoff;
  const double tau = -1.0 + 2.0 * sum;
  const double s = static_cast<double>(n);
  report.ess = tau > 1.0 ? s / tau : s;
  return report;
}

inline double ess_per_10k_oracles(const EssReport& report, const OracleLedger& ledger) {
  const auto calls = ledger.oracle_calls();
  if (calls == 0) throw Error(ErrorCode::invalid_argument, "ledger records no oracle calls");
  return report.ess * 10'000.0 / static_cast<double>(calls);
}

inline EssReport with_oracles(EssReport report, const OracleLedger& ledger) {
  report.ess_per_10k_oracles = ess_per_10k_oracles(report, ledger);
  return report;
}

inline nlohmann::ordered_json to_json(const EssReport& report) {
  nlohmann::ordered_json doc;
  doc["series_length"] = report.series_length;
  doc["ess"] = report.ess;
  if (std::isnan(report.ess_per_10k_oracles)) {
    doc["ess_per_10k_oracles"] = nullptr;
  } else {
    doc["ess_per_10k_oracles"] = report.ess_per_10k_oracles;
  }
  doc["autocorrelation_cutoff_lag"] = report.autocorrelation_cutoff_lag;
  return doc;
}

struct ModeEntry {
  phylo::Vertex vertex = 0;
  std::size_t trait = 0;
  int spin = 1;
  bool tie = false;
};

/// Majority spin per ancestral (vertex, trait) slot; ties resolve to +1 and
/// are flagged.
inline std::vector<ModeEntry> posterior_mode(std::span<const phylo::TraitState> samples,
                                             const phylo::PhyloNetwork& net) {
  if (samples.empty()) throw Error(ErrorCode::invalid_argument, "posterior mode needs at least one sample");
  const std::size_t T = samples.front().traits();
  std::vector<ModeEntry> out;
  out.reserve(net.ancestral().size() * T);
  for (phylo::Vertex v : net.ancestral()) {
    for (std::size_t t = 0; t < T; ++t) {
      long long balance = 0;
      for (const auto& s : samples) balance += s.spin(v, t);
      out.push_back({v, t, balance >= 0 ? 1 : -1, balance == 0});
    }
  }
  return out;
}

}  // namespace qpmcmc::diagnostics
