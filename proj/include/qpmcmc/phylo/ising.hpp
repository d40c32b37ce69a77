#pragma once

// Ising-type trait models on phylogenetic networks.
//
// The chain state is a TraitState; only ancestral slots move. The proposal
// kernel is uniform over {identity} ∪ {flip one ancestral (vertex, trait)
// slot}. For multiproposal sampling every candidate is at most one flip away
// from the offset, so candidates are carried as CompactProposal values and
// weighted by the local bounded target
//
//     π_p = exp(-2 J f),  f = deg(G) + σ̄_{m,t} Σ_{n ~ m} σ̄_{n,t}   (flip of (m,t))
//     π_p = exp(-2 J deg(G))                                       (identity)
//
// which is π(θ_p)/π(θ̄) scaled by exp(-2 J deg(G)) and lies in (0, 1] for J ≥ 0.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "../error.hpp"
#include "../ledger.hpp"
#include "../random.hpp"
#include "network.hpp"
#include "trait_state.hpp"

namespace qpmcmc::phylo {

/// Identity, or a flip of trait `trait` at ancestral vertex `node`.
struct CompactProposal {
  enum class Kind : std::uint8_t { identity, flip };

  Kind kind = Kind::identity;
  Vertex node = 0;
  std::uint32_t trait = 0;

  static constexpr CompactProposal identity() { return {}; }
  static constexpr CompactProposal flip(Vertex node, std::uint32_t trait) {
    return {Kind::flip, node, trait};
  }
  constexpr bool is_identity() const { return kind == Kind::identity; }

  friend bool operator==(const CompactProposal&, const CompactProposal&) = default;
};

/// exp(-2 J f) for f = 0 .. 2 deg(G).
struct TargetTable {
  double J = 0.0;
  std::size_t degree = 0;
  std::vector<double> values;

  double operator[](std::size_t f) const { return values.at(f); }
};

/// The single expression shared by the table and the direct path, so both
/// round identically.
inline double bounded_factor(double J, int f) { return std::exp(-2.0 * J * static_cast<double>(f)); }

inline TargetTable build_lookup_table(double J, std::size_t degree) {
  if (J < 0.0) {
    throw Error(ErrorCode::antiferromagnetic_coupling,
                "antiferromagnetic coupling unsupported on quantum backends (J = " + std::to_string(J) + ")");
  }
  if (degree < 1) throw Error(ErrorCode::invalid_argument, "lookup table needs deg(G) >= 1");
  TargetTable table{J, degree, {}};
  table.values.reserve(2 * degree + 1);
  for (std::size_t f = 0; f <= 2 * degree; ++f) table.values.push_back(bounded_factor(J, static_cast<int>(f)));
  return table;
}

/// J Σ_{(m,m')∈E} σ_m · σ_m' (per-edge couplings replace J edge by edge).
inline double log_posterior(const PhyloNetwork& net, const TraitState& s) {
  if (const auto J = net.uniform_coupling()) {
    long long total = 0;
    for (const Edge& e : net.edges()) total += s.dot(e.u, e.v);
    return *J * static_cast<double>(total);
  }
  double total = 0.0;
  for (std::size_t i = 0; i < net.edges().size(); ++i) {
    const Edge& e = net.edges()[i];
    total += net.coupling(static_cast<std::uint32_t>(i)) * s.dot(e.u, e.v);
  }
  return total;
}

/// σ_{m,t} Σ_{n ~ m} σ_{n,t}.
inline int local_alignment(const PhyloNetwork& net, const TraitState& s, Vertex m, std::size_t t) {
  const int own = s.spin(m, t);
  int sum = 0;
  for (const Neighbor& n : net.neighbors(m)) sum += s.spin(n.vertex, t);
  return own * sum;
}

/// Change in log_posterior caused by flipping (m, t).
inline double flip_delta(const PhyloNetwork& net, const TraitState& s, Vertex m, std::size_t t) {
  if (const auto J = net.uniform_coupling()) return -2.0 * *J * local_alignment(net, s, m, t);
  const int own = s.spin(m, t);
  double field = 0.0;
  for (const Neighbor& n : net.neighbors(m)) field += net.coupling(n.edge) * s.spin(n.vertex, t);
  return -2.0 * own * field;
}

inline void check_proposal(const PhyloNetwork& net, const TraitState& s, const CompactProposal& p) {
  if (p.is_identity()) return;
  if (p.node >= net.vertex_count() || p.trait >= s.traits()) {
    throw Error(ErrorCode::invalid_argument, "proposal slot out of range");
  }
  if (net.is_observed(p.node)) {
    throw Error(ErrorCode::immutable_observed_trait,
                "immutable observed trait: vertex " + std::to_string(p.node));
  }
}

/// f index into the lookup table for proposal p at offset θ̄.
inline int table_index(const PhyloNetwork& net, const TraitState& offset, const CompactProposal& p) {
  check_proposal(net, offset, p);
  const int degree = static_cast<int>(net.degree());
  if (p.is_identity()) return degree;
  return degree + local_alignment(net, offset, p.node, p.trait);
}

inline double require_uniform_coupling(const PhyloNetwork& net) {
  const auto J = net.uniform_coupling();
  if (!J) throw Error(ErrorCode::invalid_argument, "bounded local target requires a uniform coupling");
  return *J;
}

/// Bounded local target via the lookup table.
inline double relative_target(const PhyloNetwork& net, const TraitState& offset, const CompactProposal& p,
                              const TargetTable& table) {
  require_uniform_coupling(net);
  return table[static_cast<std::size_t>(table_index(net, offset, p))];
}

/// Bounded local target evaluated directly.
inline double relative_target_direct(const PhyloNetwork& net, const TraitState& offset,
                                     const CompactProposal& p) {
  return bounded_factor(require_uniform_coupling(net), table_index(net, offset, p));
}

inline TraitState apply_proposal(const TraitState& offset, const CompactProposal& p) {
  TraitState out = offset;
  if (!p.is_identity()) out.flip(p.node, p.trait);
  return out;
}

/// Number of distinct non-identity moves, M_a · T.
inline std::size_t flip_slots(const PhyloNetwork& net, std::size_t traits) {
  return net.ancestral().size() * traits;
}

/// Uniform draw over identity and the M_a·T single ancestral flips.
inline CompactProposal tjelmeland_sample(const PhyloNetwork& net, std::size_t traits, Rng& rng) {
  const std::size_t slots = flip_slots(net, traits);
  const std::uint64_t k = rng.below(slots + 1);
  if (k == slots) return CompactProposal::identity();
  return CompactProposal::flip(net.ancestral()[k / traits], static_cast<std::uint32_t>(k % traits));
}

inline double tjelmeland_pmf(const PhyloNetwork& net, const TraitState& a, const TraitState& b) {
  const double mass = 1.0 / static_cast<double>(flip_slots(net, a.traits()) + 1);
  if (a.traits() != b.traits() || a.vertex_count() != b.vertex_count()) return 0.0;
  const auto& wa = a.words();
  const auto& wb = b.words();
  const std::size_t words_per_row = wa.size() / a.vertex_count();
  std::size_t distance = 0;
  for (std::size_t i = 0; i < wa.size(); ++i) {
    const std::uint64_t diff = wa[i] ^ wb[i];
    if (diff == 0) continue;
    if (net.is_observed(static_cast<Vertex>(i / words_per_row))) return 0.0;
    distance += std::popcount(diff);
    if (distance > 1) return 0.0;
  }
  return mass;
}

/// Full-state form of the kernel, for the generic engine and enumeration.
class IsingKernel {
 public:
  IsingKernel(const PhyloNetwork& net, std::size_t traits) : net_(&net), traits_(traits) {}

  TraitState sample(const TraitState& s, Rng& rng) const {
    return apply_proposal(s, tjelmeland_sample(*net_, traits_, rng));
  }
  double pmf(const TraitState& a, const TraitState& b) const { return tjelmeland_pmf(*net_, a, b); }

  std::vector<TraitState> support(const TraitState& s) const {
    std::vector<TraitState> out{s};
    for (Vertex v : net_->ancestral()) {
      for (std::size_t t = 0; t < traits_; ++t) out.push_back(apply_proposal(s, CompactProposal::flip(v, static_cast<std::uint32_t>(t))));
    }
    return out;
  }

 private:
  const PhyloNetwork* net_;
  std::size_t traits_;
};

/// Full-state target exp(log_posterior). The bounded form divides by
/// exp(Σ_e |j_e| T), an upper bound on every state's mass.
class IsingTarget {
 public:
  IsingTarget(const PhyloNetwork& net, std::size_t traits) : net_(&net) {
    double bound = 0.0;
    for (std::size_t i = 0; i < net.edges().size(); ++i) {
      bound += std::abs(net.coupling(static_cast<std::uint32_t>(i))) * static_cast<double>(traits);
    }
    log_bound_ = bound;
  }

  double log_evaluate(const TraitState& s) const { return log_posterior(*net_, s); }
  double evaluate(const TraitState& s) const { return std::exp(log_evaluate(s)); }
  double bounded_evaluate(const TraitState& s) const { return std::exp(log_evaluate(s) - log_bound_); }
  double log_bound() const { return log_bound_; }

 private:
  const PhyloNetwork* net_;
  double log_bound_ = 0.0;
};

/// Offset state θ̄ together with the move that produced it from θ₀. Because
/// single flips are involutions, the same move takes θ̄ back to θ₀.
struct IsingOffset {
  TraitState state;
  CompactProposal from_current;
};

/// Multiproposal model with single-flip payloads and the bounded local target.
class IsingModel {
 public:
  using state_type = TraitState;
  using offset_type = IsingOffset;
  using proposal_type = CompactProposal;

  IsingModel(const PhyloNetwork& net, std::size_t traits) : net_(&net), traits_(traits) {
    if (flip_slots(net, traits) == 0) throw Error(ErrorCode::invalid_network, "network has no ancestral vertices");
    if (const auto J = net.uniform_coupling(); J && *J >= 0.0 && net.degree() >= 1) {
      table_ = build_lookup_table(*J, net.degree());
    }
  }

  const PhyloNetwork& network() const { return *net_; }
  std::size_t traits() const { return traits_; }
  const std::optional<TargetTable>& table() const { return table_; }

  IsingOffset draw_offset(const TraitState& s, Rng& rng) const {
    const CompactProposal move = tjelmeland_sample(*net_, traits_, rng);
    return {apply_proposal(s, move), move};
  }
  IsingOffset trivial_offset(const TraitState& s) const { return {s, CompactProposal::identity()}; }
  CompactProposal anchor(const TraitState&, const IsingOffset& o) const { return o.from_current; }
  CompactProposal draw_proposal(const IsingOffset&, Rng& rng) const {
    return tjelmeland_sample(*net_, traits_, rng);
  }

  /// π(θ_p)/π(θ̄), scaled into (0, 1] when the coupling allows it.
  double weight(const IsingOffset& o, const CompactProposal& p) const {
    if (table_) return relative_target(*net_, o.state, p, *table_);
    if (const auto J = net_->uniform_coupling()) return bounded_factor(*J, table_index(*net_, o.state, p));
    check_proposal(*net_, o.state, p);
    return p.is_identity() ? 1.0 : std::exp(flip_delta(*net_, o.state, p.node, p.trait));
  }
  double bounded_weight(const IsingOffset& o, const CompactProposal& p) const { return weight(o, p); }

  TraitState materialize(const IsingOffset& o, const CompactProposal& p) const {
    return apply_proposal(o.state, p);
  }
  double log_mass(const TraitState& s) const { return log_posterior(*net_, s); }

 private:
  const PhyloNetwork* net_;
  std::size_t traits_;
  std::optional<TargetTable> table_;
};

/// Packs ancestral slot (k-th ancestral vertex, trait t) into bit k·T + t
/// (+1 ↔ 1). Requires M_a·T ≤ 64.
inline std::uint64_t ancestral_code(const PhyloNetwork& net, const TraitState& s) {
  const std::size_t T = s.traits();
  if (flip_slots(net, T) > 64) throw Error(ErrorCode::state_space_too_large, "ancestral code needs M_a*T <= 64");
  std::uint64_t code = 0;
  for (std::size_t k = 0; k < net.ancestral().size(); ++k) {
    for (std::size_t t = 0; t < T; ++t) {
      if (s.spin(net.ancestral()[k], t) == 1) code |= std::uint64_t{1} << (k * T + t);
    }
  }
  return code;
}

/// Inverse of ancestral_code, applied on top of `base` (observed rows kept).
inline TraitState decode_ancestral(const PhyloNetwork& net, const TraitState& base, std::uint64_t code) {
  TraitState s = base;
  const std::size_t T = s.traits();
  for (std::size_t k = 0; k < net.ancestral().size(); ++k) {
    for (std::size_t t = 0; t < T; ++t) s.set_spin(net.ancestral()[k], t, (code >> (k * T + t)) & 1u ? 1 : -1);
  }
  return s;
}

/// Boltzmann masses of all 2^(M_a·T) ancestral configurations, indexed by
/// ancestral_code. `base` supplies the observed spins and T.
inline std::vector<double> exact_distribution(const PhyloNetwork& net, const TraitState& base) {
  const std::size_t bits = flip_slots(net, base.traits());
  if (bits > 20) {
    throw Error(ErrorCode::state_space_too_large,
                "state space too large for enumeration (M_a*T = " + std::to_string(bits) + " > 20)");
  }
  const std::size_t n = std::size_t{1} << bits;
  std::vector<double> logs(n);
  double max_log = -std::numeric_limits<double>::infinity();
  for (std::size_t code = 0; code < n; ++code) {
    logs[code] = log_posterior(net, decode_ancestral(net, base, code));
    max_log = std::max(max_log, logs[code]);
  }
  double total = 0.0;
  for (double& l : logs) {
    l = std::exp(l - max_log);
    total += l;
  }
  for (double& l : logs) l /= total;
  return logs;
}

/// Coarse lower bound exp(-4 J deg(G)) on the expected acceptance rate.
inline double acceptance_lower_bound(double J, std::size_t degree) {
  return std::exp(-4.0 * J * static_cast<double>(degree));
}

/// Successful attempts over all attempts recorded in a ledger.
inline double empirical_acceptance(const OracleLedger& ledger) { return ledger.acceptance_rate(); }

}  // namespace qpmcmc::phylo
