#pragma once

// Classical Barker and Tjelmeland-corrected multiproposal kernels.
//
// Kernels are written against the MultiproposalModel concept: a model draws an
// offset from the current state, draws proposals around the offset, and
// weights each candidate. Candidates are model-defined payloads, which lets
// the Ising model carry single-flip encodings instead of whole states. Plain
// (target, kernel) pairs are adapted through FullStateModel.

#include <algorithm>
#include <array>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <ranges>
#include <span>
#include <string>
#include <vector>

#include "error.hpp"
#include "ledger.hpp"
#include "random.hpp"

namespace qpmcmc {

template <class T, class State>
concept DiscreteTarget = requires(const T& target, const State& s) {
  { target.evaluate(s) } -> std::convertible_to<double>;
  { target.bounded_evaluate(s) } -> std::convertible_to<double>;
};

/// Symmetric proposal kernel q̄ used for both the offset and the proposals.
template <class K, class State>
concept TjelmelandKernel = requires(const K& kernel, const State& s, Rng& rng) {
  { kernel.sample(s, rng) } -> std::convertible_to<State>;
  { kernel.pmf(s, s) } -> std::convertible_to<double>;
};

template <class K, class State>
concept EnumerableKernel = TjelmelandKernel<K, State> && requires(const K& kernel, const State& s) {
  { kernel.support(s) } -> std::ranges::range;
};

template <class M>
concept MultiproposalModel = requires(const M& model, const typename M::state_type& s,
                                      const typename M::offset_type& o,
                                      const typename M::proposal_type& p, Rng& rng) {
  { model.draw_offset(s, rng) } -> std::same_as<typename M::offset_type>;
  { model.trivial_offset(s) } -> std::same_as<typename M::offset_type>;
  { model.anchor(s, o) } -> std::same_as<typename M::proposal_type>;
  { model.draw_proposal(o, rng) } -> std::same_as<typename M::proposal_type>;
  { model.weight(o, p) } -> std::convertible_to<double>;
  { model.bounded_weight(o, p) } -> std::convertible_to<double>;
  { model.materialize(o, p) } -> std::same_as<typename M::state_type>;
  { model.log_mass(s) } -> std::convertible_to<double>;
};

enum class Algorithm { barker, pmcmc, qpmcmc2_collapsed, qpmcmc2_statevector };

inline std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::barker: return "barker";
    case Algorithm::pmcmc: return "pmcmc";
    case Algorithm::qpmcmc2_collapsed: return "qpmcmc2";
    case Algorithm::qpmcmc2_statevector: return "qpmcmc2-sv";
  }
  return "unknown";
}

/// What a failed measurement of the quantum kernel redraws. same_batch keeps
/// the offset and proposals of the iteration, which leaves the selection
/// distribution exactly that of the classical multiproposal step; fresh_batch
/// redraws both and skews the stationary distribution towards states with a
/// high success rate.
enum class RestartPolicy { same_batch, fresh_batch };

inline std::string_view to_string(RestartPolicy r) {
  return r == RestartPolicy::same_batch ? "same-batch" : "fresh-batch";
}

inline bool is_power_of_two(std::uint64_t n) { return n != 0 && (n & (n - 1)) == 0; }

struct ChainConfig {
  std::size_t iterations = 1;
  std::size_t proposals = 1;
  std::uint64_t seed = 0;
  Algorithm algorithm = Algorithm::pmcmc;
  std::size_t max_restarts = 10'000;
  std::size_t thinning = 1;
  RestartPolicy restart = RestartPolicy::same_batch;

  void validate() const {
    if (iterations < 1) throw Error(ErrorCode::invalid_argument, "iterations must be >= 1");
    if (proposals < 1) throw Error(ErrorCode::invalid_argument, "proposals must be >= 1");
    if (thinning < 1) throw Error(ErrorCode::invalid_argument, "thinning must be >= 1");
    if (max_restarts < 1) throw Error(ErrorCode::invalid_argument, "max_restarts must be >= 1");
    if (algorithm == Algorithm::qpmcmc2_statevector && !is_power_of_two(proposals + 1)) {
      throw Error(ErrorCode::superposition_width,
                  "superposition width: P+1 = " + std::to_string(proposals + 1) +
                      " is not a power of two");
    }
  }
};

template <class State>
struct StepResult {
  State state;
  std::size_t selected = 0;
  std::uint64_t restarts = 0;
};

/// Normalized selection probabilities w / sum(w).
inline std::vector<double> selection_pmf(std::span<const double> weights) {
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw Error(ErrorCode::invalid_argument, "selection weights must be finite and nonnegative");
    }
    total += w;
  }
  if (!(total > 0.0)) throw Error(ErrorCode::degenerate_selection, "degenerate selection");
  std::vector<double> pmf(weights.size());
  for (std::size_t i = 0; i < weights.size(); ++i) pmf[i] = weights[i] / total;
  return pmf;
}

/// Draws index p with probability weights[p] / sum(weights).
inline std::size_t barker_select(std::span<const double> weights, Rng& rng) {
  if (weights.empty()) throw Error(ErrorCode::degenerate_selection, "degenerate selection");
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw Error(ErrorCode::invalid_argument, "selection weights must be finite and nonnegative");
    }
    total += w;
  }
  if (!(total > 0.0)) throw Error(ErrorCode::degenerate_selection, "degenerate selection");

  const double u = rng.uniform() * total;
  double cumulative = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (weights[i] <= 0.0) continue;
    last_positive = i;
    cumulative += weights[i];
    if (u < cumulative) return i;
  }
  // Rounding can leave u a hair above the final partial sum.
  return last_positive;
}

/// Adapts a full-state target and kernel to MultiproposalModel. Offsets and
/// proposals are whole states.
template <class State, DiscreteTarget<State> Target, TjelmelandKernel<State> Kernel>
class FullStateModel {
 public:
  using state_type = State;
  using offset_type = State;
  using proposal_type = State;

  FullStateModel(const Target& target, const Kernel& kernel) : target_(&target), kernel_(&kernel) {}

  State draw_offset(const State& s, Rng& rng) const { return kernel_->sample(s, rng); }
  State trivial_offset(const State& s) const { return s; }
  State anchor(const State& s, const State&) const { return s; }
  State draw_proposal(const State& offset, Rng& rng) const { return kernel_->sample(offset, rng); }
  double weight(const State&, const State& p) const { return target_->evaluate(p); }
  double bounded_weight(const State&, const State& p) const { return target_->bounded_evaluate(p); }
  State materialize(const State&, const State& p) const { return p; }
  double log_mass(const State& s) const { return std::log(target_->evaluate(s)); }

  const Target& target() const { return *target_; }
  const Kernel& kernel() const { return *kernel_; }

 private:
  const Target* target_;
  const Kernel* kernel_;
};

/// One Barker step: a single symmetric proposal from the current state,
/// accepted with probability pi(proposal) / (pi(current) + pi(proposal)).
template <MultiproposalModel Model>
StepResult<typename Model::state_type> barker_step(const Model& model,
                                                   const typename Model::state_type& current,
                                                   Rng& rng, OracleLedger& ledger) {
  const auto offset = model.trivial_offset(current);
  const auto candidates = std::array{model.anchor(current, offset), model.draw_proposal(offset, rng)};
  ledger.qbar_calls += 1;
  const std::array<double, 2> weights{model.weight(offset, candidates[0]),
                                      model.weight(offset, candidates[1])};
  ledger.target_calls += 2;
  const std::size_t selected = barker_select(weights, rng);
  ledger.iterations += 1;
  return {model.materialize(offset, candidates[selected]), selected, 0};
}

template <class State, DiscreteTarget<State> Target, TjelmelandKernel<State> Kernel>
State barker_step(const State& current, const Target& target, const Kernel& kernel, Rng& rng,
                  OracleLedger& ledger) {
  const FullStateModel<State, Target, Kernel> model(target, kernel);
  return barker_step(model, current, rng, ledger).state;
}

/// One multiproposal step with the Tjelmeland correction: offset from the
/// current state, P i.i.d. proposals from the offset, Barker selection over
/// the current state and the proposals. The current state's mass is
/// re-evaluated every step, so the ledger sees P+1 target calls.
template <MultiproposalModel Model>
StepResult<typename Model::state_type> pmcmc_step(const Model& model,
                                                  const typename Model::state_type& current,
                                                  std::size_t proposals, Rng& rng,
                                                  OracleLedger& ledger) {
  if (proposals < 1) throw Error(ErrorCode::invalid_argument, "proposals must be >= 1");
  const auto offset = model.draw_offset(current, rng);
  std::vector<typename Model::proposal_type> candidates;
  candidates.reserve(proposals + 1);
  candidates.push_back(model.anchor(current, offset));
  for (std::size_t p = 0; p < proposals; ++p) candidates.push_back(model.draw_proposal(offset, rng));
  ledger.qbar_calls += proposals + 1;

  std::vector<double> weights(candidates.size());
  for (std::size_t p = 0; p < candidates.size(); ++p) weights[p] = model.weight(offset, candidates[p]);
  ledger.target_calls += proposals + 1;

  const std::size_t selected = barker_select(weights, rng);
  ledger.iterations += 1;
  return {model.materialize(offset, candidates[selected]), selected, 0};
}

template <class State, DiscreteTarget<State> Target, TjelmelandKernel<State> Kernel>
State pmcmc_step(const State& current, const Target& target, const Kernel& kernel,
                 std::size_t proposals, Rng& rng, OracleLedger& ledger) {
  const FullStateModel<State, Target, Kernel> model(target, kernel);
  return pmcmc_step(model, current, proposals, rng, ledger).state;
}

/// Joint proposal mass q(θ_p, Θ_{-p}) = Σ_θ̄ q̄(θ_p, θ̄) Π_{p'≠p} q̄(θ̄, θ_p'),
/// enumerating θ̄ over the union of the candidates' supports.
template <class State, class Kernel>
double joint_proposal_pmf(std::span<const State> candidates, std::size_t anchor_index,
                          const Kernel& kernel) {
  if (anchor_index >= candidates.size()) {
    throw Error(ErrorCode::invalid_argument, "anchor index out of range");
  }
  if constexpr (!EnumerableKernel<Kernel, State>) {
    throw Error(ErrorCode::enumeration_unavailable, "enumeration unavailable");
  } else {
    std::vector<State> offsets;
    for (const State& c : candidates) {
      for (const State& s : kernel.support(c)) {
        if (std::find(offsets.begin(), offsets.end(), s) == offsets.end()) offsets.push_back(s);
      }
    }
    double total = 0.0;
    for (const State& offset : offsets) {
      double term = kernel.pmf(candidates[anchor_index], offset);
      for (std::size_t p = 0; p < candidates.size() && term != 0.0; ++p) {
        if (p != anchor_index) term *= kernel.pmf(offset, candidates[p]);
      }
      total += term;
    }
    return total;
  }
}

}  // namespace qpmcmc
