#pragma once

// Classical simulation of the quantum multiproposal kernel.
//
// Two backends share the proposal and target oracles:
//  - statevector: the proposal-label register and the success qubit are
//    simulated as complex amplitudes, with Hadamard preparation, a controlled
//    rotation per label and two-stage measurement. Proposal payloads and target
//    values are computational-basis data attached to each label branch.
//  - collapsed: draws the same outcome distributions directly (success with
//    probability R = Σπ_p/(P+1), then label p with probability π_p/Σπ).

#include <bit>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "error.hpp"
#include "ledger.hpp"
#include "mcmc.hpp"
#include "random.hpp"

namespace qpmcmc {

enum class Backend { collapsed, statevector };

/// Raised when every attempt of a step measured failure. Carries the ledger
/// as it stood when the step gave up.
class AcceptanceStarvation : public Error {
 public:
  AcceptanceStarvation(const std::string& message, const OracleLedger& ledger)
      : Error(ErrorCode::acceptance_starvation, message), ledger_(ledger) {}

  const OracleLedger& ledger() const noexcept { return ledger_; }

 private:
  OracleLedger ledger_;
};

inline std::size_t ceil_log2(std::uint64_t n) {
  return n <= 1 ? 0 : static_cast<std::size_t>(std::bit_width(n - 1));
}

/// Qubit budget of one kernel application.
struct RegisterLayout {
  std::size_t proposal_qubits = 1;
  /// Width of the proposal payload register under the (node, trait) flip
  /// encoding: the flip index plus one identity flag.
  std::size_t payload_qubits = 1;
  std::size_t success_qubits = 1;

  static RegisterLayout for_proposals(std::size_t proposals, std::size_t flip_slots) {
    RegisterLayout layout;
    layout.proposal_qubits = std::max<std::size_t>(1, ceil_log2(proposals + 1));
    layout.payload_qubits = ceil_log2(flip_slots) + 1;
    return layout;
  }

  bool exact_width(std::size_t proposals) const {
    return (std::uint64_t{1} << proposal_qubits) == proposals + 1;
  }
};

template <class Payload>
struct Branch {
  std::size_t label = 0;
  std::optional<Payload> payload;
  double value = 0.0;  // bounded target value π_p, set by the target oracle
  std::complex<double> amplitude_s0;
  std::complex<double> amplitude_s1;
};

/// Joint state of the proposal-label register and the success qubit, with
/// per-branch classical payloads.
template <class Payload>
class BranchEnsemble {
 public:
  /// |0⟩_P |0⟩_S over 2^qubits labels.
  explicit BranchEnsemble(std::size_t qubits) : qubits_(qubits) {
    branches_.resize(std::size_t{1} << qubits);
    for (std::size_t p = 0; p < branches_.size(); ++p) branches_[p].label = p;
    branches_[0].amplitude_s0 = 1.0;
  }

  std::size_t qubits() const noexcept { return qubits_; }
  std::size_t width() const noexcept { return branches_.size(); }
  std::vector<Branch<Payload>>& branches() noexcept { return branches_; }
  const std::vector<Branch<Payload>>& branches() const noexcept { return branches_; }

  void apply_hadamard(std::size_t qubit) {
    const std::size_t bit = std::size_t{1} << qubit;
    const double h = 1.0 / std::sqrt(2.0);
    for (std::size_t i = 0; i < branches_.size(); ++i) {
      if (i & bit) continue;
      auto& lo = branches_[i];
      auto& hi = branches_[i | bit];
      const auto a0 = lo.amplitude_s0, b0 = hi.amplitude_s0;
      const auto a1 = lo.amplitude_s1, b1 = hi.amplitude_s1;
      lo.amplitude_s0 = h * (a0 + b0);
      hi.amplitude_s0 = h * (a0 - b0);
      lo.amplitude_s1 = h * (a1 + b1);
      hi.amplitude_s1 = h * (a1 - b1);
    }
  }

  /// Rotation of the success qubit controlled by label `label`:
  /// |0⟩ ↦ √(1-x)|0⟩ + √x|1⟩, |1⟩ ↦ -√x|0⟩ + √(1-x)|1⟩.
  void apply_controlled_rotation(std::size_t label, double x) {
    auto& b = branches_.at(label);
    const double c = std::sqrt(1.0 - x);
    const double s = std::sqrt(x);
    const auto a0 = b.amplitude_s0, a1 = b.amplitude_s1;
    b.amplitude_s0 = c * a0 - s * a1;
    b.amplitude_s1 = s * a0 + c * a1;
  }

  double norm_squared() const {
    double total = 0.0;
    for (const auto& b : branches_) total += std::norm(b.amplitude_s0) + std::norm(b.amplitude_s1);
    return total;
  }

  double success_probability() const {
    double total = 0.0;
    for (const auto& b : branches_) total += std::norm(b.amplitude_s1);
    return total;
  }

  /// Label distribution after the success qubit has been measured as 1.
  std::vector<double> conditional_selection_pmf() const {
    const double success = success_probability();
    std::vector<double> pmf(branches_.size(), 0.0);
    if (success <= 0.0) return pmf;
    for (std::size_t p = 0; p < branches_.size(); ++p) {
      pmf[p] = std::norm(branches_[p].amplitude_s1) / success;
    }
    return pmf;
  }

  /// Projects the success qubit onto `outcome` and renormalizes.
  void collapse_success(bool outcome, double probability) {
    const double scale = 1.0 / std::sqrt(probability);
    for (auto& b : branches_) {
      if (outcome) {
        b.amplitude_s0 = 0.0;
        b.amplitude_s1 *= scale;
      } else {
        b.amplitude_s1 = 0.0;
        b.amplitude_s0 *= scale;
      }
    }
  }

 private:
  std::size_t qubits_;
  std::vector<Branch<Payload>> branches_;
};

/// Hadamard on every label qubit: uniform superposition over P+1 labels.
template <class Payload>
BranchEnsemble<Payload> prepare_uniform_superposition(std::size_t proposals) {
  const std::uint64_t width = std::uint64_t{proposals} + 1;
  if (!is_power_of_two(width) || width < 2) {
    throw Error(ErrorCode::superposition_width,
                "superposition width: P+1 = " + std::to_string(width) + " is not a power of two");
  }
  BranchEnsemble<Payload> ens(ceil_log2(width));
  for (std::size_t q = 0; q < ens.qubits(); ++q) ens.apply_hadamard(q);
  return ens;
}

/// Fills the payload of every label branch: label 0 holds the current state
/// (expressed relative to the offset), labels 1..P hold i.i.d. draws from
/// q̄(offset, ·). One superposed application is one proposal-oracle call.
template <MultiproposalModel Model>
void apply_proposal_oracle(BranchEnsemble<typename Model::proposal_type>& ens,
                           const typename Model::state_type& current,
                           const typename Model::offset_type& offset, const Model& model,
                           Rng& rng, OracleLedger& ledger) {
  auto& branches = ens.branches();
  branches[0].payload = model.anchor(current, offset);
  for (std::size_t p = 1; p < branches.size(); ++p) branches[p].payload = model.draw_proposal(offset, rng);
  ledger.qbar_calls += 1;
}

inline double checked_bounded_value(double value) {
  if (!(value >= 0.0 && value <= 1.0)) {
    throw Error(ErrorCode::unbounded_target,
                "unbounded target: value " + std::to_string(value) + " outside [0, 1]");
  }
  return value;
}

/// Target oracle followed by the label-controlled rotation of the success qubit.
template <MultiproposalModel Model>
void apply_target_oracle_and_rotation(BranchEnsemble<typename Model::proposal_type>& ens,
                                      const typename Model::offset_type& offset,
                                      const Model& model, OracleLedger& ledger) {
  for (auto& b : ens.branches()) {
    b.value = checked_bounded_value(model.bounded_weight(offset, *b.payload));
  }
  ledger.target_calls += 1;
  for (auto& b : ens.branches()) ens.apply_controlled_rotation(b.label, b.value);
  ledger.rotation_calls += 1;
}

struct MeasurementOutcome {
  bool success = false;
  std::optional<std::size_t> label;
};

/// Measures the success qubit, then (on success) the label register.
/// Collapses `ens` accordingly.
template <class Payload>
MeasurementOutcome measure(BranchEnsemble<Payload>& ens, Rng& rng) {
  const double success = ens.success_probability();
  if (!(rng.uniform() < success)) {
    if (success < 1.0) ens.collapse_success(false, 1.0 - success);
    return {false, std::nullopt};
  }
  ens.collapse_success(true, success);
  std::vector<double> probabilities(ens.width());
  for (std::size_t p = 0; p < ens.width(); ++p) {
    probabilities[p] = std::norm(ens.branches()[p].amplitude_s1);
  }
  return {true, barker_select(probabilities, rng)};
}

/// Success probability and conditional label pmf of one batch.
struct SelectionDistribution {
  double success_probability = 0.0;
  std::vector<double> conditional_pmf;
};

/// Collapsed backend: closed form from the bounded values alone.
inline SelectionDistribution collapsed_selection(std::span<const double> values) {
  SelectionDistribution out;
  double total = 0.0;
  for (double v : values) total += checked_bounded_value(v);
  out.success_probability = total / static_cast<double>(values.size());
  out.conditional_pmf.assign(values.size(), 0.0);
  if (total > 0.0) {
    for (std::size_t p = 0; p < values.size(); ++p) out.conditional_pmf[p] = values[p] / total;
  }
  return out;
}

/// Statevector backend: prepares, rotates and reads the distributions off
/// the amplitudes.
inline SelectionDistribution statevector_selection(std::span<const double> values) {
  auto ens = prepare_uniform_superposition<std::size_t>(values.size() - 1);
  for (std::size_t p = 0; p < values.size(); ++p) {
    ens.branches()[p].payload = p;
    ens.branches()[p].value = checked_bounded_value(values[p]);
    ens.apply_controlled_rotation(p, values[p]);
  }
  return {ens.success_probability(), ens.conditional_selection_pmf()};
}

/// One quantum multiproposal step. An attempt applies the proposal oracle
/// twice (offset, then all labels in superposition), the target oracle and
/// the rotation once each, then measures. A failed measurement starts a new
/// attempt: under RestartPolicy::same_batch the oracles are re-applied to the
/// same offset and proposals, under fresh_batch everything is redrawn.
/// Throws AcceptanceStarvation after `max_restarts` consecutive failures.
template <MultiproposalModel Model>
StepResult<typename Model::state_type> qpmcmc2_step(const Model& model,
                                                    const typename Model::state_type& current,
                                                    std::size_t proposals, std::size_t max_restarts,
                                                    Rng& rng, OracleLedger& ledger, Backend backend,
                                                    RestartPolicy restart = RestartPolicy::same_batch) {
  using Proposal = typename Model::proposal_type;
  if (proposals < 1) throw Error(ErrorCode::invalid_argument, "proposals must be >= 1");
  if (max_restarts < 1) throw Error(ErrorCode::invalid_argument, "max_restarts must be >= 1");
  if (backend == Backend::statevector && !is_power_of_two(proposals + 1)) {
    throw Error(ErrorCode::superposition_width,
                "superposition width: P+1 = " + std::to_string(proposals + 1) +
                    " is not a power of two");
  }

  // The classical randomness feeding the proposal oracle. Redrawn per attempt
  // only under fresh_batch; otherwise every attempt rebuilds the same state,
  // so it is built once and re-measured.
  auto offset = model.draw_offset(current, rng);
  std::vector<Proposal> payloads;
  std::vector<double> values;
  std::optional<BranchEnsemble<Proposal>> prepared;
  double success = 0.0;
  auto build = [&] {
    payloads.clear();
    payloads.push_back(model.anchor(current, offset));
    for (std::size_t p = 0; p < proposals; ++p) payloads.push_back(model.draw_proposal(offset, rng));
    if (backend == Backend::statevector) {
      auto ens = prepare_uniform_superposition<Proposal>(proposals);
      for (std::size_t p = 0; p < payloads.size(); ++p) ens.branches()[p].payload = payloads[p];
      OracleLedger scratch;
      apply_target_oracle_and_rotation(ens, offset, model, scratch);
      prepared = std::move(ens);
    } else {
      values.resize(payloads.size());
      double total = 0.0;
      for (std::size_t p = 0; p < payloads.size(); ++p) {
        values[p] = checked_bounded_value(model.bounded_weight(offset, payloads[p]));
        total += values[p];
      }
      success = total / static_cast<double>(payloads.size());
    }
  };
  build();

  for (std::uint64_t restarts = 0;; ++restarts) {
    if (restarts > 0 && restart == RestartPolicy::fresh_batch) {
      offset = model.draw_offset(current, rng);
      build();
    }
    // offset, superposed proposals, target, rotation
    ledger.qbar_calls += 2;
    ledger.target_calls += 1;
    ledger.rotation_calls += 1;

    if (backend == Backend::statevector) {
      auto ens = *prepared;
      const auto outcome = measure(ens, rng);
      if (outcome.success) {
        ledger.iterations += 1;
        return {model.materialize(offset, payloads[*outcome.label]), *outcome.label, restarts};
      }
    } else if (rng.uniform() < success) {
      const std::size_t label = barker_select(values, rng);
      ledger.iterations += 1;
      return {model.materialize(offset, payloads[label]), label, restarts};
    }

    ledger.restarts += 1;
    if (restarts + 1 >= max_restarts) {
      throw AcceptanceStarvation("acceptance starvation: " + std::to_string(restarts + 1) +
                                     " consecutive failed measurements",
                                 ledger);
    }
  }
}

template <class State, DiscreteTarget<State> Target, TjelmelandKernel<State> Kernel>
State qpmcmc2_step(const State& current, const Target& target, const Kernel& kernel,
                   std::size_t proposals, std::size_t max_restarts, Rng& rng,
                   OracleLedger& ledger, Backend backend,
                   RestartPolicy restart = RestartPolicy::same_batch) {
  const FullStateModel<State, Target, Kernel> model(target, kernel);
  return qpmcmc2_step(model, current, proposals, max_restarts, rng, ledger, backend, restart).state;
}

}  // namespace qpmcmc
