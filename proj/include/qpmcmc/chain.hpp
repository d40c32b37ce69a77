#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "ledger.hpp"
#include "mcmc.hpp"
#include "quantum.hpp"
#include "random.hpp"

namespace qpmcmc {

/// One recorded (post-thinning) iteration.
struct TraceRow {
  std::size_t iteration = 0;  // 1-based
  double log_posterior = 0.0;
  std::size_t selected_index = 0;
  std::uint64_t restarts = 0;
};

template <class State>
struct ChainTrace {
  std::vector<State> states;
  std::vector<TraceRow> rows;
  OracleLedger ledger;

  std::vector<double> log_posterior() const {
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(r.log_posterior);
    return out;
  }
};

/// One step of the configured algorithm.
template <MultiproposalModel Model>
StepResult<typename Model::state_type> chain_step(const Model& model,
                                                  const typename Model::state_type& current,
                                                  const ChainConfig& config, Rng& rng,
                                                  OracleLedger& ledger) {
  switch (config.algorithm) {
    case Algorithm::barker: return barker_step(model, current, rng, ledger);
    case Algorithm::pmcmc: return pmcmc_step(model, current, config.proposals, rng, ledger);
    case Algorithm::qpmcmc2_collapsed:
      return qpmcmc2_step(model, current, config.proposals, config.max_restarts, rng, ledger,
                          Backend::collapsed, config.restart);
    case Algorithm::qpmcmc2_statevector:
      return qpmcmc2_step(model, current, config.proposals, config.max_restarts, rng, ledger,
                          Backend::statevector, config.restart);
  }
  throw Error(ErrorCode::invalid_argument, "unknown algorithm");
}

/// Runs `config.iterations` steps on the stream (config.seed, chain_id).
/// `sink(row, state)` is called for every `config.thinning`-th iteration as
/// it completes, so a consumer that writes through keeps everything recorded
/// before a failure. `ledger` is updated in place for the same reason.
template <MultiproposalModel Model, class Sink>
void run_chain(const Model& model, typename Model::state_type initial, const ChainConfig& config,
               std::uint64_t chain_id, OracleLedger& ledger, Sink&& sink) {
  config.validate();
  Rng rng(config.seed, chain_id);
  auto current = std::move(initial);
  for (std::size_t it = 1; it <= config.iterations; ++it) {
    auto step = chain_step(model, current, config, rng, ledger);
    current = std::move(step.state);
    if (it % config.thinning == 0) {
      sink(TraceRow{it, static_cast<double>(model.log_mass(current)), step.selected, step.restarts},
           current);
    }
  }
}

/// In-memory convenience wrapper around run_chain.
template <MultiproposalModel Model>
ChainTrace<typename Model::state_type> run_chain(const Model& model,
                                                 typename Model::state_type initial,
                                                 const ChainConfig& config,
                                                 std::uint64_t chain_id = 0,
                                                 bool keep_states = true) {
  ChainTrace<typename Model::state_type> trace;
  trace.rows.reserve(config.iterations / config.thinning);
  run_chain(model, std::move(initial), config, chain_id, trace.ledger,
            [&](const TraceRow& row, const typename Model::state_type& state) {
              trace.rows.push_back(row);
              if (keep_states) trace.states.push_back(state);
            });
  return trace;
}

}  // namespace qpmcmc
