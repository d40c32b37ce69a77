#pragma once

// Runs sampling chains on a network and writes per-chain trace and ledger
// files. Chains run concurrently, one thread each; chain c draws from the
// random stream (seed, c), so its output does not depend on how many other
// chains run alongside it.

#include <cstddef>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "chain.hpp"
#include "error.hpp"
#include "ledger.hpp"
#include "phylo/ising.hpp"
#include "trace_io.hpp"

namespace qpmcmc {

struct SampleOptions {
  ChainConfig chain;
  double coupling = 0.5;
  std::size_t chains = 1;
  bool record_states = false;
  std::filesystem::path out_dir = ".";
};

struct ChainOutcome {
  OracleLedger ledger;
  std::optional<Error> error;  // set when the chain stopped early
};

inline std::filesystem::path trace_path(const std::filesystem::path& dir, std::size_t chain) {
  return dir / ("trace_chain" + std::to_string(chain) + ".csv");
}

inline std::filesystem::path ledger_path(const std::filesystem::path& dir, std::size_t chain) {
  return dir / ("ledger_chain" + std::to_string(chain) + ".json");
}

inline void write_ledger(const std::filesystem::path& path, const OracleLedger& ledger) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::io_error, "cannot write " + path.string());
  out << to_json(ledger).dump(2) << "\n";
}

/// Runs one chain and streams its trace to disk. The trace is flushed and
/// the ledger written even when the chain fails.
inline ChainOutcome run_chain_to_files(const phylo::IsingModel& model, const phylo::TraitState& initial,
                                       const SampleOptions& options, std::size_t chain_id) {
  ChainOutcome outcome;
  const auto tpath = trace_path(options.out_dir, chain_id);
  std::ofstream trace(tpath, std::ios::binary);
  if (!trace) throw Error(ErrorCode::io_error, "cannot write " + tpath.string());
  trace << io::trace_header(options.record_states);
  try {
    run_chain(model, initial, options.chain, chain_id, outcome.ledger,
              [&](const TraceRow& row, const phylo::TraitState& state) {
                if (options.record_states) {
                  const std::string hex = io::pack_ancestral_hex(model.network(), state);
                  trace << io::trace_line(row, &hex);
                } else {
                  trace << io::trace_line(row);
                }
              });
  } catch (const Error& e) {
    outcome.error = e;
  }
  trace.flush();
  write_ledger(ledger_path(options.out_dir, chain_id), outcome.ledger);
  return outcome;
}

/// Samples `options.chains` chains concurrently. Returns one outcome per chain.
inline std::vector<ChainOutcome> run_sample(const phylo::PhyloNetwork& network, const phylo::TraitState& initial,
                                            const SampleOptions& options) {
  options.chain.validate();
  if (options.chains < 1) throw Error(ErrorCode::invalid_argument, "chains must be >= 1");
  const bool quantum = options.chain.algorithm == Algorithm::qpmcmc2_collapsed ||
                       options.chain.algorithm == Algorithm::qpmcmc2_statevector;
  if (quantum && options.coupling < 0.0) {
    throw Error(ErrorCode::antiferromagnetic_coupling,
                "antiferromagnetic coupling unsupported on quantum backends");
  }
  std::filesystem::create_directories(options.out_dir);

  const phylo::PhyloNetwork net = network.with_coupling(options.coupling);
  const phylo::IsingModel model(net, initial.traits());

  std::vector<ChainOutcome> outcomes(options.chains);
  std::vector<std::exception_ptr> failures(options.chains);
  std::vector<std::thread> workers;
  workers.reserve(options.chains);
  for (std::size_t c = 0; c < options.chains; ++c) {
    workers.emplace_back([&, c] {
      try {
        outcomes[c] = run_chain_to_files(model, initial, options, c);
      } catch (...) {
        failures[c] = std::current_exception();
      }
    });
  }
  for (auto& w : workers) w.join();
  for (const auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }
  return outcomes;
}

}  // namespace qpmcmc
