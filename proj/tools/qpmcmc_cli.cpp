// qpmcmc: generate networks, run samplers, diagnose traces.
//
// Every failure prints one line "error:<code>: <message>" on stderr and exits
// nonzero (2 for usage errors, 1 otherwise).

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qpmcmc/qpmcmc.hpp"

namespace {

using namespace qpmcmc;

constexpr int kUsageExit = 2;
constexpr int kFailureExit = 1;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io_error, "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::io_error, "cannot write " + path);
  out << text;
}

struct GenerateArgs {
  std::size_t leaves = 0;
  std::size_t reticulations = 0;
  std::size_t traits = 1;
  std::uint64_t seed = 1;
  std::string out;
};

int cmd_generate(const GenerateArgs& a) {
  Rng rng(a.seed, 0);
  auto net = io::generate_tree(a.leaves, rng);
  net = io::add_reticulations(net, a.reticulations, rng);
  const auto observed = io::random_observations(net, a.traits, rng);
  const auto state = phylo::TraitState::for_network(net, a.traits, observed);
  write_file(a.out, io::serialize(io::to_document(net, state)));
  return 0;
}

struct SampleArgs {
  std::string network;
  std::string algorithm = "pmcmc";
  std::size_t proposals = 7;
  std::size_t iterations = 1000;
  double coupling = 0.5;
  std::size_t traits = 0;
  std::uint64_t seed = 1;
  std::size_t thin = 1;
  std::size_t chains = 1;
  std::size_t max_restarts = 10'000;
  bool record_states = false;
  std::string restart = "same-batch";
  std::string out;
};

const std::map<std::string, Algorithm> kAlgorithms{
    {"barker", Algorithm::barker},
    {"pmcmc", Algorithm::pmcmc},
    {"qpmcmc2", Algorithm::qpmcmc2_collapsed},
    {"qpmcmc2-sv", Algorithm::qpmcmc2_statevector},
};

int cmd_sample(const SampleArgs& a) {
  const auto parsed = io::parse_network(read_file(a.network));
  if (a.traits != 0 && a.traits != parsed.state.traits()) {
    throw Error(ErrorCode::invalid_argument, "--traits " + std::to_string(a.traits) +
                                                 " does not match the network's " +
                                                 std::to_string(parsed.state.traits()) + " traits");
  }
  SampleOptions options;
  options.chain.algorithm = kAlgorithms.at(a.algorithm);
  options.chain.proposals = a.proposals;
  options.chain.iterations = a.iterations;
  options.chain.seed = a.seed;
  options.chain.thinning = a.thin;
  options.chain.max_restarts = a.max_restarts;
  options.chain.restart = a.restart == "fresh-batch" ? RestartPolicy::fresh_batch : RestartPolicy::same_batch;
  options.coupling = a.coupling;
  options.chains = a.chains;
  options.record_states = a.record_states;
  options.out_dir = a.out;

  const auto outcomes = run_sample(parsed.network, parsed.state, options);
  int status = 0;
  for (std::size_t c = 0; c < outcomes.size(); ++c) {
    if (outcomes[c].error) {
      std::cerr << "error:" << to_string(outcomes[c].error->code()) << ": chain " << c << ": "
                << outcomes[c].error->what() << "\n";
      status = kFailureExit;
    }
  }
  return status;
}

struct DiagnoseArgs {
  std::vector<std::string> traces;
  std::vector<std::string> ledgers;
  std::vector<std::string> labels;
  std::string network;
  std::size_t burn_in = 0;
  std::string out;
  std::string svg;
  std::string title = "log posterior trace";
};

int cmd_diagnose(const DiagnoseArgs& a) {
  if (a.traces.size() != a.ledgers.size()) {
    throw Error(ErrorCode::mismatched_inputs, "each --trace needs a matching --ledger");
  }
  if (!a.labels.empty() && a.labels.size() != a.traces.size()) {
    throw Error(ErrorCode::mismatched_inputs, "give one --label per trace or none");
  }
  std::optional<io::ParsedNetwork> network;
  if (!a.network.empty()) network = io::parse_network(read_file(a.network));

  nlohmann::ordered_json report;
  report["burn_in"] = a.burn_in;
  report["traces"] = nlohmann::ordered_json::array();
  std::vector<svg::Series> series;

  for (std::size_t i = 0; i < a.traces.size(); ++i) {
    std::ifstream in(a.traces[i], std::ios::binary);
    if (!in) throw Error(ErrorCode::io_error, "cannot read " + a.traces[i]);
    const auto trace = io::read_trace(in);
    const auto ledger = ledger_from_json(nlohmann::json::parse(read_file(a.ledgers[i])));
    io::check_trace_ledger_pair(trace, ledger);
    const std::string label = a.labels.empty() ? a.traces[i] : a.labels[i];

    std::vector<double> kept;
    std::vector<phylo::TraitState> states;
    for (std::size_t r = 0; r < trace.rows.size(); ++r) {
      if (trace.rows[r].iteration <= a.burn_in) continue;
      kept.push_back(trace.rows[r].log_posterior);
      if (network && trace.has_states) {
        states.push_back(io::unpack_ancestral_hex(network->network, network->state, trace.states[r]));
      }
    }
    if (kept.empty()) throw Error(ErrorCode::invalid_argument, "burn-in discards every row of " + a.traces[i]);

    // Oracle calls are pro-rated to the iterations after burn-in.
    OracleLedger effective = ledger;
    if (a.burn_in > 0 && ledger.iterations > 0) {
      const double keep = static_cast<double>(ledger.iterations - std::min<std::size_t>(a.burn_in, ledger.iterations)) /
                          static_cast<double>(ledger.iterations);
      effective.qbar_calls = static_cast<std::uint64_t>(std::llround(ledger.qbar_calls * keep));
      effective.target_calls = static_cast<std::uint64_t>(std::llround(ledger.target_calls * keep));
    }

    nlohmann::ordered_json entry;
    entry["label"] = label;
    entry["trace"] = a.traces[i];
    entry["ledger"] = to_json(ledger);
    entry["ess_report"] = diagnostics::to_json(diagnostics::with_oracles(diagnostics::ess(kept), effective));
    entry["acceptance_rate"] = ledger.acceptance_rate();
    if (network) {
      if (!trace.has_states) {
        throw Error(ErrorCode::mismatched_inputs, a.traces[i] + " has no state column (sample with --record-states)");
      }
      auto modes = nlohmann::ordered_json::array();
      for (const auto& m : diagnostics::posterior_mode(states, network->network)) {
        modes.push_back({{"vertex", m.vertex}, {"trait", m.trait}, {"spin", m.spin}, {"tie", m.tie}});
      }
      entry["posterior_mode"] = std::move(modes);
    }
    report["traces"].push_back(std::move(entry));

    svg::Series s;
    s.label = label;
    for (const auto& row : trace.rows) {
      s.x.push_back(static_cast<double>(row.iteration));
      s.y.push_back(row.log_posterior);
    }
    series.push_back(std::move(s));
  }

  const std::string json = report.dump(2) + "\n";
  if (a.out.empty()) {
    std::cout << json;
  } else {
    write_file(a.out, json);
  }
  if (!a.svg.empty()) write_file(a.svg, svg::render_traces(series, a.title));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Barker, multiproposal and simulated quantum multiproposal MCMC for Ising trait models "
               "on phylogenetic networks"};
  app.require_subcommand(1);
  app.option_defaults()->always_capture_default();
  app.footer("Options marked [env:...] fall back to that environment variable when the flag is absent.");

  GenerateArgs gen;
  auto* generate = app.add_subcommand("generate", "Write a random tree or network document");
  generate->add_option("--leaves", gen.leaves, "Observed leaves M_o (>= 2)")->required()->check(CLI::Range(std::size_t{2}, std::size_t{1} << 30));
  generate->add_option("--reticulations", gen.reticulations, "Extra edges added to the tree")->envname("QPMCMC_RETICULATIONS");
  generate->add_option("--traits", gen.traits, "Traits per vertex")->check(CLI::PositiveNumber)->envname("QPMCMC_TRAITS");
  generate->add_option("--seed", gen.seed, "Random seed")->envname("QPMCMC_SEED");
  generate->add_option("--out", gen.out, "Output network document")->required();

  SampleArgs smp;
  auto* sample = app.add_subcommand("sample", "Run chains and write trace CSV and ledger JSON per chain");
  sample->add_option("--network", smp.network, "Network document")->required()->check(CLI::ExistingFile);
  sample->add_option("--algorithm", smp.algorithm, "barker | pmcmc | qpmcmc2 | qpmcmc2-sv")
      ->check(CLI::IsMember({"barker", "pmcmc", "qpmcmc2", "qpmcmc2-sv"}))
      ->envname("QPMCMC_ALGORITHM");
  sample->add_option("--proposals", smp.proposals, "Proposals per iteration P")->check(CLI::PositiveNumber)->envname("QPMCMC_PROPOSALS");
  sample->add_option("--iterations", smp.iterations, "Iterations S")->check(CLI::PositiveNumber)->envname("QPMCMC_ITERATIONS");
  sample->add_option("--coupling", smp.coupling, "Uniform edge coupling J")->envname("QPMCMC_COUPLING");
  sample->add_option("--traits", smp.traits, "Expected trait count (0: take it from the network)")->envname("QPMCMC_TRAITS");
  sample->add_option("--seed", smp.seed, "Random seed")->envname("QPMCMC_SEED");
  sample->add_option("--thin", smp.thin, "Record every k-th iteration")->check(CLI::PositiveNumber)->envname("QPMCMC_THIN");
  sample->add_option("--chains", smp.chains, "Independent chains run concurrently")->check(CLI::PositiveNumber)->envname("QPMCMC_CHAINS");
  sample->add_option("--max-restarts", smp.max_restarts, "Failed measurements tolerated per iteration")->check(CLI::PositiveNumber)->envname("QPMCMC_MAX_RESTARTS");
  sample->add_option("--restart", smp.restart,
                     "After a failed measurement, re-measure the same proposals or draw a fresh batch")
      ->check(CLI::IsMember({"same-batch", "fresh-batch"}))
      ->envname("QPMCMC_RESTART");
  sample->add_flag("--record-states", smp.record_states, "Add a hex-packed ancestral state column");
  sample->add_option("--out", smp.out, "Output directory")->required();

  DiagnoseArgs dia;
  auto* diagnose = app.add_subcommand("diagnose", "ESS, ESS per 10k oracle calls, posterior modes and an SVG trace plot");
  diagnose->add_option("--trace", dia.traces, "Trace CSV (repeatable)")->required()->check(CLI::ExistingFile);
  diagnose->add_option("--ledger", dia.ledgers, "Ledger JSON, one per trace in the same order")->required()->check(CLI::ExistingFile);
  diagnose->add_option("--label", dia.labels, "Legend label per trace");
  diagnose->add_option("--network", dia.network, "Network document; enables posterior modes")->check(CLI::ExistingFile);
  diagnose->add_option("--burn-in", dia.burn_in, "Iterations discarded before ESS and modes")->envname("QPMCMC_BURN_IN");
  diagnose->add_option("--out", dia.out, "Report JSON path (default: stdout)");
  diagnose->add_option("--svg", dia.svg, "SVG trace plot path");
  diagnose->add_option("--title", dia.title, "Plot title");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::string message = e.what();
    for (auto& c : message) c = c == '\n' ? ' ' : c;
    std::cerr << "error:usage: " << message << "\n";
    return kUsageExit;
  }

  try {
    if (generate->parsed()) return cmd_generate(gen);
    if (sample->parsed()) return cmd_sample(smp);
    if (diagnose->parsed()) return cmd_diagnose(dia);
  } catch (const Error& e) {
    std::cerr << "error:" << to_string(e.code()) << ": " << e.what() << "\n";
    return e.code() == ErrorCode::invalid_argument ? kUsageExit : kFailureExit;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error:parse_error: " << e.what() << "\n";
    return kFailureExit;
  } catch (const std::exception& e) {
    std::cerr << "error:internal: " << e.what() << "\n";
    return kFailureExit;
  }
  return kFailureExit;
}
