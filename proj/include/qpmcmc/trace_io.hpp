#pragma once

// Trace CSV: iteration,log_posterior,selected_index,restarts[,state]
//
// `restarts` is the number of failed attempts in that iteration. The optional
// `state` column packs the ancestral slots (k-th ancestral vertex, trait t) at
// bit k*T + t, least significant bit first within each byte, +1 ↔ 1, written
// as lower-case hex with byte 0 first.

#include <cinttypes>
#include <cstdio>
#include <istream>
#include <sstream>
#include <string>
#include <vector>

#include "chain.hpp"
#include "error.hpp"
#include "phylo/network.hpp"
#include "phylo/trait_state.hpp"

namespace qpmcmc::io {

inline std::string pack_ancestral_hex(const phylo::PhyloNetwork& net, const phylo::TraitState& s) {
  const std::size_t T = s.traits();
  const std::size_t bits = net.ancestral().size() * T;
  std::vector<std::uint8_t> bytes((bits + 7) / 8, 0);
  for (std::size_t k = 0; k < net.ancestral().size(); ++k) {
    for (std::size_t t = 0; t < T; ++t) {
      if (s.spin(net.ancestral()[k], t) == 1) {
        const std::size_t bit = k * T + t;
        bytes[bit / 8] |= static_cast<std::uint8_t>(1u << (bit % 8));
      }
    }
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (auto b : bytes) {
    out.push_back(kHex[b >> 4]);
    out.push_back(kHex[b & 0xF]);
  }
  return out;
}

inline phylo::TraitState unpack_ancestral_hex(const phylo::PhyloNetwork& net, const phylo::TraitState& base,
                                              const std::string& hex) {
  const std::size_t T = base.traits();
  const std::size_t bits = net.ancestral().size() * T;
  if (hex.size() != 2 * ((bits + 7) / 8)) {
    throw Error(ErrorCode::mismatched_inputs, "state column width does not match the network");
  }
  auto nibble = [](char c) -> unsigned {
    if (c >= '0' && c <= '9') return static_cast<unsigned>(c - '0');
    if (c >= 'a' && c <= 'f') return static_cast<unsigned>(c - 'a' + 10);
    throw Error(ErrorCode::parse_error, "state column: invalid hex digit");
  };
  phylo::TraitState s = base;
  for (std::size_t k = 0; k < net.ancestral().size(); ++k) {
    for (std::size_t t = 0; t < T; ++t) {
      const std::size_t bit = k * T + t;
      const unsigned byte = nibble(hex[2 * (bit / 8)]) << 4 | nibble(hex[2 * (bit / 8) + 1]);
      s.set_spin(net.ancestral()[k], t, (byte >> (bit % 8)) & 1u ? 1 : -1);
    }
  }
  return s;
}

inline std::string trace_header(bool with_states) {
  return with_states ? "iteration,log_posterior,selected_index,restarts,state\n"
                     : "iteration,log_posterior,selected_index,restarts\n";
}

inline std::string trace_line(const TraceRow& row, const std::string* state_hex = nullptr) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "%zu,%.17g,%zu,%" PRIu64, row.iteration, row.log_posterior,
                row.selected_index, row.restarts);
  std::string line(buf);
  if (state_hex) {
    line.push_back(',');
    line += *state_hex;
  }
  line.push_back('\n');
  return line;
}

struct TraceFile {
  std::vector<TraceRow> rows;
  std::vector<std::string> states;  // empty unless the state column is present
  bool has_states = false;

  std::vector<double> log_posterior() const {
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(r.log_posterior);
    return out;
  }
};

inline TraceFile read_trace(std::istream& in) {
  TraceFile trace;
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::parse_error, "trace: empty file");
  if (line + "\n" == trace_header(true)) {
    trace.has_states = true;
  } else if (line + "\n" != trace_header(false)) {
    throw Error(ErrorCode::parse_error, "trace: unexpected header '" + line + "'");
  }
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    const std::size_t expected = trace.has_states ? 5 : 4;
    if (fields.size() != expected) {
      throw Error(ErrorCode::parse_error, "trace: line " + std::to_string(line_no) + ": expected " +
                                              std::to_string(expected) + " columns");
    }
    try {
      std::size_t used = 0;
      TraceRow row;
      row.iteration = std::stoull(fields[0], &used);
      if (used != fields[0].size()) throw std::invalid_argument("iteration");
      row.log_posterior = std::stod(fields[1], &used);
      if (used != fields[1].size()) throw std::invalid_argument("log_posterior");
      row.selected_index = std::stoull(fields[2], &used);
      if (used != fields[2].size()) throw std::invalid_argument("selected_index");
      row.restarts = std::stoull(fields[3], &used);
      if (used != fields[3].size()) throw std::invalid_argument("restarts");
      if (!trace.rows.empty() && row.iteration <= trace.rows.back().iteration) {
        throw Error(ErrorCode::parse_error,
                    "trace: line " + std::to_string(line_no) + ": iterations must increase");
      }
      trace.rows.push_back(row);
    } catch (const std::logic_error&) {
      throw Error(ErrorCode::parse_error, "trace: line " + std::to_string(line_no) + ": malformed number");
    }
    if (trace.has_states) trace.states.push_back(fields[4]);
  }
  return trace;
}

/// A trace and a ledger belong together when the ledger's iteration count is
/// at or past the last recorded row and short of the next row that would
/// have been recorded.
inline void check_trace_ledger_pair(const TraceFile& trace, const OracleLedger& ledger) {
  if (trace.rows.empty()) throw Error(ErrorCode::mismatched_inputs, "trace has no rows");
  const std::size_t last = trace.rows.back().iteration;
  const std::size_t stride =
      trace.rows.size() > 1 ? trace.rows[1].iteration - trace.rows[0].iteration : trace.rows[0].iteration;
  if (ledger.iterations < last || ledger.iterations - last >= stride) {
    throw Error(ErrorCode::mismatched_inputs,
                "trace/ledger mismatch: trace ends at iteration " + std::to_string(last) +
                    " but ledger records " + std::to_string(ledger.iterations) + " iterations");
  }
  std::uint64_t recorded_restarts = 0;
  for (const auto& r : trace.rows) recorded_restarts += r.restarts;
  if (recorded_restarts > ledger.restarts) {
    throw Error(ErrorCode::mismatched_inputs, "trace/ledger mismatch: trace records more restarts than the ledger");
  }
}

}  // namespace qpmcmc::io
