#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "error.hpp"

namespace qpmcmc {

/// Oracle-cost counters for one chain.
///
/// One application of an oracle counts once whether it acts on a single
/// classical state or on a whole superposition. `restarts` counts failed
/// measurement attempts; `iterations` counts completed chain steps.
struct OracleLedger {
  std::uint64_t qbar_calls = 0;
  std::uint64_t target_calls = 0;
  std::uint64_t rotation_calls = 0;
  std::uint64_t restarts = 0;
  std::uint64_t iterations = 0;

  /// Oracle total used for efficiency figures (proposal + target oracles).
  std::uint64_t oracle_calls() const noexcept { return qbar_calls + target_calls; }

  /// Successful attempts over total attempts.
  double acceptance_rate() const noexcept {
    const std::uint64_t attempts = iterations + restarts;
    return attempts == 0 ? 0.0 : static_cast<double>(iterations) / static_cast<double>(attempts);
  }

  OracleLedger& operator+=(const OracleLedger& other) noexcept {
    qbar_calls += other.qbar_calls;
    target_calls += other.target_calls;
    rotation_calls += other.rotation_calls;
    restarts += other.restarts;
    iterations += other.iterations;
    return *this;
  }

  friend bool operator==(const OracleLedger&, const OracleLedger&) = default;
};

inline nlohmann::ordered_json to_json(const OracleLedger& ledger) {
  nlohmann::ordered_json doc;
  doc["qbar_calls"] = ledger.qbar_calls;
  doc["target_calls"] = ledger.target_calls;
  doc["rotation_calls"] = ledger.rotation_calls;
  doc["restarts"] = ledger.restarts;
  doc["iterations"] = ledger.iterations;
  return doc;
}

inline OracleLedger ledger_from_json(const nlohmann::json& doc) {
  static constexpr const char* kFields[] = {"qbar_calls", "target_calls", "rotation_calls",
                                            "restarts", "iterations"};
  if (!doc.is_object()) throw Error(ErrorCode::parse_error, "ledger: expected a JSON object");
  for (const auto& [key, value] : doc.items()) {
    bool known = false;
    for (const char* field : kFields) known = known || key == field;
    if (!known) throw Error(ErrorCode::parse_error, "ledger: unknown field '" + key + "'");
  }
  auto field = [&](const char* name) -> std::uint64_t {
    if (!doc.contains(name)) {
      throw Error(ErrorCode::parse_error, std::string("ledger: missing field '") + name + "'");
    }
    const auto& v = doc.at(name);
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
      throw Error(ErrorCode::parse_error,
                  std::string("ledger: field '") + name + "' must be a nonnegative integer");
    }
    return v.get<std::uint64_t>();
  };
  OracleLedger ledger;
  ledger.qbar_calls = field("qbar_calls");
  ledger.target_calls = field("target_calls");
  ledger.rotation_calls = field("rotation_calls");
  ledger.restarts = field("restarts");
  ledger.iterations = field("iterations");
  return ledger;
}

}  // namespace qpmcmc
