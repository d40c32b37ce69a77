#pragma once

// Network documents: a versioned JSON format for a phylogenetic network and
// its observed traits, plus synthetic tree/network generators.
//
//   {
//     "format_version": "1",
//     "vertex_count": 5,
//     "edges": [[0, 1], [0, 2], ...],
//     "traits": 1,
//     "observed": {"2": [1], "3": [-1], "4": [1]}
//   }
//
// Unknown fields are rejected. Edges are canonicalised to u < v on parse.

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "error.hpp"
#include "phylo/network.hpp"
#include "phylo/trait_state.hpp"
#include "random.hpp"

namespace qpmcmc::io {

using phylo::PhyloNetwork;
using phylo::TraitState;
using phylo::Vertex;

inline constexpr std::string_view kFormatVersion = "1";

struct NetworkDocument {
  std::string format_version{kFormatVersion};
  std::size_t vertex_count = 0;
  std::vector<std::array<Vertex, 2>> edges;
  std::size_t traits = 1;
  std::map<Vertex, std::vector<int>> observed;

  friend bool operator==(const NetworkDocument&, const NetworkDocument&) = default;
};

inline std::string serialize(const NetworkDocument& doc) {
  nlohmann::ordered_json out;
  out["format_version"] = doc.format_version;
  out["vertex_count"] = doc.vertex_count;
  auto edges = nlohmann::ordered_json::array();
  for (const auto& e : doc.edges) edges.push_back({e[0], e[1]});
  out["edges"] = std::move(edges);
  out["traits"] = doc.traits;
  auto observed = nlohmann::ordered_json::object();
  for (const auto& [v, spins] : doc.observed) observed[std::to_string(v)] = spins;
  out["observed"] = std::move(observed);
  return out.dump(2) + "\n";
}

namespace detail {

[[noreturn]] inline void fail(const std::string& where, const std::string& what) {
  throw Error(ErrorCode::parse_error, "network document: " + where + ": " + what);
}

inline std::uint64_t as_count(const nlohmann::json& v, const std::string& where) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer()) fail(where, "must be nonnegative");
  fail(where, "expected an integer");
}

inline std::pair<std::size_t, std::size_t> line_column(std::string_view text, std::size_t byte) {
  std::size_t line = 1, column = 1;
  for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
    if (text[i] == '\n') {
      ++line;
      column = 1;
    } else {
      ++column;
    }
  }
  return {line, column};
}

}  // namespace detail

/// Syntax and schema validation. Graph-level checks (self-loops, duplicate
/// edges, id ranges, spins) are also applied so every malformed document is
/// rejected here with a field path.
inline NetworkDocument parse_document(std::string_view text) {
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    const auto [line, column] = detail::line_column(text, e.byte == 0 ? 0 : e.byte - 1);
    throw Error(ErrorCode::parse_error, "network document: line " + std::to_string(line) + ", column " +
                                            std::to_string(column) + ": malformed JSON");
  }
  if (!root.is_object()) detail::fail("<root>", "expected an object");
  static constexpr std::string_view kFields[] = {"format_version", "vertex_count", "edges", "traits",
                                                 "observed"};
  for (const auto& [key, value] : root.items()) {
    if (std::find(std::begin(kFields), std::end(kFields), key) == std::end(kFields)) {
      detail::fail(key, "unknown field");
    }
  }
  for (std::string_view key : kFields) {
    if (!root.contains(std::string(key))) detail::fail(std::string(key), "missing field");
  }

  NetworkDocument doc;
  const auto& version = root.at("format_version");
  if (!version.is_string()) detail::fail("format_version", "expected a string");
  doc.format_version = version.get<std::string>();
  if (doc.format_version != kFormatVersion) {
    detail::fail("format_version", "unsupported version '" + doc.format_version + "'");
  }

  doc.vertex_count = detail::as_count(root.at("vertex_count"), "vertex_count");
  if (doc.vertex_count == 0) detail::fail("vertex_count", "must be >= 1");
  if (doc.vertex_count > 0xFFFFFFFEull) detail::fail("vertex_count", "too large");

  doc.traits = detail::as_count(root.at("traits"), "traits");
  if (doc.traits == 0) detail::fail("traits", "must be >= 1");

  const auto& edges = root.at("edges");
  if (!edges.is_array()) detail::fail("edges", "expected an array");
  std::set<std::pair<Vertex, Vertex>> seen;
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const std::string where = "edges[" + std::to_string(i) + "]";
    const auto& e = edges[i];
    if (!e.is_array() || e.size() != 2) detail::fail(where, "expected a [u, v] pair");
    const auto a = detail::as_count(e[0], where + "[0]");
    const auto b = detail::as_count(e[1], where + "[1]");
    if (a >= doc.vertex_count || b >= doc.vertex_count) detail::fail(where, "vertex id out of range");
    if (a == b) detail::fail(where, "self-loop on vertex " + std::to_string(a));
    const auto u = static_cast<Vertex>(std::min(a, b));
    const auto v = static_cast<Vertex>(std::max(a, b));
    if (!seen.emplace(u, v).second) {
      detail::fail(where, "duplicate edge (" + std::to_string(u) + ", " + std::to_string(v) + ")");
    }
    doc.edges.push_back({u, v});
  }

  const auto& observed = root.at("observed");
  if (!observed.is_object()) detail::fail("observed", "expected an object");
  for (const auto& [key, spins] : observed.items()) {
    const std::string where = "observed[\"" + key + "\"]";
    if (key.empty() || key.size() > 10 || !std::all_of(key.begin(), key.end(), [](char c) { return c >= '0' && c <= '9'; }) ||
        (key.size() > 1 && key[0] == '0')) {
      detail::fail(where, "key must be a decimal vertex id");
    }
    const auto id = std::stoull(key);
    if (id >= doc.vertex_count) detail::fail(where, "vertex id out of range");
    if (!spins.is_array() || spins.size() != doc.traits) {
      detail::fail(where, "expected an array of " + std::to_string(doc.traits) + " spins");
    }
    std::vector<int> values;
    for (std::size_t t = 0; t < spins.size(); ++t) {
      const auto& s = spins[t];
      if (!s.is_number_integer() || (s.get<long long>() != 1 && s.get<long long>() != -1)) {
        detail::fail(where + "[" + std::to_string(t) + "]", "spin must be -1 or 1");
      }
      values.push_back(static_cast<int>(s.get<long long>()));
    }
    doc.observed.emplace(static_cast<Vertex>(id), std::move(values));
  }
  return doc;
}

struct ParsedNetwork {
  PhyloNetwork network;
  TraitState state;  // observed rows frozen, ancestral rows at (-1)^k
};

inline ParsedNetwork build_network(const NetworkDocument& doc) {
  std::vector<std::pair<Vertex, Vertex>> edges;
  edges.reserve(doc.edges.size());
  for (const auto& e : doc.edges) edges.emplace_back(e[0], e[1]);
  std::vector<Vertex> observed;
  for (const auto& [v, spins] : doc.observed) observed.push_back(v);
  PhyloNetwork net(doc.vertex_count, edges, observed);
  TraitState state = TraitState::for_network(net, doc.traits, doc.observed);
  return {std::move(net), std::move(state)};
}

inline ParsedNetwork parse_network(std::string_view text) { return build_network(parse_document(text)); }

inline NetworkDocument to_document(const PhyloNetwork& net, const TraitState& state) {
  NetworkDocument doc;
  doc.vertex_count = net.vertex_count();
  doc.traits = state.traits();
  for (const auto& e : net.edges()) doc.edges.push_back({e.u, e.v});
  for (Vertex v : net.observed()) {
    std::vector<int> spins;
    for (std::size_t t = 0; t < state.traits(); ++t) spins.push_back(state.spin(v, t));
    doc.observed.emplace(v, std::move(spins));
  }
  return doc;
}

/// Random rooted bifurcating tree with `leaves` observed leaves. Internal
/// vertices are numbered 0 .. leaves-2 in breadth-first order from the root,
/// leaves follow.
inline PhyloNetwork generate_tree(std::size_t leaves, Rng& rng) {
  if (leaves < 2) throw Error(ErrorCode::invalid_argument, "a tree needs at least 2 leaves");
  // Grow by splitting a uniformly chosen leaf.
  std::vector<std::array<std::size_t, 2>> children{{1, 2}, {0, 0}, {0, 0}};
  std::vector<std::size_t> open_leaves{1, 2};
  while (open_leaves.size() < leaves) {
    const std::size_t pick = rng.below(open_leaves.size());
    const std::size_t node = open_leaves[pick];
    const std::size_t a = children.size();
    children.push_back({0, 0});
    children.push_back({0, 0});
    children[node] = {a, a + 1};
    open_leaves[pick] = a;
    open_leaves.push_back(a + 1);
  }

  std::vector<std::size_t> order;
  std::deque<std::size_t> queue{0};
  while (!queue.empty()) {
    const std::size_t n = queue.front();
    queue.pop_front();
    order.push_back(n);
    if (children[n][0] != 0) {
      queue.push_back(children[n][0]);
      queue.push_back(children[n][1]);
    }
  }
  std::vector<Vertex> label(children.size());
  Vertex next_internal = 0;
  auto next_leaf = static_cast<Vertex>(leaves - 1);
  for (std::size_t n : order) label[n] = children[n][0] != 0 ? next_internal++ : next_leaf++;

  std::vector<std::pair<Vertex, Vertex>> edges;
  for (std::size_t n : order) {
    if (children[n][0] == 0) continue;
    for (std::size_t c : children[n]) edges.emplace_back(label[n], label[c]);
  }
  std::vector<Vertex> observed;
  for (std::size_t i = leaves - 1; i < 2 * leaves - 1; ++i) observed.push_back(static_cast<Vertex>(i));
  return PhyloNetwork(2 * leaves - 1, edges, observed);
}

/// Adds k reticulation edges, each joining two non-adjacent ancestral
/// vertices chosen uniformly. When no such pair is left, pairs with one
/// ancestral and one observed endpoint are used instead.
inline PhyloNetwork add_reticulations(const PhyloNetwork& net, std::size_t k, Rng& rng) {
  if (k == 0) return net;
  if (!net.uniform_coupling()) {
    throw Error(ErrorCode::invalid_argument, "reticulations cannot be added to per-edge couplings");
  }
  std::vector<std::pair<Vertex, Vertex>> edges;
  std::set<std::pair<Vertex, Vertex>> present;
  for (const auto& e : net.edges()) {
    edges.emplace_back(e.u, e.v);
    present.emplace(e.u, e.v);
  }
  const auto& ancestral = net.ancestral();
  const auto& observed = net.observed();

  auto eligible = [&](Vertex a, Vertex b) {
    return a != b && !present.count({std::min(a, b), std::max(a, b)});
  };
  // Uniform over the eligible pairs of one class: rejection first, then an
  // exhaustive listing once rejection keeps failing.
  auto draw_pair = [&](const std::vector<Vertex>& left, const std::vector<Vertex>& right,
                       bool same_set) -> std::optional<std::pair<Vertex, Vertex>> {
    if (left.empty() || right.empty()) return std::nullopt;
    for (int attempt = 0; attempt < 256; ++attempt) {
      const Vertex a = left[rng.below(left.size())];
      const Vertex b = right[rng.below(right.size())];
      if (eligible(a, b)) return std::pair{std::min(a, b), std::max(a, b)};
    }
    std::vector<std::pair<Vertex, Vertex>> pairs;
    for (std::size_t i = 0; i < left.size(); ++i) {
      for (std::size_t j = same_set ? i + 1 : 0; j < right.size(); ++j) {
        if (eligible(left[i], right[j])) {
          pairs.emplace_back(std::min(left[i], right[j]), std::max(left[i], right[j]));
        }
      }
    }
    if (pairs.empty()) return std::nullopt;
    return pairs[rng.below(pairs.size())];
  };

  for (std::size_t added = 0; added < k; ++added) {
    auto pair = draw_pair(ancestral, ancestral, true);
    if (!pair) pair = draw_pair(ancestral, observed, false);
    if (!pair) {
      throw Error(ErrorCode::no_eligible_pair, "no eligible vertex pair left for reticulation " +
                                                   std::to_string(added + 1) + " of " + std::to_string(k));
    }
    edges.push_back(*pair);
    present.insert(*pair);
  }
  return PhyloNetwork(net.vertex_count(), edges, observed, net.couplings());
}

/// Independent uniform ±1 spins for every observed vertex and trait.
inline std::map<Vertex, std::vector<int>> random_observations(const PhyloNetwork& net, std::size_t traits,
                                                              Rng& rng) {
  std::map<Vertex, std::vector<int>> out;
  for (Vertex v : net.observed()) {
    std::vector<int> spins(traits);
    for (auto& s : spins) s = rng.below(2) == 0 ? -1 : 1;
    out.emplace(v, std::move(spins));
  }
  return out;
}

}  // namespace qpmcmc::io
