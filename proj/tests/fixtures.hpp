#pragma once

#include <cmath>
#include <map>
#include <utility>
#include <vector>

#include "qpmcmc/qpmcmc.hpp"

namespace fixtures {

using qpmcmc::phylo::PhyloNetwork;
using qpmcmc::phylo::TraitState;
using qpmcmc::phylo::Vertex;

struct Instance {
  PhyloNetwork net;
  TraitState state;
};

inline Instance make(std::size_t n, std::vector<std::pair<Vertex, Vertex>> edges,
                     std::map<Vertex, std::vector<int>> observed, std::size_t traits, double J) {
  std::vector<Vertex> obs;
  for (const auto& [v, _] : observed) obs.push_back(v);
  PhyloNetwork net(n, edges, obs, qpmcmc::phylo::UniformCoupling{J});
  auto state = TraitState::for_network(net, traits, observed);
  return {std::move(net), std::move(state)};
}

// Three leaves (2, 3, 4) under two internal vertices.
inline Instance five_node_tree(double J, std::size_t traits = 1) {
  std::map<Vertex, std::vector<int>> obs;
  for (Vertex v : {2u, 3u, 4u}) obs[v] = std::vector<int>(traits, 1);
  return make(5, {{0, 1}, {0, 2}, {1, 3}, {1, 4}}, obs, traits, J);
}

// Five leaves, four ancestral vertices, one reticulation (0, 3).
inline Instance reticulated(double J) {
  return make(9, {{0, 1}, {0, 2}, {1, 3}, {1, 4}, {2, 5}, {2, 6}, {3, 7}, {3, 8}, {0, 3}},
              {{4, {1}}, {5, {-1}}, {6, {1}}, {7, {1}}, {8, {-1}}}, 1, J);
}

// Two ancestral vertices joined by an edge, each with one observed leaf.
inline Instance two_ancestral(double J, std::size_t traits = 1) {
  return make(4, {{0, 1}, {0, 2}, {1, 3}}, {{2, std::vector<int>(traits, 1)}, {3, std::vector<int>(traits, -1)}},
              traits, J);
}

inline double total_variation(const std::vector<double>& a, const std::vector<double>& b) {
  double tv = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) tv += std::abs(a[i] - b[i]);
  return 0.5 * tv;
}

// Empirical frequencies of ancestral codes over a chain.
template <class Step>
std::vector<double> occupancy(const PhyloNetwork& net, TraitState state, std::size_t iterations, Step&& step) {
  std::vector<double> counts(std::size_t{1} << qpmcmc::phylo::flip_slots(net, state.traits()), 0.0);
  for (std::size_t i = 0; i < iterations; ++i) {
    state = step(state);
    counts[qpmcmc::phylo::ancestral_code(net, state)] += 1.0;
  }
  for (double& c : counts) c /= static_cast<double>(iterations);
  return counts;
}

}  // namespace fixtures
