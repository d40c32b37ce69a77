#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "../error.hpp"
#include "network.hpp"

namespace qpmcmc::phylo {

/// Spins σ_{v,t} ∈ {-1,+1} for every vertex and trait, one bit per slot
/// (+1 ↔ 1). Each vertex row starts on a word boundary. Rows of observed
/// vertices are frozen: flipping or setting them throws.
class TraitState {
 public:
  TraitState() = default;

  /// All spins +1, with rows marked in `frozen` made immutable.
  TraitState(std::size_t vertex_count, std::size_t traits, std::vector<std::uint8_t> frozen)
      : vertex_count_(vertex_count),
        traits_(traits),
        words_per_row_((traits + 63) / 64),
        frozen_(std::make_shared<const std::vector<std::uint8_t>>(std::move(frozen))) {
    if (traits == 0) throw Error(ErrorCode::invalid_argument, "trait count must be >= 1");
    if (frozen_->size() != vertex_count) {
      throw Error(ErrorCode::invalid_argument, "frozen mask must cover every vertex");
    }
    words_.assign(vertex_count * words_per_row_, 0);
    for (std::size_t v = 0; v < vertex_count; ++v) {
      for (std::size_t t = 0; t < traits; ++t) words_[v * words_per_row_ + t / 64] |= std::uint64_t{1} << (t % 64);
    }
  }

  /// Observed rows taken from `observed_spins` and frozen; ancestral slot
  /// (vertex v, trait t) initialised to (-1)^k, k being v's position among the
  /// ancestral vertices.
  static TraitState for_network(const PhyloNetwork& net, std::size_t traits,
                                const std::map<Vertex, std::vector<int>>& observed_spins) {
    TraitState s(net.vertex_count(), traits, net.observed_mask());
    for (Vertex v : net.observed()) {
      const auto it = observed_spins.find(v);
      if (it == observed_spins.end()) {
        throw Error(ErrorCode::invalid_network, "observed vertex " + std::to_string(v) + " has no spins");
      }
      if (it->second.size() != traits) {
        throw Error(ErrorCode::invalid_network,
                    "observed vertex " + std::to_string(v) + " has the wrong number of spins");
      }
      for (std::size_t t = 0; t < traits; ++t) s.assign(v, t, it->second[t]);
    }
    for (std::size_t k = 0; k < net.ancestral().size(); ++k) {
      for (std::size_t t = 0; t < traits; ++t) s.assign(net.ancestral()[k], t, k % 2 == 0 ? 1 : -1);
    }
    return s;
  }

  std::size_t vertex_count() const noexcept { return vertex_count_; }
  std::size_t traits() const noexcept { return traits_; }
  bool frozen(Vertex v) const { return (*frozen_).at(v) != 0; }

  int spin(Vertex v, std::size_t t) const {
    return (words_[v * words_per_row_ + t / 64] >> (t % 64)) & 1u ? 1 : -1;
  }

  void set_spin(Vertex v, std::size_t t, int value) {
    check_mutable(v, t);
    assign(v, t, value);
  }

  void flip(Vertex v, std::size_t t) {
    check_mutable(v, t);
    words_[v * words_per_row_ + t / 64] ^= std::uint64_t{1} << (t % 64);
  }

  /// σ_u · σ_v over all traits.
  int dot(Vertex u, Vertex v) const {
    int differing = 0;
    for (std::size_t w = 0; w < words_per_row_; ++w) {
      differing += std::popcount(words_[u * words_per_row_ + w] ^ words_[v * words_per_row_ + w]);
    }
    return static_cast<int>(traits_) - 2 * differing;
  }

  /// Number of (vertex, trait) slots on which the two states differ.
  std::size_t hamming_distance(const TraitState& other) const {
    std::size_t d = 0;
    for (std::size_t i = 0; i < words_.size(); ++i) d += std::popcount(words_[i] ^ other.words_[i]);
    return d;
  }

  const std::vector<std::uint64_t>& words() const noexcept { return words_; }

  friend bool operator==(const TraitState& a, const TraitState& b) {
    return a.vertex_count_ == b.vertex_count_ && a.traits_ == b.traits_ && a.words_ == b.words_;
  }

 private:
  void check_mutable(Vertex v, std::size_t t) const {
    if (v >= vertex_count_ || t >= traits_) throw Error(ErrorCode::invalid_argument, "trait slot out of range");
    if ((*frozen_)[v]) {
      throw Error(ErrorCode::immutable_observed_trait,
                  "immutable observed trait: vertex " + std::to_string(v) + ", trait " + std::to_string(t));
    }
  }

  void assign(Vertex v, std::size_t t, int value) {
    if (value != 1 && value != -1) throw Error(ErrorCode::invalid_argument, "spin must be -1 or +1");
    auto& word = words_[v * words_per_row_ + t / 64];
    const std::uint64_t bit = std::uint64_t{1} << (t % 64);
    word = value == 1 ? (word | bit) : (word & ~bit);
  }

  std::size_t vertex_count_ = 0;
  std::size_t traits_ = 0;
  std::size_t words_per_row_ = 0;
  std::shared_ptr<const std::vector<std::uint8_t>> frozen_;
  std::vector<std::uint64_t> words_;
};

}  // namespace qpmcmc::phylo
