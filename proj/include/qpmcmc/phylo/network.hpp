#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "../error.hpp"

namespace qpmcmc::phylo {

using Vertex = std::uint32_t;

/// Undirected edge, stored with u < v.
struct Edge {
  Vertex u = 0;
  Vertex v = 0;
  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// Same coupling J on every edge.
struct UniformCoupling {
  double J = 0.0;
};

/// One coupling per edge (aligned with PhyloNetwork::edges()), with any
/// inverse temperature already folded in.
struct PerEdgeCoupling {
  std::vector<double> values;
};

using Couplings = std::variant<UniformCoupling, PerEdgeCoupling>;

/// Couplings beta * gamma * sqrt(1 / w) from positive edge weights w.
inline PerEdgeCoupling couplings_from_weights(std::span<const double> weights, double beta,
                                              double gamma) {
  PerEdgeCoupling out;
  out.values.reserve(weights.size());
  for (double w : weights) {
    if (!(w > 0.0)) throw Error(ErrorCode::invalid_argument, "edge weights must be positive");
    out.values.push_back(beta * gamma * std::sqrt(1.0 / w));
  }
  return out;
}

struct Neighbor {
  Vertex vertex = 0;
  std::uint32_t edge = 0;
};

/// Undirected simple graph with a partition of the vertices into observed
/// taxa and ancestral (sampled) vertices. Immutable once built.
class PhyloNetwork {
 public:
  PhyloNetwork() = default;

  PhyloNetwork(std::size_t vertex_count, std::span<const std::pair<Vertex, Vertex>> edges,
               std::span<const Vertex> observed, Couplings couplings = UniformCoupling{})
      : vertex_count_(vertex_count), observed_mask_(vertex_count, 0), couplings_(std::move(couplings)) {
    if (vertex_count == 0) throw Error(ErrorCode::invalid_network, "network has no vertices");
    std::set<Edge> seen;
    edges_.reserve(edges.size());
    for (std::size_t i = 0; i < edges.size(); ++i) {
      auto [a, b] = edges[i];
      const std::string where = "edges[" + std::to_string(i) + "]";
      if (a >= vertex_count || b >= vertex_count) {
        throw Error(ErrorCode::invalid_network, where + ": vertex id out of range");
      }
      if (a == b) throw Error(ErrorCode::invalid_network, where + ": self-loop on vertex " + std::to_string(a));
      const Edge e{std::min(a, b), std::max(a, b)};
      if (!seen.insert(e).second) {
        throw Error(ErrorCode::invalid_network, where + ": duplicate edge (" + std::to_string(e.u) +
                                                    ", " + std::to_string(e.v) + ")");
      }
      edges_.push_back(e);
    }
    for (Vertex v : observed) {
      if (v >= vertex_count) throw Error(ErrorCode::invalid_network, "observed vertex id out of range");
      if (observed_mask_[v]) {
        throw Error(ErrorCode::invalid_network, "observed vertex " + std::to_string(v) + " listed twice");
      }
      observed_mask_[v] = 1;
    }
    for (Vertex v = 0; v < vertex_count; ++v) (observed_mask_[v] ? observed_ : ancestral_).push_back(v);

    ancestral_index_.assign(vertex_count, kNotAncestral);
    for (std::size_t i = 0; i < ancestral_.size(); ++i) ancestral_index_[ancestral_[i]] = static_cast<std::uint32_t>(i);

    std::vector<std::size_t> counts(vertex_count, 0);
    for (const Edge& e : edges_) {
      ++counts[e.u];
      ++counts[e.v];
    }
    offsets_.assign(vertex_count + 1, 0);
    for (std::size_t v = 0; v < vertex_count; ++v) offsets_[v + 1] = offsets_[v] + counts[v];
    adjacency_.resize(offsets_.back());
    std::vector<std::size_t> cursor(offsets_.begin(), offsets_.end() - 1);
    for (std::size_t i = 0; i < edges_.size(); ++i) {
      const Edge& e = edges_[i];
      adjacency_[cursor[e.u]++] = {e.v, static_cast<std::uint32_t>(i)};
      adjacency_[cursor[e.v]++] = {e.u, static_cast<std::uint32_t>(i)};
    }
    for (std::size_t v = 0; v < vertex_count; ++v) max_degree_ = std::max(max_degree_, counts[v]);

    validate_couplings();
  }

  std::size_t vertex_count() const noexcept { return vertex_count_; }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  const std::vector<Vertex>& observed() const noexcept { return observed_; }
  const std::vector<Vertex>& ancestral() const noexcept { return ancestral_; }
  bool is_observed(Vertex v) const { return observed_mask_.at(v) != 0; }
  const std::vector<std::uint8_t>& observed_mask() const noexcept { return observed_mask_; }

  /// Position of v in ancestral(), if v is ancestral.
  std::optional<std::size_t> ancestral_index(Vertex v) const {
    const auto i = ancestral_index_.at(v);
    if (i == kNotAncestral) return std::nullopt;
    return i;
  }

  /// Maximum vertex degree deg(G).
  std::size_t degree() const noexcept { return max_degree_; }
  std::size_t degree(Vertex v) const { return offsets_.at(v + 1) - offsets_.at(v); }

  std::span<const Neighbor> neighbors(Vertex v) const {
    return {adjacency_.data() + offsets_.at(v), degree(v)};
  }

  bool adjacent(Vertex a, Vertex b) const {
    for (const Neighbor& n : neighbors(a)) {
      if (n.vertex == b) return true;
    }
    return false;
  }

  const Couplings& couplings() const noexcept { return couplings_; }

  std::optional<double> uniform_coupling() const {
    if (const auto* u = std::get_if<UniformCoupling>(&couplings_)) return u->J;
    return std::nullopt;
  }

  double coupling(std::uint32_t edge) const {
    if (const auto* u = std::get_if<UniformCoupling>(&couplings_)) return u->J;
    return std::get<PerEdgeCoupling>(couplings_).values.at(edge);
  }

  PhyloNetwork with_couplings(Couplings couplings) const {
    PhyloNetwork copy = *this;
    copy.couplings_ = std::move(couplings);
    copy.validate_couplings();
    return copy;
  }

  PhyloNetwork with_coupling(double J) const { return with_couplings(UniformCoupling{J}); }

 private:
  static constexpr std::uint32_t kNotAncestral = 0xFFFFFFFFu;

  void validate_couplings() const {
    if (const auto* per = std::get_if<PerEdgeCoupling>(&couplings_)) {
      if (per->values.size() != edges_.size()) {
        throw Error(ErrorCode::invalid_network, "per-edge couplings must match the edge count");
      }
      for (double j : per->values) {
        if (!(j >= 0.0) || !std::isfinite(j)) {
          throw Error(ErrorCode::invalid_network, "per-edge couplings must be finite and nonnegative");
        }
      }
    } else if (!std::isfinite(std::get<UniformCoupling>(couplings_).J)) {
      throw Error(ErrorCode::invalid_network, "coupling J must be finite");
    }
  }

  std::size_t vertex_count_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::uint8_t> observed_mask_;
  std::vector<Vertex> observed_;
  std::vector<Vertex> ancestral_;
  std::vector<std::uint32_t> ancestral_index_;
  std::vector<std::size_t> offsets_;
  std::vector<Neighbor> adjacency_;
  std::size_t max_degree_ = 0;
  Couplings couplings_ = UniformCoupling{};
};

}  // namespace qpmcmc::phylo
