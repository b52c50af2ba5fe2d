#pragma once

#include <string>
#include <vector>

#include "routing/cost.hpp"

namespace routing {

struct Edge {
  int tail = 0;
  int head = 0;
  CostFunction cost;
};

/// A source-to-sink route, as the sequence of edge indices it traverses.
struct Path {
  std::vector<int> edges;
  bool operator==(const Path&) const = default;
};

using PathId = int;

/// Directed network with one commodity of total measure 1 from source to
/// sink. Must be acyclic; parallel edges are allowed, self-loops are not.
/// Routes are enumerated once at construction in lexicographic edge-id
/// order; their indices are the stable PathIds used everywhere else.
class Network {
 public:
  Network(std::vector<std::string> nodes, std::vector<Edge> edges,
          const std::string& source, const std::string& sink,
          int path_cap = kDefaultPathCap);

  static constexpr int kDefaultPathCap = 10000;

  const std::vector<std::string>& nodes() const { return nodes_; }
  const std::vector<Edge>& edges() const { return edges_; }
  int source() const { return source_; }
  int sink() const { return sink_; }
  const std::vector<Path>& paths() const { return paths_; }
  int path_count() const { return static_cast<int>(paths_.size()); }

  const std::string& node_name(int index) const { return nodes_.at(index); }

 private:
  std::vector<std::string> nodes_;
  std::vector<Edge> edges_;
  int source_;
  int sink_;
  std::vector<Path> paths_;
};

/// All source→sink paths in lexicographic edge-id order. Standalone DFS
/// used by Network's constructor; exposed for direct use and testing.
/// Throws: "cycle detected", "no source-sink path", "path cap exceeded".
std::vector<Path> enumerate_paths(const std::vector<std::string>& nodes,
                                  const std::vector<Edge>& edges, int source, int sink,
                                  int path_cap = Network::kDefaultPathCap);

/// Unit of traffic split over the network's paths; weights are exact
/// rationals summing to 1.
struct Flow {
  std::vector<Rational> path_weights;
};

void validate_flow(const Network& network, const Flow& flow);

/// Per-edge flow induced by a path flow: f_e = sum of weights of paths
/// through e.
std::vector<Rational> edge_flow(const Network& network, const Flow& flow);

/// Total (social) cost c(f) = sum over paths of f(P) * c_P(f), where a
/// path's cost is the sum of its edge costs at the induced edge flows.
template <GameScalar S>
S total_cost(const Network& network, const Flow& flow);

/// Same value computed edge-wise: sum over edges of f_e * c_e(f_e).
/// Kept as an independent formula for cross-checking.
template <GameScalar S>
S total_cost_by_edges(const Network& network, const Flow& flow);

/// Cost of each path at the flow induced by `flow`.
template <GameScalar S>
std::vector<S> path_costs(const Network& network, const Flow& flow);

template <GameScalar S>
struct OptimalFlowResult {
  Flow flow;
  S cost;
};

/// Socially optimal unit flow. Two parallel single-edge paths with a
/// constant route and an affine route are solved analytically (vertex of
/// the quadratic, clamped to [0,1]); every other shape is a grid search
/// over the path-weight simplex with step 1/resolution.
template <GameScalar S>
OptimalFlowResult<S> optimal_flow(const Network& network, int resolution = 100);

/// The canonical two-route instance: top cost 1, bottom cost x.
Network pigou();

struct PigouPaths {
  PathId top;
  PathId bottom;
};

/// Identifies the constant-cost route and the congestible route of a
/// two-route network. Errors if the network does not have that shape.
PigouPaths pigou_paths(const Network& network);

}  // namespace routing
