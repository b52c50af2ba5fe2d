#include "routing/network.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <optional>

namespace routing {

namespace {

void check_acyclic(int node_count, const std::vector<Edge>& edges) {
  std::vector<std::vector<int>> out(node_count);
  for (size_t i = 0; i < edges.size(); ++i) {
    out[edges[i].tail].push_back(static_cast<int>(i));
  }
  // 0 = unvisited, 1 = on stack, 2 = done
  std::vector<int> state(node_count, 0);
  std::function<void(int)> visit = [&](int node) {
    state[node] = 1;
    for (int e : out[node]) {
      int next = edges[e].head;
      if (state[next] == 1) throw EngineError("cycle detected");
      if (state[next] == 0) visit(next);
    }
    state[node] = 2;
  };
  for (int v = 0; v < node_count; ++v) {
    if (state[v] == 0) visit(v);
  }
}

}  // namespace

std::vector<Path> enumerate_paths(const std::vector<std::string>& nodes,
                                  const std::vector<Edge>& edges, int source, int sink,
                                  int path_cap) {
  check_acyclic(static_cast<int>(nodes.size()), edges);
  std::vector<std::vector<int>> out(nodes.size());
  for (size_t i = 0; i < edges.size(); ++i) {
    out[edges[i].tail].push_back(static_cast<int>(i));
  }
  // Edge ids ascend within each adjacency list, so DFS emits paths in
  // lexicographic edge-id order without a final sort.
  for (auto& adj : out) std::sort(adj.begin(), adj.end());

  std::vector<Path> paths;
  std::vector<int> stack;
  std::function<void(int)> dfs = [&](int node) {
    if (node == sink) {
      if (static_cast<int>(paths.size()) >= path_cap) {
        throw EngineError("path cap exceeded (" + std::to_string(path_cap) + ")");
      }
      paths.push_back(Path{stack});
      return;
    }
    for (int e : out[node]) {
      stack.push_back(e);
      dfs(edges[e].head);
      stack.pop_back();
    }
  };
  dfs(source);
  if (paths.empty()) throw EngineError("no source-sink path");
  return paths;
}

Network::Network(std::vector<std::string> nodes, std::vector<Edge> edges,
                 const std::string& source, const std::string& sink, int path_cap)
    : nodes_(std::move(nodes)), edges_(std::move(edges)) {
  std::map<std::string, int> index;
  for (size_t i = 0; i < nodes_.size(); ++i) {
    if (!index.emplace(nodes_[i], static_cast<int>(i)).second) {
      throw EngineError("duplicate node name: " + nodes_[i]);
    }
  }
  auto lookup = [&](const std::string& name) {
    auto it = index.find(name);
    if (it == index.end()) throw EngineError("unknown node: " + name);
    return it->second;
  };
  source_ = lookup(source);
  sink_ = lookup(sink);
  if (source_ == sink_) throw EngineError("source and sink must differ");
  for (const auto& e : edges_) {
    if (e.tail < 0 || e.tail >= static_cast<int>(nodes_.size()) || e.head < 0 ||
        e.head >= static_cast<int>(nodes_.size())) {
      throw EngineError("edge references unknown node index");
    }
    if (e.tail == e.head) throw EngineError("self-loops are not allowed");
  }
  paths_ = enumerate_paths(nodes_, edges_, source_, sink_, path_cap);
}

void validate_flow(const Network& network, const Flow& flow) {
  if (static_cast<int>(flow.path_weights.size()) != network.path_count()) {
    throw EngineError("flow must assign a weight to every path");
  }
  Rational total(0);
  for (const auto& w : flow.path_weights) {
    if (w < 0) throw EngineError("flow weights must be non-negative");
    total += w;
  }
  if (total != 1) throw EngineError("flow weights must sum to exactly 1");
}

std::vector<Rational> edge_flow(const Network& network, const Flow& flow) {
  validate_flow(network, flow);
  std::vector<Rational> f(network.edges().size(), Rational(0));
  for (int p = 0; p < network.path_count(); ++p) {
    for (int e : network.paths()[p].edges) {
      f[e] += flow.path_weights[p];
    }
  }
  return f;
}

template <GameScalar S>
std::vector<S> path_costs(const Network& network, const Flow& flow) {
  std::vector<Rational> f = edge_flow(network, flow);
  std::vector<S> edge_cost(f.size());
  for (size_t e = 0; e < f.size(); ++e) {
    edge_cost[e] = network.edges()[e].cost.template evaluate<S>(ScalarTraits<S>::from(f[e]));
  }
  std::vector<S> out(network.path_count(), S(0));
  for (int p = 0; p < network.path_count(); ++p) {
    for (int e : network.paths()[p].edges) out[p] = out[p] + edge_cost[e];
  }
  return out;
}

template <GameScalar S>
S total_cost(const Network& network, const Flow& flow) {
  std::vector<S> costs = path_costs<S>(network, flow);
  S total(0);
  for (int p = 0; p < network.path_count(); ++p) {
    total = total + ScalarTraits<S>::from(flow.path_weights[p]) * costs[p];
  }
  return total;
}

template <GameScalar S>
S total_cost_by_edges(const Network& network, const Flow& flow) {
  std::vector<Rational> f = edge_flow(network, flow);
  S total(0);
  for (size_t e = 0; e < f.size(); ++e) {
    S x = ScalarTraits<S>::from(f[e]);
    total = total + x * network.edges()[e].cost.template evaluate<S>(x);
  }
  return total;
}

namespace {

// Two parallel single-edge routes, one constant and one strictly affine.
struct ParallelShape {
  Rational c0;  // constant route cost
  Rational a, b;
  PathId constant_path;
  PathId affine_path;
};

std::optional<ParallelShape> parallel_affine_shape(const Network& network) {
  if (network.path_count() != 2) return std::nullopt;
  const auto& paths = network.paths();
  if (paths[0].edges.size() != 1 || paths[1].edges.size() != 1) return std::nullopt;
  const CostFunction& c0 = network.edges()[paths[0].edges[0]].cost;
  const CostFunction& c1 = network.edges()[paths[1].edges[0]].cost;
  auto is_constant = [](const CostFunction& c) {
    return c.kind() == CostFunction::Kind::constant ||
           (c.kind() == CostFunction::Kind::affine && c.a() == 0);
  };
  auto shape = [&](const CostFunction& flat, const CostFunction& rising, PathId fp,
                   PathId rp) -> std::optional<ParallelShape> {
    if (rising.kind() != CostFunction::Kind::affine || rising.a() == 0) return std::nullopt;
    return ParallelShape{flat.b(), rising.a(), rising.b(), fp, rp};
  };
  if (is_constant(c0)) return shape(c0, c1, 0, 1);
  if (is_constant(c1)) return shape(c1, c0, 1, 0);
  return std::nullopt;
}

}  // namespace

template <GameScalar S>
OptimalFlowResult<S> optimal_flow(const Network& network, int resolution) {
  if (resolution < 1) throw EngineError("grid resolution must be >= 1");
  if (auto shape = parallel_affine_shape(network)) {
    // minimize (1-x)*c0 + x*(a*x + b): vertex at (c0 - b) / (2a), clamped.
    Rational x = (shape->c0 - shape->b) / (2 * shape->a);
    if (x < 0) x = 0;
    if (x > 1) x = 1;
    Flow flow;
    flow.path_weights.assign(2, Rational(0));
    flow.path_weights[shape->affine_path] = x;
    flow.path_weights[shape->constant_path] = 1 - x;
    return {flow, total_cost<S>(network, flow)};
  }

  int m = network.path_count();
  // Simplex grid size check: C(resolution + m - 1, m - 1) points.
  double points = 1;
  for (int i = 1; i < m; ++i) points *= double(resolution + i) / i;
  if (points > 2e6) {
    throw EngineError("grid search too large; lower the resolution or path count");
  }

  Flow best;
  S best_cost(0);
  bool have_best = false;
  std::vector<int> counts(m, 0);
  std::function<void(int, int)> enumerate = [&](int index, int remaining) {
    if (index == m - 1) {
      counts[index] = remaining;
      Flow candidate;
      candidate.path_weights.reserve(m);
      for (int c : counts) candidate.path_weights.emplace_back(c, resolution);
      S cost = total_cost<S>(network, candidate);
      if (!have_best || cost < best_cost) {
        best = candidate;
        best_cost = cost;
        have_best = true;
      }
      return;
    }
    for (int c = 0; c <= remaining; ++c) {
      counts[index] = c;
      enumerate(index + 1, remaining - c);
    }
  };
  enumerate(0, resolution);
  return {best, best_cost};
}

template std::vector<Rational> path_costs<Rational>(const Network&, const Flow&);
template std::vector<double> path_costs<double>(const Network&, const Flow&);
template Rational total_cost<Rational>(const Network&, const Flow&);
template double total_cost<double>(const Network&, const Flow&);
template Rational total_cost_by_edges<Rational>(const Network&, const Flow&);
template double total_cost_by_edges<double>(const Network&, const Flow&);
template OptimalFlowResult<Rational> optimal_flow<Rational>(const Network&, int);
template OptimalFlowResult<double> optimal_flow<double>(const Network&, int);

Network pigou() {
  std::vector<Edge> edges;
  edges.push_back({0, 1, CostFunction::constant(Rational(1))});
  edges.push_back({0, 1, CostFunction::affine(Rational(1), Rational(0))});
  return Network({"s", "t"}, std::move(edges), "s", "t");
}

PigouPaths pigou_paths(const Network& network) {
  if (network.path_count() != 2) {
    throw EngineError("strategies require a two-route network");
  }
  auto flow_dependent = [&](const Path& p) {
    for (int e : p.edges) {
      const CostFunction& c = network.edges()[e].cost;
      if (c.kind() != CostFunction::Kind::constant && c.a() != 0) return true;
    }
    return false;
  };
  bool dep0 = flow_dependent(network.paths()[0]);
  bool dep1 = flow_dependent(network.paths()[1]);
  if (dep0 == dep1) {
    throw EngineError("two-route network must have one constant and one congestible route");
  }
  return dep0 ? PigouPaths{1, 0} : PigouPaths{0, 1};
}

}  // namespace routing
