// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The lumistack Authors

#include "lumistack/graphcut.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

namespace lumistack {

FlowNetwork::FlowNetwork(int nodes, int source, int sink)
    : nodes_(nodes), source_(source), sink_(sink) {
  if (nodes < 2 || source < 0 || sink < 0 || source >= nodes || sink >= nodes)
    fail(ErrorCode::kInvalidInput, "flow network terminals out of range");
  if (source == sink) fail(ErrorCode::kInvalidInput, "source and sink must differ");
}

int FlowNetwork::add_node() { return nodes_++; }

void FlowNetwork::add_arc(int from, int to, double capacity) {
  if (from < 0 || to < 0 || from >= nodes_ || to >= nodes_)
    fail(ErrorCode::kInvalidInput, "arc endpoint out of range");
  if (!std::isfinite(capacity) || capacity < 0.0)
    fail(ErrorCode::kInvalidInput, "arc capacity must be finite and non-negative");
  if (capacity > 0.0 && from != to) arcs_.push_back({from, to, capacity});
}

namespace {

class Dinic {
 public:
  explicit Dinic(const FlowNetwork& net)
      : n_(net.node_count()), source_(net.source()), sink_(net.sink()) {
    std::vector<int> degree(n_ + 1, 0);
    double max_cap = 0.0;
    for (const auto& a : net.arcs()) {
      ++degree[a.from + 1];
      ++degree[a.to + 1];
      max_cap = std::max(max_cap, a.capacity);
    }
    for (int i = 0; i < n_; ++i) degree[i + 1] += degree[i];
    first_ = degree;
    to_.resize(degree[n_]);
    cap_.resize(degree[n_]);
    rev_.resize(degree[n_]);
    std::vector<int> fill(first_.begin(), first_.end() - 1);
    for (const auto& a : net.arcs()) {
      const int f = fill[a.from]++;
      const int r = fill[a.to]++;
      to_[f] = a.to;
      cap_[f] = a.capacity;
      rev_[f] = r;
      to_[r] = a.from;
      cap_[r] = 0.0;
      rev_[r] = f;
    }
    eps_ = 1e-12 * std::max(1.0, max_cap);
    level_.resize(n_);
    next_.resize(n_);
  }

  double run() {
    double flow = 0.0;
    while (build_levels()) flow += blocking_flow();
    return flow;
  }

  std::vector<std::uint8_t> source_side() const {
    std::vector<std::uint8_t> seen(n_, 0);
    std::vector<int> stack{source_};
    seen[source_] = 1;
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      for (int e = first_[v]; e < first_[v + 1]; ++e) {
        if (cap_[e] > eps_ && !seen[to_[e]]) {
          seen[to_[e]] = 1;
          stack.push_back(to_[e]);
        }
      }
    }
    return seen;
  }

 private:
  bool build_levels() {
    std::fill(level_.begin(), level_.end(), -1);
    std::queue<int> queue;
    level_[source_] = 0;
    queue.push(source_);
    while (!queue.empty()) {
      const int v = queue.front();
      queue.pop();
      for (int e = first_[v]; e < first_[v + 1]; ++e) {
        if (cap_[e] > eps_ && level_[to_[e]] < 0) {
          level_[to_[e]] = level_[v] + 1;
          queue.push(to_[e]);
        }
      }
    }
    return level_[sink_] >= 0;
  }

  // Iterative DFS over the level graph; `path` holds arc indices.
  double blocking_flow() {
    for (int v = 0; v < n_; ++v) next_[v] = first_[v];
    double total = 0.0;
    std::vector<int> path;
    int v = source_;
    while (true) {
      if (v == sink_) {
        double push = std::numeric_limits<double>::infinity();
        for (int e : path) push = std::min(push, cap_[e]);
        std::size_t cut_at = path.size();
        for (std::size_t i = 0; i < path.size(); ++i) {
          const int e = path[i];
          cap_[e] -= push;
          cap_[rev_[e]] += push;
          if (cap_[e] <= eps_ && cut_at == path.size()) cut_at = i;
        }
        total += push;
        path.resize(cut_at);
        v = path.empty() ? source_ : to_[path.back()];
        continue;
      }
      int& e = next_[v];
      while (e < first_[v + 1] && !(cap_[e] > eps_ && level_[to_[e]] == level_[v] + 1)) ++e;
      if (e < first_[v + 1]) {
        path.push_back(e);
        v = to_[e];
        continue;
      }
      // Dead end: drop v from the level graph and retreat.
      level_[v] = -1;
      if (path.empty()) break;
      path.pop_back();
      v = path.empty() ? source_ : to_[path.back()];
      ++next_[v];
    }
    return total;
  }

  int n_;
  int source_;
  int sink_;
  double eps_ = 0.0;
  std::vector<int> first_;
  std::vector<int> to_;
  std::vector<double> cap_;
  std::vector<int> rev_;
  std::vector<int> level_;
  std::vector<int> next_;
};

}  // namespace

MinCut max_flow(const FlowNetwork& net) {
  Dinic solver(net);
  MinCut cut;
  cut.flow = solver.run();
  cut.source_side = solver.source_side();
  return cut;
}

double smoothness_cost(int a, int b, int label_count) {
  if (a < 1 || b < 1 || a > label_count || b > label_count)
    fail(ErrorCode::kInvalidInput, "label out of range");
  if (a == b) return 0.0;
  if (label_count < 2) fail(ErrorCode::kInvalidInput, "smoothness cost needs at least two labels");
  return 0.5 + std::log(static_cast<double>(std::abs(a - b))) /
                   std::log(static_cast<double>(label_count));
}

void EnergyProblem::validate() const {
  if (width < 1 || height < 1) fail(ErrorCode::kInvalidInput, "energy grid must be non-empty");
  if (labels < 1) fail(ErrorCode::kInvalidInput, "energy problem needs at least one label");
  if (data_cost.size() != static_cast<std::size_t>(pixels()) * labels)
    fail(ErrorCode::kInvalidInput, "data cost table size mismatch");
  for (double c : data_cost) {
    if (!std::isfinite(c) || c < 0.0)
      fail(ErrorCode::kInvalidInput, "data costs must be finite and non-negative");
  }
  if (!std::isfinite(lambda) || lambda < 0.0)
    fail(ErrorCode::kInvalidInput, "smoothness weight must be non-negative");
}

namespace {

std::vector<double> smoothness_table(int labels) {
  std::vector<double> table(static_cast<std::size_t>(labels) * labels, 0.0);
  if (labels < 2) return table;
  for (int a = 1; a <= labels; ++a)
    for (int b = 1; b <= labels; ++b)
      table[(a - 1) * labels + (b - 1)] = smoothness_cost(a, b, labels);
  return table;
}

void check_labeling(const EnergyProblem& problem, std::span<const int> labeling) {
  if (labeling.size() != static_cast<std::size_t>(problem.pixels()))
    fail(ErrorCode::kInvalidInput, "labeling size does not match the grid");
  for (int l : labeling) {
    if (l < 1 || l > problem.labels) fail(ErrorCode::kInvalidInput, "labeling has a label out of range");
  }
}

double energy_with(const EnergyProblem& p, std::span<const int> l,
                   const std::vector<double>& table) {
  const int k = p.labels;
  auto pair_cost = [&](int a, int b) { return table[(a - 1) * k + (b - 1)]; };
  double data = 0.0;
  double smooth = 0.0;
  for (int y = 0; y < p.height; ++y) {
    for (int x = 0; x < p.width; ++x) {
      const int i = y * p.width + x;
      data += p.data(i, l[i]);
      if (x + 1 < p.width) smooth += pair_cost(l[i], l[i + 1]);
      if (y + 1 < p.height) smooth += pair_cost(l[i], l[i + p.width]);
    }
  }
  return data + p.lambda * smooth;
}

}  // namespace

double energy(const EnergyProblem& problem, std::span<const int> labeling) {
  problem.validate();
  check_labeling(problem, labeling);
  return energy_with(problem, labeling, smoothness_table(problem.labels));
}

std::vector<int> pointwise_argmin(const EnergyProblem& problem) {
  problem.validate();
  std::vector<int> out(problem.pixels(), 1);
  for (int i = 0; i < problem.pixels(); ++i) {
    double best = problem.data(i, 1);
    for (int l = 2; l <= problem.labels; ++l) {
      if (problem.data(i, l) < best) {
        best = problem.data(i, l);
        out[i] = l;
      }
    }
  }
  return out;
}

namespace {

// One expansion move: every pixel either keeps its label (source side) or
// switches to alpha (sink side).
std::vector<int> expand(const EnergyProblem& p, const std::vector<int>& current, int alpha,
                        const std::vector<double>& table, long long& truncated) {
  const int n = p.pixels();
  const int k = p.labels;
  const int source = n;
  const int sink = n + 1;
  auto pair_cost = [&](int a, int b) { return p.lambda * table[(a - 1) * k + (b - 1)]; };

  std::vector<double> keep(n);
  std::vector<double> take(n);
  for (int i = 0; i < n; ++i) {
    keep[i] = p.data(i, current[i]);
    take[i] = p.data(i, alpha);
  }

  FlowNetwork net(n + 2, source, sink);
  auto add_pair = [&](int i, int j) {
    // Costs for (keep,keep), (keep,take), (take,keep); (take,take) costs 0.
    double a = pair_cost(current[i], current[j]);
    const double b = pair_cost(current[i], alpha);
    const double c = pair_cost(alpha, current[j]);
    if (a > b + c) {
      a = b + c;
      ++truncated;
    }
    take[i] += c - a;
    take[j] -= c;
    net.add_arc(i, j, b + c - a);
  };
  for (int y = 0; y < p.height; ++y) {
    for (int x = 0; x < p.width; ++x) {
      const int i = y * p.width + x;
      if (x + 1 < p.width) add_pair(i, i + 1);
      if (y + 1 < p.height) add_pair(i, i + p.width);
    }
  }
  for (int i = 0; i < n; ++i) {
    const double diff = take[i] - keep[i];
    if (diff > 0.0) {
      net.add_arc(source, i, diff);
    } else if (diff < 0.0) {
      net.add_arc(i, sink, -diff);
    }
  }

  const MinCut cut = max_flow(net);
  std::vector<int> next = current;
  for (int i = 0; i < n; ++i) {
    if (!cut.source_side[i]) next[i] = alpha;
  }
  return next;
}

}  // namespace

std::vector<int> alpha_expansion(const EnergyProblem& problem, std::vector<int> init,
                                 ExpansionStats* stats) {
  problem.validate();
  check_labeling(problem, init);
  ExpansionStats local;
  ExpansionStats& st = stats ? *stats : local;
  st = ExpansionStats{};

  const auto table = smoothness_table(problem.labels);
  std::vector<int> current = std::move(init);
  double current_energy = energy_with(problem, current, table);
  st.sweep_energies.push_back(current_energy);
  if (problem.labels == 1) return current;

  bool improved = true;
  while (improved) {
    improved = false;
    for (int alpha = 1; alpha <= problem.labels; ++alpha) {
      auto candidate = expand(problem, current, alpha, table, st.truncated_terms);
      const double candidate_energy = energy_with(problem, candidate, table);
      const double tol = 1e-12 * std::max(1.0, std::abs(current_energy));
      if (candidate_energy < current_energy - tol) {
        current = std::move(candidate);
        current_energy = candidate_energy;
        improved = true;
        ++st.accepted_moves;
      } else {
        ++st.rejected_moves;
      }
    }
    st.sweep_energies.push_back(current_energy);
  }
  return current;
}

}  // namespace lumistack
