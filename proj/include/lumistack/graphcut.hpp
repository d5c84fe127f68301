// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The lumistack Authors

#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "lumistack/core.hpp"

namespace lumistack {

class FlowNetwork {
 public:
  struct Arc {
    int from;
    int to;
    double capacity;
  };

  FlowNetwork(int nodes, int source, int sink);

  int add_node();
  void add_arc(int from, int to, double capacity);

  int node_count() const noexcept { return nodes_; }
  int source() const noexcept { return source_; }
  int sink() const noexcept { return sink_; }
  std::span<const Arc> arcs() const noexcept { return arcs_; }

 private:
  int nodes_;
  int source_;
  int sink_;
  std::vector<Arc> arcs_;
};

struct MinCut {
  double flow = 0.0;
  /// 1 for nodes reachable from the source in the final residual graph.
  std::vector<std::uint8_t> source_side;
};

/// Exact max-flow (Dinic, blocking flows on a level graph). The partition is
/// the source-reachable set of the residual graph, so its crossing capacity
/// equals the flow value.
MinCut max_flow(const FlowNetwork& net);

/// Pairwise label cost: 0 for equal labels, else 0.5 + log|a-b| / log K.
double smoothness_cost(int a, int b, int label_count);

/// Grid labeling problem over a 4-connected neighbourhood. Labels are 1..K and
/// data_cost holds K entries per pixel in row-major pixel order.
struct EnergyProblem {
  int width = 0;
  int height = 0;
  int labels = 0;
  std::vector<double> data_cost;
  double lambda = 1.0;

  int pixels() const noexcept { return width * height; }
  double data(int pixel, int label) const {
    return data_cost[static_cast<std::size_t>(pixel) * labels + (label - 1)];
  }
  void validate() const;
};

/// Sum of data costs plus lambda times the smoothness cost of every
/// horizontal and vertical neighbour pair (each pair counted once).
double energy(const EnergyProblem& problem, std::span<const int> labeling);

/// Per-pixel label of minimal data cost; ties go to the lowest label.
std::vector<int> pointwise_argmin(const EnergyProblem& problem);

struct ExpansionStats {
  /// Energy of the initial labeling followed by the energy after each sweep.
  std::vector<double> sweep_energies;
  int accepted_moves = 0;
  int rejected_moves = 0;
  /// Pairwise terms clipped to keep a move submodular.
  long long truncated_terms = 0;
};

/// Alpha-expansion with labels swept in ascending order until a full sweep
/// brings no strict decrease. Never returns a labeling with higher energy
/// than `init`.
std::vector<int> alpha_expansion(const EnergyProblem& problem, std::vector<int> init,
                                 ExpansionStats* stats = nullptr);

}  // namespace lumistack
