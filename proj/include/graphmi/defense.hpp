#pragma once

#include <cstdint>
#include <string>

#include "graphmi/graph.hpp"

namespace gmi {

enum class PerturbStrategy { kRewire, kAddSimilar, kFlip };

PerturbStrategy parse_strategy(const std::string& name);  // "rewire" | "add_similar" | "flip"

struct PerturbConfig {
    PerturbStrategy strategy = PerturbStrategy::kFlip;
    double p = 0.5;  // rewire/flip probability, or add_similar budget fraction
    std::uint64_t seed = 0;
};

// Each existing edge is, with probability p, deleted and replaced by an edge
// from one of its endpoints to a random non-adjacent node.
Graph rewire(const Graph& g, double p, std::uint64_t seed);

// Adds floor(budget_fraction * |E|) edges between the non-adjacent pairs with
// the highest cosine feature similarity.
Graph add_similar_edges(const Graph& g, double budget_fraction, std::uint64_t seed);

struct FlipResult {
    Graph graph;
    double epsilon = 0.0;  // edge-level DP: ln(2/p - 1)
};

// Each upper-triangle entry is kept with probability 1-p, otherwise redrawn
// from Bern(1/2).
FlipResult flip(const Graph& g, double p, std::uint64_t seed);

double flip_epsilon(double p);

Graph apply_perturbation(const Graph& g, const PerturbConfig& cfg, double* epsilon_out = nullptr);

}  // namespace gmi
