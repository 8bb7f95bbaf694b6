#pragma once

#include <cstdint>
#include <string>

#include "graphmi/graph.hpp"

namespace gmi {

// Reads a dataset directory: edges.tsv (two integer columns per line),
// labels.csv (one class id per line), optional features.csv (N rows of
// comma-separated values; identity features substituted when absent).
// Duplicate and reversed edges are merged; self-loops dropped with a warning.
Graph load_dataset(const std::string& dir);

// Writes the same layout back out.
void save_dataset(const Graph& g, const std::string& dir);

struct SbmParams {
    int blocks = 2;
    int nodes_per_block = 20;
    double p_in = 0.5;
    double p_out = 0.02;
    double feature_noise = 0.1;
};

// Stochastic block model with block-id labels and noisy one-hot block features.
Graph generate_sbm(const SbmParams& params, std::uint64_t seed);

}  // namespace gmi
