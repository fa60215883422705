#pragma once

#include <cstdint>
#include <string>

#include "embstab/graph.hpp"
#include "embstab/types.hpp"

namespace embstab {

/// N x D matrix of node embedding vectors, row i belonging to node i.
struct EmbeddingMatrix {
  Matrix values;

  Index num_nodes() const { return values.rows(); }
  Index dim() const { return values.cols(); }
};

struct Node2vecConfig {
  Index dim = 128;
  int walks_per_node = 10;
  int walk_length = 80;
  int context_size = 10;
  double p = 1.0;
  double q = 1.0;
  int negative_samples = 5;
  int epochs = 1;
  double learning_rate = 0.025;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Skip-gram with negative sampling over second-order biased random walks.
/// Training is sequential, so the seed fully determines the output. Walks
/// start only at nodes with degree >= 1; isolated nodes keep their random
/// initialization.
EmbeddingMatrix node2vec_lite(const Graph& graph, const Node2vecConfig& config);

/// Symmetric normalized adjacency D^{-1/2} A D^{-1/2}; zero rows/columns for
/// isolated nodes.
Matrix normalized_adjacency(const Graph& graph);

/// Deterministic baseline: columns are the top-dim eigenvectors of the
/// normalized adjacency, ordered by eigenvalue magnitude (ties prefer the
/// larger eigenvalue), each sign-canonicalized so its largest-magnitude
/// entry is positive.
EmbeddingMatrix spectral_embed(const Graph& graph, Index dim);

/// Text format: "EMB1 <N> <D>" header, then N lines "<i> <v1> ... <vD>" with
/// node indices ascending from 0. read(write(m)) is bit-exact.
void write_embedding(const EmbeddingMatrix& matrix, const std::string& path);
EmbeddingMatrix read_embedding(const std::string& path);

}  // namespace embstab
