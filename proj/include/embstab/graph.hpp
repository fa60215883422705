#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "embstab/types.hpp"

namespace embstab {

/// Undirected, unweighted graph. Edges are kept canonical: u < v, sorted,
/// no duplicates, no self-loops. Directed inputs are symmetrized on load.
/// labels is either empty (unlabeled graph) or length num_nodes with -1
/// marking unlabeled nodes.
struct Graph {
  Index num_nodes = 0;
  std::vector<std::pair<Index, Index>> edges;
  std::vector<int> labels;
  int num_classes = 0;

  bool has_labels() const { return !labels.empty(); }

  /// Sorted neighbor lists, one per node. Isolated nodes get empty lists.
  std::vector<std::vector<Index>> adjacency_lists() const;
  std::vector<Index> degrees() const;

  /// Throws DataError if any structural invariant is violated.
  void validate() const;
};

/// Disjoint boolean node masks. Only labeled nodes are ever set; the union
/// may be a strict subset of the node set.
struct SplitSpec {
  std::vector<bool> train_mask;
  std::vector<bool> val_mask;
  std::vector<bool> test_mask;
};

std::vector<Index> mask_indices(const std::vector<bool>& mask);
Index mask_count(const std::vector<bool>& mask);

struct SbmConfig {
  std::vector<Index> block_sizes;
  double p_in = 0.0;
  double p_out = 0.0;
  std::uint64_t seed = 0;
};

struct EdgeListStats {
  std::size_t self_loops_dropped = 0;
  std::size_t duplicates_dropped = 0;
};

/// Reads a whitespace-separated "u v" edge list. Lines starting with '#' and
/// blank lines are skipped. Node count defaults to max index + 1.
Graph load_edge_list(const std::string& path,
                     std::optional<Index> num_nodes = std::nullopt,
                     EdgeListStats* stats = nullptr);

void save_edge_list(const Graph& graph, const std::string& path);

/// Annotates the graph with labels from a "u c" file. Every node may appear
/// at most once; num_classes becomes max class + 1.
Graph load_labels(const std::string& path, Graph graph);

void save_labels(const Graph& graph, const std::string& path);

/// Planted-partition generator: intra-block pairs connect with p_in,
/// inter-block with p_out. Labels are block memberships. Deterministic
/// given the config seed.
Graph generate_sbm(const SbmConfig& config);

/// Stratified random split of the labeled nodes into train/val/test.
/// Per-class bucket sizes stay within one node of fraction * class_size,
/// and no class present in the data gets an empty train bucket when the
/// train fraction is positive.
SplitSpec split_nodes(const Graph& graph, std::array<double, 3> fractions,
                      std::uint64_t seed);

}  // namespace embstab
