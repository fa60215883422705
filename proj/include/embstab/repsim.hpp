#pragma once

#include <vector>

#include "embstab/types.hpp"

namespace embstab {

/// Instance-pairwise similarity or distance matrix over one embedding.
struct RsmMatrix {
  Matrix values;
  bool centered = false;
};

enum class RsmKind { euclidean_distance, cosine };

/// Per-node ordered lists (most similar first) of the k nearest neighbors
/// under cosine similarity, self excluded, ties broken by ascending index.
struct NeighborIndex {
  std::vector<std::vector<Index>> neighbors;
  int k = 0;
};

/// Orthogonal D x D alignment from the Procrustes problem.
struct AlignmentMatrix {
  Matrix q;
};

/// Cosine similarity with the zero-vector convention: any comparison
/// involving a zero-norm vector is 0.
double cosine_similarity(VectorRef a, VectorRef b);

/// Solves argmin over orthogonal Q of ||Z Q - Z2||_F via the SVD of Z^T Z2.
AlignmentMatrix procrustes_align(MatrixRef z, MatrixRef z2);

/// Mean row-wise cosine similarity after Procrustes alignment. In [-1, 1].
double aligned_cosine_similarity(MatrixRef z, MatrixRef z2);

RsmMatrix build_rsm(MatrixRef z, RsmKind kind);

/// Subtracts row means and column means and adds the grand mean back.
RsmMatrix double_center(const RsmMatrix& rsm);

/// Distance correlation of the two point clouds: normalized inner product of
/// the double-centered Euclidean distance matrices. In [0, 1]. Throws
/// NumericError when either embedding has all points coincident.
double distance_correlation(MatrixRef z, MatrixRef z2);

NeighborIndex knn_index(MatrixRef z, int k);

/// Mean Jaccard overlap of the two embeddings' k-NN sets. In [0, 1].
double knn_jaccard(MatrixRef z, MatrixRef z2, int k);

/// Mean cosine similarity of the two embeddings' similarity profiles over
/// the union of each instance's neighbor sets. A zero profile contributes 0
/// and stays in the mean. In [-1, 1].
double second_order_cosine(MatrixRef z, MatrixRef z2, int k);

}  // namespace embstab
