#include "embstab/repsim.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>

#include "embstab/kahan.hpp"

namespace embstab {

namespace {

void require_same_shape(MatrixRef z, MatrixRef z2) {
  if (z.rows() != z2.rows() || z.cols() != z2.cols()) {
    throw DataError("embedding shapes differ: " + std::to_string(z.rows()) + "x" +
                    std::to_string(z.cols()) + " vs " + std::to_string(z2.rows()) + "x" +
                    std::to_string(z2.cols()));
  }
}

Vector row_norms(MatrixRef z) { return z.rowwise().norm(); }

// Sort key for neighbor ranking: zero-norm rows sink below any real cosine.
constexpr double kZeroNormKey = -2.0;

}  // namespace

double cosine_similarity(VectorRef a, VectorRef b) {
  double na = a.norm();
  double nb = b.norm();
  if (na == 0.0 || nb == 0.0) return 0.0;
  return a.dot(b) / (na * nb);
}

AlignmentMatrix procrustes_align(MatrixRef z, MatrixRef z2) {
  require_same_shape(z, z2);
  if (!z.allFinite() || !z2.allFinite()) {
    throw NumericError("procrustes_align: non-finite input");
  }
  Matrix cross = z.transpose() * z2;
  Eigen::BDCSVD<Matrix> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
  if (svd.info() != Eigen::Success) {
    throw NumericError("procrustes_align: SVD failed");
  }
  return AlignmentMatrix{svd.matrixU() * svd.matrixV().transpose()};
}

double aligned_cosine_similarity(MatrixRef z, MatrixRef z2) {
  AlignmentMatrix alignment = procrustes_align(z, z2);
  Matrix rotated = z * alignment.q;
  KahanSum acc;
  for (Index i = 0; i < z.rows(); ++i) {
    acc.add(cosine_similarity(rotated.row(i).transpose(), z2.row(i).transpose()));
  }
  return acc.value() / static_cast<double>(z.rows());
}

RsmMatrix build_rsm(MatrixRef z, RsmKind kind) {
  const Index n = z.rows();
  Matrix s(n, n);
  if (kind == RsmKind::euclidean_distance) {
    for (Index i = 0; i < n; ++i) {
      s(i, i) = 0.0;
      for (Index j = 0; j < i; ++j) {
        double d = (z.row(i) - z.row(j)).norm();
        s(i, j) = d;
        s(j, i) = d;
      }
    }
  } else {
    Vector norms = row_norms(z);
    for (Index i = 0; i < n; ++i) {
      s(i, i) = norms(i) > 0.0 ? 1.0 : 0.0;
      for (Index j = 0; j < i; ++j) {
        double c = norms(i) > 0.0 && norms(j) > 0.0
                       ? z.row(i).dot(z.row(j)) / (norms(i) * norms(j))
                       : 0.0;
        s(i, j) = c;
        s(j, i) = c;
      }
    }
  }
  return RsmMatrix{std::move(s), false};
}

RsmMatrix double_center(const RsmMatrix& rsm) {
  const Index n = rsm.values.rows();
  // One traversal collects row, column, and grand sums with compensation.
  std::vector<KahanSum> row_sums(static_cast<std::size_t>(n));
  std::vector<KahanSum> col_sums(static_cast<std::size_t>(n));
  KahanSum grand;
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      double v = rsm.values(i, j);
      row_sums[static_cast<std::size_t>(i)].add(v);
      col_sums[static_cast<std::size_t>(j)].add(v);
      grand.add(v);
    }
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  const double grand_mean = grand.value() * inv_n * inv_n;
  Matrix out(n, n);
  for (Index i = 0; i < n; ++i) {
    const double rm = row_sums[static_cast<std::size_t>(i)].value() * inv_n;
    for (Index j = 0; j < n; ++j) {
      const double cm = col_sums[static_cast<std::size_t>(j)].value() * inv_n;
      out(i, j) = rsm.values(i, j) - rm - cm + grand_mean;
    }
  }
  return RsmMatrix{std::move(out), true};
}

namespace {

double dcov_squared(const Matrix& a, const Matrix& b) {
  KahanSum acc;
  const Index n = a.rows();
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) acc.add(a(i, j) * b(i, j));
  }
  return acc.value() / (static_cast<double>(n) * static_cast<double>(n));
}

}  // namespace

double distance_correlation(MatrixRef z, MatrixRef z2) {
  if (z.rows() != z2.rows()) {
    throw DataError("distance_correlation: instance counts differ");
  }
  if (z.rows() < 2) throw DataError("distance_correlation: need at least 2 instances");

  RsmMatrix a = double_center(build_rsm(z, RsmKind::euclidean_distance));
  RsmMatrix b = double_center(build_rsm(z2, RsmKind::euclidean_distance));
  double vxx = dcov_squared(a.values, a.values);
  double vyy = dcov_squared(b.values, b.values);
  if (vxx <= 0.0 || vyy <= 0.0) {
    throw NumericError("distance_correlation: zero self-covariance (coincident points)");
  }
  double vxy = std::max(0.0, dcov_squared(a.values, b.values));
  return std::sqrt(vxy / std::sqrt(vxx * vyy));
}

NeighborIndex knn_index(MatrixRef z, int k) {
  if (k < 1) throw DataError("knn_index: k must be >= 1");
  const Index n = z.rows();
  const Vector norms = row_norms(z);
  const Index list_len = std::min<Index>(k, n - 1);

  NeighborIndex index;
  index.k = k;
  index.neighbors.resize(static_cast<std::size_t>(n));
  std::vector<std::pair<double, Index>> ranked;
  for (Index i = 0; i < n; ++i) {
    ranked.clear();
    ranked.reserve(static_cast<std::size_t>(n - 1));
    for (Index j = 0; j < n; ++j) {
      if (j == i) continue;
      double key = norms(i) > 0.0 && norms(j) > 0.0
                       ? z.row(i).dot(z.row(j)) / (norms(i) * norms(j))
                       : kZeroNormKey;
      ranked.emplace_back(key, j);
    }
    auto cmp = [](const auto& a, const auto& b) {
      if (a.first != b.first) return a.first > b.first;
      return a.second < b.second;
    };
    std::partial_sort(ranked.begin(), ranked.begin() + list_len, ranked.end(), cmp);
    auto& list = index.neighbors[static_cast<std::size_t>(i)];
    list.reserve(static_cast<std::size_t>(list_len));
    for (Index t = 0; t < list_len; ++t) list.push_back(ranked[static_cast<std::size_t>(t)].second);
  }
  return index;
}

double knn_jaccard(MatrixRef z, MatrixRef z2, int k) {
  if (z.rows() != z2.rows()) throw DataError("knn_jaccard: instance counts differ");
  NeighborIndex na = knn_index(z, k);
  NeighborIndex nb = knn_index(z2, k);

  KahanSum acc;
  std::vector<Index> a, b, tmp;
  for (Index i = 0; i < z.rows(); ++i) {
    a = na.neighbors[static_cast<std::size_t>(i)];
    b = nb.neighbors[static_cast<std::size_t>(i)];
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    tmp.clear();
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(tmp));
    const double inter = static_cast<double>(tmp.size());
    const double uni = static_cast<double>(a.size() + b.size()) - inter;
    acc.add(uni > 0.0 ? inter / uni : 0.0);
  }
  return acc.value() / static_cast<double>(z.rows());
}

double second_order_cosine(MatrixRef z, MatrixRef z2, int k) {
  if (z.rows() != z2.rows()) {
    throw DataError("second_order_cosine: instance counts differ");
  }
  NeighborIndex na = knn_index(z, k);
  NeighborIndex nb = knn_index(z2, k);
  const Vector norms_a = row_norms(z);
  const Vector norms_b = row_norms(z2);

  auto profile_entry = [](MatrixRef m, const Vector& norms, Index i, Index j) {
    return norms(i) > 0.0 && norms(j) > 0.0
               ? m.row(i).dot(m.row(j)) / (norms(i) * norms(j))
               : 0.0;
  };

  KahanSum acc;
  std::vector<Index> uni;
  for (Index i = 0; i < z.rows(); ++i) {
    const auto& a = na.neighbors[static_cast<std::size_t>(i)];
    const auto& b = nb.neighbors[static_cast<std::size_t>(i)];
    uni.assign(a.begin(), a.end());
    uni.insert(uni.end(), b.begin(), b.end());
    std::sort(uni.begin(), uni.end());
    uni.erase(std::unique(uni.begin(), uni.end()), uni.end());

    Vector pa(static_cast<Index>(uni.size()));
    Vector pb(static_cast<Index>(uni.size()));
    for (std::size_t t = 0; t < uni.size(); ++t) {
      pa(static_cast<Index>(t)) = profile_entry(z, norms_a, i, uni[t]);
      pb(static_cast<Index>(t)) = profile_entry(z2, norms_b, i, uni[t]);
    }
    acc.add(cosine_similarity(pa, pb));
  }
  return acc.value() / static_cast<double>(z.rows());
}

}  // namespace embstab
