#pragma once

// Reference implementations used only by tests. Everything here is written
// with plain loops, independent of the library's computation paths, so a
// bug cannot cancel out on both sides of an assertion.

#include <Eigen/Dense>
#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "embstab/rng.hpp"
#include "embstab/types.hpp"

namespace oracle {

using embstab::Index;
using embstab::Matrix;
using embstab::Rng;
using embstab::Vector;

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  double na = std::sqrt(dot(a, a));
  double nb = std::sqrt(dot(b, b));
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot(a, b) / (na * nb);
}

inline std::vector<double> row_of(const Matrix& m, Index i) {
  std::vector<double> out(static_cast<std::size_t>(m.cols()));
  for (Index j = 0; j < m.cols(); ++j) out[static_cast<std::size_t>(j)] = m(i, j);
  return out;
}

// Exhaustive k-NN by cosine similarity, ties by ascending index, zero-norm
// rows ranked last.
inline std::vector<std::vector<Index>> knn_sets(const Matrix& z, int k) {
  const Index n = z.rows();
  std::vector<std::vector<Index>> out(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    std::vector<std::pair<double, Index>> scored;
    for (Index j = 0; j < n; ++j) {
      if (j == i) continue;
      double c = cosine(row_of(z, i), row_of(z, j));
      double na = std::sqrt(dot(row_of(z, i), row_of(z, i)));
      double nb = std::sqrt(dot(row_of(z, j), row_of(z, j)));
      if (na == 0.0 || nb == 0.0) c = -2.0;
      scored.emplace_back(c, j);
    }
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
      if (a.first != b.first) return a.first > b.first;
      return a.second < b.second;
    });
    const std::size_t take = std::min<std::size_t>(static_cast<std::size_t>(k),
                                                   scored.size());
    for (std::size_t t = 0; t < take; ++t) {
      out[static_cast<std::size_t>(i)].push_back(scored[t].second);
    }
  }
  return out;
}

inline double knn_jaccard(const Matrix& z, const Matrix& z2, int k) {
  auto sa = knn_sets(z, k);
  auto sb = knn_sets(z2, k);
  double total = 0.0;
  for (std::size_t i = 0; i < sa.size(); ++i) {
    std::set<Index> a(sa[i].begin(), sa[i].end());
    std::set<Index> b(sb[i].begin(), sb[i].end());
    std::set<Index> uni = a;
    uni.insert(b.begin(), b.end());
    std::size_t inter = 0;
    for (Index x : a) inter += b.count(x);
    total += uni.empty() ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni.size());
  }
  return total / static_cast<double>(sa.size());
}

inline double second_order_cosine(const Matrix& z, const Matrix& z2, int k) {
  auto sa = knn_sets(z, k);
  auto sb = knn_sets(z2, k);
  double total = 0.0;
  for (Index i = 0; i < z.rows(); ++i) {
    std::set<Index> uni(sa[static_cast<std::size_t>(i)].begin(),
                        sa[static_cast<std::size_t>(i)].end());
    uni.insert(sb[static_cast<std::size_t>(i)].begin(),
               sb[static_cast<std::size_t>(i)].end());
    std::vector<double> pa, pb;
    for (Index j : uni) {  // std::set iterates in ascending index order
      pa.push_back(cosine(row_of(z, i), row_of(z, j)));
      pb.push_back(cosine(row_of(z2, i), row_of(z2, j)));
    }
    total += cosine(pa, pb);
  }
  return total / static_cast<double>(z.rows());
}

// Szekely sample distance correlation via explicit double centering.
inline double distance_correlation(const Matrix& z, const Matrix& z2) {
  const Index n = z.rows();
  auto dist_matrix = [&](const Matrix& m) {
    std::vector<std::vector<double>> d(static_cast<std::size_t>(n),
                                       std::vector<double>(static_cast<std::size_t>(n)));
    for (Index i = 0; i < n; ++i) {
      for (Index j = 0; j < n; ++j) {
        double s = 0.0;
        for (Index c = 0; c < m.cols(); ++c) {
          s += (m(i, c) - m(j, c)) * (m(i, c) - m(j, c));
        }
        d[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = std::sqrt(s);
      }
    }
    return d;
  };
  auto center = [&](std::vector<std::vector<double>> d) {
    std::vector<double> rm(static_cast<std::size_t>(n), 0.0);
    std::vector<double> cm(static_cast<std::size_t>(n), 0.0);
    double gm = 0.0;
    for (Index i = 0; i < n; ++i) {
      for (Index j = 0; j < n; ++j) {
        rm[static_cast<std::size_t>(i)] += d[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        cm[static_cast<std::size_t>(j)] += d[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        gm += d[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      }
    }
    for (Index i = 0; i < n; ++i) {
      rm[static_cast<std::size_t>(i)] /= static_cast<double>(n);
      cm[static_cast<std::size_t>(i)] /= static_cast<double>(n);
    }
    gm /= static_cast<double>(n * n);
    for (Index i = 0; i < n; ++i) {
      for (Index j = 0; j < n; ++j) {
        d[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] +=
            gm - rm[static_cast<std::size_t>(i)] - cm[static_cast<std::size_t>(j)];
      }
    }
    return d;
  };
  auto dcov2 = [&](const std::vector<std::vector<double>>& a,
                   const std::vector<std::vector<double>>& b) {
    double s = 0.0;
    for (Index i = 0; i < n; ++i) {
      for (Index j = 0; j < n; ++j) {
        s += a[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] *
             b[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      }
    }
    return s / static_cast<double>(n * n);
  };
  auto a = center(dist_matrix(z));
  auto b = center(dist_matrix(z2));
  return std::sqrt(dcov2(a, b) / std::sqrt(dcov2(a, a) * dcov2(b, b)));
}

// Per-row analytic Jensen-Shannon divergence, natural log, no clamping.
inline double mean_jsd(const Matrix& p, const Matrix& q) {
  double total = 0.0;
  for (Index i = 0; i < p.rows(); ++i) {
    double row = 0.0;
    for (Index j = 0; j < p.cols(); ++j) {
      double m = 0.5 * (p(i, j) + q(i, j));
      if (p(i, j) > 0.0) row += p(i, j) * std::log(p(i, j) / m);
      if (q(i, j) > 0.0) row += q(i, j) * std::log(q(i, j) / m);
    }
    total += row;
  }
  return total / (2.0 * static_cast<double>(p.rows()));
}

inline std::vector<int> argmax_rows(const Matrix& o) {
  std::vector<int> out;
  for (Index i = 0; i < o.rows(); ++i) {
    int best = 0;
    for (Index j = 1; j < o.cols(); ++j) {
      if (o(i, j) > o(i, best)) best = static_cast<int>(j);
    }
    out.push_back(best);
  }
  return out;
}

inline double disagreement(const Matrix& a, const Matrix& b) {
  auto pa = argmax_rows(a);
  auto pb = argmax_rows(b);
  double differ = 0.0;
  for (std::size_t i = 0; i < pa.size(); ++i) differ += pa[i] != pb[i] ? 1.0 : 0.0;
  return differ / static_cast<double>(pa.size());
}

inline double stable_core(const std::vector<Matrix>& outputs) {
  std::vector<std::vector<int>> preds;
  for (const auto& o : outputs) preds.push_back(argmax_rows(o));
  double agree = 0.0;
  for (std::size_t i = 0; i < preds.front().size(); ++i) {
    bool same = true;
    for (std::size_t m = 1; m < preds.size(); ++m) same = same && preds[m][i] == preds[0][i];
    agree += same ? 1.0 : 0.0;
  }
  return agree / static_cast<double>(preds.front().size());
}

// Haar-ish random orthogonal matrix: QR of a Gaussian matrix with the R
// diagonal signs folded into Q. May have determinant -1; O(D) is the target.
inline Matrix random_orthogonal(Index d, Rng& rng) {
  Matrix g(d, d);
  for (Index i = 0; i < d; ++i) {
    for (Index j = 0; j < d; ++j) g(i, j) = rng.gaussian();
  }
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Index j = 0; j < d; ++j) {
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  }
  return q;
}

inline Matrix random_matrix(Index n, Index d, Rng& rng, double scale = 1.0) {
  Matrix m(n, d);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < d; ++j) m(i, j) = scale * rng.gaussian();
  }
  return m;
}

// Random row-stochastic matrix (softmax of Gaussian logits).
inline Matrix random_output(Index n, Index c, Rng& rng, double sharpness = 2.0) {
  Matrix m(n, c);
  for (Index i = 0; i < n; ++i) {
    double mx = -1e300;
    for (Index j = 0; j < c; ++j) {
      m(i, j) = sharpness * rng.gaussian();
      mx = std::max(mx, m(i, j));
    }
    double sum = 0.0;
    for (Index j = 0; j < c; ++j) {
      m(i, j) = std::exp(m(i, j) - mx);
      sum += m(i, j);
    }
    for (Index j = 0; j < c; ++j) m(i, j) /= sum;
  }
  return m;
}

inline std::vector<Index> random_permutation(Index n, Rng& rng) {
  std::vector<Index> p(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) p[static_cast<std::size_t>(i)] = i;
  rng.shuffle(p);
  return p;
}

inline Matrix permute_rows(const Matrix& m, const std::vector<Index>& perm) {
  Matrix out(m.rows(), m.cols());
  for (Index i = 0; i < m.rows(); ++i) out.row(i) = m.row(perm[static_cast<std::size_t>(i)]);
  return out;
}

}  // namespace oracle
