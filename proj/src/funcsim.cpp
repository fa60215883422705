#include "embstab/funcsim.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "embstab/io_util.hpp"
#include "embstab/kahan.hpp"

namespace embstab {

namespace {

void require_same_shape(const OutputMatrix& a, const OutputMatrix& b) {
  if (a.values.rows() != b.values.rows() || a.values.cols() != b.values.cols()) {
    throw DataError("output shapes differ");
  }
}

void require_label_length(const OutputMatrix& o, const LabelVector& labels) {
  if (static_cast<Index>(labels.size()) != o.num_instances()) {
    throw DataError("label count does not match output rows");
  }
  for (int c : labels) {
    if (c < 0 || c >= o.num_classes()) throw DataError("label out of class range");
  }
}

constexpr double kProbFloor = 1e-12;

}  // namespace

void validate_output(const OutputMatrix& o) {
  for (Index i = 0; i < o.values.rows(); ++i) {
    KahanSum row;
    for (Index j = 0; j < o.values.cols(); ++j) {
      double v = o.values(i, j);
      if (!(v >= -1e-9 && v <= 1.0 + 1e-9)) {
        throw DataError("output entry outside [0,1] at row " + std::to_string(i));
      }
      row.add(v);
    }
    if (std::abs(row.value() - 1.0) > 1e-6) {
      throw DataError("output row " + std::to_string(i) + " does not sum to 1");
    }
  }
}

std::vector<int> hard_predictions(const OutputMatrix& o) {
  std::vector<int> preds(static_cast<std::size_t>(o.num_instances()));
  for (Index i = 0; i < o.num_instances(); ++i) {
    int best = 0;
    for (Index j = 1; j < o.num_classes(); ++j) {
      if (o.values(i, j) > o.values(i, best)) best = static_cast<int>(j);
    }
    preds[static_cast<std::size_t>(i)] = best;
  }
  return preds;
}

double disagreement(const OutputMatrix& a, const OutputMatrix& b) {
  require_same_shape(a, b);
  auto pa = hard_predictions(a);
  auto pb = hard_predictions(b);
  Index differ = 0;
  for (std::size_t i = 0; i < pa.size(); ++i) {
    if (pa[i] != pb[i]) ++differ;
  }
  return static_cast<double>(differ) / static_cast<double>(pa.size());
}

double error_rate(const OutputMatrix& o, const LabelVector& labels) {
  require_label_length(o, labels);
  auto preds = hard_predictions(o);
  Index wrong = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (preds[i] != labels[i]) ++wrong;
  }
  return static_cast<double>(wrong) / static_cast<double>(preds.size());
}

double minmax_normalized_disagreement(const OutputMatrix& a, const OutputMatrix& b,
                                      const LabelVector& labels) {
  require_same_shape(a, b);
  const double d = disagreement(a, b);
  const double e1 = error_rate(a, labels);
  const double e2 = error_rate(b, labels);
  const double d_min = std::abs(e1 - e2);
  const double d_max = std::min(e1 + e2, 1.0);
  if (d_max - d_min <= 1e-15) {
    throw NumericError("minmax_normalized_disagreement: undefined normalization "
                       "(min and max possible disagreement coincide)");
  }
  return (d - d_min) / (d_max - d_min);
}

double stable_core(const std::vector<OutputMatrix>& outputs) {
  if (outputs.size() < 2) throw DataError("stable_core: need at least 2 outputs");
  for (const auto& o : outputs) require_same_shape(outputs.front(), o);

  std::vector<std::vector<int>> preds;
  preds.reserve(outputs.size());
  for (const auto& o : outputs) preds.push_back(hard_predictions(o));

  const std::size_t n = preds.front().size();
  Index agree = 0;
  for (std::size_t i = 0; i < n; ++i) {
    bool all_same = true;
    for (std::size_t m = 1; m < preds.size() && all_same; ++m) {
      all_same = preds[m][i] == preds[0][i];
    }
    if (all_same) ++agree;
  }
  return static_cast<double>(agree) / static_cast<double>(n);
}

double mean_jsd(const OutputMatrix& a, const OutputMatrix& b) {
  require_same_shape(a, b);
  validate_output(a);
  validate_output(b);

  const Index n = a.num_instances();
  const Index c = a.num_classes();
  Vector p(c), q(c);
  KahanSum total;
  for (Index i = 0; i < n; ++i) {
    // Clamp away classifier underflow, then renormalize.
    for (Index j = 0; j < c; ++j) {
      p(j) = std::min(1.0, std::max(kProbFloor, a.values(i, j)));
      q(j) = std::min(1.0, std::max(kProbFloor, b.values(i, j)));
    }
    p /= p.sum();
    q /= q.sum();
    KahanSum row;
    for (Index j = 0; j < c; ++j) {
      const double m = 0.5 * (p(j) + q(j));
      row.add(p(j) * std::log(p(j) / m));
      row.add(q(j) * std::log(q(j) / m));
    }
    total.add(row.value());
  }
  return std::max(0.0, total.value() / (2.0 * static_cast<double>(n)));
}

void write_output(const OutputMatrix& o, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write output file: " + path);
  out << "OUT1 " << o.num_instances() << " " << o.num_classes() << "\n";
  for (Index i = 0; i < o.num_instances(); ++i) {
    for (Index j = 0; j < o.num_classes(); ++j) {
      if (j > 0) out << " ";
      out << format_g17(o.values(i, j));
    }
    out << "\n";
  }
  if (!out) throw DataError("write failed: " + path);
}

OutputMatrix read_output(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open output file: " + path);
  std::string magic;
  Index n = -1, c = -1;
  if (!(in >> magic >> n >> c) || magic != "OUT1" || n < 0 || c < 1) {
    throw DataError(path + ": malformed OUT1 header");
  }
  Matrix values(n, c);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < c; ++j) {
      double v;
      if (!(in >> v)) {
        throw DataError(path + ": expected " + std::to_string(n * c) + " values");
      }
      values(i, j) = v;
    }
  }
  std::string extra;
  if (in >> extra) throw DataError(path + ": trailing content");
  OutputMatrix o{std::move(values)};
  validate_output(o);
  return o;
}

void write_eval_labels(const std::vector<Index>& nodes, const LabelVector& labels,
                       const std::string& path) {
  if (nodes.size() != labels.size()) {
    throw DataError("write_eval_labels: node and label counts differ");
  }
  std::ofstream out(path);
  if (!out) throw DataError("cannot write label file: " + path);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    out << nodes[i] << " " << labels[i] << "\n";
  }
  if (!out) throw DataError("write failed: " + path);
}

LabelVector read_eval_labels(const std::string& path, Index expected_rows) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open label file: " + path);
  LabelVector labels;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    long long u = -1, c = -1;
    if (std::sscanf(line.c_str(), "%lld %lld", &u, &c) != 2 || u < 0 || c < 0) {
      throw DataError(path + ":" + std::to_string(line_no) + ": expected 'node class'");
    }
    labels.push_back(static_cast<int>(c));
  }
  if (expected_rows >= 0 && static_cast<Index>(labels.size()) != expected_rows) {
    throw DataError(path + ": expected " + std::to_string(expected_rows) +
                    " labels, found " + std::to_string(labels.size()));
  }
  return labels;
}

}  // namespace embstab
