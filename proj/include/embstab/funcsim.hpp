#pragma once

#include <string>
#include <vector>

#include "embstab/types.hpp"

namespace embstab {

/// n x C matrix of class-probability scores; every row sums to 1.
struct OutputMatrix {
  Matrix values;

  Index num_instances() const { return values.rows(); }
  Index num_classes() const { return values.cols(); }
};

using LabelVector = std::vector<int>;

/// Throws DataError unless rows are probability vectors (entries in [0,1],
/// row sums within 1e-6 of 1).
void validate_output(const OutputMatrix& o);

/// Row-wise argmax, ties resolved to the lowest class index.
std::vector<int> hard_predictions(const OutputMatrix& o);

/// Fraction of instances whose hard predictions differ.
double disagreement(const OutputMatrix& a, const OutputMatrix& b);

double error_rate(const OutputMatrix& o, const LabelVector& labels);

/// Observed disagreement rescaled between the minimum |e1 - e2| and maximum
/// min(e1 + e2, 1) possible given the two error rates. Throws NumericError
/// when the bounds coincide (e.g. both models perfect).
double minmax_normalized_disagreement(const OutputMatrix& a, const OutputMatrix& b,
                                      const LabelVector& labels);

/// Fraction of instances on which every output in the group issues the same
/// hard prediction. Requires group size >= 2.
double stable_core(const std::vector<OutputMatrix>& outputs);

/// Mean Jensen-Shannon divergence across instances, natural log, in
/// [0, ln 2]. Rows are clamped to [1e-12, 1] and renormalized first.
double mean_jsd(const OutputMatrix& a, const OutputMatrix& b);

/// Text format: "OUT1 <n> <C>" header, then n rows of C decimal floats.
void write_output(const OutputMatrix& o, const std::string& path);
OutputMatrix read_output(const std::string& path);

/// Sibling label file for an output matrix: "node_index class" per line, one
/// line per evaluated instance, in row order.
void write_eval_labels(const std::vector<Index>& nodes, const LabelVector& labels,
                       const std::string& path);
LabelVector read_eval_labels(const std::string& path, Index expected_rows);

}  // namespace embstab
