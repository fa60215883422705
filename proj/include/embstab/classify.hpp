#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "embstab/funcsim.hpp"
#include "embstab/graph.hpp"
#include "embstab/types.hpp"

namespace embstab {

/// Multinomial logistic regression in raw feature space: logits = W z + b.
struct LogRegModel {
  Matrix weights;  // C x D
  Vector bias;     // C
};

struct TrainConfig {
  double l2_strength = 1e-4;
  double learning_rate = 0.5;
  int max_epochs = 500;
  double tolerance = 1e-6;
  std::uint64_t seed = 0;  // kept for the record; zero init makes training seed-free
};

struct TrainTrace {
  std::vector<double> losses;
  int epochs_run = 0;
};

/// Mean softmax cross-entropy over rows of x plus (l2/2)||W||^2 (bias
/// unpenalized). Exposed so tests can finite-difference it.
double logreg_loss(const Matrix& weights, const Vector& bias, MatrixRef x,
                   const std::vector<int>& y, double l2_strength);

void logreg_gradient(const Matrix& weights, const Vector& bias, MatrixRef x,
                     const std::vector<int>& y, double l2_strength, Matrix& grad_w,
                     Vector& grad_b);

/// Full-batch gradient descent on the train split. Features are standardized
/// with train-split statistics internally; the returned model folds the
/// standardization back so it applies to raw embedding rows.
LogRegModel train_logreg(MatrixRef embeddings, const std::vector<int>& labels,
                         const SplitSpec& split, const TrainConfig& config,
                         TrainTrace* trace = nullptr);

/// Softmax outputs for the masked nodes, in ascending node order.
OutputMatrix predict_proba(const LogRegModel& model, MatrixRef embeddings,
                           const std::vector<bool>& mask);

double accuracy(const OutputMatrix& o, const LabelVector& labels);

/// Trains one model per grid value and returns the l2 strength with the best
/// validation accuracy; ties go to the stronger regularization.
double select_l2(MatrixRef embeddings, const std::vector<int>& labels,
                 const SplitSpec& split, const std::vector<double>& grid,
                 const TrainConfig& base_config);

/// Text format: "LRM1 <C> <D>" header, C weight rows, then the bias row.
void save_model(const LogRegModel& model, const std::string& path);
LogRegModel load_model(const std::string& path);

}  // namespace embstab
