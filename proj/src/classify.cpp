#include "embstab/classify.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "embstab/io_util.hpp"
#include "embstab/kahan.hpp"

namespace embstab {

namespace {

// Row-wise softmax with max subtraction.
Matrix softmax_rows(const Matrix& logits) {
  Matrix p = logits;
  for (Index i = 0; i < p.rows(); ++i) {
    double mx = p.row(i).maxCoeff();
    p.row(i) = (p.row(i).array() - mx).exp();
    p.row(i) /= p.row(i).sum();
  }
  return p;
}

Matrix gather_rows(MatrixRef m, const std::vector<Index>& rows) {
  Matrix out(static_cast<Index>(rows.size()), m.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.row(static_cast<Index>(i)) = m.row(rows[i]);
  }
  return out;
}

}  // namespace

double logreg_loss(const Matrix& weights, const Vector& bias, MatrixRef x,
                   const std::vector<int>& y, double l2_strength) {
  const Index n = x.rows();
  Matrix logits = x * weights.transpose();
  logits.rowwise() += bias.transpose();
  KahanSum ce;
  for (Index i = 0; i < n; ++i) {
    double mx = logits.row(i).maxCoeff();
    double lse = mx + std::log((logits.row(i).array() - mx).exp().sum());
    ce.add(lse - logits(i, y[static_cast<std::size_t>(i)]));
  }
  return ce.value() / static_cast<double>(n) +
         0.5 * l2_strength * weights.squaredNorm();
}

void logreg_gradient(const Matrix& weights, const Vector& bias, MatrixRef x,
                     const std::vector<int>& y, double l2_strength, Matrix& grad_w,
                     Vector& grad_b) {
  const Index n = x.rows();
  Matrix logits = x * weights.transpose();
  logits.rowwise() += bias.transpose();
  Matrix p = softmax_rows(logits);
  for (Index i = 0; i < n; ++i) p(i, y[static_cast<std::size_t>(i)]) -= 1.0;
  p /= static_cast<double>(n);
  grad_w = p.transpose() * x + l2_strength * weights;
  grad_b = p.colwise().sum().transpose();
}

LogRegModel train_logreg(MatrixRef embeddings, const std::vector<int>& labels,
                         const SplitSpec& split, const TrainConfig& config,
                         TrainTrace* trace) {
  if (config.max_epochs < 1) throw DataError("train_logreg: max_epochs must be >= 1");
  if (!(config.learning_rate > 0.0)) {
    throw DataError("train_logreg: learning_rate must be positive");
  }
  if (config.l2_strength < 0.0) throw DataError("train_logreg: negative l2_strength");

  const auto train_rows = mask_indices(split.train_mask);
  if (train_rows.empty()) throw DataError("train_logreg: empty train mask");
  if (static_cast<Index>(labels.size()) != embeddings.rows()) {
    throw DataError("train_logreg: label vector length mismatch");
  }
  auto require_labeled = [&](const std::vector<bool>& mask) {
    for (Index i : mask_indices(mask)) {
      if (labels[static_cast<std::size_t>(i)] < 0) {
        throw DataError("train_logreg: unlabeled node in split mask");
      }
    }
  };
  require_labeled(split.train_mask);
  require_labeled(split.val_mask);
  require_labeled(split.test_mask);

  int num_classes = 0;
  for (int c : labels) num_classes = std::max(num_classes, c + 1);
  std::set<int> train_classes;
  std::vector<int> y;
  y.reserve(train_rows.size());
  for (Index i : train_rows) {
    y.push_back(labels[static_cast<std::size_t>(i)]);
    train_classes.insert(y.back());
  }
  if (train_classes.size() < 2) {
    throw DataError("train_logreg: training set contains a single class");
  }

  // Standardize per dimension from train statistics so one learning rate
  // works across the whole dimension grid.
  Matrix x = gather_rows(embeddings, train_rows);
  const Index n = x.rows();
  const Index d = x.cols();
  Vector mean = x.colwise().mean();
  x.rowwise() -= mean.transpose();
  Vector sigma(d);
  for (Index j = 0; j < d; ++j) {
    double var = x.col(j).squaredNorm() / static_cast<double>(n);
    sigma(j) = var > 1e-24 ? std::sqrt(var) : 1.0;
  }
  x.array().rowwise() /= sigma.transpose().array();

  Matrix w = Matrix::Zero(num_classes, d);
  Vector b = Vector::Zero(num_classes);
  Matrix grad_w;
  Vector grad_b;
  // The ridge term bounds the usable step size: plain GD diverges once
  // lr * l2 exceeds 2, and the default grid reaches l2 = 1e8.
  const double lr = std::min(config.learning_rate, 1.0 / (1.0 + config.l2_strength));
  if (trace) {
    trace->losses.clear();
    trace->epochs_run = 0;
  }
  for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
    if (trace) {
      trace->losses.push_back(logreg_loss(w, b, x, y, config.l2_strength));
      trace->epochs_run = epoch + 1;
    }
    logreg_gradient(w, b, x, y, config.l2_strength, grad_w, grad_b);
    double gnorm = std::sqrt(grad_w.squaredNorm() + grad_b.squaredNorm());
    if (!std::isfinite(gnorm)) throw NumericError("train_logreg: non-finite gradient");
    if (gnorm < config.tolerance) break;
    w -= lr * grad_w;
    b -= lr * grad_b;
  }
  if (!w.allFinite() || !b.allFinite()) {
    throw NumericError("train_logreg: non-finite parameters after training");
  }

  // Fold the standardization into the raw-space model.
  LogRegModel model;
  model.weights = w.array().rowwise() / sigma.transpose().array();
  model.bias = b - model.weights * mean;
  return model;
}

OutputMatrix predict_proba(const LogRegModel& model, MatrixRef embeddings,
                           const std::vector<bool>& mask) {
  if (model.weights.cols() != embeddings.cols()) {
    throw DataError("predict_proba: model dimension does not match embedding");
  }
  if (static_cast<Index>(mask.size()) != embeddings.rows()) {
    throw DataError("predict_proba: mask length does not match embedding rows");
  }
  Matrix x = gather_rows(embeddings, mask_indices(mask));
  Matrix logits = x * model.weights.transpose();
  logits.rowwise() += model.bias.transpose();
  return OutputMatrix{softmax_rows(logits)};
}

double accuracy(const OutputMatrix& o, const LabelVector& labels) {
  return 1.0 - error_rate(o, labels);
}

double select_l2(MatrixRef embeddings, const std::vector<int>& labels,
                 const SplitSpec& split, const std::vector<double>& grid,
                 const TrainConfig& base_config) {
  if (grid.empty()) throw DataError("select_l2: empty grid");
  const auto val_rows = mask_indices(split.val_mask);
  if (val_rows.empty()) throw DataError("select_l2: empty validation mask");
  LabelVector val_labels;
  val_labels.reserve(val_rows.size());
  for (Index i : val_rows) val_labels.push_back(labels[static_cast<std::size_t>(i)]);

  double best_l2 = grid.front();
  double best_acc = -1.0;
  for (double l2 : grid) {
    TrainConfig cfg = base_config;
    cfg.l2_strength = l2;
    double acc;
    try {
      LogRegModel model = train_logreg(embeddings, labels, split, cfg);
      acc = accuracy(predict_proba(model, embeddings, split.val_mask), val_labels);
    } catch (const NumericError&) {
      continue;  // diverged grid point; never a candidate
    }
    if (acc > best_acc || (acc == best_acc && l2 > best_l2)) {
      best_acc = acc;
      best_l2 = l2;
    }
  }
  if (best_acc < 0.0) throw NumericError("select_l2: every grid point diverged");
  return best_l2;
}

void save_model(const LogRegModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write model file: " + path);
  out << "LRM1 " << model.weights.rows() << " " << model.weights.cols() << "\n";
  for (Index i = 0; i < model.weights.rows(); ++i) {
    for (Index j = 0; j < model.weights.cols(); ++j) {
      if (j > 0) out << " ";
      out << format_g17(model.weights(i, j));
    }
    out << "\n";
  }
  for (Index i = 0; i < model.bias.size(); ++i) {
    if (i > 0) out << " ";
    out << format_g17(model.bias(i));
  }
  out << "\n";
  if (!out) throw DataError("write failed: " + path);
}

LogRegModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open model file: " + path);
  std::string magic;
  Index c = -1, d = -1;
  if (!(in >> magic >> c >> d) || magic != "LRM1" || c < 1 || d < 1) {
    throw DataError(path + ": malformed LRM1 header");
  }
  LogRegModel model;
  model.weights.resize(c, d);
  model.bias.resize(c);
  for (Index i = 0; i < c; ++i) {
    for (Index j = 0; j < d; ++j) {
      if (!(in >> model.weights(i, j))) throw DataError(path + ": short weight matrix");
    }
  }
  for (Index i = 0; i < c; ++i) {
    if (!(in >> model.bias(i))) throw DataError(path + ": short bias row");
  }
  if (!model.weights.allFinite() || !model.bias.allFinite()) {
    throw DataError(path + ": non-finite model entries");
  }
  return model;
}

}  // namespace embstab
