#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "flowrl/rng.hpp"
#include "flowrl/types.hpp"

namespace flowrl {

// Glorot/Xavier uniform: values in +-sqrt(6 / (fanIn + fanOut)), filled in
// storage order from the seeded generator.
Matrix xavierInit(int rows, int cols, int fanIn, int fanOut, Rng& rng);
inline Matrix xavierInit(int rows, int cols, Rng& rng) {
  return xavierInit(rows, cols, /*fanIn=*/cols, /*fanOut=*/rows, rng);
}

template <class Derived>
auto relu(const Eigen::MatrixBase<Derived>& x) {
  return x.cwiseMax(Scalar(0));
}

// Numerically stable softmax; strictly positive, sums to 1.
Vector softmax(const Vector& x);
Matrix softmaxRows(const Matrix& x);

Vector flattenRowMajor(const Matrix& m);
Matrix unflattenRowMajor(const Vector& v, int rows, int cols);

// out(i, f) = sum_j s(i, j) * x(j, f) over the nonzero entries of row i, with
// the addends summed in ascending value order. The sorted summation makes the
// result invariant under a consistent relabeling of the nodes, which plain
// matrix products do not guarantee in floating point.
Matrix aggregateOverNodes(const Matrix& s, const Matrix& x);

// Flat views over every parameter (and its gradient) of a model, in a fixed
// order; lets the optimizer and the finite-difference checker treat models
// uniformly.
struct ParamRefs {
  std::vector<std::string> names;
  std::vector<Eigen::Map<Vector>> values;
  std::vector<Eigen::Map<Vector>> grads;

  void append(const std::string& name, Matrix& value, Matrix& grad) {
    names.push_back(name);
    values.emplace_back(value.data(), value.size());
    grads.emplace_back(grad.data(), grad.size());
  }
  void append(const std::string& name, Vector& value, Vector& grad) {
    names.push_back(name);
    values.emplace_back(value.data(), value.size());
    grads.emplace_back(grad.data(), grad.size());
  }
  std::size_t count() const { return values.size(); }
  Eigen::Index totalSize() const;
};

Scalar gradientNorm(const ParamRefs& params);
// No-op when maxNorm <= 0.
void clipGradients(ParamRefs& params, Scalar maxNorm);
// value <- value - lr * grad
void sgdStep(ParamRefs& params, Scalar lr);

// One graph-convolution layer: relu(aggregate(s, x * W)). No bias.
class GraphConvLayer {
 public:
  GraphConvLayer(int inFeatures, int outFeatures, Rng& rng);

  const Matrix& forward(const Matrix& s, const Matrix& x);
  // Accumulates into weightGrad; returns the gradient w.r.t. x.
  Matrix backward(const Matrix& s, const Matrix& dOut);
  void zeroGrad() { weightGrad.setZero(); }

  Matrix weight;      // inFeatures x outFeatures
  Matrix weightGrad;

  int inFeatures() const { return static_cast<int>(weight.rows()); }
  int outFeatures() const { return static_cast<int>(weight.cols()); }
  const Matrix& output() const { return out_; }

 private:
  Matrix x_;     // cached input
  Matrix mask_;  // relu mask of the pre-activation
  Matrix out_;
};

// Concatenates the per-layer node embeddings and sorts rows descending by the
// final layer's feature sum, ties broken by progressively earlier layers and
// finally by node id. Emits all N rows plus the permutation used.
struct SortPoolResult {
  Matrix pooled;
  std::vector<int> order;  // pooled.row(r) == concat.row(order[r])
};

class SortPool {
 public:
  SortPoolResult forward(const std::vector<const Matrix*>& layerOutputs);
  // Splits the pooled gradient back into per-layer gradients, routed through
  // the stored permutation.
  std::vector<Matrix> backward(const Matrix& dPooled) const;

  static std::vector<int> sortOrder(const std::vector<const Matrix*>& layerOutputs);

 private:
  std::vector<int> order_;
  std::vector<int> widths_;
};

// Valid 1-D convolution over a (channels x length) sequence. Weight row r
// holds filter r, laid out channel-major: index = channel * width + tap.
class Conv1dLayer {
 public:
  Conv1dLayer(int inChannels, int outChannels, int width, int stride, bool reluActivation,
              Rng& rng);

  static int outputLength(int inputLength, int width, int stride) {
    return (inputLength - width) / stride + 1;
  }

  const Matrix& forward(const Matrix& in);
  Matrix backward(const Matrix& dOut);
  void zeroGrad() {
    weightGrad.setZero();
    biasGrad.setZero();
  }

  Matrix weight;  // outChannels x (inChannels * width)
  Vector bias;    // outChannels
  Matrix weightGrad;
  Vector biasGrad;

  int inChannels() const { return inChannels_; }
  int outChannels() const { return static_cast<int>(weight.rows()); }
  int width() const { return width_; }
  int stride() const { return stride_; }

 private:
  int inChannels_;
  int width_;
  int stride_;
  bool relu_;
  int inLength_ = 0;
  Matrix cols_;  // im2col buffer, (inChannels * width) x outLength
  Matrix mask_;
  Matrix out_;
};

// Max pooling over the length dimension, per channel.
class MaxPool1dLayer {
 public:
  MaxPool1dLayer(int width, int stride) : width_(width), stride_(stride) {}

  const Matrix& forward(const Matrix& in);
  Matrix backward(const Matrix& dOut) const;

  int width() const { return width_; }
  int stride() const { return stride_; }

 private:
  int width_;
  int stride_;
  int inLength_ = 0;
  Eigen::Matrix<int, Eigen::Dynamic, Eigen::Dynamic> argmax_;
  Matrix out_;
};

// Fully connected layer, optionally relu-activated.
class DenseLayer {
 public:
  DenseLayer(int inDim, int outDim, bool reluActivation, Rng& rng);

  const Vector& forward(const Vector& x);
  Vector backward(const Vector& dOut);
  void zeroGrad() {
    weightGrad.setZero();
    biasGrad.setZero();
  }

  Matrix weight;  // outDim x inDim
  Vector bias;
  Matrix weightGrad;
  Vector biasGrad;

 private:
  bool relu_;
  Vector x_;
  Vector mask_;
  Vector out_;
};

// Central finite differences of `loss` w.r.t. every parameter, compared
// against the analytic gradients already accumulated in params.grads. The
// loss callable must re-run the forward pass from scratch.
struct GradCheckEntry {
  std::string name;
  Scalar maxRelError = 0;
};

struct GradCheckReport {
  Scalar maxRelError = 0;
  std::vector<GradCheckEntry> perParam;
  bool pass(Scalar tolerance) const { return maxRelError < tolerance; }
};

inline Scalar relativeError(Scalar analytic, Scalar numeric) {
  const Scalar denom = std::max({std::abs(analytic), std::abs(numeric), Scalar(1e-6)});
  return std::abs(analytic - numeric) / denom;
}

template <class LossFn>
GradCheckReport checkGradients(ParamRefs& params, LossFn loss, Scalar step = 1e-6) {
  GradCheckReport report;
  for (std::size_t p = 0; p < params.count(); ++p) {
    GradCheckEntry entry{params.names[p], 0};
    auto& value = params.values[p];
    for (Eigen::Index i = 0; i < value.size(); ++i) {
      const Scalar saved = value[i];
      value[i] = saved + step;
      const Scalar up = loss();
      value[i] = saved - step;
      const Scalar down = loss();
      value[i] = saved;
      const Scalar numeric = (up - down) / (2 * step);
      entry.maxRelError = std::max(entry.maxRelError, relativeError(params.grads[p][i], numeric));
    }
    report.maxRelError = std::max(report.maxRelError, entry.maxRelError);
    report.perParam.push_back(std::move(entry));
  }
  return report;
}

}  // namespace flowrl
