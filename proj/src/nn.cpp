#include "flowrl/nn.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace flowrl {

Matrix xavierInit(int rows, int cols, int fanIn, int fanOut, Rng& rng) {
  require(rows >= 1 && cols >= 1, "xavierInit: empty shape");
  require(fanIn >= 1 && fanOut >= 1, "xavierInit: fan-in/fan-out must be positive");
  const Scalar limit = std::sqrt(6.0 / static_cast<Scalar>(fanIn + fanOut));
  Matrix m(rows, cols);
  Scalar* data = m.data();
  for (Eigen::Index i = 0; i < m.size(); ++i) data[i] = rng.uniform(-limit, limit);
  return m;
}

Vector softmax(const Vector& x) {
  require(x.size() > 0, "softmax: empty input");
  const Scalar shift = x.maxCoeff();
  Vector e = (x.array() - shift).exp();
  return e / e.sum();
}

Matrix softmaxRows(const Matrix& x) {
  Matrix out(x.rows(), x.cols());
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    out.row(r) = softmax(x.row(r).transpose()).transpose();
  }
  return out;
}

Vector flattenRowMajor(const Matrix& m) {
  Vector v(m.size());
  Eigen::Index k = 0;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) v[k++] = m(r, c);
  }
  return v;
}

Matrix unflattenRowMajor(const Vector& v, int rows, int cols) {
  require(v.size() == static_cast<Eigen::Index>(rows) * cols, "unflattenRowMajor: size mismatch");
  Matrix m(rows, cols);
  Eigen::Index k = 0;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) m(r, c) = v[k++];
  }
  return m;
}

Matrix aggregateOverNodes(const Matrix& s, const Matrix& x) {
  require(s.rows() == s.cols(), "aggregateOverNodes: adjacency must be square");
  require(s.cols() == x.rows(), "aggregateOverNodes: shape mismatch");
  const int n = static_cast<int>(s.rows());
  const int f = static_cast<int>(x.cols());
  Matrix out(n, f);
  std::vector<int> support;
  std::vector<Scalar> weights;
  std::vector<Scalar> terms;
  for (int i = 0; i < n; ++i) {
    support.clear();
    weights.clear();
    for (int j = 0; j < n; ++j) {
      if (s(i, j) != 0) {
        support.push_back(j);
        weights.push_back(s(i, j));
      }
    }
    for (int c = 0; c < f; ++c) {
      terms.resize(support.size());
      for (std::size_t t = 0; t < support.size(); ++t) {
        terms[t] = weights[t] * x(support[t], c);
      }
      // Ascending-value summation: the sum depends only on the multiset of
      // addends, not on the node order.
      std::sort(terms.begin(), terms.end());
      Scalar acc = 0;
      for (const Scalar v : terms) acc += v;
      out(i, c) = acc;
    }
  }
  return out;
}

Eigen::Index ParamRefs::totalSize() const {
  Eigen::Index total = 0;
  for (const auto& v : values) total += v.size();
  return total;
}

Scalar gradientNorm(const ParamRefs& params) {
  Scalar sq = 0;
  for (const auto& g : params.grads) sq += g.squaredNorm();
  return std::sqrt(sq);
}

void clipGradients(ParamRefs& params, Scalar maxNorm) {
  if (maxNorm <= 0) return;
  const Scalar norm = gradientNorm(params);
  if (norm <= maxNorm) return;
  const Scalar scale = maxNorm / norm;
  for (auto& g : params.grads) g *= scale;
}

void sgdStep(ParamRefs& params, Scalar lr) {
  require(params.values.size() == params.grads.size(), "sgdStep: mismatched refs");
  for (std::size_t i = 0; i < params.values.size(); ++i) {
    require(params.values[i].size() == params.grads[i].size(), "sgdStep: mismatched sizes");
    params.values[i] -= lr * params.grads[i];
  }
}

GraphConvLayer::GraphConvLayer(int inFeatures, int outFeatures, Rng& rng)
    : weight(xavierInit(inFeatures, outFeatures, inFeatures, outFeatures, rng)),
      weightGrad(Matrix::Zero(inFeatures, outFeatures)) {}

const Matrix& GraphConvLayer::forward(const Matrix& s, const Matrix& x) {
  require(x.cols() == weight.rows(), "graph conv: feature width mismatch");
  x_ = x;
  // Row-by-row product: a relabeled input yields bitwise-identical rows, which
  // a blocked matrix-matrix product does not promise.
  Matrix xw(x.rows(), weight.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) xw.row(i).noalias() = x.row(i) * weight;
  const Matrix pre = aggregateOverNodes(s, xw);
  mask_ = (pre.array() > 0).cast<Scalar>();
  out_ = pre.cwiseMax(Scalar(0));
  return out_;
}

Matrix GraphConvLayer::backward(const Matrix& s, const Matrix& dOut) {
  require(x_.size() > 0, "graph conv: backward without forward");
  require(dOut.rows() == mask_.rows() && dOut.cols() == mask_.cols(),
          "graph conv: upstream gradient shape mismatch");
  const Matrix dPre = dOut.cwiseProduct(mask_);
  const Matrix dXW = s.transpose() * dPre;
  weightGrad.noalias() += x_.transpose() * dXW;
  return dXW * weight.transpose();
}

std::vector<int> SortPool::sortOrder(const std::vector<const Matrix*>& layerOutputs) {
  require(!layerOutputs.empty(), "sort pool: no inputs");
  const int n = static_cast<int>(layerOutputs.front()->rows());
  for (const Matrix* m : layerOutputs) {
    require(static_cast<int>(m->rows()) == n, "sort pool: inconsistent row counts");
  }
  const int layers = static_cast<int>(layerOutputs.size());
  // keys(i, l): row sum of node i at layer l; compared from the last layer
  // backwards, descending, final tie broken by node id.
  Matrix keys(n, layers);
  for (int l = 0; l < layers; ++l) keys.col(l) = layerOutputs[static_cast<std::size_t>(l)]->rowwise().sum();

  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    for (int l = layers - 1; l >= 0; --l) {
      if (keys(a, l) != keys(b, l)) return keys(a, l) > keys(b, l);
    }
    return a < b;
  });
  return order;
}

SortPoolResult SortPool::forward(const std::vector<const Matrix*>& layerOutputs) {
  order_ = sortOrder(layerOutputs);
  widths_.clear();
  int totalWidth = 0;
  for (const Matrix* m : layerOutputs) {
    widths_.push_back(static_cast<int>(m->cols()));
    totalWidth += static_cast<int>(m->cols());
  }
  const int n = static_cast<int>(layerOutputs.front()->rows());
  SortPoolResult result;
  result.order = order_;
  result.pooled.resize(n, totalWidth);
  for (int r = 0; r < n; ++r) {
    int offset = 0;
    for (std::size_t l = 0; l < layerOutputs.size(); ++l) {
      result.pooled.row(r).segment(offset, widths_[l]) = layerOutputs[l]->row(order_[static_cast<std::size_t>(r)]);
      offset += widths_[l];
    }
  }
  return result;
}

std::vector<Matrix> SortPool::backward(const Matrix& dPooled) const {
  require(!order_.empty(), "sort pool: backward without forward");
  const int n = static_cast<int>(dPooled.rows());
  require(n == static_cast<int>(order_.size()), "sort pool: gradient row mismatch");
  std::vector<Matrix> grads;
  grads.reserve(widths_.size());
  for (const int w : widths_) grads.push_back(Matrix::Zero(n, w));
  for (int r = 0; r < n; ++r) {
    int offset = 0;
    for (std::size_t l = 0; l < widths_.size(); ++l) {
      grads[l].row(order_[static_cast<std::size_t>(r)]) = dPooled.row(r).segment(offset, widths_[l]);
      offset += widths_[l];
    }
  }
  return grads;
}

Conv1dLayer::Conv1dLayer(int inChannels, int outChannels, int width, int stride,
                         bool reluActivation, Rng& rng)
    : inChannels_(inChannels), width_(width), stride_(stride), relu_(reluActivation) {
  require(inChannels >= 1 && outChannels >= 1 && width >= 1 && stride >= 1,
          "conv1d: invalid dimensions");
  weight = xavierInit(outChannels, inChannels * width, inChannels * width, outChannels, rng);
  bias = Vector::Zero(outChannels);
  weightGrad = Matrix::Zero(outChannels, inChannels * width);
  biasGrad = Vector::Zero(outChannels);
}

const Matrix& Conv1dLayer::forward(const Matrix& in) {
  require(static_cast<int>(in.rows()) == inChannels_, "conv1d: channel mismatch");
  const int inLength = static_cast<int>(in.cols());
  require(inLength >= width_, "conv1d: input shorter than the filter");
  inLength_ = inLength;
  const int outLength = outputLength(inLength, width_, stride_);

  cols_.resize(inChannels_ * width_, outLength);
  for (int j = 0; j < outLength; ++j) {
    for (int c = 0; c < inChannels_; ++c) {
      for (int t = 0; t < width_; ++t) {
        cols_(c * width_ + t, j) = in(c, j * stride_ + t);
      }
    }
  }
  Matrix pre = weight * cols_;
  pre.colwise() += bias;
  if (relu_) {
    mask_ = (pre.array() > 0).cast<Scalar>();
    out_ = pre.cwiseMax(Scalar(0));
  } else {
    mask_.resize(0, 0);
    out_ = std::move(pre);
  }
  return out_;
}

Matrix Conv1dLayer::backward(const Matrix& dOut) {
  require(cols_.size() > 0, "conv1d: backward without forward");
  require(dOut.rows() == out_.rows() && dOut.cols() == out_.cols(),
          "conv1d: upstream gradient shape mismatch");
  const Matrix dPre = relu_ ? dOut.cwiseProduct(mask_).eval() : dOut;
  weightGrad.noalias() += dPre * cols_.transpose();
  biasGrad += dPre.rowwise().sum();
  const Matrix dCols = weight.transpose() * dPre;
  Matrix dIn = Matrix::Zero(inChannels_, inLength_);
  const int outLength = static_cast<int>(dOut.cols());
  for (int j = 0; j < outLength; ++j) {
    for (int c = 0; c < inChannels_; ++c) {
      for (int t = 0; t < width_; ++t) {
        dIn(c, j * stride_ + t) += dCols(c * width_ + t, j);
      }
    }
  }
  return dIn;
}

const Matrix& MaxPool1dLayer::forward(const Matrix& in) {
  const int channels = static_cast<int>(in.rows());
  const int inLength = static_cast<int>(in.cols());
  require(inLength >= width_, "max pool: input shorter than the window");
  inLength_ = inLength;
  const int outLength = (inLength - width_) / stride_ + 1;
  out_.resize(channels, outLength);
  argmax_.resize(channels, outLength);
  for (int c = 0; c < channels; ++c) {
    for (int j = 0; j < outLength; ++j) {
      int best = j * stride_;
      for (int t = 1; t < width_; ++t) {
        if (in(c, j * stride_ + t) > in(c, best)) best = j * stride_ + t;
      }
      argmax_(c, j) = best;
      out_(c, j) = in(c, best);
    }
  }
  return out_;
}

Matrix MaxPool1dLayer::backward(const Matrix& dOut) const {
  require(argmax_.size() > 0, "max pool: backward without forward");
  require(dOut.rows() == out_.rows() && dOut.cols() == out_.cols(),
          "max pool: upstream gradient shape mismatch");
  Matrix dIn = Matrix::Zero(out_.rows(), inLength_);
  for (Eigen::Index c = 0; c < dOut.rows(); ++c) {
    for (Eigen::Index j = 0; j < dOut.cols(); ++j) {
      dIn(c, argmax_(c, j)) += dOut(c, j);
    }
  }
  return dIn;
}

DenseLayer::DenseLayer(int inDim, int outDim, bool reluActivation, Rng& rng) : relu_(reluActivation) {
  weight = xavierInit(outDim, inDim, inDim, outDim, rng);
  bias = Vector::Zero(outDim);
  weightGrad = Matrix::Zero(outDim, inDim);
  biasGrad = Vector::Zero(outDim);
}

const Vector& DenseLayer::forward(const Vector& x) {
  require(x.size() == weight.cols(), "dense: input width mismatch");
  x_ = x;
  Vector pre = weight * x + bias;
  if (relu_) {
    mask_ = (pre.array() > 0).cast<Scalar>();
    out_ = pre.cwiseMax(Scalar(0));
  } else {
    mask_.resize(0);
    out_ = std::move(pre);
  }
  return out_;
}

Vector DenseLayer::backward(const Vector& dOut) {
  require(x_.size() > 0, "dense: backward without forward");
  require(dOut.size() == weight.rows(), "dense: upstream gradient size mismatch");
  const Vector dPre = relu_ ? dOut.cwiseProduct(mask_).eval() : dOut;
  weightGrad.noalias() += dPre * x_.transpose();
  biasGrad += dPre;
  return weight.transpose() * dPre;
}

}  // namespace flowrl
