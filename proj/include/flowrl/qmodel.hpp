#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "flowrl/env.hpp"
#include "flowrl/nn.hpp"
#include "flowrl/types.hpp"

namespace flowrl {

enum class ModelArch { Dgcnn, Mlp };

struct DgcnnConfig {
  std::vector<int> graphConvSizes{128, 128, 128, 64};
  int conv1Channels = 32;
  int conv2Channels = 64;
  // Nominal second-convolution width; clamped to the pooled length for small
  // graphs, where 5 taps would not fit.
  int conv2Width = 5;
  int poolWidth = 2;
  int poolStride = 2;
  int denseSize = 128;
};

struct MlpConfig {
  std::vector<int> hiddenSizes{256, 256, 128};
};

// Q-value network over the network-state matrix. Two architectures share the
// interface: a graph-convolutional stack with sort pooling, and a plain MLP
// over the flattened state. The output head is linear (width K); softmax is
// applied only when reporting action probabilities.
class QModel {
 public:
  static QModel dgcnn(int nodeCount, int k, const DgcnnConfig& config, std::uint64_t initSeed);
  static QModel mlp(int nodeCount, int k, const MlpConfig& config, std::uint64_t initSeed);

  ModelArch arch() const { return arch_; }
  int nodeCount() const { return nodeCount_; }
  int k() const { return k_; }
  int inputFeatures() const { return feat::count(nodeCount_); }

  // Raw q-values, length K. Caches activations for backward(); one evaluation
  // may be in flight per instance.
  Vector forward(const NetworkState& state);
  // Accumulates parameter gradients for the last forward pass.
  void backward(const Vector& dQ);
  void zeroGrad();
  ParamRefs params();

  Vector actionProbabilities(const NetworkState& state) { return softmax(forward(state)); }

  bool sameArchitecture(const QModel& other) const;
  // Copies parameters into dst (architectures must match); dst keeps
  // independent storage.
  void cloneInto(QModel& dst) const;

  void save(std::ostream& out) const;
  void saveFile(const std::string& path) const;
  static QModel load(std::istream& in);
  static QModel loadFile(const std::string& path);

  const DgcnnConfig& dgcnnConfig() const { return dgcnnConfig_; }
  const MlpConfig& mlpConfig() const { return mlpConfig_; }

 private:
  QModel() = default;
  void buildDgcnn(Rng& rng);
  void buildMlp(Rng& rng);
  Vector forwardDgcnn(const NetworkState& state);
  Vector forwardMlp(const NetworkState& state);
  void backwardDgcnn(const Vector& dQ);
  void backwardMlp(const Vector& dQ);

  ModelArch arch_ = ModelArch::Dgcnn;
  int nodeCount_ = 0;
  int k_ = 0;
  DgcnnConfig dgcnnConfig_;
  MlpConfig mlpConfig_;

  // DGCNN pipeline
  std::vector<GraphConvLayer> graphConvs_;
  SortPool sortPool_;
  std::optional<Conv1dLayer> conv1_;
  std::optional<MaxPool1dLayer> pool_;
  std::optional<Conv1dLayer> conv2_;
  std::optional<DenseLayer> dense_;
  std::optional<DenseLayer> head_;
  int concatWidth_ = 0;
  int conv1Length_ = 0;
  int pooledLength_ = 0;
  int conv2WidthEffective_ = 0;
  int conv2Length_ = 0;
  std::shared_ptr<const Matrix> linkState_;  // held between forward and backward

  // MLP pipeline
  std::vector<DenseLayer> denseStack_;
};

// Finite-difference check of d(lossWeights . q)/dtheta for a full model.
GradCheckReport checkModelGradients(QModel& model, const NetworkState& state,
                                    const Vector& lossWeights, Scalar step = 1e-6);

// Finite-difference checks of every layer kind on small random shapes.
GradCheckReport checkAllLayerKinds(std::uint64_t seed, Scalar step = 1e-6);

// Synthetic state over a random connected topology: proper normalized
// adjacency, features uniform in [0, 1], binary src/dst blocks.
NetworkState randomNetworkState(int nodeCount, std::uint64_t seed);

// Relabels nodes by perm (perm[i] = new id of node i), consistently across
// adjacency, node rows, and the src/dst bit columns.
NetworkState permuteNetworkState(const NetworkState& state, const std::vector<int>& perm);

}  // namespace flowrl
