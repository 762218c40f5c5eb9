#include "flowrl/qmodel.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "flowrl/graph.hpp"
#include "flowrl/topology.hpp"

namespace flowrl {

namespace {

constexpr char kMagic[8] = {'F', 'R', 'L', 'Q', 'N', 'E', 'T', '1'};
constexpr std::uint32_t kVersion = 1;

template <class T>
void writePod(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T readPod(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  requireInput(static_cast<bool>(in), "checkpoint: truncated stream");
  return v;
}

void writeIntVector(std::ostream& out, const std::vector<int>& v) {
  writePod<std::uint32_t>(out, static_cast<std::uint32_t>(v.size()));
  for (int x : v) writePod<std::int32_t>(out, x);
}

std::vector<int> readIntVector(std::istream& in) {
  const auto n = readPod<std::uint32_t>(in);
  std::vector<int> v(n);
  for (auto& x : v) x = readPod<std::int32_t>(in);
  return v;
}

}  // namespace

QModel QModel::dgcnn(int nodeCount, int k, const DgcnnConfig& config, std::uint64_t initSeed) {
  requireInput(nodeCount >= 2, "dgcnn: need at least two nodes");
  requireInput(k >= 1, "dgcnn: output width must be positive");
  requireInput(!config.graphConvSizes.empty(), "dgcnn: need at least one graph conv layer");
  QModel m;
  m.arch_ = ModelArch::Dgcnn;
  m.nodeCount_ = nodeCount;
  m.k_ = k;
  m.dgcnnConfig_ = config;
  Rng rng(initSeed);
  m.buildDgcnn(rng);
  return m;
}

QModel QModel::mlp(int nodeCount, int k, const MlpConfig& config, std::uint64_t initSeed) {
  requireInput(nodeCount >= 2, "mlp: need at least two nodes");
  requireInput(k >= 1, "mlp: output width must be positive");
  QModel m;
  m.arch_ = ModelArch::Mlp;
  m.nodeCount_ = nodeCount;
  m.k_ = k;
  m.mlpConfig_ = config;
  Rng rng(initSeed);
  m.buildMlp(rng);
  return m;
}

void QModel::buildDgcnn(Rng& rng) {
  const DgcnnConfig& cfg = dgcnnConfig_;
  int inWidth = feat::count(nodeCount_);
  concatWidth_ = 0;
  graphConvs_.clear();
  for (int size : cfg.graphConvSizes) {
    requireInput(size >= 1, "dgcnn: graph conv size must be positive");
    graphConvs_.emplace_back(inWidth, size, rng);
    concatWidth_ += size;
    inWidth = size;
  }

  // The sorted node embeddings are flattened node-major, so the first
  // convolution reads one node per step: width and stride both equal the
  // concatenated embedding width.
  conv1Length_ = nodeCount_;
  conv1_.emplace(1, cfg.conv1Channels, concatWidth_, concatWidth_, true, rng);

  requireInput(conv1Length_ >= cfg.poolWidth, "dgcnn: too few nodes for the pooling window");
  pooledLength_ = (conv1Length_ - cfg.poolWidth) / cfg.poolStride + 1;
  pool_.emplace(cfg.poolWidth, cfg.poolStride);

  conv2WidthEffective_ = std::min(cfg.conv2Width, pooledLength_);
  conv2_.emplace(cfg.conv1Channels, cfg.conv2Channels, conv2WidthEffective_, 1, true, rng);
  conv2Length_ = pooledLength_ - conv2WidthEffective_ + 1;

  dense_.emplace(cfg.conv2Channels * conv2Length_, cfg.denseSize, true, rng);
  head_.emplace(cfg.denseSize, k_, false, rng);
}

void QModel::buildMlp(Rng& rng) {
  const int inputWidth = nodeCount_ * feat::count(nodeCount_) + nodeCount_ * nodeCount_;
  denseStack_.clear();
  int in = inputWidth;
  for (int size : mlpConfig_.hiddenSizes) {
    requireInput(size >= 1, "mlp: hidden size must be positive");
    denseStack_.emplace_back(in, size, true, rng);
    in = size;
  }
  denseStack_.emplace_back(in, k_, false, rng);
}

Vector QModel::forward(const NetworkState& state) {
  require(state.nodeCount() == nodeCount_, "model: node-count mismatch");
  require(state.nodeState.cols() == feat::count(nodeCount_), "model: feature-width mismatch");
  require(state.linkState && state.linkState->rows() == nodeCount_ &&
              state.linkState->cols() == nodeCount_,
          "model: adjacency shape mismatch");
  return arch_ == ModelArch::Dgcnn ? forwardDgcnn(state) : forwardMlp(state);
}

Vector QModel::forwardDgcnn(const NetworkState& state) {
  linkState_ = state.linkState;
  const Matrix& s = *linkState_;

  const Matrix* cur = &state.nodeState;
  std::vector<const Matrix*> embeddings;
  embeddings.reserve(graphConvs_.size());
  for (auto& layer : graphConvs_) {
    cur = &layer.forward(s, *cur);
    embeddings.push_back(cur);
  }

  const SortPoolResult pooled = sortPool_.forward(embeddings);
  const Vector flat = flattenRowMajor(pooled.pooled);
  const Matrix& c1 = conv1_->forward(flat.transpose());
  const Matrix& p1 = pool_->forward(c1);
  const Matrix& c2 = conv2_->forward(p1);
  const Vector& hidden = dense_->forward(flattenRowMajor(c2));
  return head_->forward(hidden);
}

Vector QModel::forwardMlp(const NetworkState& state) {
  linkState_ = state.linkState;
  Vector x(denseStack_.front().weight.cols());
  const Vector nodePart = flattenRowMajor(state.nodeState);
  const Vector adjPart = flattenRowMajor(*state.linkState);
  x << nodePart, adjPart;
  const Vector* cur = &x;
  for (std::size_t i = 0; i < denseStack_.size(); ++i) {
    cur = &denseStack_[i].forward(*cur);
  }
  return *cur;
}

void QModel::backward(const Vector& dQ) {
  require(dQ.size() == k_, "model: upstream gradient width mismatch");
  if (arch_ == ModelArch::Dgcnn) {
    backwardDgcnn(dQ);
  } else {
    backwardMlp(dQ);
  }
}

void QModel::backwardDgcnn(const Vector& dQ) {
  require(linkState_ != nullptr, "model: backward without forward");
  const Matrix& s = *linkState_;

  const Vector dHidden = head_->backward(dQ);
  const Vector dFlatC2 = dense_->backward(dHidden);
  const Matrix dC2 = unflattenRowMajor(dFlatC2, dgcnnConfig_.conv2Channels, conv2Length_);
  const Matrix dP1 = conv2_->backward(dC2);
  const Matrix dC1 = pool_->backward(dP1);
  const Matrix dRow = conv1_->backward(dC1);
  const Matrix dPooled = unflattenRowMajor(dRow.row(0).transpose(), nodeCount_, concatWidth_);
  std::vector<Matrix> perLayer = sortPool_.backward(dPooled);

  Matrix dZ = std::move(perLayer.back());
  for (int l = static_cast<int>(graphConvs_.size()) - 1; l >= 0; --l) {
    Matrix dX = graphConvs_[static_cast<std::size_t>(l)].backward(s, dZ);
    if (l > 0) dZ = perLayer[static_cast<std::size_t>(l) - 1] + dX;
  }
}

void QModel::backwardMlp(const Vector& dQ) {
  Vector d = dQ;
  for (int i = static_cast<int>(denseStack_.size()) - 1; i >= 0; --i) {
    d = denseStack_[static_cast<std::size_t>(i)].backward(d);
  }
}

void QModel::zeroGrad() {
  for (auto& layer : graphConvs_) layer.zeroGrad();
  if (conv1_) conv1_->zeroGrad();
  if (conv2_) conv2_->zeroGrad();
  if (dense_) dense_->zeroGrad();
  if (head_) head_->zeroGrad();
  for (auto& layer : denseStack_) layer.zeroGrad();
}

ParamRefs QModel::params() {
  ParamRefs refs;
  for (std::size_t i = 0; i < graphConvs_.size(); ++i) {
    refs.append("gc" + std::to_string(i) + ".w", graphConvs_[i].weight, graphConvs_[i].weightGrad);
  }
  if (conv1_) {
    refs.append("conv1.w", conv1_->weight, conv1_->weightGrad);
    refs.append("conv1.b", conv1_->bias, conv1_->biasGrad);
  }
  if (conv2_) {
    refs.append("conv2.w", conv2_->weight, conv2_->weightGrad);
    refs.append("conv2.b", conv2_->bias, conv2_->biasGrad);
  }
  if (dense_) {
    refs.append("dense.w", dense_->weight, dense_->weightGrad);
    refs.append("dense.b", dense_->bias, dense_->biasGrad);
  }
  if (head_) {
    refs.append("head.w", head_->weight, head_->weightGrad);
    refs.append("head.b", head_->bias, head_->biasGrad);
  }
  for (std::size_t i = 0; i < denseStack_.size(); ++i) {
    refs.append("fc" + std::to_string(i) + ".w", denseStack_[i].weight, denseStack_[i].weightGrad);
    refs.append("fc" + std::to_string(i) + ".b", denseStack_[i].bias, denseStack_[i].biasGrad);
  }
  return refs;
}

bool QModel::sameArchitecture(const QModel& other) const {
  if (arch_ != other.arch_ || nodeCount_ != other.nodeCount_ || k_ != other.k_) return false;
  if (arch_ == ModelArch::Dgcnn) {
    const DgcnnConfig& a = dgcnnConfig_;
    const DgcnnConfig& b = other.dgcnnConfig_;
    return a.graphConvSizes == b.graphConvSizes && a.conv1Channels == b.conv1Channels &&
           a.conv2Channels == b.conv2Channels && a.conv2Width == b.conv2Width &&
           a.poolWidth == b.poolWidth && a.poolStride == b.poolStride && a.denseSize == b.denseSize;
  }
  return mlpConfig_.hiddenSizes == other.mlpConfig_.hiddenSizes;
}

void QModel::cloneInto(QModel& dst) const {
  require(sameArchitecture(dst), "cloneInto: architecture mismatch");
  dst = *this;
}

void QModel::save(std::ostream& out) const {
  out.write(kMagic, sizeof(kMagic));
  writePod(out, kVersion);
  writePod<std::uint8_t>(out, arch_ == ModelArch::Dgcnn ? 0 : 1);
  writePod<std::int32_t>(out, nodeCount_);
  writePod<std::int32_t>(out, k_);
  if (arch_ == ModelArch::Dgcnn) {
    writeIntVector(out, dgcnnConfig_.graphConvSizes);
    writePod<std::int32_t>(out, dgcnnConfig_.conv1Channels);
    writePod<std::int32_t>(out, dgcnnConfig_.conv2Channels);
    writePod<std::int32_t>(out, dgcnnConfig_.conv2Width);
    writePod<std::int32_t>(out, dgcnnConfig_.poolWidth);
    writePod<std::int32_t>(out, dgcnnConfig_.poolStride);
    writePod<std::int32_t>(out, dgcnnConfig_.denseSize);
  } else {
    writeIntVector(out, mlpConfig_.hiddenSizes);
  }
  auto refs = const_cast<QModel*>(this)->params();  // reads values only
  writePod<std::uint32_t>(out, static_cast<std::uint32_t>(refs.count()));
  for (std::size_t i = 0; i < refs.count(); ++i) {
    writePod<std::uint64_t>(out, static_cast<std::uint64_t>(refs.values[i].size()));
    out.write(reinterpret_cast<const char*>(refs.values[i].data()),
              static_cast<std::streamsize>(refs.values[i].size() * sizeof(Scalar)));
  }
}

void QModel::saveFile(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  requireInput(out.good(), "cannot open checkpoint for writing: " + path);
  save(out);
  requireInput(out.good(), "checkpoint write failed: " + path);
}

QModel QModel::load(std::istream& in) {
  char magic[8];
  in.read(magic, sizeof(magic));
  requireInput(static_cast<bool>(in) && std::memcmp(magic, kMagic, sizeof(kMagic)) == 0,
               "checkpoint: bad magic");
  requireInput(readPod<std::uint32_t>(in) == kVersion, "checkpoint: unsupported version");
  const auto archTag = readPod<std::uint8_t>(in);
  requireInput(archTag <= 1, "checkpoint: unknown architecture tag");
  const int nodeCount = readPod<std::int32_t>(in);
  const int k = readPod<std::int32_t>(in);

  QModel model;
  if (archTag == 0) {
    DgcnnConfig cfg;
    cfg.graphConvSizes = readIntVector(in);
    cfg.conv1Channels = readPod<std::int32_t>(in);
    cfg.conv2Channels = readPod<std::int32_t>(in);
    cfg.conv2Width = readPod<std::int32_t>(in);
    cfg.poolWidth = readPod<std::int32_t>(in);
    cfg.poolStride = readPod<std::int32_t>(in);
    cfg.denseSize = readPod<std::int32_t>(in);
    model = dgcnn(nodeCount, k, cfg, 0);
  } else {
    MlpConfig cfg;
    cfg.hiddenSizes = readIntVector(in);
    model = mlp(nodeCount, k, cfg, 0);
  }

  auto refs = model.params();
  const auto paramCount = readPod<std::uint32_t>(in);
  requireInput(paramCount == refs.count(), "checkpoint: parameter list mismatch");
  for (std::size_t i = 0; i < refs.count(); ++i) {
    const auto size = readPod<std::uint64_t>(in);
    requireInput(size == static_cast<std::uint64_t>(refs.values[i].size()),
                 "checkpoint: parameter size mismatch for " + refs.names[i]);
    in.read(reinterpret_cast<char*>(refs.values[i].data()),
            static_cast<std::streamsize>(size * sizeof(Scalar)));
    requireInput(static_cast<bool>(in), "checkpoint: truncated parameter data");
  }
  return model;
}

QModel QModel::loadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  requireInput(in.good(), "cannot open checkpoint: " + path);
  return load(in);
}

GradCheckReport checkModelGradients(QModel& model, const NetworkState& state,
                                    const Vector& lossWeights, Scalar step) {
  require(lossWeights.size() == model.k(), "checkModelGradients: weight width mismatch");
  model.zeroGrad();
  model.forward(state);
  model.backward(lossWeights);
  auto refs = model.params();
  auto loss = [&]() { return lossWeights.dot(model.forward(state)); };
  return checkGradients(refs, loss, step);
}

namespace {

void mergeReport(GradCheckReport& into, const std::string& prefix, const GradCheckReport& part) {
  for (const auto& entry : part.perParam) {
    into.perParam.push_back({prefix + "." + entry.name, entry.maxRelError});
  }
  into.maxRelError = std::max(into.maxRelError, part.maxRelError);
}

// Registers the layer input as a pseudo-parameter so the input gradient is
// checked along with the weights.
template <class Forward, class Backward>
GradCheckReport checkOneLayer(ParamRefs refs, Matrix& input, Matrix& inputGrad,
                              const Matrix& upstream, Forward forward, Backward backward,
                              Scalar step) {
  refs.append("input", input, inputGrad);
  inputGrad.setZero();
  forward();
  const Matrix g = backward(upstream);
  require(g.rows() == inputGrad.rows() && g.cols() == inputGrad.cols(),
          "gradcheck: input gradient shape mismatch");
  inputGrad.array() = g.array();  // elementwise; a move would invalidate the map above
  auto loss = [&]() { return forward(); };
  // forward() must return the weighted output sum; recompute per perturbation.
  return checkGradients(refs, loss, step);
}

}  // namespace

GradCheckReport checkAllLayerKinds(std::uint64_t seed, Scalar step) {
  Rng rng(seed);
  GradCheckReport report;

  {  // dense, relu and linear
    for (const bool reluAct : {true, false}) {
      DenseLayer layer(6, 4, reluAct, rng);
      Matrix x = xavierInit(6, 1, rng);
      Matrix xGrad = Matrix::Zero(6, 1);
      const Matrix c = xavierInit(4, 1, rng);
      ParamRefs refs;
      refs.append("w", layer.weight, layer.weightGrad);
      refs.append("b", layer.bias, layer.biasGrad);
      auto fwd = [&]() { return c.col(0).dot(layer.forward(x.col(0))); };
      auto bwd = [&](const Matrix& up) -> Matrix {
        layer.zeroGrad();
        fwd();
        return layer.backward(up.col(0));
      };
      mergeReport(report, reluAct ? "dense_relu" : "dense_linear",
                  checkOneLayer(std::move(refs), x, xGrad, c, fwd, bwd, step));
    }
  }

  {  // graph conv on a small random topology
    const Topology topo = generateRandomTopology(5, 7, rng.nextU64());
    const Matrix s = buildNormalizedAdjacency(topo);
    GraphConvLayer layer(3, 4, rng);
    Matrix x = xavierInit(5, 3, rng);
    Matrix xGrad = Matrix::Zero(5, 3);
    const Matrix c = xavierInit(5, 4, rng);
    ParamRefs refs;
    refs.append("w", layer.weight, layer.weightGrad);
    auto fwd = [&]() { return layer.forward(s, x).cwiseProduct(c).sum(); };
    auto bwd = [&](const Matrix& up) -> Matrix {
      layer.zeroGrad();
      fwd();
      return layer.backward(s, up);
    };
    mergeReport(report, "graph_conv", checkOneLayer(std::move(refs), x, xGrad, c, fwd, bwd, step));
  }

  {  // conv1d
    Conv1dLayer layer(3, 2, 3, 2, true, rng);
    Matrix x = xavierInit(3, 9, rng);
    Matrix xGrad = Matrix::Zero(3, 9);
    const Matrix c = xavierInit(2, 4, rng);
    ParamRefs refs;
    refs.append("w", layer.weight, layer.weightGrad);
    refs.append("b", layer.bias, layer.biasGrad);
    auto fwd = [&]() { return layer.forward(x).cwiseProduct(c).sum(); };
    auto bwd = [&](const Matrix& up) -> Matrix {
      layer.zeroGrad();
      fwd();
      return layer.backward(up);
    };
    mergeReport(report, "conv1d", checkOneLayer(std::move(refs), x, xGrad, c, fwd, bwd, step));
  }

  {  // max pool: input gradient only
    MaxPool1dLayer layer(2, 2);
    Matrix x = xavierInit(3, 8, rng);
    Matrix xGrad = Matrix::Zero(3, 8);
    const Matrix c = xavierInit(3, 4, rng);
    ParamRefs refs;
    auto fwd = [&]() { return layer.forward(x).cwiseProduct(c).sum(); };
    auto bwd = [&](const Matrix& up) -> Matrix {
      fwd();
      return layer.backward(up);
    };
    mergeReport(report, "maxpool1d", checkOneLayer(std::move(refs), x, xGrad, c, fwd, bwd, step));
  }

  {  // sort pooling: gradients route through the stored permutation
    SortPool pool;
    Matrix a = xavierInit(4, 3, rng);
    Matrix aGrad = Matrix::Zero(4, 3);
    Matrix b = xavierInit(4, 2, rng);
    Matrix bGrad = Matrix::Zero(4, 2);
    const Matrix c = xavierInit(4, 5, rng);
    ParamRefs refs;
    refs.append("b_layer", b, bGrad);
    auto fwd = [&]() {
      const std::vector<const Matrix*> ins{&a, &b};
      return pool.forward(ins).pooled.cwiseProduct(c).sum();
    };
    auto bwd = [&](const Matrix& up) -> Matrix {
      fwd();
      auto grads = pool.backward(up);
      bGrad = grads[1];
      return grads[0];
    };
    mergeReport(report, "sortpool", checkOneLayer(std::move(refs), a, aGrad, c, fwd, bwd, step));
  }

  {  // softmax head: analytic jacobian-vector product vs finite differences
    Matrix x = xavierInit(5, 1, rng);
    Matrix xGrad = Matrix::Zero(5, 1);
    const Matrix c = xavierInit(5, 1, rng);
    ParamRefs refs;
    auto fwd = [&]() { return c.col(0).dot(softmax(x.col(0))); };
    auto bwd = [&](const Matrix& up) -> Matrix {
      const Vector p = softmax(x.col(0));
      const Vector g = p.cwiseProduct(up.col(0) - Vector::Constant(p.size(), up.col(0).dot(p)));
      return g;
    };
    mergeReport(report, "softmax", checkOneLayer(std::move(refs), x, xGrad, c, fwd, bwd, step));
  }

  return report;
}

NetworkState randomNetworkState(int nodeCount, std::uint64_t seed) {
  require(nodeCount >= 2, "randomNetworkState: need at least two nodes");
  Rng rng(seed);
  const int minLinks = nodeCount - 1;
  const int maxLinks = nodeCount * (nodeCount - 1) / 2;
  const int links = minLinks + rng.uniformInt(maxLinks - minLinks + 1);
  const Topology topo = generateRandomTopology(nodeCount, links, rng.nextU64());

  NetworkState state;
  state.linkState = std::make_shared<const Matrix>(buildNormalizedAdjacency(topo));
  state.nodeState = Matrix::Zero(nodeCount, feat::count(nodeCount));
  for (int i = 0; i < nodeCount; ++i) {
    for (int c = 0; c < 5; ++c) state.nodeState(i, c) = rng.uniform();
    for (int j = 0; j < nodeCount; ++j) {
      state.nodeState(i, feat::kSrcBase + j) = rng.uniform() < 0.2 ? 1.0 : 0.0;
      state.nodeState(i, feat::kSrcBase + nodeCount + j) = rng.uniform() < 0.2 ? 1.0 : 0.0;
    }
  }
  return state;
}

NetworkState permuteNetworkState(const NetworkState& state, const std::vector<int>& perm) {
  const int n = state.nodeCount();
  require(static_cast<int>(perm.size()) == n, "permuteNetworkState: size mismatch");
  std::vector<bool> seen(static_cast<std::size_t>(n), false);
  for (int p : perm) {
    require(p >= 0 && p < n && !seen[static_cast<std::size_t>(p)],
            "permuteNetworkState: not a permutation");
    seen[static_cast<std::size_t>(p)] = true;
  }

  // Graph-equivariance transform: conjugate the adjacency and permute the
  // node rows wholesale. Feature columns stay in place (the weights act per
  // feature position, so remapping columns would change the function, not
  // just the labeling).
  NetworkState out;
  Matrix link(n, n);
  const Matrix& s = *state.linkState;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      link(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]) = s(i, j);
    }
  }
  out.linkState = std::make_shared<const Matrix>(std::move(link));
  out.nodeState.resize(n, state.nodeState.cols());
  for (int i = 0; i < n; ++i) {
    out.nodeState.row(perm[static_cast<std::size_t>(i)]) = state.nodeState.row(i);
  }
  return out;
}

}  // namespace flowrl
