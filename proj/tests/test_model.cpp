#include <doctest.h>

#include <cmath>
#include <sstream>

#include "flowrl/qmodel.hpp"
#include "flowrl/rng.hpp"

using namespace flowrl;

namespace {

DgcnnConfig smallDgcnn() {
  DgcnnConfig cfg;
  cfg.graphConvSizes = {8, 8};
  cfg.conv1Channels = 4;
  cfg.conv2Channels = 4;
  cfg.denseSize = 8;
  return cfg;
}

std::vector<int> randomPerm(int n, Rng& rng) {
  std::vector<int> perm(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;
  for (int i = n - 1; i > 0; --i) std::swap(perm[i], perm[rng.uniformInt(i + 1)]);
  return perm;
}

}  // namespace

TEST_CASE("dgcnn forward: finite q-vector of the configured width") {
  QModel model = QModel::dgcnn(6, 3, smallDgcnn(), 1);
  const NetworkState state = randomNetworkState(6, 2);
  const Vector q = model.forward(state);
  REQUIRE(q.size() == 3);
  for (int i = 0; i < 3; ++i) CHECK(std::isfinite(q[i]));
}

TEST_CASE("dgcnn forward: full-width architecture builds on nsfnet-sized graphs") {
  QModel model = QModel::dgcnn(14, 3, DgcnnConfig{}, 3);
  const NetworkState state = randomNetworkState(14, 4);
  CHECK(model.forward(state).size() == 3);
  // 9 nodes: pooled length 4 forces the second convolution width down to 4
  QModel nine = QModel::dgcnn(9, 3, DgcnnConfig{}, 5);
  CHECK(nine.forward(randomNetworkState(9, 6)).size() == 3);
}

TEST_CASE("dgcnn forward: node-count mismatch is a contract violation") {
  QModel model = QModel::dgcnn(6, 3, smallDgcnn(), 7);
  const NetworkState wrong = randomNetworkState(5, 8);
  CHECK_THROWS_AS(model.forward(wrong), ContractError);
}

TEST_CASE("dgcnn forward is exactly equivariant under consistent relabeling") {
  Rng rng(1000);
  for (int rep = 0; rep < 20; ++rep) {
    const int n = 5 + rng.uniformInt(5);  // 5..9 nodes
    QModel model = QModel::dgcnn(n, 3, smallDgcnn(), rng.nextU64());
    const NetworkState state = randomNetworkState(n, rng.nextU64());
    const auto perm = randomPerm(n, rng);
    const NetworkState permuted = permuteNetworkState(state, perm);
    const Vector q1 = model.forward(state);
    const Vector q2 = model.forward(permuted);
    CHECK((q1.array() == q2.array()).all());
  }
}

TEST_CASE("mlp forward: zero input with zero biases gives zero q-values") {
  QModel model = QModel::mlp(4, 3, MlpConfig{{16, 8}}, 9);
  NetworkState zero;
  zero.linkState = std::make_shared<const Matrix>(Matrix::Zero(4, 4));
  zero.nodeState = Matrix::Zero(4, feat::count(4));
  const Vector q = model.forward(zero);
  CHECK(q.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("mlp forward: output width and input contract") {
  QModel model = QModel::mlp(5, 3, MlpConfig{}, 10);
  CHECK(model.forward(randomNetworkState(5, 11)).size() == 3);
  CHECK_THROWS_AS(model.forward(randomNetworkState(6, 12)), ContractError);
}

TEST_CASE("mlp forward is generally not equivariant") {
  QModel model = QModel::mlp(5, 3, MlpConfig{{16, 8}}, 13);
  Rng rng(14);
  const NetworkState state = randomNetworkState(5, 15);
  const std::vector<int> perm{4, 2, 0, 1, 3};
  const Vector q1 = model.forward(state);
  const Vector q2 = model.forward(permuteNetworkState(state, perm));
  CHECK((q1 - q2).cwiseAbs().maxCoeff() > 1e-9);
}

TEST_CASE("action probabilities: normalized and argmax-preserving") {
  QModel model = QModel::dgcnn(5, 4, smallDgcnn(), 16);
  const NetworkState state = randomNetworkState(5, 17);
  const Vector q = model.forward(state);
  const Vector p = model.actionProbabilities(state);
  CHECK(std::abs(p.sum() - 1.0) <= 1e-12);
  int qa = 0, pa = 0;
  for (int i = 1; i < 4; ++i) {
    if (q[i] > q[qa]) qa = i;
    if (p[i] > p[pa]) pa = i;
  }
  CHECK(qa == pa);
}

TEST_CASE("cloneInto copies parameters into independent storage") {
  QModel a = QModel::dgcnn(5, 3, smallDgcnn(), 20);
  QModel b = QModel::dgcnn(5, 3, smallDgcnn(), 21);
  const NetworkState state = randomNetworkState(5, 22);

  a.cloneInto(b);
  auto ra = a.params();
  auto rb = b.params();
  for (std::size_t i = 0; i < ra.count(); ++i) {
    CHECK((ra.values[i] - rb.values[i]).cwiseAbs().maxCoeff() == 0.0);
  }

  const Vector before = b.forward(state);
  ra.values[0][0] += 0.5;  // perturb the source
  const Vector after = b.forward(state);
  CHECK((before.array() == after.array()).all());
  CHECK((a.forward(state).array() != before.array()).any());
}

TEST_CASE("cloneInto rejects architecture mismatches") {
  QModel a = QModel::dgcnn(5, 3, smallDgcnn(), 23);
  QModel b = QModel::dgcnn(6, 3, smallDgcnn(), 24);
  CHECK_THROWS_AS(a.cloneInto(b), ContractError);
  QModel c = QModel::mlp(5, 3, MlpConfig{}, 25);
  CHECK_THROWS_AS(a.cloneInto(c), ContractError);
  DgcnnConfig other = smallDgcnn();
  other.denseSize = 16;
  QModel d = QModel::dgcnn(5, 3, other, 26);
  CHECK_THROWS_AS(a.cloneInto(d), ContractError);
}

TEST_CASE("checkpoint round trip is bit-exact") {
  for (const bool useMlp : {false, true}) {
    QModel model = useMlp ? QModel::mlp(6, 3, MlpConfig{{32, 16}}, 30)
                          : QModel::dgcnn(6, 3, smallDgcnn(), 30);
    const NetworkState state = randomNetworkState(6, 31);
    const Vector before = model.forward(state);

    std::stringstream buf;
    model.save(buf);
    QModel loaded = QModel::load(buf);
    CHECK(loaded.arch() == model.arch());
    CHECK(loaded.k() == model.k());
    CHECK(loaded.nodeCount() == model.nodeCount());
    const Vector after = loaded.forward(state);
    CHECK((before.array() == after.array()).all());

    auto ra = model.params();
    auto rb = loaded.params();
    REQUIRE(ra.count() == rb.count());
    for (std::size_t i = 0; i < ra.count(); ++i) {
      CHECK((ra.values[i].array() == rb.values[i].array()).all());
    }
  }
}

TEST_CASE("checkpoint: clone preserves round-trip equality") {
  QModel a = QModel::dgcnn(5, 3, smallDgcnn(), 40);
  QModel b = QModel::dgcnn(5, 3, smallDgcnn(), 41);
  a.cloneInto(b);
  std::stringstream bufA, bufB;
  a.save(bufA);
  b.save(bufB);
  CHECK(bufA.str() == bufB.str());
}

TEST_CASE("checkpoint: malformed streams are rejected") {
  std::stringstream empty;
  CHECK_THROWS_AS(QModel::load(empty), InputError);
  std::stringstream junk("definitely not a checkpoint");
  CHECK_THROWS_AS(QModel::load(junk), InputError);

  QModel model = QModel::dgcnn(5, 3, smallDgcnn(), 42);
  std::stringstream buf;
  model.save(buf);
  std::string bytes = buf.str();
  bytes.resize(bytes.size() / 2);  // truncate
  std::stringstream cut(bytes);
  CHECK_THROWS_AS(QModel::load(cut), InputError);
}
