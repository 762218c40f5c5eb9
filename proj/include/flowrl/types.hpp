#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace flowrl {

using Scalar = double;
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
using RowVector = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

using NodeId = int;
using Path = std::vector<NodeId>;

// Rejected input: caller supplied data that violates a documented precondition
// on construction or parsing (bad topology, infeasible sizes, malformed file).
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Contract violation: caller bug (index out of range, mismatched shapes).
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Training divergence or a broken runtime invariant; maps to a nonzero exit code.
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& msg) {
  if (!cond) throw ContractError(msg);
}

inline void requireInput(bool cond, const std::string& msg) {
  if (!cond) throw InputError(msg);
}

}  // namespace flowrl
