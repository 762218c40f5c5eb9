#pragma once

#include <vector>

#include "flowrl/env.hpp"
#include "flowrl/rng.hpp"
#include "flowrl/types.hpp"

namespace flowrl {

// One replay record. Priority is |TD error at last evaluation| + beta.
struct Transition {
  NetworkState state;
  int action = 0;
  FlowRequest request;
  Scalar reward = 0;
  NetworkState nextState;
  bool congestion = false;
  Scalar priority = 0;
};

// Fenwick tree over a fixed-size array of nonnegative masses; supports point
// assignment, total, and proportional sampling in O(log n). Rebuilt from the
// raw values periodically to keep the running sums free of float drift.
class FenwickTree {
 public:
  explicit FenwickTree(int n);

  int size() const { return n_; }
  Scalar value(int i) const { return raw_[static_cast<std::size_t>(i)]; }
  void set(int i, Scalar v);
  Scalar total() const { return total_; }
  // Index i such that the cumulative mass of [0, i) is <= target < [0, i];
  // skips zero-mass slots at floating-point boundaries.
  int sample(Scalar target) const;
  void rebuild();

 private:
  int n_ = 0;
  int highBit_ = 0;
  std::vector<Scalar> raw_;
  std::vector<Scalar> tree_;  // 1-indexed
  Scalar total_ = 0;
  int mutationsSinceRebuild_ = 0;
  static constexpr int kRebuildInterval = 1 << 16;
};

// Bounded FIFO of transitions with proportional prioritized sampling.
// Eviction is strictly oldest-first; sampling is with replacement, each
// transition drawn with probability priority / prioritySum.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(int capacity = 10000);

  int capacity() const { return capacity_; }
  int size() const { return size_; }

  void push(Transition t);

  // logical index: 0 = oldest
  const Transition& at(int logical) const;
  int slotOf(int logical) const { return (head_ + logical) % capacity_; }

  const Transition& bySlot(int slot) const { return slots_[static_cast<std::size_t>(slot)]; }
  Transition& bySlot(int slot) { return slots_[static_cast<std::size_t>(slot)]; }
  Scalar priorityBySlot(int slot) const { return priorities_.value(slot); }
  Scalar prioritySum() const { return priorities_.total(); }

  std::vector<int> sampleSlots(int count, Rng& rng) const;
  void updatePriority(int slot, Scalar priority);

 private:
  int capacity_ = 0;
  int head_ = 0;
  int size_ = 0;
  std::vector<Transition> slots_;
  FenwickTree priorities_;
};

}  // namespace flowrl
