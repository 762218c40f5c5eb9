#include "flowrl/replay.hpp"

#include <cmath>

namespace flowrl {

FenwickTree::FenwickTree(int n) : n_(n) {
  require(n >= 1, "fenwick: size must be positive");
  raw_.assign(static_cast<std::size_t>(n), 0.0);
  tree_.assign(static_cast<std::size_t>(n) + 1, 0.0);
  highBit_ = 1;
  while (highBit_ * 2 <= n_) highBit_ *= 2;
}

void FenwickTree::set(int i, Scalar v) {
  require(i >= 0 && i < n_, "fenwick: index out of range");
  require(v >= 0 && std::isfinite(v), "fenwick: mass must be finite and nonnegative");
  const Scalar delta = v - raw_[static_cast<std::size_t>(i)];
  raw_[static_cast<std::size_t>(i)] = v;
  for (int idx = i + 1; idx <= n_; idx += idx & -idx) tree_[static_cast<std::size_t>(idx)] += delta;
  total_ += delta;
  if (++mutationsSinceRebuild_ >= kRebuildInterval) rebuild();
}

void FenwickTree::rebuild() {
  std::fill(tree_.begin(), tree_.end(), 0.0);
  total_ = 0;
  for (int i = 0; i < n_; ++i) {
    const Scalar v = raw_[static_cast<std::size_t>(i)];
    for (int idx = i + 1; idx <= n_; idx += idx & -idx) tree_[static_cast<std::size_t>(idx)] += v;
    total_ += v;
  }
  mutationsSinceRebuild_ = 0;
}

int FenwickTree::sample(Scalar target) const {
  int pos = 0;
  Scalar remaining = target;
  for (int step = highBit_; step > 0; step >>= 1) {
    const int next = pos + step;
    if (next <= n_ && tree_[static_cast<std::size_t>(next)] <= remaining) {
      remaining -= tree_[static_cast<std::size_t>(next)];
      pos = next;
    }
  }
  // pos is the count of fully covered slots; land on the next one with mass.
  while (pos < n_ && raw_[static_cast<std::size_t>(pos)] == 0) ++pos;
  if (pos >= n_) {  // float boundary overshoot: fall back to the last massive slot
    for (pos = n_ - 1; pos > 0 && raw_[static_cast<std::size_t>(pos)] == 0; --pos) {
    }
  }
  return pos;
}

ReplayBuffer::ReplayBuffer(int capacity)
    : capacity_(capacity), slots_(static_cast<std::size_t>(capacity)), priorities_(capacity) {
  require(capacity >= 1, "replay buffer: capacity must be positive");
}

void ReplayBuffer::push(Transition t) {
  require(t.priority > 0 && std::isfinite(t.priority), "replay buffer: priority must be positive");
  int slot;
  if (size_ < capacity_) {
    slot = (head_ + size_) % capacity_;
    ++size_;
  } else {
    slot = head_;  // evict the oldest
    head_ = (head_ + 1) % capacity_;
  }
  priorities_.set(slot, t.priority);
  slots_[static_cast<std::size_t>(slot)] = std::move(t);
}

const Transition& ReplayBuffer::at(int logical) const {
  require(logical >= 0 && logical < size_, "replay buffer: index out of range");
  return slots_[static_cast<std::size_t>(slotOf(logical))];
}

std::vector<int> ReplayBuffer::sampleSlots(int count, Rng& rng) const {
  require(size_ > 0, "replay buffer: cannot sample when empty");
  std::vector<int> slots(static_cast<std::size_t>(count));
  for (auto& slot : slots) {
    slot = priorities_.sample(rng.uniform() * priorities_.total());
  }
  return slots;
}

void ReplayBuffer::updatePriority(int slot, Scalar priority) {
  require(slot >= 0 && slot < capacity_, "replay buffer: slot out of range");
  require(priority > 0 && std::isfinite(priority), "replay buffer: priority must be positive");
  priorities_.set(slot, priority);
  slots_[static_cast<std::size_t>(slot)].priority = priority;
}

}  // namespace flowrl
