#pragma once

// Bounded exact counter for n writers built from registers.
//
// Each actor owns one single-writer word register holding its personal
// increment count. A balanced binary tree of bounded max registers sits
// above the leaves; after bumping its leaf, an actor walks up its path
// reading both children of each node and max-writing their sum into the
// node. Leaf counts only grow, so sums only grow and stale propagation
// can never regress a node. A read returns one max_read of the root:
// O(log l) steps against O(log n * log l) per increment.
//
// The actor count is padded to a power of two with permanently-zero
// leaves so the tree stays full. The capacity bound l is a caller
// contract; the object throws if increments ever exceed it.
//
// The atomic mock variant is one fetch-and-add word per counter, one
// scheduler step per operation, for checker-mode runs that treat whole
// counter operations as instantaneous.

#include <atomic>
#include <bit>
#include <cstdint>
#include <memory>
#include <vector>

#include "kacc/errors.hpp"
#include "kacc/max_register.hpp"
#include "kacc/runtime.hpp"
#include "kacc/task.hpp"

namespace kacc {

class ExactCounter {
 public:
  virtual ~ExactCounter() = default;
  virtual Stepwise<void> increment(ActorCtx& a) = 0;
  virtual Stepwise<std::uint64_t> read(ActorCtx& a) = 0;
  // Instantaneous root value; debug/monitor view only.
  virtual std::uint64_t peek() const = 0;
  virtual std::uint64_t bound() const = 0;
};

class TreeExactCounter final : public ExactCounter {
 public:
  TreeExactCounter(Runtime& rt, int n_actors, std::uint64_t l) : l_(l) {
    if (n_actors < 1) throw std::invalid_argument("counter needs at least one actor");
    n_leaves_ = std::bit_ceil((std::uint64_t)n_actors);
    own_.assign(n_leaves_, 0);
    leaves_.reserve(n_leaves_);
    for (std::uint64_t i = 0; i < n_leaves_; ++i) leaves_.emplace_back(rt, l);
    // Heap layout: internal node i has children 2i and 2i+1; indices
    // n_leaves_..2*n_leaves_-1 denote the leaves.
    nodes_.resize(n_leaves_);  // slot 0 unused
    for (std::uint64_t i = 1; i < n_leaves_; ++i)
      nodes_[i] = std::make_unique<RecursiveMaxRegister>(rt, (long long)l, 0);
  }

  // Closed-form step ceilings for this construction, asserted by the
  // wait-freedom tests. c = per-operation cost of one l-bounded max
  // register; an increment pays one leaf write, two leaf reads plus a
  // max write at the lowest internal level, and 3c per level above.
  static std::uint64_t increment_step_bound(int n_actors, std::uint64_t l) {
    std::uint64_t n_leaves = std::bit_ceil((std::uint64_t)n_actors);
    std::uint64_t levels = ceil_log2(n_leaves);
    std::uint64_t c = RecursiveMaxRegister::step_bound(l + 1);
    if (levels == 0) return 1;
    return 1 + (2 + c) + (levels - 1) * 3 * c;
  }
  static std::uint64_t read_step_bound(int n_actors, std::uint64_t l) {
    std::uint64_t n_leaves = std::bit_ceil((std::uint64_t)n_actors);
    return n_leaves == 1 ? 1 : RecursiveMaxRegister::step_bound(l + 1);
  }

  Stepwise<void> increment(ActorCtx& a) override {
    std::uint64_t total = started_.fetch_add(1, std::memory_order_seq_cst) + 1;
    if (total > l_)
      throw ContractViolation("exact counter incremented past bound " + std::to_string(l_));
    std::uint64_t leaf = (std::uint64_t)a.id;
    own_[leaf] += 1;
    co_await leaves_[leaf].write(a, own_[leaf]);
    for (std::uint64_t node = (n_leaves_ + leaf) / 2; node >= 1; node /= 2) {
      std::uint64_t sum = co_await read_child(a, 2 * node);
      sum += co_await read_child(a, 2 * node + 1);
      co_await nodes_[node]->max_write(a, (long long)sum);
    }
  }

  Stepwise<std::uint64_t> read(ActorCtx& a) override {
    if (n_leaves_ == 1) co_return co_await leaves_[0].read(a);
    co_return(std::uint64_t) co_await nodes_[1]->max_read(a);
  }

  std::uint64_t peek() const override {
    if (n_leaves_ == 1) return leaves_[0].peek();
    return (std::uint64_t)nodes_[1]->peek();
  }

  std::uint64_t bound() const override { return l_; }

 private:
  Stepwise<std::uint64_t> read_child(ActorCtx& a, std::uint64_t idx) {
    if (idx >= n_leaves_) co_return co_await leaves_[idx - n_leaves_].read(a);
    co_return(std::uint64_t) co_await nodes_[idx]->max_read(a);
  }

  std::uint64_t l_;
  std::uint64_t n_leaves_;
  std::vector<Reg> leaves_;
  std::vector<std::unique_ptr<RecursiveMaxRegister>> nodes_;
  std::vector<std::uint64_t> own_;  // each actor's private copy of its leaf
  std::atomic<std::uint64_t> started_{0};
};

// Mock: an instantaneous counter, one word, one step per operation.
class AtomicExactCounter final : public ExactCounter {
 public:
  AtomicExactCounter(Runtime& rt, std::uint64_t l) : l_(l), id_(rt.alloc_object_id()) {
    if (rt.backend() != Backend::simulated)
      throw HarnessViolation("atomic-block mocks run only under the simulated backend");
  }

  static constexpr std::uint64_t step_bound() { return 1; }

  std::uint32_t object_id() const { return id_; }

  Stepwise<void> increment(ActorCtx& a) override {
    co_await detail::BlockStepAwaiter{&a, true};
    std::uint64_t v = value_.fetch_add(1, std::memory_order_seq_cst) + 1;
    if (v > l_)
      throw ContractViolation("exact counter incremented past bound " + std::to_string(l_));
    a.rt->log_access(a, id_, AccessKind::block_ctr_inc, (long long)v);
    co_return;
  }

  Stepwise<std::uint64_t> read(ActorCtx& a) override {
    co_await detail::BlockStepAwaiter{&a, false};
    std::uint64_t v = value_.load(std::memory_order_seq_cst);
    a.rt->log_access(a, id_, AccessKind::block_ctr_read, (long long)v);
    co_return v;
  }

  std::uint64_t peek() const override { return value_.load(std::memory_order_seq_cst); }
  std::uint64_t bound() const override { return l_; }

 private:
  std::uint64_t l_;
  std::uint32_t id_;
  std::atomic<std::uint64_t> value_{0};
};

}  // namespace kacc
