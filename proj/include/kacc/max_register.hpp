#pragma once

// Bounded max register built from 1-bit read-write registers.
//
// A register holding one of V values is a 1-bit switch plus a left child
// holding the lower ceil(V/2) values and a right child holding the upper
// floor(V/2). Writing a value in the upper half first writes the right
// child, then sets the switch; writing the lower half reads the switch
// and quietly skips the write if the upper half is already active (the
// value being written can no longer be the maximum). Reads follow the
// switch. Both operations touch at most ceil(log2 V) registers, and a
// V = 1 node stores nothing at all.
//
// Counter algorithms want an initial value of -1 ("no increment has been
// exposed yet"), so construction takes an inclusive external domain
// [initial, bound] and shifts it onto internal values 0..V-1.
//
// The atomic mock variant collapses each operation to a single scheduler
// step over one word, which is how the linearizability checker realizes
// the assumption that building-block operations are instantaneous. It is
// selected explicitly by configuration, never silently.

#include <bit>
#include <cstdint>
#include <memory>

#include "kacc/errors.hpp"
#include "kacc/runtime.hpp"
#include "kacc/task.hpp"

namespace kacc {

inline std::uint64_t ceil_log2(std::uint64_t v) {
  return v <= 1 ? 0 : (std::uint64_t)std::bit_width(v - 1);
}

class MaxRegister {
 public:
  virtual ~MaxRegister() = default;
  virtual Stepwise<long long> max_read(ActorCtx& a) = 0;
  virtual Stepwise<void> max_write(ActorCtx& a, long long v) = 0;
  // Instantaneous externally-visible value (what a max_read running alone
  // right now would return). Debug/monitor view only; costs no steps.
  virtual long long peek() const = 0;
  virtual long long bound() const = 0;
  virtual long long initial() const = 0;
};

class RecursiveMaxRegister final : public MaxRegister {
 public:
  RecursiveMaxRegister(Runtime& rt, long long bound, long long initial = 0)
      : bound_(bound), initial_(initial) {
    if (bound < initial)
      throw std::invalid_argument("max register bound below initial value");
    values_ = (std::uint64_t)(bound - initial + 1);
    root_ = build(rt, values_);
  }

  // Steps per operation for a register holding value_count values; used
  // by wait-freedom assertions.
  static std::uint64_t step_bound(std::uint64_t value_count) {
    return ceil_log2(value_count);
  }

  std::uint64_t value_count() const { return values_; }
  std::uint64_t switch_registers() const { return values_ - 1; }

  Stepwise<long long> max_read(ActorCtx& a) override {
    std::uint64_t u = co_await read_node(a, root_.get());
    co_return initial_ + (long long)u;
  }

  Stepwise<void> max_write(ActorCtx& a, long long v) override {
    if (v < initial_ || v > bound_)
      throw ContractViolation("max register write " + std::to_string(v) +
                              " outside [" + std::to_string(initial_) + ", " +
                              std::to_string(bound_) + "]");
    co_await write_node(a, root_.get(), (std::uint64_t)(v - initial_));
  }

  long long peek() const override {
    const Node* n = root_.get();
    std::uint64_t u = 0;
    while (n->values > 1) {
      if (n->sw.peek() == 1) {
        u += n->left_values;
        n = n->right.get();
      } else {
        n = n->left.get();
      }
    }
    return initial_ + (long long)u;
  }

  long long bound() const override { return bound_; }
  long long initial() const override { return initial_; }

 private:
  struct Node {
    std::uint64_t values = 1;       // how many distinct values this subtree holds
    std::uint64_t left_values = 0;  // ceil(values/2), offset of the right half
    Reg sw;                         // 1-bit; 0 = value lives left, 1 = right
    std::unique_ptr<Node> left, right;
  };

  static std::unique_ptr<Node> build(Runtime& rt, std::uint64_t values) {
    auto n = std::make_unique<Node>();
    n->values = values;
    if (values >= 2) {
      n->left_values = (values + 1) / 2;
      n->sw = Reg(rt, 1);
      n->left = build(rt, n->left_values);
      n->right = build(rt, values - n->left_values);
    }
    return n;
  }

  static Stepwise<std::uint64_t> read_node(ActorCtx& a, const Node* n) {
    if (n->values == 1) co_return 0;
    if ((co_await n->sw.read(a)) == 1)
      co_return n->left_values + co_await read_node(a, n->right.get());
    co_return co_await read_node(a, n->left.get());
  }

  static Stepwise<void> write_node(ActorCtx& a, Node* n, std::uint64_t u) {
    if (n->values == 1) co_return;
    if (u < n->left_values) {
      // Skip the descent if the register already holds an upper-half
      // value; writing a smaller one must not disturb it.
      if ((co_await n->sw.read(a)) == 0) co_await write_node(a, n->left.get(), u);
    } else {
      co_await write_node(a, n->right.get(), u - n->left_values);
      co_await n->sw.write(a, 1);
    }
  }

  long long bound_;
  long long initial_;
  std::uint64_t values_;
  std::unique_ptr<Node> root_;
};

// Single-word mock: every operation is one instantaneous scheduler step.
class AtomicMaxRegister final : public MaxRegister {
 public:
  AtomicMaxRegister(Runtime& rt, long long bound, long long initial = 0)
      : bound_(bound), initial_(initial), id_(rt.alloc_object_id()) {
    if (rt.backend() != Backend::simulated)
      throw HarnessViolation("atomic-block mocks run only under the simulated backend");
    if (bound < initial)
      throw std::invalid_argument("max register bound below initial value");
    value_.store(initial, std::memory_order_relaxed);
  }

  static constexpr std::uint64_t step_bound() { return 1; }

  std::uint32_t object_id() const { return id_; }

  Stepwise<long long> max_read(ActorCtx& a) override {
    co_await detail::BlockStepAwaiter{&a, false};
    long long v = value_.load(std::memory_order_seq_cst);
    a.rt->log_access(a, id_, AccessKind::block_max_read, v);
    co_return v;
  }

  Stepwise<void> max_write(ActorCtx& a, long long v) override {
    if (v < initial_ || v > bound_)
      throw ContractViolation("max register write " + std::to_string(v) +
                              " outside [" + std::to_string(initial_) + ", " +
                              std::to_string(bound_) + "]");
    co_await detail::BlockStepAwaiter{&a, true};
    long long cur = value_.load(std::memory_order_seq_cst);
    if (v > cur) value_.store(v, std::memory_order_seq_cst);
    a.rt->log_access(a, id_, AccessKind::block_max_write, v);
    co_return;
  }

  long long peek() const override { return value_.load(std::memory_order_seq_cst); }
  long long bound() const override { return bound_; }
  long long initial() const override { return initial_; }

 private:
  long long bound_;
  long long initial_;
  std::uint32_t id_;
  std::atomic<long long> value_;
};

}  // namespace kacc
