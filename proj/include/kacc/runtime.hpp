#pragma once

// Shared-memory substrate. A Runtime owns the registers an object graph
// is built from and mediates every access to them.
//
// Two backends share one code path:
//   simulated: operations are Stepwise coroutines; each register access
//              suspends until the harness grants the actor a step, then
//              executes, is counted, and optionally logged. Single
//              logical thread, fully deterministic.
//   native:    accesses never suspend; the same operation bodies run to
//              completion on real threads over std::atomic words.
//
// Register ids grow monotonically in construction order, so two runs of
// the same configuration produce identical ids and replayable traces.

#include <atomic>
#include <coroutine>
#include <cstdint>
#include <deque>
#include <string>

#include "kacc/errors.hpp"
#include "kacc/trace.hpp"

namespace kacc {

enum class Backend { native, simulated };

class Runtime;

// Per-actor execution context. In simulated mode the scheduler resumes
// resume_point to grant one step; the tallies are monotone counters the
// harness differences to get per-operation step counts.
struct ActorCtx {
  Runtime* rt = nullptr;
  int id = 0;
  std::coroutine_handle<> resume_point{};
  std::uint64_t steps_total = 0;   // +1 per base-object access, never reset
  std::uint64_t writes_total = 0;  // +1 per write-class access
};

namespace detail {

struct RegSlot {
  std::atomic<std::uint64_t> value;
  std::uint64_t max_value;
  std::uint32_t id;
};

}  // namespace detail

class Runtime {
 public:
  Runtime(Backend backend, int n_actors)
      : backend_(backend), actors_((std::size_t)n_actors) {
    for (int i = 0; i < n_actors; ++i) {
      actors_[i].rt = this;
      actors_[i].id = i;
    }
  }
  Runtime(const Runtime&) = delete;
  Runtime& operator=(const Runtime&) = delete;

  Backend backend() const { return backend_; }
  int n_actors() const { return (int)actors_.size(); }
  ActorCtx& actor(int i) { return actors_[(std::size_t)i]; }

  // --- arena ---------------------------------------------------------

  detail::RegSlot* alloc_register(std::uint64_t max_value, std::uint64_t initial = 0) {
    regs_.emplace_back();
    detail::RegSlot& r = regs_.back();
    r.value.store(initial, std::memory_order_relaxed);
    r.max_value = max_value;
    r.id = next_id_++;
    return &r;
  }

  // Ids for atomic-block mock objects come from the same monotone space
  // as registers so every trace obj_id is unique within a run.
  std::uint32_t alloc_object_id() { return next_id_++; }

  std::size_t register_count() const { return regs_.size(); }
  std::size_t one_bit_register_count() const {
    std::size_t n = 0;
    for (const auto& r : regs_)
      if (r.max_value == 1) ++n;
    return n;
  }

  void dump_final_registers(ExecutionTrace& t) const {
    for (const auto& r : regs_)
      t.final_registers.emplace_back(r.id, r.value.load(std::memory_order_relaxed));
  }

  // --- simulated-mode plumbing (driven by the harness) -----------------

  void attach_trace(ExecutionTrace* t, EventDetail detail) {
    trace_ = t;
    detail_ = detail;
  }

  // Grants one step to the actor's suspended operation and runs it until
  // the next suspension point (or completion).
  void grant_step(ActorCtx& a) {
    step_open_ = true;
    a.resume_point.resume();
    step_open_ = false;
  }

  // --- access implementation (called from awaiters) --------------------

  std::uint64_t perform_reg(ActorCtx& a, detail::RegSlot& reg, bool is_write,
                            std::uint64_t wval) {
    if (backend_ == Backend::simulated && !step_open_)
      throw HarnessViolation("register access outside a granted scheduler step");
    a.steps_total += 1;
    if (is_write) {
      if (wval > reg.max_value)
        throw ContractViolation("register write " + std::to_string(wval) +
                                " above bound " + std::to_string(reg.max_value));
      a.writes_total += 1;
      reg.value.store(wval, std::memory_order_seq_cst);
      log_access(a, reg.id, AccessKind::reg_write, (long long)wval);
      return wval;
    }
    std::uint64_t v = reg.value.load(std::memory_order_seq_cst);
    log_access(a, reg.id, AccessKind::reg_read, (long long)v);
    return v;
  }

  void count_block_step(ActorCtx& a, bool is_write) {
    if (!step_open_)
      throw HarnessViolation("block access outside a granted scheduler step");
    a.steps_total += 1;
    if (is_write) a.writes_total += 1;
  }

  void log_access(ActorCtx& a, std::uint32_t obj_id, AccessKind kind, long long value) {
    if (trace_ == nullptr || detail_ != EventDetail::full) return;
    Event e;
    e.kind = Event::Kind::access;
    e.actor = a.id;
    e.obj_id = obj_id;
    e.access = kind;
    e.access_value = value;
    trace_->events.push_back(e);
  }

 private:
  Backend backend_;
  std::deque<detail::RegSlot> regs_;  // deque: stable addresses, atomics never move
  std::uint32_t next_id_ = 0;
  std::vector<ActorCtx> actors_;
  bool step_open_ = false;
  ExecutionTrace* trace_ = nullptr;
  EventDetail detail_ = EventDetail::ops_only;
};

namespace detail {

struct RegAccessAwaiter {
  ActorCtx* actor;
  RegSlot* reg;
  bool is_write;
  std::uint64_t wval;
  bool await_ready() const { return actor->rt->backend() == Backend::native; }
  void await_suspend(std::coroutine_handle<> h) { actor->resume_point = h; }
  std::uint64_t await_resume() { return actor->rt->perform_reg(*actor, *reg, is_write, wval); }
};

// Suspension point for atomic-block mocks: one scheduler step covers the
// whole block operation that follows the co_await.
struct BlockStepAwaiter {
  ActorCtx* actor;
  bool is_write;
  bool await_ready() const { return false; }  // mocks exist only under the scheduler
  void await_suspend(std::coroutine_handle<> h) { actor->resume_point = h; }
  void await_resume() { actor->rt->count_block_step(*actor, is_write); }
};

}  // namespace detail

// Handle to one bounded register. Copyable; the slot lives in the arena.
class Reg {
 public:
  Reg() = default;
  Reg(Runtime& rt, std::uint64_t max_value, std::uint64_t initial = 0)
      : slot_(rt.alloc_register(max_value, initial)) {}

  detail::RegAccessAwaiter read(ActorCtx& a) const {
    return {&a, slot_, false, 0};
  }
  detail::RegAccessAwaiter write(ActorCtx& a, std::uint64_t v) const {
    return {&a, slot_, true, v};
  }

  // Debug view of the current value; not a step, not an access. Used by
  // invariant monitors and quiescent assertions only.
  std::uint64_t peek() const { return slot_->value.load(std::memory_order_seq_cst); }
  std::uint32_t id() const { return slot_->id; }

 private:
  detail::RegSlot* slot_ = nullptr;
};

}  // namespace kacc
