#pragma once

// Deterministic interleaving harness.
//
// A workload gives each actor a script of operations against one shared
// object (an approximate counter, a bare max register, or an exact
// counter). A schedule is a sequence of actor ids; each slot advances
// the named actor by exactly one base-object access at the workload's
// granularity. Invocations ride on the slot of an operation's first
// access and responses on its last, matching a model where a process
// may invoke, access and respond within a single step; an operation
// that touches no shared memory (a locally absorbed increment) occupies
// one access-free slot. A schedule that ends mid-operation models a
// crash: the trace simply stops with those operations pending.
//
// Replaying a schedule is bit-reproducible: register ids, event order
// and step tallies depend only on the workload and the slot sequence.
//
// The exhaustive explorer walks every distinct maximal interleaving via
// depth-first search over enabled actors (canonical ascending order),
// optionally emitting every proper prefix as a crash trace. State is
// rebuilt by replay on each descent, so no object snapshots are needed.
//
// An always-on invariant monitor watches the shared state after every
// slot: exposed exponents must never regress or skip where the
// algorithms forbid it, buckets must respect their capacity contracts,
// per-operation step counts must stay under the wait-freedom ceilings,
// and any read whose interval overlaps no writer must decode to an
// unambiguously correct value.

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "kacc/approx_counter.hpp"
#include "kacc/errors.hpp"
#include "kacc/exact_counter.hpp"
#include "kacc/max_register.hpp"
#include "kacc/rational.hpp"
#include "kacc/runtime.hpp"
#include "kacc/task.hpp"
#include "kacc/trace.hpp"

namespace kacc {

struct ScriptOp {
  OpKind kind = OpKind::increment;
  long long arg = 0;  // max_write only
  static ScriptOp inc() { return {OpKind::increment, 0}; }
  static ScriptOp read() { return {OpKind::read, 0}; }
  static ScriptOp max_write(long long v) { return {OpKind::max_write, v}; }
  static ScriptOp max_read() { return {OpKind::max_read, 0}; }
};

struct WorkloadSpec {
  enum class Target { counter, max_register, exact_counter };

  Target target = Target::counter;
  int n = 1;
  BlockMode mode = BlockMode::registers;
  std::vector<std::vector<ScriptOp>> scripts;

  // Target::counter
  Algorithm alg = Algorithm::doubling;
  std::uint64_t m = 1;
  Rational k = 2;

  // Target::max_register
  long long mr_bound = 0;
  long long mr_initial = 0;

  // Target::exact_counter
  std::uint64_t ec_bound = 0;

  static WorkloadSpec counter_workload(Algorithm alg, int n, std::uint64_t m, Rational k,
                                       BlockMode mode,
                                       std::vector<std::vector<ScriptOp>> scripts) {
    WorkloadSpec w;
    w.target = Target::counter;
    w.alg = alg;
    w.n = n;
    w.m = m;
    w.k = std::move(k);
    w.mode = mode;
    w.scripts = std::move(scripts);
    return w;
  }

  static WorkloadSpec max_register_workload(int n, long long bound, long long initial,
                                            BlockMode mode,
                                            std::vector<std::vector<ScriptOp>> scripts) {
    WorkloadSpec w;
    w.target = Target::max_register;
    w.n = n;
    w.mr_bound = bound;
    w.mr_initial = initial;
    w.mode = mode;
    w.scripts = std::move(scripts);
    return w;
  }

  static WorkloadSpec exact_counter_workload(int n, std::uint64_t bound, BlockMode mode,
                                             std::vector<std::vector<ScriptOp>> scripts) {
    WorkloadSpec w;
    w.target = Target::exact_counter;
    w.n = n;
    w.ec_bound = bound;
    w.mode = mode;
    w.scripts = std::move(scripts);
    return w;
  }

  std::size_t total_ops() const {
    std::size_t t = 0;
    for (const auto& s : scripts) t += s.size();
    return t;
  }

  void validate() const {
    if ((std::size_t)n != scripts.size())
      throw HarnessViolation("workload has " + std::to_string(scripts.size()) +
                             " scripts for " + std::to_string(n) + " actors");
    if (target == Target::counter) {
      std::size_t incs = 0;
      for (const auto& s : scripts)
        for (const ScriptOp& op : s) {
          if (op.kind == OpKind::max_write || op.kind == OpKind::max_read)
            throw HarnessViolation("max-register ops scripted against a counter target");
          if (op.kind == OpKind::increment) ++incs;
        }
      if (incs > m)
        throw HarnessViolation("scripts carry " + std::to_string(incs) +
                               " increments for an m = " + std::to_string(m) + " counter");
    }
    if (target == Target::max_register) {
      for (const auto& s : scripts)
        for (const ScriptOp& op : s)
          if (op.kind == OpKind::increment || op.kind == OpKind::read)
            throw HarnessViolation("counter ops scripted against a max-register target");
    }
    if (target == Target::exact_counter) {
      for (const auto& s : scripts)
        for (const ScriptOp& op : s)
          if (op.kind == OpKind::max_write || op.kind == OpKind::max_read)
            throw HarnessViolation("max-register ops scripted against an exact-counter target");
    }
  }
};

struct Schedule {
  BlockMode granularity = BlockMode::registers;
  std::vector<int> slots;
};

struct MonitorReport {
  std::uint64_t violations = 0;
  std::vector<std::string> messages;  // first few, for diagnostics

  void flag(const std::string& msg) {
    ++violations;
    if (messages.size() < 8) messages.push_back(msg);
  }
};

class SimRun {
 public:
  explicit SimRun(const WorkloadSpec& w, EventDetail detail = EventDetail::ops_only)
      : w_(w), rt_(Backend::simulated, w.n), detail_(detail) {
    w_.validate();
    trace_.mode = w.mode;
    trace_.n_actors = w.n;
    rt_.attach_trace(&trace_, detail);
    build_target();
    actors_.resize((std::size_t)w.n);
    for (int i = 0; i < w.n; ++i) actors_[(std::size_t)i].script = &w_.scripts[(std::size_t)i];
    mon_last_exponent_ = counter_ ? counter_->exponent_peek()
                        : maxreg_ ? maxreg_->peek()
                                  : 0;
    mon_last_bucket_idx_.assign((std::size_t)w.n, 0);
    mon_last_read_.assign((std::size_t)w.n, std::nullopt);
    mon_read_inv_snapshot_.assign((std::size_t)w.n, 0);
  }

  // Advances the actor by one slot. Returns false (a skip) if the actor
  // has nothing left to run.
  bool step(int actor) {
    if (actor < 0 || actor >= w_.n)
      throw HarnessViolation("schedule names actor " + std::to_string(actor) +
                             " outside 0.." + std::to_string(w_.n - 1));
    ActorState& st = actors_[(std::size_t)actor];
    ActorCtx& ctx = rt_.actor(actor);
    if (!st.live.valid()) {
      if (st.next >= st.script->size()) return false;
      begin_op(actor, (*st.script)[st.next++]);
      st.live.handle().resume();  // runs to the first access point, touches nothing
      if (!st.live.done()) rt_.grant_step(ctx);
    } else {
      rt_.grant_step(ctx);
    }
    trace_.slots += 1;
    if (st.live.done()) end_op(actor);
    if (monitoring_) observe(actor);
    return true;
  }

  bool actor_enabled(int actor) const {
    const ActorState& st = actors_[(std::size_t)actor];
    return st.live.valid() || st.next < st.script->size();
  }

  bool mid_op(int actor) const { return actors_[(std::size_t)actor].live.valid(); }

  std::size_t ops_completed(int actor) const {
    const ActorState& st = actors_[(std::size_t)actor];
    return st.next - (st.live.valid() ? 1 : 0);
  }

  std::vector<int> enabled() const {
    std::vector<int> out;
    for (int i = 0; i < w_.n; ++i)
      if (actor_enabled(i)) out.push_back(i);
    return out;
  }

  bool all_done() const { return enabled().empty(); }

  // Seals the trace: marks truncation, resolves pending-op effect flags,
  // dumps final shared state (full detail only; register dumps of large
  // object graphs are expensive and only golden tests want them).
  void seal() {
    bool pending = false;
    for (int i = 0; i < w_.n; ++i) {
      ActorState& st = actors_[(std::size_t)i];
      if (!st.live.valid()) continue;
      pending = true;
      OpRecord& rec = trace_.ops[st.op_record];
      rec.effect = rt_.actor(i).writes_total > st.writes_before;
      rec.steps = rt_.actor(i).steps_total - st.steps_before;
    }
    trace_.truncated = pending;
    if (detail_ == EventDetail::full) {
      if (w_.mode == BlockMode::registers) rt_.dump_final_registers(trace_);
      if (counter_) {
        trace_.final_objects.emplace_back("exponent", counter_->exponent_peek());
        auto bv = counter_->bucket_peeks();
        for (std::size_t i = 0; i < bv.size(); ++i)
          trace_.final_objects.emplace_back("bucket" + std::to_string(i), (long long)bv[i]);
      } else if (maxreg_) {
        trace_.final_objects.emplace_back("maxreg", maxreg_->peek());
      } else if (exact_) {
        trace_.final_objects.emplace_back("counter", (long long)exact_->peek());
      }
    }
  }

  const ExecutionTrace& trace() const { return trace_; }
  ExecutionTrace take_trace() { return std::move(trace_); }
  const WorkloadSpec& workload() const { return w_; }
  Runtime& runtime() { return rt_; }
  const ApproxCounter* counter() const { return counter_.get(); }
  const MaxRegister* max_register_target() const { return maxreg_.get(); }
  const ExactCounter* exact_counter_target() const { return exact_.get(); }
  const MonitorReport& monitor() const { return monitor_; }
  void set_monitoring(bool on) { monitoring_ = on; }

  std::uint64_t completed_increments() const { return mon_completed_incs_; }

 private:
  struct ActorState {
    const std::vector<ScriptOp>* script = nullptr;
    std::size_t next = 0;
    Stepwise<OpResult> live{};
    std::uint32_t op_seq = 0;
    std::size_t op_record = 0;
    std::uint64_t steps_before = 0;
    std::uint64_t writes_before = 0;
  };

  void build_target() {
    switch (w_.target) {
      case WorkloadSpec::Target::counter: {
        CounterConfig cfg;
        cfg.alg = w_.alg;
        cfg.n = w_.n;
        cfg.m = w_.m;
        cfg.k = w_.k;
        cfg.mode = w_.mode;
        counter_ = make_counter(rt_, cfg);
        break;
      }
      case WorkloadSpec::Target::max_register:
        if (w_.mode == BlockMode::registers)
          maxreg_ = std::make_unique<RecursiveMaxRegister>(rt_, w_.mr_bound, w_.mr_initial);
        else
          maxreg_ = std::make_unique<AtomicMaxRegister>(rt_, w_.mr_bound, w_.mr_initial);
        break;
      case WorkloadSpec::Target::exact_counter:
        if (w_.mode == BlockMode::registers)
          exact_ = std::make_unique<TreeExactCounter>(rt_, w_.n, w_.ec_bound);
        else
          exact_ = std::make_unique<AtomicExactCounter>(rt_, w_.ec_bound);
        break;
    }
  }

  static Stepwise<OpResult> wrap(Stepwise<void> t) {
    co_await std::move(t);
    co_return std::nullopt;
  }
  static Stepwise<OpResult> wrap(Stepwise<long long> t) {
    co_return Rational(co_await std::move(t));
  }
  static Stepwise<OpResult> wrap(Stepwise<std::uint64_t> t) {
    co_return Rational((long long)co_await std::move(t));
  }

  Stepwise<OpResult> dispatch(ActorCtx& ctx, const ScriptOp& op) {
    switch (w_.target) {
      case WorkloadSpec::Target::counter:
        return op.kind == OpKind::increment ? counter_->increment(ctx) : counter_->read(ctx);
      case WorkloadSpec::Target::max_register:
        return op.kind == OpKind::max_write ? wrap(maxreg_->max_write(ctx, op.arg))
                                            : wrap(maxreg_->max_read(ctx));
      case WorkloadSpec::Target::exact_counter:
        return op.kind == OpKind::increment ? wrap(exact_->increment(ctx))
                                            : wrap(exact_->read(ctx));
    }
    throw HarnessViolation("unreachable workload target");
  }

  void begin_op(int actor, const ScriptOp& op) {
    ActorState& st = actors_[(std::size_t)actor];
    ActorCtx& ctx = rt_.actor(actor);
    Event e;
    e.kind = Event::Kind::invoke;
    e.actor = actor;
    e.op_seq = st.op_seq;
    e.op = op.kind;
    if (op.kind == OpKind::max_write) {
      e.has_value = true;
      e.value = Rational(op.arg);
    }
    OpRecord rec;
    rec.actor = actor;
    rec.op_seq = st.op_seq;
    rec.kind = op.kind;
    rec.has_arg = e.has_value;
    rec.arg = e.value;
    rec.invoke_index = (long long)trace_.events.size();
    st.op_record = trace_.ops.size();
    trace_.ops.push_back(rec);
    trace_.events.push_back(e);
    st.steps_before = ctx.steps_total;
    st.writes_before = ctx.writes_total;
    st.live = dispatch(ctx, op);
    if (is_write_op(op.kind)) ++mon_writers_active_;
    if (!is_write_op(op.kind))
      mon_read_inv_snapshot_[(std::size_t)actor] = mon_completed_writes_;
  }

  void end_op(int actor) {
    ActorState& st = actors_[(std::size_t)actor];
    ActorCtx& ctx = rt_.actor(actor);
    OpResult result = st.live.take_result();  // rethrows contract violations
    OpRecord& rec = trace_.ops[st.op_record];
    Event e;
    e.kind = Event::Kind::respond;
    e.actor = actor;
    e.op_seq = st.op_seq;
    e.op = rec.kind;
    if (result.has_value()) {
      e.has_value = true;
      e.value = *result;
    }
    rec.respond_index = (long long)trace_.events.size();
    rec.completed = true;
    rec.has_value = e.has_value;
    rec.value = e.value;
    rec.steps = ctx.steps_total - st.steps_before;
    rec.effect = ctx.writes_total > st.writes_before;
    trace_.events.push_back(e);
    st.live = Stepwise<OpResult>{};
    st.op_seq += 1;
    if (monitoring_) observe_response(actor, rec);
    if (is_write_op(rec.kind)) {
      --mon_writers_active_;
      ++mon_completed_writes_;
      if (rec.kind == OpKind::increment) ++mon_completed_incs_;
      if (rec.kind == OpKind::max_write && rec.has_arg && rec.arg > mon_max_written_)
        mon_max_written_ = rec.arg;
    }
  }

  static bool is_write_op(OpKind k) {
    return k == OpKind::increment || k == OpKind::max_write;
  }

  // ----- invariant monitor -------------------------------------------

  void observe(int actor) {
    // Shared exponent / register value: non-decreasing, and for the
    // algorithms that forbid it, no skipped values.
    long long now = counter_   ? counter_->exponent_peek()
                    : maxreg_  ? maxreg_->peek()
                               : (long long)(exact_ ? exact_->peek() : 0);
    if (now < mon_last_exponent_)
      monitor_.flag("shared value regressed from " + std::to_string(mon_last_exponent_) +
                    " to " + std::to_string(now));
    if (now != mon_last_exponent_ && counter_) {
      if (w_.alg == Algorithm::doubling && now != mon_last_exponent_ + 1)
        monitor_.flag("doubling exponent jumped " + std::to_string(mon_last_exponent_) +
                      " -> " + std::to_string(now));
      if (w_.alg == Algorithm::batched_buckets) {
        auto* c = static_cast<const BatchedBucketCounter*>(counter_.get());
        if (now > c->skip_floor() && now != mon_last_exponent_ + 1)
          monitor_.flag("batched exponent skipped to " + std::to_string(now) + " above " +
                        std::to_string(c->skip_floor()));
      }
    }
    mon_last_exponent_ = now;

    if (counter_) {
      // Buckets only grow through the stepping actor's current index, so
      // checking its neighborhood is enough to catch any overshoot.
      std::uint64_t cap = counter_->bucket_cap();
      if (cap > 0) {
        auto peeks = counter_->bucket_peeks();
        long long idx = counter_->actor_local(actor).bucket_idx;
        for (long long j : {idx - 1, idx})
          if (j >= 0 && (std::size_t)j < peeks.size() && peeks[(std::size_t)j] > cap)
            monitor_.flag("bucket " + std::to_string(j) + " holds " +
                          std::to_string(peeks[(std::size_t)j]) + " above cap " +
                          std::to_string(cap));
        long long last = mon_last_bucket_idx_[(std::size_t)actor];
        if (idx != last && idx != last + 1)
          monitor_.flag("actor " + std::to_string(actor) + " bucket index " +
                        std::to_string(last) + " -> " + std::to_string(idx));
        mon_last_bucket_idx_[(std::size_t)actor] = idx;
      }
      // Local batching state is only coherent between operations.
      if (!actors_[(std::size_t)actor].live.valid()) observe_idle_locals(actor);
    }
    if (exact_ && exact_->peek() > exact_->bound())
      monitor_.flag("exact counter above bound");
  }

  void observe_idle_locals(int actor) {
    ActorLocalView l = counter_->actor_local(actor);
    if (w_.alg == Algorithm::doubling) {
      std::uint64_t want = l.next_exp <= 1 ? 1 : (std::uint64_t)1 << (l.next_exp - 1);
      if (l.flush_at != want)
        monitor_.flag("doubling flush threshold " + std::to_string(l.flush_at) +
                      " != " + std::to_string(want));
      if (l.pending >= l.flush_at)
        monitor_.flag("idle actor holds a full batch");
    }
    if (w_.alg == Algorithm::batched_buckets) {
      std::uint64_t kk = (std::uint64_t)w_.k.num();
      std::uint64_t want = 1;
      if (l.bucket_idx >= 1) {
        want = kk - 1;
        for (long long i = 1; i < l.bucket_idx; ++i) want *= kk;
      }
      if (l.flush_at != want)
        monitor_.flag("batched flush threshold " + std::to_string(l.flush_at) +
                      " != " + std::to_string(want));
      if (l.pending >= l.flush_at)
        monitor_.flag("idle actor holds a full batch");
    }
  }

  void observe_response(int actor, const OpRecord& rec) {
    // Wait-freedom: no operation may run past its step ceiling.
    std::uint64_t ceiling = step_ceiling(rec.kind);
    if (rec.steps > ceiling)
      monitor_.flag(std::string(to_string(rec.kind)) + " took " +
                    std::to_string(rec.steps) + " steps, ceiling " +
                    std::to_string(ceiling));
    if (rec.kind == OpKind::increment || rec.kind == OpKind::max_write) return;

    // Per-actor reads never go backwards.
    auto& last = mon_last_read_[(std::size_t)actor];
    if (rec.has_value) {
      if (last.has_value() && rec.value < *last)
        monitor_.flag("actor " + std::to_string(actor) + " read regressed to " +
                      rec.value.str());
      last = rec.value;
    }

    // A read whose whole interval saw no writer activity has exactly one
    // legal answer; check it on the spot.
    bool unambiguous = mon_writers_active_ == 0 &&
                       mon_completed_writes_ == mon_read_inv_snapshot_[(std::size_t)actor];
    if (!unambiguous || !rec.has_value) return;
    if (counter_) {
      Rational v((long long)mon_completed_incs_);
      if (v.is_zero()) {
        if (!rec.value.is_zero())
          monitor_.flag("read returned " + rec.value.str() + " before any increment");
      } else if (rec.value * w_.k < v || rec.value > w_.k * v) {
        monitor_.flag("quiescent read " + rec.value.str() + " outside [v/k, kv] for v = " +
                      v.str());
      }
    } else if (maxreg_) {
      long long expect = mon_max_written_ > Rational(w_.mr_initial)
                             ? (long long)mon_max_written_.num()
                             : w_.mr_initial;
      if (rec.value != Rational(expect))
        monitor_.flag("quiescent max read " + rec.value.str() + " != " +
                      std::to_string(expect));
    } else if (exact_) {
      if (rec.value != Rational((long long)mon_completed_incs_))
        monitor_.flag("quiescent exact read " + rec.value.str() + " != " +
                      std::to_string(mon_completed_incs_));
    }
  }

  std::uint64_t step_ceiling(OpKind kind) const {
    if (counter_)
      return kind == OpKind::increment ? counter_->increment_step_bound()
                                       : counter_->read_step_bound();
    if (maxreg_) {
      if (w_.mode == BlockMode::atomic_blocks) return AtomicMaxRegister::step_bound();
      return RecursiveMaxRegister::step_bound(
          (std::uint64_t)(w_.mr_bound - w_.mr_initial + 1));
    }
    if (w_.mode == BlockMode::atomic_blocks) return AtomicExactCounter::step_bound();
    return kind == OpKind::increment
               ? TreeExactCounter::increment_step_bound(w_.n, w_.ec_bound)
               : TreeExactCounter::read_step_bound(w_.n, w_.ec_bound);
  }

  WorkloadSpec w_;
  Runtime rt_;
  EventDetail detail_;
  ExecutionTrace trace_;
  std::vector<ActorState> actors_;
  std::unique_ptr<ApproxCounter> counter_;
  std::unique_ptr<MaxRegister> maxreg_;
  std::unique_ptr<ExactCounter> exact_;

  bool monitoring_ = true;
  MonitorReport monitor_;
  long long mon_last_exponent_ = 0;
  std::vector<long long> mon_last_bucket_idx_;
  std::vector<std::optional<Rational>> mon_last_read_;
  std::vector<std::uint64_t> mon_read_inv_snapshot_;
  std::uint64_t mon_writers_active_ = 0;
  std::uint64_t mon_completed_writes_ = 0;
  std::uint64_t mon_completed_incs_ = 0;
  Rational mon_max_written_ = Rational(-1);
};

// ----- schedule execution ---------------------------------------------

// Runs an explicit schedule to its end. Slots naming an exhausted actor
// are skipped; the trace is truncated if operations are still in flight
// when the slots run out.
inline ExecutionTrace run_schedule(const WorkloadSpec& w, const Schedule& s,
                                   EventDetail detail = EventDetail::ops_only) {
  if (s.granularity != w.mode)
    throw HarnessViolation("schedule granularity does not match the workload's "
                           "building-block mode");
  SimRun run(w, detail);
  for (int a : s.slots) run.step(a);
  run.seal();
  return run.take_trace();
}

namespace detail {

// Deterministic cross-platform bounded draw (std::uniform_int_distribution
// is implementation-defined, which would break seed-stable goldens).
inline std::size_t draw(std::mt19937_64& rng, std::size_t bound) {
  return (std::size_t)(rng() % bound);
}

}  // namespace detail

// Random fair schedule: uniformly picks among actors that still have
// work until none do. Same seed, same trace, byte for byte.
inline ExecutionTrace run_random(const WorkloadSpec& w, std::uint64_t seed,
                                 EventDetail detail = EventDetail::ops_only) {
  SimRun run(w, detail);
  std::mt19937_64 rng(seed);
  while (true) {
    auto en = run.enabled();
    if (en.empty()) break;
    run.step(en[detail::draw(rng, en.size())]);
  }
  run.seal();
  return run.take_trace();
}

// Random schedule that keeps every read blocked until all increments in
// the workload have completed; used by quiescent-accuracy suites where
// the true count at each read must be unambiguous.
inline ExecutionTrace run_random_increments_first(const WorkloadSpec& w, std::uint64_t seed,
                                                  EventDetail detail = EventDetail::ops_only) {
  SimRun run(w, detail);
  std::mt19937_64 rng(seed);
  while (true) {
    std::vector<int> inc_phase;
    for (int i = 0; i < w.n; ++i) {
      if (!run.actor_enabled(i)) continue;
      // Mid-operation actors must drain; idle actors join only if their
      // next scripted op is an increment.
      const auto& script = w.scripts[(std::size_t)i];
      std::size_t done = run.ops_completed(i);
      if (run.mid_op(i) ||
          (done < script.size() && script[done].kind == OpKind::increment)) {
        inc_phase.push_back(i);
      }
    }
    if (inc_phase.empty()) break;
    run.step(inc_phase[detail::draw(rng, inc_phase.size())]);
  }
  while (true) {
    auto en = run.enabled();
    if (en.empty()) break;
    run.step(en[detail::draw(rng, en.size())]);
  }
  run.seal();
  return run.take_trace();
}

// Runs whole actors back to back in the given order (every remaining op
// of order[0], then order[1], ...). Models a run where everyone else is
// suspended; the extreme case for wait-freedom and step measurements.
inline ExecutionTrace run_actor_order(const WorkloadSpec& w, const std::vector<int>& order,
                                      EventDetail detail = EventDetail::ops_only) {
  SimRun run(w, detail);
  for (int a : order)
    while (run.actor_enabled(a)) run.step(a);
  run.seal();
  return run.take_trace();
}

// One slot per live actor, cycling, until everyone is done. Maximal
// lockstep contention.
inline ExecutionTrace run_round_robin(const WorkloadSpec& w,
                                      EventDetail detail = EventDetail::ops_only) {
  SimRun run(w, detail);
  while (!run.all_done())
    for (int i = 0; i < w.n; ++i)
      if (run.actor_enabled(i)) run.step(i);
  run.seal();
  return run.take_trace();
}

// ----- exploration ------------------------------------------------------

struct ExploreOptions {
  bool crash_prefixes = false;
  std::uint64_t trace_budget = 2'000'000;  // emitted traces before refusing
  EventDetail detail = EventDetail::ops_only;
};

struct ExploreStats {
  std::uint64_t maximal = 0;
  std::uint64_t emitted = 0;
};

using TraceSink = std::function<void(const ExecutionTrace&)>;

// Every maximal interleaving of the workload exactly once (DFS, actors
// tried in ascending id order), plus every proper prefix as a truncated
// trace when crash_prefixes is set. State is rebuilt by replaying the
// path, so exploration cost is sum of node depths.
inline ExploreStats explore_exhaustive(const WorkloadSpec& w, const ExploreOptions& opt,
                                       const TraceSink& sink) {
  w.validate();
  if (w.mode == BlockMode::atomic_blocks) {
    if (w.n > 3 || w.total_ops() > 6)
      throw BudgetExceeded("exhaustive exploration in atomic-blocks mode is guarded to "
                           "n <= 3 and at most 6 operations");
  } else {
    if (w.n > 2 || w.total_ops() > 4)
      throw BudgetExceeded("exhaustive exploration at register granularity is guarded to "
                           "n <= 2 and at most 4 operations");
  }
  ExploreStats stats;
  std::vector<int> path;
  auto emit = [&](SimRun& run) {
    if (stats.emitted >= opt.trace_budget)
      throw BudgetExceeded("exploration exceeded its trace budget of " +
                           std::to_string(opt.trace_budget));
    run.seal();
    ++stats.emitted;
    sink(run.trace());
  };
  std::function<void()> dfs = [&]() {
    SimRun run(w, opt.detail);
    for (int a : path) run.step(a);
    std::vector<int> en = run.enabled();
    if (en.empty()) {
      ++stats.maximal;
      emit(run);
      return;
    }
    if (opt.crash_prefixes && !path.empty()) emit(run);
    for (int a : en) {
      path.push_back(a);
      dfs();
      path.pop_back();
    }
  };
  dfs();
  return stats;
}

// trials random-fair schedules from consecutive draws of one seeded
// generator; identical seed, identical trace stream.
inline ExploreStats explore_random(const WorkloadSpec& w, std::uint64_t seed,
                                   std::uint64_t trials, const TraceSink& sink,
                                   EventDetail detail = EventDetail::ops_only) {
  w.validate();
  ExploreStats stats;
  std::mt19937_64 rng(seed);
  for (std::uint64_t t = 0; t < trials; ++t) {
    SimRun run(w, detail);
    while (true) {
      auto en = run.enabled();
      if (en.empty()) break;
      run.step(en[detail::draw(rng, en.size())]);
    }
    run.seal();
    ++stats.maximal;
    ++stats.emitted;
    sink(run.trace());
  }
  return stats;
}

}  // namespace kacc
