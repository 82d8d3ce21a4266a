#pragma once

// Wait-free k-multiplicative-accurate bounded counters over read-write
// registers. A counter admits up to m increments across n actors; every
// read returns a value x with v/k <= x <= k*v for the true count v at
// the read's linearization point. All three variants share one shape: a
// single bounded max register exposes an exponent r, reads decode r into
// a value, and increments advance r rarely enough to stay cheap.
//
//   doubling (alg 1):        each actor batches its own increments with a
//     locally doubling flush threshold and max-writes a new exponent when
//     the batch fills. Reads decode k * 2^r. Needs k^2 >= 2n: the local
//     batches other actors cannot see must fit inside the slack k grants.
//
//   buckets (alg 2):         increments land in a shared exact counter (a
//     "bucket"); when a bucket fills past X*n (X = 1/(k-1)) the actor
//     moves to the next bucket. The exponent tracks floor(log_k) of the
//     amount stored so far. Reads decode k^(r+1). Works for any k > 1.
//
//   batched buckets (alg 3): integer k >= 2 only. Actors batch locally
//     with geometrically growing thresholds and post batches into a short
//     run of buckets sized around N = k^ceil(log_k n). Combines the cheap
//     reads of the bucket scheme with increments whose register is only
//     touched every few batches.
//
// There is no floating point on any of these paths; comparisons against
// X*n and exponent extraction run on exact rationals.

#include <atomic>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "kacc/errors.hpp"
#include "kacc/exact_counter.hpp"
#include "kacc/max_register.hpp"
#include "kacc/rational.hpp"
#include "kacc/runtime.hpp"
#include "kacc/task.hpp"
#include "kacc/trace.hpp"

namespace kacc {

enum class Algorithm : int { doubling = 1, buckets = 2, batched_buckets = 3 };

inline const char* to_string(Algorithm a) {
  switch (a) {
    case Algorithm::doubling: return "doubling";
    case Algorithm::buckets: return "buckets";
    case Algorithm::batched_buckets: return "batched-buckets";
  }
  return "?";
}

struct CounterConfig {
  Algorithm alg = Algorithm::doubling;
  int n = 1;            // actors
  std::uint64_t m = 1;  // increment budget
  Rational k = 2;       // accuracy factor, > 1
  BlockMode mode = BlockMode::registers;
};

// Rejects configurations outside an algorithm's regime before anything is
// derived from them, so callers always see the named constraint rather
// than a downstream arithmetic error.
inline void validate_counter_config(const CounterConfig& cfg) {
  if (cfg.n < 1) throw std::invalid_argument("counter needs at least one actor");
  if (cfg.m < 1) throw std::invalid_argument("increment budget m must be positive");
  if (!(cfg.k > Rational(1)))
    throw std::invalid_argument("accuracy factor k must exceed 1, got " + cfg.k.str());
  switch (cfg.alg) {
    case Algorithm::doubling:
      if (!(cfg.k * cfg.k >= Rational(2 * (long long)cfg.n)))
        throw std::invalid_argument("doubling counter requires k^2 >= 2n; got k = " +
                                    cfg.k.str() + ", n = " + std::to_string(cfg.n));
      break;
    case Algorithm::buckets:
      break;  // any k > 1
    case Algorithm::batched_buckets:
      if (!cfg.k.is_integer() || cfg.k < Rational(2))
        throw std::invalid_argument(
            "batched-bucket counter requires an integer k >= 2; got " + cfg.k.str());
      break;
  }
}

// Counted (not recomputed) sizes of a constructed counter.
struct SpaceAccounting {
  std::size_t max_registers = 0;
  std::size_t buckets = 0;
  std::uint64_t bucket_bound = 0;
  std::size_t registers_total = 0;  // 0 in atomic-blocks mode
  std::size_t registers_1bit = 0;
  std::size_t registers_word = 0;
};

// Snapshot of one actor's private bookkeeping, for invariant monitors.
struct ActorLocalView {
  std::uint64_t pending = 0;    // increments absorbed but not yet exposed
  std::uint64_t flush_at = 0;   // batch size that triggers the next exposure
  long long next_exp = 0;       // next exponent this actor will write (alg 1)
  long long bucket_idx = 0;     // bucket the actor currently posts to (alg 2/3)
};

using OpResult = std::optional<Rational>;

class ApproxCounter {
 public:
  virtual ~ApproxCounter() = default;

  virtual Stepwise<OpResult> increment(ActorCtx& a) = 0;
  virtual Stepwise<OpResult> read(ActorCtx& a) = 0;

  const CounterConfig& config() const { return cfg_; }

  // Debug/monitor views; cost no steps.
  long long exponent_peek() const { return exponent_->peek(); }
  virtual std::vector<std::uint64_t> bucket_peeks() const { return {}; }
  virtual std::uint64_t bucket_cap() const { return 0; }
  virtual ActorLocalView actor_local(int actor) const = 0;

  // Ceilings for the wait-freedom assertions: no operation may exceed
  // these step counts under any schedule.
  virtual std::uint64_t increment_step_bound() const = 0;
  virtual std::uint64_t read_step_bound() const = 0;

  std::size_t bucket_count() const { return bucket_count_; }
  long long exponent_bound() const { return exponent_->bound(); }

  SpaceAccounting space(const Runtime& rt) const {
    SpaceAccounting s;
    s.max_registers = 1;
    s.buckets = bucket_count_;
    s.bucket_bound = bucket_cap();
    if (cfg_.mode == BlockMode::registers) {
      s.registers_total = rt.register_count();
      s.registers_1bit = rt.one_bit_register_count();
      s.registers_word = s.registers_total - s.registers_1bit;
    }
    return s;
  }

 protected:
  ApproxCounter(Runtime& rt, const CounterConfig& cfg, long long exponent_bound)
      : cfg_(cfg) {
    if (cfg.n < 1) throw std::invalid_argument("counter needs at least one actor");
    if (cfg.m < 1) throw std::invalid_argument("increment budget m must be positive");
    if (!(cfg.k > Rational(1)))
      throw std::invalid_argument("accuracy factor k must exceed 1, got " + cfg.k.str());
    if (cfg.mode == BlockMode::registers)
      exponent_ = std::make_unique<RecursiveMaxRegister>(rt, exponent_bound, -1);
    else
      exponent_ = std::make_unique<AtomicMaxRegister>(rt, exponent_bound, -1);
  }

  void charge_increment() {
    std::uint64_t used = budget_used_.fetch_add(1, std::memory_order_seq_cst) + 1;
    if (used > cfg_.m)
      throw ContractViolation("increment budget m = " + std::to_string(cfg_.m) +
                              " exhausted");
  }

  std::uint64_t exponent_op_steps() const {
    if (cfg_.mode == BlockMode::atomic_blocks) return AtomicMaxRegister::step_bound();
    return RecursiveMaxRegister::step_bound(
        (std::uint64_t)(exponent_->bound() - exponent_->initial() + 1));
  }

  CounterConfig cfg_;
  std::unique_ptr<MaxRegister> exponent_;
  std::size_t bucket_count_ = 0;
  std::atomic<std::uint64_t> budget_used_{0};
};

// ---------------------------------------------------------------------
// Algorithm 1: per-actor doubling batches, exponent decodes as k * 2^r.
// Valid when k^2 >= 2n.
// ---------------------------------------------------------------------

class DoublingCounter final : public ApproxCounter {
 public:
  DoublingCounter(Runtime& rt, const CounterConfig& cfg)
      : ApproxCounter(rt, cfg, checked_bound(cfg)) {
    locals_.resize((std::size_t)cfg.n);
  }

  static long long checked_bound(const CounterConfig& cfg) {
    validate_counter_config(cfg);
    return ceil_log(Rational(2), Rational((long long)cfg.m));
  }

  Stepwise<OpResult> increment(ActorCtx& a) override {
    charge_increment();
    Local& me = locals_[(std::size_t)a.id];
    me.pending += 1;
    if (me.pending == me.flush_at) {
      co_await exponent_->max_write(a, me.next_exp);
      me.next_exp += 1;
      me.pending = 0;
      if (me.next_exp >= 2) me.flush_at *= 2;
    }
    co_return std::nullopt;
  }

  Stepwise<OpResult> read(ActorCtx& a) override {
    long long r = co_await exponent_->max_read(a);
    if (r < 0) co_return Rational(0);
    co_return cfg_.k * rational_pow(Rational(2), r);
  }

  ActorLocalView actor_local(int actor) const override {
    const Local& l = locals_[(std::size_t)actor];
    return {l.pending, l.flush_at, l.next_exp, 0};
  }

  std::uint64_t increment_step_bound() const override { return exponent_op_steps(); }
  std::uint64_t read_step_bound() const override { return exponent_op_steps(); }

 private:
  struct Local {
    std::uint64_t pending = 0;
    std::uint64_t flush_at = 1;
    long long next_exp = 0;
  };
  std::vector<Local> locals_;
};

// ---------------------------------------------------------------------
// Algorithm 2: shared buckets of exact counters, exponent decodes as
// k^(r+1). Valid for any k > 1.
// ---------------------------------------------------------------------

class BucketCounter final : public ApproxCounter {
 public:
  BucketCounter(Runtime& rt, const CounterConfig& cfg)
      : ApproxCounter(rt, cfg, checked_bound(cfg)) {
    // X = 1/(k-1); a bucket retires once it holds at least X*n.
    shift_ = Rational(1) / (cfg.k - Rational(1));
    per_bucket_ = shift_ * Rational((long long)cfg.n);
    std::uint64_t want = (std::uint64_t)(Rational((long long)cfg.m) / per_bucket_).ceil();
    cap_ = (std::uint64_t)((per_bucket_ + Rational((long long)cfg.n)).ceil());
    buckets_.reserve(want);
    for (std::uint64_t i = 0; i < want; ++i) buckets_.push_back(make_bucket(rt, cfg, cap_));
    bucket_count_ = buckets_.size();
    locals_.resize((std::size_t)cfg.n);
  }

  static long long checked_bound(const CounterConfig& cfg) {
    validate_counter_config(cfg);
    return ceil_log(cfg.k, Rational((long long)cfg.m));
  }

  Stepwise<OpResult> increment(ActorCtx& a) override {
    charge_increment();
    Local& me = locals_[(std::size_t)a.id];
    if ((std::size_t)me.idx >= buckets_.size())
      throw ContractViolation("bucket index ran past the constructed bucket array");
    ExactCounter& bucket = *buckets_[(std::size_t)me.idx];
    co_await bucket.increment(a);
    std::uint64_t val = co_await bucket.read(a);
    Rational base = Rational(me.idx) * per_bucket_;
    if (Rational((long long)val) < per_bucket_) {
      co_await exponent_->max_write(a, floor_log(cfg_.k, Rational((long long)val) + base));
    } else {
      me.idx += 1;
      co_await exponent_->max_write(a, floor_log(cfg_.k, Rational(me.idx) * per_bucket_));
    }
    co_return std::nullopt;
  }

  Stepwise<OpResult> read(ActorCtx& a) override {
    long long r = co_await exponent_->max_read(a);
    if (r < 0) co_return Rational(0);
    co_return rational_pow(cfg_.k, r + 1);
  }

  std::vector<std::uint64_t> bucket_peeks() const override {
    std::vector<std::uint64_t> v;
    v.reserve(buckets_.size());
    for (const auto& b : buckets_) v.push_back(b->peek());
    return v;
  }
  std::uint64_t bucket_cap() const override { return cap_; }

  ActorLocalView actor_local(int actor) const override {
    return {0, 0, 0, locals_[(std::size_t)actor].idx};
  }

  std::uint64_t increment_step_bound() const override {
    if (cfg_.mode == BlockMode::atomic_blocks) return 3;
    return TreeExactCounter::increment_step_bound(cfg_.n, cap_) +
           TreeExactCounter::read_step_bound(cfg_.n, cap_) + exponent_op_steps();
  }
  std::uint64_t read_step_bound() const override { return exponent_op_steps(); }

 private:
  struct Local {
    long long idx = 0;
  };

  static std::unique_ptr<ExactCounter> make_bucket(Runtime& rt, const CounterConfig& cfg,
                                                   std::uint64_t cap) {
    if (cfg.mode == BlockMode::registers)
      return std::make_unique<TreeExactCounter>(rt, cfg.n, cap);
    return std::make_unique<AtomicExactCounter>(rt, cap);
  }

  Rational shift_;       // X
  Rational per_bucket_;  // X * n, the retirement level
  std::uint64_t cap_;    // per-bucket capacity contract
  std::vector<std::unique_ptr<ExactCounter>> buckets_;
  std::vector<Local> locals_;
};

// ---------------------------------------------------------------------
// Algorithm 3: locally batched posts into buckets sized around
// N = k^ceil(log_k n); integer k >= 2.
// ---------------------------------------------------------------------

class BatchedBucketCounter final : public ApproxCounter {
 public:
  BatchedBucketCounter(Runtime& rt, const CounterConfig& cfg)
      : ApproxCounter(rt, cfg, checked_bound(cfg)) {
    k_int_ = (std::uint64_t)cfg.k.num();
    base_exp_ = ceil_log(cfg.k, Rational((long long)cfg.n));
    batch_unit_ = 1;
    for (long long i = 0; i < base_exp_; ++i) batch_unit_ *= k_int_;  // N = k^ceil(log_k n)
    std::uint64_t per_actor = (std::uint64_t)ceil_div((long long)cfg.m, cfg.n);
    long long want = ceil_log(cfg.k, Rational((long long)per_actor)) + 1;
    if (want < 1) want = 1;
    cap_ = 2 * batch_unit_;
    buckets_.reserve((std::size_t)want);
    for (long long i = 0; i < want; ++i) buckets_.push_back(make_bucket(rt, cfg, cap_));
    bucket_count_ = buckets_.size();
    locals_.resize((std::size_t)cfg.n);
  }

  static long long checked_bound(const CounterConfig& cfg) {
    validate_counter_config(cfg);
    return ceil_log(cfg.k, Rational((long long)cfg.m));
  }

  Stepwise<OpResult> increment(ActorCtx& a) override {
    charge_increment();
    Local& me = locals_[(std::size_t)a.id];
    me.pending += 1;
    if (me.pending != me.flush_at) co_return std::nullopt;  // absorbed locally, no step
    if ((std::size_t)me.idx >= buckets_.size())
      throw ContractViolation("bucket index ran past the constructed bucket array");
    ExactCounter& bucket = *buckets_[(std::size_t)me.idx];
    co_await bucket.increment(a);
    me.pending = 0;
    std::uint64_t val = co_await bucket.read(a);
    if (me.idx == 0 && val < batch_unit_)
      co_await exponent_->max_write(a, floor_log(cfg_.k, Rational((long long)val)));
    if (val >= batch_unit_) {
      co_await exponent_->max_write(a, base_exp_ + me.idx);
      me.idx += 1;
      if (me.idx > 1) me.flush_at *= k_int_;
      if (me.idx == 1) me.flush_at = k_int_ - 1;
    }
    co_return std::nullopt;
  }

  Stepwise<OpResult> read(ActorCtx& a) override {
    long long r = co_await exponent_->max_read(a);
    if (r < 0) co_return Rational(0);
    co_return rational_pow(cfg_.k, r + 1);
  }

  std::vector<std::uint64_t> bucket_peeks() const override {
    std::vector<std::uint64_t> v;
    v.reserve(buckets_.size());
    for (const auto& b : buckets_) v.push_back(b->peek());
    return v;
  }
  std::uint64_t bucket_cap() const override { return cap_; }

  // Values above base_exp_ may not be skipped in the exponent's history;
  // values below it may. The monitor needs the split point.
  long long skip_floor() const { return base_exp_; }

  ActorLocalView actor_local(int actor) const override {
    const Local& l = locals_[(std::size_t)actor];
    return {l.pending, l.flush_at, 0, l.idx};
  }

  std::uint64_t increment_step_bound() const override {
    if (cfg_.mode == BlockMode::atomic_blocks) return 3;
    return TreeExactCounter::increment_step_bound(cfg_.n, cap_) +
           TreeExactCounter::read_step_bound(cfg_.n, cap_) + exponent_op_steps();
  }
  std::uint64_t read_step_bound() const override { return exponent_op_steps(); }

 private:
  struct Local {
    std::uint64_t pending = 0;
    std::uint64_t flush_at = 1;
    long long idx = 0;
  };

  static std::unique_ptr<ExactCounter> make_bucket(Runtime& rt, const CounterConfig& cfg,
                                                   std::uint64_t cap) {
    if (cfg.mode == BlockMode::registers)
      return std::make_unique<TreeExactCounter>(rt, cfg.n, cap);
    return std::make_unique<AtomicExactCounter>(rt, cap);
  }

  std::uint64_t k_int_;
  long long base_exp_;       // ceil(log_k n)
  std::uint64_t batch_unit_; // N = k^base_exp_
  std::uint64_t cap_;        // 2N
  std::vector<std::unique_ptr<ExactCounter>> buckets_;
  std::vector<Local> locals_;
};

inline std::unique_ptr<ApproxCounter> make_counter(Runtime& rt, const CounterConfig& cfg) {
  switch (cfg.alg) {
    case Algorithm::doubling: return std::make_unique<DoublingCounter>(rt, cfg);
    case Algorithm::buckets: return std::make_unique<BucketCounter>(rt, cfg);
    case Algorithm::batched_buckets: return std::make_unique<BatchedBucketCounter>(rt, cfg);
  }
  throw std::invalid_argument("unknown algorithm id");
}

}  // namespace kacc
