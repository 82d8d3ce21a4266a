#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "kacc/approx_counter.hpp"
#include "kacc/runtime.hpp"

using namespace kacc;

namespace {

void drive_inc(Runtime& rt, ApproxCounter& c, int actor = 0) {
  auto t = c.increment(rt.actor(actor));
  t.handle().resume();
  while (!t.done()) rt.grant_step(rt.actor(actor));
  OpResult r = t.take_result();
  CHECK_FALSE(r.has_value());
}

Rational drive_read(Runtime& rt, ApproxCounter& c, int actor = 0) {
  auto t = c.read(rt.actor(actor));
  t.handle().resume();
  while (!t.done()) rt.grant_step(rt.actor(actor));
  OpResult r = t.take_result();
  REQUIRE(r.has_value());
  return *r;
}

// Steps consumed by one increment, for silent-batching checks.
std::uint64_t inc_steps(Runtime& rt, ApproxCounter& c, int actor = 0) {
  std::uint64_t before = rt.actor(actor).steps_total;
  drive_inc(rt, c, actor);
  return rt.actor(actor).steps_total - before;
}

std::unique_ptr<ApproxCounter> make(Runtime& rt, Algorithm alg, int n, std::uint64_t m,
                                    Rational k, BlockMode mode = BlockMode::registers) {
  CounterConfig cfg;
  cfg.alg = alg;
  cfg.n = n;
  cfg.m = m;
  cfg.k = k;
  cfg.mode = mode;
  return make_counter(rt, cfg);
}

void check_serial_reads(Algorithm alg, int n, std::uint64_t m, Rational k,
                        const std::vector<Rational>& expected, BlockMode mode) {
  // expected[v] is the read value after v serial increments by actor 0.
  Runtime rt(Backend::simulated, n);
  auto c = make(rt, alg, n, m, k, mode);
  REQUIRE(expected.size() == m + 1);
  CHECK(drive_read(rt, *c) == expected[0]);
  for (std::uint64_t v = 1; v <= m; ++v) {
    drive_inc(rt, *c);
    Rational got = drive_read(rt, *c);
    INFO("after ", v, " increments: got ", got.str(), ", expected ", expected[v].str());
    CHECK(got == expected[v]);
    // The relaxed-accuracy window holds at every quiescent point.
    Rational vv((long long)v);
    CHECK(got * k >= vv);
    CHECK(got <= k * vv);
  }
}

std::vector<Rational> rationals(std::initializer_list<Rational> xs) { return xs; }

}  // namespace

// ----- algorithm 1: doubling batches ------------------------------------

TEST_CASE("doubling counter, hand-executed serial sequence, k = 2") {
  // Exponent is posted at increments 1, 2, 4, 8; reads decode k * 2^r.
  std::vector<Rational> expected = {0, 2, 4, 4, 8, 8, 8, 8, 16, 16, 16, 16, 16, 16, 16, 16, 32};
  for (BlockMode mode : {BlockMode::registers, BlockMode::atomic_blocks})
    check_serial_reads(Algorithm::doubling, 2, 16, Rational(2), expected, mode);
}

TEST_CASE("doubling counter with rational k = 3/2 on one actor") {
  std::vector<Rational> expected = {0,
                                    Rational(3, 2),
                                    Rational(3),
                                    Rational(3),
                                    Rational(6),
                                    Rational(6),
                                    Rational(6),
                                    Rational(6),
                                    Rational(12)};
  check_serial_reads(Algorithm::doubling, 1, 8, Rational(3, 2), expected,
                     BlockMode::registers);
}

TEST_CASE("doubling counter: silent increments take zero shared steps") {
  Runtime rt(Backend::simulated, 2);
  auto c = make(rt, Algorithm::doubling, 2, 16, Rational(2));
  CHECK(inc_steps(rt, *c) > 0);   // v=1 posts exponent 0
  CHECK(inc_steps(rt, *c) > 0);   // v=2 posts exponent 1
  CHECK(inc_steps(rt, *c) == 0);  // v=3 absorbed locally
  CHECK(inc_steps(rt, *c) > 0);   // v=4 posts exponent 2
  CHECK(inc_steps(rt, *c) == 0);  // v=5..7 absorbed
  CHECK(inc_steps(rt, *c) == 0);
  CHECK(inc_steps(rt, *c) == 0);
  CHECK(inc_steps(rt, *c) > 0);  // v=8 posts exponent 3
  CHECK(c->exponent_peek() == 3);
}

TEST_CASE("doubling counter regime gate") {
  Runtime rt(Backend::simulated, 3);
  CHECK_THROWS_AS(make(rt, Algorithm::doubling, 3, 8, Rational(2)), std::invalid_argument);
  // k^2 = 4 < 2n = 6 rejected; sqrt(2n) <= k admitted.
  CHECK_NOTHROW(make(rt, Algorithm::doubling, 3, 8, Rational(5, 2)));
}

TEST_CASE("two actors double independently and the exponent merges by maximum") {
  Runtime rt(Backend::simulated, 2);
  auto c = make(rt, Algorithm::doubling, 2, 16, Rational(2));
  drive_inc(rt, *c, 0);  // actor 0 posts 0
  drive_inc(rt, *c, 1);  // actor 1 posts 0 (no effect on the max)
  CHECK(c->exponent_peek() == 0);
  drive_inc(rt, *c, 1);  // actor 1 posts 1
  CHECK(c->exponent_peek() == 1);
  drive_inc(rt, *c, 0);  // actor 0 posts 1 (absorbed by the max)
  CHECK(c->exponent_peek() == 1);
  CHECK(drive_read(rt, *c, 0) == Rational(4));
  // v = 4 true increments: window is [2, 8].
}

// ----- algorithm 2: shared buckets ---------------------------------------

TEST_CASE("bucket counter, hand-executed serial sequence, k = 2") {
  std::vector<Rational> expected = {0, 2, 4, 4, 8, 8, 8, 8, 16};
  for (BlockMode mode : {BlockMode::registers, BlockMode::atomic_blocks})
    check_serial_reads(Algorithm::buckets, 2, 8, Rational(2), expected, mode);
}

TEST_CASE("bucket counter, hand-executed serial sequence, k = 3/2") {
  std::vector<Rational> expected = {0,
                                    Rational(3, 2),
                                    Rational(9, 4),
                                    Rational(27, 8),
                                    Rational(81, 16),
                                    Rational(81, 16),
                                    Rational(243, 32)};
  check_serial_reads(Algorithm::buckets, 2, 6, Rational(3, 2), expected,
                     BlockMode::registers);
}

TEST_CASE("bucket counter: every increment touches shared memory") {
  Runtime rt(Backend::simulated, 2);
  auto c = make(rt, Algorithm::buckets, 2, 8, Rational(2));
  for (int i = 0; i < 8; ++i) CHECK(inc_steps(rt, *c) > 0);
}

TEST_CASE("bucket counter regime gate") {
  Runtime rt(Backend::simulated, 2);
  CHECK_THROWS_AS(make(rt, Algorithm::buckets, 2, 8, Rational(1)), std::invalid_argument);
  CHECK_THROWS_AS(make(rt, Algorithm::buckets, 2, 8, Rational(1, 2)),
                  std::invalid_argument);
  CHECK_NOTHROW(make(rt, Algorithm::buckets, 2, 8, Rational(5, 4)));
  // k barely above 1 drives the exponent range near log_k(m) ~ 200 and
  // k^200 cannot be represented in 128-bit exact arithmetic; the failure
  // is a loud overflow, never a silent rounding.
  CHECK_THROWS_AS(make(rt, Algorithm::buckets, 2, 8, Rational(101, 100)),
                  std::overflow_error);
}

TEST_CASE("bucket counter: concurrent actors share buckets") {
  // Two actors alternate increments; bucket 0 (capacity threshold Xn = 2)
  // fills after two increments regardless of who performed them.
  Runtime rt(Backend::simulated, 2);
  auto c = make(rt, Algorithm::buckets, 2, 8, Rational(2));
  drive_inc(rt, *c, 0);
  CHECK(c->bucket_peeks()[0] == 1);
  drive_inc(rt, *c, 1);
  CHECK(c->bucket_peeks()[0] == 2);
  CHECK(c->exponent_peek() == 1);  // actor 1 saw a full bucket and advanced
  drive_inc(rt, *c, 0);            // actor 0 still points at bucket 0: val 3 >= 2
  CHECK(c->bucket_peeks()[0] == 3);
  CHECK(c->bucket_peeks()[1] == 0);
  CHECK(c->actor_local(0).bucket_idx == 1);
  CHECK(c->actor_local(1).bucket_idx == 1);
  Rational x = drive_read(rt, *c, 1);
  CHECK(x == Rational(4));  // v = 3: window [3/2, 6]
}

// ----- algorithm 3: batched buckets ---------------------------------------

TEST_CASE("batched bucket counter, hand-executed serial sequence, k = 2") {
  std::vector<Rational> expected = {0, 2,  4,  4,  8,  8,  8,  8, 16,
                                    16, 16, 16, 16, 16, 16, 16, 32};
  for (BlockMode mode : {BlockMode::registers, BlockMode::atomic_blocks})
    check_serial_reads(Algorithm::batched_buckets, 2, 16, Rational(2), expected, mode);
}

TEST_CASE("batched bucket counter, hand-executed serial sequence, k = 3") {
  std::vector<Rational> expected = {
      0,  Rational(3),  Rational(3),  Rational(9),  Rational(9),  Rational(9),
      Rational(9),  Rational(9),  Rational(9),  Rational(27), Rational(27), Rational(27),
      Rational(27), Rational(27), Rational(27), Rational(27), Rational(27), Rational(27),
      Rational(27), Rational(27), Rational(27), Rational(27), Rational(27), Rational(27),
      Rational(27), Rational(27), Rational(27), Rational(81)};
  check_serial_reads(Algorithm::batched_buckets, 2, 27, Rational(3), expected,
                     BlockMode::registers);
}

TEST_CASE("batched bucket counter: batching goes silent at higher indices") {
  Runtime rt(Backend::simulated, 2);
  auto c = make(rt, Algorithm::batched_buckets, 2, 16, Rational(2));
  // Increments 1..4 each flush (thresholds 1,1,1,1), 5 is absorbed,
  // 6 flushes, 7 absorbed, 8 flushes, 9..11 absorbed, 12 flushes.
  std::vector<bool> touches = {true, true,  true,  true,  false, true,
                               false, true, false, false, false, true};
  for (bool t : touches) CHECK((inc_steps(rt, *c) > 0) == t);
  CHECK(c->actor_local(0).pending == 0);
  CHECK(c->actor_local(0).flush_at == 4);
  CHECK(c->actor_local(0).bucket_idx == 3);
}

TEST_CASE("batched bucket counter regime gate") {
  Runtime rt(Backend::simulated, 2);
  CHECK_THROWS_AS(make(rt, Algorithm::batched_buckets, 2, 8, Rational(3, 2)),
                  std::invalid_argument);
  CHECK_THROWS_AS(make(rt, Algorithm::batched_buckets, 2, 8, Rational(1)),
                  std::invalid_argument);
  CHECK_NOTHROW(make(rt, Algorithm::batched_buckets, 2, 8, Rational(4)));
}

// ----- shared behavior -----------------------------------------------------

TEST_CASE("the increment budget m is enforced for every algorithm") {
  for (Algorithm alg :
       {Algorithm::doubling, Algorithm::buckets, Algorithm::batched_buckets}) {
    Runtime rt(Backend::simulated, 2);
    auto c = make(rt, alg, 2, 4, Rational(2));
    for (int i = 0; i < 4; ++i) drive_inc(rt, *c, i % 2);
    auto t = c->increment(rt.actor(0));
    t.handle().resume();
    while (!t.done()) rt.grant_step(rt.actor(0));
    CHECK_THROWS_AS(t.take_result(), ContractViolation);
  }
}

TEST_CASE("fresh counters read zero in every configuration") {
  for (Algorithm alg :
       {Algorithm::doubling, Algorithm::buckets, Algorithm::batched_buckets}) {
    for (BlockMode mode : {BlockMode::registers, BlockMode::atomic_blocks}) {
      Runtime rt(Backend::simulated, 2);
      auto c = make(rt, alg, 2, 8, Rational(2), mode);
      CHECK(drive_read(rt, *c) == Rational(0));
      CHECK(c->exponent_peek() == -1);
    }
  }
}

TEST_CASE("atomic blocks and register trees produce identical serial values") {
  for (Algorithm alg :
       {Algorithm::doubling, Algorithm::buckets, Algorithm::batched_buckets}) {
    Runtime rt_reg(Backend::simulated, 2);
    Runtime rt_blk(Backend::simulated, 2);
    auto a = make(rt_reg, alg, 2, 12, Rational(2), BlockMode::registers);
    auto b = make(rt_blk, alg, 2, 12, Rational(2), BlockMode::atomic_blocks);
    std::mt19937_64 rng(42);
    for (std::uint64_t v = 0; v < 12; ++v) {
      int actor = (int)(rng() % 2);
      drive_inc(rt_reg, *a, actor);
      drive_inc(rt_blk, *b, actor);
      int reader = (int)(rng() % 2);
      CHECK(drive_read(rt_reg, *a, reader) == drive_read(rt_blk, *b, reader));
    }
  }
}

TEST_CASE("per-operation step ceilings hold on serial runs") {
  for (Algorithm alg :
       {Algorithm::doubling, Algorithm::buckets, Algorithm::batched_buckets}) {
    for (BlockMode mode : {BlockMode::registers, BlockMode::atomic_blocks}) {
      Runtime rt(Backend::simulated, 2);
      auto c = make(rt, alg, 2, 16, Rational(2), mode);
      for (std::uint64_t v = 0; v < 16; ++v) {
        int actor = (int)(v % 2);
        CHECK(inc_steps(rt, *c, actor) <= c->increment_step_bound());
        std::uint64_t before = rt.actor(actor).steps_total;
        drive_read(rt, *c, actor);
        CHECK(rt.actor(actor).steps_total - before <= c->read_step_bound());
      }
    }
  }
}

TEST_CASE("space accounting matches the constructed arena") {
  struct Config {
    Algorithm alg;
    int n;
    std::uint64_t m;
    Rational k;
  };
  std::vector<Config> table = {
      {Algorithm::doubling, 2, 16, Rational(2)},
      {Algorithm::doubling, 4, 100, Rational(3)},
      {Algorithm::buckets, 2, 8, Rational(2)},
      {Algorithm::buckets, 3, 30, Rational(3, 2)},
      {Algorithm::batched_buckets, 2, 16, Rational(2)},
      {Algorithm::batched_buckets, 3, 100, Rational(3)},
  };
  for (const Config& cfg : table) {
    Runtime rt(Backend::simulated, cfg.n);
    auto c = make(rt, cfg.alg, cfg.n, cfg.m, cfg.k);
    SpaceAccounting sp = c->space(rt);
    CHECK(sp.registers_total == rt.register_count());
    CHECK(sp.registers_1bit == rt.one_bit_register_count());
    CHECK(sp.registers_word == rt.register_count() - rt.one_bit_register_count());
    CHECK(sp.max_registers >= 1);  // the exponent register always exists
    if (cfg.alg == Algorithm::doubling) {
      CHECK(sp.buckets == 0);
      CHECK(sp.max_registers == 1);
    } else {
      CHECK(sp.buckets >= 1);
      CHECK(sp.bucket_bound >= 1);
    }
  }
}

TEST_CASE("space formulas, hand-evaluated") {
  // alg 1, n=2, m=16, k=2: one max register over values -1..4, six values,
  // five switch bits, nothing else.
  {
    Runtime rt(Backend::simulated, 2);
    auto c = make(rt, Algorithm::doubling, 2, 16, Rational(2));
    SpaceAccounting sp = c->space(rt);
    CHECK(sp.max_registers == 1);
    CHECK(sp.registers_total == 5);
    CHECK(sp.registers_1bit == 5);
    CHECK(sp.registers_word == 0);
  }
  // alg 2, n=2, m=8, k=2: X=1, four buckets bounded 4, exponent over
  // -1..3 (five values, four bits). Each bucket: two leaves plus one
  // 4-bounded max register (four bits).
  {
    Runtime rt(Backend::simulated, 2);
    auto c = make(rt, Algorithm::buckets, 2, 8, Rational(2));
    SpaceAccounting sp = c->space(rt);
    CHECK(sp.buckets == 4);
    CHECK(sp.bucket_bound == 4);
    CHECK(sp.registers_total == 4 + 4 * (2 + 4));
    CHECK(sp.registers_word == 4 * 2);
  }
  // alg 3, n=2, m=16, k=2: N=2, four buckets bounded 4, exponent over
  // -1..4 (six values, five bits).
  {
    Runtime rt(Backend::simulated, 2);
    auto c = make(rt, Algorithm::batched_buckets, 2, 16, Rational(2));
    SpaceAccounting sp = c->space(rt);
    CHECK(sp.buckets == 4);
    CHECK(sp.bucket_bound == 4);
    CHECK(sp.registers_total == 5 + 4 * (2 + 4));
    CHECK(sp.registers_word == 4 * 2);
  }
}

TEST_CASE("configuration validation") {
  Runtime rt(Backend::simulated, 1);
  CHECK_THROWS_AS(make(rt, Algorithm::doubling, 0, 8, Rational(2)),
                  std::invalid_argument);
  CHECK_THROWS_AS(make(rt, Algorithm::doubling, 1, 0, Rational(2)),
                  std::invalid_argument);
  CHECK_THROWS_AS(make(rt, Algorithm::buckets, 1, 8, Rational(1)),
                  std::invalid_argument);
}
