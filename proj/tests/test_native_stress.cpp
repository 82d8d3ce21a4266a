#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <atomic>
#include <cstdint>
#include <thread>
#include <vector>

#include "kacc/approx_counter.hpp"
#include "kacc/exact_counter.hpp"
#include "kacc/max_register.hpp"
#include "kacc/runtime.hpp"

using namespace kacc;

namespace {

// Under the native backend every register access is a seq_cst atomic and
// coroutines run to completion on resume, so plain std::thread workers can
// hammer the real constructions.
template <typename T>
T run_native(Stepwise<T> task) {
  task.handle().resume();
  REQUIRE(task.done());
  return task.take_result();
}

inline void run_native_void(Stepwise<void> task) {
  task.handle().resume();
  REQUIRE(task.done());
  task.take_result();
}

inline void run_native_op(Stepwise<OpResult> task) {
  task.handle().resume();
  REQUIRE(task.done());
  task.take_result();
}

inline Rational run_native_read(Stepwise<OpResult> task) {
  task.handle().resume();
  REQUIRE(task.done());
  OpResult r = task.take_result();
  REQUIRE(r.has_value());
  return *r;
}

}  // namespace

TEST_CASE("threads racing a max register never lose the maximum") {
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 4;
    const long long bound = 63;
    Runtime rt(Backend::native, n);
    RecursiveMaxRegister reg(rt, bound);
    std::vector<std::thread> workers;
    for (int a = 0; a < n; ++a)
      workers.emplace_back([&, a] {
        ActorCtx& me = rt.actor(a);
        for (long long v = a; v <= bound; v += n)
          run_native_void(reg.max_write(me, v));
      });
    for (auto& w : workers) w.join();
    // Quiescent read: every value up to the bound was written by someone.
    CHECK(run_native(reg.max_read(rt.actor(0))) == bound);
    CHECK(reg.peek() == bound);
  }
}

TEST_CASE("max-register reads under contention are monotone per thread") {
  const int n = 3;
  const long long bound = 255;
  Runtime rt(Backend::native, n + 1);
  RecursiveMaxRegister reg(rt, bound);
  std::atomic<bool> stop{false};
  std::atomic<bool> failed{false};
  std::thread reader([&] {
    ActorCtx& me = rt.actor(n);
    long long last = -1;
    while (!stop.load(std::memory_order_relaxed)) {
      long long v = run_native(reg.max_read(me));
      if (v < last) failed.store(true, std::memory_order_relaxed);
      last = v;
    }
  });
  std::vector<std::thread> writers;
  for (int a = 0; a < n; ++a)
    writers.emplace_back([&, a] {
      ActorCtx& me = rt.actor(a);
      for (long long v = a; v <= bound; v += n)
        run_native_void(reg.max_write(me, v));
    });
  for (auto& w : writers) w.join();
  stop.store(true, std::memory_order_relaxed);
  reader.join();
  CHECK_FALSE(failed.load());
  CHECK(reg.peek() == bound);
}

TEST_CASE("the tree counter is exact at quiescence under real threads") {
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 4;
    const std::uint64_t per_thread = 64;
    Runtime rt(Backend::native, n);
    TreeExactCounter ctr(rt, n, n * per_thread);
    std::vector<std::thread> workers;
    for (int a = 0; a < n; ++a)
      workers.emplace_back([&, a] {
        ActorCtx& me = rt.actor(a);
        for (std::uint64_t i = 0; i < per_thread; ++i)
          run_native_void(ctr.increment(me));
      });
    for (auto& w : workers) w.join();
    CHECK(run_native(ctr.read(rt.actor(0))) == n * per_thread);
    CHECK(ctr.peek() == n * per_thread);
  }
}

TEST_CASE("tree counter reads never exceed the true count nor trail forever") {
  const int n = 3;
  const std::uint64_t per_thread = 200;
  Runtime rt(Backend::native, n + 1);
  TreeExactCounter ctr(rt, n + 1, n * per_thread);
  std::atomic<bool> stop{false};
  std::atomic<bool> failed{false};
  std::thread reader([&] {
    ActorCtx& me = rt.actor(n);
    std::uint64_t last = 0;
    while (!stop.load(std::memory_order_relaxed)) {
      std::uint64_t v = run_native(ctr.read(me));
      // Reads are monotone and never invent increments.
      if (v < last || v > n * per_thread) failed.store(true, std::memory_order_relaxed);
      last = v;
    }
  });
  std::vector<std::thread> writers;
  for (int a = 0; a < n; ++a)
    writers.emplace_back([&, a] {
      ActorCtx& me = rt.actor(a);
      for (std::uint64_t i = 0; i < per_thread; ++i)
        run_native_void(ctr.increment(me));
    });
  for (auto& w : writers) w.join();
  stop.store(true, std::memory_order_relaxed);
  reader.join();
  CHECK_FALSE(failed.load());
  CHECK(ctr.peek() == n * per_thread);
}

TEST_CASE("approximate counters stay in their accuracy window at quiescence") {
  struct Config {
    Algorithm alg;
    Rational k;
  };
  for (const Config& c : {Config{Algorithm::doubling, Rational(3)},
                          Config{Algorithm::buckets, Rational(2)},
                          Config{Algorithm::batched_buckets, Rational(2)}}) {
    for (int trial = 0; trial < 5; ++trial) {
      const int n = 4;
      const std::uint64_t per_thread = 60;
      const std::uint64_t total = n * per_thread;
      Runtime rt(Backend::native, n);
      CounterConfig cfg;
      cfg.alg = c.alg;
      cfg.n = n;
      cfg.m = total;
      cfg.k = c.k;
      auto ctr = make_counter(rt, cfg);
      std::vector<std::thread> workers;
      for (int a = 0; a < n; ++a)
        workers.emplace_back([&, a] {
          ActorCtx& me = rt.actor(a);
          for (std::uint64_t i = 0; i < per_thread; ++i)
            run_native_op(ctr->increment(me));
        });
      for (auto& w : workers) w.join();
      Rational x = run_native_read(ctr->read(rt.actor(0)));
      INFO("alg ", (int)c.alg, " trial ", trial, " read ", x.str());
      CHECK(x * c.k >= Rational((long long)total));
      CHECK(x <= c.k * Rational((long long)total));
    }
  }
}

TEST_CASE("concurrent reads during updates stay within the global envelope") {
  // While updates are in flight a read may lag, but it can never exceed
  // k times the final total nor regress below a previous read.
  const int n = 3;
  const std::uint64_t per_thread = 80;
  const std::uint64_t total = n * per_thread;
  Runtime rt(Backend::native, n + 1);
  CounterConfig cfg;
  cfg.alg = Algorithm::buckets;
  cfg.n = n + 1;
  cfg.m = total;
  cfg.k = Rational(2);
  auto ctr = make_counter(rt, cfg);
  std::atomic<bool> stop{false};
  std::atomic<bool> failed{false};
  std::thread reader([&] {
    ActorCtx& me = rt.actor(n);
    Rational last(0);
    while (!stop.load(std::memory_order_relaxed)) {
      Rational v = run_native_read(ctr->read(me));
      if (v < last || v > cfg.k * Rational((long long)total))
        failed.store(true, std::memory_order_relaxed);
      last = v;
    }
  });
  std::vector<std::thread> writers;
  for (int a = 0; a < n; ++a)
    writers.emplace_back([&, a] {
      ActorCtx& me = rt.actor(a);
      for (std::uint64_t i = 0; i < per_thread; ++i) {
        Stepwise<OpResult> task = ctr->increment(me);
        task.handle().resume();
        task.take_result();
      }
    });
  for (auto& w : writers) w.join();
  stop.store(true, std::memory_order_relaxed);
  reader.join();
  CHECK_FALSE(failed.load());
  Rational x = run_native_read(ctr->read(rt.actor(0)));
  CHECK(x * cfg.k >= Rational((long long)total));
  CHECK(x <= cfg.k * Rational((long long)total));
}

TEST_CASE("the increment budget is enforced even under thread races") {
  const int n = 4;
  Runtime rt(Backend::native, n);
  CounterConfig cfg;
  cfg.alg = Algorithm::doubling;
  cfg.n = n;
  cfg.m = 100;
  cfg.k = Rational(3);
  auto ctr = make_counter(rt, cfg);
  std::atomic<std::uint64_t> refusals{0};
  std::vector<std::thread> workers;
  for (int a = 0; a < n; ++a)
    workers.emplace_back([&, a] {
      ActorCtx& me = rt.actor(a);
      for (int i = 0; i < 40; ++i) {  // 160 attempts against a budget of 100
        try {
          Stepwise<OpResult> task = ctr->increment(me);
          task.handle().resume();
          task.take_result();
        } catch (const ContractViolation&) {
          refusals.fetch_add(1, std::memory_order_relaxed);
        }
      }
    });
  for (auto& w : workers) w.join();
  CHECK(refusals.load() == 60);
  Rational x = run_native_read(ctr->read(rt.actor(0)));
  CHECK(x * cfg.k >= Rational(100));
  CHECK(x <= cfg.k * Rational(100));
}
