#pragma once

// Step-complexity and space measurement.
//
// For each requested m, the benchmark scripts an increment-heavy
// workload (every actor performs floor(m/n) increments and then two
// reads), drives it under schedules chosen to hit the extremes (each
// actor solo in both actor orders, lockstep round robin, and a batch of
// seeded random interleavings), and tallies per-operation step counts
// straight from the traces. Alongside the measurements it reports the
// analytical per-operation ceilings and the space taken by the
// constructed object graph, so a report row is a self-contained check
// of both resource claims.
//
// Means are kept as exact rationals; nothing here rounds until the
// moment a value is printed.

#include <cstdint>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "kacc/approx_counter.hpp"
#include "kacc/errors.hpp"
#include "kacc/harness.hpp"
#include "kacc/rational.hpp"
#include "kacc/runtime.hpp"
#include "kacc/trace.hpp"

namespace kacc {

struct BenchConfig {
  Algorithm alg = Algorithm::doubling;
  int n = 2;
  std::vector<std::uint64_t> ms = {16};
  Rational k = 2;
  BlockMode mode = BlockMode::registers;
  std::uint64_t seed = 1;
  std::uint64_t random_trials = 5;
};

struct BenchRow {
  Algorithm alg = Algorithm::doubling;
  int n = 0;
  std::uint64_t m = 0;
  Rational k = 2;
  BlockMode mode = BlockMode::registers;
  std::uint64_t schedules = 0;
  std::uint64_t ops_inc = 0;
  std::uint64_t ops_read = 0;
  std::uint64_t inc_steps_worst = 0;
  Rational inc_steps_mean = 0;
  std::uint64_t read_steps_worst = 0;
  Rational read_steps_mean = 0;
  std::uint64_t inc_step_bound = 0;
  std::uint64_t read_step_bound = 0;
  bool within_bounds = true;
  std::uint64_t monitor_violations = 0;
  SpaceAccounting space;
};

struct BenchReport {
  std::vector<BenchRow> rows;
};

namespace detail {

inline std::vector<std::vector<ScriptOp>> bench_scripts(int n, std::uint64_t m) {
  std::uint64_t per = m / (std::uint64_t)n;
  std::vector<std::vector<ScriptOp>> scripts((std::size_t)n);
  for (auto& s : scripts) {
    for (std::uint64_t i = 0; i < per; ++i) s.push_back(ScriptOp::inc());
    s.push_back(ScriptOp::read());
    s.push_back(ScriptOp::read());
  }
  return scripts;
}

struct StepTally {
  std::uint64_t count = 0;
  std::uint64_t worst = 0;
  std::uint64_t total = 0;
  void add(std::uint64_t steps) {
    ++count;
    total += steps;
    if (steps > worst) worst = steps;
  }
  Rational mean() const { return count == 0 ? Rational(0) : Rational((long long)total) / Rational((long long)count); }
};

}  // namespace detail

inline BenchRow bench_one(Algorithm alg, int n, std::uint64_t m, const Rational& k,
                          BlockMode mode, std::uint64_t seed, std::uint64_t random_trials) {
  BenchRow row;
  row.alg = alg;
  row.n = n;
  row.m = m;
  row.k = k;
  row.mode = mode;

  WorkloadSpec w =
      WorkloadSpec::counter_workload(alg, n, m, k, mode, detail::bench_scripts(n, m));

  // Space and analytic ceilings come from a fresh, unused instance.
  {
    Runtime rt(Backend::simulated, n);
    CounterConfig cfg{alg, n, m, k, mode};
    auto c = make_counter(rt, cfg);
    row.space = c->space(rt);
    row.inc_step_bound = c->increment_step_bound();
    row.read_step_bound = c->read_step_bound();
  }

  detail::StepTally inc, read;
  auto consume = [&](const ExecutionTrace& t, const MonitorReport& mon) {
    ++row.schedules;
    row.monitor_violations += mon.violations;
    for (const OpRecord& op : t.ops) {
      if (!op.completed) continue;
      (op.kind == OpKind::increment ? inc : read).add(op.steps);
    }
  };

  auto run_collect = [&](auto&& runner) {
    SimRun run(w);
    runner(run);
    run.seal();
    consume(run.trace(), run.monitor());
  };

  std::vector<int> fwd(n), rev(n);
  for (int i = 0; i < n; ++i) {
    fwd[(std::size_t)i] = i;
    rev[(std::size_t)i] = n - 1 - i;
  }
  run_collect([&](SimRun& r) {
    for (int a : fwd)
      while (r.actor_enabled(a)) r.step(a);
  });
  run_collect([&](SimRun& r) {
    for (int a : rev)
      while (r.actor_enabled(a)) r.step(a);
  });
  run_collect([&](SimRun& r) {
    while (!r.all_done())
      for (int i = 0; i < n; ++i)
        if (r.actor_enabled(i)) r.step(i);
  });
  std::mt19937_64 rng(seed);
  for (std::uint64_t t = 0; t < random_trials; ++t) {
    run_collect([&](SimRun& r) {
      while (true) {
        auto en = r.enabled();
        if (en.empty()) break;
        r.step(en[detail::draw(rng, en.size())]);
      }
    });
  }

  row.ops_inc = inc.count;
  row.ops_read = read.count;
  row.inc_steps_worst = inc.worst;
  row.inc_steps_mean = inc.mean();
  row.read_steps_worst = read.worst;
  row.read_steps_mean = read.mean();
  row.within_bounds = inc.worst <= row.inc_step_bound && read.worst <= row.read_step_bound;
  return row;
}

inline BenchReport run_benchmark(const BenchConfig& cfg) {
  BenchReport rep;
  for (std::uint64_t m : cfg.ms)
    rep.rows.push_back(
        bench_one(cfg.alg, cfg.n, m, cfg.k, cfg.mode, cfg.seed, cfg.random_trials));
  return rep;
}

// ----- serialization -------------------------------------------------------

// Column order is part of the output contract; both writers emit exactly
// this set of fields per row.
inline const std::vector<std::string>& bench_columns() {
  static const std::vector<std::string> cols = {
      "alg",           "n",
      "m",             "k",
      "k_decimal",     "mode",
      "schedules",     "ops_inc",
      "ops_read",      "inc_steps_worst",
      "inc_steps_mean", "read_steps_worst",
      "read_steps_mean", "inc_step_bound",
      "read_step_bound", "within_bounds",
      "monitor_violations", "max_registers",
      "buckets",       "bucket_bound",
      "registers_total", "registers_1bit",
      "registers_word"};
  return cols;
}

namespace detail {

inline std::string bench_cell(const BenchRow& r, const std::string& col) {
  if (col == "alg") return std::to_string((int)r.alg);
  if (col == "n") return std::to_string(r.n);
  if (col == "m") return std::to_string(r.m);
  if (col == "k") return r.k.str();
  if (col == "k_decimal") return r.k.decimal();
  if (col == "mode") return std::string(to_string(r.mode));
  if (col == "schedules") return std::to_string(r.schedules);
  if (col == "ops_inc") return std::to_string(r.ops_inc);
  if (col == "ops_read") return std::to_string(r.ops_read);
  if (col == "inc_steps_worst") return std::to_string(r.inc_steps_worst);
  if (col == "inc_steps_mean") return r.inc_steps_mean.decimal(4);
  if (col == "read_steps_worst") return std::to_string(r.read_steps_worst);
  if (col == "read_steps_mean") return r.read_steps_mean.decimal(4);
  if (col == "inc_step_bound") return std::to_string(r.inc_step_bound);
  if (col == "read_step_bound") return std::to_string(r.read_step_bound);
  if (col == "within_bounds") return r.within_bounds ? "1" : "0";
  if (col == "monitor_violations") return std::to_string(r.monitor_violations);
  if (col == "max_registers") return std::to_string(r.space.max_registers);
  if (col == "buckets") return std::to_string(r.space.buckets);
  if (col == "bucket_bound") return std::to_string(r.space.bucket_bound);
  if (col == "registers_total") return std::to_string(r.space.registers_total);
  if (col == "registers_1bit") return std::to_string(r.space.registers_1bit);
  if (col == "registers_word") return std::to_string(r.space.registers_word);
  throw HarnessViolation("unknown benchmark column " + col);
}

}  // namespace detail

// CSV with a header row always present, even for an empty report.
inline void write_csv(const BenchReport& rep, std::ostream& os) {
  const auto& cols = bench_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
  os << "\n";
  for (const BenchRow& r : rep.rows) {
    for (std::size_t i = 0; i < cols.size(); ++i)
      os << (i ? "," : "") << detail::bench_cell(r, cols[i]);
    os << "\n";
  }
}

inline std::string to_csv(const BenchReport& rep) {
  std::ostringstream os;
  write_csv(rep, os);
  return os.str();
}

// JSON array of flat objects; the exact field set matches the CSV
// columns (numerics as numbers, rationals and enums as strings).
inline void write_json(const BenchReport& rep, std::ostream& os) {
  os << "[";
  for (std::size_t r = 0; r < rep.rows.size(); ++r) {
    const auto& cols = bench_columns();
    os << (r ? ",\n " : "\n ") << "{";
    for (std::size_t i = 0; i < cols.size(); ++i) {
      const std::string& col = cols[i];
      std::string cell = detail::bench_cell(rep.rows[r], col);
      bool quoted = col == "k" || col == "k_decimal" || col == "mode" ||
                    col == "inc_steps_mean" || col == "read_steps_mean";
      os << (i ? "," : "") << "\"" << col << "\":";
      if (quoted)
        os << "\"" << cell << "\"";
      else
        os << cell;
    }
    os << "}";
  }
  os << (rep.rows.empty() ? "]" : "\n]") << "\n";
}

inline std::string to_json(const BenchReport& rep) {
  std::ostringstream os;
  write_json(rep, os);
  return os.str();
}

}  // namespace kacc
