// Command-line front end.
//
//   kacc bench    measure step counts and space for one algorithm
//   kacc explore  enumerate or sample interleavings and check each one
//   kacc check    verdict for a single serialized trace
//
// Every subcommand accepts --config FILE, a flat key=value file whose
// entries mirror the long option names; explicit flags win over the file.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "kacc/kacc.hpp"

namespace {

kacc::Algorithm parse_alg(int v) {
  switch (v) {
    case 1: return kacc::Algorithm::doubling;
    case 2: return kacc::Algorithm::buckets;
    case 3: return kacc::Algorithm::batched_buckets;
  }
  throw CLI::ValidationError("--alg", "algorithm must be 1, 2 or 3");
}

kacc::BlockMode parse_mode(const std::string& s) {
  if (s == "registers") return kacc::BlockMode::registers;
  if (s == "atomic") return kacc::BlockMode::atomic_blocks;
  throw CLI::ValidationError("--mode", "mode must be 'registers' or 'atomic'");
}

std::vector<std::uint64_t> parse_m_list(const std::string& s) {
  std::vector<std::uint64_t> out;
  std::stringstream ss(s);
  std::string part;
  while (std::getline(ss, part, ',')) {
    if (part.empty()) continue;
    out.push_back((std::uint64_t)std::stoull(part));
  }
  if (out.empty()) throw CLI::ValidationError("--m", "expected INT[,INT...]");
  return out;
}

std::ostream& open_out(std::ofstream& file, const std::string& path) {
  if (path.empty() || path == "-") return std::cout;
  file.open(path);
  if (!file) throw CLI::ValidationError("--out", "cannot open " + path);
  return file;
}

struct SharedFlags {
  int alg = 1;
  int n = 2;
  std::string m = "16";
  std::string k = "2";
  std::string mode = "registers";
  std::uint64_t seed = 1;
  std::uint64_t trials = 5;
  std::string out;
  std::string format = "csv";

  void attach(CLI::App* cmd, bool with_output) {
    cmd->add_option("--alg", alg, "algorithm: 1 doubling, 2 buckets, 3 batched buckets")
        ->check(CLI::Range(1, 3));
    cmd->add_option("--n", n, "number of actors")->check(CLI::PositiveNumber);
    cmd->add_option("--m", m, "increment bound, comma list for bench sweeps");
    cmd->add_option("--k", k, "accuracy factor, integer or P/Q");
    cmd->add_option("--mode", mode, "building blocks: registers | atomic");
    cmd->add_option("--seed", seed, "random schedule seed");
    cmd->add_option("--trials", trials, "random schedules per configuration");
    if (with_output) {
      cmd->add_option("--out", out, "output path, '-' for stdout");
      cmd->add_option("--format", format, "csv | json");
    }
    cmd->set_config("--config", "", "flat key=value option file");
  }
};

int cmd_bench(const SharedFlags& f) {
  kacc::BenchConfig cfg;
  cfg.alg = parse_alg(f.alg);
  cfg.n = f.n;
  cfg.ms = parse_m_list(f.m);
  cfg.k = kacc::parse_rational(f.k);
  cfg.mode = parse_mode(f.mode);
  cfg.seed = f.seed;
  cfg.random_trials = f.trials;

  kacc::BenchReport rep = kacc::run_benchmark(cfg);
  std::ofstream file;
  std::ostream& os = open_out(file, f.out);
  if (f.format == "json")
    kacc::write_json(rep, os);
  else if (f.format == "csv")
    kacc::write_csv(rep, os);
  else
    throw CLI::ValidationError("--format", "format must be csv or json");
  std::uint64_t violations = 0;
  bool bounded = true;
  for (const auto& r : rep.rows) {
    violations += r.monitor_violations;
    bounded = bounded && r.within_bounds;
  }
  if (violations || !bounded) {
    std::cerr << "warning: " << violations << " invariant violations, step bounds "
              << (bounded ? "held" : "exceeded") << "\n";
    return 1;
  }
  return 0;
}

int cmd_explore(const SharedFlags& f, std::uint64_t incs, std::uint64_t reads,
                bool exhaustive, bool crashes) {
  std::vector<std::uint64_t> ms = parse_m_list(f.m);
  kacc::WorkloadSpec w;
  {
    std::vector<std::vector<kacc::ScriptOp>> scripts((std::size_t)f.n);
    for (auto& s : scripts) {
      for (std::uint64_t i = 0; i < incs; ++i) s.push_back(kacc::ScriptOp::inc());
      for (std::uint64_t i = 0; i < reads; ++i) s.push_back(kacc::ScriptOp::read());
    }
    w = kacc::WorkloadSpec::counter_workload(parse_alg(f.alg), f.n, ms.front(),
                                             kacc::parse_rational(f.k), parse_mode(f.mode),
                                             std::move(scripts));
  }

  std::ofstream file;
  std::ostream* trace_out = nullptr;
  if (!f.out.empty()) trace_out = &open_out(file, f.out);

  kacc::StreamCheck tally;
  kacc::CounterSpec spec{w.k};
  auto sink = [&](const kacc::ExecutionTrace& t) {
    tally.add(t, kacc::check_history(kacc::history_from_trace(t), spec));
    if (trace_out) t.serialize(*trace_out);
  };

  kacc::ExploreStats stats;
  if (exhaustive) {
    kacc::ExploreOptions opt;
    opt.crash_prefixes = crashes;
    stats = kacc::explore_exhaustive(w, opt, sink);
  } else {
    stats = kacc::explore_random(w, f.seed, f.trials, sink);
  }

  std::cout << "interleavings " << stats.maximal << "\n"
            << "traces " << stats.emitted << "\n"
            << "linearizable " << tally.passed << "\n"
            << "rejected " << tally.rejected << "\n"
            << "inconclusive " << tally.inconclusive << "\n";
  if (tally.first_counterexample) {
    std::cout << "first counterexample:\n" << *tally.first_counterexample;
    std::cout << "reason: " << tally.first_reason << "\n";
  }
  return tally.all_passed() ? 0 : 1;
}

int cmd_check(const std::string& in_path, const std::string& k) {
  kacc::ExecutionTrace t;
  if (in_path.empty() || in_path == "-") {
    t = kacc::ExecutionTrace::parse(std::cin);
  } else {
    std::ifstream in(in_path);
    if (!in) throw CLI::ValidationError("--in", "cannot open " + in_path);
    t = kacc::ExecutionTrace::parse(in);
  }
  kacc::CheckResult r = kacc::check_counter_trace(t, kacc::parse_rational(k));
  switch (r.verdict) {
    case kacc::Verdict::yes: {
      std::cout << "linearizable\nwitness";
      for (std::size_t i : r.witness) std::cout << " " << i;
      std::cout << "\n";
      return 0;
    }
    case kacc::Verdict::no:
      std::cout << "not linearizable\n" << r.reason << "\n";
      return 1;
    case kacc::Verdict::inconclusive:
      std::cout << "inconclusive\n" << r.reason << "\n";
      return 2;
  }
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"wait-free approximate counters: benchmarks, exploration, checking"};
  app.require_subcommand(1);

  SharedFlags bench_flags;
  CLI::App* bench = app.add_subcommand("bench", "measure steps and space");
  bench_flags.attach(bench, true);

  SharedFlags explore_flags;
  std::uint64_t incs = 2, reads = 1;
  bool exhaustive = false, crashes = false;
  CLI::App* explore = app.add_subcommand("explore", "interleave and check");
  explore_flags.attach(explore, true);
  explore->add_option("--incs", incs, "increments per actor");
  explore->add_option("--reads", reads, "reads per actor");
  explore->add_flag("--exhaustive", exhaustive, "all interleavings instead of sampling");
  explore->add_flag("--crash-prefixes", crashes, "also emit every truncated prefix");

  std::string check_in, check_k = "2";
  CLI::App* check = app.add_subcommand("check", "check one serialized trace");
  check->add_option("--in", check_in, "trace file, '-' for stdin");
  check->add_option("--k", check_k, "accuracy factor the trace claims");
  check->set_config("--config", "", "flat key=value option file");

  CLI11_PARSE(app, argc, argv);

  try {
    if (bench->parsed()) return cmd_bench(bench_flags);
    if (explore->parsed()) return cmd_explore(explore_flags, incs, reads, exhaustive, crashes);
    if (check->parsed()) return cmd_check(check_in, check_k);
  } catch (const std::invalid_argument& e) {
    std::cerr << "constraint violated: " << e.what() << "\n";
    return 3;
  } catch (const kacc::BudgetExceeded& e) {
    std::cerr << "budget: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 5;
  }
  return 0;
}
