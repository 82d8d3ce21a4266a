#pragma once

// Linearizability checker for histories drawn from harness traces.
//
// The search is the classic one: repeatedly pick a minimal operation
// (one that no other unlinearized operation precedes in real time),
// check its response against the sequential specification, and recurse,
// memoizing failed sets of linearized operations. State is a pure
// function of that set for every spec here (a count of increments, or
// a running maximum), so the memo key is just the set's bitmask. That
// caps checkable histories at 64 operations, far above what exhaustive
// interleaving exploration can reach anyway.
//
// Pending operations (invoked, no response) are handled without any
// case split. Pending reads return nothing and constrain nothing, so
// they are dropped. A pending update is kept with its response window
// left open to infinity: since an increment or a max-write is always
// legal to append at the very end of a linearization, where it can no
// longer affect any returned value, including it costs nothing, and any
// witness that would exist without it extends to one with it. Forcing
// completion is therefore both sound and complete for these objects.
//
// The relaxed counter specification: a read returns x when v increments
// are linearized before it iff v/k <= x <= k*v, evaluated in exact
// rational arithmetic. k = 1 degenerates to the exact counter.

#include <climits>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "kacc/errors.hpp"
#include "kacc/rational.hpp"
#include "kacc/trace.hpp"

namespace kacc {

struct HistOp {
  OpKind kind = OpKind::increment;
  bool pending = false;
  bool has_arg = false;
  Rational arg = 0;  // max_write argument
  bool has_value = false;
  Rational value = 0;  // response
  long long inv = 0;
  long long res = LLONG_MAX;  // pending ops never precede anything
  int actor = 0;
};

struct History {
  std::vector<HistOp> ops;
};

// Completed ops keep their event interval; pending reads are dropped;
// pending updates stay with an open response window (see header note).
inline History history_from_trace(const ExecutionTrace& t) {
  History h;
  for (const OpRecord& op : t.ops) {
    HistOp e;
    e.kind = op.kind;
    e.actor = op.actor;
    e.inv = op.invoke_index;
    e.has_arg = op.has_arg;
    e.arg = op.arg;
    if (op.completed) {
      e.res = op.respond_index;
      e.has_value = op.has_value;
      e.value = op.value;
    } else {
      bool update = op.kind == OpKind::increment || op.kind == OpKind::max_write;
      if (!update) continue;
      e.pending = true;
    }
    h.ops.push_back(e);
  }
  return h;
}

// ----- sequential specifications ----------------------------------------

// k-multiplicative-accurate counter; k = 1 is the exact counter.
struct CounterSpec {
  Rational k = 2;
  using State = long long;
  State initial() const { return 0; }
  State apply(State s, const HistOp& op) const {
    return op.kind == OpKind::increment ? s + 1 : s;
  }
  bool response_ok(State s, const HistOp& op) const {
    if (op.kind != OpKind::read || !op.has_value) return true;
    Rational v(s);
    return !(op.value * k < v) && !(op.value > k * v);
  }
};

struct MaxRegisterSpec {
  long long initial_value = 0;
  using State = long long;
  State initial() const { return initial_value; }
  State apply(State s, const HistOp& op) const {
    if (op.kind != OpKind::max_write || !op.has_arg) return s;
    long long a = (long long)op.arg.num();
    return a > s ? a : s;
  }
  bool response_ok(State s, const HistOp& op) const {
    if (op.kind != OpKind::max_read) return true;
    return op.has_value && op.value == Rational(s);
  }
};

// ----- search ------------------------------------------------------------

enum class Verdict { yes, no, inconclusive };

struct CheckResult {
  Verdict verdict = Verdict::inconclusive;
  std::vector<std::size_t> witness;  // linearization order, op indices into the history
  std::string reason;
  std::uint64_t nodes = 0;

  bool ok() const { return verdict == Verdict::yes; }
};

inline constexpr std::uint64_t kDefaultNodeBudget = 4'000'000;

// Independent replay of a claimed witness: permutation, real-time order
// preserved, every response legal. Used on every yes verdict and as a
// standalone oracle in tests.
template <class Spec>
bool validate_witness(const History& h, const Spec& spec,
                      const std::vector<std::size_t>& order) {
  if (order.size() != h.ops.size()) return false;
  std::vector<bool> seen(h.ops.size(), false);
  for (std::size_t i : order) {
    if (i >= h.ops.size() || seen[i]) return false;
    seen[i] = true;
  }
  for (std::size_t a = 0; a < order.size(); ++a)
    for (std::size_t b = a + 1; b < order.size(); ++b)
      if (h.ops[order[b]].res < h.ops[order[a]].inv) return false;
  typename Spec::State st = spec.initial();
  for (std::size_t i : order) {
    if (!spec.response_ok(st, h.ops[i])) return false;
    st = spec.apply(st, h.ops[i]);
  }
  return true;
}

template <class Spec>
CheckResult check_history(const History& h, const Spec& spec,
                          std::uint64_t node_budget = kDefaultNodeBudget) {
  CheckResult out;
  const std::size_t n = h.ops.size();
  if (n > 64) {
    out.verdict = Verdict::inconclusive;
    out.reason = "history has " + std::to_string(n) + " operations; checker handles 64";
    return out;
  }
  if (n == 0) {
    out.verdict = Verdict::yes;
    return out;
  }
  const std::uint64_t full = n == 64 ? ~0ull : (1ull << n) - 1;
  std::unordered_set<std::uint64_t> failed;
  std::vector<std::size_t> order;
  order.reserve(n);
  bool budget_hit = false;

  // State along the current path, rebuilt incrementally.
  std::vector<typename Spec::State> states;
  states.reserve(n + 1);
  states.push_back(spec.initial());

  std::function<bool(std::uint64_t)> search = [&](std::uint64_t mask) -> bool {
    if (mask == full) return true;
    if (failed.count(mask)) return false;
    if (++out.nodes > node_budget) {
      budget_hit = true;
      return false;
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (mask & (1ull << i)) continue;
      const HistOp& cand = h.ops[i];
      bool minimal = true;
      for (std::size_t j = 0; j < n && minimal; ++j)
        if (j != i && !(mask & (1ull << j)) && h.ops[j].res < cand.inv) minimal = false;
      if (!minimal) continue;
      if (!spec.response_ok(states.back(), cand)) continue;
      order.push_back(i);
      states.push_back(spec.apply(states.back(), cand));
      if (search(mask | (1ull << i))) return true;
      states.pop_back();
      order.pop_back();
      if (budget_hit) return false;
    }
    failed.insert(mask);
    return false;
  };

  if (search(0)) {
    out.verdict = Verdict::yes;
    out.witness = order;
    if (!validate_witness(h, spec, out.witness)) {
      // Internal inconsistency; never expected, but never silently pass.
      out.verdict = Verdict::no;
      out.reason = "search produced a witness that failed independent replay";
    }
    return out;
  }
  if (budget_hit) {
    out.verdict = Verdict::inconclusive;
    out.reason = "node budget of " + std::to_string(node_budget) + " exhausted";
  } else {
    out.verdict = Verdict::no;
    out.reason = "no ordering of " + std::to_string(n) +
                 " operations satisfies the sequential specification";
  }
  return out;
}

// ----- trace-level conveniences -------------------------------------------

inline CheckResult check_counter_trace(const ExecutionTrace& t, const Rational& k,
                                       std::uint64_t node_budget = kDefaultNodeBudget) {
  return check_history(history_from_trace(t), CounterSpec{k}, node_budget);
}

inline CheckResult check_exact_counter_trace(const ExecutionTrace& t,
                                             std::uint64_t node_budget = kDefaultNodeBudget) {
  return check_history(history_from_trace(t), CounterSpec{Rational(1)}, node_budget);
}

inline CheckResult check_max_register_trace(const ExecutionTrace& t, long long initial,
                                            std::uint64_t node_budget = kDefaultNodeBudget) {
  return check_history(history_from_trace(t), MaxRegisterSpec{initial}, node_budget);
}

// Tally for checking a stream of traces (exploration sinks).
struct StreamCheck {
  std::uint64_t passed = 0;
  std::uint64_t rejected = 0;
  std::uint64_t inconclusive = 0;
  std::optional<std::string> first_counterexample;  // serialized trace
  std::string first_reason;

  void add(const ExecutionTrace& t, const CheckResult& r) {
    switch (r.verdict) {
      case Verdict::yes:
        ++passed;
        break;
      case Verdict::no:
        ++rejected;
        if (!first_counterexample) {
          first_counterexample = t.serialize();
          first_reason = r.reason;
        }
        break;
      case Verdict::inconclusive:
        ++inconclusive;
        if (first_reason.empty()) first_reason = r.reason;
        break;
    }
  }

  bool all_passed() const { return rejected == 0 && inconclusive == 0; }
};

}  // namespace kacc
