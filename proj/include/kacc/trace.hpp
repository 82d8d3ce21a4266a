#pragma once

// Execution traces. A simulated run produces a flat event sequence
// (invocations, base-object accesses, responses) plus a per-operation
// summary table. Traces serialize to a line-delimited text form with a
// stable field order, so a replayed schedule produces a byte-identical
// file and golden tests can pin exact expected output.

#include <cstdint>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "kacc/errors.hpp"
#include "kacc/rational.hpp"

namespace kacc {

// Which layer counts as the atomic unit of shared memory.
//   registers:    every 1-bit / word register access is one step; the max
//                 register and exact counter run their real constructions.
//   atomic_blocks: each whole max-register or exact-counter operation is
//                 one instantaneous step (mock objects), the granularity
//                 used for exhaustive linearizability checking.
enum class BlockMode { registers, atomic_blocks };

inline const char* to_string(BlockMode m) {
  return m == BlockMode::registers ? "registers" : "atomic";
}

// Operations that can appear in an actor's script.
enum class OpKind { increment, read, max_write, max_read };

inline const char* to_string(OpKind k) {
  switch (k) {
    case OpKind::increment: return "inc";
    case OpKind::read: return "read";
    case OpKind::max_write: return "maxwrite";
    case OpKind::max_read: return "maxread";
  }
  return "?";
}

inline OpKind op_kind_from(const std::string& s) {
  if (s == "inc") return OpKind::increment;
  if (s == "read") return OpKind::read;
  if (s == "maxwrite") return OpKind::max_write;
  if (s == "maxread") return OpKind::max_read;
  throw std::invalid_argument("unknown op kind in trace: " + s);
}

// Base-object access classes, tagged by object layer.
enum class AccessKind {
  reg_read,
  reg_write,
  block_max_read,   // atomic-blocks mode only
  block_max_write,
  block_ctr_inc,
  block_ctr_read,
};

inline const char* to_string(AccessKind a) {
  switch (a) {
    case AccessKind::reg_read: return "r";
    case AccessKind::reg_write: return "w";
    case AccessKind::block_max_read: return "maxr";
    case AccessKind::block_max_write: return "maxw";
    case AccessKind::block_ctr_inc: return "cinc";
    case AccessKind::block_ctr_read: return "cread";
  }
  return "?";
}

inline AccessKind access_kind_from(const std::string& s) {
  if (s == "r") return AccessKind::reg_read;
  if (s == "w") return AccessKind::reg_write;
  if (s == "maxr") return AccessKind::block_max_read;
  if (s == "maxw") return AccessKind::block_max_write;
  if (s == "cinc") return AccessKind::block_ctr_inc;
  if (s == "cread") return AccessKind::block_ctr_read;
  throw std::invalid_argument("unknown access kind in trace: " + s);
}

inline bool is_write_access(AccessKind a) {
  return a == AccessKind::reg_write || a == AccessKind::block_max_write ||
         a == AccessKind::block_ctr_inc;
}

struct Event {
  enum class Kind { invoke, access, respond };
  Kind kind{};
  int actor = 0;
  // invoke / respond
  std::uint32_t op_seq = 0;
  OpKind op{};
  bool has_value = false;
  Rational value;  // invoke: op argument; respond: returned value
  // access
  std::uint32_t obj_id = 0;
  AccessKind access{};
  long long access_value = 0;

  friend bool operator==(const Event&, const Event&) = default;
};

// One high-level operation instance: identity, trace interval, outcome.
struct OpRecord {
  int actor = 0;
  std::uint32_t op_seq = 0;
  OpKind kind{};
  bool has_arg = false;
  Rational arg;
  long long invoke_index = -1;   // position in events, -1 if absent
  long long respond_index = -1;  // -1 while pending
  bool completed = false;
  bool has_value = false;
  Rational value;
  std::uint64_t steps = 0;  // base-object accesses performed by this op
  bool effect = false;      // performed at least one write-class access
};

// How much of the run to record. Invocations and responses are always
// kept (the checker needs them); access events triple trace size and are
// only needed for step-accounting tests, goldens, and debugging.
enum class EventDetail { ops_only, full };

struct ExecutionTrace {
  BlockMode mode = BlockMode::registers;
  int n_actors = 0;
  bool truncated = false;      // schedule ended with operations in flight
  std::uint64_t slots = 0;     // schedule slots consumed (skips excluded)
  std::vector<Event> events;
  std::vector<OpRecord> ops;   // invocation order
  // Final shared state, recorded at end of run.
  std::vector<std::pair<std::uint32_t, std::uint64_t>> final_registers;
  std::vector<std::pair<std::string, long long>> final_objects;

  void serialize(std::ostream& os) const {
    os << "kacctrace 1 " << to_string(mode) << ' ' << n_actors << '\n';
    for (std::size_t i = 0; i < events.size(); ++i) {
      const Event& e = events[i];
      switch (e.kind) {
        case Event::Kind::invoke:
          os << "inv " << i << ' ' << e.actor << ' ' << e.op_seq << ' ' << to_string(e.op);
          if (e.has_value) os << ' ' << e.value.str();
          os << '\n';
          break;
        case Event::Kind::access:
          os << "acc " << i << ' ' << e.actor << ' ' << e.obj_id << ' '
             << to_string(e.access) << ' ' << e.access_value << '\n';
          break;
        case Event::Kind::respond:
          os << "res " << i << ' ' << e.actor << ' ' << e.op_seq << ' ' << to_string(e.op)
             << ' ' << (e.has_value ? e.value.str() : std::string("-")) << '\n';
          break;
      }
    }
    os << "end " << slots << ' ' << (truncated ? 1 : 0) << '\n';
    for (const OpRecord& op : ops) {
      if (!op.completed)
        os << "pending " << op.actor << ' ' << op.op_seq << ' ' << (op.effect ? 1 : 0) << '\n';
    }
    for (const auto& [id, v] : final_registers) os << "state reg " << id << ' ' << v << '\n';
    for (const auto& [name, v] : final_objects) os << "state obj " << name << ' ' << v << '\n';
    for (const OpRecord& op : ops)
      os << "steps " << op.actor << ' ' << op.op_seq << ' ' << op.steps << '\n';
  }

  std::string serialize() const {
    std::ostringstream os;
    serialize(os);
    return os.str();
  }

  static ExecutionTrace parse(std::istream& is);
  static ExecutionTrace parse(const std::string& text) {
    std::istringstream is(text);
    return parse(is);
  }
};

inline ExecutionTrace ExecutionTrace::parse(std::istream& is) {
  ExecutionTrace t;
  std::string line;
  if (!std::getline(is, line)) throw std::invalid_argument("empty trace");
  {
    std::istringstream h(line);
    std::string magic, mode;
    int version = 0;
    h >> magic >> version >> mode >> t.n_actors;
    if (magic != "kacctrace" || version != 1)
      throw std::invalid_argument("not a kacctrace v1 stream: " + line);
    if (mode == "registers")
      t.mode = BlockMode::registers;
    else if (mode == "atomic")
      t.mode = BlockMode::atomic_blocks;
    else
      throw std::invalid_argument("unknown trace mode: " + mode);
  }
  // Rebuild the op table while replaying event lines.
  auto find_op = [&t](int actor, std::uint32_t op_seq) -> OpRecord& {
    for (auto it = t.ops.rbegin(); it != t.ops.rend(); ++it)
      if (it->actor == actor && it->op_seq == op_seq) return *it;
    throw std::invalid_argument("trace response without matching invocation");
  };
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    if (tag == "inv") {
      Event e;
      e.kind = Event::Kind::invoke;
      std::size_t idx;
      std::string op, arg;
      ls >> idx >> e.actor >> e.op_seq >> op;
      e.op = op_kind_from(op);
      if (ls >> arg) {
        e.has_value = true;
        e.value = parse_rational(arg);
      }
      if (idx != t.events.size()) throw std::invalid_argument("trace event out of order");
      OpRecord rec;
      rec.actor = e.actor;
      rec.op_seq = e.op_seq;
      rec.kind = e.op;
      rec.has_arg = e.has_value;
      rec.arg = e.value;
      rec.invoke_index = (long long)t.events.size();
      t.ops.push_back(rec);
      t.events.push_back(e);
    } else if (tag == "acc") {
      Event e;
      e.kind = Event::Kind::access;
      std::size_t idx;
      std::string act;
      ls >> idx >> e.actor >> e.obj_id >> act >> e.access_value;
      e.access = access_kind_from(act);
      if (idx != t.events.size()) throw std::invalid_argument("trace event out of order");
      t.events.push_back(e);
    } else if (tag == "res") {
      Event e;
      e.kind = Event::Kind::respond;
      std::size_t idx;
      std::string op, val;
      ls >> idx >> e.actor >> e.op_seq >> op >> val;
      e.op = op_kind_from(op);
      if (val != "-") {
        e.has_value = true;
        e.value = parse_rational(val);
      }
      if (idx != t.events.size()) throw std::invalid_argument("trace event out of order");
      OpRecord& rec = find_op(e.actor, e.op_seq);
      rec.respond_index = (long long)t.events.size();
      rec.completed = true;
      rec.has_value = e.has_value;
      rec.value = e.value;
      t.events.push_back(e);
    } else if (tag == "end") {
      int trunc = 0;
      ls >> t.slots >> trunc;
      t.truncated = trunc != 0;
    } else if (tag == "pending") {
      int actor;
      std::uint32_t op_seq;
      int eff;
      ls >> actor >> op_seq >> eff;
      find_op(actor, op_seq).effect = eff != 0;
    } else if (tag == "state") {
      std::string what;
      ls >> what;
      if (what == "reg") {
        std::uint32_t id;
        std::uint64_t v;
        ls >> id >> v;
        t.final_registers.emplace_back(id, v);
      } else {
        std::string name;
        long long v;
        ls >> name >> v;
        t.final_objects.emplace_back(name, v);
      }
    } else if (tag == "steps") {
      int actor;
      std::uint32_t op_seq;
      std::uint64_t s;
      ls >> actor >> op_seq >> s;
      find_op(actor, op_seq).steps = s;
    } else {
      throw std::invalid_argument("unknown trace line: " + line);
    }
  }
  // Effect flags for completed ops can be recovered from access events
  // when full detail was recorded; pending lines carry them otherwise.
  for (OpRecord& op : t.ops) {
    if (op.effect) continue;
    long long hi = op.completed ? op.respond_index : (long long)t.events.size();
    for (long long i = op.invoke_index + 1; i < hi; ++i) {
      const Event& e = t.events[i];
      if (e.kind == Event::Kind::access && e.actor == op.actor && is_write_access(e.access)) {
        op.effect = true;
        break;
      }
    }
  }
  return t;
}

}  // namespace kacc
