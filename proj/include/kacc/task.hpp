#pragma once

// Stepwise<T>: a coroutine whose body pauses before every shared-memory
// access, so a scheduler can interleave concurrent operations at exactly
// one access per grant. Nested calls (an increment that calls into a max
// register that recurses into its children) chain through symmetric
// transfer: resuming the innermost suspension runs the whole call chain
// until the next access point, then control returns to the scheduler.
//
// Under the free-running (native) backend the access awaiters never
// suspend, so the same operation bodies execute straight through on real
// threads with no scheduler involved.

#include <coroutine>
#include <exception>
#include <optional>
#include <utility>

namespace kacc {

template <class T>
class Stepwise;

namespace detail {

template <class Promise>
struct FinalTransfer {
  bool await_ready() noexcept { return false; }
  std::coroutine_handle<> await_suspend(std::coroutine_handle<Promise> h) noexcept {
    auto cont = h.promise().continuation;
    return cont ? cont : std::noop_coroutine();
  }
  void await_resume() noexcept {}
};

struct PromiseBase {
  std::coroutine_handle<> continuation{};
  std::exception_ptr error{};
  std::suspend_always initial_suspend() noexcept { return {}; }
  void unhandled_exception() { error = std::current_exception(); }
};

}  // namespace detail

template <class T>
class [[nodiscard]] Stepwise {
 public:
  struct promise_type : detail::PromiseBase {
    std::optional<T> value{};
    Stepwise get_return_object() {
      return Stepwise(std::coroutine_handle<promise_type>::from_promise(*this));
    }
    detail::FinalTransfer<promise_type> final_suspend() noexcept { return {}; }
    void return_value(T v) { value.emplace(std::move(v)); }
  };

  Stepwise() = default;
  explicit Stepwise(std::coroutine_handle<promise_type> h) : h_(h) {}
  Stepwise(Stepwise&& o) noexcept : h_(std::exchange(o.h_, {})) {}
  Stepwise& operator=(Stepwise&& o) noexcept {
    if (this != &o) {
      if (h_) h_.destroy();
      h_ = std::exchange(o.h_, {});
    }
    return *this;
  }
  Stepwise(const Stepwise&) = delete;
  Stepwise& operator=(const Stepwise&) = delete;
  ~Stepwise() {
    if (h_) h_.destroy();
  }

  bool valid() const { return h_ != nullptr; }
  bool done() const { return h_.done(); }
  std::coroutine_handle<> handle() const { return h_; }

  // Result of a finished task; rethrows anything the body threw.
  T take_result() {
    if (h_.promise().error) std::rethrow_exception(h_.promise().error);
    return std::move(*h_.promise().value);
  }

  struct Awaiter {
    std::coroutine_handle<promise_type> child;
    bool await_ready() { return false; }
    std::coroutine_handle<> await_suspend(std::coroutine_handle<> parent) {
      child.promise().continuation = parent;
      return child;
    }
    T await_resume() {
      if (child.promise().error) std::rethrow_exception(child.promise().error);
      return std::move(*child.promise().value);
    }
  };
  Awaiter operator co_await() && { return Awaiter{h_}; }

 private:
  std::coroutine_handle<promise_type> h_{};
};

template <>
class [[nodiscard]] Stepwise<void> {
 public:
  struct promise_type : detail::PromiseBase {
    Stepwise get_return_object() {
      return Stepwise(std::coroutine_handle<promise_type>::from_promise(*this));
    }
    detail::FinalTransfer<promise_type> final_suspend() noexcept { return {}; }
    void return_void() {}
  };

  Stepwise() = default;
  explicit Stepwise(std::coroutine_handle<promise_type> h) : h_(h) {}
  Stepwise(Stepwise&& o) noexcept : h_(std::exchange(o.h_, {})) {}
  Stepwise& operator=(Stepwise&& o) noexcept {
    if (this != &o) {
      if (h_) h_.destroy();
      h_ = std::exchange(o.h_, {});
    }
    return *this;
  }
  Stepwise(const Stepwise&) = delete;
  Stepwise& operator=(const Stepwise&) = delete;
  ~Stepwise() {
    if (h_) h_.destroy();
  }

  bool valid() const { return h_ != nullptr; }
  bool done() const { return h_.done(); }
  std::coroutine_handle<> handle() const { return h_; }

  void take_result() {
    if (h_.promise().error) std::rethrow_exception(h_.promise().error);
  }

  struct Awaiter {
    std::coroutine_handle<promise_type> child;
    bool await_ready() { return false; }
    std::coroutine_handle<> await_suspend(std::coroutine_handle<> parent) {
      child.promise().continuation = parent;
      return child;
    }
    void await_resume() {
      if (child.promise().error) std::rethrow_exception(child.promise().error);
    }
  };
  Awaiter operator co_await() && { return Awaiter{h_}; }

 private:
  std::coroutine_handle<promise_type> h_{};
};

}  // namespace kacc
