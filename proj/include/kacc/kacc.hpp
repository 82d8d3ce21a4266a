#pragma once

// Convenience include for the whole library.

#include "kacc/approx_counter.hpp"
#include "kacc/bench.hpp"
#include "kacc/checker.hpp"
#include "kacc/errors.hpp"
#include "kacc/exact_counter.hpp"
#include "kacc/harness.hpp"
#include "kacc/max_register.hpp"
#include "kacc/rational.hpp"
#include "kacc/runtime.hpp"
#include "kacc/task.hpp"
#include "kacc/trace.hpp"
