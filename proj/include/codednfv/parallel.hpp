#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

#include "codednfv/error.hpp"

namespace codednfv {

inline constexpr const char* kWorkersEnvVar = "CODEDNFV_WORKERS";

/// Worker count from CODEDNFV_WORKERS, else the hardware concurrency.
inline std::size_t default_workers() {
  if (const char* env = std::getenv(kWorkersEnvVar); env != nullptr && *env != '\0') {
    char* end = nullptr;
    const unsigned long v = std::strtoul(env, &end, 10);
    if (end != nullptr && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
    throw Error(ErrorKind::InvalidArg, std::string(kWorkersEnvVar) + " must be a positive integer, got '" + env + "'");
  }
  return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

/// Runs body(acc, trial) for every trial in [0, trials), splitting the range
/// into contiguous chunks, one accumulator per worker, then folds the
/// accumulators left to right with merge(into, from). When the merge is
/// commutative the result does not depend on the worker count.
template <class Acc, class MakeAcc, class Body, class Merge>
Acc parallel_trials(std::uint64_t trials, std::size_t workers, MakeAcc make_acc, Body body, Merge merge) {
  workers = std::max<std::size_t>(1, std::min<std::uint64_t>(workers, std::max<std::uint64_t>(trials, 1)));
  std::vector<Acc> accs;
  accs.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) accs.push_back(make_acc());

  auto run_chunk = [&](std::size_t w) {
    const std::uint64_t begin = trials * w / workers;
    const std::uint64_t end = trials * (w + 1) / workers;
    for (std::uint64_t t = begin; t < end; ++t) body(accs[w], t);
  };

  if (workers == 1) {
    run_chunk(0);
  } else {
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      threads.emplace_back([&, w] {
        try {
          run_chunk(w);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& th : threads) th.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }
  for (std::size_t w = 1; w < workers; ++w) merge(accs[0], accs[w]);
  return std::move(accs[0]);
}

}  // namespace codednfv
