// SPDX-License-Identifier: Apache-2.0
//
// scsfri: sparse common-support multipath channel estimation (SCS-FRI)
// Copyright (C) 2026 The scsfri authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace scsfri {

/// Worker count for trial-level parallelism: hardware concurrency, capped by
/// the SCSFRI_THREADS environment variable when set.
inline int thread_budget() {
  int budget = static_cast<int>(std::thread::hardware_concurrency());
  if (budget <= 0) budget = 1;
  if (const char* env = std::getenv("SCSFRI_THREADS")) {
    const long cap = std::strtol(env, nullptr, 10);
    if (cap >= 1 && cap < budget) budget = static_cast<int>(cap);
  }
  return budget;
}

/// Runs body(i) for i in [0, count). Callers must write results into
/// per-index slots and aggregate after the call returns; combined with
/// per-trial seed splitting this keeps every result independent of the
/// thread schedule. The first exception thrown by any worker is rethrown.
inline void parallel_trials(long count, const std::function<void(long)>& body) {
  const long workers = std::min<long>(thread_budget(), count);
  if (workers <= 1) {
    for (long i = 0; i < count; ++i) body(i);
    return;
  }
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (long w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      try {
        for (long i = w; i < count; i += workers) body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace scsfri
