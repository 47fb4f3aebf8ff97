// fatlab/util/thread_pool.h

// Copyright 2026  FATLab Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef FATLAB_UTIL_THREAD_POOL_H_
#define FATLAB_UTIL_THREAD_POOL_H_

#include <cstdint>
#include <functional>

namespace fatlab {
namespace util {

// Worker count used by ParallelFor: FATLAB_THREADS if set, otherwise the
// hardware concurrency. Always at least 1.
int WorkerCount();

// Runs fn(i) for i in [0, n). Each index writes only its own outputs, so the
// result is identical for any worker count or schedule. Exceptions from tasks
// are collected and the first one is rethrown after all workers join.
void ParallelFor(int64_t n, const std::function<void(int64_t)> &fn);

}  // namespace util
}  // namespace fatlab

#endif  // FATLAB_UTIL_THREAD_POOL_H_
