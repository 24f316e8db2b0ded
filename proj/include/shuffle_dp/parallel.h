// Copyright 2026 The shuffle-dp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SHUFFLE_DP_PARALLEL_H_
#define SHUFFLE_DP_PARALLEL_H_

#include <cstdint>
#include <functional>

namespace shuffle_dp {

// Worker cap from SHUFFLE_ACCT_THREADS, else the hardware concurrency.
int WorkerCount();

// Runs body(i) for i in [0, count) on up to WorkerCount() threads. Indices are
// handed out in contiguous blocks; callers write results into per-index slots
// so the merged output never depends on the schedule.
void ParallelFor(int64_t count, const std::function<void(int64_t)>& body);

}  // namespace shuffle_dp

#endif  // SHUFFLE_DP_PARALLEL_H_
