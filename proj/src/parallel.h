/*
 * Copyright 2026 The RLT Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef RLT_SRC_PARALLEL_H_
#define RLT_SRC_PARALLEL_H_

#include <omp.h>

namespace rlt::internal {

inline int ResolveThreads(int requested) {
  return requested > 0 ? requested : omp_get_max_threads();
}

}  // namespace rlt::internal

#endif  // RLT_SRC_PARALLEL_H_
