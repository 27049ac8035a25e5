// Copyright 2026 The hdmerge Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef HDMERGE__EXECUTION_HPP_
#define HDMERGE__EXECUTION_HPP_

namespace hdmerge
{

/// Selects the serial reference loop or the OpenMP loop for kernels that have both. Both produce
/// bit-identical results.
enum class Execution { serial, parallel };

/// Number of OpenMP threads for parallel kernels; 0 keeps the runtime default.
void set_thread_count(int threads);
int thread_count();

}  // namespace hdmerge

#endif  // HDMERGE__EXECUTION_HPP_
