// Copyright 2026 the drape-sim authors
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

#include <cstdlib>
#include <cstring>

#include "drape/kernels/kernels.hpp"

namespace drape::kernels {

const Ops* avx2_ops_impl();  // defined in kernels_avx2.cpp

namespace {

bool cpu_has_avx2() {
#if defined(__GNUC__) && (defined(__x86_64__) || defined(__i386__))
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const Ops& select_ops() {
  const Ops* avx2 = avx2_ops();
  if (const char* env = std::getenv("DRAPE_KERNEL")) {
    if (std::strcmp(env, "scalar") == 0) return scalar_ops();
    if (std::strcmp(env, "avx2") == 0 && avx2 != nullptr) return *avx2;
  }
  return avx2 != nullptr ? *avx2 : scalar_ops();
}

}  // namespace

const Ops* avx2_ops() {
  static const Ops* ops = cpu_has_avx2() ? avx2_ops_impl() : nullptr;
  return ops;
}

const Ops& active_ops() {
  static const Ops& ops = select_ops();
  return ops;
}

}  // namespace drape::kernels
