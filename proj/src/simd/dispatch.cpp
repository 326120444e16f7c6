/*
 * Copyright 2026 The lblm-ava Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <atomic>
#include <cstdlib>
#include <string>

#include "lblm/error.hpp"
#include "lblm/simd/kernels.hpp"

namespace lblm::simd {
namespace {

bool cpu_has_avx2() {
#if defined(LBLM_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable& table_for(Isa isa) {
  switch (isa) {
#if defined(LBLM_HAVE_AVX2)
    case Isa::kAvx2:
      return avx2_kernels();
#endif
#if defined(LBLM_HAVE_NEON)
    case Isa::kNeon:
      return neon_kernels();
#endif
    default:
      return scalar_kernels();
  }
}

Isa detect() {
  if (const char* env = std::getenv("LBLM_ISA")) {
    const std::string v = env;
    if (v == "scalar") return Isa::kScalar;
    if (v == "avx2" && isa_supported(Isa::kAvx2)) return Isa::kAvx2;
    if (v == "neon" && isa_supported(Isa::kNeon)) return Isa::kNeon;
  }
  if (isa_supported(Isa::kAvx2)) return Isa::kAvx2;
  if (isa_supported(Isa::kNeon)) return Isa::kNeon;
  return Isa::kScalar;
}

struct State {
  std::atomic<Isa> isa{detect()};
  std::atomic<const KernelTable*> table{&table_for(isa.load())};
};

State& state() {
  static State s;
  return s;
}

}  // namespace

bool isa_supported(Isa isa) {
  switch (isa) {
    case Isa::kScalar:
      return true;
    case Isa::kAvx2:
      return cpu_has_avx2();
    case Isa::kNeon:
#if defined(LBLM_HAVE_NEON)
      return true;
#else
      return false;
#endif
  }
  return false;
}

Isa active_isa() { return state().isa.load(); }

void set_isa(Isa isa) {
  if (!isa_supported(isa)) {
    throw ParameterError("ISA " + std::string(isa_name(isa)) + " is not available on this build/CPU");
  }
  state().isa.store(isa);
  state().table.store(&table_for(isa));
}

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::kScalar:
      return "scalar";
    case Isa::kAvx2:
      return "avx2";
    case Isa::kNeon:
      return "neon";
  }
  return "unknown";
}

const KernelTable& kernels() { return *state().table.load(std::memory_order_relaxed); }

}  // namespace lblm::simd
