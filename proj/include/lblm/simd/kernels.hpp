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

#pragma once

#include <cstddef>
#include <string_view>

// Inner-loop kernels with a scalar reference and per-ISA variants. The active
// variant is chosen once at startup from CPUID (or LBLM_ISA=scalar|avx2|neon)
// and may be overridden by tests through set_isa().

namespace lblm::simd {

enum class Isa { kScalar, kAvx2, kNeon };

struct KernelTable {
  // sum_i a[i] * b[i]
  double (*dot)(const double* a, const double* b, std::size_t n);
  // y[i] += alpha * x[i]
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // out[i] = z[i] + t * (f[i] - z[i]); out may alias z.
  void (*lerp)(const double* z, const double* f, double t, double* out, std::size_t n);
  // sum_i (a[i] - b[i])^2
  double (*squared_distance)(const double* a, const double* b, std::size_t n);
};

const KernelTable& scalar_kernels();
#if defined(LBLM_HAVE_AVX2)
const KernelTable& avx2_kernels();
#endif
#if defined(LBLM_HAVE_NEON)
const KernelTable& neon_kernels();
#endif

bool isa_supported(Isa isa);
Isa active_isa();
// Throws ParameterError when the ISA is not compiled in or not supported by the CPU.
void set_isa(Isa isa);
std::string_view isa_name(Isa isa);
const KernelTable& kernels();

inline double dot(const double* a, const double* b, std::size_t n) { return kernels().dot(a, b, n); }
inline void axpy(double alpha, const double* x, double* y, std::size_t n) { kernels().axpy(alpha, x, y, n); }
inline void lerp(const double* z, const double* f, double t, double* out, std::size_t n) {
  kernels().lerp(z, f, t, out, n);
}
inline double squared_distance(const double* a, const double* b, std::size_t n) {
  return kernels().squared_distance(a, b, n);
}

}  // namespace lblm::simd
