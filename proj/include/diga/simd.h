// Copyright 2026-present the diga authors
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

#pragma once

#include <cstddef>
#include <span>
#include <string_view>

// Vector kernels over double. Every variant follows the same evaluation
// order so that results are bit-identical across variants:
//
//   * reductions use kLanes striped accumulators (element i feeds lane
//     i % kLanes), combined as s[j] = acc[j] + acc[j + 4], then
//     (s[0] + s[2]) + (s[1] + s[3]); the n % kLanes tail is then added in
//     index order.
//   * element-wise kernels are independent per element.
//   * products and sums are never fused (built with -ffp-contract=off).

namespace diga::simd {

inline constexpr std::size_t kLanes = 8;

struct KernelTable {
    std::string_view name;
    double (*dot)(const double* a, const double* b, std::size_t n);
    double (*l2sqr)(const double* a, const double* b, std::size_t n);
    // y[i] += x[i]
    void (*add)(double* y, const double* x, std::size_t n);
    // y[i] /= s
    void (*div)(double* y, double s, std::size_t n);
};

const KernelTable&
scalar_kernels();

/// nullptr when the variant is not compiled in or the CPU lacks support.
const KernelTable*
avx2_kernels();

const KernelTable*
neon_kernels();

/// The variant used by the library. Picked once: the DIGA_SIMD environment
/// variable ("scalar", "avx2", "neon") wins when it names an available
/// variant, otherwise the widest supported one.
const KernelTable&
active_kernels();

// Span front-ends over the active table. Callers check dimensions.

inline double
dot(std::span<const double> a, std::span<const double> b) {
    return active_kernels().dot(a.data(), b.data(), a.size());
}

inline double
l2sqr(std::span<const double> a, std::span<const double> b) {
    return active_kernels().l2sqr(a.data(), b.data(), a.size());
}

inline void
add(std::span<double> y, std::span<const double> x) {
    active_kernels().add(y.data(), x.data(), y.size());
}

inline void
div(std::span<double> y, double s) {
    active_kernels().div(y.data(), s, y.size());
}

}  // namespace diga::simd
