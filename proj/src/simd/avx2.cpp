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

#include "diga/simd.h"

#if defined(DIGA_ENABLE_AVX2)
#include <immintrin.h>
#endif

namespace diga::simd {

#if defined(DIGA_ENABLE_AVX2)

namespace {

// lo holds lanes 0..3, hi lanes 4..7.
inline double
combine(__m256d lo, __m256d hi) {
    __m256d s = _mm256_add_pd(lo, hi);  // s0..s3
    __m128d a = _mm256_castpd256_pd128(s);
    __m128d b = _mm256_extractf128_pd(s, 1);
    __m128d t = _mm_add_pd(a, b);  // (s0 + s2, s1 + s3)
    return _mm_cvtsd_f64(_mm_add_sd(t, _mm_unpackhi_pd(t, t)));
}

double
DotAvx2(const double* a, const double* b, std::size_t n) {
    __m256d lo = _mm256_setzero_pd();
    __m256d hi = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + kLanes <= n; i += kLanes) {
        lo = _mm256_add_pd(lo, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
        hi = _mm256_add_pd(hi, _mm256_mul_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4)));
    }
    double res = combine(lo, hi);
    for (; i < n; ++i) {
        res += a[i] * b[i];
    }
    return res;
}

double
L2SqrAvx2(const double* a, const double* b, std::size_t n) {
    __m256d lo = _mm256_setzero_pd();
    __m256d hi = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + kLanes <= n; i += kLanes) {
        __m256d d0 = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
        __m256d d1 = _mm256_sub_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4));
        lo = _mm256_add_pd(lo, _mm256_mul_pd(d0, d0));
        hi = _mm256_add_pd(hi, _mm256_mul_pd(d1, d1));
    }
    double res = combine(lo, hi);
    for (; i < n; ++i) {
        double d = a[i] - b[i];
        res += d * d;
    }
    return res;
}

void
AddAvx2(double* y, const double* x, std::size_t n) {
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), _mm256_loadu_pd(x + i)));
    }
    for (; i < n; ++i) {
        y[i] += x[i];
    }
}

void
DivAvx2(double* y, double s, std::size_t n) {
    const __m256d vs = _mm256_set1_pd(s);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        _mm256_storeu_pd(y + i, _mm256_div_pd(_mm256_loadu_pd(y + i), vs));
    }
    for (; i < n; ++i) {
        y[i] /= s;
    }
}

}  // namespace

const KernelTable*
avx2_kernels() {
    static const KernelTable table{"avx2", DotAvx2, L2SqrAvx2, AddAvx2, DivAvx2};
    static const bool supported = __builtin_cpu_supports("avx2");
    return supported ? &table : nullptr;
}

#else

const KernelTable*
avx2_kernels() {
    return nullptr;
}

#endif

}  // namespace diga::simd
