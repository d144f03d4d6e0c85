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

#if defined(DIGA_ENABLE_NEON)
#include <arm_neon.h>
#endif

namespace diga::simd {

#if defined(DIGA_ENABLE_NEON)

namespace {

// r0 = lanes (0,1), r1 = (2,3), r2 = (4,5), r3 = (6,7).
inline double
combine(float64x2_t r0, float64x2_t r1, float64x2_t r2, float64x2_t r3) {
    float64x2_t s01 = vaddq_f64(r0, r2);  // (s0, s1)
    float64x2_t s23 = vaddq_f64(r1, r3);  // (s2, s3)
    float64x2_t t = vaddq_f64(s01, s23);  // (s0 + s2, s1 + s3)
    return vgetq_lane_f64(t, 0) + vgetq_lane_f64(t, 1);
}

double
DotNeon(const double* a, const double* b, std::size_t n) {
    float64x2_t r0 = vdupq_n_f64(0.0);
    float64x2_t r1 = r0;
    float64x2_t r2 = r0;
    float64x2_t r3 = r0;
    std::size_t i = 0;
    for (; i + kLanes <= n; i += kLanes) {
        r0 = vaddq_f64(r0, vmulq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
        r1 = vaddq_f64(r1, vmulq_f64(vld1q_f64(a + i + 2), vld1q_f64(b + i + 2)));
        r2 = vaddq_f64(r2, vmulq_f64(vld1q_f64(a + i + 4), vld1q_f64(b + i + 4)));
        r3 = vaddq_f64(r3, vmulq_f64(vld1q_f64(a + i + 6), vld1q_f64(b + i + 6)));
    }
    double res = combine(r0, r1, r2, r3);
    for (; i < n; ++i) {
        res += a[i] * b[i];
    }
    return res;
}

double
L2SqrNeon(const double* a, const double* b, std::size_t n) {
    float64x2_t r[4] = {vdupq_n_f64(0.0), vdupq_n_f64(0.0), vdupq_n_f64(0.0), vdupq_n_f64(0.0)};
    std::size_t i = 0;
    for (; i + kLanes <= n; i += kLanes) {
        for (int j = 0; j < 4; ++j) {
            float64x2_t d = vsubq_f64(vld1q_f64(a + i + 2 * j), vld1q_f64(b + i + 2 * j));
            r[j] = vaddq_f64(r[j], vmulq_f64(d, d));
        }
    }
    double res = combine(r[0], r[1], r[2], r[3]);
    for (; i < n; ++i) {
        double d = a[i] - b[i];
        res += d * d;
    }
    return res;
}

void
AddNeon(double* y, const double* x, std::size_t n) {
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        vst1q_f64(y + i, vaddq_f64(vld1q_f64(y + i), vld1q_f64(x + i)));
    }
    for (; i < n; ++i) {
        y[i] += x[i];
    }
}

void
DivNeon(double* y, double s, std::size_t n) {
    const float64x2_t vs = vdupq_n_f64(s);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        vst1q_f64(y + i, vdivq_f64(vld1q_f64(y + i), vs));
    }
    for (; i < n; ++i) {
        y[i] /= s;
    }
}

}  // namespace

const KernelTable*
neon_kernels() {
    static const KernelTable table{"neon", DotNeon, L2SqrNeon, AddNeon, DivNeon};
    return &table;
}

#else

const KernelTable*
neon_kernels() {
    return nullptr;
}

#endif

}  // namespace diga::simd
