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

namespace diga::simd {

namespace {

double
combine(const double (&acc)[kLanes]) {
    double s[4];
    for (int j = 0; j < 4; ++j) {
        s[j] = acc[j] + acc[j + 4];
    }
    return (s[0] + s[2]) + (s[1] + s[3]);
}

double
DotScalar(const double* a, const double* b, std::size_t n) {
    double acc[kLanes] = {};
    std::size_t i = 0;
    for (; i + kLanes <= n; i += kLanes) {
        for (std::size_t j = 0; j < kLanes; ++j) {
            acc[j] += a[i + j] * b[i + j];
        }
    }
    double res = combine(acc);
    for (; i < n; ++i) {
        res += a[i] * b[i];
    }
    return res;
}

double
L2SqrScalar(const double* a, const double* b, std::size_t n) {
    double acc[kLanes] = {};
    std::size_t i = 0;
    for (; i + kLanes <= n; i += kLanes) {
        for (std::size_t j = 0; j < kLanes; ++j) {
            double d = a[i + j] - b[i + j];
            acc[j] += d * d;
        }
    }
    double res = combine(acc);
    for (; i < n; ++i) {
        double d = a[i] - b[i];
        res += d * d;
    }
    return res;
}

void
AddScalar(double* y, const double* x, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        y[i] += x[i];
    }
}

void
DivScalar(double* y, double s, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        y[i] /= s;
    }
}

}  // namespace

const KernelTable&
scalar_kernels() {
    static const KernelTable table{"scalar", DotScalar, L2SqrScalar, AddScalar, DivScalar};
    return table;
}

}  // namespace diga::simd
