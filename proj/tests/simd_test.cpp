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

#include <gtest/gtest.h>

#include <bit>
#include <cstdint>
#include <random>
#include <vector>

#include "diga/simd.h"

namespace {

using diga::simd::KernelTable;

std::vector<double>
random_vector(std::mt19937_64& rng, std::size_t n) {
    std::uniform_real_distribution<double> dist(-3.0, 3.0);
    std::vector<double> v(n);
    for (auto& x : v) {
        x = dist(rng);
    }
    return v;
}

std::vector<const KernelTable*>
variants() {
    std::vector<const KernelTable*> out;
    if (auto* t = diga::simd::avx2_kernels()) {
        out.push_back(t);
    }
    if (auto* t = diga::simd::neon_kernels()) {
        out.push_back(t);
    }
    return out;
}

bool
same_bits(double a, double b) {
    return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b);
}

TEST(SimdTest, ScalarDotMatchesNaiveSum) {
    std::mt19937_64 rng(1);
    for (std::size_t n : {0u, 1u, 7u, 8u, 9u, 33u, 256u}) {
        auto a = random_vector(rng, n);
        auto b = random_vector(rng, n);
        double naive = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            naive += a[i] * b[i];
        }
        EXPECT_NEAR(diga::simd::scalar_kernels().dot(a.data(), b.data(), n), naive, 1e-10) << n;
    }
}

TEST(SimdTest, ScalarL2SqrOfSmallVectors) {
    const double a[] = {1.0, 2.0, 3.0};
    const double b[] = {4.0, 6.0, 3.0};
    EXPECT_EQ(diga::simd::scalar_kernels().l2sqr(a, b, 3), 25.0);
}

TEST(SimdTest, VariantsAreBitIdenticalToScalar) {
    const auto& ref = diga::simd::scalar_kernels();
    auto vs = variants();
    if (vs.empty()) {
        GTEST_SKIP() << "no vector variant on this CPU";
    }
    std::mt19937_64 rng(7);
    for (const auto* v : vs) {
        for (std::size_t n = 0; n <= 70; ++n) {
            auto a = random_vector(rng, n);
            auto b = random_vector(rng, n);
            EXPECT_TRUE(same_bits(v->dot(a.data(), b.data(), n), ref.dot(a.data(), b.data(), n)))
                << v->name << " dot n=" << n;
            EXPECT_TRUE(same_bits(v->l2sqr(a.data(), b.data(), n), ref.l2sqr(a.data(), b.data(), n)))
                << v->name << " l2sqr n=" << n;

            auto y1 = a;
            auto y2 = a;
            v->add(y1.data(), b.data(), n);
            ref.add(y2.data(), b.data(), n);
            v->div(y1.data(), 3.0, n);
            ref.div(y2.data(), 3.0, n);
            for (std::size_t i = 0; i < n; ++i) {
                ASSERT_TRUE(same_bits(y1[i], y2[i])) << v->name << " add/div n=" << n << " i=" << i;
            }
        }
    }
}

TEST(SimdTest, UnalignedInputsAgree) {
    const auto& ref = diga::simd::scalar_kernels();
    std::mt19937_64 rng(11);
    auto a = random_vector(rng, 300);
    auto b = random_vector(rng, 300);
    for (const auto* v : variants()) {
        for (std::size_t off = 0; off < 4; ++off) {
            EXPECT_TRUE(same_bits(v->dot(a.data() + off, b.data() + 1, 257), ref.dot(a.data() + off, b.data() + 1, 257)));
        }
    }
}

TEST(SimdTest, ActiveTableIsOneOfTheVariants) {
    const auto& active = diga::simd::active_kernels();
    bool known = &active == &diga::simd::scalar_kernels();
    for (const auto* v : variants()) {
        known = known || &active == v;
    }
    EXPECT_TRUE(known) << active.name;
}

}  // namespace
