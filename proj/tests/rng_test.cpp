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

#include <vector>

#include "diga/parallel.h"
#include "diga/rng.h"

namespace {

using diga::RandomStream;

TEST(RngTest, SameSeedSameStream) {
    RandomStream a(42);
    RandomStream b(42);
    for (int i = 0; i < 100; ++i) {
        ASSERT_EQ(a.next(), b.next());
    }
}

TEST(RngTest, KeyedStreamsDifferByKey) {
    auto a = RandomStream::keyed(1, {0, 1});
    auto b = RandomStream::keyed(1, {0, 2});
    auto c = RandomStream::keyed(1, {1, 0});
    const auto x = a.next();
    EXPECT_NE(x, b.next());
    EXPECT_NE(x, c.next());
    EXPECT_EQ(RandomStream::keyed(1, {0, 1}).next(), x);
}

TEST(RngTest, UniformInUnitInterval) {
    RandomStream r(3);
    for (int i = 0; i < 10000; ++i) {
        const double u = r.uniform();
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
    }
}

TEST(RngTest, BelowCoversRange) {
    RandomStream r(5);
    std::vector<int> counts(7, 0);
    for (int i = 0; i < 7000; ++i) {
        ++counts[r.below(7)];
    }
    for (int c : counts) {
        EXPECT_GT(c, 850);
        EXPECT_LT(c, 1150);
    }
}

TEST(RngTest, KnownFnvHash) {
    EXPECT_EQ(diga::fnv1a64(""), 0xcbf29ce484222325ULL);
    EXPECT_EQ(diga::fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
}

TEST(ParallelForTest, VisitsEveryIndexOnce) {
    for (std::size_t workers : {1u, 2u, 5u, 64u}) {
        std::vector<int> hits(101, 0);
        diga::parallel_for(hits.size(), workers, [&](std::size_t i) { ++hits[i]; });
        for (int h : hits) {
            ASSERT_EQ(h, 1);
        }
    }
}

TEST(ParallelForTest, PropagatesExceptions) {
    EXPECT_THROW(diga::parallel_for(10, 3,
                                    [](std::size_t i) {
                                        if (i == 7) {
                                            throw std::runtime_error("boom");
                                        }
                                    }),
                 std::runtime_error);
}

}  // namespace
