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

#include <algorithm>
#include <limits>
#include <random>

#include "diga/cluster.h"
#include "diga/error.h"

namespace {

using namespace diga;

EmbeddingVector
vec(std::vector<double> v) {
    return EmbeddingVector(std::move(v));
}

double
sqdist(const EmbeddingVector& a, const EmbeddingVector& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.dim(); ++i) {
        s += (a[i] - b[i]) * (a[i] - b[i]);
    }
    return s;
}

EmbeddingVector
mean_of(const std::vector<EmbeddingVector>& pts, const std::vector<std::size_t>& idx) {
    EmbeddingVector m(pts[0].dim());
    for (auto i : idx) {
        for (std::size_t d = 0; d < m.dim(); ++d) {
            m[d] += pts[i][d];
        }
    }
    for (std::size_t d = 0; d < m.dim(); ++d) {
        m[d] /= static_cast<double>(idx.size());
    }
    return m;
}

std::vector<EmbeddingVector>
two_blobs() {
    return {vec({0.0, 0.1}), vec({10.0, 10.2}), vec({0.2, -0.1}), vec({9.8, 9.9}), vec({-0.1, 0.0}),
            vec({10.1, 10.0})};
}

TEST(KMeansTest, TwoBlobsMatchBruteForceOptimum) {
    auto pts = two_blobs();
    // Brute force over every 2-labeling with both clusters non-empty.
    double best = std::numeric_limits<double>::infinity();
    std::vector<std::size_t> best_labels;
    for (unsigned mask = 1; mask + 1 < (1u << pts.size()); ++mask) {
        std::vector<std::size_t> a, b;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            ((mask >> i) & 1 ? a : b).push_back(i);
        }
        auto ma = mean_of(pts, a);
        auto mb = mean_of(pts, b);
        double cost = 0.0;
        for (auto i : a) {
            cost += sqdist(pts[i], ma);
        }
        for (auto i : b) {
            cost += sqdist(pts[i], mb);
        }
        if (cost < best) {
            best = cost;
            best_labels.assign(pts.size(), 0);
            for (auto i : a) {
                best_labels[i] = 1;
            }
        }
    }
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        auto r = kmeans(pts, 2, seed);
        for (std::size_t i = 0; i < pts.size(); ++i) {
            for (std::size_t j = 0; j < pts.size(); ++j) {
                EXPECT_EQ(r.assignment[i] == r.assignment[j], best_labels[i] == best_labels[j]);
            }
        }
        EXPECT_NEAR(r.inertia.back(), best, 1e-9);
        for (std::size_t c = 0; c < 2; ++c) {
            std::vector<std::size_t> members;
            for (std::size_t i = 0; i < pts.size(); ++i) {
                if (r.assignment[i] == c) {
                    members.push_back(i);
                }
            }
            auto m = mean_of(pts, members);
            EXPECT_NEAR(r.centroids[c][0], m[0], 1e-6);
            EXPECT_NEAR(r.centroids[c][1], m[1], 1e-6);
        }
    }
}

TEST(KMeansTest, SingleClusterIsTheGlobalMean) {
    auto pts = two_blobs();
    auto r = kmeans(pts, 1, 3);
    std::vector<std::size_t> all(pts.size());
    std::iota(all.begin(), all.end(), 0);
    auto m = mean_of(pts, all);
    EXPECT_NEAR(r.centroids[0][0], m[0], 1e-12);
    EXPECT_NEAR(r.centroids[0][1], m[1], 1e-12);
}

TEST(KMeansTest, KEqualsNGivesSingletons) {
    auto pts = two_blobs();
    auto r = kmeans(pts, pts.size(), 9);
    std::vector<std::size_t> seen = r.assignment;
    std::sort(seen.begin(), seen.end());
    EXPECT_EQ(std::unique(seen.begin(), seen.end()), seen.end());
    for (std::size_t i = 0; i < pts.size(); ++i) {
        EXPECT_EQ(r.centroids[r.assignment[i]], pts[i]);
    }
}

TEST(KMeansTest, DuplicatePointsStillFillEveryCluster) {
    std::vector<EmbeddingVector> pts(5, vec({1.0, 1.0}));
    pts.push_back(vec({2.0, 2.0}));
    auto r = kmeans(pts, 4, 1);
    std::vector<int> sizes(4, 0);
    for (auto a : r.assignment) {
        ++sizes[a];
    }
    for (int s : sizes) {
        EXPECT_GT(s, 0);
    }
}

TEST(KMeansTest, BadKIsRejected) {
    auto pts = two_blobs();
    EXPECT_THROW(kmeans(pts, 0, 1), ValidationError);
    EXPECT_THROW(kmeans(pts, 7, 1), ValidationError);
}

TEST(KMeansTest, InertiaNeverIncreases) {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> d;
    std::vector<EmbeddingVector> pts;
    for (int i = 0; i < 300; ++i) {
        std::vector<double> v(8);
        for (auto& x : v) {
            x = d(rng) + (i % 4) * 1.5;
        }
        pts.push_back(vec(v));
    }
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        auto r = kmeans(pts, 6, seed);
        ASSERT_FALSE(r.inertia.empty());
        for (std::size_t i = 1; i < r.inertia.size(); ++i) {
            EXPECT_LE(r.inertia[i], r.inertia[i - 1] + 1e-9) << "seed " << seed << " iter " << i;
        }
        EXPECT_LE(r.iterations, 100u);
    }
}

TEST(KMeansTest, DeterministicAndWorkerIndependent) {
    std::mt19937_64 rng(8);
    std::normal_distribution<double> d;
    std::vector<EmbeddingVector> pts;
    for (int i = 0; i < 200; ++i) {
        std::vector<double> v(16);
        for (auto& x : v) {
            x = d(rng);
        }
        pts.push_back(vec(v));
    }
    auto a = kmeans(pts, 5, 11, {100, 1});
    auto b = kmeans(pts, 5, 11, {100, 4});
    EXPECT_EQ(a.assignment, b.assignment);
    EXPECT_EQ(a.centroids, b.centroids);
    EXPECT_EQ(a.inertia, b.inertia);
}

TEST(ClusterQueriesTest, PartitionAndInputOrderInvariance) {
    auto pts = two_blobs();
    std::vector<std::string> ids{"q0", "q1", "q2", "q3", "q4", "q5"};
    auto a = cluster_queries(ids, pts, 2, 4);
    std::vector<std::string> rids(ids.rbegin(), ids.rend());
    std::vector<EmbeddingVector> rpts(pts.rbegin(), pts.rend());
    auto b = cluster_queries(rids, rpts, 2, 4);
    ASSERT_EQ(a.size(), 2u);
    std::vector<std::string> all;
    for (std::size_t c = 0; c < 2; ++c) {
        EXPECT_EQ(a[c].cluster_id, c);
        EXPECT_EQ(a[c].member_ids, b[c].member_ids);
        EXPECT_EQ(a[c].centroid, b[c].centroid);
        EXPECT_TRUE(std::is_sorted(a[c].member_ids.begin(), a[c].member_ids.end()));
        all.insert(all.end(), a[c].member_ids.begin(), a[c].member_ids.end());
        std::vector<EmbeddingVector> members;
        for (const auto& id : a[c].member_ids) {
            members.push_back(pts[static_cast<std::size_t>(id[1] - '0')]);
        }
        auto m = centroid(members);
        for (std::size_t d = 0; d < 2; ++d) {
            EXPECT_NEAR(a[c].centroid[d], m[d], 1e-9);
        }
    }
    std::sort(all.begin(), all.end());
    EXPECT_EQ(all, ids);
}

TEST(ClusterQueriesTest, MismatchedInputsAreRejected) {
    auto pts = two_blobs();
    std::vector<std::string> ids{"a", "b"};
    EXPECT_THROW(cluster_queries(ids, pts, 1, 0), ValidationError);
    std::vector<std::string> dup{"a", "a", "b", "c", "d", "e"};
    EXPECT_THROW(cluster_queries(dup, pts, 1, 0), Error);
}

}  // namespace
