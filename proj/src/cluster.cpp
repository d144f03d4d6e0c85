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

#include "diga/cluster.h"

#include <algorithm>
#include <limits>
#include <numeric>

#include "diga/error.h"
#include "diga/parallel.h"
#include "diga/rng.h"
#include "diga/simd.h"

namespace diga {

namespace {

double
sqdist(const EmbeddingVector& a, const EmbeddingVector& b) {
    return simd::l2sqr(a.values(), b.values());
}

std::vector<EmbeddingVector>
seed_plus_plus(std::span<const EmbeddingVector> points, std::size_t k, RandomStream& rng) {
    const std::size_t n = points.size();
    std::vector<EmbeddingVector> centers;
    std::vector<bool> chosen(n, false);
    std::size_t first = rng.below(n);
    centers.push_back(points[first]);
    chosen[first] = true;

    std::vector<double> d2(n);
    for (std::size_t i = 0; i < n; ++i) {
        d2[i] = sqdist(points[i], centers[0]);
    }
    while (centers.size() < k) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            total += d2[i];
        }
        std::size_t pick = n;
        if (total > 0.0) {
            const double u = rng.uniform() * total;
            double acc = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (d2[i] <= 0.0) {
                    continue;
                }
                acc += d2[i];
                pick = i;
                if (u < acc) {
                    break;
                }
            }
        } else {
            // Every point coincides with a center: pick uniformly among the
            // points not yet used.
            std::vector<std::size_t> rest;
            for (std::size_t i = 0; i < n; ++i) {
                if (!chosen[i]) {
                    rest.push_back(i);
                }
            }
            pick = rest[rng.below(rest.size())];
        }
        chosen[pick] = true;
        centers.push_back(points[pick]);
        for (std::size_t i = 0; i < n; ++i) {
            d2[i] = std::min(d2[i], sqdist(points[i], centers.back()));
        }
    }
    return centers;
}

std::vector<EmbeddingVector>
means(std::span<const EmbeddingVector> points, std::span<const std::size_t> assignment, std::size_t k,
      std::span<const EmbeddingVector> fallback) {
    const std::size_t dim = points.front().dim();
    std::vector<EmbeddingVector> sums(k, EmbeddingVector(dim));
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < points.size(); ++i) {
        simd::add(sums[assignment[i]].values(), points[i].values());
        ++counts[assignment[i]];
    }
    for (std::size_t c = 0; c < k; ++c) {
        if (counts[c] == 0) {
            sums[c] = fallback[c];
        } else {
            simd::div(sums[c].values(), static_cast<double>(counts[c]));
        }
    }
    return sums;
}

}  // namespace

KMeansResult
kmeans(std::span<const EmbeddingVector> points, std::size_t k, std::uint64_t seed, const KMeansOptions& opts) {
    if (points.empty()) {
        throw ValidationError("kmeans: no points");
    }
    if (k == 0) {
        throw ValidationError("kmeans: k must be positive");
    }
    if (k > points.size()) {
        throw ValidationError("kmeans: k = " + std::to_string(k) + " exceeds the number of points (" +
                              std::to_string(points.size()) + ")");
    }
    const std::size_t dim = points.front().dim();
    for (const auto& p : points) {
        if (p.dim() != dim) {
            throw ValidationError("kmeans: dimension mismatch");
        }
    }

    const std::size_t n = points.size();
    RandomStream rng(mix64(seed ^ 0x6b6d65616e73ULL));
    KMeansResult res;
    auto centers = seed_plus_plus(points, k, rng);
    res.assignment.assign(n, k);  // k = unassigned
    std::vector<double> dist(n);

    for (std::size_t iter = 0; iter < opts.max_iterations; ++iter) {
        std::vector<std::size_t> next(n);
        parallel_for(n, opts.workers, [&](std::size_t i) {
            std::size_t best = 0;
            double best_d = std::numeric_limits<double>::infinity();
            for (std::size_t c = 0; c < k; ++c) {
                double d = sqdist(points[i], centers[c]);
                if (d < best_d) {
                    best_d = d;
                    best = c;
                }
            }
            next[i] = best;
            dist[i] = best_d;
        });
        ++res.iterations;
        res.inertia.push_back(std::accumulate(dist.begin(), dist.end(), 0.0));
        const bool changed = next != res.assignment;
        res.assignment = std::move(next);
        if (!changed) {
            break;
        }

        // Repair empty clusters.
        std::vector<std::size_t> counts(k, 0);
        for (std::size_t a : res.assignment) {
            ++counts[a];
        }
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] != 0) {
                continue;
            }
            std::size_t far = n;
            double far_d = -1.0;
            for (std::size_t i = 0; i < n; ++i) {
                if (counts[res.assignment[i]] > 1 && dist[i] > far_d) {
                    far_d = dist[i];
                    far = i;
                }
            }
            --counts[res.assignment[far]];
            res.assignment[far] = c;
            counts[c] = 1;
            dist[far] = 0.0;
            centers[c] = points[far];
        }
        centers = means(points, res.assignment, k, centers);
    }
    res.centroids = means(points, res.assignment, k, centers);
    return res;
}

std::vector<QueryCluster>
cluster_queries(std::span<const std::string> ids, std::span<const EmbeddingVector> embeddings, std::size_t k,
                std::uint64_t seed, const KMeansOptions& opts) {
    if (ids.size() != embeddings.size()) {
        throw ValidationError("cluster_queries: ids and embeddings differ in length");
    }
    std::vector<std::size_t> order(ids.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return ids[a] < ids[b]; });
    for (std::size_t i = 1; i < order.size(); ++i) {
        if (ids[order[i]] == ids[order[i - 1]]) {
            throw DuplicateIdError("duplicate query id '" + ids[order[i]] + "'");
        }
    }
    std::vector<EmbeddingVector> sorted;
    sorted.reserve(order.size());
    for (std::size_t i : order) {
        sorted.push_back(embeddings[i]);
    }
    auto res = kmeans(sorted, k, seed, opts);
    std::vector<QueryCluster> out(k);
    for (std::size_t c = 0; c < k; ++c) {
        out[c].cluster_id = c;
        out[c].centroid = res.centroids[c];
    }
    for (std::size_t j = 0; j < order.size(); ++j) {
        out[res.assignment[j]].member_ids.push_back(ids[order[j]]);
    }
    return out;
}

}  // namespace diga
