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

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "diga/embed.h"

namespace diga {

struct KMeansOptions {
    std::size_t max_iterations = 100;
    std::size_t workers = 1;
};

struct KMeansResult {
    /// Cluster index per input point.
    std::vector<std::size_t> assignment;
    /// Mean of each cluster's members under `assignment`.
    std::vector<EmbeddingVector> centroids;
    /// Within-cluster squared distance measured after every assignment step.
    std::vector<double> inertia;
    std::size_t iterations = 0;
};

/// Lloyd's algorithm with k-means++ seeding, Euclidean distance.
///
/// Stops after `max_iterations` assignment steps or when no assignment
/// changes. A cluster left empty takes the point farthest from its own
/// centroid (ties: lowest index) from a cluster with at least two members.
/// Distance ties go to the lowest cluster index. Deterministic for fixed
/// (points, k, seed) and independent of `workers`.
KMeansResult
kmeans(std::span<const EmbeddingVector> points, std::size_t k, std::uint64_t seed, const KMeansOptions& opts = {});

struct QueryCluster {
    std::size_t cluster_id = 0;
    std::vector<std::string> member_ids;
    EmbeddingVector centroid;
};

/// Clusters query embeddings. Inputs are sorted by id before seeding, so the
/// result does not depend on input order. Members are listed in id order.
std::vector<QueryCluster>
cluster_queries(std::span<const std::string> ids, std::span<const EmbeddingVector> embeddings, std::size_t k,
                std::uint64_t seed, const KMeansOptions& opts = {});

}  // namespace diga
