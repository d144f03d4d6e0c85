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
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "diga/cluster.h"
#include "diga/corpus.h"
#include "diga/embed.h"
#include "diga/ga.h"

namespace diga {

struct AttackParams {
    /// Number of adversarial passages, one per query cluster.
    std::size_t num_passages = 5;
    /// Passage length in tokens.
    std::size_t length = 50;
    /// Fraction of the passage produced by the importance-guided stage.
    double beta = 0.8;
    GaParams diga;
    GaParams vanilla;
    std::uint64_t seed = 0;
    KMeansOptions kmeans;

    void
    validate() const;

    /// floor(beta * length)
    std::size_t
    head_length() const;
};

struct AdversarialPassage {
    std::string id;
    TokenSeq tokens;
    std::size_t cluster = 0;
    double final_fitness = 0.0;
    std::vector<GenerationStats> stage1_trace;
    std::vector<GenerationStats> stage2_trace;
};

/// Two-stage search against the cluster centroid: the importance-guided GA
/// finds floor(beta L) tokens, then the vanilla GA fills the remaining
/// tokens with the first stage frozen as a prefix, so the second stage
/// scores whole passages. The result is head followed by tail.
///
/// The stage seeds are derived from params.seed and the cluster id; the
/// rng_seed fields of params.diga / params.vanilla are ignored.
AdversarialPassage
craft_passage(const QueryCluster& cluster, std::span<const TokenSeq> cluster_queries, const TokenizedCorpus& corpus,
              const ImportanceTable& corpus_tfidf, const AttackParams& params, Embedder& embedder);

/// Per-cluster persistence hooks. `load` returns a finished passage for a
/// cluster when one exists; `save` is called after each cluster completes.
struct AttackCheckpoint {
    std::function<std::optional<AdversarialPassage>(std::size_t cluster)> load;
    std::function<void(const AdversarialPassage&)> save;
};

struct AttackResult {
    std::vector<QueryCluster> clusters;
    std::vector<AdversarialPassage> passages;
    TokenizedCorpus augmented;
};

/// Embeds the queries, clusters them into params.num_passages groups and
/// crafts one passage per cluster, then injects the passages under fresh
/// ids. Query tokens must come from the corpus vocabulary.
AttackResult
run_attack(const TokenizedCorpus& corpus, std::span<const TokenizedDoc> queries, const AttackParams& params,
           Embedder& embedder, const AttackCheckpoint* checkpoint = nullptr);

/// "adv-<cluster>" with a suffix when that collides with a corpus id.
std::string
adversarial_id(std::size_t cluster, const TokenizedCorpus& corpus);

/// Copy of `corpus` with the passages appended. Originals are untouched.
TokenizedCorpus
inject(const TokenizedCorpus& corpus, std::span<const AdversarialPassage> passages);

}  // namespace diga
