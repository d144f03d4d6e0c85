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

#include "diga/attack.h"

#include <cmath>
#include <unordered_map>

#include "diga/error.h"
#include "diga/rng.h"

namespace diga {

namespace {

std::uint64_t
stage_seed(std::uint64_t seed, std::size_t cluster, std::uint64_t stage) {
    return RandomStream::keyed(seed, {0x617474616bULL, cluster, stage}).next();
}

}  // namespace

void
AttackParams::validate() const {
    if (num_passages < 1) {
        throw ValidationError("number of adversarial passages must be at least 1");
    }
    if (length < 1) {
        throw ValidationError("passage length must be at least 1");
    }
    if (!(beta > 0.0 && beta <= 1.0)) {
        throw ValidationError("beta must lie in (0, 1]");
    }
    if (head_length() < 1) {
        throw ValidationError("floor(beta * length) must be at least 1");
    }
    diga.validate();
    vanilla.validate();
    if (kmeans.max_iterations < 1) {
        throw ValidationError("k-means needs at least one iteration");
    }
}

std::size_t
AttackParams::head_length() const {
    // The epsilon keeps products such as 0.8 * 50 from rounding down.
    return static_cast<std::size_t>(std::floor(beta * static_cast<double>(length) + 1e-9));
}

AdversarialPassage
craft_passage(const QueryCluster& cluster, std::span<const TokenSeq> cluster_queries, const TokenizedCorpus& corpus,
              const ImportanceTable& corpus_tfidf, const AttackParams& params, Embedder& embedder) {
    params.validate();
    if (cluster.member_ids.empty() || cluster_queries.empty()) {
        throw ValidationError("cannot craft a passage for an empty cluster");
    }
    const std::size_t head_len = params.head_length();
    const std::size_t tail_len = params.length - head_len;
    const auto importance = cluster_importance(cluster_queries, corpus, corpus_tfidf, params.length);
    const Vocabulary& vocab = corpus.vocabulary();

    AdversarialPassage out;
    out.cluster = cluster.cluster_id;
    out.id = adversarial_id(cluster.cluster_id, corpus);

    GaParams stage1 = params.diga;
    stage1.rng_seed = stage_seed(params.seed, cluster.cluster_id, 1);
    FitnessContext head_ctx(cluster.centroid, embedder, vocab);
    auto r1 = run_ga(head_ctx, importance, stage1, head_len, GaMode::diga);
    out.stage1_trace = std::move(r1.trace);

    if (tail_len == 0) {
        out.tokens = std::move(r1.best.tokens);
        out.final_fitness = *r1.best.fitness;
        return out;
    }

    GaParams stage2 = params.vanilla;
    stage2.rng_seed = stage_seed(params.seed, cluster.cluster_id, 2);
    FitnessContext tail_ctx(cluster.centroid, embedder, vocab, r1.best.tokens);
    auto r2 = run_ga(tail_ctx, importance, stage2, tail_len, GaMode::vanilla);
    out.stage2_trace = std::move(r2.trace);
    out.tokens = tail_ctx.full_sequence(r2.best.tokens);
    out.final_fitness = *r2.best.fitness;
    return out;
}

std::string
adversarial_id(std::size_t cluster, const TokenizedCorpus& corpus) {
    std::string id = "adv-" + std::to_string(cluster);
    while (corpus.contains(id)) {
        id += "_";
    }
    return id;
}

TokenizedCorpus
inject(const TokenizedCorpus& corpus, std::span<const AdversarialPassage> passages) {
    TokenizedCorpus out = corpus;
    for (const auto& p : passages) {
        out.add(TokenizedDoc{p.id, p.tokens});
    }
    return out;
}

AttackResult
run_attack(const TokenizedCorpus& corpus, std::span<const TokenizedDoc> queries, const AttackParams& params,
           Embedder& embedder, const AttackCheckpoint* checkpoint) {
    params.validate();
    if (corpus.size() == 0) {
        throw ComputationError("cannot attack an empty corpus");
    }
    if (queries.size() < params.num_passages) {
        throw ValidationError("need at least " + std::to_string(params.num_passages) + " queries, got " +
                              std::to_string(queries.size()));
    }
    const Vocabulary& vocab = corpus.vocabulary();
    std::vector<std::string> ids;
    std::vector<TokenSeq> seqs;
    std::unordered_map<std::string, const TokenSeq*> by_id;
    for (const auto& q : queries) {
        if (q.tokens.empty()) {
            throw ValidationError("query '" + q.id + "' has no tokens");
        }
        for (TokenId t : q.tokens) {
            if (t >= vocab.size()) {
                throw ValidationError("query '" + q.id + "' uses a token outside the corpus vocabulary");
            }
        }
        ids.push_back(q.id);
        seqs.push_back(q.tokens);
        by_id[q.id] = &q.tokens;
    }
    auto embeddings = embedder.embed(vocab, seqs);

    AttackResult result;
    result.clusters = cluster_queries(ids, embeddings, params.num_passages,
                                      RandomStream::keyed(params.seed, {0x6b6dULL}).next(), params.kmeans);
    const auto corpus_tfidf = compute_corpus_tfidf(corpus);

    for (const auto& cluster : result.clusters) {
        std::optional<AdversarialPassage> done;
        if (checkpoint != nullptr && checkpoint->load) {
            done = checkpoint->load(cluster.cluster_id);
        }
        if (!done) {
            std::vector<TokenSeq> members;
            members.reserve(cluster.member_ids.size());
            for (const auto& id : cluster.member_ids) {
                members.push_back(*by_id.at(id));
            }
            done = craft_passage(cluster, members, corpus, corpus_tfidf, params, embedder);
            if (checkpoint != nullptr && checkpoint->save) {
                checkpoint->save(*done);
            }
        }
        result.passages.push_back(std::move(*done));
    }
    result.augmented = inject(corpus, result.passages);
    return result;
}

}  // namespace diga
