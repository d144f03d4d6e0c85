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
#include <set>

#include "diga/attack.h"
#include "diga/error.h"
#include "diga/synth.h"

namespace {

using namespace diga;

class AttackTest : public ::testing::Test {
protected:
    static void
    SetUpTestSuite() {
        SyntheticDatasetSpec spec;
        spec.topics = 3;
        spec.passages_per_topic = 40;
        spec.queries_per_topic = 20;
        spec.seed = 2;
        auto data = generate_synthetic(spec);
        corpus_ = new TokenizedCorpus(TokenizedCorpus::from_documents(data.corpus));
        queries_ = new std::vector<TokenizedDoc>();
        for (const auto& q : data.train_queries) {
            auto toks = tokenize(q.text, corpus_->vocabulary());
            if (!toks.empty()) {
                queries_->push_back({q.id, toks});
            }
        }
    }

    static void
    TearDownTestSuite() {
        delete corpus_;
        delete queries_;
    }

    static AttackParams
    params(std::size_t k, std::size_t length, double beta) {
        AttackParams p;
        p.num_passages = k;
        p.length = length;
        p.beta = beta;
        p.diga.population_size = 30;
        p.diga.max_generations = 40;
        p.vanilla.population_size = 30;
        p.vanilla.max_generations = 40;
        p.seed = 5;
        return p;
    }

    static inline TokenizedCorpus* corpus_ = nullptr;
    static inline std::vector<TokenizedDoc>* queries_ = nullptr;
    ReferenceEmbedder embedder{64, 0};
};

TEST_F(AttackTest, HeadLengthSplit) {
    auto p = params(1, 50, 0.8);
    EXPECT_EQ(p.head_length(), 40u);
    p.length = 10;
    p.beta = 1.0;
    EXPECT_EQ(p.head_length(), 10u);
}

TEST_F(AttackTest, FullBetaSkipsStageTwo) {
    auto r = run_attack(*corpus_, *queries_, params(2, 10, 1.0), embedder);
    for (const auto& p : r.passages) {
        EXPECT_EQ(p.tokens.size(), 10u);
        EXPECT_TRUE(p.stage2_trace.empty());
        EXPECT_EQ(p.final_fitness, p.stage1_trace.back().best_fitness);
    }
}

TEST_F(AttackTest, PassagesAreValidAndFitnessRecomputes) {
    auto r = run_attack(*corpus_, *queries_, params(3, 20, 0.8), embedder);
    ASSERT_EQ(r.passages.size(), 3u);
    ASSERT_EQ(r.clusters.size(), 3u);
    for (const auto& p : r.passages) {
        EXPECT_EQ(p.tokens.size(), 20u);
        EXPECT_EQ(std::set<TokenId>(p.tokens.begin(), p.tokens.end()).size(), 20u);
        EXPECT_FALSE(corpus_->contains(p.id));
        const auto& centroid = r.clusters[p.cluster].centroid;
        const double fresh = cosine(embedder.embed_one(corpus_->vocabulary(), p.tokens), centroid);
        EXPECT_NEAR(p.final_fitness, fresh, 1e-9);
        ASSERT_FALSE(p.stage2_trace.empty());
        EXPECT_GE(p.final_fitness, p.stage2_trace.front().best_fitness);
        EXPECT_EQ(p.stage1_trace.size(), 41u);
        EXPECT_EQ(p.stage2_trace.size(), 41u);
    }
}

TEST_F(AttackTest, InjectionIsReversible) {
    auto r = run_attack(*corpus_, *queries_, params(3, 12, 0.75), embedder);
    EXPECT_EQ(r.augmented.size(), corpus_->size() + 3);
    std::unordered_set<std::string> adv;
    for (const auto& p : r.passages) {
        adv.insert(p.id);
        EXPECT_TRUE(r.augmented.contains(p.id));
    }
    auto restored = r.augmented.without(adv);
    ASSERT_EQ(restored.size(), corpus_->size());
    for (std::size_t i = 0; i < corpus_->size(); ++i) {
        EXPECT_EQ(restored.documents()[i].id, corpus_->documents()[i].id);
        EXPECT_EQ(restored.documents()[i].tokens, corpus_->documents()[i].tokens);
    }
}

TEST_F(AttackTest, DeterministicForFixedSeed) {
    auto a = run_attack(*corpus_, *queries_, params(2, 12, 0.75), embedder);
    ReferenceEmbedder threaded(64, 0, 3);
    auto p = params(2, 12, 0.75);
    p.kmeans.workers = 3;
    auto b = run_attack(*corpus_, *queries_, p, threaded);
    ASSERT_EQ(a.passages.size(), b.passages.size());
    for (std::size_t i = 0; i < a.passages.size(); ++i) {
        EXPECT_EQ(a.passages[i].id, b.passages[i].id);
        EXPECT_EQ(a.passages[i].tokens, b.passages[i].tokens);
        EXPECT_EQ(a.passages[i].final_fitness, b.passages[i].final_fitness);
    }
    auto c = run_attack(*corpus_, *queries_, [&] {
        auto q = params(2, 12, 0.75);
        q.seed = 6;
        return q;
    }(), embedder);
    bool differs = false;
    for (std::size_t i = 0; i < a.passages.size(); ++i) {
        differs |= a.passages[i].tokens != c.passages[i].tokens;
    }
    EXPECT_TRUE(differs);
}

TEST_F(AttackTest, SingleClusterTargetsGlobalCentroid) {
    auto r = run_attack(*corpus_, *queries_, params(1, 8, 0.75), embedder);
    ASSERT_EQ(r.clusters.size(), 1u);
    std::vector<TokenSeq> seqs;
    for (const auto& q : *queries_) {
        seqs.push_back(q.tokens);
    }
    auto global = centroid(embedder.embed(corpus_->vocabulary(), seqs));
    for (std::size_t d = 0; d < global.dim(); ++d) {
        EXPECT_NEAR(r.clusters[0].centroid[d], global[d], 1e-12);
    }
    EXPECT_EQ(r.clusters[0].member_ids.size(), queries_->size());
}

TEST_F(AttackTest, FitnessBeatsCorpusPassages) {
    auto r = run_attack(*corpus_, *queries_, params(3, 20, 0.8), embedder);
    std::vector<TokenSeq> seqs;
    for (const auto& d : corpus_->documents()) {
        seqs.push_back(d.tokens);
    }
    auto vs = embedder.embed(corpus_->vocabulary(), seqs);
    for (const auto& p : r.passages) {
        std::vector<double> scores;
        for (const auto& v : vs) {
            scores.push_back(cosine(v, r.clusters[p.cluster].centroid));
        }
        std::sort(scores.begin(), scores.end());
        const double p99 = scores[static_cast<std::size_t>(0.99 * static_cast<double>(scores.size() - 1))];
        EXPECT_GT(p.final_fitness, p99) << "cluster " << p.cluster;
    }
}

TEST_F(AttackTest, CheckpointHooks) {
    std::vector<AdversarialPassage> saved;
    AttackCheckpoint cp;
    cp.load = [](std::size_t) { return std::optional<AdversarialPassage>{}; };
    cp.save = [&](const AdversarialPassage& p) { saved.push_back(p); };
    auto a = run_attack(*corpus_, *queries_, params(2, 10, 0.8), embedder, &cp);
    ASSERT_EQ(saved.size(), 2u);

    // Resuming: cluster 0 comes from the checkpoint, only cluster 1 is crafted.
    std::vector<std::size_t> crafted;
    AttackCheckpoint resume;
    resume.load = [&](std::size_t c) -> std::optional<AdversarialPassage> {
        if (c == 0) {
            auto p = saved[0];
            p.final_fitness = 42.0;
            return p;
        }
        return std::nullopt;
    };
    resume.save = [&](const AdversarialPassage& p) { crafted.push_back(p.cluster); };
    auto b = run_attack(*corpus_, *queries_, params(2, 10, 0.8), embedder, &resume);
    EXPECT_EQ(crafted, (std::vector<std::size_t>{1}));
    EXPECT_EQ(b.passages[0].final_fitness, 42.0);
    EXPECT_EQ(b.passages[1].tokens, a.passages[1].tokens);
}

TEST_F(AttackTest, Errors) {
    auto p = params(2, 10, 0.8);
    std::vector<TokenizedDoc> one{queries_->front()};
    EXPECT_THROW(run_attack(*corpus_, one, p, embedder), ValidationError);
    p.beta = 0.05;
    EXPECT_THROW(run_attack(*corpus_, *queries_, p, embedder), ValidationError);
    TokenizedCorpus empty;
    EXPECT_THROW(run_attack(empty, *queries_, params(2, 10, 0.8), embedder), ComputationError);
}

TEST_F(AttackTest, AdversarialIdsAvoidCollisions) {
    TokenizedCorpus c;
    c.add(Document{"adv-0", "x y"});
    EXPECT_EQ(adversarial_id(0, c), "adv-0_");
    EXPECT_EQ(adversarial_id(1, c), "adv-1");
}

}  // namespace
