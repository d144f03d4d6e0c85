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
#include <cmath>
#include <random>

#include "diga/error.h"
#include "diga/eval.h"

namespace {

using namespace diga;

std::vector<EmbeddingVector>
random_vectors(std::size_t n, std::size_t dim, std::uint64_t seed, bool coarse) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> small(-2, 2);
    std::normal_distribution<double> normal;
    std::vector<EmbeddingVector> out;
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<double> v(dim);
        for (auto& x : v) {
            // Coarse integer entries make exact score ties common.
            x = coarse ? small(rng) : normal(rng);
        }
        out.emplace_back(std::move(v));
    }
    return out;
}

std::vector<ScoredId>
naive_topk(const std::vector<std::string>& ids, const std::vector<EmbeddingVector>& vs, const EmbeddingVector& q,
           std::size_t k) {
    std::vector<ScoredId> all;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        double s = 0.0;
        for (std::size_t d = 0; d < q.dim(); ++d) {
            s += vs[i][d] * q[d];
        }
        all.push_back({ids[i], s});
    }
    std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
        return a.score != b.score ? a.score > b.score : a.id < b.id;
    });
    all.resize(std::min(k, all.size()));
    return all;
}

std::vector<std::string>
make_ids(std::size_t n) {
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < n; ++i) {
        ids.push_back("p" + std::to_string((i * 7919) % n));
    }
    return ids;
}

TEST(DenseIndexTest, MatchesNaiveScan) {
    for (bool coarse : {false, true}) {
        auto vs = random_vectors(200, 16, 1, coarse);
        auto ids = make_ids(200);
        DenseIndex index(ids, vs);
        auto queries = random_vectors(50, 16, 2, coarse);
        for (const auto& q : queries) {
            for (std::size_t k : {1, 5, 20, 200}) {
                auto got = index.topk(q, k);
                auto want = naive_topk(ids, vs, q, k);
                ASSERT_EQ(got.size(), want.size());
                for (std::size_t i = 0; i < got.size(); ++i) {
                    EXPECT_EQ(got[i].id, want[i].id);
                    EXPECT_NEAR(got[i].score, want[i].score, 1e-9);
                }
            }
        }
    }
}

TEST(DenseIndexTest, CosineSelfMatchScoresOne) {
    auto vs = random_vectors(30, 8, 3, false);
    DenseIndex index(make_ids(30), vs, Similarity::cosine);
    auto r = index.topk(vs[4], 3);
    EXPECT_EQ(r[0].id, make_ids(30)[4]);
    EXPECT_NEAR(r[0].score, 1.0, 1e-12);
}

TEST(DenseIndexTest, FullRankingIsAPermutation) {
    auto vs = random_vectors(25, 4, 4, true);
    auto ids = make_ids(25);
    DenseIndex index(ids, vs);
    auto r = index.topk(vs[0], 100);
    ASSERT_EQ(r.size(), 25u);
    std::vector<std::string> got;
    for (const auto& s : r) {
        got.push_back(s.id);
    }
    std::sort(got.begin(), got.end());
    std::sort(ids.begin(), ids.end());
    EXPECT_EQ(got, ids);
}

TEST(DenseIndexTest, Errors) {
    auto vs = random_vectors(3, 4, 5, false);
    EXPECT_THROW(DenseIndex({"a", "a", "b"}, vs), DuplicateIdError);
    EXPECT_THROW(DenseIndex({"a", "b"}, vs), ValidationError);
    DenseIndex index({"a", "b", "c"}, vs, Similarity::cosine);
    EXPECT_THROW(index.topk(EmbeddingVector(3), 1), ValidationError);
    EXPECT_THROW(index.topk(vs[0], 0), ValidationError);
    EXPECT_THROW(index.topk(EmbeddingVector(4), 1), ComputationError);
}

class Bm25Test : public ::testing::Test {
protected:
    // a=0 b=1 c=2 d=3
    std::vector<TokenizedDoc> docs{{"d1", {0, 1}}, {"d2", {0, 2, 2}}, {"d3", {3}}};
    Bm25Index index{docs};
};

TEST_F(Bm25Test, HandComputedScores) {
    EXPECT_DOUBLE_EQ(index.average_length(), 2.0);
    EXPECT_NEAR(index.idf(0), 0.47000362924573563, 1e-12);

    auto c = index.topk(TokenSeq{2}, 10);
    ASSERT_EQ(c.size(), 1u);
    EXPECT_EQ(c[0].id, "d2");
    EXPECT_NEAR(c[0].score, 1.2101140134560258, 1e-12);

    auto a = index.topk(TokenSeq{0}, 10);
    ASSERT_EQ(a.size(), 2u);
    EXPECT_EQ(a[0].id, "d1");
    EXPECT_NEAR(a[0].score, 0.47000362924573563, 1e-12);
    EXPECT_EQ(a[1].id, "d2");
    EXPECT_NEAR(a[1].score, 0.4293302382533161, 1e-12);

    auto ac = index.topk(TokenSeq{0, 2}, 10);
    EXPECT_EQ(ac[0].id, "d2");
    EXPECT_NEAR(ac[0].score, 1.2101140134560258 + 0.4293302382533161, 1e-12);
}

TEST_F(Bm25Test, AbsentTokensGiveEmptyResult) {
    EXPECT_TRUE(index.topk(TokenSeq{42, 77}, 5).empty());
    EXPECT_TRUE(index.topk(TokenSeq{}, 5).empty());
}

TEST_F(Bm25Test, RepeatedQueryTermsCountOnce) {
    auto once = index.topk(TokenSeq{2}, 5);
    auto twice = index.topk(TokenSeq{2, 2}, 5);
    EXPECT_EQ(once[0].score, twice[0].score);
}

TEST_F(Bm25Test, KTruncates) {
    auto a = index.topk(TokenSeq{0}, 1);
    ASSERT_EQ(a.size(), 1u);
    EXPECT_EQ(a[0].id, "d1");
}

TEST(AsrTest, CountsQueriesWithAnAdversarialHit) {
    std::vector<std::vector<std::string>> r{{"x", "adv", "y"}, {"adv"}, {"a", "b", "c", "d", "e", "adv"},
                                            {"q", "adv2"}};
    std::unordered_set<std::string> adv{"adv", "adv2"};
    EXPECT_DOUBLE_EQ(asr_at_k(r, adv, 5), 75.0);
    EXPECT_DOUBLE_EQ(asr_at_k(r, adv, 6), 100.0);
    EXPECT_DOUBLE_EQ(asr_at_k(r, {}, 5), 0.0);
    EXPECT_DOUBLE_EQ(asr_at_k(r, {"zzz"}, 5), 0.0);
    EXPECT_THROW(asr_at_k(std::vector<std::vector<std::string>>{}, adv, 5), ValidationError);
}

TEST(TransferabilityTest, ReferenceValues) {
    std::vector<double> nq{0.1, 0.5};
    EXPECT_NEAR(transferability_score(5.2, nq), 5.8, 0.1);
    std::vector<double> v2t{0.0, 0.1};
    EXPECT_NEAR(transferability_score(8.1, v2t), 0.6, 0.1);
    std::vector<double> same{7.0, 7.0, 7.0};
    EXPECT_NEAR(transferability_score(7.0, same), 100.0, 1e-12);
}

TEST(TransferabilityTest, InvariantUnderCommonScale) {
    std::vector<double> cross{1.0, 3.0, 4.5};
    const double base = transferability_score(6.0, cross);
    for (double c : {0.5, 2.0, 10.0}) {
        std::vector<double> scaled;
        for (double x : cross) {
            scaled.push_back(x * c);
        }
        EXPECT_NEAR(transferability_score(6.0 * c, scaled), base, 1e-9);
    }
}

TEST(TransferabilityTest, Errors) {
    std::vector<double> cross{1.0};
    EXPECT_THROW(transferability_score(0.0, cross), ComputationError);
    EXPECT_THROW(transferability_score(5.0, std::vector<double>{}), ValidationError);
}

class EvaluateAttackTest : public ::testing::Test {
protected:
    EvaluateAttackTest() : embedder(32, 1) {
        std::vector<Document> docs;
        for (int i = 0; i < 30; ++i) {
            docs.push_back({"d" + std::to_string(i), "w" + std::to_string(i) + " w" + std::to_string(i + 1) +
                                                         " common" + std::to_string(i % 3)});
        }
        corpus = TokenizedCorpus::from_documents(docs);
        Vocabulary& v = corpus.mutable_vocabulary();
        corpus.add(TokenizedDoc{"adv-0", tokenize("w3 w4 w5 w6", v, VocabMode::growable)});
        for (int i = 0; i < 8; ++i) {
            queries.push_back(
                {"q" + std::to_string(i), tokenize("w" + std::to_string(i * 3) + " common1", v, VocabMode::growable)});
        }
        specs.push_back({"dense", RetrieverKind::dense, &embedder});
        specs.push_back({"cos", RetrieverKind::dense, &embedder, Similarity::cosine});
        specs.push_back({"bm25", RetrieverKind::bm25});
    }

    ReferenceEmbedder embedder;
    TokenizedCorpus corpus;
    std::vector<TokenizedDoc> queries;
    std::vector<RetrieverSpec> specs;
    std::vector<std::size_t> ks{1, 5, 20};
};

TEST_F(EvaluateAttackTest, MatchesIndependentRecomputation) {
    std::unordered_set<std::string> adv{"adv-0"};
    auto report = evaluate_attack(corpus, queries, adv, specs, ks);
    ASSERT_EQ(report.retrievers.size(), 3u);
    EXPECT_EQ(report.query_ids.size(), queries.size());

    std::vector<std::string> ids;
    std::vector<TokenSeq> seqs;
    for (const auto& d : corpus.documents()) {
        ids.push_back(d.id);
        seqs.push_back(d.tokens);
    }
    auto vs = embedder.embed(corpus.vocabulary(), seqs);
    for (std::size_t k : ks) {
        std::vector<std::vector<std::string>> rankings;
        for (const auto& q : queries) {
            auto qv = embedder.embed_one(corpus.vocabulary(), q.tokens);
            std::vector<std::string> r;
            for (const auto& s : naive_topk(ids, vs, qv, k)) {
                r.push_back(s.id);
            }
            rankings.push_back(r);
        }
        EXPECT_DOUBLE_EQ(report.retriever("dense").asr.at(k), asr_at_k(rankings, adv, k));

        Bm25Index bm(corpus.documents());
        std::vector<std::vector<std::string>> bm_rankings;
        for (const auto& q : queries) {
            std::vector<std::string> r;
            for (const auto& s : bm.topk(q.tokens, k)) {
                r.push_back(s.id);
            }
            bm_rankings.push_back(r);
        }
        EXPECT_DOUBLE_EQ(report.retriever("bm25").asr.at(k), asr_at_k(bm_rankings, adv, k));
    }
    EXPECT_EQ(report.metadata["corpus_size"], 31);
    EXPECT_EQ(report.metadata["num_adversarial"], 1);
}

TEST_F(EvaluateAttackTest, NoAdversarialIdsMeansZero) {
    auto report = evaluate_attack(corpus, queries, {}, specs, ks);
    for (const auto& r : report.retrievers) {
        for (const auto& [k, v] : r.asr) {
            EXPECT_EQ(v, 0.0) << r.name << " @" << k;
        }
    }
}

TEST_F(EvaluateAttackTest, ReportHasExactlyTheRequestedK) {
    std::vector<std::size_t> two{5, 20};
    auto report = evaluate_attack(corpus, queries, {"adv-0"}, specs, two);
    for (const auto& r : report.retrievers) {
        ASSERT_EQ(r.asr.size(), 2u);
        EXPECT_TRUE(r.asr.count(5) && r.asr.count(20));
        ASSERT_EQ(r.hits.size(), queries.size());
        for (const auto& h : r.hits) {
            EXPECT_EQ(h.size(), 2u);
        }
    }
    auto j = report.to_json();
    EXPECT_EQ(j["k"], nlohmann::json({5, 20}));
    EXPECT_EQ(j["retrievers"].size(), 3u);
    EXPECT_TRUE(j["retrievers"][0]["asr"].contains("5"));
    auto back = AttackReport::from_json(j);
    EXPECT_EQ(back.k_list, report.k_list);
    EXPECT_EQ(back.metadata, report.metadata);
    for (const auto& r : report.retrievers) {
        EXPECT_EQ(back.retriever(r.name).asr, r.asr);
    }
    EXPECT_THROW(report.retriever("nope"), ValidationError);
}

TEST_F(EvaluateAttackTest, HitsCsvAgreesWithAsr) {
    std::vector<std::size_t> one{5};
    auto report = evaluate_attack(corpus, queries, {"adv-0"}, specs, one);
    const auto csv = report.hits_csv();
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "query_id,retriever,k,hit");
    std::size_t dense_hits = 0;
    std::size_t pos = 0;
    while ((pos = csv.find(",dense,5,1", pos)) != std::string::npos) {
        ++dense_hits;
        ++pos;
    }
    EXPECT_DOUBLE_EQ(100.0 * static_cast<double>(dense_hits) / static_cast<double>(queries.size()),
                     report.retriever("dense").asr.at(5));
}

TEST_F(EvaluateAttackTest, WorkerCountDoesNotMatter) {
    auto a = evaluate_attack(corpus, queries, {"adv-0"}, specs, ks, 1);
    auto b = evaluate_attack(corpus, queries, {"adv-0"}, specs, ks, 3);
    EXPECT_EQ(a.to_json().dump(), b.to_json().dump());
    EXPECT_EQ(a.hits_csv(), b.hits_csv());
}

TEST_F(EvaluateAttackTest, UnknownAdversarialIdIsRejected) {
    EXPECT_THROW(evaluate_attack(corpus, queries, {"missing"}, specs, ks), ValidationError);
    std::vector<RetrieverSpec> bad{{"dense", RetrieverKind::dense, nullptr}};
    EXPECT_THROW(evaluate_attack(corpus, queries, {}, bad, ks), ValidationError);
}

}  // namespace
