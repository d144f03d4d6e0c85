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
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "diga/corpus.h"
#include "diga/embed.h"
#include "json.hpp"

namespace diga {

struct ScoredId {
    std::string id;
    double score = 0.0;
};

enum class Similarity { dot, cosine };

/// Exact top-k over an embedding matrix.
class DenseIndex {
public:
    DenseIndex(std::vector<std::string> ids, std::span<const EmbeddingVector> vectors,
               Similarity similarity = Similarity::dot);

    /// Descending score, ties by ascending id; k larger than the index
    /// returns everything.
    std::vector<ScoredId>
    topk(const EmbeddingVector& query, std::size_t k) const;

    std::size_t
    size() const noexcept {
        return ids_.size();
    }

    std::size_t
    dim() const noexcept {
        return dim_;
    }

private:
    std::vector<std::string> ids_;
    std::vector<double> matrix_;  // row-major
    std::vector<double> norms_;
    std::size_t dim_;
    Similarity similarity_;
};

/// Okapi BM25 over an inverted index. Repeated query tokens count once.
class Bm25Index {
public:
    explicit Bm25Index(std::span<const TokenizedDoc> docs, double k1 = 0.9, double b = 0.4);

    /// Only documents matching at least one query token are returned.
    std::vector<ScoredId>
    topk(std::span<const TokenId> query, std::size_t k) const;

    /// ln(1 + (N - df + 0.5) / (df + 0.5))
    double
    idf(TokenId t) const;

    std::size_t
    size() const noexcept {
        return ids_.size();
    }

    double
    average_length() const noexcept {
        return avgdl_;
    }

private:
    struct Posting {
        std::uint32_t doc;
        std::uint32_t tf;
    };

    std::vector<std::string> ids_;
    std::vector<std::uint32_t> lengths_;
    std::unordered_map<TokenId, std::vector<Posting>> postings_;
    double avgdl_ = 0.0;
    double k1_;
    double b_;
};

/// Percentage of queries whose top-k holds at least one adversarial id.
double
asr_at_k(std::span<const std::vector<std::string>> rankings, const std::unordered_set<std::string>& adversarial,
         std::size_t k);

/// 100 * (1 - mean_j (in_domain - cross_j) / in_domain). Throws
/// ComputationError when in_domain is 0 (the score is undefined).
double
transferability_score(double asr_in_domain, std::span<const double> asr_cross);

enum class RetrieverKind { dense, bm25 };

struct RetrieverSpec {
    std::string name;
    RetrieverKind kind = RetrieverKind::dense;
    /// Required for dense retrievers.
    Embedder* embedder = nullptr;
    Similarity similarity = Similarity::dot;
    double bm25_k1 = 0.9;
    double bm25_b = 0.4;
};

struct RetrieverResult {
    std::string name;
    std::map<std::size_t, double> asr;  // k -> percent
    /// hits[q][i] for k_list[i].
    std::vector<std::vector<bool>> hits;
};

struct AttackReport {
    nlohmann::json metadata = nlohmann::json::object();
    std::vector<std::size_t> k_list;
    std::vector<std::string> query_ids;
    std::vector<RetrieverResult> retrievers;

    nlohmann::json
    to_json() const;

    /// Restores metadata, k and ASR values; query ids and hits are not stored.
    static AttackReport
    from_json(const nlohmann::json& doc);

    const RetrieverResult&
    retriever(const std::string& name) const;

    /// Rows "query_id,retriever,k,hit".
    std::string
    hits_csv() const;
};

/// Ranks every query against the augmented corpus with each retriever and
/// computes ASR@k for every k. Query tokens must use the corpus vocabulary.
AttackReport
evaluate_attack(const TokenizedCorpus& augmented, std::span<const TokenizedDoc> queries,
                const std::unordered_set<std::string>& adversarial_ids, std::span<const RetrieverSpec> retrievers,
                std::span<const std::size_t> k_list, std::size_t workers = 1);

}  // namespace diga
