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
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

namespace diga {

using TokenId = std::uint32_t;
using TokenSeq = std::vector<TokenId>;

struct Document {
    std::string id;
    std::string text;
};

/// Bijection between token surfaces and dense ids starting at 0.
class Vocabulary {
public:
    std::optional<TokenId>
    find(std::string_view surface) const;

    /// Returns the id of `surface`, adding it when unseen.
    TokenId
    intern(std::string_view surface);

    const std::string&
    surface(TokenId id) const {
        return surfaces_.at(id);
    }

    std::size_t
    size() const noexcept {
        return surfaces_.size();
    }

private:
    std::vector<std::string> surfaces_;
    std::unordered_map<std::string, TokenId> ids_;
};

enum class VocabMode { frozen, growable };

/// Lowercases and splits on Unicode whitespace and punctuation. Input is
/// UTF-8; invalid bytes are treated as separators.
std::vector<std::string>
split_tokens(std::string_view text);

/// In frozen mode unknown tokens are dropped; growable mode interns them.
TokenSeq
tokenize(std::string_view text, Vocabulary& vocab, VocabMode mode);

TokenSeq
tokenize(std::string_view text, const Vocabulary& vocab);

/// Surfaces joined by single spaces.
std::string
detokenize(std::span<const TokenId> tokens, const Vocabulary& vocab);

std::string
detokenize(std::span<const std::string> surfaces);

struct TokenizedDoc {
    std::string id;
    TokenSeq tokens;
};

/// Line-delimited {"id": ..., "text": ...} records. Blank lines are skipped.
/// Throws ParseError naming the line, or DuplicateIdError.
std::vector<Document>
load_documents(const std::filesystem::path& path);

void
save_documents(const std::filesystem::path& path, std::span<const Document> docs);

class TokenizedCorpus {
public:
    TokenizedCorpus() = default;

    /// Tokenizes in growable mode, preserving document order.
    static TokenizedCorpus
    from_documents(std::span<const Document> docs);

    /// Adds a pre-tokenized document. Throws DuplicateIdError on id reuse.
    void
    add(TokenizedDoc doc);

    void
    add(const Document& doc);

    const std::vector<TokenizedDoc>&
    documents() const noexcept {
        return docs_;
    }

    std::size_t
    size() const noexcept {
        return docs_.size();
    }

    bool
    contains(std::string_view id) const {
        return id_set_.count(std::string(id)) != 0;
    }

    const Vocabulary&
    vocabulary() const noexcept {
        return vocab_;
    }

    /// Query files share the corpus vocabulary and may extend it.
    Vocabulary&
    mutable_vocabulary() noexcept {
        return vocab_;
    }

    /// Number of documents containing `t`; 0 for tokens never seen in a
    /// document.
    std::uint32_t
    document_frequency(TokenId t) const noexcept {
        return t < df_.size() ? df_[t] : 0;
    }

    /// Sum of occurrences of `t` over all documents.
    std::uint64_t
    term_frequency(TokenId t) const noexcept {
        return t < tf_.size() ? tf_[t] : 0;
    }

    /// Copy without the given document ids.
    TokenizedCorpus
    without(const std::unordered_set<std::string>& ids) const;

private:
    std::vector<TokenizedDoc> docs_;
    std::unordered_set<std::string> id_set_;
    Vocabulary vocab_;
    std::vector<std::uint32_t> df_;
    std::vector<std::uint64_t> tf_;
};

TokenizedCorpus
load_corpus(const std::filesystem::path& path);

/// Loads a query file, tokenizing into `vocab` in growable mode.
std::vector<TokenizedDoc>
load_queries(const std::filesystem::path& path, Vocabulary& vocab);

std::vector<TokenizedDoc>
tokenize_documents(std::span<const Document> docs, Vocabulary& vocab);

/// Per-token importance scores s_i with their maximum C.
class ImportanceTable {
public:
    /// Scores must be finite and non-negative, and at least one must be
    /// positive. Repeated ids keep the last score.
    static ImportanceTable
    from_scores(std::span<const std::pair<TokenId, double>> scores);

    /// 0 for tokens not in the table.
    double
    score(TokenId t) const noexcept {
        return t < scores_.size() ? scores_[t] : 0.0;
    }

    double
    max_score() const noexcept {
        return max_score_;
    }

    /// Tokens with positive score, ascending id.
    const std::vector<TokenId>&
    candidates() const noexcept {
        return candidates_;
    }

private:
    std::vector<double> scores_;
    std::vector<TokenId> candidates_;
    double max_score_ = 0.0;
};

/// ln((N + 1) / (df + 1)) + 1
double
smoothed_idf(std::size_t num_docs, std::uint32_t df);

/// score(t) = corpus term frequency of t * smoothed idf(t).
ImportanceTable
compute_corpus_tfidf(const TokenizedCorpus& corpus);

/// Importance restricted to a query cluster. Query tokens score
/// tf(t, cluster) * idf(t, corpus). When the cluster has fewer than
/// 4 * passage_length distinct tokens, the highest corpus TF-IDF tokens are
/// added until it does; those are ranked below every query token (scaled
/// into (0, min query score]). Everything is then rescaled to max 1.
ImportanceTable
cluster_importance(std::span<const TokenSeq> cluster_queries, const TokenizedCorpus& corpus,
                   const ImportanceTable& corpus_tfidf, std::size_t passage_length);

ImportanceTable
cluster_importance(std::span<const TokenSeq> cluster_queries, const TokenizedCorpus& corpus,
                   std::size_t passage_length);

class Embedder;
class EmbeddingVector;

/// score[i] = cos(embed(passage), target) - cos(embed(passage minus
/// position i), target). Requires at least two tokens.
std::vector<double>
loo_importance(std::span<const TokenId> passage, const EmbeddingVector& target, Embedder& embedder,
               const Vocabulary& vocab);

}  // namespace diga
