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

#include "diga/corpus.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include "diga/embed.h"
#include "diga/error.h"
#include "json.hpp"

namespace diga {

namespace {

bool
is_space(char32_t c) {
    return (c >= 0x09 && c <= 0x0D) || c == 0x20 || c == 0x85 || c == 0xA0 || c == 0x1680 ||
           (c >= 0x2000 && c <= 0x200B) || c == 0x2028 || c == 0x2029 || c == 0x202F || c == 0x205F ||
           c == 0x3000 || c == 0xFEFF;
}

bool
is_separator(char32_t c) {
    if (c < 0x80) {
        bool alnum = (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
        return !alnum;
    }
    if (is_space(c)) {
        return true;
    }
    return (c >= 0x80 && c <= 0x9F) || (c >= 0xA1 && c <= 0xBF) || c == 0xD7 || c == 0xF7 ||
           (c >= 0x2010 && c <= 0x2027) || (c >= 0x2030 && c <= 0x205E) || (c >= 0x20A0 && c <= 0x20CF) ||
           (c >= 0x2190 && c <= 0x23FF) || (c >= 0x2500 && c <= 0x27BF) || (c >= 0x2E00 && c <= 0x2E7F) ||
           (c >= 0x3001 && c <= 0x303F) || (c >= 0xFF01 && c <= 0xFF0F) || (c >= 0xFF1A && c <= 0xFF20) ||
           (c >= 0xFF3B && c <= 0xFF40) || (c >= 0xFF5B && c <= 0xFF65);
}

// Simple case folding for Latin, Greek and Cyrillic.
char32_t
to_lower(char32_t c) {
    if (c >= 'A' && c <= 'Z') {
        return c + 32;
    }
    if (c < 0xC0) {
        return c;
    }
    if (c <= 0xDE && c != 0xD7) {
        return c + 32;
    }
    if (c >= 0x100 && c <= 0x17F) {
        if (c == 0x130) {
            return 'i';
        }
        if (c == 0x178) {
            return 0xFF;
        }
        bool odd_upper = (c >= 0x139 && c <= 0x148) || (c >= 0x179 && c <= 0x17E);
        bool even_upper = (c <= 0x12F) || (c >= 0x132 && c <= 0x137) || (c >= 0x14A && c <= 0x177);
        if (odd_upper && (c & 1) == 1) {
            return c + 1;
        }
        if (even_upper && (c & 1) == 0) {
            return c + 1;
        }
        return c;
    }
    if (c >= 0x391 && c <= 0x3A9 && c != 0x3A2) {
        return c + 32;
    }
    if (c == 0x386) {
        return 0x3AC;
    }
    if (c >= 0x388 && c <= 0x38A) {
        return c + 37;
    }
    if (c == 0x38C) {
        return 0x3CC;
    }
    if (c == 0x38E || c == 0x38F) {
        return c + 63;
    }
    if (c >= 0x410 && c <= 0x42F) {
        return c + 32;
    }
    if (c >= 0x400 && c <= 0x40F) {
        return c + 80;
    }
    return c;
}

void
append_utf8(std::string& out, char32_t c) {
    if (c < 0x80) {
        out.push_back(static_cast<char>(c));
    } else if (c < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (c >> 6)));
        out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
    } else if (c < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (c >> 12)));
        out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (c >> 18)));
        out.push_back(static_cast<char>(0x80 | ((c >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((c >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (c & 0x3F)));
    }
}

constexpr char32_t kInvalid = 0xFFFFFFFF;

// Decodes one code point at text[i], advancing i. An invalid sequence
// consumes one byte and yields kInvalid.
char32_t
next_code_point(std::string_view text, std::size_t& i) {
    auto b0 = static_cast<unsigned char>(text[i]);
    std::size_t len;
    char32_t cp;
    if (b0 < 0x80) {
        ++i;
        return b0;
    } else if ((b0 & 0xE0) == 0xC0) {
        len = 2;
        cp = b0 & 0x1F;
    } else if ((b0 & 0xF0) == 0xE0) {
        len = 3;
        cp = b0 & 0x0F;
    } else if ((b0 & 0xF8) == 0xF0) {
        len = 4;
        cp = b0 & 0x07;
    } else {
        ++i;
        return kInvalid;
    }
    if (i + len > text.size()) {
        ++i;
        return kInvalid;
    }
    for (std::size_t k = 1; k < len; ++k) {
        auto b = static_cast<unsigned char>(text[i + k]);
        if ((b & 0xC0) != 0x80) {
            ++i;
            return kInvalid;
        }
        cp = (cp << 6) | (b & 0x3F);
    }
    i += len;
    return cp;
}

bool
blank(std::string_view s) {
    std::size_t i = 0;
    while (i < s.size()) {
        char32_t c = next_code_point(s, i);
        if (c == kInvalid || !is_space(c)) {
            return false;
        }
    }
    return true;
}

}  // namespace

std::optional<TokenId>
Vocabulary::find(std::string_view surface) const {
    auto it = ids_.find(std::string(surface));
    if (it == ids_.end()) {
        return std::nullopt;
    }
    return it->second;
}

TokenId
Vocabulary::intern(std::string_view surface) {
    auto [it, inserted] = ids_.try_emplace(std::string(surface), static_cast<TokenId>(surfaces_.size()));
    if (inserted) {
        surfaces_.emplace_back(surface);
    }
    return it->second;
}

std::vector<std::string>
split_tokens(std::string_view text) {
    std::vector<std::string> out;
    std::string cur;
    std::size_t i = 0;
    while (i < text.size()) {
        char32_t c = next_code_point(text, i);
        if (c == kInvalid || is_separator(c)) {
            if (!cur.empty()) {
                out.push_back(std::move(cur));
                cur.clear();
            }
            continue;
        }
        append_utf8(cur, to_lower(c));
    }
    if (!cur.empty()) {
        out.push_back(std::move(cur));
    }
    return out;
}

TokenSeq
tokenize(std::string_view text, Vocabulary& vocab, VocabMode mode) {
    if (mode == VocabMode::frozen) {
        return tokenize(text, static_cast<const Vocabulary&>(vocab));
    }
    TokenSeq out;
    for (const auto& s : split_tokens(text)) {
        out.push_back(vocab.intern(s));
    }
    return out;
}

TokenSeq
tokenize(std::string_view text, const Vocabulary& vocab) {
    TokenSeq out;
    for (const auto& s : split_tokens(text)) {
        if (auto id = vocab.find(s)) {
            out.push_back(*id);
        }
    }
    return out;
}

std::string
detokenize(std::span<const TokenId> tokens, const Vocabulary& vocab) {
    std::string out;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i > 0) {
            out.push_back(' ');
        }
        out += vocab.surface(tokens[i]);
    }
    return out;
}

std::string
detokenize(std::span<const std::string> surfaces) {
    std::string out;
    for (std::size_t i = 0; i < surfaces.size(); ++i) {
        if (i > 0) {
            out.push_back(' ');
        }
        out += surfaces[i];
    }
    return out;
}

std::vector<Document>
load_documents(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    std::vector<Document> docs;
    std::unordered_set<std::string> seen;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.find_first_not_of(" \t") == std::string::npos) {
            continue;
        }
        nlohmann::json rec;
        try {
            rec = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw ParseError(std::string("malformed JSON in ") + path.string() + ": " + e.what(), lineno);
        }
        if (!rec.is_object() || !rec.contains("id") || !rec["id"].is_string() || !rec.contains("text") ||
            !rec["text"].is_string()) {
            throw ParseError("record needs string fields \"id\" and \"text\" in " + path.string(), lineno);
        }
        Document doc{rec["id"].get<std::string>(), rec["text"].get<std::string>()};
        if (doc.id.empty()) {
            throw ParseError("empty id in " + path.string(), lineno);
        }
        if (blank(doc.text)) {
            throw ParseError("document '" + doc.id + "' has no text", lineno);
        }
        if (!seen.insert(doc.id).second) {
            throw DuplicateIdError("duplicate id '" + doc.id + "' at line " + std::to_string(lineno) + " of " +
                                   path.string());
        }
        docs.push_back(std::move(doc));
    }
    return docs;
}

void
save_documents(const std::filesystem::path& path, std::span<const Document> docs) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw IoError("cannot write " + path.string());
    }
    for (const auto& d : docs) {
        nlohmann::json rec = {{"id", d.id}, {"text", d.text}};
        out << rec.dump() << '\n';
    }
}

TokenizedCorpus
TokenizedCorpus::from_documents(std::span<const Document> docs) {
    TokenizedCorpus corpus;
    for (const auto& d : docs) {
        corpus.add(d);
    }
    return corpus;
}

void
TokenizedCorpus::add(const Document& doc) {
    if (contains(doc.id)) {
        throw DuplicateIdError("duplicate id '" + doc.id + "'");
    }
    add(TokenizedDoc{doc.id, tokenize(doc.text, vocab_, VocabMode::growable)});
}

void
TokenizedCorpus::add(TokenizedDoc doc) {
    if (!id_set_.insert(doc.id).second) {
        throw DuplicateIdError("duplicate id '" + doc.id + "'");
    }
    if (vocab_.size() > df_.size()) {
        df_.resize(vocab_.size(), 0);
        tf_.resize(vocab_.size(), 0);
    }
    TokenSeq uniq = doc.tokens;
    std::sort(uniq.begin(), uniq.end());
    uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
    for (TokenId t : uniq) {
        if (t >= vocab_.size()) {
            throw ValidationError("token id " + std::to_string(t) + " outside the vocabulary");
        }
        ++df_[t];
    }
    for (TokenId t : doc.tokens) {
        ++tf_[t];
    }
    docs_.push_back(std::move(doc));
}

TokenizedCorpus
TokenizedCorpus::without(const std::unordered_set<std::string>& ids) const {
    TokenizedCorpus out;
    out.vocab_ = vocab_;
    for (const auto& d : docs_) {
        if (ids.count(d.id) == 0) {
            out.add(d);
        }
    }
    return out;
}

TokenizedCorpus
load_corpus(const std::filesystem::path& path) {
    auto docs = load_documents(path);
    return TokenizedCorpus::from_documents(docs);
}

std::vector<TokenizedDoc>
tokenize_documents(std::span<const Document> docs, Vocabulary& vocab) {
    std::vector<TokenizedDoc> out;
    out.reserve(docs.size());
    for (const auto& d : docs) {
        out.push_back({d.id, tokenize(d.text, vocab, VocabMode::growable)});
    }
    return out;
}

std::vector<TokenizedDoc>
load_queries(const std::filesystem::path& path, Vocabulary& vocab) {
    auto docs = load_documents(path);
    return tokenize_documents(docs, vocab);
}

ImportanceTable
ImportanceTable::from_scores(std::span<const std::pair<TokenId, double>> scores) {
    ImportanceTable table;
    for (const auto& [t, s] : scores) {
        if (!std::isfinite(s) || s < 0.0) {
            throw ValidationError("importance score for token " + std::to_string(t) +
                                  " must be finite and non-negative");
        }
        if (t >= table.scores_.size()) {
            table.scores_.resize(static_cast<std::size_t>(t) + 1, 0.0);
        }
        table.scores_[t] = s;
    }
    for (std::size_t t = 0; t < table.scores_.size(); ++t) {
        if (table.scores_[t] > 0.0) {
            table.candidates_.push_back(static_cast<TokenId>(t));
            table.max_score_ = std::max(table.max_score_, table.scores_[t]);
        }
    }
    if (table.candidates_.empty()) {
        throw ComputationError("importance table has no token with positive score");
    }
    return table;
}

double
smoothed_idf(std::size_t num_docs, std::uint32_t df) {
    return std::log((static_cast<double>(num_docs) + 1.0) / (static_cast<double>(df) + 1.0)) + 1.0;
}

ImportanceTable
compute_corpus_tfidf(const TokenizedCorpus& corpus) {
    if (corpus.size() == 0) {
        throw ComputationError("cannot compute TF-IDF over an empty corpus");
    }
    std::vector<std::pair<TokenId, double>> scores;
    for (std::size_t t = 0; t < corpus.vocabulary().size(); ++t) {
        auto id = static_cast<TokenId>(t);
        std::uint64_t tf = corpus.term_frequency(id);
        if (tf == 0) {
            continue;
        }
        scores.emplace_back(id, static_cast<double>(tf) * smoothed_idf(corpus.size(), corpus.document_frequency(id)));
    }
    return ImportanceTable::from_scores(scores);
}

ImportanceTable
cluster_importance(std::span<const TokenSeq> cluster_queries, const TokenizedCorpus& corpus,
                   const ImportanceTable& corpus_tfidf, std::size_t passage_length) {
    if (cluster_queries.empty()) {
        throw ValidationError("cluster_importance: empty query cluster");
    }
    std::map<TokenId, std::uint64_t> tf;
    for (const auto& q : cluster_queries) {
        for (TokenId t : q) {
            ++tf[t];
        }
    }
    if (tf.empty()) {
        throw ComputationError("cluster_importance: cluster queries contain no tokens");
    }
    std::vector<std::pair<TokenId, double>> scores;
    double min_query_score = 0.0;
    for (const auto& [t, count] : tf) {
        double s = static_cast<double>(count) * smoothed_idf(corpus.size(), corpus.document_frequency(t));
        scores.emplace_back(t, s);
        min_query_score = scores.size() == 1 ? s : std::min(min_query_score, s);
    }

    const std::size_t wanted = 4 * passage_length;
    if (tf.size() < wanted) {
        std::vector<TokenId> extra;
        for (TokenId t : corpus_tfidf.candidates()) {
            if (tf.count(t) == 0) {
                extra.push_back(t);
            }
        }
        std::stable_sort(extra.begin(), extra.end(), [&](TokenId a, TokenId b) {
            return corpus_tfidf.score(a) > corpus_tfidf.score(b);
        });
        extra.resize(std::min(extra.size(), wanted - tf.size()));
        const double corpus_max = corpus_tfidf.max_score();
        for (TokenId t : extra) {
            scores.emplace_back(t, min_query_score * (corpus_tfidf.score(t) / corpus_max));
        }
    }

    double max_score = 0.0;
    for (const auto& [t, s] : scores) {
        max_score = std::max(max_score, s);
    }
    for (auto& [t, s] : scores) {
        s /= max_score;
    }
    return ImportanceTable::from_scores(scores);
}

ImportanceTable
cluster_importance(std::span<const TokenSeq> cluster_queries, const TokenizedCorpus& corpus,
                   std::size_t passage_length) {
    return cluster_importance(cluster_queries, corpus, compute_corpus_tfidf(corpus), passage_length);
}

std::vector<double>
loo_importance(std::span<const TokenId> passage, const EmbeddingVector& target, Embedder& embedder,
               const Vocabulary& vocab) {
    if (passage.size() < 2) {
        throw ValidationError("loo_importance needs a passage of at least two tokens");
    }
    std::vector<TokenSeq> batch;
    batch.reserve(passage.size() + 1);
    batch.emplace_back(passage.begin(), passage.end());
    for (std::size_t i = 0; i < passage.size(); ++i) {
        TokenSeq reduced;
        reduced.reserve(passage.size() - 1);
        for (std::size_t j = 0; j < passage.size(); ++j) {
            if (j != i) {
                reduced.push_back(passage[j]);
            }
        }
        batch.push_back(std::move(reduced));
    }
    auto vectors = embedder.embed(vocab, batch);
    const double full = cosine(vectors[0], target);
    std::vector<double> out(passage.size());
    for (std::size_t i = 0; i < passage.size(); ++i) {
        out[i] = full - cosine(vectors[i + 1], target);
    }
    return out;
}

}  // namespace diga
