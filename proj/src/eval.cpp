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

#include "diga/eval.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "diga/error.h"
#include "diga/parallel.h"
#include "diga/simd.h"

namespace diga {

namespace {

bool
ranks_before(const ScoredId& a, const ScoredId& b) {
    if (a.score != b.score) {
        return a.score > b.score;
    }
    return a.id < b.id;
}

std::vector<ScoredId>
take_top(std::vector<ScoredId> all, std::size_t k) {
    k = std::min(k, all.size());
    std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k), all.end(), ranks_before);
    all.resize(k);
    return all;
}

}  // namespace

DenseIndex::DenseIndex(std::vector<std::string> ids, std::span<const EmbeddingVector> vectors, Similarity similarity)
    : ids_(std::move(ids)), dim_(vectors.empty() ? 0 : vectors.front().dim()), similarity_(similarity) {
    if (ids_.size() != vectors.size()) {
        throw ValidationError("dense index: id count differs from vector count");
    }
    std::unordered_set<std::string> seen;
    for (const auto& id : ids_) {
        if (!seen.insert(id).second) {
            throw DuplicateIdError("dense index: duplicate id '" + id + "'");
        }
    }
    matrix_.reserve(vectors.size() * dim_);
    norms_.reserve(vectors.size());
    for (const auto& v : vectors) {
        if (v.dim() != dim_) {
            throw ValidationError("dense index: dimension mismatch");
        }
        matrix_.insert(matrix_.end(), v.values().begin(), v.values().end());
        norms_.push_back(norm(v));
    }
}

std::vector<ScoredId>
DenseIndex::topk(const EmbeddingVector& query, std::size_t k) const {
    if (k == 0) {
        throw ValidationError("top-k needs k >= 1");
    }
    if (ids_.empty()) {
        throw ValidationError("top-k over an empty index");
    }
    if (query.dim() != dim_) {
        throw ValidationError("query dimension " + std::to_string(query.dim()) + " differs from index dimension " +
                              std::to_string(dim_));
    }
    const double qn = norm(query);
    if (similarity_ == Similarity::cosine && qn == 0.0) {
        throw ComputationError("cosine search with a zero-norm query");
    }
    std::vector<ScoredId> all(ids_.size());
    for (std::size_t i = 0; i < ids_.size(); ++i) {
        std::span<const double> row(matrix_.data() + i * dim_, dim_);
        double s = simd::dot(row, query.values());
        if (similarity_ == Similarity::cosine) {
            s = norms_[i] == 0.0 ? 0.0 : s / (norms_[i] * qn);
        }
        all[i] = {ids_[i], s};
    }
    return take_top(std::move(all), k);
}

Bm25Index::Bm25Index(std::span<const TokenizedDoc> docs, double k1, double b) : k1_(k1), b_(b) {
    if (!(k1 >= 0.0) || !(b >= 0.0 && b <= 1.0)) {
        throw ValidationError("BM25 needs k1 >= 0 and b in [0, 1]");
    }
    std::uint64_t total = 0;
    for (std::size_t d = 0; d < docs.size(); ++d) {
        ids_.push_back(docs[d].id);
        lengths_.push_back(static_cast<std::uint32_t>(docs[d].tokens.size()));
        total += docs[d].tokens.size();
        std::map<TokenId, std::uint32_t> tf;
        for (TokenId t : docs[d].tokens) {
            ++tf[t];
        }
        for (const auto& [t, c] : tf) {
            postings_[t].push_back({static_cast<std::uint32_t>(d), c});
        }
    }
    avgdl_ = docs.empty() ? 0.0 : static_cast<double>(total) / static_cast<double>(docs.size());
}

double
Bm25Index::idf(TokenId t) const {
    auto it = postings_.find(t);
    const double df = it == postings_.end() ? 0.0 : static_cast<double>(it->second.size());
    const double n = static_cast<double>(ids_.size());
    return std::log(1.0 + (n - df + 0.5) / (df + 0.5));
}

std::vector<ScoredId>
Bm25Index::topk(std::span<const TokenId> query, std::size_t k) const {
    if (k == 0) {
        throw ValidationError("top-k needs k >= 1");
    }
    TokenSeq terms(query.begin(), query.end());
    std::sort(terms.begin(), terms.end());
    terms.erase(std::unique(terms.begin(), terms.end()), terms.end());

    std::map<std::uint32_t, double> acc;
    for (TokenId t : terms) {
        auto it = postings_.find(t);
        if (it == postings_.end()) {
            continue;
        }
        const double w = idf(t);
        for (const auto& p : it->second) {
            const double tf = p.tf;
            const double norm_len = avgdl_ > 0.0 ? lengths_[p.doc] / avgdl_ : 0.0;
            acc[p.doc] += w * tf * (k1_ + 1.0) / (tf + k1_ * (1.0 - b_ + b_ * norm_len));
        }
    }
    std::vector<ScoredId> all;
    all.reserve(acc.size());
    for (const auto& [d, s] : acc) {
        all.push_back({ids_[d], s});
    }
    return take_top(std::move(all), k);
}

double
asr_at_k(std::span<const std::vector<std::string>> rankings, const std::unordered_set<std::string>& adversarial,
         std::size_t k) {
    if (rankings.empty()) {
        throw ValidationError("ASR over an empty query set");
    }
    std::size_t hits = 0;
    for (const auto& r : rankings) {
        const std::size_t top = std::min(k, r.size());
        for (std::size_t i = 0; i < top; ++i) {
            if (adversarial.count(r[i]) != 0) {
                ++hits;
                break;
            }
        }
    }
    return 100.0 * static_cast<double>(hits) / static_cast<double>(rankings.size());
}

double
transferability_score(double asr_in_domain, std::span<const double> asr_cross) {
    if (asr_cross.empty()) {
        throw ValidationError("transferability needs at least one cross-dataset ASR");
    }
    if (asr_in_domain == 0.0) {
        throw ComputationError("transferability is undefined when the in-domain ASR is 0");
    }
    double drop = 0.0;
    for (double x : asr_cross) {
        drop += (asr_in_domain - x) / asr_in_domain;
    }
    return 100.0 * (1.0 - drop / static_cast<double>(asr_cross.size()));
}

nlohmann::json
AttackReport::to_json() const {
    nlohmann::json doc;
    doc["metadata"] = metadata;
    doc["k"] = k_list;
    doc["num_queries"] = query_ids.size();
    nlohmann::json rs = nlohmann::json::array();
    for (const auto& r : retrievers) {
        nlohmann::json asr = nlohmann::json::object();
        for (const auto& [k, v] : r.asr) {
            asr[std::to_string(k)] = v;
        }
        rs.push_back({{"name", r.name}, {"asr", asr}});
    }
    doc["retrievers"] = rs;
    return doc;
}

AttackReport
AttackReport::from_json(const nlohmann::json& doc) {
    AttackReport rep;
    try {
        rep.metadata = doc.value("metadata", nlohmann::json::object());
        rep.k_list = doc.at("k").get<std::vector<std::size_t>>();
        for (const auto& r : doc.at("retrievers")) {
            RetrieverResult rr;
            rr.name = r.at("name").get<std::string>();
            for (const auto& [k, v] : r.at("asr").items()) {
                rr.asr[std::stoull(k)] = v.get<double>();
            }
            rep.retrievers.push_back(std::move(rr));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("malformed report: ") + e.what(), 0);
    }
    return rep;
}

const RetrieverResult&
AttackReport::retriever(const std::string& name) const {
    for (const auto& r : retrievers) {
        if (r.name == name) {
            return r;
        }
    }
    throw ValidationError("report has no retriever named '" + name + "'");
}

std::string
AttackReport::hits_csv() const {
    std::ostringstream out;
    out << "query_id,retriever,k,hit\n";
    for (const auto& r : retrievers) {
        for (std::size_t q = 0; q < r.hits.size(); ++q) {
            for (std::size_t i = 0; i < k_list.size(); ++i) {
                out << query_ids[q] << ',' << r.name << ',' << k_list[i] << ',' << (r.hits[q][i] ? 1 : 0) << '\n';
            }
        }
    }
    return out.str();
}

AttackReport
evaluate_attack(const TokenizedCorpus& augmented, std::span<const TokenizedDoc> queries,
                const std::unordered_set<std::string>& adversarial_ids, std::span<const RetrieverSpec> retrievers,
                std::span<const std::size_t> k_list, std::size_t workers) {
    if (queries.empty()) {
        throw ValidationError("evaluation needs at least one query");
    }
    if (k_list.empty()) {
        throw ValidationError("evaluation needs at least one k");
    }
    for (std::size_t k : k_list) {
        if (k == 0) {
            throw ValidationError("k must be positive");
        }
    }
    for (const auto& id : adversarial_ids) {
        if (!augmented.contains(id)) {
            throw ValidationError("adversarial id '" + id + "' is not in the corpus");
        }
    }
    const std::size_t kmax = *std::max_element(k_list.begin(), k_list.end());
    const Vocabulary& vocab = augmented.vocabulary();

    AttackReport rep;
    rep.k_list.assign(k_list.begin(), k_list.end());
    for (const auto& q : queries) {
        rep.query_ids.push_back(q.id);
    }
    rep.metadata["corpus_size"] = augmented.size();
    rep.metadata["num_adversarial"] = adversarial_ids.size();

    std::vector<TokenSeq> query_tokens;
    for (const auto& q : queries) {
        query_tokens.push_back(q.tokens);
    }

    for (const auto& spec : retrievers) {
        std::vector<std::vector<std::string>> rankings(queries.size());
        if (spec.kind == RetrieverKind::dense) {
            if (spec.embedder == nullptr) {
                throw ValidationError("dense retriever '" + spec.name + "' has no embedder");
            }
            std::vector<std::string> ids;
            std::vector<TokenSeq> docs;
            for (const auto& d : augmented.documents()) {
                ids.push_back(d.id);
                docs.push_back(d.tokens);
            }
            auto doc_vectors = spec.embedder->embed(vocab, docs);
            DenseIndex index(std::move(ids), doc_vectors, spec.similarity);
            auto query_vectors = spec.embedder->embed(vocab, query_tokens);
            parallel_for(queries.size(), workers, [&](std::size_t q) {
                for (auto& s : index.topk(query_vectors[q], kmax)) {
                    rankings[q].push_back(std::move(s.id));
                }
            });
        } else {
            Bm25Index index(augmented.documents(), spec.bm25_k1, spec.bm25_b);
            parallel_for(queries.size(), workers, [&](std::size_t q) {
                for (auto& s : index.topk(queries[q].tokens, kmax)) {
                    rankings[q].push_back(std::move(s.id));
                }
            });
        }

        RetrieverResult rr;
        rr.name = spec.name;
        for (std::size_t k : k_list) {
            rr.asr[k] = asr_at_k(rankings, adversarial_ids, k);
        }
        rr.hits.assign(queries.size(), std::vector<bool>(k_list.size(), false));
        for (std::size_t q = 0; q < queries.size(); ++q) {
            for (std::size_t i = 0; i < k_list.size(); ++i) {
                const std::size_t top = std::min(k_list[i], rankings[q].size());
                for (std::size_t r = 0; r < top; ++r) {
                    if (adversarial_ids.count(rankings[q][r]) != 0) {
                        rr.hits[q][i] = true;
                        break;
                    }
                }
            }
        }
        rep.retrievers.push_back(std::move(rr));
    }
    return rep;
}

}  // namespace diga
