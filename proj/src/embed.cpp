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

#include "diga/embed.h"

#include <cmath>
#include <mutex>

#include "diga/error.h"
#include "diga/parallel.h"
#include "diga/remote.h"
#include "diga/rng.h"
#include "diga/simd.h"

namespace diga {

bool
EmbeddingVector::all_finite() const noexcept {
    for (double v : values_) {
        if (!std::isfinite(v)) {
            return false;
        }
    }
    return true;
}

double
dot(const EmbeddingVector& a, const EmbeddingVector& b) {
    if (a.dim() != b.dim()) {
        throw ValidationError("dot: dimension mismatch " + std::to_string(a.dim()) + " vs " +
                              std::to_string(b.dim()));
    }
    return simd::dot(a.values(), b.values());
}

double
norm(const EmbeddingVector& v) {
    return std::sqrt(simd::dot(v.values(), v.values()));
}

double
cosine(const EmbeddingVector& a, const EmbeddingVector& b) {
    const double ab = dot(a, b);
    const double na = norm(a);
    const double nb = norm(b);
    if (na == 0.0 || nb == 0.0) {
        throw ComputationError("cosine of a zero-norm vector");
    }
    return ab / (na * nb);
}

EmbeddingVector
centroid(std::span<const EmbeddingVector> vectors) {
    if (vectors.empty()) {
        throw ValidationError("centroid of an empty batch");
    }
    EmbeddingVector out(vectors.front().dim());
    for (const auto& v : vectors) {
        if (v.dim() != out.dim()) {
            throw ValidationError("centroid: dimension mismatch");
        }
        simd::add(out.values(), v.values());
    }
    simd::div(out.values(), static_cast<double>(vectors.size()));
    return out;
}

EmbeddingVector
Embedder::embed_one(const Vocabulary& vocab, std::span<const TokenId> tokens) {
    TokenSeq seq(tokens.begin(), tokens.end());
    return std::move(embed(vocab, std::span<const TokenSeq>(&seq, 1)).front());
}

ReferenceEmbedder::ReferenceEmbedder(std::size_t dim, std::uint64_t seed, std::size_t workers)
    : dim_(dim), seed_(seed), workers_(workers) {
    if (dim == 0) {
        throw ValidationError("reference embedder dimension must be positive");
    }
}

std::string
ReferenceEmbedder::fingerprint() const {
    return "reference:v1:dim=" + std::to_string(dim_) + ":seed=" + std::to_string(seed_);
}

const std::vector<double>&
ReferenceEmbedder::token_vector(std::string_view surface) {
    {
        std::shared_lock lock(mutex_);
        auto it = memo_.find(std::string(surface));
        if (it != memo_.end()) {
            return *it->second;
        }
    }
    auto vec = std::make_unique<std::vector<double>>(dim_);
    const std::uint64_t base = mix64(seed_ ^ mix64(fnv1a64(surface)));
    double sumsq = 0.0;
    for (std::size_t j = 0; j < dim_; ++j) {
        std::uint64_t bits = mix64(base + j * 0x9e3779b97f4a7c15ULL);
        double u = static_cast<double>(bits >> 11) * 0x1.0p-52 - 1.0;  // [-1, 1)
        (*vec)[j] = u;
        sumsq += u * u;
    }
    if (sumsq == 0.0) {
        (*vec)[0] = 1.0;
        sumsq = 1.0;
    }
    const double inv = 1.0 / std::sqrt(sumsq);
    for (double& x : *vec) {
        x = std::nearbyint(x * inv * 0x1.0p32) * 0x1.0p-32;
    }
    std::unique_lock lock(mutex_);
    auto [it, inserted] = memo_.try_emplace(std::string(surface), std::move(vec));
    return *it->second;
}

EmbeddingVector
ReferenceEmbedder::mean_of(std::span<const std::vector<double>* const> rows) const {
    if (rows.empty()) {
        throw ValidationError("cannot embed an empty token sequence");
    }
    if (rows.size() >= kMaxTokens) {
        throw ValidationError("token sequence too long for the reference embedder");
    }
    EmbeddingVector out(dim_);
    for (const auto* row : rows) {
        simd::add(out.values(), *row);
    }
    simd::div(out.values(), static_cast<double>(rows.size()));
    return out;
}

EmbeddingVector
ReferenceEmbedder::embed_surfaces(std::span<const std::string> surfaces) {
    std::vector<const std::vector<double>*> rows;
    rows.reserve(surfaces.size());
    for (const auto& s : surfaces) {
        rows.push_back(&token_vector(s));
    }
    return mean_of(rows);
}

std::vector<EmbeddingVector>
ReferenceEmbedder::embed(const Vocabulary& vocab, std::span<const TokenSeq> batch) {
    std::vector<EmbeddingVector> out(batch.size());
    parallel_for(batch.size(), workers_, [&](std::size_t i) {
        std::vector<const std::vector<double>*> rows;
        rows.reserve(batch[i].size());
        for (TokenId t : batch[i]) {
            rows.push_back(&token_vector(vocab.surface(t)));
        }
        out[i] = mean_of(rows);
    });
    return out;
}

void
EmbedderSpec::validate() const {
    if (dim == 0) {
        throw ValidationError("embedder dim must be positive");
    }
    if (kind == EmbedderKind::remote) {
        if (endpoint.url.empty()) {
            throw ValidationError("remote embedder requires an endpoint URL");
        }
        if (endpoint.max_in_flight == 0 || endpoint.batch_size == 0) {
            throw ValidationError("remote embedder max_in_flight and batch_size must be positive");
        }
    }
}

std::unique_ptr<Embedder>
make_embedder(const EmbedderSpec& spec, std::size_t workers) {
    spec.validate();
    if (spec.kind == EmbedderKind::remote) {
        return std::make_unique<RemoteEmbedder>(spec.endpoint, spec.dim);
    }
    return std::make_unique<ReferenceEmbedder>(spec.dim, spec.seed, workers);
}

}  // namespace diga
