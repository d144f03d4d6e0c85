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
#include <memory>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "diga/corpus.h"

namespace diga {

/// Dense embedding. Values are finite; the dimension is fixed per embedder.
class EmbeddingVector {
public:
    EmbeddingVector() = default;

    explicit EmbeddingVector(std::size_t dim) : values_(dim, 0.0) {
    }

    explicit EmbeddingVector(std::vector<double> values) : values_(std::move(values)) {
    }

    std::size_t
    dim() const noexcept {
        return values_.size();
    }

    double
    operator[](std::size_t i) const {
        return values_[i];
    }

    double&
    operator[](std::size_t i) {
        return values_[i];
    }

    std::span<const double>
    values() const noexcept {
        return values_;
    }

    std::span<double>
    values() noexcept {
        return values_;
    }

    bool
    all_finite() const noexcept;

    friend bool
    operator==(const EmbeddingVector&, const EmbeddingVector&) = default;

private:
    std::vector<double> values_;
};

/// Inner product. Throws ValidationError on dimension mismatch.
double
dot(const EmbeddingVector& a, const EmbeddingVector& b);

double
norm(const EmbeddingVector& v);

/// dot(a, b) / (|a| |b|). Throws ComputationError on a zero-norm input.
double
cosine(const EmbeddingVector& a, const EmbeddingVector& b);

/// Coordinate-wise mean. Throws ValidationError on an empty batch or
/// mismatched dimensions.
EmbeddingVector
centroid(std::span<const EmbeddingVector> vectors);

/// Maps token sequences to vectors, one per input, order-preserving.
/// Implementations are safe to call concurrently.
class Embedder {
public:
    virtual ~Embedder() = default;

    virtual std::size_t
    dim() const = 0;

    /// Identifies the embedding function; used as a cache key component.
    virtual std::string
    fingerprint() const = 0;

    virtual std::vector<EmbeddingVector>
    embed(const Vocabulary& vocab, std::span<const TokenSeq> batch) = 0;

    EmbeddingVector
    embed_one(const Vocabulary& vocab, std::span<const TokenId> tokens);
};

/// Deterministic test embedder: each surface maps to a pseudorandom unit
/// vector derived from (seed, surface); a sequence embeds to the arithmetic
/// mean of its token vectors.
///
/// Token vector coordinates are multiples of 2^-32, so the coordinate sums
/// are exact in double for sequences shorter than 2^20 tokens. The mean is
/// therefore independent of summation order: permutations of a passage
/// embed bit-identically on every platform.
class ReferenceEmbedder final : public Embedder {
public:
    static constexpr std::size_t kDefaultDim = 256;
    static constexpr std::size_t kMaxTokens = std::size_t{1} << 20;

    ReferenceEmbedder(std::size_t dim, std::uint64_t seed, std::size_t workers = 1);

    std::size_t
    dim() const override {
        return dim_;
    }

    std::string
    fingerprint() const override;

    std::vector<EmbeddingVector>
    embed(const Vocabulary& vocab, std::span<const TokenSeq> batch) override;

    /// Embeds surfaces directly, without a vocabulary.
    EmbeddingVector
    embed_surfaces(std::span<const std::string> surfaces);

    /// The unit vector assigned to `surface`.
    const std::vector<double>&
    token_vector(std::string_view surface);

private:
    EmbeddingVector
    mean_of(std::span<const std::vector<double>* const> rows) const;

    std::size_t dim_;
    std::uint64_t seed_;
    std::size_t workers_;
    std::shared_mutex mutex_;
    std::unordered_map<std::string, std::unique_ptr<std::vector<double>>> memo_;
};

enum class EmbedderKind { reference, remote };

struct RemoteEndpoint {
    std::string url;
    std::uint32_t timeout_ms = 30000;
    std::size_t max_in_flight = 4;
    std::size_t batch_size = 64;
    std::size_t max_retries = 3;
    std::uint32_t initial_backoff_ms = 200;
    /// Bearer token; filled from the DIGA_REMOTE_TOKEN environment variable
    /// by the CLI.
    std::string auth_token;
};

struct EmbedderSpec {
    EmbedderKind kind = EmbedderKind::reference;
    std::size_t dim = ReferenceEmbedder::kDefaultDim;
    std::uint64_t seed = 0;
    RemoteEndpoint endpoint;

    void
    validate() const;
};

std::unique_ptr<Embedder>
make_embedder(const EmbedderSpec& spec, std::size_t workers = 1);

}  // namespace diga
