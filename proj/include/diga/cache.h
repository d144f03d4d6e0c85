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
#include <map>
#include <optional>
#include <shared_mutex>
#include <string>
#include <utility>

#include "diga/embed.h"

namespace diga {

/// Persistent vector store keyed by (embedder fingerprint, text hash).
///
/// File layout (little-endian):
///   "DIGAEMB\0" magic, u32 version, u64 record count, then per record
///   u32 fingerprint length, fingerprint bytes, u64 text hash, u32 dim,
///   dim x f64.
/// A file that fails to parse is discarded with a warning on stderr and the
/// cache starts empty.
class EmbeddingCache {
public:
    static constexpr std::uint32_t kVersion = 1;

    /// In-memory cache; flush() is a no-op.
    EmbeddingCache() = default;

    explicit EmbeddingCache(std::filesystem::path path);

    std::optional<EmbeddingVector>
    get(const std::string& fingerprint, std::uint64_t text_hash) const;

    void
    put(const std::string& fingerprint, std::uint64_t text_hash, const EmbeddingVector& v);

    /// Writes the file atomically (temp file + rename).
    void
    flush() const;

    std::size_t
    size() const;

    /// True when the file existed but was unreadable and was dropped.
    bool
    recovered() const noexcept {
        return recovered_;
    }

private:
    bool
    load();

    std::optional<std::filesystem::path> path_;
    mutable std::shared_mutex mutex_;
    std::map<std::pair<std::string, std::uint64_t>, EmbeddingVector> entries_;
    bool recovered_ = false;
};

/// Embedder decorator that consults a cache keyed by the detokenized text.
class CachedEmbedder final : public Embedder {
public:
    CachedEmbedder(Embedder& inner, EmbeddingCache& cache) : inner_(inner), cache_(cache) {
    }

    std::size_t
    dim() const override {
        return inner_.dim();
    }

    std::string
    fingerprint() const override {
        return inner_.fingerprint();
    }

    std::vector<EmbeddingVector>
    embed(const Vocabulary& vocab, std::span<const TokenSeq> batch) override;

private:
    Embedder& inner_;
    EmbeddingCache& cache_;
};

}  // namespace diga
