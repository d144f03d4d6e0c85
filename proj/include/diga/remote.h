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

#include <span>
#include <string>
#include <vector>

#include "diga/embed.h"

namespace diga {

/// Client for a JSON batch embedding service.
///
///   POST <url>/embed   {"texts": ["...", ...]}
///   200                {"embeddings": [[x, ...], ...]}
///
/// Token sequences are detokenized before sending, so the service applies
/// its own tokenization. Batches larger than `batch_size` are split and up
/// to `max_in_flight` requests run concurrently. Connection failures,
/// 429 and 5xx are retried with exponential backoff; after the last retry a
/// connection failure raises TransportError and an HTTP failure raises
/// ProtocolError. Any other status, a malformed body, a count mismatch or a
/// wrong vector length raises ProtocolError immediately.
class RemoteEmbedder final : public Embedder {
public:
    RemoteEmbedder(RemoteEndpoint endpoint, std::size_t dim);

    std::size_t
    dim() const override {
        return dim_;
    }

    std::string
    fingerprint() const override;

    std::vector<EmbeddingVector>
    embed(const Vocabulary& vocab, std::span<const TokenSeq> batch) override;

    std::vector<EmbeddingVector>
    embed_texts(std::span<const std::string> texts);

private:
    std::vector<EmbeddingVector>
    post_batch(std::span<const std::string> texts) const;

    RemoteEndpoint endpoint_;
    std::size_t dim_;
    std::string host_;  // scheme://host[:port]
    std::string path_;  // prefix + "/embed"
};

}  // namespace diga
