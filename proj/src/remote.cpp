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

#include "diga/remote.h"

#include <chrono>
#include <cmath>
#include <thread>

#include "diga/error.h"
#include "diga/parallel.h"
#include "httplib.h"
#include "json.hpp"

namespace diga {

RemoteEmbedder::RemoteEmbedder(RemoteEndpoint endpoint, std::size_t dim)
    : endpoint_(std::move(endpoint)), dim_(dim) {
    if (dim_ == 0) {
        throw ValidationError("remote embedder dimension must be positive");
    }
    const std::string& url = endpoint_.url;
    auto scheme_end = url.find("://");
    if (scheme_end == std::string::npos) {
        throw ValidationError("endpoint URL needs a scheme: " + url);
    }
    auto path_start = url.find('/', scheme_end + 3);
    host_ = url.substr(0, path_start);
    std::string prefix = path_start == std::string::npos ? "" : url.substr(path_start);
    while (!prefix.empty() && prefix.back() == '/') {
        prefix.pop_back();
    }
    path_ = prefix + "/embed";
    if (endpoint_.max_in_flight == 0 || endpoint_.batch_size == 0) {
        throw ValidationError("max_in_flight and batch_size must be positive");
    }
}

std::string
RemoteEmbedder::fingerprint() const {
    return "remote:" + endpoint_.url + ":dim=" + std::to_string(dim_);
}

std::vector<EmbeddingVector>
RemoteEmbedder::embed(const Vocabulary& vocab, std::span<const TokenSeq> batch) {
    std::vector<std::string> texts;
    texts.reserve(batch.size());
    for (const auto& seq : batch) {
        texts.push_back(detokenize(seq, vocab));
    }
    return embed_texts(texts);
}

std::vector<EmbeddingVector>
RemoteEmbedder::embed_texts(std::span<const std::string> texts) {
    if (texts.empty()) {
        throw ValidationError("remote embed: empty batch");
    }
    const std::size_t per = endpoint_.batch_size;
    const std::size_t chunks = (texts.size() + per - 1) / per;
    std::vector<std::vector<EmbeddingVector>> parts(chunks);
    parallel_for(chunks, endpoint_.max_in_flight, [&](std::size_t c) {
        const std::size_t begin = c * per;
        const std::size_t len = std::min(per, texts.size() - begin);
        parts[c] = post_batch(texts.subspan(begin, len));
    });
    std::vector<EmbeddingVector> out;
    out.reserve(texts.size());
    for (auto& p : parts) {
        for (auto& v : p) {
            out.push_back(std::move(v));
        }
    }
    return out;
}

std::vector<EmbeddingVector>
RemoteEmbedder::post_batch(std::span<const std::string> texts) const {
    nlohmann::json req = {{"texts", std::vector<std::string>(texts.begin(), texts.end())}};
    const std::string body = req.dump();

    httplib::Client client(host_);
    const auto timeout = std::chrono::milliseconds(endpoint_.timeout_ms);
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);
    httplib::Headers headers;
    if (!endpoint_.auth_token.empty()) {
        headers.emplace("Authorization", "Bearer " + endpoint_.auth_token);
    }

    std::string last_error;
    bool last_was_transport = true;
    for (std::size_t attempt = 0; attempt <= endpoint_.max_retries; ++attempt) {
        if (attempt > 0) {
            std::this_thread::sleep_for(std::chrono::milliseconds(endpoint_.initial_backoff_ms)
                                        * (std::int64_t{1} << std::min<std::size_t>(attempt - 1, 16)));
        }
        auto res = client.Post(path_, headers, body, "application/json");
        if (!res) {
            last_error = httplib::to_string(res.error());
            last_was_transport = true;
            continue;
        }
        if (res->status == 429 || res->status >= 500) {
            last_error = "HTTP status " + std::to_string(res->status);
            last_was_transport = false;
            continue;
        }
        if (res->status != 200) {
            throw ProtocolError("embedding service answered HTTP " + std::to_string(res->status));
        }

        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(res->body);
        } catch (const nlohmann::json::parse_error& e) {
            throw ProtocolError(std::string("malformed embedding response: ") + e.what());
        }
        if (!doc.is_object() || !doc.contains("embeddings") || !doc["embeddings"].is_array()) {
            throw ProtocolError("embedding response lacks an \"embeddings\" array");
        }
        const auto& rows = doc["embeddings"];
        if (rows.size() != texts.size()) {
            throw ProtocolError("embedding response has " + std::to_string(rows.size()) + " vectors for " +
                                std::to_string(texts.size()) + " texts");
        }
        std::vector<EmbeddingVector> out;
        out.reserve(rows.size());
        for (const auto& row : rows) {
            if (!row.is_array() || row.size() != dim_) {
                throw ProtocolError("embedding has wrong length (expected " + std::to_string(dim_) + ")");
            }
            std::vector<double> values;
            values.reserve(dim_);
            for (const auto& x : row) {
                if (!x.is_number() || !std::isfinite(x.get<double>())) {
                    throw ProtocolError("embedding contains a non-finite or non-numeric value");
                }
                values.push_back(x.get<double>());
            }
            out.emplace_back(std::move(values));
        }
        return out;
    }
    const std::string msg = "embedding request to " + host_ + path_ + " failed after " +
                            std::to_string(endpoint_.max_retries + 1) + " attempts: " + last_error;
    if (last_was_transport) {
        throw TransportError(msg);
    }
    throw ProtocolError(msg);
}

}  // namespace diga
