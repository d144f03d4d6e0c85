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

#include "diga/cache.h"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iostream>
#include <iterator>
#include <mutex>

#include "diga/error.h"
#include "diga/rng.h"

namespace diga {

namespace {

constexpr char kMagic[8] = {'D', 'I', 'G', 'A', 'E', 'M', 'B', '\0'};

template <typename T>
void
put_le(std::string& out, T value) {
    static_assert(std::is_unsigned_v<T>);
    for (std::size_t i = 0; i < sizeof(T); ++i) {
        out.push_back(static_cast<char>((value >> (8 * i)) & 0xFF));
    }
}

class Reader {
public:
    explicit Reader(const std::string& data) : data_(data) {
    }

    template <typename T>
    bool
    get(T& value) {
        if (pos_ + sizeof(T) > data_.size()) {
            return false;
        }
        value = 0;
        for (std::size_t i = 0; i < sizeof(T); ++i) {
            value |= static_cast<T>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
        }
        pos_ += sizeof(T);
        return true;
    }

    bool
    bytes(std::size_t n, std::string& out) {
        if (pos_ + n > data_.size()) {
            return false;
        }
        out.assign(data_, pos_, n);
        pos_ += n;
        return true;
    }

    bool
    done() const {
        return pos_ == data_.size();
    }

private:
    const std::string& data_;
    std::size_t pos_ = 0;
};

}  // namespace

EmbeddingCache::EmbeddingCache(std::filesystem::path path) : path_(std::move(path)) {
    if (std::filesystem::exists(*path_) && !load()) {
        std::cerr << "warning: embedding cache " << path_->string() << " is corrupt; rebuilding from empty\n";
        entries_.clear();
        recovered_ = true;
    }
}

bool
EmbeddingCache::load() {
    std::ifstream in(*path_, std::ios::binary);
    if (!in) {
        return false;
    }
    std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    Reader r(data);
    std::string magic;
    std::uint32_t version = 0;
    std::uint64_t count = 0;
    if (!r.bytes(sizeof(kMagic), magic) || std::memcmp(magic.data(), kMagic, sizeof(kMagic)) != 0 ||
        !r.get(version) || version != kVersion || !r.get(count)) {
        return false;
    }
    for (std::uint64_t rec = 0; rec < count; ++rec) {
        std::uint32_t fp_len = 0;
        std::string fp;
        std::uint64_t hash = 0;
        std::uint32_t dim = 0;
        if (!r.get(fp_len) || !r.bytes(fp_len, fp) || !r.get(hash) || !r.get(dim) || dim == 0) {
            return false;
        }
        std::vector<double> values(dim);
        for (auto& v : values) {
            std::uint64_t bits = 0;
            if (!r.get(bits)) {
                return false;
            }
            v = std::bit_cast<double>(bits);
            if (!std::isfinite(v)) {
                return false;
            }
        }
        entries_.insert_or_assign({std::move(fp), hash}, EmbeddingVector(std::move(values)));
    }
    return r.done();
}

std::optional<EmbeddingVector>
EmbeddingCache::get(const std::string& fingerprint, std::uint64_t text_hash) const {
    std::shared_lock lock(mutex_);
    auto it = entries_.find({fingerprint, text_hash});
    if (it == entries_.end()) {
        return std::nullopt;
    }
    return it->second;
}

void
EmbeddingCache::put(const std::string& fingerprint, std::uint64_t text_hash, const EmbeddingVector& v) {
    std::unique_lock lock(mutex_);
    entries_.insert_or_assign({fingerprint, text_hash}, v);
}

std::size_t
EmbeddingCache::size() const {
    std::shared_lock lock(mutex_);
    return entries_.size();
}

void
EmbeddingCache::flush() const {
    if (!path_) {
        return;
    }
    std::string out(kMagic, sizeof(kMagic));
    {
        std::shared_lock lock(mutex_);
        put_le(out, kVersion);
        put_le(out, static_cast<std::uint64_t>(entries_.size()));
        for (const auto& [key, vec] : entries_) {
            put_le(out, static_cast<std::uint32_t>(key.first.size()));
            out += key.first;
            put_le(out, key.second);
            put_le(out, static_cast<std::uint32_t>(vec.dim()));
            for (double v : vec.values()) {
                put_le(out, std::bit_cast<std::uint64_t>(v));
            }
        }
    }
    auto tmp = *path_;
    tmp += ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) {
            throw IoError("cannot write embedding cache " + tmp.string());
        }
        f.write(out.data(), static_cast<std::streamsize>(out.size()));
        if (!f) {
            throw IoError("short write to " + tmp.string());
        }
    }
    std::filesystem::rename(tmp, *path_);
}

std::vector<EmbeddingVector>
CachedEmbedder::embed(const Vocabulary& vocab, std::span<const TokenSeq> batch) {
    const std::string fp = inner_.fingerprint();
    std::vector<EmbeddingVector> out(batch.size());
    std::vector<std::size_t> missing;
    std::vector<std::uint64_t> hashes(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i) {
        hashes[i] = fnv1a64(detokenize(batch[i], vocab));
        if (auto hit = cache_.get(fp, hashes[i])) {
            out[i] = std::move(*hit);
        } else {
            missing.push_back(i);
        }
    }
    if (missing.empty()) {
        return out;
    }
    std::vector<TokenSeq> todo;
    todo.reserve(missing.size());
    for (std::size_t i : missing) {
        todo.push_back(batch[i]);
    }
    auto fresh = inner_.embed(vocab, todo);
    for (std::size_t j = 0; j < missing.size(); ++j) {
        cache_.put(fp, hashes[missing[j]], fresh[j]);
        out[missing[j]] = std::move(fresh[j]);
    }
    return out;
}

}  // namespace diga
