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
#include <vector>

#include "diga/corpus.h"

namespace diga {

/// Topical toy corpus. Each topic owns a private vocabulary; a shared
/// vocabulary is mixed into every topic at `shared_fraction`.
///
/// Queries draw topic words from a Zipf law with exponent `query_zipf`,
/// passages from a flatter law with `passage_zipf`, so queries concentrate
/// on a few salient words while passages spread over the whole topic.
struct SyntheticDatasetSpec {
    std::size_t topics = 5;
    std::size_t passages_per_topic = 200;
    std::size_t queries_per_topic = 40;
    std::size_t topic_vocabulary = 120;
    std::size_t shared_vocabulary = 60;
    std::size_t passage_length = 48;
    std::size_t query_length = 10;
    double shared_fraction = 0.1;
    double query_zipf = 1.2;
    double passage_zipf = 0.3;
    std::uint64_t seed = 0;

    void
    validate() const;
};

struct SyntheticDataset {
    std::vector<Document> corpus;
    std::vector<Document> train_queries;
    std::vector<Document> test_queries;
    /// Topic of each corpus document, train query and test query.
    std::vector<std::size_t> corpus_topics;
    std::vector<std::size_t> train_topics;
    std::vector<std::size_t> test_topics;
};

/// Deterministic in spec.seed. Within each topic the queries are shuffled
/// and split in half; the first half is for training.
SyntheticDataset
generate_synthetic(const SyntheticDatasetSpec& spec);

struct SyntheticPaths {
    std::filesystem::path corpus;
    std::filesystem::path train_queries;
    std::filesystem::path test_queries;

    /// corpus.jsonl, queries_train.jsonl and queries_test.jsonl under dir.
    static SyntheticPaths
    in(const std::filesystem::path& dir);
};

/// Throws ValidationError when two outputs resolve to the same file.
void
write_synthetic(const SyntheticDataset& data, const SyntheticPaths& paths);

}  // namespace diga
