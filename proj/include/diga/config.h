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
#include <string>
#include <vector>

#include "diga/attack.h"
#include "diga/embed.h"
#include "diga/eval.h"
#include "json.hpp"

namespace diga {

struct RetrieverConfig {
    std::string name;
    RetrieverKind kind = RetrieverKind::dense;
    Similarity similarity = Similarity::dot;
    double bm25_k1 = 0.9;
    double bm25_b = 0.4;
};

/// Everything a run needs. Serialized as a JSON object; unknown keys are
/// rejected so that typos fail loudly.
///
///   {
///     "corpus": "data/corpus.jsonl",
///     "train_queries": "data/queries_train.jsonl",
///     "test_queries": "data/queries_test.jsonl",
///     "out": "runs/nq",
///     "seed": 7,
///     "workers": 4,
///     "embedder": {"kind": "reference", "dim": 256, "seed": 0},
///     "attack": {"passages": 5, "length": 50, "beta": 0.8},
///     "diga": {"population": 100, "generations": 200},
///     "vanilla": {"population": 100, "generations": 200},
///     "evaluation": {"k": [5, 20], "retrievers": [...]}
///   }
struct RunConfig {
    std::filesystem::path corpus;
    std::filesystem::path train_queries;
    std::filesystem::path test_queries;
    std::filesystem::path out;
    std::uint64_t seed = 0;
    std::size_t workers = 1;
    EmbedderSpec embedder;
    AttackParams attack;
    std::vector<std::size_t> k_list{5, 20};
    std::vector<RetrieverConfig> retrievers{{"reference-dense", RetrieverKind::dense},
                                            {"bm25", RetrieverKind::bm25}};

    /// Checks every parameter bound. Does not touch the filesystem.
    void
    validate() const;

    /// Throws ValidationError unless the needed input files exist and an
    /// output directory is set.
    void
    require_inputs(bool train, bool test) const;

    /// The attack parameters with the run seed and worker count applied.
    AttackParams
    attack_params() const;

    /// Never includes the remote auth token.
    nlohmann::json
    to_json() const;

    /// Applies the keys present in `doc` on top of `base`.
    static RunConfig
    from_json(const nlohmann::json& doc, RunConfig base);

    static RunConfig
    from_json(const nlohmann::json& doc);

    /// Relative paths in the file are resolved against its directory.
    static RunConfig
    load(const std::filesystem::path& path);
};

/// "5,20" -> {5, 20}. Throws ValidationError on anything else.
std::vector<std::size_t>
parse_k_list(const std::string& text);

}  // namespace diga
