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

#include <gtest/gtest.h>

#include "diga/config.h"
#include "diga/error.h"
#include "test_util.h"

namespace {

using namespace diga;
using nlohmann::json;

TEST(RunConfigTest, DefaultsAreValid) {
    RunConfig c;
    EXPECT_NO_THROW(c.validate());
    EXPECT_EQ(c.k_list, (std::vector<std::size_t>{5, 20}));
    EXPECT_EQ(c.attack.length, 50u);
    EXPECT_EQ(c.attack.head_length(), 40u);
    ASSERT_EQ(c.retrievers.size(), 2u);
    EXPECT_EQ(c.retrievers[1].kind, RetrieverKind::bm25);
}

TEST(RunConfigTest, JsonRoundTrip) {
    RunConfig c;
    c.corpus = "/data/c.jsonl";
    c.seed = 17;
    c.workers = 3;
    c.attack.length = 20;
    c.attack.beta = 0.5;
    c.attack.diga.population_size = 30;
    c.attack.vanilla.temperature = 2.0;
    c.k_list = {1, 10};
    c.embedder.kind = EmbedderKind::remote;
    c.embedder.endpoint.url = "http://localhost:9000";
    c.embedder.endpoint.auth_token = "secret";
    c.retrievers = {{"cos", RetrieverKind::dense, Similarity::cosine}, {"sparse", RetrieverKind::bm25, {}, 1.2, 0.75}};
    auto j = c.to_json();
    EXPECT_EQ(j.dump().find("secret"), std::string::npos);
    auto back = RunConfig::from_json(j);
    EXPECT_EQ(back.to_json(), j);
    EXPECT_EQ(back.retrievers[0].similarity, Similarity::cosine);
    EXPECT_DOUBLE_EQ(back.retrievers[1].bm25_k1, 1.2);
}

TEST(RunConfigTest, PartialDocumentsKeepDefaults) {
    auto c = RunConfig::from_json(json{{"attack", {{"length", 12}}}, {"diga", {{"generations", 7}}}});
    EXPECT_EQ(c.attack.length, 12u);
    EXPECT_EQ(c.attack.diga.max_generations, 7u);
    EXPECT_EQ(c.attack.vanilla.max_generations, 200u);
    EXPECT_DOUBLE_EQ(c.attack.beta, 0.8);
}

TEST(RunConfigTest, UnknownKeysAndBadValuesAreRejected) {
    EXPECT_THROW(RunConfig::from_json(json{{"sead", 1}}), ValidationError);
    EXPECT_THROW(RunConfig::from_json(json{{"attack", {{"lenght", 1}}}}), ValidationError);
    EXPECT_THROW(RunConfig::from_json(json{{"seed", "x"}}), ValidationError);
    EXPECT_THROW(RunConfig::from_json(json{{"embedder", {{"kind", "magic"}}}}), ValidationError);
    EXPECT_THROW(RunConfig::from_json(json::array()), ValidationError);
    EXPECT_THROW(RunConfig::from_json(json{{"evaluation", {{"retrievers", {{{"name", "x"}, {"kind", "tfidf"}}}}}}}),
                 ValidationError);
}

TEST(RunConfigTest, ValidateChecksBounds) {
    RunConfig c;
    c.workers = 0;
    EXPECT_THROW(c.validate(), ValidationError);
    c = RunConfig{};
    c.attack.beta = 0.0;
    EXPECT_THROW(c.validate(), ValidationError);
    c = RunConfig{};
    c.attack.beta = 1.0;
    EXPECT_NO_THROW(c.validate());
    c = RunConfig{};
    c.attack.length = 1;
    c.attack.beta = 0.5;
    EXPECT_THROW(c.validate(), ValidationError);
    c = RunConfig{};
    c.k_list = {};
    EXPECT_THROW(c.validate(), ValidationError);
    c = RunConfig{};
    c.retrievers.push_back(c.retrievers[0]);
    EXPECT_THROW(c.validate(), ValidationError);
    c = RunConfig{};
    c.embedder.kind = EmbedderKind::remote;
    EXPECT_THROW(c.validate(), ValidationError);
}

TEST(RunConfigTest, AttackParamsCarrySeedAndWorkers) {
    RunConfig c;
    c.seed = 9;
    c.workers = 4;
    auto p = c.attack_params();
    EXPECT_EQ(p.seed, 9u);
    EXPECT_EQ(p.kmeans.workers, 4u);
}

TEST(RunConfigTest, LoadResolvesRelativePaths) {
    diga::testing::TempDir dir;
    diga::testing::write_text(dir / "cfg" / "run.json", R"({"corpus": "data/c.jsonl", "out": "/abs/out"})");
    auto c = RunConfig::load(dir / "cfg" / "run.json");
    EXPECT_EQ(c.corpus, dir / "cfg" / "data" / "c.jsonl");
    EXPECT_EQ(c.out, std::filesystem::path("/abs/out"));
    diga::testing::write_text(dir / "bad.json", "{nope");
    EXPECT_THROW(RunConfig::load(dir / "bad.json"), ParseError);
    EXPECT_THROW(RunConfig::load(dir / "missing.json"), ValidationError);
}

TEST(RunConfigTest, RequireInputs) {
    diga::testing::TempDir dir;
    RunConfig c;
    c.corpus = dir / "c.jsonl";
    c.train_queries = dir / "t.jsonl";
    c.out = dir / "out";
    EXPECT_THROW(c.require_inputs(true, false), ValidationError);
    diga::testing::write_text(c.corpus, "");
    diga::testing::write_text(c.train_queries, "");
    EXPECT_NO_THROW(c.require_inputs(true, false));
    EXPECT_THROW(c.require_inputs(true, true), ValidationError);
}

TEST(ParseKListTest, Examples) {
    EXPECT_EQ(parse_k_list("5,20"), (std::vector<std::size_t>{5, 20}));
    EXPECT_EQ(parse_k_list("1"), (std::vector<std::size_t>{1}));
    EXPECT_THROW(parse_k_list(""), ValidationError);
    EXPECT_THROW(parse_k_list("5,x"), ValidationError);
    EXPECT_THROW(parse_k_list("0"), ValidationError);
    EXPECT_THROW(parse_k_list("5,,20"), ValidationError);
}

}  // namespace
