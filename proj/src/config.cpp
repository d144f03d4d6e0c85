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

#include "diga/config.h"

#include <fstream>
#include <set>
#include <sstream>

#include "diga/error.h"

namespace diga {

namespace {

using nlohmann::json;

void
reject_unknown(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
    if (!obj.is_object()) {
        throw ValidationError(where + " must be an object");
    }
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, _] : obj.items()) {
        if (ok.count(key) == 0) {
            throw ValidationError("unknown key '" + key + "' in " + where);
        }
    }
}

template <typename T>
void
read(const json& obj, const char* key, T& into, const std::string& where) {
    auto it = obj.find(key);
    if (it == obj.end()) {
        return;
    }
    try {
        into = it->template get<T>();
    } catch (const json::exception&) {
        throw ValidationError(where + "." + key + " has the wrong type");
    }
}

void
read_path(const json& obj, const char* key, std::filesystem::path& into, const std::string& where) {
    std::string s;
    bool present = obj.contains(key);
    read(obj, key, s, where);
    if (present) {
        into = s;
    }
}

json
ga_to_json(const GaParams& p) {
    return {{"population", p.population_size},
            {"generations", p.max_generations},
            {"elitism", p.elitism_rate},
            {"crossover", p.crossover_rate},
            {"temperature", p.temperature},
            {"baseline_mutation", p.baseline_mutation_rate},
            {"selection_temperature", p.selection_temperature}};
}

void
ga_from_json(const json& obj, GaParams& p, const std::string& where) {
    reject_unknown(obj,
                   {"population", "generations", "elitism", "crossover", "temperature", "baseline_mutation",
                    "selection_temperature"},
                   where);
    read(obj, "population", p.population_size, where);
    read(obj, "generations", p.max_generations, where);
    read(obj, "elitism", p.elitism_rate, where);
    read(obj, "crossover", p.crossover_rate, where);
    read(obj, "temperature", p.temperature, where);
    read(obj, "baseline_mutation", p.baseline_mutation_rate, where);
    read(obj, "selection_temperature", p.selection_temperature, where);
}

const char*
kind_name(RetrieverKind k) {
    return k == RetrieverKind::dense ? "dense" : "bm25";
}

const char*
similarity_name(Similarity s) {
    return s == Similarity::dot ? "dot" : "cosine";
}

}  // namespace

void
RunConfig::validate() const {
    if (workers < 1) {
        throw ValidationError("workers must be at least 1");
    }
    embedder.validate();
    attack_params().validate();
    if (k_list.empty()) {
        throw ValidationError("evaluation needs at least one k");
    }
    for (std::size_t k : k_list) {
        if (k < 1) {
            throw ValidationError("every k must be at least 1");
        }
    }
    std::set<std::string> names;
    for (const auto& r : retrievers) {
        if (r.name.empty()) {
            throw ValidationError("retriever names must be non-empty");
        }
        if (!names.insert(r.name).second) {
            throw ValidationError("duplicate retriever name '" + r.name + "'");
        }
        if (r.kind == RetrieverKind::bm25 && (!(r.bm25_k1 >= 0.0) || !(r.bm25_b >= 0.0 && r.bm25_b <= 1.0))) {
            throw ValidationError("retriever '" + r.name + "' needs k1 >= 0 and b in [0, 1]");
        }
    }
}

void
RunConfig::require_inputs(bool train, bool test) const {
    auto check = [](const std::filesystem::path& p, const char* what) {
        if (p.empty()) {
            throw ValidationError(std::string("no ") + what + " path configured");
        }
        if (!std::filesystem::is_regular_file(p)) {
            throw ValidationError(std::string(what) + " file not found: " + p.string());
        }
    };
    check(corpus, "corpus");
    if (train) {
        check(train_queries, "train query");
    }
    if (test) {
        check(test_queries, "test query");
    }
    if (out.empty()) {
        throw ValidationError("no output directory configured");
    }
}

AttackParams
RunConfig::attack_params() const {
    AttackParams p = attack;
    p.seed = seed;
    p.kmeans.workers = workers;
    return p;
}

nlohmann::json
RunConfig::to_json() const {
    json emb = {{"kind", embedder.kind == EmbedderKind::reference ? "reference" : "remote"},
                {"dim", embedder.dim},
                {"seed", embedder.seed}};
    if (embedder.kind == EmbedderKind::remote) {
        const auto& e = embedder.endpoint;
        emb["endpoint"] = {{"url", e.url},
                           {"timeout_ms", e.timeout_ms},
                           {"max_in_flight", e.max_in_flight},
                           {"batch_size", e.batch_size},
                           {"max_retries", e.max_retries},
                           {"initial_backoff_ms", e.initial_backoff_ms}};
    }
    json rs = json::array();
    for (const auto& r : retrievers) {
        json j = {{"name", r.name}, {"kind", kind_name(r.kind)}};
        if (r.kind == RetrieverKind::dense) {
            j["similarity"] = similarity_name(r.similarity);
        } else {
            j["k1"] = r.bm25_k1;
            j["b"] = r.bm25_b;
        }
        rs.push_back(j);
    }
    return {{"corpus", corpus.string()},
            {"train_queries", train_queries.string()},
            {"test_queries", test_queries.string()},
            {"out", out.string()},
            {"seed", seed},
            {"workers", workers},
            {"embedder", emb},
            {"attack",
             {{"passages", attack.num_passages},
              {"length", attack.length},
              {"beta", attack.beta},
              {"kmeans_iterations", attack.kmeans.max_iterations}}},
            {"diga", ga_to_json(attack.diga)},
            {"vanilla", ga_to_json(attack.vanilla)},
            {"evaluation", {{"k", k_list}, {"retrievers", rs}}}};
}

RunConfig
RunConfig::from_json(const json& doc, RunConfig cfg) {
    reject_unknown(doc,
                   {"corpus", "train_queries", "test_queries", "out", "seed", "workers", "embedder", "attack", "diga",
                    "vanilla", "evaluation"},
                   "config");
    read_path(doc, "corpus", cfg.corpus, "config");
    read_path(doc, "train_queries", cfg.train_queries, "config");
    read_path(doc, "test_queries", cfg.test_queries, "config");
    read_path(doc, "out", cfg.out, "config");
    read(doc, "seed", cfg.seed, "config");
    read(doc, "workers", cfg.workers, "config");

    if (auto it = doc.find("embedder"); it != doc.end()) {
        reject_unknown(*it, {"kind", "dim", "seed", "endpoint"}, "embedder");
        std::string kind;
        read(*it, "kind", kind, "embedder");
        if (kind == "reference") {
            cfg.embedder.kind = EmbedderKind::reference;
        } else if (kind == "remote") {
            cfg.embedder.kind = EmbedderKind::remote;
        } else if (!kind.empty()) {
            throw ValidationError("embedder.kind must be 'reference' or 'remote'");
        }
        read(*it, "dim", cfg.embedder.dim, "embedder");
        read(*it, "seed", cfg.embedder.seed, "embedder");
        if (auto ep = it->find("endpoint"); ep != it->end()) {
            reject_unknown(*ep,
                           {"url", "timeout_ms", "max_in_flight", "batch_size", "max_retries", "initial_backoff_ms"},
                           "embedder.endpoint");
            auto& e = cfg.embedder.endpoint;
            read(*ep, "url", e.url, "embedder.endpoint");
            read(*ep, "timeout_ms", e.timeout_ms, "embedder.endpoint");
            read(*ep, "max_in_flight", e.max_in_flight, "embedder.endpoint");
            read(*ep, "batch_size", e.batch_size, "embedder.endpoint");
            read(*ep, "max_retries", e.max_retries, "embedder.endpoint");
            read(*ep, "initial_backoff_ms", e.initial_backoff_ms, "embedder.endpoint");
        }
    }
    if (auto it = doc.find("attack"); it != doc.end()) {
        reject_unknown(*it, {"passages", "length", "beta", "kmeans_iterations"}, "attack");
        read(*it, "passages", cfg.attack.num_passages, "attack");
        read(*it, "length", cfg.attack.length, "attack");
        read(*it, "beta", cfg.attack.beta, "attack");
        read(*it, "kmeans_iterations", cfg.attack.kmeans.max_iterations, "attack");
    }
    if (auto it = doc.find("diga"); it != doc.end()) {
        ga_from_json(*it, cfg.attack.diga, "diga");
    }
    if (auto it = doc.find("vanilla"); it != doc.end()) {
        ga_from_json(*it, cfg.attack.vanilla, "vanilla");
    }
    if (auto it = doc.find("evaluation"); it != doc.end()) {
        reject_unknown(*it, {"k", "retrievers"}, "evaluation");
        read(*it, "k", cfg.k_list, "evaluation");
        if (auto rs = it->find("retrievers"); rs != it->end()) {
            if (!rs->is_array()) {
                throw ValidationError("evaluation.retrievers must be an array");
            }
            cfg.retrievers.clear();
            for (const auto& r : *rs) {
                reject_unknown(r, {"name", "kind", "similarity", "k1", "b"}, "retriever");
                RetrieverConfig rc;
                std::string kind = "dense";
                std::string sim = "dot";
                read(r, "name", rc.name, "retriever");
                read(r, "kind", kind, "retriever");
                read(r, "similarity", sim, "retriever");
                read(r, "k1", rc.bm25_k1, "retriever");
                read(r, "b", rc.bm25_b, "retriever");
                if (kind == "dense") {
                    rc.kind = RetrieverKind::dense;
                } else if (kind == "bm25") {
                    rc.kind = RetrieverKind::bm25;
                } else {
                    throw ValidationError("retriever kind must be 'dense' or 'bm25'");
                }
                if (sim == "dot") {
                    rc.similarity = Similarity::dot;
                } else if (sim == "cosine") {
                    rc.similarity = Similarity::cosine;
                } else {
                    throw ValidationError("retriever similarity must be 'dot' or 'cosine'");
                }
                cfg.retrievers.push_back(std::move(rc));
            }
        }
    }
    return cfg;
}

RunConfig
RunConfig::from_json(const json& doc) {
    return from_json(doc, RunConfig{});
}

RunConfig
RunConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ValidationError("cannot read config " + path.string());
    }
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError("config " + path.string() + ": " + e.what(), 0);
    }
    RunConfig cfg = from_json(doc);
    const auto base = path.parent_path();
    for (auto* p : {&cfg.corpus, &cfg.train_queries, &cfg.test_queries, &cfg.out}) {
        if (!p->empty() && p->is_relative()) {
            *p = base / *p;
        }
    }
    return cfg;
}

std::vector<std::size_t>
parse_k_list(const std::string& text) {
    std::vector<std::size_t> out;
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, ',')) {
        std::size_t used = 0;
        unsigned long long v = 0;
        try {
            v = std::stoull(part, &used);
        } catch (const std::exception&) {
            throw ValidationError("bad k list '" + text + "'");
        }
        if (used != part.size() || v == 0) {
            throw ValidationError("bad k list '" + text + "'");
        }
        out.push_back(static_cast<std::size_t>(v));
    }
    if (out.empty()) {
        throw ValidationError("empty k list");
    }
    return out;
}

}  // namespace diga
