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

#include "diga/commands.h"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <memory>
#include <sstream>
#include <unordered_map>

#include "diga/cache.h"
#include "diga/error.h"

namespace diga {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void
write_file(const fs::path& path, const std::string& content) {
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw IoError("cannot write " + tmp.string());
        }
        out << content;
        out.flush();
        if (!out) {
            throw IoError("short write to " + tmp.string());
        }
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        throw IoError("cannot rename " + tmp.string() + ": " + ec.message());
    }
}

json
read_json(const fs::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot read " + path.string());
    }
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError(path.string() + ": " + e.what(), 0);
    }
}

std::vector<json>
read_jsonl(const fs::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot read " + path.string());
    }
    std::vector<json> out;
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        try {
            out.push_back(json::parse(line));
        } catch (const json::parse_error& e) {
            throw ParseError(path.string() + ": " + e.what(), n);
        }
    }
    return out;
}

std::vector<std::string>
surfaces_of(const TokenSeq& tokens, const Vocabulary& vocab) {
    std::vector<std::string> out;
    out.reserve(tokens.size());
    for (TokenId t : tokens) {
        out.emplace_back(vocab.surface(t));
    }
    return out;
}

json
trace_json(const std::vector<GenerationStats>& trace) {
    json out = json::array();
    for (const auto& g : trace) {
        out.push_back({g.generation, g.best_fitness, g.mean_fitness});
    }
    return out;
}

std::vector<GenerationStats>
trace_from(const json& arr) {
    std::vector<GenerationStats> out;
    for (const auto& g : arr) {
        out.push_back({g.at(0).get<std::size_t>(), g.at(1).get<double>(), g.at(2).get<double>()});
    }
    return out;
}

json
passage_record(const AdversarialPassage& p, const Vocabulary& vocab) {
    return {{"id", p.id},
            {"cluster", p.cluster},
            {"tokens", surfaces_of(p.tokens, vocab)},
            {"text", detokenize(p.tokens, vocab)},
            {"final_fitness", p.final_fitness}};
}

/// Maps stored surfaces back to ids; every surface must be in `vocab`.
TokenSeq
tokens_from(const json& surfaces, Vocabulary& vocab, bool grow) {
    TokenSeq out;
    for (const auto& s : surfaces) {
        const auto surface = s.get<std::string>();
        if (grow) {
            out.push_back(vocab.intern(surface));
            continue;
        }
        auto id = vocab.find(surface);
        if (!id) {
            throw ValidationError("stored token '" + surface + "' is not in the corpus vocabulary");
        }
        out.push_back(*id);
    }
    return out;
}

/// Config snapshot without fields that must not affect results.
json
result_relevant(json cfg) {
    cfg.erase("workers");
    cfg.erase("evaluation");
    return cfg;
}

struct RunEmbedder {
    std::unique_ptr<Embedder> inner;
    std::unique_ptr<EmbeddingCache> cache;
    std::unique_ptr<CachedEmbedder> cached;

    Embedder&
    get() {
        return cached ? static_cast<Embedder&>(*cached) : *inner;
    }

    void
    flush() {
        if (cache) {
            cache->flush();
        }
    }
};

/// Remote embedders go through the run's on-disk cache; the reference
/// embedder is cheaper to recompute than to look up.
RunEmbedder
open_embedder(const RunConfig& cfg, std::ostream& log) {
    RunEmbedder e;
    e.inner = make_embedder(cfg.embedder, cfg.workers);
    if (cfg.embedder.kind == EmbedderKind::remote) {
        e.cache = std::make_unique<EmbeddingCache>(cfg.out / run_files::kCache);
        if (e.cache->recovered()) {
            log << "warning: embedding cache was unreadable and has been reset\n";
        }
        e.cached = std::make_unique<CachedEmbedder>(*e.inner, *e.cache);
    }
    return e;
}

/// Frozen-mode query loading; queries with no corpus token are skipped.
std::vector<TokenizedDoc>
load_attack_queries(const fs::path& path, const Vocabulary& vocab, std::ostream& log) {
    std::vector<TokenizedDoc> out;
    std::size_t skipped = 0;
    for (const auto& d : load_documents(path)) {
        TokenizedDoc q{d.id, tokenize(d.text, vocab)};
        if (q.tokens.empty()) {
            ++skipped;
            continue;
        }
        out.push_back(std::move(q));
    }
    if (skipped > 0) {
        log << "warning: skipped " << skipped << " queries with no corpus token\n";
    }
    return out;
}

void
write_status(const fs::path& dir, const std::string& status, const std::string& error = {}) {
    json s = {{"status", status}};
    if (!error.empty()) {
        s["error"] = error;
    }
    write_file(dir / run_files::kStatus, s.dump(2) + "\n");
}

RunConfig
absolute_paths(RunConfig cfg) {
    for (auto* p : {&cfg.corpus, &cfg.train_queries, &cfg.test_queries, &cfg.out}) {
        if (!p->empty()) {
            *p = fs::absolute(*p).lexically_normal();
        }
    }
    return cfg;
}

std::string
format_fixed(double v, int precision) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(precision) << v;
    return out.str();
}

}  // namespace

RunLock::RunLock(const fs::path& run_dir) : path_(run_dir / run_files::kLock) {
    const int fd = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
    if (fd < 0) {
        if (errno == EEXIST) {
            throw IoError("run directory " + run_dir.string() + " is locked by another process (remove " +
                          path_.string() + " if it is stale)");
        }
        throw IoError("cannot create " + path_.string() + ": " + std::strerror(errno));
    }
    const std::string pid = std::to_string(::getpid()) + "\n";
    [[maybe_unused]] auto n = ::write(fd, pid.data(), pid.size());
    ::close(fd);
}

RunLock::~RunLock() {
    std::error_code ec;
    fs::remove(path_, ec);
}

void
cmd_synth(const SyntheticDatasetSpec& spec, const SyntheticPaths& paths, std::ostream& log) {
    spec.validate();
    auto data = generate_synthetic(spec);
    write_synthetic(data, paths);
    log << "wrote " << data.corpus.size() << " passages to " << paths.corpus.string() << "\n"
        << "wrote " << data.train_queries.size() << " train queries to " << paths.train_queries.string() << "\n"
        << "wrote " << data.test_queries.size() << " test queries to " << paths.test_queries.string() << "\n";
}

AttackResult
cmd_attack(const RunConfig& given, std::ostream& log) {
    const RunConfig cfg = absolute_paths(given);
    cfg.validate();
    cfg.require_inputs(true, false);
    const fs::path dir = cfg.out;
    fs::create_directories(dir);
    RunLock lock(dir);

    const json snapshot = cfg.to_json();
    const fs::path ckpt_dir = dir / run_files::kCheckpoints;
    bool resume = false;
    if (fs::exists(dir / run_files::kStatus) && fs::exists(dir / run_files::kConfig)) {
        try {
            resume = read_json(dir / run_files::kStatus).value("status", "") == "partial" &&
                     result_relevant(read_json(dir / run_files::kConfig)) == result_relevant(snapshot);
        } catch (const Error&) {
            resume = false;
        }
    }
    if (!resume) {
        fs::remove_all(ckpt_dir);
    }
    fs::create_directories(ckpt_dir);
    for (const char* stale : {run_files::kClusters, run_files::kPassages, run_files::kTraces, run_files::kManifest,
                              run_files::kReport, run_files::kHits}) {
        fs::remove(dir / stale);
    }
    write_file(dir / run_files::kConfig, snapshot.dump(2) + "\n");
    write_status(dir, "partial");

    try {
        TokenizedCorpus corpus = load_corpus(cfg.corpus);
        if (corpus.size() == 0) {
            throw ComputationError("corpus " + cfg.corpus.string() + " is empty");
        }
        const auto queries = load_attack_queries(cfg.train_queries, corpus.vocabulary(), log);
        auto emb = open_embedder(cfg, log);
        const Vocabulary& vocab = corpus.vocabulary();

        AttackCheckpoint checkpoint;
        checkpoint.load = [&](std::size_t cluster) -> std::optional<AdversarialPassage> {
            const fs::path p = ckpt_dir / ("cluster-" + std::to_string(cluster) + ".json");
            if (!fs::exists(p)) {
                return std::nullopt;
            }
            const json rec = read_json(p);
            Vocabulary& v = corpus.mutable_vocabulary();
            AdversarialPassage out;
            out.id = rec.at("id").get<std::string>();
            out.cluster = rec.at("cluster").get<std::size_t>();
            out.tokens = tokens_from(rec.at("tokens"), v, false);
            out.final_fitness = rec.at("final_fitness").get<double>();
            out.stage1_trace = trace_from(rec.at("stage1"));
            out.stage2_trace = trace_from(rec.at("stage2"));
            log << "cluster " << cluster << ": resumed from checkpoint\n";
            return out;
        };
        checkpoint.save = [&](const AdversarialPassage& p) {
            json rec = passage_record(p, vocab);
            rec["stage1"] = trace_json(p.stage1_trace);
            rec["stage2"] = trace_json(p.stage2_trace);
            write_file(ckpt_dir / ("cluster-" + std::to_string(p.cluster) + ".json"), rec.dump() + "\n");
            emb.flush();
        };

        AttackResult result = run_attack(corpus, queries, cfg.attack_params(), emb.get(), &checkpoint);
        emb.flush();

        std::string clusters;
        for (const auto& c : result.clusters) {
            for (const auto& id : c.member_ids) {
                clusters += json{{"query_id", id}, {"cluster_id", c.cluster_id}}.dump() + "\n";
            }
        }
        std::string passages;
        std::string traces;
        json adversarial = json::array();
        for (const auto& p : result.passages) {
            passages += passage_record(p, vocab).dump() + "\n";
            adversarial.push_back({{"id", p.id}, {"text", detokenize(p.tokens, vocab)}});
            for (int stage = 1; stage <= 2; ++stage) {
                for (const auto& g : stage == 1 ? p.stage1_trace : p.stage2_trace) {
                    traces += json{{"cluster", p.cluster},
                                   {"stage", stage},
                                   {"generation", g.generation},
                                   {"best", g.best_fitness},
                                   {"mean", g.mean_fitness}}
                                  .dump() +
                              "\n";
                }
            }
        }
        json manifest = {{"corpus", cfg.corpus.string()}, {"adversarial", adversarial}};
        write_file(dir / run_files::kClusters, clusters);
        write_file(dir / run_files::kPassages, passages);
        write_file(dir / run_files::kTraces, traces);
        write_file(dir / run_files::kManifest, manifest.dump(2) + "\n");
        write_status(dir, "complete");
        fs::remove_all(ckpt_dir);

        for (const auto& p : result.passages) {
            log << "cluster " << p.cluster << "  queries " << std::setw(4)
                << result.clusters[p.cluster].member_ids.size() << "  " << p.id << "  fitness "
                << format_fixed(p.final_fitness, 4) << "\n";
        }
        return result;
    } catch (const std::exception& e) {
        try {
            write_status(dir, "partial", e.what());
        } catch (...) {
        }
        throw;
    }
}

AttackReport
cmd_evaluate(const RunConfig& given, std::ostream& log) {
    const RunConfig cfg = absolute_paths(given);
    cfg.validate();
    cfg.require_inputs(false, true);
    const fs::path dir = cfg.out;
    const fs::path passages_path = dir / run_files::kPassages;
    if (!fs::is_regular_file(passages_path)) {
        throw ValidationError("run directory " + dir.string() + " has no " + run_files::kPassages +
                              "; run the attack first");
    }
    RunLock lock(dir);

    TokenizedCorpus corpus = load_corpus(cfg.corpus);
    if (corpus.size() == 0) {
        throw ComputationError("corpus " + cfg.corpus.string() + " is empty");
    }
    std::unordered_set<std::string> adversarial;
    std::vector<std::string> adversarial_order;
    std::vector<TokenizedDoc> injected;
    for (const auto& rec : read_jsonl(passages_path)) {
        try {
            TokenizedDoc d{rec.at("id").get<std::string>(),
                           tokens_from(rec.at("tokens"), corpus.mutable_vocabulary(), true)};
            adversarial.insert(d.id);
            adversarial_order.push_back(d.id);
            injected.push_back(std::move(d));
        } catch (const json::exception& e) {
            throw ParseError(passages_path.string() + ": " + e.what(), 0);
        }
    }
    if (injected.empty()) {
        throw ValidationError(passages_path.string() + " holds no passages");
    }
    TokenizedCorpus augmented = corpus;
    for (auto& d : injected) {
        augmented.add(std::move(d));
    }
    auto queries = tokenize_documents(load_documents(cfg.test_queries), augmented.mutable_vocabulary());

    auto emb = open_embedder(cfg, log);
    std::vector<RetrieverSpec> specs;
    for (const auto& r : cfg.retrievers) {
        RetrieverSpec s;
        s.name = r.name;
        s.kind = r.kind;
        s.similarity = r.similarity;
        s.bm25_k1 = r.bm25_k1;
        s.bm25_b = r.bm25_b;
        s.embedder = r.kind == RetrieverKind::dense ? &emb.get() : nullptr;
        specs.push_back(std::move(s));
    }
    AttackReport report = evaluate_attack(augmented, queries, adversarial, specs, cfg.k_list, cfg.workers);
    emb.flush();

    report.metadata["seed"] = cfg.seed;
    report.metadata["embedder"] = emb.get().fingerprint();
    report.metadata["num_test_queries"] = queries.size();
    report.metadata["adversarial_ids"] = adversarial_order;
    report.metadata["passage_length"] = cfg.attack.length;
    report.metadata["beta"] = cfg.attack.beta;

    write_file(dir / run_files::kReport, report.to_json().dump(2) + "\n");
    write_file(dir / run_files::kHits, report.hits_csv());
    log << render_report(report);
    return report;
}

std::string
render_report(const AttackReport& report) {
    std::ostringstream out;
    std::size_t width = 9;
    for (const auto& r : report.retrievers) {
        width = std::max(width, r.name.size());
    }
    out << std::left << std::setw(static_cast<int>(width)) << "retriever";
    for (std::size_t k : report.k_list) {
        out << std::right << std::setw(10) << ("ASR@" + std::to_string(k));
    }
    out << "\n";
    for (const auto& r : report.retrievers) {
        out << std::left << std::setw(static_cast<int>(width)) << r.name;
        for (std::size_t k : report.k_list) {
            out << std::right << std::setw(10) << format_fixed(r.asr.at(k), 1);
        }
        out << "\n";
    }
    return out.str();
}

TransferRow
transfer_row(std::string label, double in_domain, std::vector<double> cross) {
    TransferRow row{std::move(label), in_domain, std::move(cross), std::nullopt};
    if (in_domain != 0.0) {
        row.score = transferability_score(in_domain, row.cross);
    } else if (row.cross.empty()) {
        throw ValidationError("transferability needs at least one cross-dataset ASR");
    }
    return row;
}

TransferTable
cmd_transfer(std::span<const TransferInput> inputs, const std::string& retriever, std::size_t k) {
    if (inputs.empty()) {
        throw ValidationError("transfer needs at least one row");
    }
    if (k == 0) {
        throw ValidationError("k must be positive");
    }
    TransferTable table;
    table.k = k;
    table.retriever = retriever;
    auto asr_of = [&](const fs::path& path) {
        const auto report = AttackReport::from_json(read_json(path));
        if (report.retrievers.empty()) {
            throw ValidationError("report " + path.string() + " has no retrievers");
        }
        if (table.retriever.empty()) {
            table.retriever = report.retrievers.front().name;
        }
        const auto& r = report.retriever(table.retriever);
        auto it = r.asr.find(k);
        if (it == r.asr.end()) {
            throw ValidationError("report " + path.string() + " has no ASR@" + std::to_string(k) + " for '" +
                                  table.retriever + "'");
        }
        return it->second;
    };
    for (const auto& in : inputs) {
        if (in.cross.empty()) {
            throw ValidationError("row '" + in.label + "' has no cross-dataset report");
        }
        const double ii = asr_of(in.in_domain);
        std::vector<double> cross;
        for (const auto& c : in.cross) {
            cross.push_back(asr_of(c));
        }
        table.rows.push_back(transfer_row(in.label, ii, std::move(cross)));
    }
    return table;
}

json
TransferTable::to_json() const {
    json rows_json = json::array();
    for (const auto& r : rows) {
        rows_json.push_back({{"label", r.label},
                             {"in_domain", r.in_domain},
                             {"cross", r.cross},
                             {"score", r.score ? json(*r.score) : json("undefined")}});
    }
    return {{"retriever", retriever}, {"k", k}, {"rows", rows_json}};
}

std::string
TransferTable::render() const {
    std::size_t width = 7;
    std::size_t cols = 0;
    for (const auto& r : rows) {
        width = std::max(width, r.label.size());
        cols = std::max(cols, r.cross.size());
    }
    std::ostringstream out;
    out << std::left << std::setw(static_cast<int>(width)) << "dataset" << std::right << std::setw(10)
        << "in-domain";
    for (std::size_t j = 0; j < cols; ++j) {
        out << std::setw(10) << ("cross-" + std::to_string(j + 1));
    }
    out << std::setw(12) << "transfer" << "\n";
    for (const auto& r : rows) {
        out << std::left << std::setw(static_cast<int>(width)) << r.label << std::right << std::setw(10)
            << format_fixed(r.in_domain, 1);
        for (std::size_t j = 0; j < cols; ++j) {
            out << std::setw(10) << (j < r.cross.size() ? format_fixed(r.cross[j], 1) : std::string("-"));
        }
        out << std::setw(12) << (r.score ? format_fixed(*r.score, 1) : std::string("undefined")) << "\n";
    }
    return out.str();
}

}  // namespace diga
