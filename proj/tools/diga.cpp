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

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "diga/commands.h"
#include "diga/error.h"

namespace {

namespace fs = std::filesystem;

enum ExitCode : int {
    kOk = 0,
    kUsage = 1,
    kValidation = 2,
    kTransport = 3,
    kComputation = 4,
    kIo = 5,
};

struct RunFlags {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::string embedder;
    std::string endpoint;
    std::string k;
    std::optional<std::size_t> passages;
    std::optional<std::size_t> length;
    std::optional<double> beta;
    std::optional<std::size_t> workers;
    std::optional<std::size_t> generations;
    std::optional<std::size_t> population;
    std::string corpus;
    std::string train;
    std::string test;
};

void
add_run_flags(CLI::App* cmd, RunFlags& f) {
    cmd->add_option("--config", f.config, "JSON run configuration");
    cmd->add_option("--seed", f.seed, "Global seed");
    cmd->add_option("--out", f.out, "Run directory");
    cmd->add_option("--embedder", f.embedder, "reference or remote")->check(CLI::IsMember({"reference", "remote"}));
    cmd->add_option("--endpoint", f.endpoint, "Remote embedding service base URL");
    cmd->add_option("--k", f.k, "Comma-separated k list for ASR@k");
    cmd->add_option("--passages", f.passages, "Number of adversarial passages (query clusters)");
    cmd->add_option("--length", f.length, "Adversarial passage length in tokens");
    cmd->add_option("--beta", f.beta, "Fraction of tokens from the importance-guided stage");
    cmd->add_option("--workers", f.workers, "Worker threads");
    cmd->add_option("--generations", f.generations, "Generations per GA stage");
    cmd->add_option("--population", f.population, "Population size per GA stage");
    cmd->add_option("--corpus", f.corpus, "Corpus file (JSONL)");
    cmd->add_option("--train", f.train, "Training query file (JSONL)");
    cmd->add_option("--test", f.test, "Test query file (JSONL)");
}

diga::RunConfig
resolve_config(const RunFlags& f, bool prefer_snapshot) {
    diga::RunConfig cfg;
    if (!f.config.empty()) {
        cfg = diga::RunConfig::load(f.config);
    } else if (prefer_snapshot && !f.out.empty() && fs::exists(fs::path(f.out) / diga::run_files::kConfig)) {
        cfg = diga::RunConfig::load(fs::path(f.out) / diga::run_files::kConfig);
    }
    if (f.seed) {
        cfg.seed = *f.seed;
    }
    if (!f.out.empty()) {
        cfg.out = f.out;
    }
    if (f.embedder == "reference") {
        cfg.embedder.kind = diga::EmbedderKind::reference;
    } else if (f.embedder == "remote") {
        cfg.embedder.kind = diga::EmbedderKind::remote;
    }
    if (!f.endpoint.empty()) {
        cfg.embedder.endpoint.url = f.endpoint;
    }
    if (!f.k.empty()) {
        cfg.k_list = diga::parse_k_list(f.k);
    }
    if (f.passages) {
        cfg.attack.num_passages = *f.passages;
    }
    if (f.length) {
        cfg.attack.length = *f.length;
    }
    if (f.beta) {
        cfg.attack.beta = *f.beta;
    }
    if (f.workers) {
        cfg.workers = *f.workers;
    }
    if (f.generations) {
        cfg.attack.diga.max_generations = *f.generations;
        cfg.attack.vanilla.max_generations = *f.generations;
    }
    if (f.population) {
        cfg.attack.diga.population_size = *f.population;
        cfg.attack.vanilla.population_size = *f.population;
    }
    if (!f.corpus.empty()) {
        cfg.corpus = f.corpus;
    }
    if (!f.train.empty()) {
        cfg.train_queries = f.train;
    }
    if (!f.test.empty()) {
        cfg.test_queries = f.test;
    }
    if (const char* token = std::getenv("DIGA_REMOTE_TOKEN")) {
        cfg.embedder.endpoint.auth_token = token;
    }
    return cfg;
}

/// "label=in.json,cross1.json,cross2.json"
diga::TransferInput
parse_row(const std::string& text) {
    const auto eq = text.find('=');
    if (eq == std::string::npos || eq == 0) {
        throw diga::ValidationError("row '" + text + "' must look like LABEL=IN_DOMAIN,CROSS[,CROSS...]");
    }
    diga::TransferInput in;
    in.label = text.substr(0, eq);
    std::vector<std::string> files;
    std::string rest = text.substr(eq + 1);
    std::size_t start = 0;
    while (start <= rest.size()) {
        const auto comma = rest.find(',', start);
        files.push_back(rest.substr(start, comma == std::string::npos ? std::string::npos : comma - start));
        if (comma == std::string::npos) {
            break;
        }
        start = comma + 1;
    }
    if (files.size() < 2) {
        throw diga::ValidationError("row '" + in.label + "' needs an in-domain report and at least one cross report");
    }
    in.in_domain = files.front();
    in.cross.assign(files.begin() + 1, files.end());
    return in;
}

int
exit_code_for(const std::exception& e) {
    if (dynamic_cast<const diga::ValidationError*>(&e) || dynamic_cast<const diga::ParseError*>(&e) ||
        dynamic_cast<const diga::DuplicateIdError*>(&e)) {
        return kValidation;
    }
    if (dynamic_cast<const diga::TransportError*>(&e) || dynamic_cast<const diga::ProtocolError*>(&e)) {
        return kTransport;
    }
    if (dynamic_cast<const diga::IoError*>(&e) || dynamic_cast<const fs::filesystem_error*>(&e)) {
        return kIo;
    }
    return kComputation;
}

}  // namespace

int
main(int argc, char** argv) {
    CLI::App app{"Corpus poisoning attacks on dense retrievers with an importance-guided genetic algorithm"};
    app.require_subcommand(1);

    diga::SyntheticDatasetSpec synth;
    std::string synth_out = ".";
    std::string synth_corpus;
    std::string synth_train;
    std::string synth_test;
    auto* synth_cmd = app.add_subcommand("synth", "Generate a topical synthetic dataset");
    synth_cmd->add_option("--out", synth_out, "Output directory");
    synth_cmd->add_option("--seed", synth.seed, "Generator seed");
    synth_cmd->add_option("--topics", synth.topics, "Number of topics");
    synth_cmd->add_option("--passages-per-topic", synth.passages_per_topic);
    synth_cmd->add_option("--queries-per-topic", synth.queries_per_topic);
    synth_cmd->add_option("--topic-vocab", synth.topic_vocabulary, "Private words per topic");
    synth_cmd->add_option("--shared-vocab", synth.shared_vocabulary, "Words shared by all topics");
    synth_cmd->add_option("--passage-length", synth.passage_length, "Tokens per passage");
    synth_cmd->add_option("--query-length", synth.query_length, "Tokens per query");
    synth_cmd->add_option("--corpus", synth_corpus, "Corpus output path (overrides --out)");
    synth_cmd->add_option("--train", synth_train, "Train query output path (overrides --out)");
    synth_cmd->add_option("--test", synth_test, "Test query output path (overrides --out)");

    RunFlags attack_flags;
    auto* attack_cmd = app.add_subcommand("attack", "Craft adversarial passages into a run directory");
    add_run_flags(attack_cmd, attack_flags);

    RunFlags eval_flags;
    auto* eval_cmd = app.add_subcommand("evaluate", "Compute ASR@k for the passages of a run directory");
    add_run_flags(eval_cmd, eval_flags);

    std::vector<std::string> rows;
    std::string retriever;
    std::size_t transfer_k = 5;
    std::string transfer_out;
    auto* transfer_cmd = app.add_subcommand("transfer", "Cross-dataset transferability table from reports");
    transfer_cmd->add_option("--row", rows, "LABEL=IN_DOMAIN.json,CROSS.json[,...]; repeatable")->required();
    transfer_cmd->add_option("--retriever", retriever, "Retriever section to read (default: first)");
    transfer_cmd->add_option("--k", transfer_k, "k of the ASR@k to compare");
    transfer_cmd->add_option("--out", transfer_out, "Write the table as JSON to this file");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kOk : kUsage;
    }

    try {
        if (synth_cmd->parsed()) {
            auto paths = diga::SyntheticPaths::in(synth_out);
            if (!synth_corpus.empty()) {
                paths.corpus = synth_corpus;
            }
            if (!synth_train.empty()) {
                paths.train_queries = synth_train;
            }
            if (!synth_test.empty()) {
                paths.test_queries = synth_test;
            }
            diga::cmd_synth(synth, paths, std::cout);
        } else if (attack_cmd->parsed()) {
            diga::cmd_attack(resolve_config(attack_flags, false), std::cout);
        } else if (eval_cmd->parsed()) {
            diga::cmd_evaluate(resolve_config(eval_flags, true), std::cout);
        } else if (transfer_cmd->parsed()) {
            std::vector<diga::TransferInput> inputs;
            for (const auto& r : rows) {
                inputs.push_back(parse_row(r));
            }
            const auto table = diga::cmd_transfer(inputs, retriever, transfer_k);
            std::cout << table.render();
            if (!transfer_out.empty()) {
                std::ofstream out(transfer_out, std::ios::trunc);
                if (!out) {
                    throw diga::IoError("cannot write " + transfer_out);
                }
                out << table.to_json().dump(2) << "\n";
            }
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e);
    }
    return kOk;
}
