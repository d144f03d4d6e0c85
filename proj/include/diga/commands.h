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

#include <filesystem>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "diga/attack.h"
#include "diga/config.h"
#include "diga/eval.h"
#include "diga/synth.h"

namespace diga {

/// File names inside a run directory.
namespace run_files {
inline constexpr const char* kConfig = "config.json";
inline constexpr const char* kClusters = "clusters.jsonl";
inline constexpr const char* kPassages = "passages.jsonl";
inline constexpr const char* kTraces = "traces.jsonl";
inline constexpr const char* kManifest = "manifest.json";
inline constexpr const char* kStatus = "run.json";
inline constexpr const char* kReport = "report.json";
inline constexpr const char* kHits = "hits.csv";
inline constexpr const char* kCache = "embeddings.cache";
inline constexpr const char* kLock = ".lock";
inline constexpr const char* kCheckpoints = "checkpoints";
}  // namespace run_files

/// Exclusive lock on a run directory, held through a file created with
/// O_EXCL. A stale lock left by a crashed process must be removed by hand.
class RunLock {
public:
    explicit RunLock(const std::filesystem::path& run_dir);
    ~RunLock();

    RunLock(const RunLock&) = delete;
    RunLock&
    operator=(const RunLock&) = delete;

private:
    std::filesystem::path path_;
};

void
cmd_synth(const SyntheticDatasetSpec& spec, const SyntheticPaths& paths, std::ostream& log);

/// Runs the attack into cfg.out. An interrupted run leaves run.json with
/// status "partial"; rerunning with the same config resumes from the
/// per-cluster checkpoints, any other config starts over.
AttackResult
cmd_attack(const RunConfig& cfg, std::ostream& log);

/// Evaluates the passages in cfg.out against the test queries and writes
/// report.json and hits.csv there.
AttackReport
cmd_evaluate(const RunConfig& cfg, std::ostream& log);

struct TransferInput {
    std::string label;
    std::filesystem::path in_domain;
    std::vector<std::filesystem::path> cross;
};

struct TransferRow {
    std::string label;
    double in_domain = 0.0;
    std::vector<double> cross;
    /// Empty when the in-domain ASR is 0.
    std::optional<double> score;
};

struct TransferTable {
    std::string retriever;
    std::size_t k = 0;
    std::vector<TransferRow> rows;

    nlohmann::json
    to_json() const;

    /// Undefined scores render as "undefined".
    std::string
    render() const;
};

TransferRow
transfer_row(std::string label, double in_domain, std::vector<double> cross);

/// Reads the ASR@k of `retriever` from every report. An empty retriever
/// name picks the first retriever of each in-domain report.
TransferTable
cmd_transfer(std::span<const TransferInput> inputs, const std::string& retriever, std::size_t k);

/// Fixed-width table of a report, one row per retriever.
std::string
render_report(const AttackReport& report);

}  // namespace diga
