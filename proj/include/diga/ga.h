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
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "diga/corpus.h"
#include "diga/embed.h"
#include "diga/rng.h"

namespace diga {

/// Candidate adversarial passage: a repetition-free token sequence with its
/// cached fitness.
struct Individual {
    TokenSeq tokens;
    std::optional<double> fitness;
};

struct GaParams {
    std::size_t population_size = 100;
    std::size_t max_generations = 200;
    double elitism_rate = 0.1;
    double crossover_rate = 0.75;
    /// tau in the replacement probability.
    double temperature = 1.05;
    /// gamma, the baseline mutation rate.
    double baseline_mutation_rate = 0.05;
    /// Softmax temperature for parent selection.
    double selection_temperature = 0.1;
    std::uint64_t rng_seed = 0;

    /// Throws ValidationError naming the first violated bound.
    void
    validate() const;

    /// ceil(N * alpha), at least 1.
    std::size_t
    elite_count() const;
};

enum class InitMode { score_based, uniform };
enum class MutationMode { importance_guided, uniform };
enum class GaMode { diga, vanilla };

struct GaVariant {
    InitMode init;
    MutationMode mutation;

    static GaVariant
    of(GaMode mode) {
        return mode == GaMode::diga ? GaVariant{InitMode::score_based, MutationMode::importance_guided}
                                    : GaVariant{InitMode::uniform, MutationMode::uniform};
    }
};

/// Draws candidate tokens without repeating tokens already in use.
/// Weighted mode samples proportionally to importance, uniform mode picks
/// any candidate with equal probability.
class TokenSampler {
public:
    TokenSampler(const ImportanceTable& table, bool weighted);

    /// A candidate not present in either exclusion list, or nullopt when no
    /// such candidate exists.
    std::optional<TokenId>
    draw(RandomStream& rng, std::span<const TokenId> exclude_a, std::span<const TokenId> exclude_b = {}) const;

    /// Candidates with non-zero draw probability outside `exclude`.
    std::size_t
    available(std::span<const TokenId> exclude) const;

private:
    const ImportanceTable* table_;
    bool weighted_;
    std::vector<double> cumulative_;
};

/// Target of the search plus the embedding function. `head` is a fixed
/// prefix embedded in front of every individual (the frozen first stage of a
/// two-stage attack); its tokens are never drawn into individuals.
class FitnessContext {
public:
    FitnessContext(EmbeddingVector target, Embedder& embedder, const Vocabulary& vocab, TokenSeq head = {});

    const EmbeddingVector&
    target() const noexcept {
        return target_;
    }

    Embedder&
    embedder() const noexcept {
        return *embedder_;
    }

    const Vocabulary&
    vocab() const noexcept {
        return *vocab_;
    }

    const TokenSeq&
    head() const noexcept {
        return head_;
    }

    /// head ++ tokens
    TokenSeq
    full_sequence(std::span<const TokenId> tokens) const;

private:
    EmbeddingVector target_;
    Embedder* embedder_;
    const Vocabulary* vocab_;
    TokenSeq head_;
};

/// N repetition-free individuals of length L; tokens in `forbidden` never
/// appear. Throws ComputationError when fewer than L candidates are
/// available.
std::vector<Individual>
init_population(const ImportanceTable& importance, std::size_t n, std::size_t length, InitMode mode,
                RandomStream& rng, std::span<const TokenId> forbidden = {});

/// cos(embed(head ++ tokens), target), cached on the individual.
double
evaluate_fitness(Individual& ind, const FitnessContext& ctx);

/// Evaluates every individual without a cached fitness in one embedder call.
void
evaluate_population(std::span<Individual> pop, const FitnessContext& ctx);

/// Indices of the top `count` individuals: fitness descending, then token
/// sequence ascending, then index ascending.
std::vector<std::size_t>
elite_indices(std::span<const Individual> pop, std::size_t count);

/// Parent sampling with probability softmax(fitness / temperature).
class SelectionWheel {
public:
    SelectionWheel(std::span<const Individual> pop, double temperature);

    std::size_t
    draw(RandomStream& rng) const;

    double
    probability(std::size_t i) const {
        return probs_[i];
    }

private:
    std::vector<double> probs_;
    std::vector<double> cumulative_;
};

struct Selection {
    std::vector<Individual> elites;
    std::vector<std::pair<std::size_t, std::size_t>> parent_pairs;
};

/// Elites plus enough i.i.d. parent pairs for N - |elites| offspring.
Selection
select(std::span<const Individual> pop, const GaParams& params, RandomStream& rng);

/// Swaps tails after `split` (1 <= split < L). A tail token already in the
/// child's head is resampled from `repair`, excluding the child's tokens and
/// `forbidden`.
std::pair<Individual, Individual>
crossover_at(const Individual& p1, const Individual& p2, std::size_t split, const TokenSampler& repair,
             RandomStream& rng, std::span<const TokenId> forbidden = {});

/// With probability crossover_rate swaps tails at a uniform split in
/// [1, L-1]; otherwise returns copies of the parents.
std::pair<Individual, Individual>
crossover(const Individual& p1, const Individual& p2, const GaParams& params, const TokenSampler& repair,
          RandomStream& rng, std::span<const TokenId> forbidden = {});

/// Per-position replacement probability
///   P_i = min((C - s_i) * tau / Z + gamma, 1),  Z = mean_i (C - s_i),
/// with P_i = gamma when Z = 0.
std::vector<double>
replace_probabilities(std::span<const double> scores, double max_score, double temperature, double baseline);

/// Importance-guided mode replaces position i with probability P_i drawing
/// from the importance distribution; uniform mode replaces with probability
/// gamma drawing uniformly over candidates. Replacements never repeat a
/// token of the individual or of `forbidden`; a position with no legal
/// replacement is left unchanged.
Individual
mutate(const Individual& ind, const ImportanceTable& importance, const GaParams& params, RandomStream& rng,
       MutationMode mode, std::span<const TokenId> forbidden = {});

struct GenerationStats {
    std::size_t generation = 0;
    double best_fitness = 0.0;
    double mean_fitness = 0.0;
};

struct GaResult {
    Individual best;
    /// Entry g describes the population after generation g (0 = initial).
    std::vector<GenerationStats> trace;
};

/// The generation loop. Every random draw comes from a stream keyed by
/// (rng_seed, generation, slot), so results are identical for any embedder
/// parallelism.
GaResult
run_ga(const FitnessContext& ctx, const ImportanceTable& importance, const GaParams& params, std::size_t length,
       GaVariant variant);

inline GaResult
run_ga(const FitnessContext& ctx, const ImportanceTable& importance, const GaParams& params, std::size_t length,
       GaMode mode) {
    return run_ga(ctx, importance, params, length, GaVariant::of(mode));
}

}  // namespace diga
