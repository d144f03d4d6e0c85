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

#include "diga/ga.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "diga/error.h"

namespace diga {

namespace {

bool
contains(std::span<const TokenId> seq, TokenId t) {
    return std::find(seq.begin(), seq.end(), t) != seq.end();
}

double
fitness_or_lowest(const Individual& ind) {
    return ind.fitness.value_or(-std::numeric_limits<double>::infinity());
}

Individual
sample_individual(const TokenSampler& sampler, std::size_t length, RandomStream& rng,
                  std::span<const TokenId> forbidden) {
    Individual ind;
    ind.tokens.reserve(length);
    while (ind.tokens.size() < length) {
        auto t = sampler.draw(rng, ind.tokens, forbidden);
        if (!t) {
            throw ComputationError("ran out of candidate tokens while sampling an individual");
        }
        ind.tokens.push_back(*t);
    }
    return ind;
}

void
require_available(const TokenSampler& sampler, std::size_t length, std::span<const TokenId> forbidden) {
    const std::size_t have = sampler.available(forbidden);
    if (have < length) {
        throw ComputationError("need " + std::to_string(length) + " distinct candidate tokens, only " +
                               std::to_string(have) + " available");
    }
}

Individual
mutate_with(const Individual& ind, const ImportanceTable& importance, const GaParams& params, RandomStream& rng,
            MutationMode mode, const TokenSampler& sampler, std::span<const TokenId> forbidden) {
    std::vector<double> probs;
    if (mode == MutationMode::importance_guided) {
        std::vector<double> scores;
        scores.reserve(ind.tokens.size());
        for (TokenId t : ind.tokens) {
            scores.push_back(importance.score(t));
        }
        probs = replace_probabilities(scores, importance.max_score(), params.temperature,
                                      params.baseline_mutation_rate);
    } else {
        probs.assign(ind.tokens.size(), params.baseline_mutation_rate);
    }

    Individual out = ind;
    bool changed = false;
    for (std::size_t i = 0; i < out.tokens.size(); ++i) {
        if (!rng.bernoulli(probs[i])) {
            continue;
        }
        if (auto t = sampler.draw(rng, out.tokens, forbidden)) {
            out.tokens[i] = *t;
            changed = true;
        }
    }
    if (changed) {
        out.fitness.reset();
    }
    return out;
}

GenerationStats
stats_of(std::size_t generation, std::span<const Individual> pop) {
    GenerationStats s;
    s.generation = generation;
    s.best_fitness = -std::numeric_limits<double>::infinity();
    double sum = 0.0;
    for (const auto& ind : pop) {
        s.best_fitness = std::max(s.best_fitness, *ind.fitness);
        sum += *ind.fitness;
    }
    s.mean_fitness = sum / static_cast<double>(pop.size());
    return s;
}

}  // namespace

void
GaParams::validate() const {
    if (population_size < 2) {
        throw ValidationError("population_size must be at least 2");
    }
    if (!(elitism_rate > 0.0 && elitism_rate < 1.0)) {
        throw ValidationError("elitism_rate must lie in (0, 1)");
    }
    if (!(crossover_rate >= 0.0 && crossover_rate <= 1.0)) {
        throw ValidationError("crossover_rate must lie in [0, 1]");
    }
    if (!(baseline_mutation_rate >= 0.0 && baseline_mutation_rate <= 1.0)) {
        throw ValidationError("baseline_mutation_rate must lie in [0, 1]");
    }
    if (!(temperature > 0.0) || !std::isfinite(temperature)) {
        throw ValidationError("temperature must be positive");
    }
    if (!(selection_temperature > 0.0) || !std::isfinite(selection_temperature)) {
        throw ValidationError("selection_temperature must be positive");
    }
}

std::size_t
GaParams::elite_count() const {
    // The epsilon keeps products such as 100 * 0.1 from rounding up.
    auto e = static_cast<std::size_t>(std::ceil(static_cast<double>(population_size) * elitism_rate - 1e-9));
    return std::clamp<std::size_t>(e, 1, population_size);
}

TokenSampler::TokenSampler(const ImportanceTable& table, bool weighted) : table_(&table), weighted_(weighted) {
    if (weighted_) {
        cumulative_.reserve(table.candidates().size());
        double acc = 0.0;
        for (TokenId t : table.candidates()) {
            acc += table.score(t);
            cumulative_.push_back(acc);
        }
    }
}

std::optional<TokenId>
TokenSampler::draw(RandomStream& rng, std::span<const TokenId> exclude_a, std::span<const TokenId> exclude_b) const {
    const auto& cands = table_->candidates();
    auto excluded = [&](TokenId t) { return contains(exclude_a, t) || contains(exclude_b, t); };

    // Rejection is exact for the conditional distribution; the scan below
    // covers the case where exclusions hold most of the mass.
    for (int attempt = 0; attempt < 64; ++attempt) {
        std::size_t idx;
        if (weighted_) {
            const double x = rng.uniform() * cumulative_.back();
            idx = static_cast<std::size_t>(std::upper_bound(cumulative_.begin(), cumulative_.end(), x) -
                                           cumulative_.begin());
            idx = std::min(idx, cands.size() - 1);
        } else {
            idx = rng.below(cands.size());
        }
        if (!excluded(cands[idx])) {
            return cands[idx];
        }
    }

    double total = 0.0;
    std::size_t count = 0;
    for (TokenId t : cands) {
        if (!excluded(t)) {
            total += weighted_ ? table_->score(t) : 1.0;
            ++count;
        }
    }
    if (count == 0) {
        return std::nullopt;
    }
    const double x = rng.uniform() * total;
    double acc = 0.0;
    std::optional<TokenId> last;
    for (TokenId t : cands) {
        if (excluded(t)) {
            continue;
        }
        acc += weighted_ ? table_->score(t) : 1.0;
        last = t;
        if (x < acc) {
            return t;
        }
    }
    return last;
}

std::size_t
TokenSampler::available(std::span<const TokenId> exclude) const {
    std::size_t n = 0;
    for (TokenId t : table_->candidates()) {
        if (!contains(exclude, t)) {
            ++n;
        }
    }
    return n;
}

FitnessContext::FitnessContext(EmbeddingVector target, Embedder& embedder, const Vocabulary& vocab, TokenSeq head)
    : target_(std::move(target)), embedder_(&embedder), vocab_(&vocab), head_(std::move(head)) {
    if (target_.dim() != embedder.dim()) {
        throw ValidationError("fitness target dimension differs from the embedder's");
    }
    if (norm(target_) == 0.0) {
        throw ComputationError("fitness target has zero norm");
    }
}

TokenSeq
FitnessContext::full_sequence(std::span<const TokenId> tokens) const {
    TokenSeq seq;
    seq.reserve(head_.size() + tokens.size());
    seq.insert(seq.end(), head_.begin(), head_.end());
    seq.insert(seq.end(), tokens.begin(), tokens.end());
    return seq;
}

std::vector<Individual>
init_population(const ImportanceTable& importance, std::size_t n, std::size_t length, InitMode mode,
                RandomStream& rng, std::span<const TokenId> forbidden) {
    TokenSampler sampler(importance, mode == InitMode::score_based);
    require_available(sampler, length, forbidden);
    std::vector<Individual> pop;
    pop.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        pop.push_back(sample_individual(sampler, length, rng, forbidden));
    }
    return pop;
}

double
evaluate_fitness(Individual& ind, const FitnessContext& ctx) {
    if (!ind.fitness) {
        auto v = ctx.embedder().embed_one(ctx.vocab(), ctx.full_sequence(ind.tokens));
        ind.fitness = cosine(v, ctx.target());
    }
    return *ind.fitness;
}

void
evaluate_population(std::span<Individual> pop, const FitnessContext& ctx) {
    std::vector<std::size_t> todo;
    std::vector<TokenSeq> batch;
    for (std::size_t i = 0; i < pop.size(); ++i) {
        if (!pop[i].fitness) {
            todo.push_back(i);
            batch.push_back(ctx.full_sequence(pop[i].tokens));
        }
    }
    if (todo.empty()) {
        return;
    }
    auto vectors = ctx.embedder().embed(ctx.vocab(), batch);
    for (std::size_t j = 0; j < todo.size(); ++j) {
        pop[todo[j]].fitness = cosine(vectors[j], ctx.target());
    }
}

std::vector<std::size_t>
elite_indices(std::span<const Individual> pop, std::size_t count) {
    std::vector<std::size_t> idx(pop.size());
    std::iota(idx.begin(), idx.end(), 0);
    count = std::min(count, idx.size());
    std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(count), idx.end(),
                      [&](std::size_t a, std::size_t b) {
                          const double fa = fitness_or_lowest(pop[a]);
                          const double fb = fitness_or_lowest(pop[b]);
                          if (fa != fb) {
                              return fa > fb;
                          }
                          if (pop[a].tokens != pop[b].tokens) {
                              return pop[a].tokens < pop[b].tokens;
                          }
                          return a < b;
                      });
    idx.resize(count);
    return idx;
}

SelectionWheel::SelectionWheel(std::span<const Individual> pop, double temperature) {
    if (pop.empty()) {
        throw ValidationError("selection over an empty population");
    }
    double top = -std::numeric_limits<double>::infinity();
    for (const auto& ind : pop) {
        if (!ind.fitness) {
            throw ValidationError("selection requires evaluated fitness");
        }
        top = std::max(top, *ind.fitness);
    }
    std::vector<double> w(pop.size());
    double total = 0.0;
    for (std::size_t i = 0; i < pop.size(); ++i) {
        w[i] = std::exp((*pop[i].fitness - top) / temperature);
        total += w[i];
    }
    probs_.resize(pop.size());
    cumulative_.resize(pop.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < pop.size(); ++i) {
        probs_[i] = w[i] / total;
        acc += w[i];
        cumulative_[i] = acc;
    }
}

std::size_t
SelectionWheel::draw(RandomStream& rng) const {
    const double x = rng.uniform() * cumulative_.back();
    auto idx = static_cast<std::size_t>(std::upper_bound(cumulative_.begin(), cumulative_.end(), x) -
                                        cumulative_.begin());
    return std::min(idx, cumulative_.size() - 1);
}

Selection
select(std::span<const Individual> pop, const GaParams& params, RandomStream& rng) {
    Selection sel;
    for (std::size_t i : elite_indices(pop, params.elite_count())) {
        sel.elites.push_back(pop[i]);
    }
    SelectionWheel wheel(pop, params.selection_temperature);
    const std::size_t offspring = pop.size() - std::min(pop.size(), sel.elites.size());
    for (std::size_t made = 0; made < offspring; made += 2) {
        std::size_t a = wheel.draw(rng);
        std::size_t b = wheel.draw(rng);
        sel.parent_pairs.emplace_back(a, b);
    }
    return sel;
}

std::pair<Individual, Individual>
crossover_at(const Individual& p1, const Individual& p2, std::size_t split, const TokenSampler& repair,
             RandomStream& rng, std::span<const TokenId> forbidden) {
    const std::size_t len = p1.tokens.size();
    if (p2.tokens.size() != len) {
        throw ValidationError("crossover parents differ in length");
    }
    if (split < 1 || split >= len) {
        throw ValidationError("crossover split must lie in [1, L-1]");
    }
    auto make = [&](const Individual& head, const Individual& tail) {
        Individual child;
        child.tokens.assign(head.tokens.begin(), head.tokens.begin() + static_cast<std::ptrdiff_t>(split));
        child.tokens.insert(child.tokens.end(), tail.tokens.begin() + static_cast<std::ptrdiff_t>(split),
                            tail.tokens.end());
        for (std::size_t j = split; j < len; ++j) {
            std::span<const TokenId> kept(child.tokens.data(), split);
            if (!contains(kept, child.tokens[j])) {
                continue;
            }
            auto t = repair.draw(rng, child.tokens, forbidden);
            if (!t) {
                throw ComputationError("no candidate token left to repair a crossover duplicate");
            }
            child.tokens[j] = *t;
        }
        if (child.tokens == head.tokens) {
            child.fitness = head.fitness;
        } else if (child.tokens == tail.tokens) {
            child.fitness = tail.fitness;
        }
        return child;
    };
    return {make(p1, p2), make(p2, p1)};
}

std::pair<Individual, Individual>
crossover(const Individual& p1, const Individual& p2, const GaParams& params, const TokenSampler& repair,
          RandomStream& rng, std::span<const TokenId> forbidden) {
    const std::size_t len = p1.tokens.size();
    if (len < 2 || !rng.bernoulli(params.crossover_rate)) {
        return {p1, p2};
    }
    const std::size_t split = 1 + static_cast<std::size_t>(rng.below(len - 1));
    return crossover_at(p1, p2, split, repair, rng, forbidden);
}

std::vector<double>
replace_probabilities(std::span<const double> scores, double max_score, double temperature, double baseline) {
    std::vector<double> out(scores.size(), baseline);
    if (scores.empty()) {
        return out;
    }
    double z = 0.0;
    for (double s : scores) {
        z += max_score - s;
    }
    z /= static_cast<double>(scores.size());
    if (z <= 0.0) {
        return out;
    }
    for (std::size_t i = 0; i < scores.size(); ++i) {
        out[i] = std::min((max_score - scores[i]) * temperature / z + baseline, 1.0);
    }
    return out;
}

Individual
mutate(const Individual& ind, const ImportanceTable& importance, const GaParams& params, RandomStream& rng,
       MutationMode mode, std::span<const TokenId> forbidden) {
    TokenSampler sampler(importance, mode == MutationMode::importance_guided);
    return mutate_with(ind, importance, params, rng, mode, sampler, forbidden);
}

GaResult
run_ga(const FitnessContext& ctx, const ImportanceTable& importance, const GaParams& params, std::size_t length,
       GaVariant variant) {
    params.validate();
    if (length == 0) {
        throw ValidationError("passage length must be positive");
    }
    const std::span<const TokenId> forbidden = ctx.head();
    const TokenSampler weighted(importance, true);
    const TokenSampler uniform(importance, false);
    const TokenSampler& init_sampler = variant.init == InitMode::score_based ? weighted : uniform;
    const TokenSampler& mut_sampler = variant.mutation == MutationMode::importance_guided ? weighted : uniform;
    require_available(init_sampler, length, forbidden);

    const std::size_t n = params.population_size;
    std::vector<Individual> pop;
    pop.reserve(n);
    for (std::size_t slot = 0; slot < n; ++slot) {
        auto rng = RandomStream::keyed(params.rng_seed, {0, slot});
        pop.push_back(sample_individual(init_sampler, length, rng, forbidden));
    }
    evaluate_population(pop, ctx);

    GaResult result;
    result.trace.push_back(stats_of(0, pop));
    result.best = pop[elite_indices(pop, 1).front()];

    const std::size_t elites = params.elite_count();
    for (std::size_t g = 1; g <= params.max_generations; ++g) {
        std::vector<Individual> next;
        next.reserve(n);
        for (std::size_t i : elite_indices(pop, elites)) {
            next.push_back(pop[i]);
        }
        const SelectionWheel wheel(pop, params.selection_temperature);
        for (std::size_t slot = 0; next.size() < n; ++slot) {
            auto rng = RandomStream::keyed(params.rng_seed, {g, slot});
            const std::size_t a = wheel.draw(rng);
            const std::size_t b = wheel.draw(rng);
            auto [c1, c2] = crossover(pop[a], pop[b], params, weighted, rng, forbidden);
            next.push_back(mutate_with(c1, importance, params, rng, variant.mutation, mut_sampler, forbidden));
            auto m2 = mutate_with(c2, importance, params, rng, variant.mutation, mut_sampler, forbidden);
            if (next.size() < n) {
                next.push_back(std::move(m2));
            }
        }
        evaluate_population(next, ctx);
        pop = std::move(next);
        result.trace.push_back(stats_of(g, pop));
        const auto& top = pop[elite_indices(pop, 1).front()];
        if (*top.fitness > *result.best.fitness) {
            result.best = top;
        }
    }
    return result;
}

}  // namespace diga
