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

#include "diga/synth.h"

#include <algorithm>
#include <cmath>
#include <string>
#include <unordered_set>

#include "diga/error.h"
#include "diga/rng.h"

namespace diga {

namespace {

constexpr const char* kOnsets[] = {"b", "d", "f", "g", "k", "l", "m", "n", "p", "r", "s", "t", "v", "z",
                                   "br", "dr", "gl", "kr", "pl", "st", "th", "sh", "ch", "tr"};
constexpr const char* kVowels[] = {"a", "e", "i", "o", "u", "ai", "ou", "ea"};
constexpr const char* kCodas[] = {"", "", "", "n", "r", "s", "l", "m", "x", "nd"};

template <std::size_t N>
const char*
pick(const char* const (&table)[N], RandomStream& rng) {
    return table[rng.below(N)];
}

std::string
pseudo_word(RandomStream& rng) {
    std::string w;
    const std::size_t syllables = 2 + rng.below(2);
    for (std::size_t s = 0; s < syllables; ++s) {
        w += pick(kOnsets, rng);
        w += pick(kVowels, rng);
    }
    w += pick(kCodas, rng);
    return w;
}

/// Cumulative Zipf weights over ranks 1..n.
std::vector<double>
zipf_cdf(std::size_t n, double exponent) {
    std::vector<double> cdf(n);
    double total = 0.0;
    for (std::size_t r = 0; r < n; ++r) {
        total += 1.0 / std::pow(static_cast<double>(r + 1), exponent);
        cdf[r] = total;
    }
    for (double& c : cdf) {
        c /= total;
    }
    return cdf;
}

std::size_t
draw(const std::vector<double>& cdf, RandomStream& rng) {
    const double u = rng.uniform();
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    return std::min<std::size_t>(static_cast<std::size_t>(it - cdf.begin()), cdf.size() - 1);
}

struct TopicModel {
    const std::vector<std::string>* words;
    const std::vector<std::string>* shared;
    std::vector<double> cdf;
    std::vector<double> shared_cdf;
    double shared_fraction;

    std::string
    word(RandomStream& rng) const {
        if (rng.bernoulli(shared_fraction)) {
            return (*shared)[draw(shared_cdf, rng)];
        }
        return (*words)[draw(cdf, rng)];
    }
};

std::string
passage_text(const TopicModel& model, std::size_t length, RandomStream& rng) {
    std::string text;
    std::size_t in_sentence = 0;
    const std::size_t sentence_len = 8 + rng.below(5);
    for (std::size_t i = 0; i < length; ++i) {
        std::string w = model.word(rng);
        if (in_sentence == 0) {
            w[0] = static_cast<char>(w[0] - 'a' + 'A');
        }
        if (!text.empty()) {
            text += ' ';
        }
        text += w;
        if (++in_sentence == sentence_len || i + 1 == length) {
            text += '.';
            in_sentence = 0;
        }
    }
    return text;
}

std::string
query_text(const TopicModel& model, std::size_t length, RandomStream& rng) {
    std::string text;
    for (std::size_t i = 0; i < length; ++i) {
        if (!text.empty()) {
            text += ' ';
        }
        text += model.word(rng);
    }
    return text + "?";
}

}  // namespace

void
SyntheticDatasetSpec::validate() const {
    if (topics < 1) {
        throw ValidationError("synthetic dataset needs at least one topic");
    }
    if (passages_per_topic < 1 || queries_per_topic < 2) {
        throw ValidationError("need at least one passage and two queries per topic");
    }
    if (topic_vocabulary < 1 || shared_vocabulary < 1) {
        throw ValidationError("vocabulary sizes must be positive");
    }
    if (passage_length < 1 || query_length < 1) {
        throw ValidationError("passage and query lengths must be positive");
    }
    if (!(shared_fraction >= 0.0 && shared_fraction < 1.0)) {
        throw ValidationError("shared fraction must lie in [0, 1)");
    }
    if (!(query_zipf >= 0.0) || !(passage_zipf >= 0.0)) {
        throw ValidationError("Zipf exponents must be non-negative");
    }
}

SyntheticDataset
generate_synthetic(const SyntheticDatasetSpec& spec) {
    spec.validate();
    RandomStream words_rng = RandomStream::keyed(spec.seed, {0x766f6361ULL});
    std::unordered_set<std::string> taken;
    auto fresh = [&] {
        for (;;) {
            std::string w = pseudo_word(words_rng);
            if (taken.insert(w).second) {
                return w;
            }
        }
    };
    std::vector<std::string> shared(spec.shared_vocabulary);
    for (auto& w : shared) {
        w = fresh();
    }
    std::vector<std::vector<std::string>> topic_words(spec.topics, std::vector<std::string>(spec.topic_vocabulary));
    for (auto& ws : topic_words) {
        for (auto& w : ws) {
            w = fresh();
        }
    }

    SyntheticDataset out;
    const auto shared_cdf = zipf_cdf(spec.shared_vocabulary, 1.0);
    for (std::size_t t = 0; t < spec.topics; ++t) {
        TopicModel passages{&topic_words[t], &shared, zipf_cdf(spec.topic_vocabulary, spec.passage_zipf), shared_cdf,
                            spec.shared_fraction};
        TopicModel queries{&topic_words[t], &shared, zipf_cdf(spec.topic_vocabulary, spec.query_zipf), shared_cdf,
                           spec.shared_fraction};
        const std::string prefix = "t" + std::to_string(t);

        RandomStream prng = RandomStream::keyed(spec.seed, {0x70617373ULL, t});
        for (std::size_t i = 0; i < spec.passages_per_topic; ++i) {
            out.corpus.push_back({prefix + "-p" + std::to_string(i), passage_text(passages, spec.passage_length, prng)});
            out.corpus_topics.push_back(t);
        }

        RandomStream qrng = RandomStream::keyed(spec.seed, {0x71756572ULL, t});
        std::vector<Document> qs;
        for (std::size_t i = 0; i < spec.queries_per_topic; ++i) {
            qs.push_back({prefix + "-q" + std::to_string(i), query_text(queries, spec.query_length, qrng)});
        }
        for (std::size_t i = qs.size(); i > 1; --i) {
            std::swap(qs[i - 1], qs[qrng.below(i)]);
        }
        const std::size_t half = qs.size() / 2;
        for (std::size_t i = 0; i < qs.size(); ++i) {
            if (i < half) {
                out.train_queries.push_back(std::move(qs[i]));
                out.train_topics.push_back(t);
            } else {
                out.test_queries.push_back(std::move(qs[i]));
                out.test_topics.push_back(t);
            }
        }
    }
    return out;
}

SyntheticPaths
SyntheticPaths::in(const std::filesystem::path& dir) {
    return {dir / "corpus.jsonl", dir / "queries_train.jsonl", dir / "queries_test.jsonl"};
}

void
write_synthetic(const SyntheticDataset& data, const SyntheticPaths& paths) {
    const std::filesystem::path all[] = {paths.corpus, paths.train_queries, paths.test_queries};
    for (std::size_t i = 0; i < 3; ++i) {
        if (all[i].empty()) {
            throw ValidationError("synthetic output path is empty");
        }
        for (std::size_t j = 0; j < i; ++j) {
            if (std::filesystem::weakly_canonical(all[i]) == std::filesystem::weakly_canonical(all[j])) {
                throw ValidationError("conflicting output paths: " + all[i].string());
            }
        }
    }
    for (const auto& p : all) {
        if (p.has_parent_path()) {
            std::filesystem::create_directories(p.parent_path());
        }
    }
    save_documents(paths.corpus, data.corpus);
    save_documents(paths.train_queries, data.train_queries);
    save_documents(paths.test_queries, data.test_queries);
}

}  // namespace diga
