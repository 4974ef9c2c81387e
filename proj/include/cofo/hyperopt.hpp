#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <tuple>
#include <vector>

#include "cofo/common.hpp"
#include "cofo/rng.hpp"
#include "cofo/timeline.hpp"
#include "cofo/training.hpp"
#include "cofo/window.hpp"

namespace cofo {

/// Cumulative-advantage pair: the new-coauthor rate for a researcher with a
/// positive coauthor history k becomes upsilon * k^tau * rate (and upsilon *
/// rate when k = 0). tau = 0 with upsilon = 1 leaves rates unmodified.
struct HyperParams {
    double tau = 0.0;
    double upsilon = 1.0;
};

/// A closed or left-open interval on the real line.
struct Interval {
    double lo = 0.0;
    double hi = 1.0;
    bool lo_open = false;

    bool contains(double x) const {
        return (lo_open ? x > lo : x >= lo) && x <= hi;
    }
    double sample(Rng& rng) const {
        // Sampling downward from hi makes a left-open interval exact.
        return lo_open ? rng.uniform_open_lo(lo, hi) : rng.uniform(lo, hi);
    }
};

/// Search configuration. The published experiment reports the tuned scale in
/// [0.6, 1.0] and the tuned exponent in (0, 0.4], so by default upsilon draws
/// from scale_bounds and tau from exponent_bounds; swap_bounds restores the
/// opposite assignment for comparison runs.
struct GaConfig {
    int population = 400;      // survivors per generation
    int crossovers = 240;      // children per generation (0.6 * population)
    int mutations = 120;       // mutants per generation (0.3 * population)
    int generations = 500;
    Interval scale_bounds{0.6, 1.0, false};
    Interval exponent_bounds{0.0, 0.4, true};
    double mutation_width = 0.01;  // additive noise from [-width, width]
    bool swap_bounds = false;
    std::uint64_t seed = 0;

    static GaConfig defaults(std::uint64_t seed) {
        GaConfig config;
        config.seed = seed;
        return config;
    }

    Interval tau_bounds() const { return swap_bounds ? scale_bounds : exponent_bounds; }
    Interval upsilon_bounds() const {
        return swap_bounds ? exponent_bounds : scale_bounds;
    }

    void validate() const {
        if (population < 1 || crossovers < 0 || mutations < 0 || generations < 0)
            throw ConfigError("ga: population/crossovers/mutations/generations invalid");
        if (!(scale_bounds.lo < scale_bounds.hi) ||
            !(exponent_bounds.lo < exponent_bounds.hi))
            throw ConfigError("ga: empty search interval");
        if (mutation_width < 0.0) throw ConfigError("ga: negative mutation width");
    }
};

/// The rate modification expressing cumulative advantage of attracting new
/// coauthors. Lives here so both the fitness and the forecaster share it.
inline double modified_zeta(double zeta, long coauthor_history,
                            const HyperParams& hp) {
    if (coauthor_history <= 0) return hp.upsilon * zeta;
    return hp.upsilon * std::pow(static_cast<double>(coauthor_history), hp.tau) * zeta;
}

/// Validation-slice terms grouped by identical (annual pubs, interval,
/// coauthor history, observed new coauthors) tuples: repeated small integers
/// dominate real slices, so each distinct tuple is scored once and weighted.
class FitnessEvaluator {
public:
    FitnessEvaluator(const DatasetSlice& validation, const ZetaMatrix& zeta,
                     const WindowSpec& w) {
        w.validate();
        if (validation.members.empty())
            throw ConfigError("fitness: empty validation slice");
        std::map<std::tuple<int, int, long, long>, long> grouped;
        for (const auto& tl : validation.members) {
            for (int l = w.validation_anchor + 1; l <= w.validation_end; ++l) {
                const int prev_year = w.year(l - 1);
                const int cur_year = w.year(l);
                const int dh = tl.cumulative_pubs(cur_year) -
                               tl.cumulative_pubs(prev_year);
                const long dk = tl.cumulative_coauthors(cur_year) -
                                tl.cumulative_coauthors(prev_year);
                if (dh == 0) {
                    // No publications, so the model predicts no new coauthors.
                    constant_ += static_cast<double>(dk);
                    continue;
                }
                if (dh > w.zeta_rows) {
                    ++skipped_over_cap_;
                    continue;
                }
                const long k_prev = tl.cumulative_coauthors(prev_year);
                ++grouped[{dh, l, k_prev, dk}];
            }
        }
        terms_.reserve(grouped.size());
        for (const auto& [key, count] : grouped) {
            const auto& [dh, l, k_prev, dk] = key;
            terms_.push_back(Term{zeta.rate(dh, l), k_prev, dk, count});
        }
        // Sorting by history lets one pow() serve an entire run of terms; the
        // stable sort pins the summation order across platforms.
        std::stable_sort(terms_.begin(), terms_.end(),
                         [](const Term& a, const Term& b) { return a.k_prev < b.k_prev; });
    }

    /// Sum over researcher-years of |modified rate - observed new coauthors|.
    double operator()(const HyperParams& hp) const {
        double total = constant_;
        long current_history = -1;
        double advantage = 0.0;
        for (const Term& term : terms_) {
            if (term.k_prev != current_history) {
                current_history = term.k_prev;
                advantage = current_history <= 0
                                ? hp.upsilon
                                : hp.upsilon *
                                      std::pow(static_cast<double>(current_history),
                                               hp.tau);
            }
            const double predicted = advantage * term.zeta;
            total += static_cast<double>(term.count) *
                     std::fabs(predicted - static_cast<double>(term.dk));
        }
        return total;
    }

    long skipped_over_cap() const { return skipped_over_cap_; }
    std::size_t distinct_terms() const { return terms_.size(); }

private:
    struct Term {
        double zeta;
        long k_prev;
        long dk;
        long count;
    };
    std::vector<Term> terms_;
    double constant_ = 0.0;
    long skipped_over_cap_ = 0;
};

inline double fitness(const HyperParams& hp, const DatasetSlice& validation,
                      const ZetaMatrix& zeta, const WindowSpec& w) {
    return FitnessEvaluator(validation, zeta, w)(hp);
}

struct GaTracePoint {
    int generation = 0;
    double best_fitness = 0.0;
    HyperParams best;
};

struct GaResult {
    HyperParams best;
    double best_fitness = 0.0;
    std::vector<GaTracePoint> trace;  // generation 0 = initial population
    long skipped_over_cap = 0;
};

/// Real-valued genetic search: uniform initialization, arithmetic crossover
/// with a shared mixing coefficient, additive uniform mutation, and elitist
/// truncation to the population size among the chromosomes inside the search
/// box. Deterministic for a fixed seed: offspring randomness comes from one
/// sequential stream and fitness evaluation is pure.
inline GaResult run_ga(const GaConfig& config, const DatasetSlice& validation,
                       const ZetaMatrix& zeta, const WindowSpec& w) {
    config.validate();
    const FitnessEvaluator evaluate(validation, zeta, w);
    const Interval tau_bounds = config.tau_bounds();
    const Interval upsilon_bounds = config.upsilon_bounds();
    Rng rng(derive_seed(config.seed, "ga"));

    struct Chromosome {
        HyperParams hp;
        double fitness = 0.0;
    };
    std::vector<Chromosome> population(static_cast<std::size_t>(config.population));
    for (auto& c : population) {
        c.hp.tau = tau_bounds.sample(rng);
        c.hp.upsilon = upsilon_bounds.sample(rng);
    }
    parallel_for(population.size(), [&](std::size_t i) {
        population[i].fitness = evaluate(population[i].hp);
    });
    auto by_fitness = [](const Chromosome& a, const Chromosome& b) {
        if (a.fitness != b.fitness) return a.fitness < b.fitness;
        if (a.hp.tau != b.hp.tau) return a.hp.tau < b.hp.tau;
        return a.hp.upsilon < b.hp.upsilon;
    };
    std::sort(population.begin(), population.end(), by_fitness);

    GaResult result;
    result.skipped_over_cap = evaluate.skipped_over_cap();
    result.trace.push_back({0, population.front().fitness, population.front().hp});

    std::vector<Chromosome> offspring;
    for (int gen = 1; gen <= config.generations; ++gen) {
        offspring.clear();
        for (int c = 0; c < config.crossovers; ++c) {
            const Chromosome& p1 = population[rng.below(population.size())];
            const Chromosome& p2 = population[rng.below(population.size())];
            const double r = rng.uniform01();
            Chromosome child;
            child.hp.tau = r * p1.hp.tau + (1.0 - r) * p2.hp.tau;
            child.hp.upsilon = r * p1.hp.upsilon + (1.0 - r) * p2.hp.upsilon;
            offspring.push_back(child);
        }
        for (int m = 0; m < config.mutations; ++m) {
            const Chromosome& base = population[rng.below(population.size())];
            Chromosome mutant;
            mutant.hp.tau = base.hp.tau +
                            rng.uniform(-config.mutation_width, config.mutation_width);
            mutant.hp.upsilon =
                base.hp.upsilon +
                rng.uniform(-config.mutation_width, config.mutation_width);
            offspring.push_back(mutant);
        }
        parallel_for(offspring.size(), [&](std::size_t i) {
            offspring[i].fitness = evaluate(offspring[i].hp);
        });
        // Elitist selection over survivors plus in-bounds offspring.
        for (const Chromosome& child : offspring)
            if (tau_bounds.contains(child.hp.tau) &&
                upsilon_bounds.contains(child.hp.upsilon))
                population.push_back(child);
        std::sort(population.begin(), population.end(), by_fitness);
        population.resize(static_cast<std::size_t>(config.population));
        result.trace.push_back({gen, population.front().fitness, population.front().hp});
    }
    result.best = population.front().hp;
    result.best_fitness = population.front().fitness;
    return result;
}

}  // namespace cofo
