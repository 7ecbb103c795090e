#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "idsfs/objectives.hpp"
#include "idsfs/rng.hpp"

namespace idsfs {

struct ScoredIndividual {
    Chromosome chromosome;
    ObjectiveVector objectives;
    std::size_t rank = 0;      // 1-based front number
    double crowding = 0.0;     // +infinity at front extremes
};

struct GaConfig {
    std::size_t pop_size = 100;
    std::size_t max_generations = 200;
    double crossover_rate = 0.9;
    double mutation_rate = 0.0244;
    std::uint64_t seed = 1;
    std::size_t tournament_size = 2;
    enum class Crossover { single_point, uniform };
    Crossover crossover_kind = Crossover::single_point;

    void validate() const;  // pop_size even and >= 4, rates in [0,1], ...
};

struct ParetoFront {
    std::vector<ScoredIndividual> members;   // all rank 1, deduplicated by bits
    std::string model_token;
    GaConfig config;
    std::uint64_t dataset_hash = 0;
};

std::vector<Chromosome> init_population(std::size_t feature_count, const GaConfig& cfg, Rng& rng);

// a dominates b: no worse in every component, strictly better in at least one
// (all components maximized).
bool dominates(const ObjectiveVector& a, const ObjectiveVector& b);

// Two-pass scheme: domination counts and dominated-sets, then front peeling.
// Assigns 1-based ranks and returns the fronts as index lists.
std::vector<std::vector<std::size_t>> fast_nondominated_sort(std::vector<ScoredIndividual>& pop);

// Per objective: sort the front, give the extremes +infinity, and add the
// normalized neighbour gap to interior members. Zero-range objectives
// contribute nothing.
void crowding_distance(std::vector<ScoredIndividual>& pop, std::span<const std::size_t> front);
void crowding_distance(std::vector<ScoredIndividual>& front);

// less = a precedes b (lower rank, then larger crowding). Exact ties are
// equivalent; callers break them by population index.
std::weak_ordering crowded_compare(const ScoredIndividual& a, const ScoredIndividual& b);

// Draws tournament_size indices uniformly with replacement and returns the
// crowded-comparison winner (ties to the smaller index).
std::size_t tournament_select(const std::vector<ScoredIndividual>& pop, Rng& rng,
                              const GaConfig& cfg);

// Deterministic single-point recombination at `cut` in [1, length-1].
std::pair<Chromosome, Chromosome> single_point_cross(const Chromosome& p1, const Chromosome& p2,
                                                     std::size_t cut);

// With probability crossover_rate recombines, otherwise copies the parents;
// both children are repaired.
std::pair<Chromosome, Chromosome> crossover(const Chromosome& p1, const Chromosome& p2, Rng& rng,
                                            const GaConfig& cfg);

// Independent per-bit flips with probability mutation_rate, then repair.
Chromosome mutate(Chromosome ch, Rng& rng, const GaConfig& cfg);

// Called after each generational replacement (and once for the evaluated
// initial population as generation 0).
using GenerationObserver =
    std::function<void(std::size_t generation, const std::vector<ScoredIndividual>& population)>;

// Algorithm: evaluate and sort the parents, breed pop_size offspring through
// tournament/crossover/mutation, re-sort the combined pool, and refill the
// next generation front-by-front, truncating the last admitted front by
// descending crowding distance. Returns the deduplicated final rank-1 front.
ParetoFront evolve(const MeasureCache& cache, const ObjectiveModel& model, const GaConfig& cfg,
                   const GenerationObserver& observer = {});

}  // namespace idsfs
