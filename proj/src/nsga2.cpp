#include "idsfs/nsga2.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

namespace idsfs {

void GaConfig::validate() const {
    if (pop_size < 4 || pop_size % 2 != 0)
        throw std::runtime_error("ga: pop_size must be even and at least 4");
    if (!(crossover_rate >= 0.0 && crossover_rate <= 1.0))
        throw std::runtime_error("ga: crossover_rate must be in [0,1]");
    if (!(mutation_rate >= 0.0 && mutation_rate <= 1.0))
        throw std::runtime_error("ga: mutation_rate must be in [0,1]");
    if (tournament_size < 1) throw std::runtime_error("ga: tournament_size must be positive");
}

std::vector<Chromosome> init_population(std::size_t feature_count, const GaConfig& cfg, Rng& rng) {
    if (feature_count < 3) throw std::runtime_error("ga: need at least 3 features");
    std::vector<Chromosome> pop;
    pop.reserve(cfg.pop_size);
    for (std::size_t i = 0; i < cfg.pop_size; ++i) {
        Chromosome ch(feature_count);
        for (auto& bit : ch.bits) bit = rng.bernoulli(0.5) ? 1 : 0;
        pop.push_back(repair(std::move(ch), rng));
    }
    return pop;
}

bool dominates(const ObjectiveVector& a, const ObjectiveVector& b) {
    bool strict = false;
    for (std::size_t i = 0; i < ObjectiveVector::kComponents; ++i) {
        if (a[i] < b[i]) return false;
        if (a[i] > b[i]) strict = true;
    }
    return strict;
}

std::vector<std::vector<std::size_t>> fast_nondominated_sort(std::vector<ScoredIndividual>& pop) {
    const std::size_t n = pop.size();
    std::vector<std::vector<std::size_t>> dominated(n);
    std::vector<std::size_t> dom_count(n, 0);
    std::vector<std::vector<std::size_t>> fronts(1);

    for (std::size_t x = 0; x < n; ++x) {
        for (std::size_t y = 0; y < n; ++y) {
            if (x == y) continue;
            if (dominates(pop[x].objectives, pop[y].objectives))
                dominated[x].push_back(y);
            else if (dominates(pop[y].objectives, pop[x].objectives))
                ++dom_count[x];
        }
        if (dom_count[x] == 0) {
            pop[x].rank = 1;
            fronts[0].push_back(x);
        }
    }

    std::size_t k = 0;
    while (!fronts[k].empty()) {
        std::vector<std::size_t> next;
        for (std::size_t x : fronts[k]) {
            for (std::size_t y : dominated[x]) {
                if (--dom_count[y] == 0) {
                    pop[y].rank = k + 2;
                    next.push_back(y);
                }
            }
        }
        ++k;
        fronts.push_back(std::move(next));
    }
    fronts.pop_back();  // the empty terminator
    return fronts;
}

void crowding_distance(std::vector<ScoredIndividual>& pop, std::span<const std::size_t> front) {
    constexpr double kInf = std::numeric_limits<double>::infinity();
    for (std::size_t i : front) pop[i].crowding = 0.0;
    if (front.size() <= 2) {
        for (std::size_t i : front) pop[i].crowding = kInf;
        return;
    }
    std::vector<std::size_t> order(front.begin(), front.end());
    for (std::size_t obj = 0; obj < ObjectiveVector::kComponents; ++obj) {
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            const double va = pop[a].objectives[obj], vb = pop[b].objectives[obj];
            return va != vb ? va < vb : a < b;
        });
        const double lo = pop[order.front()].objectives[obj];
        const double hi = pop[order.back()].objectives[obj];
        if (hi <= lo) continue;  // zero range contributes nothing
        pop[order.front()].crowding = kInf;
        pop[order.back()].crowding = kInf;
        for (std::size_t p = 1; p + 1 < order.size(); ++p) {
            if (std::isinf(pop[order[p]].crowding)) continue;
            const double prev = pop[order[p - 1]].objectives[obj];
            const double next = pop[order[p + 1]].objectives[obj];
            pop[order[p]].crowding += (next - prev) / (hi - lo);
        }
    }
}

void crowding_distance(std::vector<ScoredIndividual>& front) {
    std::vector<std::size_t> all(front.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    crowding_distance(front, all);
}

std::weak_ordering crowded_compare(const ScoredIndividual& a, const ScoredIndividual& b) {
    if (a.rank != b.rank) return a.rank < b.rank ? std::weak_ordering::less
                                                 : std::weak_ordering::greater;
    if (a.crowding != b.crowding) return a.crowding > b.crowding ? std::weak_ordering::less
                                                                 : std::weak_ordering::greater;
    return std::weak_ordering::equivalent;
}

std::size_t tournament_select(const std::vector<ScoredIndividual>& pop, Rng& rng,
                              const GaConfig& cfg) {
    std::size_t best = rng.uniform_index(pop.size());
    for (std::size_t t = 1; t < cfg.tournament_size; ++t) {
        const std::size_t challenger = rng.uniform_index(pop.size());
        const auto cmp = crowded_compare(pop[challenger], pop[best]);
        if (cmp == std::weak_ordering::less ||
            (cmp == std::weak_ordering::equivalent && challenger < best))
            best = challenger;
    }
    return best;
}

std::pair<Chromosome, Chromosome> single_point_cross(const Chromosome& p1, const Chromosome& p2,
                                                     std::size_t cut) {
    if (p1.length() != p2.length()) throw std::runtime_error("crossover: length mismatch");
    if (cut < 1 || cut >= p1.length()) throw std::runtime_error("crossover: cut out of range");
    Chromosome c1 = p1, c2 = p2;
    for (std::size_t i = cut; i < p1.length(); ++i) std::swap(c1.bits[i], c2.bits[i]);
    return {std::move(c1), std::move(c2)};
}

std::pair<Chromosome, Chromosome> crossover(const Chromosome& p1, const Chromosome& p2, Rng& rng,
                                            const GaConfig& cfg) {
    std::pair<Chromosome, Chromosome> children{p1, p2};
    if (rng.bernoulli(cfg.crossover_rate)) {
        if (cfg.crossover_kind == GaConfig::Crossover::single_point) {
            children = single_point_cross(p1, p2, 1 + rng.uniform_index(p1.length() - 1));
        } else {
            for (std::size_t i = 0; i < p1.length(); ++i)
                if (rng.bernoulli(0.5)) std::swap(children.first.bits[i], children.second.bits[i]);
        }
    }
    children.first = repair(std::move(children.first), rng);
    children.second = repair(std::move(children.second), rng);
    return children;
}

Chromosome mutate(Chromosome ch, Rng& rng, const GaConfig& cfg) {
    for (auto& bit : ch.bits)
        if (rng.bernoulli(cfg.mutation_rate)) bit ^= 1;
    return repair(std::move(ch), rng);
}

namespace {

void sort_and_crowd(std::vector<ScoredIndividual>& pop) {
    const auto fronts = fast_nondominated_sort(pop);
    for (const auto& front : fronts) crowding_distance(pop, front);
}

}  // namespace

ParetoFront evolve(const MeasureCache& cache, const ObjectiveModel& model, const GaConfig& cfg,
                   const GenerationObserver& observer) {
    cfg.validate();
    Rng rng(derive_seed(cfg.seed, "nsga2"));

    std::vector<ScoredIndividual> pop;
    pop.reserve(cfg.pop_size);
    for (auto& ch : init_population(cache.m, cfg, rng)) {
        ScoredIndividual ind;
        ind.objectives = evaluate(ch, model, cache);
        ind.chromosome = std::move(ch);
        pop.push_back(std::move(ind));
    }
    sort_and_crowd(pop);
    if (observer) observer(0, pop);

    for (std::size_t gen = 1; gen <= cfg.max_generations; ++gen) {
        std::vector<ScoredIndividual> combined = pop;
        combined.reserve(2 * cfg.pop_size);
        while (combined.size() < 2 * cfg.pop_size) {
            const std::size_t i = tournament_select(pop, rng, cfg);
            const std::size_t j = tournament_select(pop, rng, cfg);
            auto [c1, c2] = crossover(pop[i].chromosome, pop[j].chromosome, rng, cfg);
            for (auto* ch : {&c1, &c2}) {
                ScoredIndividual ind;
                ind.chromosome = mutate(std::move(*ch), rng, cfg);
                ind.objectives = evaluate(ind.chromosome, model, cache);
                combined.push_back(std::move(ind));
            }
        }

        const auto fronts = fast_nondominated_sort(combined);
        for (const auto& front : fronts) crowding_distance(combined, front);

        std::vector<ScoredIndividual> next;
        next.reserve(cfg.pop_size);
        for (const auto& front : fronts) {
            if (next.size() + front.size() <= cfg.pop_size) {
                for (std::size_t idx : front) next.push_back(combined[idx]);
            } else {
                std::vector<std::size_t> order(front.begin(), front.end());
                std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                    const auto cmp = crowded_compare(combined[a], combined[b]);
                    return cmp != std::weak_ordering::equivalent
                               ? cmp == std::weak_ordering::less
                               : a < b;
                });
                for (std::size_t idx : order) {
                    if (next.size() == cfg.pop_size) break;
                    next.push_back(combined[idx]);
                }
            }
            if (next.size() == cfg.pop_size) break;
        }
        pop = std::move(next);
        if (observer) observer(gen, pop);
    }

    ParetoFront front;
    front.model_token = model.token;
    front.config = cfg;
    front.dataset_hash = cache.source_hash;
    std::set<std::string> seen;
    for (const auto& ind : pop) {
        if (ind.rank != 1) continue;
        if (seen.insert(ind.chromosome.to_string()).second) front.members.push_back(ind);
    }
    return front;
}

}  // namespace idsfs
