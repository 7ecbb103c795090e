#include <doctest.h>

#include <cmath>
#include <limits>
#include <set>
#include <vector>

#include "idsfs/nsga2.hpp"
#include "support/oracles.hpp"
#include "support/synthetic.hpp"

using namespace idsfs;

namespace {

std::vector<ScoredIndividual> population_from(const std::vector<ObjectiveVector>& vectors) {
    std::vector<ScoredIndividual> pop(vectors.size());
    for (std::size_t i = 0; i < vectors.size(); ++i) pop[i].objectives = vectors[i];
    return pop;
}

ObjectiveVector vec(double a, double b, double c = 0.0) {
    ObjectiveVector v;
    v.selected_dissimilarity = a;
    v.unselected_coverage = b;
    v.dispersion = c;
    return v;
}

}  // namespace

TEST_CASE("domination requires weak improvement everywhere and strict somewhere") {
    CHECK(dominates(vec(2, 2, 2), vec(1, 1, 1)));
    CHECK(!dominates(vec(2, 1, 1), vec(1, 2, 1)));
    CHECK(!dominates(vec(1, 2, 1), vec(2, 1, 1)));
    CHECK(!dominates(vec(1, 1, 1), vec(1, 1, 1)));
    CHECK(dominates(vec(1, 1, 2), vec(1, 1, 1)));
}

TEST_CASE("non-dominated sorting peels a three-member example as expected") {
    auto pop = population_from({vec(2, 2), vec(1, 1), vec(2, 1)});
    const auto fronts = fast_nondominated_sort(pop);
    REQUIRE(fronts.size() == 3);
    CHECK(fronts[0] == std::vector<std::size_t>{0});
    CHECK(fronts[1] == std::vector<std::size_t>{2});
    CHECK(fronts[2] == std::vector<std::size_t>{1});
    CHECK(pop[0].rank == 1);
    CHECK(pop[2].rank == 2);
    CHECK(pop[1].rank == 3);
}

TEST_CASE("identical vectors share one front") {
    auto pop = population_from({vec(1, 1, 1), vec(1, 1, 1), vec(1, 1, 1)});
    const auto fronts = fast_nondominated_sort(pop);
    REQUIRE(fronts.size() == 1);
    CHECK(fronts[0].size() == 3);
}

TEST_CASE("non-dominated sorting matches the peel-by-definition oracle") {
    Rng rng(101);
    for (int rep = 0; rep < 100; ++rep) {
        const std::size_t n = 1 + rng.uniform_index(20);
        std::vector<ObjectiveVector> vectors(n);
        for (auto& v : vectors) {
            // Coarse grid values force plenty of ties and duplicates.
            v = vec(static_cast<double>(rng.uniform_index(4)),
                    static_cast<double>(rng.uniform_index(4)),
                    static_cast<double>(rng.uniform_index(4)));
        }
        auto pop = population_from(vectors);
        const auto fronts = fast_nondominated_sort(pop);
        const auto expected = oracles::front_peel(vectors);
        REQUIRE(fronts.size() == expected.size());
        for (std::size_t f = 0; f < fronts.size(); ++f) {
            CHECK(std::set<std::size_t>(fronts[f].begin(), fronts[f].end()) ==
                  std::set<std::size_t>(expected[f].begin(), expected[f].end()));
        }
        // Fronts partition the population and ranks agree with front index.
        std::size_t total = 0;
        for (std::size_t f = 0; f < fronts.size(); ++f) {
            total += fronts[f].size();
            for (std::size_t idx : fronts[f]) CHECK(pop[idx].rank == f + 1);
        }
        CHECK(total == n);
    }
}

TEST_CASE("crowding distance marks extremes infinite and sums normalized gaps") {
    auto pop = population_from({vec(1, 3), vec(2, 2), vec(3, 1)});
    const std::vector<std::size_t> front{0, 1, 2};
    crowding_distance(pop, front);
    const double inf = std::numeric_limits<double>::infinity();
    CHECK(pop[0].crowding == inf);
    CHECK(pop[2].crowding == inf);
    CHECK(pop[1].crowding == doctest::Approx(2.0));
}

TEST_CASE("small fronts are entirely infinite") {
    auto pop = population_from({vec(1, 2), vec(2, 1)});
    crowding_distance(pop, std::vector<std::size_t>{0, 1});
    CHECK(std::isinf(pop[0].crowding));
    CHECK(std::isinf(pop[1].crowding));

    auto single = population_from({vec(5, 5)});
    crowding_distance(single, std::vector<std::size_t>{0});
    CHECK(std::isinf(single[0].crowding));
}

TEST_CASE("constant objectives contribute nothing to crowding") {
    // Third objective varies, the first two are constant: interior member
    // crowding comes from the varying objective alone.
    auto pop = population_from({vec(1, 1, 1), vec(1, 1, 2), vec(1, 1, 4)});
    crowding_distance(pop, std::vector<std::size_t>{0, 1, 2});
    CHECK(std::isinf(pop[0].crowding));
    CHECK(std::isinf(pop[2].crowding));
    CHECK(pop[1].crowding == doctest::Approx(1.0));  // (4-1)/(4-1)
}

TEST_CASE("crowded comparison prefers lower rank then larger crowding") {
    ScoredIndividual a, b;
    a.rank = 1;
    a.crowding = 0.0;
    b.rank = 2;
    b.crowding = std::numeric_limits<double>::infinity();
    CHECK(crowded_compare(a, b) == std::weak_ordering::less);

    b.rank = 1;
    CHECK(crowded_compare(a, b) == std::weak_ordering::greater);

    b.crowding = 0.0;
    CHECK(crowded_compare(a, b) == std::weak_ordering::equivalent);
}

TEST_CASE("tournaments return the crowded-comparison winner") {
    auto pop = population_from({vec(1, 1), vec(2, 2)});
    fast_nondominated_sort(pop);
    crowding_distance(pop, std::vector<std::size_t>{0});
    GaConfig cfg;
    Rng rng(3);
    std::size_t wins = 0;
    const std::size_t draws = 10000;
    for (std::size_t i = 0; i < draws; ++i) wins += tournament_select(pop, rng, cfg) == 1;
    // The rank-1 member wins every mixed pairing; under uniform selection
    // with replacement it should be returned about 75% of the time.
    CHECK(wins >= draws * 74 / 100);
    CHECK(wins <= draws * 76 / 100);
}

TEST_CASE("single-point crossover splits at the requested cut") {
    const Chromosome p1 = Chromosome::from_string("1111");
    const Chromosome p2 = Chromosome::from_string("0000");
    const auto [c1, c2] = single_point_cross(p1, p2, 2);
    CHECK(c1.to_string() == "1100");
    CHECK(c2.to_string() == "0011");
}

TEST_CASE("crossover copies parents when the rate is zero") {
    GaConfig cfg;
    cfg.crossover_rate = 0.0;
    Rng rng(5);
    const Chromosome p1 = Chromosome::from_string("110010");
    const Chromosome p2 = Chromosome::from_string("011001");
    const auto [c1, c2] = crossover(p1, p2, rng, cfg);
    CHECK(c1 == p1);
    CHECK(c2 == p2);
}

TEST_CASE("identical parents breed identical children") {
    GaConfig cfg;
    cfg.crossover_rate = 1.0;
    Rng rng(5);
    const Chromosome p = Chromosome::from_string("101010");
    const auto [c1, c2] = crossover(p, p, rng, cfg);
    CHECK(c1 == p);
    CHECK(c2 == p);
}

TEST_CASE("crossover children are always valid masks") {
    GaConfig cfg;
    cfg.crossover_rate = 1.0;
    Rng rng(17);
    const Chromosome p1 = Chromosome::from_string("111000");
    const Chromosome p2 = Chromosome::from_string("000111");
    for (int rep = 0; rep < 50; ++rep) {
        const auto [c1, c2] = crossover(p1, p2, rng, cfg);
        for (const Chromosome* c : {&c1, &c2}) {
            CHECK(c->count_selected() >= 2);
            CHECK(c->count_selected() <= c->length() - 1);
        }
    }
}

TEST_CASE("mutation at rate zero is the identity") {
    GaConfig cfg;
    cfg.mutation_rate = 0.0;
    Rng rng(7);
    const Chromosome ch = Chromosome::from_string("0110");
    CHECK(mutate(ch, rng, cfg) == ch);
}

TEST_CASE("mutation at rate one flips every bit before repair") {
    GaConfig cfg;
    cfg.mutation_rate = 1.0;
    Rng rng(7);
    // The complement is itself valid, so repair leaves it alone.
    CHECK(mutate(Chromosome::from_string("110100"), rng, cfg).to_string() == "001011");
}

TEST_CASE("mean flip count matches the per-bit rate") {
    GaConfig cfg;
    cfg.mutation_rate = 0.0244;
    Rng rng(99);
    Rng base_rng(1234);
    std::size_t flips = 0;
    const std::size_t trials = 10000;
    for (std::size_t t = 0; t < trials; ++t) {
        Chromosome ch(41);
        for (auto& bit : ch.bits) bit = base_rng.bernoulli(0.5);
        ch = repair(std::move(ch), base_rng);
        const Chromosome mutated = mutate(ch, rng, cfg);
        for (std::size_t i = 0; i < ch.length(); ++i) flips += ch.bits[i] != mutated.bits[i];
    }
    const double mean = static_cast<double>(flips) / static_cast<double>(trials);
    CHECK(mean == doctest::Approx(41 * 0.0244).epsilon(0.08));
}

TEST_CASE("initial populations are sized, valid and seed-reproducible") {
    GaConfig cfg;
    cfg.pop_size = 30;
    cfg.seed = 12;
    Rng rng1(cfg.seed), rng2(cfg.seed);
    const auto pop1 = init_population(41, cfg, rng1);
    const auto pop2 = init_population(41, cfg, rng2);
    REQUIRE(pop1.size() == 30);
    CHECK(pop1 == pop2);
    for (const auto& ch : pop1) {
        CHECK(ch.length() == 41);
        CHECK(ch.count_selected() >= 2);
        CHECK(ch.count_selected() <= 40);
    }
}

TEST_CASE("config validation rejects unusable settings") {
    GaConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.pop_size = 7;
    CHECK_THROWS_AS(cfg.validate(), std::runtime_error);
    cfg.pop_size = 2;
    CHECK_THROWS_AS(cfg.validate(), std::runtime_error);
    cfg = GaConfig{};
    cfg.crossover_rate = 1.5;
    CHECK_THROWS_AS(cfg.validate(), std::runtime_error);
    cfg = GaConfig{};
    cfg.mutation_rate = -0.1;
    CHECK_THROWS_AS(cfg.validate(), std::runtime_error);
    cfg = GaConfig{};
    cfg.tournament_size = 0;
    CHECK_THROWS_AS(cfg.validate(), std::runtime_error);
}

namespace {

struct EvolveFixture {
    NumericDataset ds = testsupport::planted_dataset(4, 200);
    NormalizedView norm = normalize_minmax(ds);
    MeasureCache cache = build_cache(ds, norm, kDefaultBins);
    ObjectiveModel model = ObjectiveModel::from_token("model1a");
    GaConfig small_cfg() const {
        GaConfig cfg;
        cfg.pop_size = 24;
        cfg.max_generations = 15;
        cfg.seed = 5;
        return cfg;
    }
};

}  // namespace

TEST_CASE("zero generations return the front of the initial population") {
    EvolveFixture fx;
    GaConfig cfg = fx.small_cfg();
    cfg.max_generations = 0;

    std::size_t observed_generations = 0;
    const ParetoFront front = evolve(fx.cache, fx.model, cfg,
                                     [&](std::size_t gen, const auto& pop) {
                                         CHECK(gen == 0);
                                         CHECK(pop.size() == cfg.pop_size);
                                         ++observed_generations;
                                     });
    CHECK(observed_generations == 1);
    REQUIRE(!front.members.empty());

    // Recompute the same initial population by hand and compare fronts.
    Rng rng(derive_seed(cfg.seed, "nsga2"));
    auto chromosomes = init_population(fx.cache.m, cfg, rng);
    std::vector<ScoredIndividual> pop(chromosomes.size());
    for (std::size_t i = 0; i < pop.size(); ++i) {
        pop[i].chromosome = chromosomes[i];
        pop[i].objectives = evaluate(chromosomes[i], fx.model, fx.cache);
    }
    const auto fronts = fast_nondominated_sort(pop);
    std::set<std::string> expected;
    for (std::size_t idx : fronts[0]) expected.insert(pop[idx].chromosome.to_string());
    std::set<std::string> got;
    for (const auto& m : front.members) got.insert(m.chromosome.to_string());
    CHECK(got == expected);
}

TEST_CASE("evolution is a pure function of the seed") {
    EvolveFixture fx;
    const GaConfig cfg = fx.small_cfg();
    const ParetoFront a = evolve(fx.cache, fx.model, cfg);
    const ParetoFront b = evolve(fx.cache, fx.model, cfg);
    REQUIRE(a.members.size() == b.members.size());
    for (std::size_t i = 0; i < a.members.size(); ++i) {
        CHECK(a.members[i].chromosome == b.members[i].chromosome);
        CHECK(a.members[i].objectives == b.members[i].objectives);
    }

    // A different seed starts from a different population.
    GaConfig other = cfg;
    other.seed = cfg.seed + 1;
    auto initial_pop = [&](const GaConfig& c) {
        std::vector<std::string> bits;
        evolve(fx.cache, fx.model, c, [&](std::size_t gen, const auto& pop) {
            if (gen == 0)
                for (const auto& ind : pop) bits.push_back(ind.chromosome.to_string());
        });
        return bits;
    };
    CHECK(initial_pop(cfg) != initial_pop(other));
}

TEST_CASE("every generation keeps the population size and the front stays non-dominated") {
    EvolveFixture fx;
    const GaConfig cfg = fx.small_cfg();
    std::size_t calls = 0;
    const ParetoFront front = evolve(fx.cache, fx.model, cfg,
                                     [&](std::size_t, const auto& pop) {
                                         CHECK(pop.size() == cfg.pop_size);
                                         ++calls;
                                     });
    CHECK(calls == cfg.max_generations + 1);

    // Mutual non-domination of the returned front.
    for (const auto& a : front.members) {
        for (const auto& b : front.members)
            CHECK(!dominates(a.objectives, b.objectives));
        CHECK(a.rank == 1);
    }

    // Deduplicated by bit pattern.
    std::set<std::string> bits;
    for (const auto& m : front.members) CHECK(bits.insert(m.chromosome.to_string()).second);

    CHECK(front.model_token == fx.model.token);
    CHECK(front.dataset_hash == fx.cache.source_hash);
}

TEST_CASE("later fronts never admit members beaten by the previous front") {
    EvolveFixture fx;
    GaConfig cfg = fx.small_cfg();
    cfg.max_generations = 12;

    std::vector<std::vector<ObjectiveVector>> rank1_history;
    evolve(fx.cache, fx.model, cfg, [&](std::size_t, const auto& pop) {
        std::vector<ObjectiveVector> rank1;
        for (const auto& ind : pop)
            if (ind.rank == 1) rank1.push_back(ind.objectives);
        rank1_history.push_back(std::move(rank1));
    });
    REQUIRE(rank1_history.size() == cfg.max_generations + 1);
    for (std::size_t t = 1; t < rank1_history.size(); ++t) {
        for (const auto& current : rank1_history[t]) {
            for (const auto& previous : rank1_history[t - 1]) {
                CHECK(!dominates(previous, current));
            }
        }
    }
}
