#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "idsfs/measures.hpp"
#include "idsfs/rng.hpp"

namespace idsfs {

// Fixed-length bit mask over features: bit 1 selects the feature.
struct Chromosome {
    std::vector<std::uint8_t> bits;

    Chromosome() = default;
    explicit Chromosome(std::size_t length) : bits(length, 0) {}

    std::size_t length() const { return bits.size(); }
    std::size_t count_selected() const;
    std::string to_string() const;
    static Chromosome from_string(std::string_view text);
    bool operator==(const Chromosome&) const = default;
};

struct Decoded {
    std::vector<std::size_t> selected;     // SF: indices with bit 1
    std::vector<std::size_t> unselected;   // NSF: indices with bit 0
};

Decoded decode(const Chromosome& ch);

// Enforces |SF| >= 2 and |NSF| >= 1 by flipping randomly chosen bits.
// Valid chromosomes pass through untouched.
Chromosome repair(Chromosome ch, Rng& rng);

enum class Similarity { nmi, ig, pcc };
enum class Dispersion { std_dev, entropy };

// One of the nine model tokens: similarity measure for the first two
// objectives, dispersion measure for the third, and for the (b) variants the
// feature indices whose SD is ignored (schema-driven, e.g. the KDD byte-count
// columns).
struct ObjectiveModel {
    std::string token;
    Similarity similarity = Similarity::nmi;
    Dispersion dispersion = Dispersion::std_dev;
    std::vector<std::size_t> sd_exclusions;   // sorted, empty unless a (b) variant

    static ObjectiveModel from_token(std::string_view token,
                                     std::vector<std::size_t> sd_exclusion_indices = {});
    static const std::vector<std::string>& tokens();
};

// All three components are maximized by the engine.
struct ObjectiveVector {
    double selected_dissimilarity = 0.0;   // reciprocal of avg pairwise similarity in SF
    double unselected_coverage = 0.0;      // avg similarity of NSF to nearest selected
    double dispersion = 0.0;               // avg SD or entropy over SF

    static constexpr std::size_t kComponents = 3;
    double operator[](std::size_t i) const {
        return i == 0 ? selected_dissimilarity : i == 1 ? unselected_coverage : dispersion;
    }
    bool operator==(const ObjectiveVector&) const = default;
};

double selected_dissimilarity(std::span<const std::size_t> selected, const ObjectiveModel& model,
                              const MeasureCache& cache);
double unselected_coverage(std::span<const std::size_t> selected,
                           std::span<const std::size_t> unselected, const ObjectiveModel& model,
                           const MeasureCache& cache);
double dispersion_score(std::span<const std::size_t> selected, const ObjectiveModel& model,
                        const MeasureCache& cache);

ObjectiveVector evaluate(const Chromosome& ch, const ObjectiveModel& model,
                         const MeasureCache& cache);

}  // namespace idsfs
