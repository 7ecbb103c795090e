#include "idsfs/objectives.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace idsfs {

namespace {

constexpr double kEpsilon = 1e-12;

double pair_similarity(std::size_t i, std::size_t j, Similarity kind, const MeasureCache& cache) {
    switch (kind) {
        case Similarity::nmi:
            return cache.nmi(i, j);
        case Similarity::ig:
            return 0.5 * (cache.ig(i, j) + cache.ig(j, i));
        case Similarity::pcc:
            return std::abs(cache.pcc(i, j));
    }
    return 0.0;
}

}  // namespace

std::size_t Chromosome::count_selected() const {
    std::size_t n = 0;
    for (std::uint8_t b : bits) n += b;
    return n;
}

std::string Chromosome::to_string() const {
    std::string s(bits.size(), '0');
    for (std::size_t i = 0; i < bits.size(); ++i)
        if (bits[i]) s[i] = '1';
    return s;
}

Chromosome Chromosome::from_string(std::string_view text) {
    Chromosome ch(text.size());
    for (std::size_t i = 0; i < text.size(); ++i) {
        if (text[i] == '1')
            ch.bits[i] = 1;
        else if (text[i] != '0')
            throw std::runtime_error("chromosome strings are 0/1 only, got '" +
                                     std::string(1, text[i]) + "'");
    }
    return ch;
}

Decoded decode(const Chromosome& ch) {
    Decoded d;
    for (std::size_t i = 0; i < ch.bits.size(); ++i)
        (ch.bits[i] ? d.selected : d.unselected).push_back(i);
    return d;
}

Chromosome repair(Chromosome ch, Rng& rng) {
    const std::size_t m = ch.length();
    if (m < 3) throw std::runtime_error("repair: need at least 3 features");
    std::size_t ones = ch.count_selected();
    while (ones < 2) {
        std::size_t pick = rng.uniform_index(m - ones);
        for (std::size_t i = 0; i < m; ++i) {
            if (ch.bits[i]) continue;
            if (pick-- == 0) {
                ch.bits[i] = 1;
                break;
            }
        }
        ++ones;
    }
    if (ones == m) {
        const std::size_t pick = rng.uniform_index(m);
        ch.bits[pick] = 0;
    }
    return ch;
}

ObjectiveModel ObjectiveModel::from_token(std::string_view token,
                                          std::vector<std::size_t> sd_exclusion_indices) {
    ObjectiveModel m;
    m.token = std::string(token);
    bool excluded = false;
    if (token == "model1a") {
        m.similarity = Similarity::nmi;
        m.dispersion = Dispersion::std_dev;
    } else if (token == "model1b") {
        m.similarity = Similarity::nmi;
        m.dispersion = Dispersion::std_dev;
        excluded = true;
    } else if (token == "model2") {
        m.similarity = Similarity::nmi;
        m.dispersion = Dispersion::entropy;
    } else if (token == "model3a") {
        m.similarity = Similarity::ig;
        m.dispersion = Dispersion::std_dev;
    } else if (token == "model3b") {
        m.similarity = Similarity::ig;
        m.dispersion = Dispersion::std_dev;
        excluded = true;
    } else if (token == "model4") {
        m.similarity = Similarity::ig;
        m.dispersion = Dispersion::entropy;
    } else if (token == "model5a") {
        m.similarity = Similarity::pcc;
        m.dispersion = Dispersion::std_dev;
    } else if (token == "model5b") {
        m.similarity = Similarity::pcc;
        m.dispersion = Dispersion::std_dev;
        excluded = true;
    } else if (token == "model6") {
        m.similarity = Similarity::pcc;
        m.dispersion = Dispersion::entropy;
    } else {
        throw std::runtime_error("unknown model token '" + std::string(token) + "'");
    }
    if (excluded) {
        if (sd_exclusion_indices.empty())
            throw std::runtime_error("model token '" + std::string(token) +
                                     "' needs sd_exclusion features in the schema");
        std::sort(sd_exclusion_indices.begin(), sd_exclusion_indices.end());
        m.sd_exclusions = std::move(sd_exclusion_indices);
    }
    return m;
}

const std::vector<std::string>& ObjectiveModel::tokens() {
    static const std::vector<std::string> all = {"model1a", "model1b", "model2",
                                                 "model3a", "model3b", "model4",
                                                 "model5a", "model5b", "model6"};
    return all;
}

double selected_dissimilarity(std::span<const std::size_t> selected, const ObjectiveModel& model,
                              const MeasureCache& cache) {
    if (selected.size() < 2)
        throw std::runtime_error("selected_dissimilarity: need at least 2 selected features");
    double sum = 0.0;
    for (std::size_t a = 0; a < selected.size(); ++a)
        for (std::size_t b = a + 1; b < selected.size(); ++b)
            sum += pair_similarity(selected[a], selected[b], model.similarity, cache);
    const double pairs = 0.5 * static_cast<double>(selected.size()) *
                         static_cast<double>(selected.size() - 1);
    const double avg = sum / pairs;
    return 1.0 / std::max(avg, kEpsilon);
}

double unselected_coverage(std::span<const std::size_t> selected,
                           std::span<const std::size_t> unselected, const ObjectiveModel& model,
                           const MeasureCache& cache) {
    if (selected.empty() || unselected.empty())
        throw std::runtime_error("unselected_coverage: both sets must be nonempty");
    double sum = 0.0;
    for (std::size_t i : unselected) {
        std::size_t nearest = selected[0];
        double best = cache.feat_dist(i, nearest);
        for (std::size_t j : selected.subspan(1)) {
            const double d = cache.feat_dist(i, j);
            if (d < best || (d == best && j < nearest)) {
                best = d;
                nearest = j;
            }
        }
        sum += pair_similarity(i, nearest, model.similarity, cache);
    }
    return sum / static_cast<double>(unselected.size());
}

double dispersion_score(std::span<const std::size_t> selected, const ObjectiveModel& model,
                        const MeasureCache& cache) {
    if (selected.empty()) throw std::runtime_error("dispersion_score: empty selection");
    if (model.dispersion == Dispersion::entropy) {
        double sum = 0.0;
        for (std::size_t i : selected) sum += cache.entropy[i];
        return sum / static_cast<double>(selected.size());
    }
    double sum = 0.0;
    std::size_t kept = 0;
    for (std::size_t i : selected) {
        if (std::binary_search(model.sd_exclusions.begin(), model.sd_exclusions.end(), i))
            continue;
        sum += cache.std_dev[i];
        ++kept;
    }
    if (kept == 0) return 0.0;
    return sum / static_cast<double>(kept);
}

ObjectiveVector evaluate(const Chromosome& ch, const ObjectiveModel& model,
                         const MeasureCache& cache) {
    if (ch.length() != cache.m)
        throw std::runtime_error("evaluate: chromosome length does not match the cache");
    const Decoded d = decode(ch);
    ObjectiveVector v;
    v.selected_dissimilarity = selected_dissimilarity(d.selected, model, cache);
    v.unselected_coverage = unselected_coverage(d.selected, d.unselected, model, cache);
    v.dispersion = dispersion_score(d.selected, model, cache);
    return v;
}

}  // namespace idsfs
