#include "idsfs/measures.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace idsfs {

BinnedColumn bin_column(std::span<const double> column, int bins) {
    if (column.empty()) throw std::runtime_error("bin_column: empty column");
    if (bins < 1) throw std::runtime_error("bin_column: bins must be positive");

    BinnedColumn out;
    out.symbols.resize(column.size());

    std::map<double, int> distinct;
    for (double v : column) {
        distinct.emplace(v, 0);
        if (distinct.size() > static_cast<std::size_t>(bins)) break;
    }
    if (distinct.size() <= static_cast<std::size_t>(bins)) {
        // Few distinct values: each value is its own symbol. Covers
        // categorical codes and low-cardinality counters exactly.
        int next = 0;
        for (auto& [value, symbol] : distinct) symbol = next++;
        for (std::size_t i = 0; i < column.size(); ++i) out.symbols[i] = distinct[column[i]];
        out.arity = next;
        return out;
    }

    const auto [lo_it, hi_it] = std::minmax_element(column.begin(), column.end());
    const double lo = *lo_it, hi = *hi_it;
    const double width = (hi - lo) / bins;
    for (std::size_t i = 0; i < column.size(); ++i) {
        int b = static_cast<int>((column[i] - lo) / width);
        out.symbols[i] = std::clamp(b, 0, bins - 1);
    }
    out.arity = bins;
    return out;
}

double entropy_binned(const BinnedColumn& column) {
    std::vector<std::size_t> counts(column.arity, 0);
    for (int s : column.symbols) ++counts[s];
    const double n = static_cast<double>(column.symbols.size());
    double h = 0.0;
    for (std::size_t c : counts) {
        if (c == 0) continue;
        const double p = c / n;
        h -= p * std::log2(p);
    }
    return std::max(h, 0.0);
}

double entropy(std::span<const double> column, int bins) {
    return entropy_binned(bin_column(column, bins));
}

double mutual_information_binned(const BinnedColumn& x, const BinnedColumn& y) {
    if (x.symbols.size() != y.symbols.size())
        throw std::runtime_error("mutual_information: length mismatch");
    const std::size_t n = x.symbols.size();
    const std::size_t ax = x.arity, ay = y.arity;
    std::vector<std::size_t> joint(ax * ay, 0), mx(ax, 0), my(ay, 0);
    for (std::size_t i = 0; i < n; ++i) {
        ++joint[x.symbols[i] * ay + y.symbols[i]];
        ++mx[x.symbols[i]];
        ++my[y.symbols[i]];
    }
    const double dn = static_cast<double>(n);
    double mi = 0.0;
    for (std::size_t i = 0; i < ax; ++i) {
        for (std::size_t j = 0; j < ay; ++j) {
            const std::size_t c = joint[i * ay + j];
            if (c == 0) continue;
            const double pxy = c / dn;
            const double px = mx[i] / dn;
            const double py = my[j] / dn;
            mi += pxy * std::log2(pxy / (px * py));
        }
    }
    return std::max(mi, 0.0);
}

double mutual_information(std::span<const double> x, std::span<const double> y, int bins) {
    return mutual_information_binned(bin_column(x, bins), bin_column(y, bins));
}

double normalized_mi(std::span<const double> x, std::span<const double> y, int bins) {
    const BinnedColumn bx = bin_column(x, bins);
    const BinnedColumn by = bin_column(y, bins);
    const double hx = entropy_binned(bx);
    const double hy = entropy_binned(by);
    if (hx + hy <= 0.0) return 0.0;
    const double nmi = 2.0 * mutual_information_binned(bx, by) / (hx + hy);
    return std::clamp(nmi, 0.0, 1.0);
}

double information_gain_binned(const BinnedColumn& target, const BinnedColumn& given) {
    if (target.symbols.size() != given.symbols.size())
        throw std::runtime_error("information_gain: length mismatch");
    const std::size_t n = target.symbols.size();
    // Entropy of the target within each partition induced by `given`,
    // weighted by partition size. Deliberately a separate summation route
    // from mutual_information.
    std::vector<std::vector<std::size_t>> part(given.arity,
                                               std::vector<std::size_t>(target.arity, 0));
    std::vector<std::size_t> part_size(given.arity, 0);
    for (std::size_t i = 0; i < n; ++i) {
        ++part[given.symbols[i]][target.symbols[i]];
        ++part_size[given.symbols[i]];
    }
    double conditional = 0.0;
    for (int g = 0; g < given.arity; ++g) {
        if (part_size[g] == 0) continue;
        const double pn = static_cast<double>(part_size[g]);
        double h = 0.0;
        for (int t = 0; t < target.arity; ++t) {
            const std::size_t c = part[g][t];
            if (c == 0) continue;
            const double p = c / pn;
            h -= p * std::log2(p);
        }
        conditional += (pn / static_cast<double>(n)) * h;
    }
    return std::max(entropy_binned(target) - conditional, 0.0);
}

double information_gain(std::span<const double> target, std::span<const double> given, int bins) {
    return information_gain_binned(bin_column(target, bins), bin_column(given, bins));
}

double pcc(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) throw std::runtime_error("pcc: length mismatch");
    if (x.empty()) throw std::runtime_error("pcc: empty input");
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx, dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx <= 0.0 || syy <= 0.0) return 0.0;
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double std_dev(std::span<const double> column) {
    if (column.empty()) throw std::runtime_error("std_dev: empty input");
    const double n = static_cast<double>(column.size());
    double mean = 0.0;
    for (double v : column) mean += v;
    mean /= n;
    double ss = 0.0;
    for (double v : column) ss += (v - mean) * (v - mean);
    return std::sqrt(ss / n);
}

MeasureCache build_cache(const NumericDataset& ds, const NormalizedView& norm, int bins,
                         Warnings* warnings) {
    if (ds.rows != norm.rows || ds.cols != norm.cols)
        throw std::runtime_error("build_cache: dataset and normalized view disagree");
    const std::size_t m = ds.cols;
    MeasureCache cache;
    cache.m = m;
    cache.bin_count = bins;
    cache.source_hash = ds.content_hash();
    cache.entropy.resize(m);
    cache.std_dev.resize(m);
    cache.nmi = Matrix(m);
    cache.ig = Matrix(m);
    cache.pcc = Matrix(m);
    cache.feat_dist = Matrix(m);

    std::vector<BinnedColumn> binned(m);
    std::vector<std::vector<double>> raw(m), scaled(m);
    std::string constant;
    for (std::size_t i = 0; i < m; ++i) {
        raw[i] = ds.column(i);
        scaled[i] = norm.column(i);
        binned[i] = bin_column(raw[i], bins);
        cache.entropy[i] = entropy_binned(binned[i]);
        cache.std_dev[i] = std_dev(raw[i]);
        if (binned[i].arity <= 1) {
            if (!constant.empty()) constant += ", ";
            constant += std::to_string(i) + " '" + ds.schema.features[i].name + "'";
        }
    }
    if (!constant.empty())
        Warnings::emit(warnings,
                       "constant feature(s) " + constant + "; their NMI/PCC rows are 0");

    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = i; j < m; ++j) {
            const double mi = mutual_information_binned(binned[i], binned[j]);
            const double hsum = cache.entropy[i] + cache.entropy[j];
            const double nmi = hsum > 0.0 ? std::clamp(2.0 * mi / hsum, 0.0, 1.0) : 0.0;
            cache.nmi(i, j) = cache.nmi(j, i) = nmi;
            cache.ig(i, j) = information_gain_binned(binned[i], binned[j]);
            if (j != i) cache.ig(j, i) = information_gain_binned(binned[j], binned[i]);
            const double rho = pcc(raw[i], raw[j]);
            cache.pcc(i, j) = cache.pcc(j, i) = rho;
            double d2 = 0.0;
            for (std::size_t r = 0; r < ds.rows; ++r) {
                const double d = scaled[i][r] - scaled[j][r];
                d2 += d * d;
            }
            const double dist = i == j ? 0.0 : std::sqrt(d2);
            cache.feat_dist(i, j) = cache.feat_dist(j, i) = dist;
        }
    }
    return cache;
}

namespace {

nlohmann::json matrix_to_json(const Matrix& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t i = 0; i < m.n; ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (std::size_t j = 0; j < m.n; ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Matrix matrix_from_json(const nlohmann::json& j) {
    Matrix m(j.size());
    for (std::size_t i = 0; i < m.n; ++i)
        for (std::size_t k = 0; k < m.n; ++k) m(i, k) = j[i][k].get<double>();
    return m;
}

}  // namespace

void MeasureCache::save(const std::string& path) const {
    nlohmann::json j;
    j["features"] = m;
    j["bin_count"] = bin_count;
    j["source_hash"] = hash_hex(source_hash);
    j["entropy"] = entropy;
    j["std_dev"] = std_dev;
    j["nmi"] = matrix_to_json(nmi);
    j["ig"] = matrix_to_json(ig);
    j["pcc"] = matrix_to_json(pcc);
    j["feat_dist"] = matrix_to_json(feat_dist);
    write_file(path, j.dump(1) + "\n");
}

MeasureCache MeasureCache::load(const std::string& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error(path + ": " + e.what());
    }
    MeasureCache cache;
    cache.m = j.at("features").get<std::size_t>();
    cache.bin_count = j.at("bin_count").get<int>();
    cache.source_hash = std::stoull(j.at("source_hash").get<std::string>(), nullptr, 16);
    cache.entropy = j.at("entropy").get<std::vector<double>>();
    cache.std_dev = j.at("std_dev").get<std::vector<double>>();
    cache.nmi = matrix_from_json(j.at("nmi"));
    cache.ig = matrix_from_json(j.at("ig"));
    cache.pcc = matrix_from_json(j.at("pcc"));
    cache.feat_dist = matrix_from_json(j.at("feat_dist"));
    if (cache.nmi.n != cache.m || cache.ig.n != cache.m || cache.pcc.n != cache.m ||
        cache.feat_dist.n != cache.m || cache.entropy.size() != cache.m ||
        cache.std_dev.size() != cache.m)
        throw std::runtime_error(path + ": inconsistent cache dimensions");
    return cache;
}

}  // namespace idsfs
