#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "idsfs/dataset.hpp"
#include "idsfs/util.hpp"

namespace idsfs {

inline constexpr int kDefaultBins = 20;

struct Matrix {
    std::size_t n = 0;
    std::vector<double> a;

    Matrix() = default;
    explicit Matrix(std::size_t size) : n(size), a(size * size, 0.0) {}
    double operator()(std::size_t i, std::size_t j) const { return a[i * n + j]; }
    double& operator()(std::size_t i, std::size_t j) { return a[i * n + j]; }
};

// Discretized column: symbols in [0, arity). Columns with at most `bins`
// distinct values keep their exact values as symbols (covers categorical
// codes and low-cardinality counts); everything else gets an equal-width
// histogram over [min, max]. Constant columns have arity 1.
struct BinnedColumn {
    std::vector<int> symbols;
    int arity = 0;
};

BinnedColumn bin_column(std::span<const double> column, int bins);

double entropy_binned(const BinnedColumn& column);
double entropy(std::span<const double> column, int bins);

double mutual_information_binned(const BinnedColumn& x, const BinnedColumn& y);
double mutual_information(std::span<const double> x, std::span<const double> y, int bins);

// 2*I(X;Y) / (H(X)+H(Y)), 0 when both entropies vanish. Always in [0, 1].
double normalized_mi(std::span<const double> x, std::span<const double> y, int bins);

// Entropy of `target` minus the average entropy of the row partitions induced
// by `given`'s bins. Directional: information_gain(x, y) reads IG(x | y).
double information_gain_binned(const BinnedColumn& target, const BinnedColumn& given);
double information_gain(std::span<const double> target, std::span<const double> given, int bins);

// Pearson correlation; 0 when either column has zero variance.
double pcc(std::span<const double> x, std::span<const double> y);

// Population standard deviation (1/N under the root), on raw values.
double std_dev(std::span<const double> column);

// Per-feature statistics and pairwise matrices the objective functions read.
// Entropy/NMI/IG are computed on binned raw columns (binning is invariant
// under per-column min-max scaling), SD on raw values, feature distance on
// min-max normalized columns.
struct MeasureCache {
    std::size_t m = 0;
    int bin_count = kDefaultBins;
    std::uint64_t source_hash = 0;
    std::vector<double> entropy;    // bits, length m
    std::vector<double> std_dev;    // raw units, length m
    Matrix nmi;                     // symmetric, in [0,1]
    Matrix ig;                      // directional: ig(i,j) = IG(feature i | feature j)
    Matrix pcc;                     // symmetric, in [-1,1]
    Matrix feat_dist;               // symmetric Euclidean distance, diagonal 0

    void save(const std::string& path) const;
    static MeasureCache load(const std::string& path);
};

MeasureCache build_cache(const NumericDataset& ds, const NormalizedView& norm, int bins,
                         Warnings* warnings = nullptr);

}  // namespace idsfs
