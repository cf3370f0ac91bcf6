#pragma once

#include <string_view>

namespace refeval::metrics {

struct DistanceResult {
    long distance = 0;
    long len_a = 0;
    long len_b = 0;
};

/// Exact minimum edit count (insert/delete/substitute) at Unicode-scalar
/// granularity. Inputs are deliberately un-normalized code texts.
DistanceResult levenshtein(std::string_view a, std::string_view b);

struct SimilarityResult {
    double value = 0.0;      // 1 - distance / max(|a|, |b|), in [0, 1]
    bool degenerate = false; // both inputs empty; value defined as 1.0
};

SimilarityResult similarity(std::string_view a, std::string_view b);
SimilarityResult similarity_from_distance(const DistanceResult& d);

/// P/(P+E) * 100. Throws std::invalid_argument when p + e == 0.
double compilability(long p, long e);

/// 1 - C(n-c,k)/C(n,k), evaluated in product form; exact to ~1e-15 for
/// n <= 1000. Throws std::invalid_argument on contract violations.
double pass_at_k(int n, int c, int k);

/// Piecewise: 100% when k <= n-e, else (n-e)/k * 100. Percentage result.
double correct_at_k(int n, int e, int k);

/// n generated candidates, c correct, e erroneous; c + e == n.
struct CorrectnessTally {
    int n = 0;
    int c = 0;
    int e = 0;
};

}  // namespace refeval::metrics
