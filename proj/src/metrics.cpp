#include "refeval/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "refeval/textutil.hpp"

namespace refeval::metrics {

DistanceResult levenshtein(std::string_view a, std::string_view b) {
    const std::vector<char32_t> ua = text::decode_utf8(a);
    const std::vector<char32_t> ub = text::decode_utf8(b);
    // Two-row DP over the shorter string.
    const std::vector<char32_t>& rows = ua.size() >= ub.size() ? ua : ub;
    const std::vector<char32_t>& cols = ua.size() >= ub.size() ? ub : ua;

    std::vector<long> prev(cols.size() + 1);
    std::vector<long> cur(cols.size() + 1);
    std::iota(prev.begin(), prev.end(), 0L);
    for (std::size_t i = 1; i <= rows.size(); ++i) {
        cur[0] = static_cast<long>(i);
        for (std::size_t j = 1; j <= cols.size(); ++j) {
            const long sub = prev[j - 1] + (rows[i - 1] == cols[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    return {prev[cols.size()], static_cast<long>(ua.size()),
            static_cast<long>(ub.size())};
}

SimilarityResult similarity_from_distance(const DistanceResult& d) {
    const long longest = std::max(d.len_a, d.len_b);
    if (longest == 0) {
        return {1.0, true};  // both empty: identical by definition
    }
    return {1.0 - static_cast<double>(d.distance) / static_cast<double>(longest),
            false};
}

SimilarityResult similarity(std::string_view a, std::string_view b) {
    return similarity_from_distance(levenshtein(a, b));
}

double compilability(long p, long e) {
    if (p < 0 || e < 0 || p + e == 0) {
        throw std::invalid_argument("compilability: undefined for P + E == 0");
    }
    return 100.0 * static_cast<double>(p) / static_cast<double>(p + e);
}

double pass_at_k(int n, int c, int k) {
    if (k < 1 || k > n) {
        throw std::invalid_argument("pass_at_k: requires 1 <= k <= n, got n=" +
                                    std::to_string(n) + " k=" + std::to_string(k));
    }
    if (c < 0 || c > n) {
        throw std::invalid_argument("pass_at_k: requires 0 <= c <= n");
    }
    if (c == 0) return 0.0;
    if (n - c < k) return 1.0;  // C(n-c, k) == 0
    if (k == 1) return static_cast<double>(c) / static_cast<double>(n);
    // C(n-c,k)/C(n,k) as a product of factors in (0,1]; never overflows.
    long double ratio = 1.0L;
    for (int i = n - c + 1; i <= n; ++i) {
        ratio *= static_cast<long double>(i - k) / static_cast<long double>(i);
    }
    return static_cast<double>(1.0L - ratio);
}

double correct_at_k(int n, int e, int k) {
    if (k < 1 || k > n) {
        throw std::invalid_argument("correct_at_k: requires 1 <= k <= n, got n=" +
                                    std::to_string(n) + " k=" + std::to_string(k));
    }
    if (e < 0 || e > n) {
        throw std::invalid_argument("correct_at_k: requires 0 <= e <= n");
    }
    const int correct = n - e;
    if (k <= correct) return 100.0;
    return 100.0 * static_cast<double>(correct) / static_cast<double>(k);
}

}  // namespace refeval::metrics
