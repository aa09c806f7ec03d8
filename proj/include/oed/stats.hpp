#pragma once

#include <limits>
#include <string>
#include <vector>

namespace oed {

inline constexpr double kInfiniteDf = std::numeric_limits<double>::infinity();

/// P(Q ≤ q) for the studentized range of k standard normals with `df`
/// degrees of freedom in the variance estimate. df > 10 000 is treated as ∞.
double studentized_range_cdf(double q, int k, double df);

/// Upper-α quantile: the q with P(Q ≤ q) = 1 − α, to absolute accuracy 1e-8.
double studentized_range_quantile(double alpha, int k, double df);

/// Table-style summary of one error sample.
struct SummaryStats {
    std::size_t count = 0;
    double mean = 0.0;
    double std = 0.0;  ///< sample standard deviation (n − 1)
    double min = 0.0;
    double q25 = 0.0;
    double median = 0.0;
    double q75 = 0.0;
    double max = 0.0;
};

/// Quantile by linear interpolation between closest ranks, h = (n − 1)·p.
double quantile_inclusive(std::vector<double> sample, double p);

SummaryStats summarize(const std::vector<double>& sample);

struct TukeyRecord {
    std::string group1;
    std::string group2;
    double meandiff = 0.0;  ///< mean(group2) − mean(group1)
    double p_adj = 1.0;
    double lower = 0.0;
    double upper = 0.0;
    bool reject = false;
};

/// All-pairs Tukey HSD (Tukey–Kramer standard errors when group sizes differ).
/// Pairs are emitted in (i, j), i < j order of `groups`.
std::vector<TukeyRecord> tukey_hsd(const std::vector<std::vector<double>>& groups, const std::vector<std::string>& names,
                                   double alpha = 0.05);

}  // namespace oed
