#include "oed/stats.hpp"

#include "oed/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <numeric>

namespace oed {
namespace {

// 16-point Gauss–Legendre nodes and weights on [-1, 1] (positive half).
constexpr std::array<double, 8> kNodes = {0.0950125098376374, 0.2816035507792589, 0.4580167776572274,
                                          0.6178762444026438, 0.7554044083550030, 0.8656312023878318,
                                          0.9445750230732326, 0.9894009349916499};
constexpr std::array<double, 8> kWeights = {0.1894506104550685, 0.1826034150449236, 0.1691565193950025,
                                            0.1495959888165767, 0.1246289712555339, 0.0951585116824928,
                                            0.0622535239386479, 0.0271524594117541};

template <class F>
double gauss_legendre(F&& f, double a, double b, int panels) {
    const double width = (b - a) / panels;
    double total = 0.0;
    for (int p = 0; p < panels; ++p) {
        const double mid = a + (p + 0.5) * width;
        const double half = 0.5 * width;
        double s = 0.0;
        for (std::size_t i = 0; i < kNodes.size(); ++i)
            s += kWeights[i] * (f(mid - half * kNodes[i]) + f(mid + half * kNodes[i]));
        total += half * s;
    }
    return total;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }

/// Range CDF of k i.i.d. standard normals: k ∫ φ(z) [Φ(z) − Φ(z − w)]^{k−1} dz.
double range_cdf(double w, int k) {
    if (w <= 0.0) return 0.0;
    auto integrand = [&](double z) {
        const double inner = normal_cdf(z) - normal_cdf(z - w);
        return inner <= 0.0 ? 0.0 : normal_pdf(z) * std::pow(inner, k - 1);
    };
    const double v = k * gauss_legendre(integrand, -8.5, 8.5 + w, 24 + static_cast<int>(w));
    return std::clamp(v, 0.0, 1.0);
}

}  // namespace

double studentized_range_cdf(double q, int k, double df) {
    if (k < 2) throw ConfigError("studentized range needs k >= 2");
    if (!(df >= 1.0)) throw ConfigError("studentized range needs df >= 1");
    if (std::isnan(q)) return q;
    if (q <= 0.0) return 0.0;
    if (std::isinf(q)) return 1.0;
    if (df > 10000.0) return range_cdf(q, k);

    // Outer integral over s = sqrt(χ²_df / df), density
    // f(s) = df^{df/2} s^{df−1} e^{−df s²/2} / (Γ(df/2) 2^{df/2−1}).
    const double log_norm = 0.5 * df * std::log(df) - std::lgamma(0.5 * df) - (0.5 * df - 1.0) * std::log(2.0);
    auto density = [&](double s) {
        if (s <= 0.0) return 0.0;
        return std::exp(log_norm + (df - 1.0) * std::log(s) - 0.5 * df * s * s);
    };
    const double spread = 9.0 / std::sqrt(df);
    const double lo = std::max(0.0, 1.0 - spread);
    const double hi = 1.0 + spread + (df < 5 ? 4.0 : 0.0);
    const double v = gauss_legendre([&](double s) { return density(s) * range_cdf(q * s, k); }, lo, hi, 24);
    return std::clamp(v, 0.0, 1.0);
}

double studentized_range_quantile(double alpha, int k, double df) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
    const double target = 1.0 - alpha;
    double lo = 0.0, hi = 8.0;
    while (studentized_range_cdf(hi, k, df) < target) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e6) throw NumericError("studentized range quantile bracket failed");
    }
    while (hi - lo > 1e-9) {
        const double mid = 0.5 * (lo + hi);
        (studentized_range_cdf(mid, k, df) < target ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

double quantile_inclusive(std::vector<double> sample, double p) {
    if (sample.empty()) throw ConfigError("quantile of an empty sample");
    std::sort(sample.begin(), sample.end());
    const double h = (static_cast<double>(sample.size()) - 1.0) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sample.size() - 1);
    return sample[lo] + (h - static_cast<double>(lo)) * (sample[hi] - sample[lo]);
}

SummaryStats summarize(const std::vector<double>& sample) {
    if (sample.size() < 2) throw ConfigError("summary statistics need at least 2 values");
    SummaryStats s;
    s.count = sample.size();
    const double n = static_cast<double>(sample.size());
    s.mean = std::accumulate(sample.begin(), sample.end(), 0.0) / n;
    double ss = 0.0;
    for (double x : sample) ss += (x - s.mean) * (x - s.mean);
    s.std = std::sqrt(ss / (n - 1.0));
    std::vector<double> sorted = sample;
    std::sort(sorted.begin(), sorted.end());
    s.min = sorted.front();
    s.max = sorted.back();
    s.q25 = quantile_inclusive(sorted, 0.25);
    s.median = quantile_inclusive(sorted, 0.5);
    s.q75 = quantile_inclusive(sorted, 0.75);
    return s;
}

std::vector<TukeyRecord> tukey_hsd(const std::vector<std::vector<double>>& groups, const std::vector<std::string>& names,
                                   double alpha) {
    const std::size_t k = groups.size();
    if (k < 2) throw ConfigError("Tukey HSD needs at least two groups");
    if (names.size() != k) throw ConfigError("Tukey HSD: one name per group required");
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");

    std::vector<double> means(k);
    double ss_within = 0.0;
    std::size_t total = 0;
    for (std::size_t g = 0; g < k; ++g) {
        if (groups[g].size() < 2) throw ConfigError("Tukey HSD: group '" + names[g] + "' has fewer than 2 values");
        const double n = static_cast<double>(groups[g].size());
        means[g] = std::accumulate(groups[g].begin(), groups[g].end(), 0.0) / n;
        for (double x : groups[g]) ss_within += (x - means[g]) * (x - means[g]);
        total += groups[g].size();
    }
    const double df = static_cast<double>(total - k);
    const double msw = ss_within / df;
    const double q_crit = studentized_range_quantile(alpha, static_cast<int>(k), df);

    std::vector<TukeyRecord> out;
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = i + 1; j < k; ++j) {
            TukeyRecord r;
            r.group1 = names[i];
            r.group2 = names[j];
            r.meandiff = means[j] - means[i];
            const double se = std::sqrt(0.5 * msw *
                                        (1.0 / static_cast<double>(groups[i].size()) +
                                         1.0 / static_cast<double>(groups[j].size())));
            if (se == 0.0) {
                // No within-group spread: any difference in means is decisive.
                r.lower = r.upper = r.meandiff;
                r.reject = r.meandiff != 0.0;
                r.p_adj = r.reject ? 0.0 : 1.0;
            } else {
                const double half = q_crit * se;
                r.lower = r.meandiff - half;
                r.upper = r.meandiff + half;
                r.reject = std::abs(r.meandiff) > half;
                r.p_adj = std::clamp(1.0 - studentized_range_cdf(std::abs(r.meandiff) / se, static_cast<int>(k), df),
                                     0.0, 1.0);
                // The interval and the p-value come from the same CDF; keep them
                // coupled where quadrature rounding would split them at the boundary.
                if (r.reject && !(r.p_adj < alpha)) r.p_adj = std::nextafter(alpha, 0.0);
                if (!r.reject && r.p_adj < alpha) r.p_adj = alpha;
            }
            out.push_back(std::move(r));
        }
    }
    return out;
}

}  // namespace oed
