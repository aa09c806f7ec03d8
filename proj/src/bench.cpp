#include "oed/bench.hpp"

#include "oed/csv.hpp"
#include "oed/errors.hpp"
#include "oed/manifest.hpp"
#include "oed/models.hpp"
#include "oed/parallel.hpp"
#include "oed/rng.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <set>

namespace oed {

const char* method_kind_name(MethodKind kind) noexcept {
    switch (kind) {
        case MethodKind::Random: return "random";
        case MethodKind::EOptimalOracle: return "e-optimal-oracle";
        case MethodKind::Eor: return "eor";
        case MethodKind::ExternalPoints: return "external";
    }
    return "unknown";
}

void BenchConfig::validate() const {
    const DynamicalModel& model = model_by_name(model_name);
    if (space.dim() != model.dim_param)
        throw ConfigError("bench: parameter space has " + std::to_string(space.dim()) + " bounds, model '" +
                          model_name + "' has " + std::to_string(model.dim_param) + " parameters");
    if (n_points < 1 || n_points > grid.count()) throw ConfigError("bench: n_points must lie in [1, grid count]");
    if (n_datasets < 2) throw ConfigError("bench: n_datasets must be at least 2 for group statistics");
    if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) throw ConfigError("bench: noise_sigma must be >= 0");
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("bench: alpha must lie in (0, 1)");
    if (estimator.starts < 1) throw ConfigError("bench: estimator starts must be >= 1");
    if (estimator.substeps < 1) throw ConfigError("bench: substeps must be >= 1");
    if (!(max_missing_fraction >= 0.0 && max_missing_fraction < 1.0))
        throw ConfigError("bench: max_missing_fraction must lie in [0, 1)");
}

std::vector<double> BenchReport::observed_errors(std::size_t method) const {
    std::vector<double> out;
    for (double e : errors.at(method))
        if (!std::isnan(e)) out.push_back(e);
    return out;
}

namespace {

void check_methods(const BenchConfig& config, const std::vector<MethodSpec>& methods) {
    if (methods.empty()) throw ConfigError("bench: no methods given");
    std::set<std::string> names;
    for (const MethodSpec& m : methods) {
        if (m.name.empty() || m.name.find_first_of(",\n\"") != std::string::npos)
            throw ConfigError("bench: invalid method name '" + m.name + "'");
        if (!names.insert(m.name).second) throw ConfigError("bench: duplicate method name '" + m.name + "'");
        const bool fixed = m.kind == MethodKind::Eor || m.kind == MethodKind::ExternalPoints;
        if (!fixed) continue;
        if (m.points.size() != config.n_points)
            throw ConfigError("bench: method '" + m.name + "' has " + std::to_string(m.points.size()) +
                              " points, expected " + std::to_string(config.n_points));
        std::set<std::size_t> unique(m.points.begin(), m.points.end());
        if (unique.size() != m.points.size()) throw ConfigError("bench: method '" + m.name + "' repeats a point");
        if (*unique.rbegin() >= config.grid.count())
            throw ConfigError("bench: method '" + m.name + "' has a point outside the grid");
    }
}

}  // namespace

std::vector<std::size_t> random_points(std::uint64_t seed, std::size_t count, std::size_t n) {
    if (n > count) throw ConfigError("cannot draw more points than the grid holds");
    std::vector<std::size_t> all(count);
    std::iota(all.begin(), all.end(), std::size_t{0});
    std::mt19937_64 rng(seed);
    // Partial Fisher–Yates: the first n entries are a uniform draw without replacement.
    for (std::size_t i = 0; i < n; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, count - 1);
        std::swap(all[i], all[pick(rng)]);
    }
    all.resize(n);
    std::sort(all.begin(), all.end());
    return all;
}

BenchReport run_benchmark(const BenchConfig& config, const std::vector<MethodSpec>& methods) {
    config.validate();
    check_methods(config, methods);
    const DynamicalModel& model = model_by_name(config.model_name);
    const std::size_t n_methods = methods.size();
    const std::size_t n_data = config.n_datasets;
    const bool need_oracle = std::any_of(methods.begin(), methods.end(),
                                         [](const MethodSpec& m) { return m.kind == MethodKind::EOptimalOracle; });

    BenchReport report{config, methods, {}, {}, {}, {}, {}, 0};
    report.truths.resize(n_data);
    report.errors.assign(n_methods, std::vector<double>(n_data, std::numeric_limits<double>::quiet_NaN()));
    report.selections.assign(n_methods, std::vector<std::vector<std::size_t>>(n_data));

    constexpr std::uint64_t kTruthAttempts = 10;
    parallel_for(n_data, config.threads, [&](std::size_t d) {
        ParamVector truth;
        Dataset full{config.grid, {}, {}, {}, config.model_name, config.noise_sigma, 0};
        std::vector<std::size_t> oracle_points;
        for (std::uint64_t attempt = 0;; ++attempt) {
            if (attempt == kTruthAttempts)
                throw TooManyFailures("bench: dataset " + std::to_string(d) + " could not draw an integrable truth");
            auto rng = make_rng(config.seed, {stream_tag("bench-truth"), d, attempt});
            truth = config.space.sample(rng);
            try {
                ObservationSeries series = [&] {
                    if (!need_oracle) return observe(integrate(model, truth, config.grid, config.estimator.substeps), model);
                    const AugmentedTrajectory aug =
                        integrate_with_sensitivities(model, truth, config.grid, config.estimator.substeps);
                    auto [obs, record] = observe(aug, model);
                    const DesignWeights w = e_optimal_weights(record, config.design);
                    oracle_points = select_top_n(rank_times(w.lambda), config.n_points);
                    return obs;
                }();
                const std::uint64_t noise_seed = derive_seed(config.seed, {stream_tag("bench-noise"), d});
                full = make_dataset(add_noise(series, config.noise_sigma, noise_seed), truth, config.model_name,
                                    noise_seed);
                break;
            } catch (const NonFiniteState&) {
                continue;
            }
        }
        report.truths[d] = truth;

        // The estimator stream depends on the dataset only, so methods that pick
        // the same points produce the same estimate.
        EstimatorOptions est = config.estimator;
        est.seed = derive_seed(config.seed, {stream_tag("bench-estimator"), d});
        est.threads = 1;
        for (std::size_t k = 0; k < n_methods; ++k) {
            const MethodSpec& method = methods[k];
            std::vector<std::size_t> points;
            switch (method.kind) {
                case MethodKind::Random:
                    points = random_points(derive_seed(config.seed, {stream_tag(method.name), d}), config.grid.count(),
                                           config.n_points);
                    break;
                case MethodKind::EOptimalOracle: points = oracle_points; break;
                case MethodKind::Eor:
                case MethodKind::ExternalPoints:
                    points = method.points;
                    std::sort(points.begin(), points.end());
                    break;
            }
            try {
                const EstimationResult r = least_squares_estimate(model, config.space, full.restrict_to(points), est);
                report.errors[k][d] = estimation_error(r.theta_hat, truth, config.metric);
            } catch (const AllStartsFailed&) {
                // left as NaN: a missing cell
            }
            report.selections[k][d] = std::move(points);
        }
    });

    for (const auto& column : report.errors)
        report.missing_cells += static_cast<std::size_t>(std::count_if(column.begin(), column.end(),
                                                                       [](double e) { return std::isnan(e); }));
    const double total = static_cast<double>(n_methods * n_data);
    if (static_cast<double>(report.missing_cells) > config.max_missing_fraction * total)
        throw NumericError("bench: " + std::to_string(report.missing_cells) + " of " +
                           std::to_string(n_methods * n_data) + " estimation cells failed, above the allowed fraction");
    compute_statistics(report);
    return report;
}

void compute_statistics(BenchReport& report) {
    std::vector<std::vector<double>> groups;
    std::vector<std::string> names;
    for (std::size_t k = 0; k < report.methods.size(); ++k) {
        groups.push_back(report.observed_errors(k));
        names.push_back(report.methods[k].name);
    }
    report.summary.clear();
    for (const auto& g : groups) report.summary.push_back(summarize(g));
    report.tukey = groups.size() >= 2 ? tukey_hsd(groups, names, report.config.alpha) : std::vector<TukeyRecord>{};
}

void write_summary_csv(const std::vector<std::string>& methods, const std::vector<SummaryStats>& stats,
                       std::ostream& out) {
    out << "stat";
    for (const auto& m : methods) out << ',' << m;
    out << '\n';
    auto row = [&](const char* label, double SummaryStats::*field) {
        out << label;
        for (const SummaryStats& s : stats) out << ',' << format_double(s.*field);
        out << '\n';
    };
    row("mean", &SummaryStats::mean);
    row("std", &SummaryStats::std);
    row("min", &SummaryStats::min);
    row("25%", &SummaryStats::q25);
    row("50%", &SummaryStats::median);
    row("75%", &SummaryStats::q75);
    row("max", &SummaryStats::max);
}

void write_tukey_csv(const std::vector<TukeyRecord>& records, std::ostream& out) {
    out << "group1,group2,meandiff,p_adj,lower,upper,reject\n";
    for (const TukeyRecord& r : records)
        out << r.group1 << ',' << r.group2 << ',' << format_double(r.meandiff) << ',' << format_double(r.p_adj) << ','
            << format_double(r.lower) << ',' << format_double(r.upper) << ',' << (r.reject ? "true" : "false") << '\n';
}

void emit_report(const BenchReport& report, const std::filesystem::path& out_dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create output directory '" + out_dir.string() + "': " + ec.message());

    std::vector<fs::path> written;
    auto emit = [&](const char* name, auto&& body) {
        const fs::path path = out_dir / name;
        written.push_back(path);
        auto out = open_output(path);
        body(out);
        out.flush();
        if (!out) throw IoError("failed writing '" + path.string() + "'");
    };

    try {
        std::vector<std::string> names;
        for (const auto& m : report.methods) names.push_back(m.name);
        emit("summary.csv", [&](std::ostream& out) { write_summary_csv(names, report.summary, out); });
        emit("tukey.csv", [&](std::ostream& out) { write_tukey_csv(report.tukey, out); });
        emit("errors_long.csv", [&](std::ostream& out) {
            out << "method,dataset,error\n";
            for (std::size_t k = 0; k < report.methods.size(); ++k)
                for (std::size_t d = 0; d < report.errors[k].size(); ++d)
                    if (!std::isnan(report.errors[k][d]))
                        out << names[k] << ',' << d << ',' << format_double(report.errors[k][d]) << '\n';
        });
        emit("selections.csv", [&](std::ostream& out) {
            out << "method,dataset,t\n";
            for (std::size_t k = 0; k < report.methods.size(); ++k)
                for (std::size_t d = 0; d < report.selections[k].size(); ++d)
                    for (std::size_t i : report.selections[k][d])
                        out << names[k] << ',' << d << ',' << format_double(report.config.grid.point(i)) << '\n';
        });
        emit("manifest.txt", [&](std::ostream& out) {
            const BenchConfig& c = report.config;
            Manifest m;
            m.set("command", "bench");
            m.set("model", c.model_name);
            m.set("space_lower", c.space.lower());
            m.set("space_upper", c.space.upper());
            m.set("grid_t_start", c.grid.t_start());
            m.set("grid_t_end", c.grid.t_end());
            m.set("grid_count", std::to_string(c.grid.count()));
            m.set("n_points", std::to_string(c.n_points));
            m.set("n_datasets", std::to_string(c.n_datasets));
            m.set("noise_sigma", c.noise_sigma);
            m.set("seed", std::to_string(c.seed));
            m.set("estimator_starts", std::to_string(c.estimator.starts));
            m.set("estimator_max_iter", std::to_string(c.estimator.local.max_iter));
            m.set("estimator_xtol", c.estimator.local.xtol);
            m.set("substeps", std::to_string(c.estimator.substeps));
            m.set("design_solver", c.design.solver == DesignSolver::InteriorPoint ? "interior-point" : "frank-wolfe");
            m.set("design_tol", c.design.tol);
            m.set("design_max_iter", std::to_string(c.design.max_iter));
            m.set("error_metric", c.metric == ErrorMetric::Euclidean ? "euclidean" : "relative");
            m.set("alpha", c.alpha);
            for (const MethodSpec& spec : report.methods) {
                std::string value = method_kind_name(spec.kind);
                if (!spec.points.empty()) {
                    Vector t(static_cast<Eigen::Index>(spec.points.size()));
                    for (std::size_t i = 0; i < spec.points.size(); ++i)
                        t[static_cast<Eigen::Index>(i)] = c.grid.point(spec.points[i]);
                    value += ": " + format_vector(t);
                }
                m.set("method." + spec.name, value);
            }
            m.set("missing_cells", std::to_string(report.missing_cells));
            out << m.str();
        });
    } catch (...) {
        for (const auto& p : written) fs::remove(p, ec);
        throw;
    }
}

}  // namespace oed
