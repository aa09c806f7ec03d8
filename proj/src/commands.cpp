#include "oed/commands.hpp"

#include "oed/csv.hpp"
#include "oed/design.hpp"
#include "oed/errors.hpp"
#include "oed/eor.hpp"
#include "oed/manifest.hpp"
#include "oed/parallel.hpp"
#include "oed/rng.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <ostream>
#include <sstream>

namespace oed {
namespace fs = std::filesystem;

namespace {

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory '" + dir.string() + "': " + ec.message());
}

void write_text(const fs::path& path, const std::string& text) {
    auto out = open_output(path);
    out << text;
    out.flush();
    if (!out) throw IoError("failed writing '" + path.string() + "'");
}

std::size_t grid_index(const TimeGrid& grid, double t, const std::string& context) {
    const auto i = grid.index_of(t);
    if (!i) throw GridMismatch(context + ": t = " + format_double(t) + " is not a grid point");
    return *i;
}

const char* kind_token(MethodKind kind) {
    switch (kind) {
        case MethodKind::Random: return "random";
        case MethodKind::EOptimalOracle: return "e-optimal";
        case MethodKind::Eor: return "eor";
        case MethodKind::ExternalPoints: return "external";
    }
    return "";
}

ParamVector simulation_theta(const RunConfig& c) {
    if (c.theta) return *c.theta;
    auto rng = make_rng(c.seed, {stream_tag("simulate-theta")});
    return c.space.sample(rng);
}

}  // namespace

std::vector<std::size_t> read_points_file(const fs::path& path, const TimeGrid& grid) {
    const CsvTable table = read_csv(path);
    const std::size_t col = table.column("t");
    std::vector<std::size_t> out;
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const std::string ctx = path.string() + ":" + std::to_string(r + 2);
        out.push_back(grid_index(grid, parse_double(table.rows[r][col], ctx), ctx));
    }
    std::sort(out.begin(), out.end());
    if (std::adjacent_find(out.begin(), out.end()) != out.end())
        throw ConfigError(path.string() + ": repeated time point");
    return out;
}

void write_points_file(const TimeGrid& grid, const std::vector<std::size_t>& indices, const fs::path& path) {
    std::ostringstream os;
    os << "t\n";
    for (std::size_t i : indices) os << format_double(grid.point(i)) << '\n';
    write_text(path, os.str());
}

Vector read_attention(const fs::path& path, const TimeGrid& grid) {
    const CsvTable table = read_csv(path);
    const std::size_t tc = table.column("t");
    const std::size_t wc = table.column("weight");
    if (table.rows.size() != grid.count())
        throw GridMismatch(path.string() + ": " + std::to_string(table.rows.size()) + " rows for a " +
                           std::to_string(grid.count()) + "-point grid");
    Vector weights = Vector::Constant(static_cast<Eigen::Index>(grid.count()), std::nan(""));
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const std::string ctx = path.string() + ":" + std::to_string(r + 2);
        const std::size_t i = grid_index(grid, parse_double(table.rows[r][tc], ctx), ctx);
        if (!std::isnan(weights[static_cast<Eigen::Index>(i)])) throw GridMismatch(ctx + ": repeated time point");
        const double w = parse_double(table.rows[r][wc], ctx);
        if (!std::isfinite(w) || w < 0.0) throw ConfigError(ctx + ": weight must be finite and >= 0");
        weights[static_cast<Eigen::Index>(i)] = w;
    }
    return weights;
}

std::vector<std::size_t> select_by_weight(const Vector& weights, std::size_t n) {
    const auto count = static_cast<std::size_t>(weights.size());
    if (n < 1 || n > count) throw ConfigError("select_by_weight: n must lie in [1, " + std::to_string(count) + "]");
    std::vector<std::size_t> order(count);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return weights[static_cast<Eigen::Index>(a)] > weights[static_cast<Eigen::Index>(b)];
    });
    order.resize(n);
    std::sort(order.begin(), order.end());
    return order;
}

std::string config_ini(const RunConfig& c) {
    std::ostringstream os;
    auto vec = [](const std::optional<ParamVector>& v) { return v ? format_vector(*v) : std::string(); };
    os << "[model]\nname = " << c.model_name << "\n\n";
    os << "[space]\nlower = " << format_vector(c.space.lower()) << "\nupper = " << format_vector(c.space.upper())
       << "\n\n";
    os << "[grid]\nt_start = " << format_double(c.grid.t_start()) << "\nt_end = " << format_double(c.grid.t_end())
       << "\ncount = " << c.grid.count() << "\n\n";
    os << "[simulation]\nsigma = " << format_double(c.sigma) << "\nsubsteps = " << c.substeps
       << "\ntheta = " << (c.theta ? vec(c.theta) : "sample") << "\n\n";
    os << "[design]\nmethod = " << c.design_method << '\n';
    if (c.design_theta) os << "theta = " << vec(c.design_theta) << '\n';
    os << "draws = " << c.draws << "\nn_points = " << c.n_points
       << "\nsolver = " << (c.design.solver == DesignSolver::InteriorPoint ? "interior-point" : "frank-wolfe")
       << "\ntol = " << format_double(c.design.tol) << "\nmax_iter = " << c.design.max_iter
       << "\naggregation = " << (c.aggregation == RankAggregation::Mean ? "mean" : "median") << "\n\n";
    os << "[estimator]\nstarts = " << c.starts << "\nmax_iter = " << c.local.max_iter
       << "\nxtol = " << format_double(c.local.xtol)
       << "\nmetric = " << (c.metric == ErrorMetric::Euclidean ? "euclidean" : "relative") << '\n';
    if (c.data_file) os << "data = " << c.data_file->string() << '\n';
    os << "\n[bench]\nn_datasets = " << c.n_datasets << "\nmethods = ";
    for (std::size_t k = 0; k < c.methods.size(); ++k)
        os << (k ? ", " : "") << c.methods[k].name << ':' << kind_token(c.methods[k].kind);
    os << "\nalpha = " << format_double(c.alpha) << "\nmax_missing_fraction = " << format_double(c.max_missing_fraction)
       << "\n\n";
    if (!c.external.empty()) {
        os << "[external]\n";
        for (const auto& [name, path] : c.external) os << name << " = " << path.string() << '\n';
        os << '\n';
    }
    os << "[export]\ncount = " << c.export_count << "\nnoisy = " << (c.export_noisy ? "true" : "false") << "\n\n";
    os << "[output]\ndir = " << c.output_dir.string() << "\n\n";
    os << "[run]\nseed = " << c.seed << '\n';
    return os.str();
}

void cmd_simulate(const RunConfig& c, std::ostream& log) {
    const DynamicalModel model = model_by_name(c.model_name);
    const ParamVector theta = simulation_theta(c);
    const Trajectory traj = integrate(model, theta, c.grid, c.substeps);
    const std::uint64_t noise_seed = derive_seed(c.seed, {stream_tag("simulate-noise")});
    const ObservationSeries obs = add_noise(observe(traj, model), c.sigma, noise_seed);

    ensure_dir(c.output_dir);
    {
        auto out = open_output(c.output_dir / "trajectory.csv");
        write_trajectory_csv(traj, out);
        if (!out) throw IoError("failed writing trajectory.csv");
    }
    write_dataset(make_dataset(obs, theta, c.model_name, noise_seed), c.output_dir / "observations.csv");
    Manifest m;
    m.set("command", "simulate");
    m.set("model", c.model_name);
    m.set("theta", theta);
    m.set("sigma", c.sigma);
    m.set("seed", std::to_string(c.seed));
    m.set("noise_seed", std::to_string(noise_seed));
    m.write(c.output_dir / "manifest.txt");
    write_text(c.output_dir / "run.ini", config_ini(c));
    log << "simulated " << c.model_name << " at theta = " << format_vector(theta) << " -> " << c.output_dir.string()
        << '\n';
}

void cmd_design(const RunConfig& c, std::ostream& log) {
    const DynamicalModel model = model_by_name(c.model_name);
    ensure_dir(c.output_dir);
    Manifest m;
    m.set("command", "design");
    m.set("method", c.design_method);
    m.set("model", c.model_name);
    m.set("seed", std::to_string(c.seed));
    m.set("n_points", std::to_string(c.n_points));

    std::vector<std::size_t> selected;
    if (c.design_method == "eor") {
        const EorResult r = eor_design(model, c.space, c.grid, c.eor_config());
        selected = r.selected;
        auto out = open_output(c.output_dir / "average_ranks.csv");
        write_eor_csv(c.grid, r, out);
        if (!out) throw IoError("failed writing average_ranks.csv");
        m.set("draws", std::to_string(c.draws));
        m.set("failed_draws", std::to_string(r.failed_draws));
        m.set("space_lower", c.space.lower());
        m.set("space_upper", c.space.upper());
        m.set("tol", c.design.tol);
    } else if (c.design_method == "e-optimal-at") {
        const AugmentedTrajectory aug = integrate_with_sensitivities(model, *c.design_theta, c.grid, c.substeps);
        const DesignWeights w = e_optimal_weights(observe(aug, model).second, c.design);
        selected = select_top_n(rank_times(w.lambda), c.n_points);
        auto out = open_output(c.output_dir / "weights.csv");
        write_design_csv(c.grid, w, out);
        if (!out) throw IoError("failed writing weights.csv");
        write_text(c.output_dir / "diagnostics.txt", design_diagnostics(w));
        m.set("theta", *c.design_theta);
        m.set("tol", c.design.tol);
    } else {
        selected = random_points(derive_seed(c.seed, {stream_tag("design-random")}), c.grid.count(), c.n_points);
    }
    write_points_file(c.grid, selected, c.output_dir / "selected_points.csv");
    m.write(c.output_dir / "manifest.txt");
    write_text(c.output_dir / "run.ini", config_ini(c));
    log << c.design_method << " selected t = " << format_vector([&] {
        Vector t(static_cast<Eigen::Index>(selected.size()));
        for (std::size_t i = 0; i < selected.size(); ++i) t[static_cast<Eigen::Index>(i)] = c.grid.point(selected[i]);
        return t;
    }()) << '\n';
}

void cmd_estimate(const RunConfig& c, std::ostream& log) {
    if (!c.data_file) throw ConfigError("estimator.data: a dataset file is required for estimate");
    const DynamicalModel model = model_by_name(c.model_name);
    const Dataset data = read_dataset(*c.data_file);
    if (!(data.grid == c.grid)) throw GridMismatch(c.data_file->string() + ": dataset grid differs from the config grid");
    if (!data.model_name.empty() && data.model_name != c.model_name)
        throw ConfigError("estimator.data: dataset was generated by model '" + data.model_name + "'");
    const EstimationResult r = least_squares_estimate(model, c.space, data, c.estimator_options());

    ensure_dir(c.output_dir);
    Manifest m;
    m.set("command", "estimate");
    m.set("model", c.model_name);
    m.set("data", c.data_file->string());
    m.set("seed", std::to_string(c.seed));
    m.set("starts", std::to_string(c.starts));
    m.set("theta_hat", r.theta_hat);
    m.set("sse", r.sse);
    m.set("converged", r.converged ? "true" : "false");
    if (data.truth.size() == r.theta_hat.size()) m.set("error", estimation_error(r.theta_hat, data.truth, c.metric));
    m.write(c.output_dir / "estimate.txt");
    write_text(c.output_dir / "run.ini", config_ini(c));
    log << "theta_hat = " << format_vector(r.theta_hat) << "\nsse = " << format_double(r.sse) << '\n';
}

std::vector<MethodSpec> resolve_methods(const RunConfig& c, std::ostream& log) {
    if (c.methods.empty()) throw ConfigError("bench.methods: no methods given");
    std::vector<MethodSpec> out;
    std::optional<std::vector<std::size_t>> eor_points;
    for (const MethodEntry& e : c.methods) {
        MethodSpec spec{e.name, e.kind, {}};
        if (e.kind == MethodKind::Eor) {
            if (!eor_points) {
                const EorResult r = eor_design(model_by_name(c.model_name), c.space, c.grid, c.eor_config());
                eor_points = r.selected;
                log << "eor points: " << format_vector(Eigen::Map<const Vector>(r.selected_times.data(),
                                                                               static_cast<Eigen::Index>(r.selected_times.size())))
                    << '\n';
            }
            spec.points = *eor_points;
        } else if (e.kind == MethodKind::ExternalPoints) {
            const fs::path& file = c.external.at(e.name);
            const CsvTable head = read_csv(file);
            const bool attention = std::find(head.header.begin(), head.header.end(), "weight") != head.header.end();
            spec.points = attention ? select_by_weight(read_attention(file, c.grid), c.n_points)
                                    : read_points_file(file, c.grid);
        }
        out.push_back(std::move(spec));
    }
    return out;
}

void cmd_bench(const RunConfig& c, std::ostream& log) {
    const std::vector<MethodSpec> methods = resolve_methods(c, log);
    const BenchReport report = run_benchmark(c.bench_config(), methods);
    emit_report(report, c.output_dir);
    try {
        write_text(c.output_dir / "run.ini", config_ini(c));
    } catch (...) {
        std::error_code ec;
        for (const char* f : {"summary.csv", "tukey.csv", "errors_long.csv", "selections.csv", "manifest.txt"})
            fs::remove(c.output_dir / f, ec);
        throw;
    }
    log << "bench: " << methods.size() << " methods x " << c.n_datasets << " datasets, " << report.missing_cells
        << " missing cells -> " << c.output_dir.string() << '\n';
    for (std::size_t k = 0; k < methods.size(); ++k)
        log << "  " << methods[k].name << " mean error " << format_double(report.summary[k].mean) << '\n';
}

void cmd_export_train_data(const RunConfig& c, std::ostream& log) {
    const DynamicalModel model = model_by_name(c.model_name);
    const std::size_t k = c.export_count;
    const auto n = static_cast<Eigen::Index>(c.grid.count());
    if (model.dim_output() != 1) throw ConfigError("export-train-data supports single-output models only");
    Matrix x(static_cast<Eigen::Index>(k), n);
    Matrix y(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(model.dim_param));
    constexpr std::uint64_t kAttempts = 10;

    parallel_for(k, c.threads, [&](std::size_t i) {
        for (std::uint64_t attempt = 0; attempt < kAttempts; ++attempt) {
            auto rng = make_rng(c.seed, {stream_tag("export-theta"), i, attempt});
            const ParamVector theta = c.space.sample(rng);
            try {
                ObservationSeries obs = observe(integrate(model, theta, c.grid, c.substeps), model);
                if (c.export_noisy) obs = add_noise(obs, c.sigma, derive_seed(c.seed, {stream_tag("export-noise"), i}));
                x.row(static_cast<Eigen::Index>(i)) = obs.values.col(0).transpose();
                y.row(static_cast<Eigen::Index>(i)) = theta.transpose();
                return;
            } catch (const NonFiniteState&) {
            }
        }
        throw TooManyFailures("export: row " + std::to_string(i) + " could not draw an integrable theta");
    });

    ensure_dir(c.output_dir);
    auto dump = [](const Matrix& mat, const fs::path& path) {
        auto out = open_output(path);
        for (Eigen::Index r = 0; r < mat.rows(); ++r) {
            for (Eigen::Index j = 0; j < mat.cols(); ++j) out << (j ? "," : "") << format_double(mat(r, j));
            out << '\n';
        }
        out.flush();
        if (!out) throw IoError("failed writing '" + path.string() + "'");
    };
    dump(x, c.output_dir / "X.csv");
    dump(y, c.output_dir / "Y.csv");

    Manifest m;
    m.set("command", "export-train-data");
    m.set("model", c.model_name);
    m.set("rows", std::to_string(k));
    m.set("grid_t_start", c.grid.t_start());
    m.set("grid_t_end", c.grid.t_end());
    m.set("grid_count", std::to_string(c.grid.count()));
    m.set("space_lower", c.space.lower());
    m.set("space_upper", c.space.upper());
    m.set("param_names", [&] {
        std::string s;
        for (std::size_t j = 0; j < model.param_names.size(); ++j) s += (j ? ", " : "") + model.param_names[j];
        return s;
    }());
    m.set("substeps", std::to_string(c.substeps));
    m.set("noisy", c.export_noisy ? "true" : "false");
    m.set("sigma", c.export_noisy ? c.sigma : 0.0);
    m.set("seed", std::to_string(c.seed));
    m.set("theta_stream", "derive_seed(seed, stream_tag(export-theta), row, attempt)");
    m.set("noise_stream", "derive_seed(seed, stream_tag(export-noise), row)");
    m.write(c.output_dir / "manifest.txt");
    write_text(c.output_dir / "run.ini", config_ini(c));
    log << "exported " << k << " sequences: X.csv " << k << "x" << n << ", Y.csv " << k << "x" << model.dim_param
        << '\n';
}

MethodSpec cmd_import_attention(const RunConfig& c, const fs::path& weights_file, const std::string& method_name,
                                std::ostream& log) {
    const Vector weights = read_attention(weights_file, c.grid);
    MethodSpec spec{method_name, MethodKind::ExternalPoints, select_by_weight(weights, c.n_points)};
    ensure_dir(c.output_dir);
    write_points_file(c.grid, spec.points, c.output_dir / "selected_points.csv");
    log << method_name << " points from " << weights_file.string() << ':';
    for (std::size_t i : spec.points) log << ' ' << format_double(c.grid.point(i));
    log << '\n';
    return spec;
}

}  // namespace oed
