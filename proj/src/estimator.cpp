#include "oed/estimator.hpp"

#include "oed/csv.hpp"
#include "oed/errors.hpp"
#include "oed/manifest.hpp"
#include "oed/models.hpp"
#include "oed/parallel.hpp"
#include "oed/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace oed {

std::vector<double> Dataset::times() const {
    std::vector<double> out;
    out.reserve(indices.size());
    for (std::size_t i : indices) out.push_back(grid.point(i));
    return out;
}

void Dataset::validate() const {
    if (indices.empty()) throw ConfigError("dataset has no sample times");
    for (std::size_t k = 0; k < indices.size(); ++k) {
        if (indices[k] >= grid.count()) throw ConfigError("dataset sample index outside its grid");
        if (k > 0 && indices[k] <= indices[k - 1]) throw ConfigError("dataset sample times must be strictly increasing");
    }
    if (static_cast<std::size_t>(observations.rows()) != indices.size())
        throw ConfigError("dataset observation count does not match its time count");
}

Dataset Dataset::restrict_to(const std::vector<std::size_t>& keep) const {
    Dataset out = *this;
    std::vector<std::size_t> sorted = keep;
    std::sort(sorted.begin(), sorted.end());
    out.indices = sorted;
    out.observations.resize(static_cast<Eigen::Index>(sorted.size()), observations.cols());
    for (std::size_t k = 0; k < sorted.size(); ++k) {
        const auto it = std::lower_bound(indices.begin(), indices.end(), sorted[k]);
        if (it == indices.end() || *it != sorted[k])
            throw ConfigError("restrict_to: grid index " + std::to_string(sorted[k]) + " not in dataset");
        out.observations.row(static_cast<Eigen::Index>(k)) =
            observations.row(static_cast<Eigen::Index>(it - indices.begin()));
    }
    out.validate();
    return out;
}

Dataset make_dataset(const ObservationSeries& series, ParamVector truth, std::string model_name, std::uint64_t seed) {
    Dataset d{series.grid, {}, series.values, std::move(truth), std::move(model_name), series.noise_sigma, seed};
    d.indices.resize(series.grid.count());
    std::iota(d.indices.begin(), d.indices.end(), std::size_t{0});
    d.validate();
    return d;
}

void write_dataset(const Dataset& data, const std::filesystem::path& csv_path) {
    data.validate();
    {
        auto out = open_output(csv_path);
        out << 't';
        for (Eigen::Index j = 0; j < data.observations.cols(); ++j) out << ",y" << (j + 1);
        out << '\n';
        for (std::size_t k = 0; k < data.indices.size(); ++k) {
            out << format_double(data.grid.point(data.indices[k]));
            for (Eigen::Index j = 0; j < data.observations.cols(); ++j)
                out << ',' << format_double(data.observations(static_cast<Eigen::Index>(k), j));
            out << '\n';
        }
        if (!out) throw IoError("failed writing '" + csv_path.string() + "'");
    }
    Manifest m;
    m.set("model", data.model_name);
    m.set("truth", data.truth);
    m.set("noise_sigma", data.noise_sigma);
    m.set("seed", std::to_string(data.seed));
    m.set("grid_t_start", data.grid.t_start());
    m.set("grid_t_end", data.grid.t_end());
    m.set("grid_count", std::to_string(data.grid.count()));
    m.write(csv_path.string() + ".manifest");
}

Dataset read_dataset(const std::filesystem::path& csv_path) {
    const Manifest m = Manifest::read(csv_path.string() + ".manifest");
    const TimeGrid grid(parse_double(m.require("grid_t_start"), "grid_t_start"),
                        parse_double(m.require("grid_t_end"), "grid_t_end"),
                        static_cast<std::size_t>(parse_double(m.require("grid_count"), "grid_count")));
    const CsvTable table = read_csv(csv_path);
    if (table.header.size() < 2 || table.header[0] != "t")
        throw ConfigError(csv_path.string() + ": expected header 't,y1..yq'");
    Dataset d{grid, {}, Matrix(static_cast<Eigen::Index>(table.rows.size()),
                               static_cast<Eigen::Index>(table.header.size() - 1)),
              parse_vector(m.require("truth"), "truth"), m.require("model"),
              parse_double(m.require("noise_sigma"), "noise_sigma"),
              static_cast<std::uint64_t>(std::stoull(m.require("seed")))};
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const double t = parse_double(table.rows[r][0], csv_path.string());
        const auto idx = grid.index_of(t);
        if (!idx) throw GridMismatch(csv_path.string() + ": time " + table.rows[r][0] + " is not on the dataset grid");
        d.indices.push_back(*idx);
        for (std::size_t j = 1; j < table.header.size(); ++j)
            d.observations(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j - 1)) =
                parse_double(table.rows[r][j], csv_path.string());
    }
    d.validate();
    return d;
}

double sse_objective(const DynamicalModel& model, const ParamVector& theta, const Dataset& data, int substeps) {
    if (static_cast<std::size_t>(data.observations.cols()) != model.dim_output())
        throw ConfigError("dataset output width does not match the model's observation map");
    try {
        const Trajectory traj = integrate_until(model, theta, data.grid, data.indices.back(), substeps);
        double sse = 0.0;
        for (std::size_t k = 0; k < data.indices.size(); ++k) {
            const auto row = static_cast<Eigen::Index>(data.indices[k]);
            for (std::size_t j = 0; j < model.dim_output(); ++j) {
                const double r = data.observations(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(j)) -
                                 traj.states(row, static_cast<Eigen::Index>(model.observe_indices[j]));
                sse += r * r;
            }
        }
        return std::isfinite(sse) ? sse : std::numeric_limits<double>::infinity();
    } catch (const NonFiniteState&) {
        return std::numeric_limits<double>::infinity();
    }
}

NelderMeadResult nelder_mead_box(const std::function<double(const Vector&)>& f, Vector start,
                                 const NelderMeadOptions& options) {
    const Eigen::Index m = start.size();
    auto project = [](Vector v) { return Vector(v.cwiseMax(0.0).cwiseMin(1.0)); };
    NelderMeadResult res;
    auto eval = [&](const Vector& x) {
        ++res.evaluations;
        const double v = f(x);
        return std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
    };

    std::vector<Vector> simplex;
    std::vector<double> values;
    simplex.push_back(project(std::move(start)));
    for (Eigen::Index j = 0; j < m; ++j) {
        Vector v = simplex.front();
        v[j] += v[j] + 0.1 <= 1.0 ? 0.1 : -0.1;
        simplex.push_back(std::move(v));
    }
    for (const Vector& v : simplex) values.push_back(eval(v));

    std::vector<std::size_t> order(simplex.size());
    auto sort_simplex = [&] {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
        std::vector<Vector> s;
        std::vector<double> v;
        for (std::size_t i : order) {
            s.push_back(std::move(simplex[i]));
            v.push_back(values[i]);
        }
        simplex = std::move(s);
        values = std::move(v);
    };
    auto diameter = [&] {
        double d = 0.0;
        for (std::size_t i = 1; i < simplex.size(); ++i)
            d = std::max(d, (simplex[i] - simplex[0]).cwiseAbs().maxCoeff());
        return d;
    };

    sort_simplex();
    int it = 0;
    for (; it < options.max_iter; ++it) {
        if (diameter() < options.xtol) {
            res.converged = true;
            break;
        }
        const std::size_t worst = simplex.size() - 1;
        Vector centroid = Vector::Zero(m);
        for (std::size_t i = 0; i < worst; ++i) centroid += simplex[i];
        centroid /= static_cast<double>(worst);

        const Vector xr = project(centroid + (centroid - simplex[worst]));
        const double fr = eval(xr);
        if (fr < values[0]) {
            const Vector xe = project(centroid + 2.0 * (centroid - simplex[worst]));
            const double fe = eval(xe);
            if (fe < fr) {
                simplex[worst] = xe;
                values[worst] = fe;
            } else {
                simplex[worst] = xr;
                values[worst] = fr;
            }
        } else if (fr < values[worst - 1]) {
            simplex[worst] = xr;
            values[worst] = fr;
        } else {
            const bool outside = fr < values[worst];
            const Vector xc = outside ? Vector(project(centroid + 0.5 * (xr - centroid)))
                                      : Vector(project(centroid + 0.5 * (simplex[worst] - centroid)));
            const double fc = eval(xc);
            if (fc < (outside ? fr : values[worst])) {
                simplex[worst] = xc;
                values[worst] = fc;
            } else {
                for (std::size_t i = 1; i < simplex.size(); ++i) {
                    simplex[i] = project(simplex[0] + 0.5 * (simplex[i] - simplex[0]));
                    values[i] = eval(simplex[i]);
                }
            }
        }
        sort_simplex();
    }
    res.iterations = it;
    res.x = simplex[0];
    res.value = values[0];
    return res;
}

Vector latin_start(std::uint64_t seed, std::size_t k, std::size_t dim) {
    constexpr std::size_t kBlock = 20;
    const std::size_t block = k / kBlock;
    const std::size_t slot = k % kBlock;
    Vector u(static_cast<Eigen::Index>(dim));
    for (std::size_t d = 0; d < dim; ++d) {
        auto perm_rng = make_rng(seed, {stream_tag("lhs-perm"), block, d});
        std::vector<std::size_t> perm(kBlock);
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        std::shuffle(perm.begin(), perm.end(), perm_rng);
        auto jitter_rng = make_rng(seed, {stream_tag("lhs-jitter"), block, slot, d});
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        u[static_cast<Eigen::Index>(d)] = (static_cast<double>(perm[slot]) + unit(jitter_rng)) / kBlock;
    }
    return u;
}

EstimationResult least_squares_estimate(const DynamicalModel& model, const ParameterSpace& space, const Dataset& data,
                                        const EstimatorOptions& options) {
    if (options.starts < 1) throw ConfigError("estimator needs at least one start");
    if (space.dim() != model.dim_param) throw ConfigError("parameter space dimension does not match the model");
    data.validate();

    auto objective = [&](const Vector& u) { return sse_objective(model, space.from_unit(u), data, options.substeps); };
    std::vector<NelderMeadResult> runs(options.starts);
    parallel_for(options.starts, options.threads, [&](std::size_t k) {
        runs[k] = nelder_mead_box(objective, latin_start(options.seed, k, space.dim()), options.local);
    });

    EstimationResult best;
    best.sse = std::numeric_limits<double>::infinity();
    best.starts_used = options.starts;
    std::size_t best_k = options.starts;
    for (std::size_t k = 0; k < runs.size(); ++k) {
        best.evaluations += runs[k].evaluations;
        if (runs[k].value < best.sse) {
            best.sse = runs[k].value;
            best_k = k;
        }
    }
    if (best_k == options.starts) throw AllStartsFailed("every least-squares start diverged");
    best.theta_hat = space.clamp(space.from_unit(runs[best_k].x));
    best.sse = sse_objective(model, best.theta_hat, data, options.substeps);
    best.converged = runs[best_k].converged;
    return best;
}

double estimation_error(const ParamVector& theta_hat, const ParamVector& truth, ErrorMetric metric) {
    if (theta_hat.size() != truth.size()) throw ConfigError("estimation_error: length mismatch");
    if (metric == ErrorMetric::Euclidean) return (theta_hat - truth).norm();
    return (theta_hat - truth).cwiseQuotient(truth.cwiseAbs()).norm();
}

}  // namespace oed
