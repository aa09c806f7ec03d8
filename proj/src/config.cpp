#include "oed/config.hpp"

#include "oed/csv.hpp"
#include "oed/errors.hpp"
#include "oed/manifest.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cmath>
#include <fstream>
#include <set>

namespace oed {
namespace pt = boost::property_tree;

RunConfig::RunConfig(const CaseStudy& defaults)
    : model_name(defaults.model.name), space(defaults.space), grid(defaults.grid) {}

std::filesystem::path RunConfig::resolve(const std::filesystem::path& p) const {
    return p.is_absolute() ? p : base_dir / p;
}

BenchConfig RunConfig::bench_config() const {
    BenchConfig b(model_name, space, grid);
    b.n_points = n_points;
    b.n_datasets = n_datasets;
    b.noise_sigma = sigma;
    b.seed = seed;
    b.estimator = estimator_options();
    b.design = design;
    b.metric = metric;
    b.alpha = alpha;
    b.max_missing_fraction = max_missing_fraction;
    b.threads = threads;
    return b;
}

EorConfig RunConfig::eor_config() const {
    EorConfig c;
    c.draws = draws;
    c.n_select = n_points;
    c.design = design;
    c.seed = seed;
    c.substeps = substeps;
    c.aggregation = aggregation;
    c.threads = threads;
    return c;
}

EstimatorOptions RunConfig::estimator_options() const {
    EstimatorOptions o;
    o.starts = starts;
    o.seed = seed;
    o.substeps = substeps;
    o.local = local;
    o.threads = threads;
    return o;
}

namespace {

using Schema = std::map<std::string, std::set<std::string>>;

const Schema& schema() {
    static const Schema s = {
        {"model", {"name"}},
        {"space", {"lower", "upper"}},
        {"grid", {"t_start", "t_end", "count"}},
        {"simulation", {"sigma", "substeps", "theta"}},
        {"design", {"method", "theta", "draws", "n_points", "solver", "tol", "max_iter", "aggregation"}},
        {"estimator", {"starts", "max_iter", "xtol", "metric", "data"}},
        {"bench", {"n_datasets", "methods", "alpha", "max_missing_fraction"}},
        {"export", {"count", "noisy"}},
        {"output", {"dir"}},
        {"run", {"seed", "threads"}},
    };
    return s;
}

class Reader {
public:
    explicit Reader(const pt::ptree& tree) : tree_(tree) {}

    std::optional<std::string> get(const std::string& section, const std::string& key) const {
        const auto sec = tree_.get_child_optional(section);
        if (!sec) return std::nullopt;
        const auto value = sec->get_optional<std::string>(pt::ptree::path_type(key, '\0'));
        if (!value) return std::nullopt;
        return split_fields(*value, '\n').front();
    }

    double number(const std::string& section, const std::string& key, double fallback) const {
        const auto v = get(section, key);
        return v ? parse_double(*v, section + "." + key) : fallback;
    }

    template <class Int>
    Int integer(const std::string& section, const std::string& key, Int fallback, long long min_value) const {
        const auto v = get(section, key);
        if (!v) return fallback;
        const std::string ctx = section + "." + key;
        std::size_t used = 0;
        long long parsed = 0;
        try {
            parsed = std::stoll(*v, &used);
        } catch (const std::exception&) {
            throw ConfigError(ctx + ": expected an integer, got '" + *v + "'");
        }
        if (used != v->size()) throw ConfigError(ctx + ": expected an integer, got '" + *v + "'");
        if (parsed < min_value) throw ConfigError(ctx + ": must be >= " + std::to_string(min_value));
        return static_cast<Int>(parsed);
    }

    std::optional<Vector> vector(const std::string& section, const std::string& key) const {
        const auto v = get(section, key);
        if (!v) return std::nullopt;
        return parse_vector(*v, section + "." + key);
    }

private:
    const pt::ptree& tree_;
};

MethodKind parse_kind(const std::string& text, const std::string& ctx) {
    if (text == "eor") return MethodKind::Eor;
    if (text == "random") return MethodKind::Random;
    if (text == "e-optimal" || text == "e-optimal-oracle") return MethodKind::EOptimalOracle;
    if (text == "external") return MethodKind::ExternalPoints;
    throw ConfigError(ctx + ": unknown method kind '" + text + "' (eor, random, e-optimal, external)");
}

bool parse_bool(const std::string& text, const std::string& ctx) {
    if (text == "true" || text == "1" || text == "yes") return true;
    if (text == "false" || text == "0" || text == "no") return false;
    throw ConfigError(ctx + ": expected true or false, got '" + text + "'");
}

}  // namespace

void validate(const RunConfig& c) {
    const DynamicalModel model = model_by_name(c.model_name);
    if (c.space.dim() != model.dim_param)
        throw ConfigError("space.lower: expected " + std::to_string(model.dim_param) + " bounds for model '" +
                          c.model_name + "', got " + std::to_string(c.space.dim()));
    if (!(c.sigma >= 0.0) || !std::isfinite(c.sigma)) throw ConfigError("simulation.sigma: must be finite and >= 0");
    if (c.substeps < 1) throw ConfigError("simulation.substeps: must be >= 1");
    const auto check_theta = [&](const ParamVector& theta, const std::string& key) {
        try {
            check_params(theta, model.dim_param);
        } catch (const ConfigError& e) {
            throw ConfigError(key + ": " + e.what());
        }
    };
    if (c.theta) {
        check_theta(*c.theta, "simulation.theta");
        if (!c.space.contains(*c.theta)) throw ConfigError("simulation.theta: outside the parameter space");
    }
    if (c.design_method != "eor" && c.design_method != "e-optimal-at" && c.design_method != "random")
        throw ConfigError("design.method: expected eor, e-optimal-at or random, got '" + c.design_method + "'");
    if (c.design_theta) check_theta(*c.design_theta, "design.theta");
    if (c.design_method == "e-optimal-at" && !c.design_theta)
        throw ConfigError("design.theta: required for method e-optimal-at");
    if (c.n_points < 1 || c.n_points > c.grid.count())
        throw ConfigError("design.n_points: must lie in [1, " + std::to_string(c.grid.count()) + "]");
    if (!(c.design.tol > 0.0)) throw ConfigError("design.tol: must be > 0");
    if (!(c.local.xtol > 0.0)) throw ConfigError("estimator.xtol: must be > 0");
    if (c.n_datasets < 2) throw ConfigError("bench.n_datasets: must be >= 2 (group statistics need two values)");
    if (!(c.alpha > 0.0 && c.alpha < 1.0)) throw ConfigError("bench.alpha: must lie in (0, 1)");
    if (!(c.max_missing_fraction >= 0.0 && c.max_missing_fraction < 1.0))
        throw ConfigError("bench.max_missing_fraction: must lie in [0, 1)");
    std::set<std::string> names;
    for (const MethodEntry& m : c.methods) {
        if (!names.insert(m.name).second) throw ConfigError("bench.methods: duplicate method name '" + m.name + "'");
        if (m.kind == MethodKind::ExternalPoints && !c.external.count(m.name))
            throw ConfigError("external." + m.name + ": no points file given for external method");
    }
    for (const auto& [name, path] : c.external)
        if (!names.count(name)) throw ConfigError("external." + name + ": no bench method with this name");
    if (c.threads < 0) throw ConfigError("run.threads: must be >= 0");
}

RunConfig parse_config(std::istream& in, const std::filesystem::path& base_dir) {
    pt::ptree tree;
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError("config line " + std::to_string(e.line()) + ": " + e.message());
    }
    for (const auto& [section, body] : tree) {
        if (body.empty() && !body.data().empty())
            throw ConfigError("config key '" + section + "' must appear inside a section");
        if (section == "external") continue;
        const auto known = schema().find(section);
        if (known == schema().end()) throw ConfigError("config: unknown section [" + section + "]");
        for (const auto& [key, value] : body)
            if (!known->second.count(key)) throw ConfigError("config: unknown key " + section + "." + key);
    }

    const Reader r(tree);
    const std::string model_name = r.get("model", "name").value_or("lotka-volterra");
    const DynamicalModel model = model_by_name(model_name);
    std::optional<CaseStudy> defaults;
    try {
        defaults = case_study(model_name);
    } catch (const ConfigError&) {
        // registered models have no case study: space and grid must be given
    }

    auto lower = r.vector("space", "lower");
    auto upper = r.vector("space", "upper");
    if (!lower || !upper) {
        if (!defaults) throw ConfigError("space.lower/space.upper: required for model '" + model_name + "'");
        if (!lower) lower = defaults->space.lower();
        if (!upper) upper = defaults->space.upper();
    }
    std::optional<ParameterSpace> space;
    try {
        space.emplace(*lower, *upper);
    } catch (const ConfigError& e) {
        throw ConfigError(std::string("space.lower/space.upper: ") + e.what());
    }

    const bool grid_given = r.get("grid", "t_start") || r.get("grid", "t_end") || r.get("grid", "count");
    if (!defaults && !(r.get("grid", "t_start") && r.get("grid", "t_end") && r.get("grid", "count")))
        throw ConfigError("grid.t_start/t_end/count: required for model '" + model_name + "'");
    std::optional<TimeGrid> grid;
    try {
        if (!grid_given) {
            grid.emplace(defaults->grid);
        } else {
            const double t0 = r.number("grid", "t_start", defaults ? defaults->grid.t_start() : 0.0);
            const double t1 = r.number("grid", "t_end", defaults ? defaults->grid.t_end() : 0.0);
            const auto n = r.integer<std::size_t>("grid", "count", defaults ? defaults->grid.count() : 0, 0);
            grid.emplace(t0, t1, n);
        }
    } catch (const ConfigError& e) {
        const std::string what = e.what();
        throw ConfigError(what.rfind("grid.", 0) == 0 ? what : "grid: " + what);
    }

    RunConfig c(CaseStudy{model, *space, *grid});
    c.base_dir = base_dir;

    c.sigma = r.number("simulation", "sigma", c.sigma);
    c.substeps = r.integer<int>("simulation", "substeps", c.substeps, 1);
    if (const auto v = r.get("simulation", "theta"); v && *v != "sample")
        c.theta = parse_vector(*v, "simulation.theta");

    c.design_method = r.get("design", "method").value_or(c.design_method);
    if (const auto v = r.get("design", "theta")) c.design_theta = parse_vector(*v, "design.theta");
    c.draws = r.integer<std::size_t>("design", "draws", c.draws, 1);
    c.n_points = r.integer<std::size_t>("design", "n_points", c.n_points, 1);
    if (const auto v = r.get("design", "solver")) {
        if (*v == "interior-point") c.design.solver = DesignSolver::InteriorPoint;
        else if (*v == "frank-wolfe") c.design.solver = DesignSolver::FrankWolfe;
        else throw ConfigError("design.solver: expected interior-point or frank-wolfe, got '" + *v + "'");
    }
    c.design.tol = r.number("design", "tol", c.design.tol);
    c.design.max_iter = r.integer<int>("design", "max_iter", c.design.max_iter, 1);
    if (const auto v = r.get("design", "aggregation")) {
        if (*v == "mean") c.aggregation = RankAggregation::Mean;
        else if (*v == "median") c.aggregation = RankAggregation::Median;
        else throw ConfigError("design.aggregation: expected mean or median, got '" + *v + "'");
    }

    c.starts = r.integer<std::size_t>("estimator", "starts", c.starts, 1);
    c.local.max_iter = r.integer<int>("estimator", "max_iter", c.local.max_iter, 1);
    c.local.xtol = r.number("estimator", "xtol", c.local.xtol);
    if (const auto v = r.get("estimator", "metric")) {
        if (*v == "euclidean") c.metric = ErrorMetric::Euclidean;
        else if (*v == "relative") c.metric = ErrorMetric::Relative;
        else throw ConfigError("estimator.metric: expected euclidean or relative, got '" + *v + "'");
    }
    if (const auto v = r.get("estimator", "data")) c.data_file = c.resolve(*v);

    c.n_datasets = r.integer<std::size_t>("bench", "n_datasets", c.n_datasets, 0);
    c.alpha = r.number("bench", "alpha", c.alpha);
    c.max_missing_fraction = r.number("bench", "max_missing_fraction", c.max_missing_fraction);
    if (const auto v = r.get("bench", "methods"); v && !v->empty()) {
        for (const std::string& item : split_fields(*v, ',')) {
            if (item.empty()) throw ConfigError("bench.methods: empty entry");
            const auto colon = item.find(':');
            if (colon == std::string::npos) throw ConfigError("bench.methods: expected name:kind, got '" + item + "'");
            const std::string name = split_fields(item.substr(0, colon), '\n').front();
            const std::string kind = split_fields(item.substr(colon + 1), '\n').front();
            if (name.empty() || name.find_first_of(" \t\"") != std::string::npos)
                throw ConfigError("bench.methods: invalid method name '" + name + "'");
            c.methods.push_back({name, parse_kind(kind, "bench.methods")});
        }
    }
    if (const auto ext = tree.get_child_optional("external")) {
        for (const auto& [name, value] : *ext)
            c.external[name] = c.resolve(split_fields(value.data(), '\n').front());
    }

    c.export_count = r.integer<std::size_t>("export", "count", c.export_count, 1);
    if (const auto v = r.get("export", "noisy")) c.export_noisy = parse_bool(*v, "export.noisy");

    if (const auto v = r.get("output", "dir")) c.output_dir = c.resolve(*v);
    else c.output_dir = c.resolve(c.output_dir);

    if (const auto v = r.get("run", "seed")) {
        try {
            std::size_t used = 0;
            c.seed = std::stoull(*v, &used);
            if (used != v->size() || v->front() == '-') throw std::invalid_argument("seed");
        } catch (const std::exception&) {
            throw ConfigError("run.seed: expected a non-negative integer, got '" + *v + "'");
        }
    }
    c.threads = r.integer<int>("run", "threads", c.threads, 0);

    validate(c);
    return c;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config '" + path.string() + "'");
    try {
        return parse_config(in, std::filesystem::absolute(path).parent_path());
    } catch (const ConfigError& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

}  // namespace oed
