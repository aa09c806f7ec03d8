#include "oed/bench.hpp"
#include "oed/commands.hpp"
#include "oed/config.hpp"
#include "oed/design.hpp"
#include "oed/eor.hpp"
#include "oed/errors.hpp"
#include "oed/estimator.hpp"
#include "oed/models.hpp"
#include "oed/stats.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <optional>
#include <sstream>

namespace py = pybind11;
using namespace oed;

namespace {

RunConfig config_with_overrides(const std::filesystem::path& path, const std::optional<std::filesystem::path>& out,
                                std::optional<std::uint64_t> seed, std::optional<int> threads) {
    RunConfig c = load_config(path);
    if (out) c.output_dir = *out;
    if (seed) c.seed = *seed;
    if (threads) c.threads = *threads;
    validate(c);
    return c;
}

std::string run_command(const std::string& name, const std::filesystem::path& config,
                        const std::optional<std::filesystem::path>& out, std::optional<std::uint64_t> seed,
                        std::optional<int> threads) {
    const RunConfig c = config_with_overrides(config, out, seed, threads);
    std::ostringstream log;
    py::gil_scoped_release release;
    if (name == "simulate") cmd_simulate(c, log);
    else if (name == "design") cmd_design(c, log);
    else if (name == "estimate") cmd_estimate(c, log);
    else if (name == "bench") cmd_bench(c, log);
    else if (name == "export-train-data") cmd_export_train_data(c, log);
    else throw ConfigError("unknown command '" + name + "'");
    return log.str();
}

py::dict design_dict(const DesignWeights& w) {
    py::dict d;
    d["weights"] = w.lambda;
    d["ranks"] = rank_times(w.lambda);
    d["t_value"] = w.t_value;
    d["gap"] = w.gap;
    d["scale"] = w.scale;
    d["iterations"] = w.iterations;
    d["converged"] = w.converged;
    d["rank_deficient"] = w.rank_deficient;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Optimal sampling-time design for ODE parameter estimation";

    auto base = py::register_exception<Error>(m, "OedError", PyExc_RuntimeError);
    py::register_exception<ConfigError>(m, "ConfigError", base);
    py::register_exception<NumericError>(m, "NumericError", base);
    py::register_exception<IoError>(m, "IoError", base);

    py::class_<TimeGrid>(m, "TimeGrid")
        .def(py::init<double, double, std::size_t>(), py::arg("t_start"), py::arg("t_end"), py::arg("count"))
        .def_property_readonly("t_start", &TimeGrid::t_start)
        .def_property_readonly("t_end", &TimeGrid::t_end)
        .def_property_readonly("count", &TimeGrid::count)
        .def("points", &TimeGrid::points)
        .def("__len__", &TimeGrid::count)
        .def("__repr__", [](const TimeGrid& g) {
            std::ostringstream os;
            os << "TimeGrid(" << g.t_start() << ", " << g.t_end() << ", " << g.count() << ")";
            return os.str();
        });

    py::class_<ParameterSpace>(m, "ParameterSpace")
        .def(py::init<Vector, Vector>(), py::arg("lower"), py::arg("upper"))
        .def_property_readonly("lower", &ParameterSpace::lower)
        .def_property_readonly("upper", &ParameterSpace::upper)
        .def_property_readonly("dim", &ParameterSpace::dim)
        .def("center", &ParameterSpace::center)
        .def("contains", &ParameterSpace::contains);

    py::class_<CaseStudy>(m, "CaseStudy")
        .def_property_readonly("model", [](const CaseStudy& c) { return c.model.name; })
        .def_property_readonly("param_names", [](const CaseStudy& c) { return c.model.param_names; })
        .def_readonly("space", &CaseStudy::space)
        .def_readonly("grid", &CaseStudy::grid);

    m.def("model_names", &model_names);
    m.def("case_study", [](const std::string& name) { return case_study(name); }, py::arg("model"));

    m.def(
        "simulate",
        [](const std::string& model, const Vector& theta, const TimeGrid& grid, int substeps) {
            return integrate(model_by_name(model), theta, grid, substeps).states;
        },
        py::arg("model"), py::arg("theta"), py::arg("grid"), py::arg("substeps") = kDefaultSubsteps,
        "State trajectory, one row per grid point.");

    m.def(
        "sensitivities",
        [](const std::string& model, const Vector& theta, const TimeGrid& grid, int substeps) {
            const DynamicalModel dm = model_by_name(model);
            const SensitivityRecord rec = observe(integrate_with_sensitivities(dm, theta, grid, substeps), dm).second;
            // rows: grid points; columns: observed output-major (q blocks of m)
            Matrix out(static_cast<Eigen::Index>(rec.size()), static_cast<Eigen::Index>(dm.dim_output() * dm.dim_param));
            for (std::size_t i = 0; i < rec.size(); ++i)
                out.row(static_cast<Eigen::Index>(i)) = rec.blocks[i].transpose().reshaped().transpose();
            return out;
        },
        py::arg("model"), py::arg("theta"), py::arg("grid"), py::arg("substeps") = kDefaultSubsteps,
        "Observed-output sensitivities dy/dθ, shape (N, q·m).");

    m.def(
        "e_optimal_design",
        [](const std::string& model, const Vector& theta, const TimeGrid& grid, const std::string& solver, double tol) {
            DesignOptions o;
            if (solver == "frank-wolfe") o.solver = DesignSolver::FrankWolfe;
            else if (solver != "interior-point") throw ConfigError("solver must be interior-point or frank-wolfe");
            o.tol = tol;
            const DynamicalModel dm = model_by_name(model);
            DesignWeights w;
            {
                py::gil_scoped_release release;
                w = e_optimal_weights(observe(integrate_with_sensitivities(dm, theta, grid), dm).second, o);
            }
            return design_dict(w);
        },
        py::arg("model"), py::arg("theta"), py::arg("grid"), py::arg("solver") = "interior-point",
        py::arg("tol") = DesignOptions{}.tol);

    m.def(
        "eor_design",
        [](const std::string& model, const ParameterSpace& space, const TimeGrid& grid, std::size_t draws,
           std::size_t n_select, std::uint64_t seed, int threads) {
            EorConfig c;
            c.draws = draws;
            c.n_select = n_select;
            c.seed = seed;
            c.threads = threads;
            c.keep_draws = false;
            const DynamicalModel dm = model_by_name(model);
            EorResult r;
            {
                py::gil_scoped_release release;
                r = eor_design(dm, space, grid, c);
            }
            py::dict d;
            d["selected"] = r.selected;
            d["selected_times"] = r.selected_times;
            d["average_ranks"] = r.average_ranks;
            d["failed_draws"] = r.failed_draws;
            return d;
        },
        py::arg("model"), py::arg("space"), py::arg("grid"), py::arg("draws") = 1000, py::arg("n_select") = 5,
        py::arg("seed") = 0, py::arg("threads") = 1);

    m.def(
        "estimate",
        [](const std::string& model, const ParameterSpace& space, const TimeGrid& grid, std::vector<std::size_t> indices,
           const Matrix& observations, std::size_t starts, std::uint64_t seed, int threads) {
            const DynamicalModel dm = model_by_name(model);
            Dataset d{grid, std::move(indices), observations, {}, model, 0.0, 0};
            EstimatorOptions o;
            o.starts = starts;
            o.seed = seed;
            o.threads = threads;
            EstimationResult r;
            {
                py::gil_scoped_release release;
                r = least_squares_estimate(dm, space, d, o);
            }
            py::dict out;
            out["theta_hat"] = r.theta_hat;
            out["sse"] = r.sse;
            out["converged"] = r.converged;
            out["evaluations"] = r.evaluations;
            return out;
        },
        py::arg("model"), py::arg("space"), py::arg("grid"), py::arg("indices"), py::arg("observations"),
        py::arg("starts") = 20, py::arg("seed") = 0, py::arg("threads") = 1,
        "Multi-start least squares from observations at the given grid indices (one row per index).");

    m.def("studentized_range_quantile", &studentized_range_quantile, py::arg("alpha"), py::arg("k"),
          py::arg("df") = kInfiniteDf);

    m.def(
        "tukey_hsd",
        [](const std::vector<std::vector<double>>& groups, const std::vector<std::string>& names, double alpha) {
            py::list out;
            for (const TukeyRecord& r : tukey_hsd(groups, names, alpha)) {
                py::dict d;
                d["group1"] = r.group1;
                d["group2"] = r.group2;
                d["meandiff"] = r.meandiff;
                d["p_adj"] = r.p_adj;
                d["lower"] = r.lower;
                d["upper"] = r.upper;
                d["reject"] = r.reject;
                out.append(d);
            }
            return out;
        },
        py::arg("groups"), py::arg("names"), py::arg("alpha") = 0.05);

    m.def("run_command", &run_command, py::arg("command"), py::arg("config"), py::arg("out") = py::none(),
          py::arg("seed") = py::none(), py::arg("threads") = py::none(),
          "Runs a CLI command (simulate, design, estimate, bench, export-train-data) and returns its log.");

    m.def(
        "import_attention",
        [](const std::filesystem::path& config, const std::filesystem::path& weights, const std::string& name,
           const std::optional<std::filesystem::path>& out) {
            const RunConfig c = config_with_overrides(config, out, std::nullopt, std::nullopt);
            std::ostringstream log;
            const MethodSpec spec = cmd_import_attention(c, weights, name, log);
            return times_of(c.grid, spec.points);
        },
        py::arg("config"), py::arg("weights"), py::arg("name") = "At-LSTM", py::arg("out") = py::none(),
        "Top-n times of a `t,weight` attention file; writes selected_points.csv.");
}
