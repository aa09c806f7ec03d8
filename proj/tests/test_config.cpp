#include "oed/commands.hpp"
#include "oed/config.hpp"
#include "oed/errors.hpp"
#include "support.hpp"

#include <doctest.h>

#include <fstream>
#include <sstream>

using namespace oed;

namespace {

RunConfig parse(const std::string& text, const std::filesystem::path& base = ".") {
    std::istringstream in(text);
    return parse_config(in, base);
}

std::string error_of(const std::string& text) {
    try {
        parse(text);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST_CASE("defaults come from the model's case study") {
    const RunConfig c = parse("[model]\nname = three-compartment\n");
    CHECK(c.grid == TimeGrid(0.0, 25.0, 101));
    CHECK(c.space.dim() == 5);
    CHECK(c.draws == 1000);
    CHECK(c.n_datasets == 1000);
    CHECK(c.sigma == 1.0);
    CHECK_FALSE(c.theta.has_value());
    CHECK(c.design.solver == DesignSolver::InteriorPoint);
}

TEST_CASE("a full configuration is read") {
    const RunConfig c = parse(
        "[model]\nname = lotka-volterra\n"
        "[space]\nlower = 0.6,0.02,0.6,0.02\nupper = 1.4,0.09,1.4,0.09\n"
        "[grid]\nt_start = 0\nt_end = 5\ncount = 51\n"
        "[simulation]\nsigma = 0.5\ntheta = sample\n"
        "[design]\ndraws = 30\nn_points = 4\nsolver = frank-wolfe\naggregation = median\n"
        "[estimator]\nstarts = 7\nmetric = relative\n"
        "[bench]\nn_datasets = 12\nmethods = EOR:eor, Random:random, Eopt:e-optimal, Att:external\n"
        "[external]\nAtt = att.csv\n"
        "[output]\ndir = results\n"
        "[run]\nseed = 99\nthreads = 2\n",
        "/base");
    CHECK(c.grid == TimeGrid(0.0, 5.0, 51));
    CHECK(c.space.upper()[1] == 0.09);
    CHECK(c.sigma == 0.5);
    CHECK(c.draws == 30);
    CHECK(c.n_points == 4);
    CHECK(c.design.solver == DesignSolver::FrankWolfe);
    CHECK(c.aggregation == RankAggregation::Median);
    CHECK(c.starts == 7);
    CHECK(c.metric == ErrorMetric::Relative);
    REQUIRE(c.methods.size() == 4);
    CHECK(c.methods[2].name == "Eopt");
    CHECK(c.methods[2].kind == MethodKind::EOptimalOracle);
    CHECK(c.external.at("Att") == std::filesystem::path("/base/att.csv"));
    CHECK(c.output_dir == std::filesystem::path("/base/results"));
    CHECK(c.seed == 99);
    CHECK(c.threads == 2);

    const BenchConfig b = c.bench_config();
    CHECK(b.n_datasets == 12);
    CHECK(b.estimator.starts == 7);
    CHECK(b.seed == 99);
    CHECK(c.eor_config().draws == 30);
}

TEST_CASE("bad configurations name the offending key") {
    const std::vector<std::pair<std::string, std::string>> cases = {
        {"[model]\nname = lotka-volterra\ncolour = red\n", "model.colour"},
        {"[nonsense]\nx = 1\n", "nonsense"},
        {"[model]\nname = nope\n", "nope"},
        {"[space]\nlower = 1,1,1,1\nupper = 0,2,2,2\n", "space"},
        {"[space]\nlower = 0,0,0\nupper = 1,1,1\n", "space"},
        {"[grid]\ncount = 1\n", "grid"},
        {"[grid]\nt_start = 5\nt_end = 1\n", "grid"},
        {"[simulation]\nsigma = -1\n", "simulation.sigma"},
        {"[simulation]\ntheta = 1,2\n", "simulation.theta"},
        {"[design]\nn_points = 0\n", "design.n_points"},
        {"[design]\nsolver = simplex\n", "design.solver"},
        {"[design]\nmethod = e-optimal-at\n", "design.theta"},
        {"[estimator]\nstarts = x\n", "estimator.starts"},
        {"[bench]\nn_datasets = 1\n", "bench.n_datasets"},
        {"[bench]\nmethods = a:eor,a:random\n", "bench.methods"},
        {"[bench]\nmethods = a:magic\n", "bench.methods"},
        {"[bench]\nmethods = a:external\n", "external.a"},
        {"[bench]\nalpha = 1.5\n", "bench.alpha"},
        {"[run]\nseed = -3\n", "run.seed"},
        {"[run]\nthreads = -1\n", "run.threads"},
    };
    for (const auto& [text, key] : cases) {
        CAPTURE(text);
        const std::string msg = error_of(text);
        CHECK(msg.find(key) != std::string::npos);
    }
}

TEST_CASE("load_config prefixes errors with the file and resolves paths beside it") {
    const auto dir = testing::scratch_dir("config");
    std::ofstream(dir / "ok.ini") << "[estimator]\ndata = obs.csv\n";
    CHECK(load_config(dir / "ok.ini").data_file == std::filesystem::absolute(dir) / "obs.csv");
    std::ofstream(dir / "bad.ini") << "[run]\nspeed = 3\n";
    try {
        load_config(dir / "bad.ini");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("bad.ini") != std::string::npos);
        CHECK(e.exit_code() == 2);
    }
    CHECK_THROWS_AS(load_config(dir / "missing.ini"), IoError);
}

TEST_CASE("config echo reloads to the same configuration") {
    const RunConfig c = parse("[model]\nname = three-compartment\n[design]\ndraws = 7\n[run]\nseed = 5\n");
    const RunConfig back = parse(config_ini(c));
    CHECK(back.model_name == c.model_name);
    CHECK(back.draws == 7);
    CHECK(back.seed == 5);
    CHECK(back.grid == c.grid);
    CHECK(back.space.lower() == c.space.lower());
}

TEST_CASE("importing the attention fixture selects its peak") {
    const RunConfig c = parse("[model]\nname = lotka-volterra\n");
    const Vector w = read_attention(testing::fixture("attention_lv.csv"), c.grid);
    CHECK(w.sum() == doctest::Approx(1.0).epsilon(1e-9));
    const auto top = select_by_weight(w, 5);
    CHECK(times_of(c.grid, top) == std::vector<double>{c.grid.point(10), c.grid.point(11), c.grid.point(12),
                                                        c.grid.point(13), c.grid.point(14)});
}

TEST_CASE("attention import rules") {
    CHECK(select_by_weight(Vector::Constant(8, 0.125), 3) == std::vector<std::size_t>{0, 1, 2});
    Vector w(4);
    w << 0.1, 0.4, 0.4, 0.1;
    CHECK(select_by_weight(w, 1) == std::vector<std::size_t>{1});

    const TimeGrid grid(0.0, 10.0, 101);
    const auto dir = testing::scratch_dir("attention");
    {
        std::ofstream out(dir / "short.csv");
        out << "t,weight\n";
        for (int i = 0; i < 100; ++i) out << grid.point(static_cast<std::size_t>(i)) << ",0.01\n";
    }
    CHECK_THROWS_AS(read_attention(dir / "short.csv", grid), GridMismatch);
    {
        std::ofstream out(dir / "offgrid.csv");
        out << "t,weight\n";
        for (int i = 0; i < 101; ++i) out << grid.point(static_cast<std::size_t>(i)) + (i == 50 ? 0.05 : 0.0) << ",0.01\n";
    }
    CHECK_THROWS_AS(read_attention(dir / "offgrid.csv", grid), GridMismatch);
}

TEST_CASE("points files round trip and reject off-grid times") {
    const TimeGrid grid(0.0, 25.0, 101);
    const auto dir = testing::scratch_dir("points");
    write_points_file(grid, {1, 2, 15, 16, 17}, dir / "p.csv");
    CHECK(read_points_file(dir / "p.csv", grid) == std::vector<std::size_t>{1, 2, 15, 16, 17});
    std::ofstream(dir / "bad.csv") << "t\n0.3\n";
    CHECK_THROWS_AS(read_points_file(dir / "bad.csv", grid), GridMismatch);
}

TEST_CASE("training export writes headerless X and Y") {
    const auto dir = testing::scratch_dir("export");
    RunConfig c = parse("[model]\nname = lotka-volterra\n[export]\ncount = 3\n");
    c.output_dir = dir;
    std::ostringstream log;
    cmd_export_train_data(c, log);
    const CsvTable x = read_csv(dir / "X.csv", false);
    const CsvTable y = read_csv(dir / "Y.csv", false);
    REQUIRE(x.rows.size() == 3);
    REQUIRE(y.rows.size() == 3);
    CHECK(x.rows[0].size() == 101);
    CHECK(y.rows[0].size() == 4);
    CHECK(parse_double(x.rows[0][0], "X") == 50.0);
    for (const auto& row : y.rows)
        for (std::size_t j = 0; j < 4; ++j) {
            const double v = parse_double(row[j], "Y");
            CHECK(v >= c.space.lower()[static_cast<Eigen::Index>(j)]);
            CHECK(v <= c.space.upper()[static_cast<Eigen::Index>(j)]);
        }
    CHECK(std::filesystem::exists(dir / "manifest.txt"));

    // same seed, same export
    const auto dir2 = testing::scratch_dir("export-2");
    c.output_dir = dir2;
    cmd_export_train_data(c, log);
    CHECK(read_csv(dir2 / "X.csv", false).rows == x.rows);
}

TEST_CASE("simulate and estimate commands") {
    const auto dir = testing::scratch_dir("simulate");
    RunConfig c = parse("[model]\nname = lotka-volterra\n[simulation]\nsigma = 0\ntheta = 1,0.05,1,0.05\n");
    c.output_dir = dir;
    std::ostringstream log;
    cmd_simulate(c, log);
    CHECK(std::filesystem::exists(dir / "trajectory.csv"));
    CHECK(std::filesystem::exists(dir / "observations.csv"));
    CHECK(std::filesystem::exists(dir / "run.ini"));

    c.data_file = dir / "observations.csv";
    c.starts = 4;
    cmd_estimate(c, log);
    const std::string text = [&] {
        std::ifstream in(dir / "estimate.txt");
        std::ostringstream os;
        os << in.rdbuf();
        return os.str();
    }();
    CHECK(text.find("theta_hat") != std::string::npos);
}
