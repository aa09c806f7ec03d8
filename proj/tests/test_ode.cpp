#include "oed/errors.hpp"
#include "oed/models.hpp"
#include "oed/ode.hpp"
#include "oed/rng.hpp"
#include "oracles/oracles.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <sstream>

using namespace oed;

namespace {

double max_rel_error(const std::vector<Matrix>& a, const std::vector<Matrix>& b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double scale = std::max(b[i].cwiseAbs().maxCoeff(), 1e-8);
        worst = std::max(worst, (a[i] - b[i]).cwiseAbs().maxCoeff() / scale);
    }
    return worst;
}


}  // namespace

TEST_CASE("Lotka-Volterra starts at (50, 50) and stays positive") {
    const CaseStudy cs = case_study("lotka-volterra");
    Vector theta(4);
    theta << 1.0, 0.05, 1.0, 0.05;
    const Trajectory tr = integrate(cs.model, theta, cs.grid);
    CHECK(tr.states.rows() == 101);
    CHECK(tr.states(0, 0) == 50.0);
    CHECK(tr.states(0, 1) == 50.0);
    CHECK(tr.states.minCoeff() > 0.0);
    // equilibrium (γ/δ, α/β) is a fixed point
    const DynamicalModel& m = cs.model;
    Vector eq(2);
    eq << 20.0, 20.0;
    double dx[2];
    m.vector_field(std::span<const double>(eq.data(), 2), std::span<const double>(theta.data(), 4), 0.0, dx);
    CHECK(std::abs(dx[0]) < 1e-12);
    CHECK(std::abs(dx[1]) < 1e-12);
}

TEST_CASE("three-compartment mass is conserved without elimination") {
    const CaseStudy cs = case_study("three-compartment");
    Vector theta(5);
    theta << 0.0, 0.7, 1.2, 0.4, 0.6;
    const Trajectory tr = integrate(cs.model, theta, cs.grid);
    for (Eigen::Index i = 0; i < tr.states.rows(); ++i) CHECK(tr.states.row(i).sum() == doctest::Approx(100.0).epsilon(1e-12));
}

TEST_CASE("three-compartment RK4 matches the matrix exponential at the box centre") {
    const CaseStudy cs = case_study("three-compartment");
    const Vector theta = cs.space.center();
    const Matrix exact = oracle::three_compartment_expm(theta, cs.model.initial_state, cs.grid.points());
    const Trajectory tr = integrate(cs.model, theta, cs.grid, 40);
    CHECK((tr.states - exact).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("RK4 error shrinks at fourth order") {
    const CaseStudy cs = case_study("three-compartment");
    const Vector theta = cs.space.center();
    const Matrix exact = oracle::three_compartment_expm(theta, cs.model.initial_state, cs.grid.points());
    const double e1 = (integrate(cs.model, theta, cs.grid, 10).states - exact).cwiseAbs().maxCoeff();
    const double e2 = (integrate(cs.model, theta, cs.grid, 20).states - exact).cwiseAbs().maxCoeff();
    const double order = std::log2(e1 / e2);
    CHECK(order > 3.6);
    CHECK(order < 4.2);
}

TEST_CASE("forward sensitivities agree with central differences") {
    for (const char* name : {"lotka-volterra", "three-compartment"}) {
        const CaseStudy cs = case_study(name);
        auto rng = make_rng(11, {stream_tag(name)});
        for (int draw = 0; draw < 3; ++draw) {
            const Vector theta = cs.space.sample(rng);
            const AugmentedTrajectory aug = integrate_with_sensitivities(cs.model, theta, cs.grid);
            const auto fd = finite_difference_sensitivity(cs.model, theta, cs.grid, 1e-5);
            CHECK(max_rel_error(aug.sensitivities, fd) < 1e-4);
            // the state part of the augmented run equals the plain run
            CHECK((aug.trajectory.states - integrate(cs.model, theta, cs.grid).states).cwiseAbs().maxCoeff() < 1e-9);
        }
    }
}

TEST_CASE("observe selects the observed coordinate") {
    const CaseStudy cs = case_study("lotka-volterra");
    const Vector theta = cs.space.center();
    const AugmentedTrajectory aug = integrate_with_sensitivities(cs.model, theta, cs.grid);
    const auto [series, record] = observe(aug, cs.model);
    CHECK(series.values.cols() == 1);
    CHECK((series.values.col(0) - aug.trajectory.states.col(1)).norm() == 0.0);
    CHECK(record.size() == 101);
    CHECK(record.blocks[7].rows() == 1);
    CHECK((record.blocks[7].row(0) - aug.sensitivities[7].row(1)).norm() == 0.0);
}

TEST_CASE("noise: zero sigma is identity, fixed seed is reproducible, moments are right") {
    const TimeGrid g(0.0, 1.0, 100001);
    ObservationSeries s{g, Matrix::Zero(100001, 1), 0.0};
    const ObservationSeries same = add_noise(s, 0.0, 5);
    CHECK(same.values == s.values);
    const ObservationSeries a = add_noise(s, 1.0, 5);
    const ObservationSeries b = add_noise(s, 1.0, 5);
    CHECK(a.values == b.values);
    CHECK(a.noise_sigma == 1.0);
    const double mean = a.values.mean();
    const double sd = std::sqrt((a.values.array() - mean).square().sum() / (a.values.size() - 1));
    CHECK(std::abs(mean) < 0.02);
    CHECK(std::abs(sd - 1.0) < 0.02);
    CHECK_THROWS_AS(add_noise(s, -1.0, 5), ConfigError);
}

TEST_CASE("blow-up is reported with the offending parameters") {
    const DynamicalModel m = testing::blowup_model();
    const TimeGrid g(0.0, 2.0, 21);
    Vector theta(1);
    theta << 1.0;
    try {
        integrate(m, theta, g);
        FAIL("expected NonFiniteState");
    } catch (const NonFiniteState& e) {
        CHECK(std::string(e.what()).find("theta") != std::string::npos);
        CHECK(e.exit_code() == 3);
    }
    theta << 0.1;
    CHECK_NOTHROW(integrate(m, theta, g));
}

TEST_CASE("trajectory csv has a header and one row per grid point") {
    const CaseStudy cs = case_study("lotka-volterra");
    std::ostringstream os;
    write_trajectory_csv(integrate(cs.model, cs.space.center(), cs.grid), os);
    std::istringstream is(os.str());
    std::string line;
    std::getline(is, line);
    CHECK(line == "t,x0,x1");
    std::getline(is, line);
    CHECK(line == "0,50,50");
    int rows = 1;
    while (std::getline(is, line)) ++rows;
    CHECK(rows == 101);
}

TEST_CASE("unknown models and wrong parameter lengths are rejected") {
    CHECK_THROWS_AS(model_by_name("sir"), ConfigError);
    const CaseStudy cs = case_study("lotka-volterra");
    CHECK_THROWS_AS(integrate(cs.model, Vector::Ones(3), cs.grid), ConfigError);
}
