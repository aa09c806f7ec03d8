#include "oed/eor.hpp"
#include "oed/errors.hpp"
#include "oed/models.hpp"
#include "support.hpp"

#include <doctest.h>

#include <algorithm>
#include <sstream>

using namespace oed;

namespace {

EorConfig small_config(std::size_t draws, int threads) {
    EorConfig c;
    c.draws = draws;
    c.seed = 42;
    c.threads = threads;
    return c;
}

}  // namespace

TEST_CASE("a single draw reproduces the E-optimal ranking at that draw") {
    const CaseStudy cs = case_study("lotka-volterra");
    const EorResult r = eor_design(cs.model, cs.space, cs.grid, small_config(1, 1));
    REQUIRE(r.per_draw_theta.size() == 1);
    const auto aug = integrate_with_sensitivities(cs.model, r.per_draw_theta[0], cs.grid);
    const DesignWeights w = e_optimal_weights(observe(aug, cs.model).second);
    const Vector ranks = rank_times(w.lambda);
    CHECK((r.average_ranks - ranks).cwiseAbs().maxCoeff() == 0.0);
    CHECK(r.selected == select_top_n(ranks, 5));
    CHECK(cs.space.contains(r.per_draw_theta[0]));
}

TEST_CASE("EOR does not depend on the thread count") {
    const CaseStudy cs = case_study("three-compartment");
    const EorResult a = eor_design(cs.model, cs.space, cs.grid, small_config(12, 1));
    const EorResult b = eor_design(cs.model, cs.space, cs.grid, small_config(12, 3));
    CHECK(a.selected == b.selected);
    CHECK((a.average_ranks - b.average_ranks).cwiseAbs().maxCoeff() == 0.0);
    for (std::size_t j = 0; j < 12; ++j) CHECK(a.per_draw_theta[j] == b.per_draw_theta[j]);
}

TEST_CASE("mid-ranks always sum to N(N+1)/2") {
    const CaseStudy cs = case_study("lotka-volterra");
    const EorResult r = eor_design(cs.model, cs.space, cs.grid, small_config(6, 1));
    const double total = 101.0 * 102.0 / 2.0;
    for (const Vector& ranks : r.per_draw_ranks) CHECK(ranks.sum() == doctest::Approx(total).epsilon(1e-12));
    CHECK(r.average_ranks.sum() == doctest::Approx(total).epsilon(1e-12));
    CHECK(r.selected_times.size() == 5);
    CHECK(std::is_sorted(r.selected.begin(), r.selected.end()));
}

TEST_CASE("rank aggregation ignores the order of the draws") {
    const TimeGrid g(0.0, 1.0, 4);
    std::vector<Vector> ranks(3, Vector(4));
    ranks[0] << 1, 2, 3, 4;
    ranks[1] << 2, 1, 4, 3;
    ranks[2] << 4, 1, 2, 3;
    const EorResult a = aggregate_ranks(g, ranks, 2);
    std::reverse(ranks.begin(), ranks.end());
    const EorResult b = aggregate_ranks(g, ranks, 2);
    CHECK(a.average_ranks == b.average_ranks);
    CHECK(a.selected == std::vector<std::size_t>{0, 1});
    CHECK(a.average_ranks[1] == doctest::Approx(4.0 / 3.0));

    const EorResult med = aggregate_ranks(g, ranks, 1, RankAggregation::Median);
    CHECK(med.average_ranks[0] == 2.0);
    CHECK(med.average_ranks[1] == 1.0);
    CHECK(med.selected == std::vector<std::size_t>{1});
}

TEST_CASE("tied average ranks select the earliest points") {
    const TimeGrid g(0.0, 1.0, 5);
    const EorResult r = aggregate_ranks(g, {Vector::Constant(5, 3.0)}, 3);
    CHECK(r.selected == std::vector<std::size_t>{0, 1, 2});
}

TEST_CASE("blown-up draws are redrawn, and persistent blow-up is fatal") {
    const DynamicalModel m = testing::blowup_model();
    const TimeGrid g(0.0, 2.0, 21);
    EorConfig c = small_config(8, 1);
    c.n_select = 2;
    // θ > 0.5 blows up before t = 2
    const EorResult ok = eor_design(m, ParameterSpace(Vector::Constant(1, 0.1), Vector::Constant(1, 0.7)), g, c);
    CHECK(ok.failed_draws > 0);
    CHECK(ok.per_draw_theta.size() == 8);
    for (const auto& th : ok.per_draw_theta) CHECK(th[0] <= 0.5);

    CHECK_THROWS_AS(eor_design(m, ParameterSpace(Vector::Constant(1, 1.0), Vector::Constant(1, 2.0)), g, c),
                    TooManyFailures);
}

TEST_CASE("EOR csv marks the selected rows") {
    const TimeGrid g(0.0, 1.0, 3);
    Vector r(3);
    r << 2, 1, 3;
    const EorResult res = aggregate_ranks(g, {r}, 1);
    std::ostringstream os;
    write_eor_csv(g, res, os);
    CHECK(os.str() == "t,average_rank,selected\n0,2,false\n0.5,1,true\n1,3,false\n");
}
