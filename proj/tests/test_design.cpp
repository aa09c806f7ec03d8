#include "oed/design.hpp"
#include "oed/errors.hpp"
#include "oed/models.hpp"
#include "oed/rng.hpp"
#include "oracles/oracles.hpp"
#include "support.hpp"

#include <doctest.h>

#include <map>
#include <numeric>
#include <sstream>

using namespace oed;

namespace {

Matrix random_symmetric(std::mt19937_64& rng, Eigen::Index n) {
    std::normal_distribution<double> z;
    Matrix a(n, n);
    for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = z(rng);
    return 0.5 * (a + a.transpose());
}

std::vector<Matrix> fixture_blocks(int instance) {
    const CsvTable t = read_csv(testing::fixture("design_atoms.csv"));
    std::vector<Matrix> blocks;
    for (const auto& row : t.rows) {
        if (std::stoi(row[0]) != instance) continue;
        Matrix b(1, 3);
        for (int k = 0; k < 3; ++k) b(0, k) = parse_double(row[2 + static_cast<std::size_t>(k)], "design_atoms");
        blocks.push_back(b);
    }
    return blocks;
}

double fixture_t(int instance) {
    const CsvTable t = read_csv(testing::fixture("design_reference.csv"));
    return parse_double(t.rows.at(static_cast<std::size_t>(instance))[1], "design_reference");
}

}  // namespace

TEST_CASE("Jacobi eigenvalues match the characteristic-polynomial roots") {
    std::mt19937_64 rng(4);
    for (int trial = 0; trial < 200; ++trial) {
        const Matrix a = random_symmetric(rng, 3);
        const SymmetricEigen e = jacobi_eigen(a);
        const auto ref = oracle::symmetric3_eigenvalues(a);
        for (int k = 0; k < 3; ++k) CHECK(e.values[k] == doctest::Approx(ref[static_cast<std::size_t>(k)]).epsilon(1e-10).scale(1.0));
        CHECK((a * e.vectors - e.vectors * e.values.asDiagonal()).norm() < 1e-10);
    }
}

TEST_CASE("Jacobi handles repeated eigenvalues and larger matrices") {
    const SymmetricEigen e = jacobi_eigen(Matrix::Identity(5, 5) * 2.0);
    CHECK((e.values.array() - 2.0).abs().maxCoeff() < 1e-15);
    std::mt19937_64 rng(9);
    const Matrix a = random_symmetric(rng, 5);
    const EigenPair p = min_eigenpair(a);
    const Eigen::SelfAdjointEigenSolver<Matrix> ref(a);
    CHECK(p.value == doctest::Approx(ref.eigenvalues()[0]).epsilon(1e-12));
    CHECK(p.vector.norm() == doctest::Approx(1.0));
}

TEST_CASE("mid-ranks with ties") {
    Vector lambda(5);
    lambda << 0.1, 0.4, 0.1, 0.4, 0.0;
    const Vector r = rank_times(lambda);
    CHECK(r[1] == 1.5);
    CHECK(r[3] == 1.5);
    CHECK(r[0] == 3.5);
    CHECK(r[2] == 3.5);
    CHECK(r[4] == 5.0);
    CHECK(r.sum() == 15.0);
    const auto top = select_top_n(r, 3);
    CHECK(top == std::vector<std::size_t>{0, 1, 3});
    CHECK_THROWS_AS(select_top_n(r, 6), ConfigError);
    CHECK_THROWS_AS(select_top_n(r, 0), ConfigError);
}

TEST_CASE("uniform weights rank every point equally and select the earliest") {
    const Vector r = rank_times(Vector::Constant(101, 1.0 / 101));
    CHECK((r.array() == 51.0).all());
    CHECK(select_top_n(r, 5) == std::vector<std::size_t>{0, 1, 2, 3, 4});
}

TEST_CASE("E-optimal weights reach the simplex-grid optimum (commuting atoms)") {
    for (std::uint64_t seed : {1u, 2u}) {
        const auto blocks = testing::commuting_blocks(seed, 10, 3);
        const SensitivityRecord rec = testing::record_of(blocks);
        std::vector<Matrix> atoms;
        for (std::size_t i = 0; i < blocks.size(); ++i) atoms.push_back(atomic_information(rec, i));
        const auto grid = oracle::simplex_grid_search(atoms, 200);
        const DesignWeights w = e_optimal_weights(rec);
        CHECK(w.converged);
        CHECK(std::abs(w.t_value - grid.value) < 1e-3);
        CHECK(w.t_value >= grid.value - 1e-12);
        CHECK(w.lambda.minCoeff() >= 0.0);
        CHECK(w.lambda.sum() == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("E-optimal value matches the SDP reference on rank-one atoms") {
    for (int inst = 0; inst < 20; ++inst) {
        const SensitivityRecord rec = testing::record_of(fixture_blocks(inst));
        const DesignWeights w = e_optimal_weights(rec);
        CHECK(w.converged);
        CHECK(w.gap <= 1e-9);
        CHECK(w.t_value == doctest::Approx(fixture_t(inst)).epsilon(1e-7));
        // λ_min of the returned weights is the reported value
        CHECK(min_eigenpair(fim_from_weights(rec, w.lambda).matrix).value == doctest::Approx(w.t_value).epsilon(1e-12));
    }
}

TEST_CASE("Frank-Wolfe gap checkpoints never increase") {
    DesignOptions opt;
    opt.solver = DesignSolver::FrankWolfe;
    opt.tol = 1e-12;
    opt.max_iter = 3000;
    const DesignWeights w = e_optimal_weights(testing::record_of(fixture_blocks(0)), opt);
    REQUIRE(w.gap_checkpoints.size() >= 10);
    for (std::size_t k = 1; k < w.gap_checkpoints.size(); ++k)
        CHECK(w.gap_checkpoints[k] <= w.gap_checkpoints[k - 1]);
    CHECK(w.t_value == doctest::Approx(fixture_t(0)).epsilon(1e-2));
}

TEST_CASE("degenerate records") {
    SUBCASE("one informative point takes all the weight") {
        std::vector<Matrix> blocks(4, Matrix::Zero(1, 1));
        blocks[2](0, 0) = 3.0;
        const DesignWeights w = e_optimal_weights(testing::record_of(blocks));
        CHECK(w.converged);
        CHECK(w.lambda[2] == doctest::Approx(1.0).epsilon(1e-8));
        CHECK(w.t_value == doctest::Approx(9.0).epsilon(1e-8));
    }
    SUBCASE("all-zero sensitivities give uniform weights") {
        const DesignWeights w = e_optimal_weights(testing::record_of(std::vector<Matrix>(6, Matrix::Zero(1, 2))));
        CHECK(w.rank_deficient);
        CHECK((w.lambda.array() == 1.0 / 6.0).all());
    }
    SUBCASE("rank-deficient information is flagged") {
        std::vector<Matrix> blocks;
        for (int i = 0; i < 6; ++i) {
            Matrix b(1, 3);
            b << 1.0 + i, 2.0 * (1.0 + i), 0.5 * i;  // third direction unreachable beyond span of two
            blocks.push_back(b);
        }
        blocks[0] << 1.0, 2.0, 0.0;
        for (auto& b : blocks) b(0, 1) = 2.0 * b(0, 0);
        const DesignWeights w = e_optimal_weights(testing::record_of(blocks));
        CHECK(w.rank_deficient);
        CHECK(w.lambda.sum() == doctest::Approx(1.0));
    }
}

TEST_CASE("weights are invariant to rescaling the sensitivities") {
    const auto blocks = fixture_blocks(3);
    std::vector<Matrix> scaled;
    std::vector<Matrix> pow2;
    for (const auto& b : blocks) {
        scaled.push_back(b * 1e4);
        pow2.push_back(b * 4096.0);
    }
    const DesignWeights a = e_optimal_weights(testing::record_of(blocks));
    const DesignWeights b = e_optimal_weights(testing::record_of(scaled));
    const DesignWeights c = e_optimal_weights(testing::record_of(pow2));
    // exact scaling leaves the normalized problem bit-identical
    CHECK((a.lambda - c.lambda).cwiseAbs().maxCoeff() == 0.0);
    CHECK(b.t_value == doctest::Approx(a.t_value * 1e8).epsilon(1e-7));
    CHECK(select_top_n(rank_times(a.lambda), 3) == select_top_n(rank_times(b.lambda), 3));
}

TEST_CASE("case-study designs converge to a small certified gap") {
    for (const char* name : {"lotka-volterra", "three-compartment"}) {
        const CaseStudy cs = case_study(name);
        auto rng = make_rng(21, {stream_tag(name)});
        const Vector theta = cs.space.sample(rng);
        const auto [series, rec] = observe(integrate_with_sensitivities(cs.model, theta, cs.grid), cs.model);
        const DesignWeights w = e_optimal_weights(rec);
        CHECK(w.converged);
        CHECK(w.gap <= 1e-6);
        CHECK(w.lambda.minCoeff() > 0.0);
    }
}

TEST_CASE("design csv and diagnostics") {
    const DesignWeights w = e_optimal_weights(testing::record_of(fixture_blocks(1)));
    std::ostringstream os;
    write_design_csv(TimeGrid(0.0, 0.9, 10), w, os);
    CHECK(os.str().rfind("t,lambda,rank\n0,", 0) == 0);
    const std::string d = design_diagnostics(w);
    CHECK(d.find("gap_normalized = ") != std::string::npos);
    CHECK(d.find("converged = true") != std::string::npos);
}
