#pragma once

#include "oed/csv.hpp"
#include "oed/ode.hpp"
#include "oed/sensitivity.hpp"

#include <Eigen/QR>

#include <filesystem>
#include <random>
#include <string>
#include <vector>

namespace testing {

inline std::filesystem::path fixture(const std::string& name) { return std::filesystem::path(OED_FIXTURE_DIR) / name; }

/// Fresh empty directory under the build tree.
inline std::filesystem::path scratch_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / ("oedsample-test-" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

// dx/dt = θ x², x(0) = 1: finite-time blow-up at t = 1/θ.
inline oed::DynamicalModel blowup_model() {
    oed::DynamicalModel m;
    m.name = "test-blowup";
    m.dim_state = 1;
    m.dim_param = 1;
    m.vector_field = [](auto x, auto th, double, auto dx) { dx[0] = th[0] * x[0] * x[0]; };
    m.jac_state = [](auto x, auto th, double, auto out) { out[0] = 2.0 * th[0] * x[0]; };
    m.jac_param = [](auto x, auto, double, auto out) { out[0] = x[0] * x[0]; };
    m.observe_indices = {0};
    m.initial_state = oed::Vector::Ones(1);
    m.param_names = {"a"};
    return m;
}

/// Record whose blocks are given q×m matrices on a dummy grid.
inline oed::SensitivityRecord record_of(const std::vector<oed::Matrix>& blocks) {
    return {oed::TimeGrid(0.0, 1.0, blocks.size()), blocks};
}

/// Atoms Q·D_i·Qᵀ sharing one random rotation (blocks sqrt(D_i)·Qᵀ).
inline std::vector<oed::Matrix> commuting_blocks(std::uint64_t seed, std::size_t n, std::size_t m) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z;
    std::uniform_real_distribution<double> u(0.05, 1.0);
    oed::Matrix g(m, m);
    for (Eigen::Index i = 0; i < g.size(); ++i) g.data()[i] = z(rng);
    const oed::Matrix q = Eigen::HouseholderQR<oed::Matrix>(g).householderQ();
    std::vector<oed::Matrix> blocks;
    for (std::size_t i = 0; i < n; ++i) {
        oed::Vector d(m);
        for (auto& x : d) x = u(rng) * u(rng);
        blocks.push_back(d.cwiseSqrt().asDiagonal() * q.transpose());
    }
    return blocks;
}

}  // namespace testing
