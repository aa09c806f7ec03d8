#include "oed/models.hpp"

#include "oed/errors.hpp"

#include <map>
#include <mutex>

namespace oed {

DynamicalModel builtin_lotka_volterra() {
    DynamicalModel m;
    m.name = "lotka-volterra";
    m.dim_state = 2;
    m.dim_param = 4;
    m.param_names = {"alpha", "beta", "gamma", "delta"};
    m.vector_field = [](std::span<const double> x, std::span<const double> th, double, std::span<double> dx) {
        const double r = x[0], w = x[1];
        dx[0] = th[0] * r - th[1] * r * w;
        dx[1] = -th[2] * w + th[3] * r * w;
    };
    m.jac_state = [](std::span<const double> x, std::span<const double> th, double, std::span<double> j) {
        const double r = x[0], w = x[1];
        j[0] = th[0] - th[1] * w;
        j[1] = -th[1] * r;
        j[2] = th[3] * w;
        j[3] = -th[2] + th[3] * r;
    };
    m.jac_param = [](std::span<const double> x, std::span<const double>, double, std::span<double> p) {
        const double r = x[0], w = x[1];
        p[0] = r;
        p[1] = -r * w;
        p[2] = 0.0;
        p[3] = 0.0;
        p[4] = 0.0;
        p[5] = 0.0;
        p[6] = -w;
        p[7] = r * w;
    };
    m.observe_indices = {1};
    m.initial_state = Vector::Constant(2, 50.0);
    return m;
}

DynamicalModel builtin_three_compartment() {
    DynamicalModel m;
    m.name = "three-compartment";
    m.dim_state = 3;
    m.dim_param = 5;
    m.param_names = {"k10", "k12", "k13", "k21", "k31"};
    m.vector_field = [](std::span<const double> x, std::span<const double> k, double, std::span<double> dx) {
        dx[0] = -(k[0] + k[1] + k[2]) * x[0] + k[3] * x[1] + k[4] * x[2];
        dx[1] = k[1] * x[0] - k[3] * x[1];
        dx[2] = k[2] * x[0] - k[4] * x[2];
    };
    m.jac_state = [](std::span<const double>, std::span<const double> k, double, std::span<double> j) {
        j[0] = -(k[0] + k[1] + k[2]);
        j[1] = k[3];
        j[2] = k[4];
        j[3] = k[1];
        j[4] = -k[3];
        j[5] = 0.0;
        j[6] = k[2];
        j[7] = 0.0;
        j[8] = -k[4];
    };
    m.jac_param = [](std::span<const double> x, std::span<const double>, double, std::span<double> p) {
        // rows: d(dx_i)/d(k10, k12, k13, k21, k31)
        p[0] = -x[0];
        p[1] = -x[0];
        p[2] = -x[0];
        p[3] = x[1];
        p[4] = x[2];
        p[5] = 0.0;
        p[6] = x[0];
        p[7] = 0.0;
        p[8] = -x[1];
        p[9] = 0.0;
        p[10] = 0.0;
        p[11] = 0.0;
        p[12] = x[0];
        p[13] = 0.0;
        p[14] = -x[2];
    };
    m.observe_indices = {0};
    m.initial_state = Vector(3);
    m.initial_state << 100.0, 0.0, 0.0;
    return m;
}

namespace {

struct Registry {
    std::mutex mutex;
    std::map<std::string, DynamicalModel, std::less<>> models;

    Registry() {
        for (auto&& m : {builtin_lotka_volterra(), builtin_three_compartment()}) models.emplace(m.name, m);
    }
};

Registry& registry() {
    static Registry r;
    return r;
}

}  // namespace

void register_model(DynamicalModel model) {
    model.validate();
    auto& r = registry();
    std::lock_guard lock(r.mutex);
    r.models.insert_or_assign(model.name, std::move(model));
}

DynamicalModel model_by_name(std::string_view name) {
    auto& r = registry();
    std::lock_guard lock(r.mutex);
    auto it = r.models.find(name);
    if (it == r.models.end()) throw ConfigError("unknown model '" + std::string(name) + "'");
    return it->second;
}

std::vector<std::string> model_names() {
    auto& r = registry();
    std::lock_guard lock(r.mutex);
    std::vector<std::string> out;
    for (const auto& [name, _] : r.models) out.push_back(name);
    return out;
}

CaseStudy case_study(std::string_view model_name) {
    if (model_name == "lotka-volterra") {
        Vector lo(4), hi(4);
        lo << 0.5, 0.01, 0.5, 0.01;
        hi << 1.5, 0.1, 1.5, 0.1;
        return {builtin_lotka_volterra(), ParameterSpace(lo, hi), TimeGrid(0.0, 10.0, 101)};
    }
    if (model_name == "three-compartment") {
        Vector lo(5), hi(5);
        lo << 0.09, 0.5, 0.5, 0.2, 0.5;
        hi << 2.40, 1.0, 2.0, 0.6, 0.7;
        return {builtin_three_compartment(), ParameterSpace(lo, hi), TimeGrid(0.0, 25.0, 101)};
    }
    throw ConfigError("no case study defined for model '" + std::string(model_name) + "'");
}

}  // namespace oed
