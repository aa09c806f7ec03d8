#pragma once

#include "oed/ode.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace oed {

/// Predator–prey system, θ = (α, β, γ, δ), X = (r, w), X₀ = (50, 50), w observed.
DynamicalModel builtin_lotka_volterra();

/// Linear three-compartment PK model, θ = (k10, k12, k13, k21, k31),
/// X₀ = (100, 0, 0), central compartment x1 observed.
///
/// The central equation uses k21·x2 for the return flow from compartment 2.
DynamicalModel builtin_three_compartment();

/// Adds a user model to the process-wide registry (replaces an existing entry with the same name).
void register_model(DynamicalModel model);

/// Looks up a built-in or registered model. Throws ConfigError for unknown names.
DynamicalModel model_by_name(std::string_view name);

std::vector<std::string> model_names();

/// Published case-study setup for a built-in model: parameter box and candidate grid.
struct CaseStudy {
    DynamicalModel model;
    ParameterSpace space;
    TimeGrid grid;
};

CaseStudy case_study(std::string_view model_name);

}  // namespace oed
