#pragma once

#include "oed/grid.hpp"

#include <vector>

namespace oed {

/// Sensitivities of the observed outputs: one q×m block ∂y(t_i)/∂θ per grid point.
struct SensitivityRecord {
    TimeGrid grid;
    std::vector<Matrix> blocks;

    std::size_t size() const noexcept { return blocks.size(); }
    std::size_t dim_param() const noexcept { return blocks.empty() ? 0 : static_cast<std::size_t>(blocks.front().cols()); }

    /// Throws ConfigError on shape mismatch or non-finite entries.
    void validate() const;
};

}  // namespace oed
