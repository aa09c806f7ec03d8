#pragma once

#include "oed/design.hpp"
#include "oed/ode.hpp"

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace oed {

enum class RankAggregation { Mean, Median };

struct EorConfig {
    std::size_t draws = 1000;  ///< K, number of parameter draws
    std::size_t n_select = 5;  ///< n, points to return
    DesignOptions design{};
    std::uint64_t seed = 0;
    int substeps = kDefaultSubsteps;
    RankAggregation aggregation = RankAggregation::Mean;
    bool keep_draws = true;  ///< retain per-draw θ and rank vectors
    int threads = 1;
};

struct EorResult {
    std::vector<std::size_t> selected;  ///< grid indices, time order
    std::vector<double> selected_times;
    Vector average_ranks;
    std::vector<ParamVector> per_draw_theta;
    std::vector<Vector> per_draw_ranks;
    std::size_t failed_draws = 0;  ///< blown-up integrations that were redrawn
};

/// E-optimal ranking: for K uniform draws θ ∈ Θ, solve the E-optimal design
/// at θ and rank the grid points by weight; select the n best average ranks.
///
/// Draw j uses seeds derived from (seed, j, attempt), so results do not depend
/// on `threads`. Throws TooManyFailures after 10·K attempts in total.
EorResult eor_design(const DynamicalModel& model, const ParameterSpace& space, const TimeGrid& grid,
                     const EorConfig& config);

/// Aggregates per-draw rank vectors (mean or median) and selects the top n.
EorResult aggregate_ranks(const TimeGrid& grid, const std::vector<Vector>& ranks, std::size_t n_select,
                          RankAggregation aggregation = RankAggregation::Mean);

/// CSV `t,average_rank,selected`.
void write_eor_csv(const TimeGrid& grid, const EorResult& result, std::ostream& out);

}  // namespace oed
