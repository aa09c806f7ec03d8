#include "oed/eor.hpp"

#include "oed/csv.hpp"
#include "oed/errors.hpp"
#include "oed/parallel.hpp"
#include "oed/rng.hpp"

#include <algorithm>
#include <atomic>
#include <ostream>

namespace oed {

EorResult aggregate_ranks(const TimeGrid& grid, const std::vector<Vector>& ranks, std::size_t n_select,
                          RankAggregation aggregation) {
    if (ranks.empty()) throw ConfigError("rank aggregation needs at least one draw");
    const Eigen::Index n = ranks.front().size();
    EorResult result;
    if (aggregation == RankAggregation::Mean) {
        Vector sum = Vector::Zero(n);
        for (const Vector& r : ranks) sum += r;
        result.average_ranks = sum / static_cast<double>(ranks.size());
    } else {
        result.average_ranks.resize(n);
        std::vector<double> column(ranks.size());
        for (Eigen::Index i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < ranks.size(); ++j) column[j] = ranks[j][i];
            std::sort(column.begin(), column.end());
            const std::size_t k = column.size();
            result.average_ranks[i] = k % 2 ? column[k / 2] : 0.5 * (column[k / 2 - 1] + column[k / 2]);
        }
    }
    result.selected = select_top_n(result.average_ranks, n_select);
    result.selected_times = times_of(grid, result.selected);
    return result;
}

EorResult eor_design(const DynamicalModel& model, const ParameterSpace& space, const TimeGrid& grid,
                     const EorConfig& config) {
    model.validate();
    if (space.dim() != model.dim_param) throw ConfigError("parameter space dimension does not match the model");
    if (config.draws < 1) throw ConfigError("EOR needs at least one draw");
    if (config.n_select < 1 || config.n_select > grid.count())
        throw ConfigError("EOR n_select must lie in [1, grid count]");

    const std::size_t k = config.draws;
    const std::size_t budget = 10 * k;
    std::vector<Vector> ranks(k);
    std::vector<ParamVector> thetas(k);
    std::vector<std::size_t> attempts(k, 0);
    std::atomic<std::size_t> total_attempts{0};

    parallel_for(k, config.threads, [&](std::size_t j) {
        for (std::uint64_t attempt = 0;; ++attempt) {
            if (total_attempts.fetch_add(1) >= budget)
                throw TooManyFailures("EOR exceeded " + std::to_string(budget) +
                                      " integration attempts; parameter space incompatible with model/grid");
            auto rng = make_rng(config.seed, {stream_tag("eor-draw"), j, attempt});
            const ParamVector theta = space.sample(rng);
            try {
                const AugmentedTrajectory aug = integrate_with_sensitivities(model, theta, grid, config.substeps);
                const auto [series, record] = observe(aug, model);
                const DesignWeights w = e_optimal_weights(record, config.design);
                ranks[j] = rank_times(w.lambda);
                thetas[j] = theta;
                attempts[j] = attempt;
                return;
            } catch (const NonFiniteState&) {
                continue;
            }
        }
    });

    EorResult result = aggregate_ranks(grid, ranks, config.n_select, config.aggregation);
    for (std::size_t a : attempts) result.failed_draws += a;
    if (config.keep_draws) {
        result.per_draw_theta = std::move(thetas);
        result.per_draw_ranks = std::move(ranks);
    }
    return result;
}

void write_eor_csv(const TimeGrid& grid, const EorResult& result, std::ostream& out) {
    out << "t,average_rank,selected\n";
    for (Eigen::Index i = 0; i < result.average_ranks.size(); ++i) {
        const bool chosen = std::find(result.selected.begin(), result.selected.end(), static_cast<std::size_t>(i)) !=
                            result.selected.end();
        out << format_double(grid.point(static_cast<std::size_t>(i))) << ','
            << format_double(result.average_ranks[i]) << ',' << (chosen ? "true" : "false") << '\n';
    }
}

}  // namespace oed
