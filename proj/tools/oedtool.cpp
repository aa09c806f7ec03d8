// oedtool: sampling-time design, simulation, estimation and benchmarking.

#include "oed/commands.hpp"
#include "oed/csv.hpp"
#include "oed/errors.hpp"
#include "oed/manifest.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <sstream>

namespace {

struct Overrides {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
    std::optional<std::string> out;
};

oed::RunConfig load(const Overrides& o) {
    oed::RunConfig c = [&] {
        if (!o.config_path.empty()) return oed::load_config(o.config_path);
        std::istringstream empty;
        return oed::parse_config(empty, std::filesystem::current_path());
    }();
    if (o.seed) c.seed = *o.seed;
    if (o.threads) c.threads = *o.threads;
    if (o.out) c.output_dir = std::filesystem::absolute(*o.out);
    return c;
}

void add_common(CLI::App* cmd, Overrides& o) {
    cmd->add_option("-c,--config", o.config_path, "INI configuration file")->check(CLI::ExistingFile);
    cmd->add_option("--seed", o.seed, "master seed (overrides run.seed)");
    cmd->add_option("--threads", o.threads, "worker threads, 0 = all cores")->check(CLI::NonNegativeNumber);
    cmd->add_option("-o,--out", o.out, "output directory (overrides output.dir)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Optimal sampling-time design for ODE parameter estimation"};
    app.require_subcommand(1);
    Overrides o;

    auto* simulate = app.add_subcommand("simulate", "integrate the model and write trajectory and noisy observations");
    add_common(simulate, o);
    std::optional<double> sigma;
    std::optional<std::string> theta;
    simulate->add_option("--sigma", sigma, "observation noise standard deviation");
    simulate->add_option("--theta", theta, "comma-separated parameters, or 'sample'");

    auto* design = app.add_subcommand("design", "select sampling points (eor, e-optimal-at, random)");
    add_common(design, o);
    std::optional<std::string> method;
    std::optional<std::string> design_theta;
    design->add_option("method", method, "eor | e-optimal-at | random")
        ->check(CLI::IsMember({"eor", "e-optimal-at", "random"}));
    design->add_option("--theta", design_theta, "linearisation point for e-optimal-at");

    auto* estimate = app.add_subcommand("estimate", "least-squares estimate from a dataset CSV");
    add_common(estimate, o);
    std::optional<std::string> data;
    estimate->add_option("--data", data, "dataset CSV (with .manifest sidecar)");

    auto* bench = app.add_subcommand("bench", "run the method-comparison benchmark");
    add_common(bench, o);

    auto* export_cmd = app.add_subcommand("export-train-data", "write X.csv / Y.csv training sequences");
    add_common(export_cmd, o);
    std::optional<std::size_t> count;
    export_cmd->add_option("-k,--count", count, "number of sequences")->check(CLI::PositiveNumber);

    auto* import_cmd = app.add_subcommand("import-attention", "turn a t,weight file into selected points");
    add_common(import_cmd, o);
    std::string weights;
    std::string name = "At-LSTM";
    import_cmd->add_option("weights", weights, "attention CSV")->required();
    import_cmd->add_option("--name", name, "method name");

    CLI11_PARSE(app, argc, argv);

    try {
        oed::RunConfig c = load(o);
        if (sigma) c.sigma = *sigma;
        if (theta) {
            if (*theta == "sample") c.theta.reset();
            else c.theta = oed::parse_vector(*theta, "--theta");
        }
        if (method) c.design_method = *method;
        if (design_theta) c.design_theta = oed::parse_vector(*design_theta, "--theta");
        if (data) c.data_file = std::filesystem::absolute(*data);
        if (count) c.export_count = *count;
        oed::validate(c);

        if (*simulate) oed::cmd_simulate(c, std::cout);
        else if (*design) oed::cmd_design(c, std::cout);
        else if (*estimate) oed::cmd_estimate(c, std::cout);
        else if (*bench) oed::cmd_bench(c, std::cout);
        else if (*export_cmd) oed::cmd_export_train_data(c, std::cout);
        else if (*import_cmd) oed::cmd_import_attention(c, weights, name, std::cout);
        return 0;
    } catch (const oed::Error& e) {
        std::cerr << "oedtool: " << e.what() << '\n';
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "oedtool: " << e.what() << '\n';
        return 1;
    }
}
