// scatterlab command-line driver.
#include <scatterlab/app/config.hpp>
#include <scatterlab/app/runner.hpp>

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

namespace {

struct Overrides {
    std::string config;
    std::optional<std::string> out;
    std::optional<unsigned> workers;
    std::optional<double> snapshot_stride;
};

void apply_overrides(scatterlab::app::RunConfig& cfg, const Overrides& o, bool nest) {
    if (o.out)
        cfg.out_dir = nest ? (std::filesystem::path(*o.out) / cfg.label).string() : *o.out;
    if (o.workers)
        cfg.workers = std::max(1u, *o.workers);
    if (o.snapshot_stride)
        cfg.propagator.snapshot_stride = *o.snapshot_stride;
}

void report(const scatterlab::app::RunOutput& out) {
    std::cout << out.dir.string() << ":";
    for (const auto& f : out.files)
        std::cout << ' ' << f;
    std::cout << '\n';
    for (const auto& w : out.warnings)
        std::cerr << "warning: " << w << '\n';
}

} // namespace

int main(int argc, char** argv) {
    using namespace scatterlab;
    CLI::App cli{"Multichannel resonant scattering on tight-binding lattices"};
    cli.require_subcommand(1);

    Overrides ov;
    std::string figure;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--out", ov.out, "output directory");
        sub->add_option("--workers", ov.workers, "worker threads for sweeps")->check(CLI::PositiveNumber);
        sub->add_option("--snapshot-stride", ov.snapshot_stride, "time between stored snapshots")
            ->check(CLI::PositiveNumber);
    };
    std::vector<std::pair<CLI::App*, app::Mode>> modes;
    for (app::Mode m : {app::Mode::steady, app::Mode::dynamics, app::Mode::mu_scan, app::Mode::q_sweep}) {
        auto* sub = cli.add_subcommand(app::to_string(m), "run a " + app::to_string(m) + " configuration");
        sub->add_option("--config", ov.config, "JSON configuration file")->required();
        add_common(sub);
        modes.emplace_back(sub, m);
    }
    auto* fig = cli.add_subcommand("reproduce-fig", "regenerate one figure with its published parameters");
    fig->add_option("figure", figure, "3a 3b 3c 3d 5 6a 6b 6c 6d 7")->required();
    add_common(fig);

    try {
        cli.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return cli.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return cli.exit(e);
    } catch (const CLI::ParseError& e) {
        cli.exit(e);
        return 2;
    }

    try {
        if (fig->parsed()) {
            auto runs = app::reproduce_figure(figure, ov.out.value_or("scatterlab-out"));
            for (auto& run : runs) {
                apply_overrides(run, ov, true);
                report(app::run(run));
            }
            return 0;
        }
        for (const auto& [sub, mode] : modes) {
            if (!sub->parsed())
                continue;
            auto cfg = app::parse_config_file(ov.config, mode);
            apply_overrides(cfg, ov, false);
            report(app::run(cfg));
        }
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const PreconditionError& e) {
        std::cerr << "precondition error: " << e.what() << '\n';
        return 3;
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
