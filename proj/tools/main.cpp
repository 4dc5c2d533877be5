#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>

#include "bbcu/report.hpp"
#include "bbcu/scenario.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitAssert = 4;

struct CommonOpts {
    std::string spec_arg;
    std::string out_dir;
    std::int64_t seed = -1;
    int stride = 0;
};

bbcu::ScenarioSpec resolve(const CommonOpts& o) {
    bbcu::ScenarioSpec spec = bbcu::resolve_spec(o.spec_arg);
    if (!o.out_dir.empty())
        spec.out_dir = o.out_dir;
    if (o.seed >= 0)
        spec.roa.seed = static_cast<std::uint64_t>(o.seed);
    if (o.stride > 0)
        spec.sim.record_stride = o.stride;
    return spec;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bidirectional converter (BBCU) scenario runner and analysis toolkit"};
    app.require_subcommand(1);

    CommonOpts opts;
    auto add_common = [&](CLI::App* sub, bool with_stride) {
        sub->add_option("spec", opts.spec_arg,
                        "config file path or builtin name (scenario1, scenario2)")
            ->required();
        sub->add_option("--out", opts.out_dir, "output directory (overrides config)");
        sub->add_option("--seed", opts.seed, "certification RNG seed (overrides config)");
        if (with_stride)
            sub->add_option("--stride", opts.stride, "trace decimation stride");
    };

    CLI::App* run = app.add_subcommand("run", "simulate a scenario and write trace/mode CSVs");
    add_common(run, true);
    CLI::App* analyze =
        app.add_subcommand("analyze", "emit constants, bounds, validity flags and eigenvalues");
    add_common(analyze, false);
    CLI::App* roa = app.add_subcommand("roa", "certify the (R_D, I_OL) ladder and export projections");
    add_common(roa, false);

    CLI11_PARSE(app, argc, argv);

    try {
        const bbcu::ScenarioSpec spec = resolve(opts);
        if (run->parsed()) {
            const bbcu::ScenarioArtifacts art = bbcu::run_scenario(spec);
            std::cout << "trace:  " << art.trace_path << "\n"
                      << "modes:  " << art.modes_path << "\n"
                      << "report: " << art.report_path << "\n";
            for (const auto& e : art.result.mode_events)
                std::printf("t=%-10.6g mode %d -> %d  %-20s I_OL=%g gate=%d\n", e.t,
                            e.from_mode, e.to_mode, e.reason.c_str(), e.I_OL_active,
                            e.gate_contains ? 1 : 0);
        } else if (analyze->parsed()) {
            const std::string report = bbcu::analysis_report(spec);
            std::filesystem::create_directories(spec.out_dir);
            const std::string path = spec.out_dir + "/analysis.txt";
            bbcu::write_text_file(path, report);
            std::cout << report;
            std::cerr << "written: " << path << "\n";
        } else if (roa->parsed()) {
            std::filesystem::create_directories(spec.out_dir);
            const std::string table = bbcu::roa_report(spec, spec.out_dir);
            const std::string path = spec.out_dir + "/roa_table.csv";
            bbcu::write_text_file(path, table);
            std::cout << table;
            std::cerr << "written: " << path << " (+ projection polylines)\n";
        }
    } catch (const bbcu::AssertionBreach& e) {
        std::cerr << "assertion breach: " << e.what() << "\n";
        return kExitAssert;
    } catch (const bbcu::NumericError& e) {
        std::cerr << "numeric failure at t=" << e.t_fail << ": " << e.what() << "\n";
        return kExitNumeric;
    } catch (const bbcu::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const bbcu::ParamError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
