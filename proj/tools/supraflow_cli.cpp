// supraflow command-line front end.
//
//   supraflow run <scenario> [out_dir]        trajectory.csv + summary.json
//   supraflow sweep <scenario> [out_dir]      sweep.csv (d_x, t_c, lambda_2)
//   supraflow spectrum <scenario> [out_path]  index,eigenvalue CSV
//   supraflow dispatch [out_dir]              built-in multienergy dispatch
//   supraflow validate <scenario>
//   supraflow emit [out_dir]                  built-in scenario files
//
// Exit codes: 0 ok, 1 invalid scenario, 2 numerical failure, 3 I/O failure.
// Errors go to stderr as "<CODE>: <message>".

#include "supraflow/errors.hpp"
#include "supraflow/harness.hpp"
#include "supraflow/scenario_io.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

namespace fs = std::filesystem;
using namespace supraflow;

namespace {

struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<double> step;
    std::optional<double> t_end;
    std::optional<double> eps;

    void attach(CLI::App& cmd) {
        cmd.add_option("--seed", seed, "Seed for random initial states");
        cmd.add_option("--h", step, "Integrator step override");
        cmd.add_option("--t-end", t_end, "Final time override");
        cmd.add_option("--eps", eps, "Consensus detection tolerance override");
    }

    void apply(Scenario& s) const {
        if (seed) s.initial.seed = *seed;
        if (step) s.integrator.step = *step;
        if (t_end) s.integrator.t_end = *t_end;
        if (eps) s.detection.eps = *eps;
        s.validate();
    }
};

int exit_code(ErrorCode code) {
    switch (code) {
        case ErrorCode::ScenarioInvalid: return 1;
        case ErrorCode::NumericalDivergence:
        case ErrorCode::EigenNonconvergence: return 2;
        case ErrorCode::IoError: return 3;
    }
    return 1;
}

std::string time_or_not_reached(const std::optional<double>& t) {
    return t ? format_double(*t) : std::string("not-reached");
}

void write_trajectory(const fs::path& path, const Trajectory& traj, int n_nodes) {
    std::ostringstream os;
    write_trajectory_csv(os, traj, n_nodes);
    write_text_file(path, os.str());
}

int run_dispatch_scenario(const Scenario& s, const fs::path& out_dir) {
    const DispatchResult r = run_dispatch(s);
    write_trajectory(out_dir / "trajectory.csv", r.trajectory, s.network.nodes);
    write_text_file(out_dir / "summary.json", dispatch_summary_json(s, r));
    std::cout << "scenario: " << s.id << '\n'
              << "dynamics: " << r.trajectory.dynamics << '\n'
              << "power_balance_residual: " << format_double(r.power_balance_residual) << '\n'
              << "gas_balance_residual: " << format_double(r.gas_balance_residual) << '\n'
              << "per_layer_consensus_residual: " << format_double(r.per_layer_consensus_residual) << '\n';
    for (std::size_t a = 0; a < r.layer_means.size(); ++a) {
        std::cout << "layer_" << a + 1 << "_mean: " << format_double(r.layer_means[a]) << '\n';
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Consensus optimization flows on multiplex networks"};
    // -h is taken by the step override; help stays on --help.
    app.set_help_flag("--help", "Print this help message and exit");
    app.require_subcommand(1);

    // run
    auto* run = app.add_subcommand("run", "Integrate a scenario");
    std::string run_scenario_path;
    std::string run_out = ".";
    Overrides run_over;
    run->add_option("scenario", run_scenario_path, "Scenario file")->required();
    run->add_option("out_dir,--out", run_out, "Output directory");
    run_over.attach(*run);

    // sweep
    auto* sweep = app.add_subcommand("sweep", "Interlayer diffusion sweep on a two-layer scenario");
    std::string sweep_scenario_path;
    std::string sweep_out = ".";
    double dx_min = 0.01;
    double dx_max = 10.0;
    int points = 60;
    int jobs = 1;
    Overrides sweep_over;
    sweep->add_option("scenario", sweep_scenario_path, "Scenario file")->required();
    sweep->add_option("out_dir,--out", sweep_out, "Output directory");
    sweep->add_option("--dx-min", dx_min, "Smallest D_x")->check(CLI::PositiveNumber);
    sweep->add_option("--dx-max", dx_max, "Largest D_x")->check(CLI::PositiveNumber);
    sweep->add_option("--points", points, "Number of log-spaced points")->check(CLI::Range(2, 100000));
    sweep->add_option("--jobs", jobs, "Worker threads")->check(CLI::Range(1, 1024));
    sweep_over.attach(*sweep);

    // spectrum
    auto* spectrum_cmd = app.add_subcommand("spectrum", "Supra-Laplacian eigenvalues");
    std::string spec_scenario_path;
    std::string spec_out = "spectrum.csv";
    spectrum_cmd->add_option("scenario", spec_scenario_path, "Scenario file")->required();
    spectrum_cmd->add_option("out_path,--out", spec_out, "Output CSV");

    // dispatch
    auto* disp = app.add_subcommand("dispatch", "Run the built-in multienergy dispatch");
    std::string disp_out = ".";
    std::string disp_order = "first_order";
    Overrides disp_over;
    disp->add_option("out_dir,--out", disp_out, "Output directory");
    disp->add_option("--order", disp_order, "first_order or second_order")
        ->check(CLI::IsMember({"first_order", "second_order"}));
    disp_over.attach(*disp);

    // validate
    auto* validate = app.add_subcommand("validate", "Check a scenario file");
    std::string validate_path;
    validate->add_option("scenario", validate_path, "Scenario file")->required();

    // emit
    auto* emit = app.add_subcommand("emit", "Write the built-in scenario files");
    std::string emit_out = ".";
    emit->add_option("out_dir,--out", emit_out, "Output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            Scenario s = load_scenario(run_scenario_path);
            run_over.apply(s);
            if (s.dynamics.kind == DynamicsKind::Dispatch) return run_dispatch_scenario(s, run_out);
            const RunResult r = run_scenario(s);
            write_trajectory(fs::path(run_out) / "trajectory.csv", r.trajectory, s.network.nodes);
            write_text_file(fs::path(run_out) / "summary.json", run_summary_json(s, r));
            std::cout << "scenario: " << s.id << '\n'
                      << "dynamics: " << r.trajectory.dynamics << '\n'
                      << "xstar: " << format_double(r.xstar) << '\n'
                      << "final_max_error: " << format_double(r.final_max_error) << '\n'
                      << "t_c: " << time_or_not_reached(r.t_c) << '\n';
        } else if (*sweep) {
            if (!(dx_min < dx_max)) throw InvalidModel("--dx-min must be below --dx-max");
            Scenario s = load_scenario(sweep_scenario_path);
            sweep_over.apply(s);
            const SweepResult rows = sweep_interlayer(s, log_spaced(dx_min, dx_max, points), s.detection.eps, jobs);
            write_text_file(fs::path(sweep_out) / "sweep.csv", sweep_csv(rows));
            int failed = 0;
            for (const auto& row : rows) {
                if (row.failed) {
                    ++failed;
                    std::cerr << "warning: D_x=" << format_double(row.dx) << " failed: " << row.error << '\n';
                }
            }
            std::cout << "points: " << rows.size() << '\n'
                      << "t_c_at_min: " << time_or_not_reached(rows.front().t_c) << '\n'
                      << "t_c_at_max: " << time_or_not_reached(rows.back().t_c) << '\n'
                      << "failed: " << failed << '\n';
        } else if (*spectrum_cmd) {
            const Scenario s = load_scenario(spec_scenario_path);
            const auto values = spectrum(scenario_laplacian(s));
            std::ostringstream os;
            os << "index,eigenvalue\n";
            for (std::size_t k = 0; k < values.size(); ++k) os << k + 1 << ',' << format_double(values[k]) << '\n';
            write_text_file(spec_out, os.str());
            std::cout << "dim: " << values.size() << '\n'
                      << "lambda_1: " << format_double(values.front()) << '\n';
            if (values.size() > 1) std::cout << "lambda_2: " << format_double(values[1]) << '\n';
        } else if (*disp) {
            Scenario s = build_dispatch_scenario(disp_order == "first_order" ? DispatchOrder::First
                                                                             : DispatchOrder::Second);
            disp_over.apply(s);
            return run_dispatch_scenario(s, disp_out);
        } else if (*validate) {
            const Scenario s = load_scenario(validate_path);
            const MultiplexNetwork net = s.network.build();
            std::cout << "ok: " << s.id << " N=" << net.n_nodes() << " M=" << net.n_layers()
                      << " connected=" << (is_connected(net) ? "true" : "false") << '\n';
        } else if (*emit) {
            for (const auto& path : emit_builtin_scenarios(emit_out)) std::cout << path.string() << '\n';
        }
    } catch (const Error& e) {
        std::cerr << to_string(e.code()) << ": " << e.what() << '\n';
        return exit_code(e.code());
    } catch (const fs::filesystem_error& e) {
        std::cerr << to_string(ErrorCode::IoError) << ": " << e.what() << '\n';
        return exit_code(ErrorCode::IoError);
    }
    return 0;
}
