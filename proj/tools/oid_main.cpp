#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "oid/runner.hpp"

namespace fs = std::filesystem;
using namespace oid;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitSolverFailure = 1;
constexpr int kExitNotTight = 2;
constexpr int kExitTargetFloor = 3;
constexpr int kExitUsage = 64;

void write_file(const fs::path& path, const std::string& contents) {
    fs::create_directories(path.parent_path().empty() ? "." : path.parent_path());
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << contents;
}

struct CommonInputs {
    std::string feeder_path, scenario_path, inverters_path;
    FeederModel model = build_feeder(fixture_feeder_topology());
    Scenario scenario;

    void load() {
        model = load_feeder(feeder_path);
        scenario = load_scenario(model, scenario_path, inverters_path);
        if (scenario.steps.empty())
            throw CLI::ValidationError("scenario", "scenario has no steps");
    }
};

StrategyKind parse_strategy(const std::string& name) {
    if (name == "oid") return StrategyKind::Oid;
    if (name == "rpc") return StrategyKind::Rpc;
    if (name == "apc") return StrategyKind::Apc;
    if (name == "mixed") return StrategyKind::Mixed;
    throw CLI::ValidationError("strategy", "unknown strategy: " + name);
}

int run_solve(CommonInputs& in, const std::string& spec_path, int step_index,
              bool all_steps, const std::string& out_dir) {
    in.load();
    DispatchSpec spec = load_dispatch_spec(spec_path);
    spec.bounds = in.scenario.bounds;
    const SolverSettings settings = settings_from_env();

    Scenario scoped = in.scenario;
    if (!all_steps) {
        if (step_index < 0 || step_index >= static_cast<int>(in.scenario.steps.size())) {
            std::cerr << "step index out of range\n";
            return kExitUsage;
        }
        scoped.steps = {in.scenario.steps[step_index]};
    }

    DayRun run = run_day(in.model, scoped, spec, settings);
    std::vector<StepMetrics> metrics;
    for (const auto& s : run.steps) metrics.push_back(s.metrics);
    write_file(fs::path(out_dir) / "report.csv", metrics_csv(metrics, run.summary));
    write_file(fs::path(out_dir) / "report.json", metrics_json(metrics, run.summary));
    for (const auto& s : run.steps) {
        const auto& step = scoped.steps[s.step_index];
        write_file(fs::path(out_dir) /
                       ("solution_step" + std::to_string(s.step_index) + ".csv"),
                   solution_csv(s.solution, in.model, step));
    }
    if (!run.all_optimal) {
        std::cerr << "solver failed on at least one step\n";
        return kExitSolverFailure;
    }
    if (!run.all_tight) {
        std::cerr << "relaxation not tight on at least one step\n";
        return kExitNotTight;
    }
    std::cout << "solved " << run.steps.size() << " step(s); network "
              << run.summary.network_kwh << " kWh, curtailed "
              << run.summary.curtailed_kwh << " kWh\n";
    return kExitOk;
}

int run_sweep(CommonInputs& in, const std::string& spec_path, int step_index,
              int target_k, std::vector<double> grid, const std::string& out_path) {
    in.load();
    DispatchSpec spec = load_dispatch_spec(spec_path);
    spec.bounds = in.scenario.bounds;
    if (step_index < 0 || step_index >= static_cast<int>(in.scenario.steps.size())) {
        std::cerr << "step index out of range\n";
        return kExitUsage;
    }
    const SolverSettings settings = settings_from_env();
    LambdaSelection sel =
        select_lambda(in.model, in.scenario.steps[step_index], spec,
                      in.scenario.inverters, target_k, std::move(grid), settings);

    std::ostringstream os;
    os.precision(10);
    os << "lambda,count,objective,loss_pu\n";
    for (const auto& e : sel.sweep)
        os << e.lambda << ',' << e.count << ',' << e.objective << ',' << e.loss << '\n';
    write_file(out_path, os.str());

    if (target_k >= 0 && !sel.found) {
        std::cerr << "no grid point reaches " << target_k
                  << " inverters; floor is " << sel.floor_count << "\n";
        return kExitTargetFloor;
    }
    std::cout << "selected lambda " << sel.lambda << " ("
              << (sel.found ? "target met" : "grid sweep") << ")\n";
    return kExitOk;
}

int run_compare(CommonInputs& in, const std::string& spec_path,
                const std::vector<std::string>& strategy_names, int step_index,
                const std::string& out_path) {
    in.load();
    DispatchSpec base = load_dispatch_spec(spec_path);
    base.bounds = in.scenario.bounds;
    const SolverSettings settings = settings_from_env();

    Scenario scoped = in.scenario;
    if (step_index >= 0) {
        if (step_index >= static_cast<int>(in.scenario.steps.size())) {
            std::cerr << "step index out of range\n";
            return kExitUsage;
        }
        scoped.steps = {in.scenario.steps[step_index]};
    }

    std::ostringstream os;
    os.precision(10);
    os << "strategy,status,network_kwh,curtailed_kwh,overall_kwh,max_reactive_pu,"
          "objective_sum\n";

    // No-control baseline row from the power-flow oracle.
    {
        BaselineRun bl = run_baseline(in.model, scoped);
        double loss_kwh = 0.0;
        for (const auto& pf : bl.steps)
            loss_kwh += losses(pf.v, in.model) * in.model.base().s_base_va / 1e3 *
                        scoped.step_hours;
        os << "no-control," << (bl.all_converged ? "ok" : "diverged") << ','
           << loss_kwh << ",0," << loss_kwh << ",0,\n";
    }

    bool any_failed = false;
    double oid_objective = 0.0;
    std::vector<std::pair<std::string, double>> objective_sums;
    for (const auto& name : strategy_names) {
        DispatchSpec spec;
        try {
            spec = comparison_variant(parse_strategy(name), base);
        } catch (const std::exception& err) {
            std::cerr << name << ": " << err.what() << "\n";
            return kExitUsage;
        }
        DayRun run = run_day(in.model, scoped, spec, settings);
        double obj_sum = 0.0;
        double max_q = 0.0;
        for (const auto& s : run.steps) {
            obj_sum += s.solution.objective;
            if (s.solution.q_set.size() > 0)
                max_q = std::max(max_q, s.solution.q_set.cwiseAbs().maxCoeff());
        }
        os << name << ','
           << (run.all_optimal ? (run.all_tight ? "ok" : "not-tight") : "failed") << ','
           << run.summary.network_kwh << ',' << run.summary.curtailed_kwh << ','
           << run.summary.overall_kwh << ',' << max_q << ',' << obj_sum << '\n';
        if (!run.all_optimal) any_failed = true;
        if (parse_strategy(name) == StrategyKind::Oid) oid_objective = obj_sum;
        objective_sums.emplace_back(name, run.all_optimal ? obj_sum : 0.0);
    }
    write_file(out_path, os.str());

    // Feasible-set inclusion: the joint strategy can imitate either
    // restricted one, so its objective cannot be worse at equal weights.
    for (const auto& [name, obj] : objective_sums)
        if (name != "oid" && obj != 0.0 && oid_objective != 0.0 &&
            oid_objective > obj + 1e-7 * (1.0 + std::abs(obj))) {
            std::cerr << "dominance violated against " << name << "\n";
            return kExitSolverFailure;
        }
    std::cout << "comparison written\n";
    return any_failed ? kExitSolverFailure : kExitOk;
}

int run_baseline_cmd(CommonInputs& in, const std::string& out_path) {
    in.load();
    BaselineRun run = run_baseline(in.model, in.scenario);
    write_file(out_path, baseline_csv(run, in.scenario));
    if (!run.all_converged) {
        std::cerr << "power flow diverged on at least one step\n";
        return kExitSolverFailure;
    }
    std::cout << "baseline written\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Optimal inverter dispatch for radial low-voltage feeders"};
    app.require_subcommand(1);

    CommonInputs in;
    std::string spec_path, out_dir = "out", out_path;
    int step_index = 0;
    bool all_steps = false;
    int target_k = -1;
    std::vector<double> grid;
    std::vector<std::string> strategies{"rpc", "apc", "oid"};
    unsigned seed = 42;

    auto add_common = [&](CLI::App* cmd, bool need_spec) {
        cmd->add_option("--feeder", in.feeder_path, "feeder JSON")->required();
        cmd->add_option("--scenario", in.scenario_path, "scenario CSV")->required();
        cmd->add_option("--inverters", in.inverters_path, "inverter specs JSON")
            ->required();
        if (need_spec)
            cmd->add_option("--spec", spec_path, "dispatch spec JSON")->required();
        cmd->add_option("--seed", seed, "seed for any randomized auxiliaries");
    };

    CLI::App* solve_cmd = app.add_subcommand("solve", "solve dispatch steps");
    add_common(solve_cmd, true);
    solve_cmd->add_option("--step", step_index, "step index");
    solve_cmd->add_flag("--all", all_steps, "solve every step");
    solve_cmd->add_option("--out", out_dir, "output directory");

    CLI::App* sweep_cmd = app.add_subcommand("sweep-lambda", "group-weight sweep");
    add_common(sweep_cmd, true);
    sweep_cmd->add_option("--step", step_index, "step index");
    sweep_cmd->add_option("--target-k", target_k, "largest admissible inverter count");
    sweep_cmd->add_option("--lambda-grid", grid, "explicit grid values");
    sweep_cmd->add_option("--out", out_path, "sweep CSV path")->required();

    CLI::App* compare_cmd = app.add_subcommand("compare", "strategy comparison");
    add_common(compare_cmd, true);
    compare_cmd->add_option("--strategies", strategies, "subset of rpc,apc,oid,mixed")
        ->delimiter(',');
    compare_cmd->add_option("--step", step_index, "single step (default: whole day)");
    compare_cmd->add_option("--out", out_path, "comparison CSV path")->required();

    CLI::App* baseline_cmd = app.add_subcommand("baseline", "no-control voltages");
    add_common(baseline_cmd, false);
    baseline_cmd->add_option("--out", out_path, "baseline CSV path")->required();

    int compare_step = -1;
    compare_cmd->remove_option(compare_cmd->get_option("--step"));
    compare_cmd->add_option("--step", compare_step, "single step (default: whole day)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (solve_cmd->parsed()) return run_solve(in, spec_path, step_index, all_steps, out_dir);
        if (sweep_cmd->parsed())
            return run_sweep(in, spec_path, step_index, target_k, grid, out_path);
        if (compare_cmd->parsed())
            return run_compare(in, spec_path, strategies, compare_step, out_path);
        if (baseline_cmd->parsed()) return run_baseline_cmd(in, out_path);
    } catch (const CLI::ValidationError& e) {
        std::cerr << e.what() << "\n";
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitSolverFailure;
    }
    return kExitUsage;
}
