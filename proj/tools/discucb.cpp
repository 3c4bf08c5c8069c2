#include <CLI11.hpp>

#include <discucb/cli/commands.hpp>

using namespace discucb::cli;

int main(int argc, char** argv)
{
    CLI::App app{"Episodic GP dynamics learning with discrepancy-UCB exploration"};
    app.require_subcommand(1);

    Options opts;
    std::string output_dir;
    int trials = 0;
    std::uint64_t seed = 0;

    auto common = [&](CLI::App* sub, bool many) {
        if (many)
            sub->add_option("--config", opts.configs, "Campaign config files (YAML), one per run")->required()->expected(2, -1);
        else
            sub->add_option("--config", opts.configs, "Campaign config file (YAML)")->required()->expected(1);
        sub->add_option("--output-dir", output_dir, "Override output_dir");
        sub->add_option("--trials", trials, "Override the trial count")->check(CLI::PositiveNumber);
        sub->add_option("--seed", seed, "Override the master seed");
        sub->add_flag("--resume", opts.resume, "Continue from checkpoints in the output directory");
    };

    CLI::App* run = app.add_subcommand("run", "Run independent campaigns and write per-trial and aggregate CSVs");
    common(run, false);
    CLI::App* compare = app.add_subcommand("compare", "Run several configs and overlay their curves");
    common(compare, true);
    CLI::App* theorem = app.add_subcommand("verify-theorem", "Check the convergence bound on a finite-grid environment");
    common(theorem, false);
    CLI::App* control = app.add_subcommand("control-eval", "Swing-up MPC with a learned model against the true dynamics");
    common(control, false);
    control->add_option("--snapshot", opts.snapshot, "Trial snapshot JSON written by run")->required();

    try {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsageError;
    }

    for (CLI::App* sub : {run, compare, theorem, control}) {
        if (!sub->parsed())
            continue;
        if (sub->count("--output-dir"))
            opts.output_dir = output_dir;
        if (sub->count("--trials"))
            opts.trials = trials;
        if (sub->count("--seed"))
            opts.seed = seed;
    }
    if (run->parsed())
        return cmd_run(opts);
    if (compare->parsed())
        return cmd_compare(opts);
    if (theorem->parsed())
        return cmd_verify_theorem(opts);
    return cmd_control_eval(opts);
}
