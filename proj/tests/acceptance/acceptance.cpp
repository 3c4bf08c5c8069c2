// Acceptance suite: one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria (capped at 1).

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <discucb/cli/commands.hpp>

#include "../unit/support.hpp"

using namespace discucb;
using namespace discucb::test_support;
namespace fs = std::filesystem;

namespace {

    struct Outcome {
        bool pass = false;
        std::string detail;
    };

    double seconds_since(std::chrono::steady_clock::time_point t0)
    {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }

    std::string fmt(const char* f, double a)
    {
        char buf[128];
        std::snprintf(buf, sizeof buf, f, a);
        return buf;
    }

    RbfKernel random_kernel(std::mt19937_64& rng)
    {
        Vector periods = Vector::Zero(3);
        if (rng() % 2)
            periods[0] = 2.0 * M_PI;
        return RbfKernel(KernelParams{0.5}, periods);
    }

    /// Random inputs in [-2, 2]^3; about one row in five repeats an earlier one.
    Matrix random_inputs(std::mt19937_64& rng, Index n)
    {
        Matrix Z = random_matrix(rng, n, 3);
        for (Index i = 1; i < n; ++i)
            if (rng() % 5 == 0)
                Z.row(i) = Z.row(static_cast<Index>(rng() % static_cast<std::uint64_t>(i)));
        return Z;
    }

    // 1. Incremental posterior vs. dense from-scratch solve.
    Outcome criterion1()
    {
        const auto t0 = std::chrono::steady_clock::now();
        std::mt19937_64 rng(1001);
        std::uniform_real_distribution<double> reg_dist(0.01, 1.0);
        double worst = 0.0;
        const PriorMean p0 = test_prior();
        for (int d = 0; d < 200; ++d) {
            const Index n = 1 + static_cast<Index>(rng() % 50);
            const RbfKernel k = random_kernel(rng);
            const double reg = reg_dist(rng);
            const Matrix Z = random_inputs(rng, n);
            const Matrix Y = random_matrix(rng, n, 2);
            const GpModel m = incremental_model(k, p0, reg, 2, 1, Z, Y);
            for (int q = 0; q < 5; ++q) {
                const Vector zq = random_vector(rng, 3);
                const DenseOracle o = dense_posterior(k, p0, reg + kJitter, Z, Y, zq);
                worst = std::max(worst, (m.predict_mean(zq) - o.mean).cwiseAbs().maxCoeff());
                worst = std::max(worst, std::abs(m.predict_variance(zq) - o.variance));
            }
        }
        const double secs = seconds_since(t0);
        return {worst <= 1e-8 && secs < 10.0, fmt("max abs error %.3g", worst) + fmt(" (limit 1e-8), %.2f s (limit 10 s)", secs)};
    }

    // 2. Lemma-2 variance update vs. the variance after the actual update.
    Outcome criterion2()
    {
        std::mt19937_64 rng(1002);
        std::uniform_real_distribution<double> reg_dist(0.01, 1.0);
        double worst = 0.0;
        for (int c = 0; c < 200; ++c) {
            const Index n = static_cast<Index>(rng() % 31);
            const GpModel m = incremental_model(random_kernel(rng), test_prior(), reg_dist(rng), 2, 1, random_inputs(rng, n),
                random_matrix(rng, n, 2));
            const Vector z_star = random_vector(rng, 3);
            const Vector z = (rng() % 4 == 0) ? z_star : random_vector(rng, 3);
            const double predicted = m.lemma2_variance_update(z_star, z);
            const double actual = m.update_with_observation(z_star, random_vector(rng, 2)).predict_variance(z);
            worst = std::max(worst, std::abs(predicted - actual));
        }
        return {worst <= 1e-8, fmt("max abs error %.3g (limit 1e-8) over 200 cases", worst)};
    }

    // 3. Variance never increases after an observation (fixed reg).
    Outcome criterion3()
    {
        std::mt19937_64 rng(1003);
        std::uniform_real_distribution<double> reg_dist(0.01, 1.0);
        double worst_increase = -1.0;
        long checks = 0;
        for (int t = 0; t < 100; ++t) {
            GpModel m(random_kernel(rng), test_prior(), reg_dist(rng), 2, 1);
            const Matrix probes = random_matrix(rng, 40, 3, -2.5, 2.5);
            const Matrix Z = random_inputs(rng, 30);
            Vector before = m.predict_batch(probes, true).variance;
            for (Index i = 0; i < Z.rows(); ++i) {
                m = m.update_with_observation(Vector(Z.row(i).transpose()), random_vector(rng, 2));
                const Vector after = m.predict_batch(probes, true).variance;
                worst_increase = std::max(worst_increase, (after - before).maxCoeff());
                checks += probes.rows();
                before = after;
            }
        }
        return {worst_increase <= 1e-10, fmt("largest increase %.3g", worst_increase) + " (slack 1e-10) over "
                + std::to_string(checks) + " checks in 100 trajectories"};
    }

    cli::CampaignConfig theorem_config()
    {
        cli::CampaignConfig c;
        c.env.kind = cli::EnvKind::finite_linear; // scalar A=0.5, B=0.5; prior 0.6, 0.3; 5 x 5 lattice
        c.schedule = {ScheduleKind::theorem, 0.01, 5};
        c.cem.horizon = 5;
        c.reset.probe_all_actions = true;
        c.master_seed = 3;
        c.trials = 10;
        return c;
    }

    // 4. Theorem-1 bound on the 25-point finite grid, N = 5, 10 seeds.
    Outcome criterion4()
    {
        const auto t0 = std::chrono::steady_clock::now();
        cli::CampaignConfig c = theorem_config();
        const Environment env = cli::build_environment(c.env);
        CampaignSettings s = cli::build_settings(c, env);
        const int Nz = static_cast<int>(s.eval_grid.rows());
        const int N = c.schedule.episode_length;
        const std::vector<double> eps{0.5, 0.25, 0.1};
        std::string detail = "Nz=" + std::to_string(Nz);
        bool ok = Nz == 25;

        double worst_ode = 0.0;
        int needed = 1;
        for (double e : eps) {
            const double tc = theorem1_time(Nz, N, e);
            worst_ode = std::max(worst_ode, std::abs(theorem1_time_ode(Nz, N, e) / tc - 1.0));
            needed = std::max(needed, static_cast<int>(std::ceil(tc)));
        }
        ok = ok && worst_ode <= 0.01;
        detail += fmt(", ODE cross-check max rel diff %.2g", worst_ode);

        s.episodes = needed;
        std::vector<int> worst(eps.size(), 0), bound(eps.size(), 0);
        int held = 0, total = 0;
        for (int trial = 0; trial < c.trials; ++trial) {
            const CampaignState st = run_campaign(env, s, derive_seed(c.master_seed, static_cast<std::uint64_t>(trial)));
            for (std::size_t i = 0; i < eps.size(); ++i) {
                const ConvergenceCheck k = convergence_check(st.record, Nz, N, eps[i]);
                bound[i] = k.bound_episode;
                worst[i] = std::max(worst[i], k.observed_episode < 0 ? 1 << 30 : k.observed_episode);
                ok = ok && k.holds && k.observed_episode > 0 && k.observed_episode <= k.bound_episode;
            }
            for (const auto& r : st.record.rows) {
                held += r.assumption3_held;
                ++total;
            }
        }
        for (std::size_t i = 0; i < eps.size(); ++i)
            detail += "; eps " + fmt("%.2f", eps[i]) + ": bound " + std::to_string(bound[i]) + ", worst observed " + std::to_string(worst[i]);
        const double secs = seconds_since(t0);
        ok = ok && secs < 120.0;
        detail += "; assumption3_held in " + std::to_string(held) + "/" + std::to_string(total) + " episodes" + fmt("; %.1f s (limit 120 s)", secs);
        return {ok, detail};
    }

    cli::CampaignConfig pendulum_config(Method method, PriorChoice prior, int episodes, int trials)
    {
        cli::CampaignConfig c;
        c.method = method;
        c.prior = prior;
        c.episodes = episodes;
        c.trials = trials;
        c.schedule = {ScheduleKind::experiment, 0.01, 10};
        c.evaluation.grid_counts = {10, 10, 10};
        return c;
    }

    std::vector<CampaignRecord> run_trials(const cli::CampaignConfig& c, std::vector<GpModel>* models = nullptr)
    {
        const Environment env = cli::build_environment(c.env);
        const CampaignSettings s = cli::build_settings(c, env);
        std::vector<CampaignRecord> out;
        for (int t = 0; t < c.trials; ++t) {
            CampaignState st = run_campaign(env, s, derive_seed(c.master_seed, static_cast<std::uint64_t>(t)));
            out.push_back(st.record);
            if (models)
                models->push_back(std::move(st.model));
        }
        return out;
    }

    /// Mean squared difference of the two analytic pendulum models over the
    /// grid, compared in the GP's output representation.
    double analytic_prior_bias(const cli::CampaignConfig& c)
    {
        const Environment env = cli::build_environment(c.env);
        const Matrix grid = state_action_grid(env.spec, c.evaluation.grid_counts);
        double sum = 0.0;
        for (Index i = 0; i < grid.rows(); ++i) {
            const Vector x = grid.row(i).head(2).transpose(), u = grid.row(i).tail(1).transpose();
            const Vector a = pendulum_step(x, u, c.env.pendulum.truth, env.spec);
            const Vector b = pendulum_step(x, u, c.env.pendulum.prior, env.spec);
            const double dtheta = std::remainder(a[0] - b[0], 2.0 * M_PI);
            sum += dtheta * dtheta + (a[1] - b[1]) * (a[1] - b[1]);
        }
        return sum / static_cast<double>(grid.rows());
    }

    struct Criterion5 {
        Outcome a, b, c;
    };

    // 5. Pendulum shape and ordering checks, T = 15, N = 10, 10^3 grid, 5 trials.
    Criterion5 criterion5()
    {
        const auto t0 = std::chrono::steady_clock::now();
        const int T = 15, trials = 5;
        const cli::CampaignConfig ducb = pendulum_config(Method::discrepancy_ucb, PriorChoice::env_prior, T, trials);
        const cli::CampaignConfig vp = pendulum_config(Method::variance_planner, PriorChoice::zero, T, trials);
        const cli::CampaignConfig sg = pendulum_config(Method::sigma_greedy, PriorChoice::env_prior, T, trials);
        const auto rd = run_trials(ducb), rv = run_trials(vp), rs = run_trials(sg);
        const double secs = seconds_since(t0);

        Criterion5 out;
        double worst_rise = -1.0;
        for (const auto* runs : {&rd, &rv, &rs})
            for (const auto& r : *runs) {
                double prev = r.baseline.max_variance;
                for (const auto& row : r.rows) {
                    worst_rise = std::max(worst_rise, row.max_variance - prev);
                    prev = row.max_variance;
                }
            }
        out.a = {worst_rise <= 1e-10, fmt("largest episode-to-episode rise %.3g (slack 1e-10), 3 methods x 5 trials", worst_rise)
                + fmt(", %.1f s (limit 900 s)", secs)};
        out.a.pass = out.a.pass && secs < 900.0;

        const double bias = analytic_prior_bias(ducb);
        double baseline_err = 0.0;
        for (const auto& r : rd)
            baseline_err = std::max(baseline_err, std::abs(r.baseline.mse - bias));
        bool below = true;
        std::string per_episode;
        for (int tau = 1; tau <= 5; ++tau) {
            double md = 0, mv = 0;
            for (int t = 0; t < trials; ++t) {
                md += rd[static_cast<std::size_t>(t)].rows[static_cast<std::size_t>(tau - 1)].mse / trials;
                mv += rv[static_cast<std::size_t>(t)].rows[static_cast<std::size_t>(tau - 1)].mse / trials;
            }
            below = below && md < mv;
            per_episode += fmt(" %.3g", md) + fmt("/%.3g", mv);
        }
        out.b = {baseline_err <= 1e-12 && below, fmt("episode-0 MSE %.4g", rd.front().baseline.mse) + fmt(" vs analytic bias %.4g", bias)
                + fmt(" (max diff %.2g); mean MSE discrepancy-UCB/zero-prior variance planner, episodes 1-5:", baseline_err) + per_episode};

        auto mean_disc = [&](const std::vector<CampaignRecord>& runs) {
            double s = 0;
            int n = 0;
            for (const auto& r : runs)
                for (const auto& row : r.rows)
                    if (row.tau >= 2) {
                        s += row.mean_visited_discrepancy;
                        ++n;
                    }
            return s / n;
        };
        const double dd = mean_disc(rd), ds = mean_disc(rs);
        out.c = {dd > ds, fmt("mean visited discrepancy over episodes 2-15: discrepancy-UCB %.4f", dd) + fmt(" vs sigma-greedy %.4f", ds)};
        return out;
    }

    // 6. Swing-up MPC with the T = 30 model vs. the true-dynamics oracle, 5 seeds.
    Outcome criterion6()
    {
        const auto t0 = std::chrono::steady_clock::now();
        cli::CampaignConfig c = pendulum_config(Method::discrepancy_ucb, PriorChoice::env_prior, 30, 5);
        c.master_seed = 7;
        c.evaluation.check_assumption3 = false;
        const Environment env = cli::build_environment(c.env);
        std::vector<GpModel> models;
        run_trials(c, &models);
        double learned = 0, oracle = 0;
        std::string per_seed;
        for (int k = 0; k < c.control.seeds; ++k) {
            const cli::ControlComparison r = cli::control_comparison(env, models[static_cast<std::size_t>(k)], c,
                derive_seed(c.control.seed, static_cast<std::uint64_t>(k)));
            if (static_cast<int>(r.learned.rewards.size()) != c.control.steps)
                return {false, "reward trace length differs from the control horizon"};
            learned += r.learned.total_reward / c.control.seeds;
            oracle += r.oracle.total_reward / c.control.seeds;
            per_seed += fmt(" %.3f", r.learned.total_reward) + fmt("/%.3f", r.oracle.total_reward);
        }
        const double ratio = learned / oracle;
        return {ratio >= 0.7, fmt("mean cumulative reward learned %.3f", learned) + fmt(" vs oracle %.3f", oracle)
                + fmt(", ratio %.3f (target >= 0.70); per seed learned/oracle:", ratio) + per_seed + fmt("; %.0f s", seconds_since(t0))};
    }

    // 7. Two `run` invocations of the CLI binary give byte-identical trial CSVs.
    Outcome criterion7(const std::string& cli_path)
    {
        const fs::path dir = fs::temp_directory_path() / ("discucb_acceptance_" + std::to_string(std::random_device{}()));
        fs::create_directories(dir);
        const fs::path cfg = dir / "config.yaml";
        cli::write_file(cfg, "env: {kind: pendulum}\n"
                             "gp: {schedule: {kind: experiment, episode_length: 5}}\n"
                             "planner: {cem: {horizon: 5, iterations: 4, samples: 20, elites: 5, kept_elites: 2}}\n"
                             "reset: {state_counts: [6, 6]}\n"
                             "evaluation: {grid_counts: [8, 8, 5]}\n"
                             "episodes: 4\ntrials: 3\nmaster_seed: 11\noutput_dir: unused\n");
        std::string detail;
        bool ok = true;
        for (const char* sub : {"a", "b"}) {
            const std::string cmd = "\"" + cli_path + "\" run --config \"" + cfg.string() + "\" --output-dir \"" + (dir / sub).string() + "\" > \""
                + (dir / (std::string(sub) + ".log")).string() + "\" 2>&1";
            const int rc = std::system(cmd.c_str());
            if (rc != 0) {
                ok = false;
                detail = "run exited with status " + std::to_string(rc);
            }
        }
        int identical = 0;
        if (ok)
            for (int t = 0; t < 3; ++t) {
                const std::string name = cli::trial_name(t) + ".csv";
                const std::string a = cli::read_file(dir / "a" / name), b = cli::read_file(dir / "b" / name);
                if (a == b && a.size() > 0 && std::count(a.begin(), a.end(), '\n') == 5)
                    ++identical;
            }
        ok = ok && identical == 3;
        if (detail.empty())
            detail = std::to_string(identical) + "/3 trial CSVs byte-identical across two runs";
        fs::remove_all(dir);
        return {ok, detail};
    }

} // namespace

int main(int argc, char** argv)
{
    const std::string cli_path = argc > 1 ? argv[1] : "discucb";
    int failed = 0;
    auto report = [&](const std::string& id, const Outcome& o) {
        std::printf("%s criterion %s: %s\n", o.pass ? "PASS" : "FAIL", id.c_str(), o.detail.c_str());
        std::fflush(stdout);
        failed += !o.pass;
    };
    auto guarded = [&](const std::string& id, const std::function<Outcome()>& f) {
        try {
            report(id, f());
        }
        catch (const std::exception& e) {
            report(id, {false, std::string("exception: ") + e.what()});
        }
    };

    guarded("1 (GP oracle equivalence)", criterion1);
    guarded("2 (variance update identity)", criterion2);
    guarded("3 (variance monotonicity)", criterion3);
    guarded("4 (convergence bound on a finite grid)", criterion4);
    try {
        const Criterion5 c5 = criterion5();
        report("5a (max variance non-increasing)", c5.a);
        report("5b (prior lowers early MSE)", c5.b);
        report("5c (visited discrepancy ordering)", c5.c);
    }
    catch (const std::exception& e) {
        report("5 (pendulum curves)", {false, std::string("exception: ") + e.what()});
    }
    guarded("6 (downstream control)", criterion6);
    guarded("7 (determinism)", [&] { return criterion7(cli_path); });
    std::printf("%d criteria failed\n", failed);
    return failed == 0 ? 0 : 1;
}
