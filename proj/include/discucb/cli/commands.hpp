#ifndef DISCUCB_CLI_COMMANDS_HPP
#define DISCUCB_CLI_COMMANDS_HPP

#include <atomic>
#include <cstdlib>
#include <iostream>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Core>

#include <discucb/cli/io.hpp>

#ifndef DISCUCB_VERSION
#define DISCUCB_VERSION "0.0.0"
#endif

namespace discucb::cli {

    inline constexpr int kOk = 0;
    inline constexpr int kRuntimeFailure = 1;
    inline constexpr int kUsageError = 2;

    struct Options {
        std::vector<std::string> configs; // run / verify-theorem / control-eval use the first
        std::optional<std::string> output_dir;
        std::optional<int> trials;
        std::optional<std::uint64_t> seed;
        bool resume = false;
        std::string snapshot; // control-eval
        std::ostream* out = &std::cout;
        std::ostream* err = &std::cerr;
    };

    /// Worker count: min(trials, hardware threads, DISCREPANCY_UCB_THREADS).
    inline int worker_count(int jobs)
    {
        int n = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
        if (const char* cap = std::getenv("DISCREPANCY_UCB_THREADS"); cap && *cap) {
            int v = 0;
            const std::string s(cap);
            const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
            if (r.ec != std::errc() || r.ptr != s.data() + s.size() || v < 1)
                throw ConfigError("DISCREPANCY_UCB_THREADS must be a positive integer, got '" + s + "'");
            n = std::min(n, v);
        }
        return std::max(1, std::min(n, jobs));
    }

    /// Runs f(0..jobs-1) on a small thread pool. Exceptions stay inside f.
    template <class F>
    void parallel_for(int jobs, F&& f)
    {
        const int workers = worker_count(jobs);
        if (workers <= 1) {
            for (int i = 0; i < jobs; ++i)
                f(i);
            return;
        }
        std::atomic<int> next{0};
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                for (int i = next++; i < jobs; i = next++)
                    f(i);
            });
        for (auto& t : pool)
            t.join();
    }

    inline CampaignConfig apply_overrides(CampaignConfig c, const Options& o)
    {
        if (o.output_dir)
            c.output_dir = *o.output_dir;
        if (o.trials)
            c.trials = *o.trials;
        if (o.seed)
            c.master_seed = *o.seed;
        validate(c);
        return c;
    }

    inline std::string trial_name(int i)
    {
        char buf[32];
        std::snprintf(buf, sizeof buf, "trial_%03d", i);
        return buf;
    }

    struct TrialsOutcome {
        std::vector<CampaignRecord> records; // completed trials, in index order
        std::vector<std::string> errors; // one message per failed trial
        bool ok() const { return errors.empty(); }
    };

    inline Json manifest_json(const CampaignConfig& c, const std::string& command, const std::vector<std::string>& trial_status)
    {
        Json trials = Json::array();
        for (int i = 0; i < c.trials; ++i)
            trials.push_back({{"index", i}, {"seed", derive_seed(c.master_seed, static_cast<std::uint64_t>(i))},
                {"csv", trial_name(i) + ".csv"}, {"snapshot", trial_name(i) + ".json"},
                {"status", trial_status[static_cast<std::size_t>(i)]}});
        return Json{{"tool", "discucb"}, {"command", command}, {"version", DISCUCB_VERSION},
            {"eigen_version", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." + std::to_string(EIGEN_MINOR_VERSION)},
#ifdef __VERSION__
            {"compiler", __VERSION__},
#endif
            {"config_hash", config_hash(c)}, {"master_seed", c.master_seed}, {"episodes", c.episodes}, {"trials", trials},
            {"config", serialize_config(c)}};
    }

    /// Executes all trials of one config into c.output_dir. Each trial
    /// checkpoints its CSV and snapshot after every episode.
    inline TrialsOutcome run_trials(const CampaignConfig& c, bool resume, const std::string& command, std::ostream& log)
    {
        const Environment env = build_environment(c.env);
        const CampaignSettings settings = build_settings(c, env);
        const std::string hash = config_hash(c);
        const fs::path dir(c.output_dir);
        fs::create_directories(dir);
        write_file(dir / "grid.csv", grid_csv(settings.eval_grid, env.spec.coordinate_names()));

        std::vector<std::optional<CampaignState>> resumed(static_cast<std::size_t>(c.trials));
        if (resume)
            for (int i = 0; i < c.trials; ++i) {
                const fs::path snap = dir / (trial_name(i) + ".json");
                if (!fs::exists(snap))
                    continue;
                Snapshot s = load_snapshot(snap);
                if (s.config_hash != hash)
                    throw ConfigError("cannot resume " + snap.string() + ": written by a different config");
                resumed[static_cast<std::size_t>(i)] = std::move(s.state);
            }

        std::vector<std::optional<CampaignRecord>> done(static_cast<std::size_t>(c.trials));
        std::vector<std::string> status(static_cast<std::size_t>(c.trials), "pending");
        std::vector<double> elapsed(static_cast<std::size_t>(c.trials), 0.0);
        std::mutex log_mutex;

        parallel_for(c.trials, [&](int i) {
            const auto ui = static_cast<std::size_t>(i);
            const std::uint64_t seed = derive_seed(c.master_seed, static_cast<std::uint64_t>(i));
            auto checkpoint = [&](const CampaignState& st) {
                write_file(dir / (trial_name(i) + ".json"), snapshot_json(st, hash, i, c.master_seed).dump() + "\n");
                write_file(dir / (trial_name(i) + ".csv"), trial_csv(st.record));
            };
            try {
                CampaignState st = run_campaign(env, settings, seed, checkpoint, resumed[ui] ? &*resumed[ui] : nullptr);
                st.record.master_seed = c.master_seed;
                st.record.config_hash = hash;
                checkpoint(st);
                elapsed[ui] = st.elapsed_s;
                done[ui] = st.record;
                status[ui] = "complete";
                std::lock_guard lock(log_mutex);
                log << command << ": " << trial_name(i) << " done (" << st.record.rows.size() << " episodes)\n";
            }
            catch (const std::exception& e) {
                status[ui] = std::string("failed: ") + e.what();
                std::lock_guard lock(log_mutex);
                log << command << ": " << trial_name(i) << " failed: " << e.what() << "\n";
            }
        });

        TrialsOutcome out;
        std::string timings = "trial,elapsed_s\n";
        for (int i = 0; i < c.trials; ++i) {
            const auto ui = static_cast<std::size_t>(i);
            if (done[ui]) {
                out.records.push_back(*done[ui]);
                timings += std::to_string(i) + "," + format_double(elapsed[ui]) + "\n";
            }
            else
                out.errors.push_back(trial_name(i) + ": " + status[ui]);
        }
        write_file(dir / "manifest.json", manifest_json(c, command, status).dump(2) + "\n");
        write_file(dir / "timings.csv", timings);
        if (!out.records.empty()) {
            write_file(dir / "aggregate.csv", aggregate_csv(aggregate(out.records)));
            write_file(dir / "baseline.csv", baseline_csv(out.records));
        }
        return out;
    }

    enum class Curve { max_variance, mse, discrepancy };

    /// Curve over tau = 0..T (tau 0 from the baselines) with min/max band.
    inline Series curve_series(const std::string& name, const std::vector<CampaignRecord>& recs, Curve which)
    {
        Series s;
        s.name = name;
        auto pick = [&](const EpisodeRow& r) {
            return which == Curve::max_variance ? r.max_variance : which == Curve::mse ? r.mse : r.mean_visited_discrepancy;
        };
        if (recs.empty())
            return s;
        if (which != Curve::discrepancy) {
            std::vector<double> v;
            for (const auto& r : recs)
                v.push_back(pick(r.baseline));
            const Band b = band_of(v);
            s.x.push_back(0);
            s.mean.push_back(b.mean);
            s.lo.push_back(b.min);
            s.hi.push_back(b.max);
        }
        for (const auto& a : aggregate(recs)) {
            const Band& b = which == Curve::max_variance ? a.max_variance : which == Curve::mse ? a.mse : a.discrepancy;
            s.x.push_back(a.tau);
            s.mean.push_back(b.mean);
            s.lo.push_back(b.min);
            s.hi.push_back(b.max);
        }
        return s;
    }

    inline void write_curve_plots(const fs::path& dir, const std::vector<std::pair<std::string, std::vector<CampaignRecord>>>& runs)
    {
        std::vector<Series> var, mse, disc;
        for (const auto& [name, recs] : runs) {
            var.push_back(curve_series(name, recs, Curve::max_variance));
            mse.push_back(curve_series(name, recs, Curve::mse));
            disc.push_back(curve_series(name, recs, Curve::discrepancy));
        }
        write_file(dir / "max_variance.svg", svg_plot("Maximum variance over the test grid", "episode", "max variance", var, true));
        write_file(dir / "mse.svg", svg_plot("MSE of the learned model", "episode", "MSE", mse, true));
        write_file(dir / "visited_discrepancy.svg",
            svg_plot("Prior discrepancy at visited points", "episode", "mean discrepancy", disc));
    }

    inline int report_trials(const TrialsOutcome& t, std::ostream& err)
    {
        for (const auto& e : t.errors)
            err << "error: " << e << "\n";
        return t.ok() ? kOk : kRuntimeFailure;
    }

    template <class F>
    int guarded(const Options& o, F&& body)
    {
        try {
            return body();
        }
        catch (const ConfigError& e) {
            *o.err << "config error: " << e.what() << "\n";
            return kUsageError;
        }
        catch (const std::exception& e) {
            *o.err << "error: " << e.what() << "\n";
            return kRuntimeFailure;
        }
    }

    inline int cmd_run(const Options& o)
    {
        return guarded(o, [&] {
            if (o.configs.size() != 1)
                throw ConfigError("run takes exactly one --config");
            const CampaignConfig c = apply_overrides(load_config(o.configs.front()), o);
            const TrialsOutcome t = run_trials(c, o.resume, "run", *o.out);
            if (!t.records.empty())
                write_curve_plots(c.output_dir, {{to_string(c.method), t.records}});
            *o.out << "run: " << t.records.size() << "/" << c.trials << " trials complete, output in " << c.output_dir << "\n";
            return report_trials(t, *o.err);
        });
    }

    inline std::string run_label(const CampaignConfig& c)
    {
        std::string label = to_string(c.method);
        if (c.prior != PriorChoice::env_prior)
            label += "+" + to_string(c.prior) + "_prior";
        return label;
    }

    /// Summary line per compared run: final-episode means, the mean MSE over
    /// episodes 1..5 and the mean visited discrepancy over episodes 2..T.
    struct SummaryRow {
        std::string label;
        int final_tau = 0;
        double final_max_variance = 0, final_mse = 0, final_discrepancy = 0;
        double mse_first5 = 0, discrepancy_from2 = 0;
    };

    inline SummaryRow summarize(const std::string& label, const std::vector<CampaignRecord>& recs)
    {
        SummaryRow s;
        s.label = label;
        const auto agg = aggregate(recs);
        if (agg.empty())
            return s;
        s.final_tau = agg.back().tau;
        s.final_max_variance = agg.back().max_variance.mean;
        s.final_mse = agg.back().mse.mean;
        s.final_discrepancy = agg.back().discrepancy.mean;
        double m = 0, d = 0;
        int nm = 0, nd = 0;
        for (const auto& a : agg) {
            if (a.tau <= 5) {
                m += a.mse.mean;
                ++nm;
            }
            if (a.tau >= 2) {
                d += a.discrepancy.mean;
                ++nd;
            }
        }
        s.mse_first5 = nm ? m / nm : std::numeric_limits<double>::quiet_NaN();
        s.discrepancy_from2 = nd ? d / nd : std::numeric_limits<double>::quiet_NaN();
        return s;
    }

    inline std::string summary_csv(const std::vector<SummaryRow>& rows)
    {
        std::string out = "run,final_tau,max_variance_mean,mse_mean,mean_visited_discrepancy_mean,mse_mean_tau1to5,"
                          "mean_visited_discrepancy_mean_tau2on\n";
        for (const auto& r : rows)
            out += r.label + "," + std::to_string(r.final_tau) + "," + format_double(r.final_max_variance) + ","
                + format_double(r.final_mse) + "," + format_double(r.final_discrepancy) + "," + format_double(r.mse_first5) + ","
                + format_double(r.discrepancy_from2) + "\n";
        return out;
    }

    inline void check_comparable(const CampaignConfig& a, const CampaignConfig& b)
    {
        if (!(a.env == b.env))
            throw ConfigError("compare: configs use different environments");
        const Environment env = build_environment(a.env);
        const Matrix ga = evaluation_grid(a, env.spec), gb = evaluation_grid(b, env.spec);
        if (ga.rows() != gb.rows() || ga.cols() != gb.cols() || ga != gb)
            throw ConfigError("compare: configs use different evaluation grids");
        if (a.episodes != b.episodes || a.schedule.episode_length != b.schedule.episode_length)
            throw ConfigError("compare: configs differ in episode count or length");
    }

    inline int cmd_compare(const Options& o)
    {
        return guarded(o, [&] {
            if (o.configs.size() < 2)
                throw ConfigError("compare needs at least two --config files");
            std::vector<CampaignConfig> cs;
            for (const auto& p : o.configs)
                cs.push_back(apply_overrides(load_config(p), Options{{}, std::nullopt, o.trials, o.seed}));
            for (std::size_t i = 1; i < cs.size(); ++i)
                check_comparable(cs.front(), cs[i]);
            const fs::path root = o.output_dir ? fs::path(*o.output_dir) : fs::path(cs.front().output_dir);

            std::set<std::string> used;
            std::vector<std::pair<std::string, std::vector<CampaignRecord>>> runs;
            int code = kOk;
            for (auto& c : cs) {
                std::string label = run_label(c);
                for (int k = 2; used.count(label); ++k)
                    label = run_label(c) + "_" + std::to_string(k);
                used.insert(label);
                c.output_dir = (root / label).string();
                const TrialsOutcome t = run_trials(c, o.resume, "compare", *o.out);
                if (report_trials(t, *o.err) != kOk)
                    code = kRuntimeFailure;
                runs.emplace_back(label, t.records);
            }
            write_curve_plots(root, runs);
            std::vector<SummaryRow> rows;
            for (const auto& [label, recs] : runs)
                rows.push_back(summarize(label, recs));
            const std::string table = summary_csv(rows);
            write_file(root / "summary.csv", table);
            *o.out << table;
            return code;
        });
    }

    struct TheoremLine {
        double eps = 0;
        double t_closed = 0, t_ode = 0;
        int trial = 0;
        ConvergenceCheck check;
    };

    inline int cmd_verify_theorem(const Options& o)
    {
        return guarded(o, [&] {
            if (o.configs.size() != 1)
                throw ConfigError("verify-theorem takes exactly one --config");
            CampaignConfig c = apply_overrides(load_config(o.configs.front()), o);
            if (c.env.kind != EnvKind::finite_linear)
                throw ConfigError("verify-theorem needs a finite-grid environment (env.kind: finite_linear)");
            if (c.schedule.kind != ScheduleKind::theorem)
                throw ConfigError("verify-theorem needs gp.schedule.kind: theorem");
            if (c.theorem_eps.empty())
                throw ConfigError("verify-theorem needs at least one theorem.eps value");
            const Environment env = build_environment(c.env);
            const int Nz = static_cast<int>(evaluation_grid(c, env.spec).rows());
            const int N = c.schedule.episode_length;
            int needed = 1;
            for (double eps : c.theorem_eps)
                if (eps < Nz)
                    needed = std::max(needed, static_cast<int>(std::ceil(theorem1_time(Nz, N, eps))));
            if (c.episodes < needed) {
                *o.out << "verify-theorem: extending the campaign from " << c.episodes << " to " << needed << " episodes\n";
                c.episodes = needed;
            }
            const TrialsOutcome t = run_trials(c, o.resume, "verify-theorem", *o.out);
            if (!t.ok())
                return report_trials(t, *o.err);

            std::string csv = "eps,t_closed,t_ode,bound_episode,trial,observed_episode,variance_at_bound,holds\n";
            bool all = true;
            *o.out << "Nz=" << Nz << " N=" << N << "\n";
            for (double eps : c.theorem_eps) {
                const double tc = eps < Nz ? theorem1_time(Nz, N, eps) : 0.0;
                const double to = eps < Nz ? theorem1_time_ode(Nz, N, eps) : 0.0;
                int worst = 0, holds = 0;
                for (std::size_t i = 0; i < t.records.size(); ++i) {
                    const ConvergenceCheck k = convergence_check(t.records[i], Nz, N, eps);
                    all = all && k.holds;
                    holds += k.holds;
                    worst = std::max(worst, k.observed_episode < 0 ? std::numeric_limits<int>::max() : k.observed_episode);
                    csv += format_double(eps) + "," + format_double(tc) + "," + format_double(to) + "," + std::to_string(k.bound_episode)
                        + "," + std::to_string(i) + "," + std::to_string(k.observed_episode) + "," + format_double(k.variance_at_bound)
                        + "," + (k.holds ? "1" : "0") + "\n";
                }
                const int bound = std::max(1, static_cast<int>(std::ceil(tc)));
                *o.out << "eps=" << eps << " bound t=" << tc << " (ode " << to << ") episode " << bound << ", worst observed "
                       << (worst == std::numeric_limits<int>::max() ? std::string("never") : std::to_string(worst)) << ", holds in "
                       << holds << "/" << t.records.size() << " trials\n";
            }
            write_file(fs::path(c.output_dir) / "theorem.csv", csv);
            *o.out << (all ? "verify-theorem: all bounds hold\n" : "verify-theorem: some bounds FAILED\n");
            return all ? kOk : kRuntimeFailure;
        });
    }

    struct ControlComparison {
        ControlTrace learned, oracle;
    };

    /// Swing-up MPC from the configured initial state with the learned model
    /// and with the true dynamics, sharing the planner seed.
    inline ControlComparison control_comparison(const Environment& env, const GpModel& learned, const CampaignConfig& c,
        std::uint64_t seed)
    {
        const Vector x0 = Eigen::Map<const Vector>(c.control.initial_state.data(), static_cast<Index>(c.control.initial_state.size()));
        const GpModel oracle = oracle_model(env, KernelParams{c.gamma});
        return {run_task_mpc(env, learned, pendulum_swing_cost, x0, c.control.steps, c.control.cem, seed),
            run_task_mpc(env, oracle, pendulum_swing_cost, x0, c.control.steps, c.control.cem, seed)};
    }

    inline int cmd_control_eval(const Options& o)
    {
        return guarded(o, [&] {
            if (o.configs.size() != 1)
                throw ConfigError("control-eval takes exactly one --config");
            if (o.snapshot.empty())
                throw ConfigError("control-eval needs --snapshot");
            const CampaignConfig c = apply_overrides(load_config(o.configs.front()), o);
            if (c.env.kind != EnvKind::pendulum)
                throw ConfigError("control-eval supports the pendulum environment only");
            if (!fs::exists(o.snapshot))
                throw ConfigError("snapshot '" + o.snapshot + "' does not exist");
            Snapshot snap;
            try {
                snap = load_snapshot(o.snapshot);
            }
            catch (const InputError& e) {
                throw ConfigError(e.what());
            }
            if (snap.config_hash != config_hash(c))
                throw ConfigError("snapshot was written by a different config (hash " + snap.config_hash + ", config " + config_hash(c) + ")");

            const Environment env = build_environment(c.env);
            const CampaignSettings s = build_settings(c, env);
            const GpModel learned = replay_model(env, s, snap.state.logs);

            const fs::path dir(c.output_dir);
            std::string rewards = "step,seed,learned_reward,learned_cumulative,oracle_reward,oracle_cumulative\n";
            std::string summary = "seed,learned_total,oracle_total,ratio\n";
            std::vector<std::vector<double>> lc, oc;
            double lsum = 0, osum = 0;
            for (int k = 0; k < c.control.seeds; ++k) {
                const ControlComparison r = control_comparison(env, learned, c, derive_seed(c.control.seed, static_cast<std::uint64_t>(k)));
                lc.push_back(control_score(r.learned.rewards));
                oc.push_back(control_score(r.oracle.rewards));
                for (std::size_t t = 0; t < r.learned.rewards.size(); ++t)
                    rewards += std::to_string(t + 1) + "," + std::to_string(k) + "," + format_double(r.learned.rewards[t]) + ","
                        + format_double(lc.back()[t]) + "," + format_double(r.oracle.rewards[t]) + "," + format_double(oc.back()[t]) + "\n";
                summary += std::to_string(k) + "," + format_double(r.learned.total_reward) + "," + format_double(r.oracle.total_reward)
                    + "," + format_double(r.learned.total_reward / r.oracle.total_reward) + "\n";
                lsum += r.learned.total_reward;
                osum += r.oracle.total_reward;
            }
            write_file(dir / "control_rewards.csv", rewards);
            write_file(dir / "control_summary.csv", summary);

            std::vector<Series> plot;
            for (const auto& [name, traces] : {std::pair{std::string("learned model"), &lc}, std::pair{std::string("oracle"), &oc}}) {
                Series s;
                s.name = name;
                for (std::size_t t = 0; t < traces->front().size(); ++t) {
                    std::vector<double> v;
                    for (const auto& tr : *traces)
                        v.push_back(tr[t]);
                    const Band b = band_of(v);
                    s.x.push_back(static_cast<double>(t + 1));
                    s.mean.push_back(b.mean);
                    s.lo.push_back(b.min);
                    s.hi.push_back(b.max);
                }
                plot.push_back(std::move(s));
            }
            write_file(dir / "control.svg", svg_plot("Cumulative reward, swing-up MPC", "step", "cumulative reward", plot));
            *o.out << "control-eval: learned " << lsum / c.control.seeds << ", oracle " << osum / c.control.seeds << ", ratio "
                   << lsum / osum << "\n";
            return kOk;
        });
    }

} // namespace discucb::cli

#endif
