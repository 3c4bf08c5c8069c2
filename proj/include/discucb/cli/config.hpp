#ifndef DISCUCB_CLI_CONFIG_HPP
#define DISCUCB_CLI_CONFIG_HPP

#include <cstdint>
#include <cstdio>
#include <map>
#include <numbers>
#include <set>
#include <string>
#include <vector>

#include <yaml-cpp/yaml.h>

#include <discucb/episodic/campaign.hpp>
#include <discucb/planner/task_mpc.hpp>

namespace discucb::cli {

    /// Bad config file or command line. `line` is 1-based, 0 if unknown.
    class ConfigError : public std::runtime_error {
    public:
        ConfigError(const std::string& what, int line = 0)
            : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line(line)
        {
        }
        int line;
    };

    enum class EnvKind { pendulum, finite_linear };

    struct PendulumConfig {
        double dt = 0.05;
        PendulumParams truth{9.81, 1.0, 1.0};
        PendulumParams prior{9.0, 0.5, 2.0};
        bool operator==(const PendulumConfig&) const = default;
    };

    struct LinearConfig {
        std::vector<std::vector<double>> A{{0.5}}, B{{0.5}}, prior_A{{0.6}}, prior_B{{0.3}};
        std::vector<Interval> state_bounds{{-1.0, 1.0}};
        std::vector<Interval> action_bounds{{-1.0, 1.0}};
        std::vector<int> state_lattice{5};
        std::vector<int> action_lattice{5};
        bool operator==(const LinearConfig&) const = default;
    };

    struct EnvConfig {
        EnvKind kind = EnvKind::pendulum;
        double noise_std = 0.01;
        PendulumConfig pendulum;
        LinearConfig linear;
        bool operator==(const EnvConfig&) const = default;
    };

    struct ResetConfig {
        std::vector<int> state_counts{10, 10}; // ignored on finite envs (the lattice is used)
        bool probe_all_actions = false; // false: probe u = 0 only
        std::vector<int> probe_counts{5};
        bool operator==(const ResetConfig&) const = default;
    };

    struct EvalConfig {
        std::vector<int> grid_counts{20, 20, 20}; // ignored on finite envs
        bool check_assumption3 = true;
        bool record_wall_time = false;
        bool operator==(const EvalConfig&) const = default;
    };

    struct ControlConfig {
        int steps = 200;
        std::vector<double> initial_state{std::numbers::pi, 0.0};
        int seeds = 5;
        std::uint64_t seed = 99;
        CemConfig cem;
        bool operator==(const ControlConfig& o) const
        {
            return steps == o.steps && initial_state == o.initial_state && seeds == o.seeds && seed == o.seed
                && cem_equal(cem, o.cem);
        }
        static bool cem_equal(const CemConfig& a, const CemConfig& b)
        {
            return a.horizon == b.horizon && a.iterations == b.iterations && a.samples == b.samples && a.elites == b.elites
                && a.kept_elites == b.kept_elites && a.init_std == b.init_std && a.min_std == b.min_std
                && a.momentum == b.momentum && a.noise_exponent == b.noise_exponent;
        }
    };

    struct CampaignConfig {
        EnvConfig env;
        Method method = Method::discrepancy_ucb;
        PriorChoice prior = PriorChoice::env_prior;
        double gamma = 0.5;
        ScheduleConfig schedule{ScheduleKind::experiment, 0.01, 10};
        CemConfig cem;
        double beta = 2.0;
        BetaKind beta_kind = BetaKind::constant;
        DiscrepancyNorm norm = DiscrepancyNorm::l2;
        int greedy_candidates = 21;
        ResetConfig reset;
        EvalConfig evaluation;
        int episodes = 30;
        int trials = 10;
        std::uint64_t master_seed = 0;
        std::string output_dir = "out";
        std::vector<double> theorem_eps{0.5, 0.25, 0.1};
        ControlConfig control;

        bool operator==(const CampaignConfig& o) const
        {
            return env == o.env && method == o.method && prior == o.prior && gamma == o.gamma
                && schedule.kind == o.schedule.kind && schedule.fixed_value == o.schedule.fixed_value
                && schedule.episode_length == o.schedule.episode_length && ControlConfig::cem_equal(cem, o.cem) && beta == o.beta
                && beta_kind == o.beta_kind && norm == o.norm && greedy_candidates == o.greedy_candidates && reset == o.reset
                && evaluation == o.evaluation && episodes == o.episodes && trials == o.trials && master_seed == o.master_seed
                && output_dir == o.output_dir && theorem_eps == o.theorem_eps && control == o.control;
        }
    };

    inline std::string to_string(EnvKind k) { return k == EnvKind::finite_linear ? "finite_linear" : "pendulum"; }

    namespace detail {
        inline int line_of(const YAML::Node& n) { return n.Mark().line >= 0 ? n.Mark().line + 1 : 0; }

        inline void require_map(const YAML::Node& n, const std::string& where)
        {
            if (!n.IsMap())
                throw ConfigError(where + " must be a mapping", line_of(n));
        }

        inline void reject_unknown(const YAML::Node& n, const std::string& where, const std::set<std::string>& allowed)
        {
            require_map(n, where);
            for (const auto& kv : n) {
                const std::string key = kv.first.as<std::string>();
                if (!allowed.count(key))
                    throw ConfigError("unknown key '" + key + "' in " + where, line_of(kv.first));
            }
        }

        template <class T>
        T scalar(const YAML::Node& n, const std::string& key)
        {
            if (!n.IsScalar())
                throw ConfigError(key + ": expected a scalar", line_of(n));
            try {
                return n.as<T>();
            }
            catch (const YAML::Exception&) {
                throw ConfigError(key + ": cannot parse '" + n.Scalar() + "'", line_of(n));
            }
        }

        template <class T>
        void read(const YAML::Node& map, const char* key, T& out)
        {
            if (const YAML::Node n = map[key])
                out = scalar<T>(n, key);
        }

        template <class T>
        void read_list(const YAML::Node& map, const char* key, std::vector<T>& out)
        {
            const YAML::Node n = map[key];
            if (!n)
                return;
            if (!n.IsSequence())
                throw ConfigError(std::string(key) + ": expected a list", line_of(n));
            out.clear();
            for (const auto& v : n)
                out.push_back(scalar<T>(v, key));
        }

        inline void read_matrix(const YAML::Node& map, const char* key, std::vector<std::vector<double>>& out)
        {
            const YAML::Node n = map[key];
            if (!n)
                return;
            if (!n.IsSequence())
                throw ConfigError(std::string(key) + ": expected a list of rows", line_of(n));
            out.clear();
            for (const auto& row : n) {
                if (!row.IsSequence())
                    throw ConfigError(std::string(key) + ": each row must be a list", line_of(row));
                std::vector<double> r;
                for (const auto& v : row)
                    r.push_back(scalar<double>(v, key));
                out.push_back(std::move(r));
            }
        }

        inline void read_intervals(const YAML::Node& map, const char* key, std::vector<Interval>& out)
        {
            std::vector<std::vector<double>> rows;
            read_matrix(map, key, rows);
            if (!map[key])
                return;
            out.clear();
            for (const auto& r : rows) {
                if (r.size() != 2)
                    throw ConfigError(std::string(key) + ": each bound is [lo, hi]", line_of(map[key]));
                out.push_back({r[0], r[1]});
            }
        }

        template <class E>
        E enum_value(const YAML::Node& map, const char* key, E fallback, const std::map<std::string, E>& names)
        {
            const YAML::Node n = map[key];
            if (!n)
                return fallback;
            const std::string s = scalar<std::string>(n, key);
            const auto it = names.find(s);
            if (it == names.end()) {
                std::string opts;
                for (const auto& [k, _] : names)
                    opts += (opts.empty() ? "" : ", ") + k;
                throw ConfigError(std::string(key) + ": '" + s + "' is not one of {" + opts + "}", line_of(n));
            }
            return it->second;
        }

        inline void read_pendulum_params(const YAML::Node& map, const char* key, PendulumParams& p)
        {
            const YAML::Node n = map[key];
            if (!n)
                return;
            reject_unknown(n, std::string("env.pendulum.") + key, {"g", "m", "l"});
            read(n, "g", p.g);
            read(n, "m", p.m);
            read(n, "l", p.l);
        }

        inline void read_cem(const YAML::Node& n, const std::string& where, CemConfig& c)
        {
            reject_unknown(n, where,
                {"horizon", "iterations", "samples", "elites", "kept_elites", "init_std", "min_std", "momentum", "noise_exponent"});
            read(n, "horizon", c.horizon);
            read(n, "iterations", c.iterations);
            read(n, "samples", c.samples);
            read(n, "elites", c.elites);
            read(n, "kept_elites", c.kept_elites);
            read(n, "init_std", c.init_std);
            read(n, "min_std", c.min_std);
            read(n, "momentum", c.momentum);
            read(n, "noise_exponent", c.noise_exponent);
        }

        inline const std::map<std::string, Method>& method_names()
        {
            static const std::map<std::string, Method> m{{"discrepancy_ucb", Method::discrepancy_ucb},
                {"variance_planner", Method::variance_planner}, {"sigma_greedy", Method::sigma_greedy}};
            return m;
        }
    } // namespace detail

    /// Semantic checks beyond the schema. Throws ConfigError.
    inline void validate(const CampaignConfig& c)
    {
        auto fail = [](const std::string& m) { throw ConfigError(m); };
        if (c.trials < 1)
            fail("trials must be >= 1");
        if (c.episodes < 1)
            fail("episodes must be >= 1");
        if (c.greedy_candidates < 1)
            fail("planner.greedy_candidates must be >= 1");
        if (c.output_dir.empty())
            fail("output_dir must not be empty");
        for (double e : c.theorem_eps)
            if (!(e > 0.0))
                fail("theorem.eps values must be positive");
        if (c.control.steps < 1 || c.control.seeds < 1)
            fail("control.steps and control.seeds must be >= 1");
        try {
            KernelParams{c.gamma}.validate();
            c.schedule.validate();
            c.cem.validate();
            c.control.cem.validate();
            AcquisitionConfig{c.beta, c.norm, true, nullptr}.validate();
            NoiseSpec{c.env.noise_std, 0}.validate();
            if (c.env.kind == EnvKind::pendulum) {
                c.env.pendulum.truth.validate();
                c.env.pendulum.prior.validate();
                if (!(c.env.pendulum.dt > 0.0))
                    fail("env.pendulum.dt must be positive");
                if (c.control.initial_state.size() != 2)
                    fail("control.initial_state must have 2 entries for the pendulum");
                if (c.reset.state_counts.size() != 2 || c.evaluation.grid_counts.size() != 3)
                    fail("pendulum needs reset.state_counts of length 2 and evaluation.grid_counts of length 3");
                if (c.reset.probe_counts.size() != 1)
                    fail("reset.probe_counts must have one entry per action coordinate");
            }
            else {
                const LinearConfig& l = c.env.linear;
                finite_linear_spec(l.state_bounds, l.action_bounds, l.state_lattice, l.action_lattice);
                const std::size_t sd = l.state_bounds.size(), ad = l.action_bounds.size();
                auto shape = [&](const std::vector<std::vector<double>>& M, std::size_t cols, const char* name) {
                    if (M.size() != sd)
                        fail(std::string("env.finite_linear.") + name + " needs one row per state coordinate");
                    for (const auto& r : M)
                        if (r.size() != cols)
                            fail(std::string("env.finite_linear.") + name + " has a row of the wrong length");
                };
                shape(l.A, sd, "A");
                shape(l.prior_A, sd, "prior_A");
                shape(l.B, ad, "B");
                shape(l.prior_B, ad, "prior_B");
            }
        }
        catch (const InputError& e) {
            throw ConfigError(e.what());
        }
    }

    inline CampaignConfig parse_config(const YAML::Node& root)
    {
        using namespace detail;
        CampaignConfig c;
        if (!root || root.IsNull())
            throw ConfigError("empty config");
        reject_unknown(root, "config",
            {"env", "method", "prior", "gp", "planner", "reset", "evaluation", "episodes", "trials", "master_seed", "output_dir",
                "theorem", "control"});

        if (const YAML::Node env = root["env"]) {
            reject_unknown(env, "env", {"kind", "noise_std", "pendulum", "finite_linear"});
            c.env.kind = enum_value(env, "kind", c.env.kind, {{"pendulum", EnvKind::pendulum}, {"finite_linear", EnvKind::finite_linear}});
            read(env, "noise_std", c.env.noise_std);
            if (const YAML::Node p = env["pendulum"]) {
                reject_unknown(p, "env.pendulum", {"dt", "truth", "prior"});
                read(p, "dt", c.env.pendulum.dt);
                read_pendulum_params(p, "truth", c.env.pendulum.truth);
                read_pendulum_params(p, "prior", c.env.pendulum.prior);
            }
            if (const YAML::Node l = env["finite_linear"]) {
                reject_unknown(l, "env.finite_linear",
                    {"A", "B", "prior_A", "prior_B", "state_bounds", "action_bounds", "state_lattice", "action_lattice"});
                read_matrix(l, "A", c.env.linear.A);
                read_matrix(l, "B", c.env.linear.B);
                read_matrix(l, "prior_A", c.env.linear.prior_A);
                read_matrix(l, "prior_B", c.env.linear.prior_B);
                read_intervals(l, "state_bounds", c.env.linear.state_bounds);
                read_intervals(l, "action_bounds", c.env.linear.action_bounds);
                read_list(l, "state_lattice", c.env.linear.state_lattice);
                read_list(l, "action_lattice", c.env.linear.action_lattice);
            }
        }
        c.method = enum_value(root, "method", c.method, method_names());
        c.prior = enum_value(root, "prior", c.prior,
            {{"env_prior", PriorChoice::env_prior}, {"zero", PriorChoice::zero}, {"truth", PriorChoice::truth}});

        if (const YAML::Node gp = root["gp"]) {
            reject_unknown(gp, "gp", {"gamma", "schedule"});
            read(gp, "gamma", c.gamma);
            if (const YAML::Node s = gp["schedule"]) {
                reject_unknown(s, "gp.schedule", {"kind", "fixed_value", "episode_length"});
                c.schedule.kind = enum_value(s, "kind", c.schedule.kind,
                    {{"theorem", ScheduleKind::theorem}, {"experiment", ScheduleKind::experiment}, {"fixed", ScheduleKind::fixed}});
                read(s, "fixed_value", c.schedule.fixed_value);
                read(s, "episode_length", c.schedule.episode_length);
            }
        }
        if (const YAML::Node p = root["planner"]) {
            reject_unknown(p, "planner", {"cem", "acquisition", "greedy_candidates"});
            if (const YAML::Node cem = p["cem"])
                read_cem(cem, "planner.cem", c.cem);
            if (const YAML::Node a = p["acquisition"]) {
                reject_unknown(a, "planner.acquisition", {"beta", "beta_kind", "norm"});
                read(a, "beta", c.beta);
                c.beta_kind = enum_value(a, "beta_kind", c.beta_kind, {{"constant", BetaKind::constant}, {"log", BetaKind::log}});
                c.norm = enum_value(a, "norm", c.norm, {{"l2", DiscrepancyNorm::l2}, {"l1", DiscrepancyNorm::l1}, {"linf", DiscrepancyNorm::linf}});
            }
            read(p, "greedy_candidates", c.greedy_candidates);
        }
        if (const YAML::Node r = root["reset"]) {
            reject_unknown(r, "reset", {"state_counts", "probe", "probe_counts"});
            read_list(r, "state_counts", c.reset.state_counts);
            c.reset.probe_all_actions = enum_value(r, "probe", c.reset.probe_all_actions, {{"zero", false}, {"grid", true}});
            read_list(r, "probe_counts", c.reset.probe_counts);
        }
        if (const YAML::Node e = root["evaluation"]) {
            reject_unknown(e, "evaluation", {"grid_counts", "check_assumption3", "record_wall_time"});
            read_list(e, "grid_counts", c.evaluation.grid_counts);
            read(e, "check_assumption3", c.evaluation.check_assumption3);
            read(e, "record_wall_time", c.evaluation.record_wall_time);
        }
        read(root, "episodes", c.episodes);
        read(root, "trials", c.trials);
        read(root, "master_seed", c.master_seed);
        read(root, "output_dir", c.output_dir);
        if (const YAML::Node t = root["theorem"]) {
            reject_unknown(t, "theorem", {"eps"});
            read_list(t, "eps", c.theorem_eps);
        }
        if (const YAML::Node k = root["control"]) {
            reject_unknown(k, "control", {"steps", "initial_state", "seeds", "seed", "cem"});
            read(k, "steps", c.control.steps);
            read_list(k, "initial_state", c.control.initial_state);
            read(k, "seeds", c.control.seeds);
            read(k, "seed", c.control.seed);
            if (const YAML::Node cem = k["cem"])
                read_cem(cem, "control.cem", c.control.cem);
        }
        validate(c);
        return c;
    }

    inline CampaignConfig parse_config_string(const std::string& text)
    {
        try {
            return parse_config(YAML::Load(text));
        }
        catch (const YAML::ParserException& e) {
            throw ConfigError(e.msg, e.mark.line + 1);
        }
    }

    inline CampaignConfig load_config(const std::string& path)
    {
        try {
            return parse_config(YAML::LoadFile(path));
        }
        catch (const YAML::BadFile&) {
            throw ConfigError("cannot read config file '" + path + "'");
        }
        catch (const YAML::ParserException& e) {
            throw ConfigError(e.msg, e.mark.line + 1);
        }
    }

    namespace detail {
        inline void emit_cem(YAML::Emitter& out, const CemConfig& c)
        {
            out << YAML::BeginMap;
            out << YAML::Key << "horizon" << YAML::Value << c.horizon;
            out << YAML::Key << "iterations" << YAML::Value << c.iterations;
            out << YAML::Key << "samples" << YAML::Value << c.samples;
            out << YAML::Key << "elites" << YAML::Value << c.elites;
            out << YAML::Key << "kept_elites" << YAML::Value << c.kept_elites;
            out << YAML::Key << "init_std" << YAML::Value << c.init_std;
            out << YAML::Key << "min_std" << YAML::Value << c.min_std;
            out << YAML::Key << "momentum" << YAML::Value << c.momentum;
            out << YAML::Key << "noise_exponent" << YAML::Value << c.noise_exponent;
            out << YAML::EndMap;
        }

        template <class T>
        void emit_flow(YAML::Emitter& out, const std::vector<T>& v)
        {
            out << YAML::Flow << YAML::BeginSeq;
            for (const auto& x : v)
                out << x;
            out << YAML::EndSeq;
        }

        inline void emit_rows(YAML::Emitter& out, const std::vector<std::vector<double>>& rows)
        {
            out << YAML::Flow << YAML::BeginSeq;
            for (const auto& r : rows)
                emit_flow(out, r);
            out << YAML::EndSeq;
        }

        inline void emit_params(YAML::Emitter& out, const PendulumParams& p)
        {
            out << YAML::Flow << YAML::BeginMap << YAML::Key << "g" << YAML::Value << p.g << YAML::Key << "m" << YAML::Value << p.m
                << YAML::Key << "l" << YAML::Value << p.l << YAML::EndMap;
        }
    } // namespace detail

    /// Normalized YAML form: every field written, fixed key order, doubles
    /// at full precision.
    inline std::string serialize_config(const CampaignConfig& c)
    {
        using namespace detail;
        YAML::Emitter out;
        out.SetDoublePrecision(17);
        out << YAML::BeginMap;
        out << YAML::Key << "env" << YAML::Value << YAML::BeginMap;
        out << YAML::Key << "kind" << YAML::Value << to_string(c.env.kind);
        out << YAML::Key << "noise_std" << YAML::Value << c.env.noise_std;
        out << YAML::Key << "pendulum" << YAML::Value << YAML::BeginMap;
        out << YAML::Key << "dt" << YAML::Value << c.env.pendulum.dt;
        out << YAML::Key << "truth" << YAML::Value;
        emit_params(out, c.env.pendulum.truth);
        out << YAML::Key << "prior" << YAML::Value;
        emit_params(out, c.env.pendulum.prior);
        out << YAML::EndMap;
        const LinearConfig& l = c.env.linear;
        out << YAML::Key << "finite_linear" << YAML::Value << YAML::BeginMap;
        out << YAML::Key << "A" << YAML::Value;
        emit_rows(out, l.A);
        out << YAML::Key << "B" << YAML::Value;
        emit_rows(out, l.B);
        out << YAML::Key << "prior_A" << YAML::Value;
        emit_rows(out, l.prior_A);
        out << YAML::Key << "prior_B" << YAML::Value;
        emit_rows(out, l.prior_B);
        std::vector<std::vector<double>> sb, ab;
        for (const auto& b : l.state_bounds)
            sb.push_back({b.lo, b.hi});
        for (const auto& b : l.action_bounds)
            ab.push_back({b.lo, b.hi});
        out << YAML::Key << "state_bounds" << YAML::Value;
        emit_rows(out, sb);
        out << YAML::Key << "action_bounds" << YAML::Value;
        emit_rows(out, ab);
        out << YAML::Key << "state_lattice" << YAML::Value;
        emit_flow(out, l.state_lattice);
        out << YAML::Key << "action_lattice" << YAML::Value;
        emit_flow(out, l.action_lattice);
        out << YAML::EndMap << YAML::EndMap;

        out << YAML::Key << "method" << YAML::Value << to_string(c.method);
        out << YAML::Key << "prior" << YAML::Value << to_string(c.prior);
        out << YAML::Key << "gp" << YAML::Value << YAML::BeginMap;
        out << YAML::Key << "gamma" << YAML::Value << c.gamma;
        out << YAML::Key << "schedule" << YAML::Value << YAML::BeginMap;
        out << YAML::Key << "kind" << YAML::Value << to_string(c.schedule.kind);
        out << YAML::Key << "fixed_value" << YAML::Value << c.schedule.fixed_value;
        out << YAML::Key << "episode_length" << YAML::Value << c.schedule.episode_length;
        out << YAML::EndMap << YAML::EndMap;

        out << YAML::Key << "planner" << YAML::Value << YAML::BeginMap;
        out << YAML::Key << "cem" << YAML::Value;
        emit_cem(out, c.cem);
        out << YAML::Key << "acquisition" << YAML::Value << YAML::BeginMap;
        out << YAML::Key << "beta" << YAML::Value << c.beta;
        out << YAML::Key << "beta_kind" << YAML::Value << (c.beta_kind == BetaKind::log ? "log" : "constant");
        out << YAML::Key << "norm" << YAML::Value << to_string(c.norm);
        out << YAML::EndMap;
        out << YAML::Key << "greedy_candidates" << YAML::Value << c.greedy_candidates;
        out << YAML::EndMap;

        out << YAML::Key << "reset" << YAML::Value << YAML::BeginMap;
        out << YAML::Key << "state_counts" << YAML::Value;
        emit_flow(out, c.reset.state_counts);
        out << YAML::Key << "probe" << YAML::Value << (c.reset.probe_all_actions ? "grid" : "zero");
        out << YAML::Key << "probe_counts" << YAML::Value;
        emit_flow(out, c.reset.probe_counts);
        out << YAML::EndMap;

        out << YAML::Key << "evaluation" << YAML::Value << YAML::BeginMap;
        out << YAML::Key << "grid_counts" << YAML::Value;
        emit_flow(out, c.evaluation.grid_counts);
        out << YAML::Key << "check_assumption3" << YAML::Value << c.evaluation.check_assumption3;
        out << YAML::Key << "record_wall_time" << YAML::Value << c.evaluation.record_wall_time;
        out << YAML::EndMap;

        out << YAML::Key << "episodes" << YAML::Value << c.episodes;
        out << YAML::Key << "trials" << YAML::Value << c.trials;
        out << YAML::Key << "master_seed" << YAML::Value << c.master_seed;
        out << YAML::Key << "output_dir" << YAML::Value << c.output_dir;
        out << YAML::Key << "theorem" << YAML::Value << YAML::BeginMap << YAML::Key << "eps" << YAML::Value;
        emit_flow(out, c.theorem_eps);
        out << YAML::EndMap;
        out << YAML::Key << "control" << YAML::Value << YAML::BeginMap;
        out << YAML::Key << "steps" << YAML::Value << c.control.steps;
        out << YAML::Key << "initial_state" << YAML::Value;
        emit_flow(out, c.control.initial_state);
        out << YAML::Key << "seeds" << YAML::Value << c.control.seeds;
        out << YAML::Key << "seed" << YAML::Value << c.control.seed;
        out << YAML::Key << "cem" << YAML::Value;
        emit_cem(out, c.control.cem);
        out << YAML::EndMap;
        out << YAML::EndMap;
        return std::string(out.c_str()) + "\n";
    }

    /// 64-bit FNV-1a.
    inline std::uint64_t fnv1a(const std::string& s)
    {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (unsigned char ch : s) {
            h ^= ch;
            h *= 0x100000001b3ULL;
        }
        return h;
    }

    /// Hash of the experiment-defining part of the config. Trial count,
    /// output directory and control settings do not change a trial's data.
    inline std::string config_hash(const CampaignConfig& c)
    {
        CampaignConfig k = c;
        k.trials = 1;
        k.output_dir = "-";
        k.control = {};
        k.theorem_eps.clear();
        char buf[17];
        std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(serialize_config(k))));
        return buf;
    }

    inline Matrix to_matrix(const std::vector<std::vector<double>>& rows)
    {
        Matrix m(static_cast<Index>(rows.size()), rows.empty() ? 0 : static_cast<Index>(rows.front().size()));
        for (Index i = 0; i < m.rows(); ++i)
            for (Index j = 0; j < m.cols(); ++j)
                m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        return m;
    }

    inline Environment build_environment(const EnvConfig& e)
    {
        if (e.kind == EnvKind::pendulum)
            return make_pendulum_env(e.pendulum.truth, e.pendulum.prior, e.pendulum.dt);
        const LinearConfig& l = e.linear;
        return make_finite_linear_env(to_matrix(l.A), to_matrix(l.B), to_matrix(l.prior_A), to_matrix(l.prior_B),
            finite_linear_spec(l.state_bounds, l.action_bounds, l.state_lattice, l.action_lattice));
    }

    /// Evaluation grid: the full lattice on finite envs, else grid_counts.
    inline Matrix evaluation_grid(const CampaignConfig& c, const EnvSpec& spec)
    {
        if (spec.finite()) {
            std::vector<int> counts = spec.state_lattice;
            counts.insert(counts.end(), spec.action_lattice.begin(), spec.action_lattice.end());
            return state_action_grid(spec, counts);
        }
        if (static_cast<Index>(c.evaluation.grid_counts.size()) != spec.input_dim())
            throw ConfigError("evaluation.grid_counts needs one entry per state and action coordinate");
        return state_action_grid(spec, c.evaluation.grid_counts);
    }

    inline CampaignSettings build_settings(const CampaignConfig& c, const Environment& env)
    {
        const EnvSpec& spec = env.spec;
        CampaignSettings s;
        s.kernel.gamma = c.gamma;
        s.prior = c.prior;
        s.episodes = c.episodes;
        s.check_assumption3 = c.evaluation.check_assumption3;
        s.record_wall_time = c.evaluation.record_wall_time;
        EpisodeSettings& e = s.episode;
        e.method = c.method;
        e.acquisition.beta = c.beta;
        e.acquisition.norm = c.norm;
        e.beta_kind = c.beta_kind;
        e.cem = c.cem;
        e.schedule = c.schedule;
        e.noise_std = c.env.noise_std;
        try {
            s.eval_grid = evaluation_grid(c, spec);
            e.reset_states = spec.finite() ? state_grid(spec, spec.state_lattice) : state_grid(spec, c.reset.state_counts);
            const std::vector<int> probe = spec.finite() ? spec.action_lattice : c.reset.probe_counts;
            e.probe_actions = c.reset.probe_all_actions ? action_grid(spec, probe) : Matrix(Matrix::Zero(1, spec.action_dim));
            if (spec.finite())
                e.candidate_actions = action_grid(spec, spec.action_lattice);
            else
                e.candidate_actions = action_grid(spec, std::vector<int>(static_cast<std::size_t>(spec.action_dim), std::max(2, c.greedy_candidates)));
        }
        catch (const InputError& err) {
            throw ConfigError(err.what());
        }
        return s;
    }

} // namespace discucb::cli

#endif
