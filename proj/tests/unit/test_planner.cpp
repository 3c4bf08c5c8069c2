#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include <discucb/env/environment.hpp>
#include <discucb/planner/greedy.hpp>
#include <discucb/planner/icem.hpp>
#include <discucb/planner/task_mpc.hpp>

#include "support.hpp"

using namespace discucb;

namespace {
    Vector vec(std::initializer_list<double> v)
    {
        Vector out(static_cast<Index>(v.size()));
        Index i = 0;
        for (double x : v)
            out[i++] = x;
        return out;
    }

    const std::vector<Interval> kUnitBox{{-2.0, 2.0}};

    Environment pendulum() { return make_pendulum_env({9.81, 1.0, 1.0}, {9.0, 0.5, 2.0}); }

    GpModel fitted_pendulum_model(const Environment& env, PriorMean prior, int n, std::uint64_t seed)
    {
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> th(-3, 3), om(-4, 4), act(-2, 2);
        GpModel m(RbfKernel({}, env.kernel_periods()), std::move(prior), 0.01, 2, 1);
        for (int i = 0; i < n; ++i) {
            const Vector x = vec({th(rng), om(rng)}), u = vec({act(rng)});
            Vector z(3);
            z << x, u;
            m = m.update_with_observation(z, regression_target(env.spec, x, env.step(x, u)));
        }
        return m;
    }
} // namespace

TEST(ColoredNoise, UnitVariance)
{
    for (double beta : {0.0, 1.0, 2.0}) {
        for (Index len : {7, 10}) {
            ColoredNoise cn(beta, len);
            std::mt19937_64 rng(11);
            double sq = 0.0;
            const int draws = 4000;
            for (int i = 0; i < draws; ++i)
                sq += cn.sample(rng).squaredNorm();
            EXPECT_NEAR(sq / (draws * len), 1.0, 0.05) << "beta " << beta << " len " << len;
        }
    }
}

TEST(ColoredNoise, ExponentControlsCorrelation)
{
    auto lag1 = [](double beta) {
        ColoredNoise cn(beta, 20);
        std::mt19937_64 rng(3);
        double num = 0.0, den = 0.0;
        for (int i = 0; i < 2000; ++i) {
            const Vector x = cn.sample(rng);
            for (Index t = 0; t + 1 < x.size(); ++t)
                num += x[t] * x[t + 1];
            den += x.squaredNorm();
        }
        return num / den;
    };
    EXPECT_LT(std::abs(lag1(0.0)), 0.05);
    EXPECT_GT(lag1(2.0), 0.6);
}

TEST(Icem, FindsQuadraticMaximiser)
{
    CemConfig cfg;
    cfg.horizon = 1;
    SequenceObjective f = [](const ActionSequence& s) { return -(s(0, 0) - 0.7) * (s(0, 0) - 0.7); };
    const PlanResult r = icem_plan(f, kUnitBox, cfg, 5);
    EXPECT_NEAR(r.best(0, 0), 0.7, 0.05);
}

TEST(Icem, DeterministicForSeed)
{
    CemConfig cfg;
    cfg.horizon = 4;
    SequenceObjective f = [](const ActionSequence& s) { return -s.array().cos().sum() - (s.array() - 0.2).square().sum(); };
    const PlanResult a = icem_plan(f, kUnitBox, cfg, 42);
    const PlanResult b = icem_plan(f, kUnitBox, cfg, 42);
    const PlanResult c = icem_plan(f, kUnitBox, cfg, 43);
    EXPECT_EQ(a.best, b.best);
    EXPECT_EQ(a.objective, b.objective);
    EXPECT_NE(a.best, c.best);
}

TEST(Icem, IncumbentNeverDecreases)
{
    CemConfig cfg;
    cfg.horizon = 6;
    cfg.iterations = 8;
    SequenceObjective f = [](const ActionSequence& s) { return std::sin(3 * s.sum()) - 0.1 * s.squaredNorm(); };
    const PlanResult r = icem_plan(f, kUnitBox, cfg, 9);
    ASSERT_EQ(r.incumbent.size(), 8u);
    for (std::size_t i = 1; i < r.incumbent.size(); ++i)
        EXPECT_GE(r.incumbent[i], r.incumbent[i - 1]);
    EXPECT_EQ(r.incumbent.back(), r.objective);
}

TEST(Icem, SamplesRespectBounds)
{
    CemConfig cfg;
    cfg.horizon = 5;
    cfg.init_std = 3.0;
    cfg.min_std = 1.0;
    bool inside = true;
    BatchObjective f = [&](const std::vector<ActionSequence>& seqs) {
        std::vector<double> v;
        for (const auto& s : seqs) {
            inside = inside && s.minCoeff() >= -2.0 && s.maxCoeff() <= 2.0;
            v.push_back(s.sum());
        }
        return v;
    };
    icem_plan(f, kUnitBox, cfg, 1);
    EXPECT_TRUE(inside);
}

TEST(Icem, NoFeasibleSequenceThrows)
{
    CemConfig cfg;
    SequenceObjective f = [](const ActionSequence&) { return kMinusInfinity; };
    EXPECT_THROW(icem_plan(f, kUnitBox, cfg, 1), InfeasibleError);
}

TEST(Icem, ConfigValidation)
{
    CemConfig cfg;
    cfg.elites = cfg.samples + 1;
    SequenceObjective f = [](const ActionSequence&) { return 0.0; };
    EXPECT_THROW(icem_plan(f, kUnitBox, cfg, 1), InputError);
}

TEST(Icem, WarmStartShift)
{
    ActionSequence s(3, 1);
    s << 1, 2, 3;
    ActionSequence expect(3, 1);
    expect << 2, 3, 3;
    EXPECT_EQ(shift_sequence(s), expect);
}

TEST(Acquisition, EmptyModelSamePriorIsPureExploration)
{
    const Environment env = pendulum();
    const PriorMean p0 = env.prior_mean();
    const GpModel m(RbfKernel({}, env.kernel_periods()), p0, 0.1, 2, 1);
    AcquisitionConfig cfg;
    cfg.beta = 3.0;
    EXPECT_NEAR(acquisition_value(m, p0, {vec({0.3, 0.1}), vec({0.5})}, cfg), std::sqrt(3.0), 1e-12);
}

TEST(Acquisition, MatchesHandComputedTerms)
{
    const Environment env = pendulum();
    const PriorMean p0 = env.prior_mean();
    const GpModel m = fitted_pendulum_model(env, p0, 25, 2);
    AcquisitionConfig cfg;
    cfg.beta = 2.0;
    std::mt19937_64 rng(8);
    for (int i = 0; i < 20; ++i) {
        const Vector z = test_support::random_vector(rng, 3);
        const Prediction p = m.predict(z);
        const Vector x = z.head(2), u = z.tail(1);
        const double expect = (p.mean - p0(z)).norm() + std::sqrt(2.0) * std::sqrt(p.variance);
        EXPECT_NEAR(acquisition_value(m, p0, {x, u}, cfg), expect, 1e-10);

        // Explicit-difference route: the model carries a different prior.
        const GpModel mz = m.with_prior(PriorMean::zero(2));
        const Prediction pz = mz.predict(z);
        EXPECT_NEAR(acquisition_value(mz, p0, {x, u}, cfg), (pz.mean - p0(z)).norm() + std::sqrt(2.0 * pz.variance), 1e-10);
    }
}

TEST(Acquisition, NormsAndVarianceOnly)
{
    const Environment env = pendulum();
    const PriorMean p0 = env.prior_mean();
    const GpModel m = fitted_pendulum_model(env, p0, 15, 4);
    const Vector z = vec({0.2, -1.0, 0.4});
    const Prediction p = m.predict(z);
    const Vector d = p.mean - p0(z);
    AcquisitionConfig cfg;
    cfg.beta = 0.0;
    cfg.norm = DiscrepancyNorm::l1;
    EXPECT_NEAR(acquisition_value(m, p0, {z.head(2), z.tail(1)}, cfg), std::abs(d[0]) + std::abs(d[1]), 1e-12);
    cfg.norm = DiscrepancyNorm::linf;
    EXPECT_NEAR(acquisition_value(m, p0, {z.head(2), z.tail(1)}, cfg), std::max(std::abs(d[0]), std::abs(d[1])), 1e-12);
    cfg.beta = 1.0;
    cfg.use_discrepancy = false;
    EXPECT_NEAR(acquisition_value(m, p0, {z.head(2), z.tail(1)}, cfg), std::sqrt(p.variance), 1e-12);
}

TEST(Acquisition, FrozenSourceHasZeroDiscrepancy)
{
    const Environment env = pendulum();
    const GpModel m = fitted_pendulum_model(env, env.prior_mean(), 20, 6);
    const PriorMean frozen = m.freeze_as_prior();
    AcquisitionConfig cfg;
    const Vector z = vec({1.0, 2.0, -1.0});
    EXPECT_EQ(acquisition_value(m, frozen, {z.head(2), z.tail(1)}, cfg), std::sqrt(2.0) * std::sqrt(m.predict(z).variance));
}

TEST(Acquisition, SafeSetExcludes)
{
    const Environment env = pendulum();
    const PriorMean p0 = env.prior_mean();
    const GpModel m(RbfKernel({}, env.kernel_periods()), p0, 0.1, 2, 1);
    AcquisitionConfig cfg;
    cfg.safe_set = [](const Vector& z) { return z[2] <= 0.0; };
    EXPECT_EQ(acquisition_value(m, p0, {vec({0, 0}), vec({0.5})}, cfg), kMinusInfinity);
    EXPECT_GT(acquisition_value(m, p0, {vec({0, 0}), vec({-0.5})}, cfg), 0.0);
}

TEST(Acquisition, NegativeBetaRejected)
{
    const Environment env = pendulum();
    const PriorMean p0 = env.prior_mean();
    const GpModel m(RbfKernel({}, env.kernel_periods()), p0, 0.1, 2, 1);
    AcquisitionConfig cfg;
    cfg.beta = -1.0;
    EXPECT_THROW(acquisition_value(m, p0, {vec({0, 0}), vec({0})}, cfg), InputError);
}

TEST(Rollout, HorizonThreeManualUnroll)
{
    const Environment env = pendulum();
    const PriorMean p0 = env.prior_mean();
    const GpModel m = fitted_pendulum_model(env, p0, 30, 10);
    AcquisitionConfig cfg;
    cfg.beta = 1.5;
    ActionSequence seq(3, 1);
    seq << 0.4, -1.7, 3.0; // last action is out of bounds and gets clipped
    const Vector x0 = vec({2.5, -3.0});

    Vector x = x0;
    double expect = 0.0;
    for (Index t = 0; t < 3; ++t) {
        const Vector u = vec({std::clamp(seq(t, 0), -2.0, 2.0)});
        Vector z(3);
        z << x, u;
        const Prediction p = m.predict(z);
        expect += (p.mean - p0(z)).norm() + std::sqrt(1.5 * p.variance);
        Vector next = p.mean;
        next[0] = std::remainder(x[0] + next[0], 2 * std::numbers::pi);
        if (next[0] >= std::numbers::pi)
            next[0] -= 2 * std::numbers::pi;
        next[1] = std::clamp(next[1], -8.0, 8.0);
        x = next;
    }
    EXPECT_NEAR(rollout_objective(m, p0, env.spec, x0, seq, cfg), expect, 1e-10);
}

TEST(Rollout, BatchMatchesSingle)
{
    const Environment env = pendulum();
    const PriorMean p0 = env.prior_mean();
    const GpModel m = fitted_pendulum_model(env, p0, 12, 3);
    std::mt19937_64 rng(2);
    std::vector<ActionSequence> seqs;
    for (int i = 0; i < 6; ++i)
        seqs.push_back(test_support::random_matrix(rng, 4, 1));
    AcquisitionConfig cfg;
    const auto batch = rollout_objective_batch(m, p0, env.spec, vec({0.5, 0.5}), seqs, cfg);
    for (std::size_t i = 0; i < seqs.size(); ++i)
        EXPECT_NEAR(batch[i], rollout_objective(m, p0, env.spec, vec({0.5, 0.5}), seqs[i], cfg), 1e-12);
}

TEST(Rollout, SafeSetSteersPlanner)
{
    const Environment env = pendulum();
    const PriorMean p0 = env.prior_mean();
    const GpModel m = fitted_pendulum_model(env, p0, 10, 1);
    AcquisitionConfig cfg;
    cfg.safe_set = [](const Vector& z) { return z[2] <= -0.5; };
    CemConfig cem;
    cem.horizon = 3;
    const PlanResult r = plan_exploration(m, p0, env.spec, vec({0, 0}), cfg, cem, 4);
    EXPECT_LE(r.best.maxCoeff(), -0.5);
    EXPECT_TRUE(std::isfinite(r.objective));
}

TEST(Greedy, TiesGoToLowestIndex)
{
    const Environment env = pendulum();
    const GpModel m(RbfKernel({}, env.kernel_periods()), env.prior_mean(), 0.1, 2, 1);
    Matrix cands(3, 1);
    cands << 0.5, -1.0, 1.5;
    EXPECT_EQ(greedy_variance_action(m, vec({0, 0}), cands), vec({0.5}));
}

TEST(Greedy, PicksLeastExploredAction)
{
    const Environment env = pendulum();
    GpModel m(RbfKernel({}, env.kernel_periods()), env.prior_mean(), 0.01, 2, 1);
    m = m.update_with_observation(vec({0, 0, -2}), vec({0, 0}));
    m = m.update_with_observation(vec({0, 0, 0}), vec({0, 0}));
    Matrix cands(3, 1);
    cands << -2, 0, 2;
    EXPECT_EQ(greedy_variance_action(m, vec({0, 0}), cands), vec({2}));
}

TEST(TaskMpc, HorizonOneQuadraticCost)
{
    const Environment env = pendulum();
    const GpModel m = oracle_model(env);
    CemConfig cfg;
    cfg.horizon = 1;
    CostFn cost = [](const Vector&, const Vector& u) { return (u[0] - 0.3) * (u[0] - 0.3); };
    const PlanResult r = task_mpc_plan(m, env.spec, vec({0.1, 0.0}), cost, cfg, 17);
    EXPECT_NEAR(r.best(0, 0), 0.3, 0.05);
}

TEST(TaskMpc, OracleModelMatchesTruth)
{
    const Environment env = pendulum();
    const GpModel m = oracle_model(env);
    const Vector z = vec({2.0, 3.0, -1.0});
    EXPECT_EQ(env.spec.next_state(z.head(2), m.predict_mean(z)), env.step(z.head(2), z.tail(1)));
    const Vector edge = vec({3.1, 2.0, 0.0});
    EXPECT_NEAR(env.spec.next_state(edge.head(2), m.predict_mean(edge))[0], env.step(edge.head(2), edge.tail(1))[0], 1e-12);
    // The seam: theta = pi and theta = -pi are one input and get one output.
    EXPECT_NEAR((m.predict_mean(vec({std::numbers::pi, 1.0, 0.5})) - m.predict_mean(vec({-std::numbers::pi, 1.0, 0.5}))).norm(), 0.0, 1e-12);
}

TEST(TaskMpc, OracleSwingReachesUpright)
{
    const Environment env = pendulum();
    CemConfig cfg;
    cfg.horizon = 15;
    const ControlTrace tr = run_task_mpc(env, oracle_model(env), pendulum_swing_cost, vec({std::numbers::pi, 0.0}), 200, cfg, 1);
    ASSERT_EQ(tr.rewards.size(), 200u);
    EXPECT_LT(tr.states.col(0).cwiseAbs().minCoeff(), 0.3);
}
