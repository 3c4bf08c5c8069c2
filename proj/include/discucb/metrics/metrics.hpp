#ifndef DISCUCB_METRICS_METRICS_HPP
#define DISCUCB_METRICS_METRICS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <discucb/env/environment.hpp>
#include <discucb/episodic/log.hpp>
#include <discucb/gp/gp_model.hpp>
#include <discucb/planner/acquisition.hpp>

namespace discucb {

    struct EpisodeRow {
        int tau = 0;
        double max_variance = 0.0;
        double mse = 0.0;
        double mean_visited_discrepancy = std::numeric_limits<double>::quiet_NaN();
        bool assumption3_held = false;
        double wall_time_s = 0.0;

        bool operator==(const EpisodeRow&) const = default;
    };

    /// Per-trial evaluation record. `baseline` holds the tau = 0 metrics of
    /// the prior model before any data; `rows` one entry per episode.
    struct CampaignRecord {
        EpisodeRow baseline;
        std::vector<EpisodeRow> rows;
        std::uint64_t master_seed = 0;
        std::uint64_t trial_seed = 0;
        std::string config_hash;
    };

    inline constexpr Index kMetricChunk = 1024;

    inline Vector variance_over_grid(const GpModel& model, const Matrix& grid)
    {
        if (grid.rows() == 0)
            throw InputError("variance_over_grid: empty grid");
        Vector out(grid.rows());
        for (Index s = 0; s < grid.rows(); s += kMetricChunk) {
            const Index n = std::min(kMetricChunk, grid.rows() - s);
            out.segment(s, n) = model.predict_batch(grid.middleRows(s, n), true).variance;
        }
        return out;
    }

    inline double max_variance_over_grid(const GpModel& model, const Matrix& grid)
    {
        return variance_over_grid(model, grid).maxCoeff();
    }

    /// f evaluated on every grid row (noiseless), one row per point, in
    /// the same representation as the GP mean.
    inline Matrix truth_on_grid(const Environment& env, const Matrix& grid)
    {
        return env.truth_mean().evaluate_rows(grid);
    }

    /// Mean over grid rows of ||mu(z) - truth_row||^2.
    inline double mse_against(const GpModel& model, const Matrix& grid, const Matrix& truth_rows)
    {
        if (grid.rows() == 0)
            throw InputError("mse_over_grid: empty grid");
        if (truth_rows.rows() != grid.rows())
            throw InputError("mse_over_grid: truth rows do not match grid");
        double sum = 0.0;
        for (Index s = 0; s < grid.rows(); s += kMetricChunk) {
            const Index n = std::min(kMetricChunk, grid.rows() - s);
            const Matrix mean = model.predict_batch(grid.middleRows(s, n), false).mean;
            sum += (mean - truth_rows.middleRows(s, n)).squaredNorm();
        }
        return sum / static_cast<double>(grid.rows());
    }

    inline double mse_over_grid(const GpModel& model, const Environment& env, const Matrix& grid)
    {
        return mse_against(model, grid, truth_on_grid(env, grid));
    }

    /// Mean over visited z of ||p0(z) - f(z)||.
    inline double visited_discrepancy(const PriorMean& p0, const PriorMean& truth, const EpisodeLog& log,
        DiscrepancyNorm norm = DiscrepancyNorm::l2)
    {
        if (log.visited.empty())
            throw InputError("visited_discrepancy: empty log");
        double sum = 0.0;
        for (const auto& v : log.visited)
            sum += vector_norm(p0(v.z) - truth(v.z), norm);
        return sum / static_cast<double>(log.visited.size());
    }

    struct Assumption3Result {
        bool held = false;
        int witness = 0; // 1-based step index, 0 if none
    };

    /// step_models[n-1] is the model used to select step n.
    inline Assumption3Result assumption3_check(const EpisodeLog& log, const std::vector<GpModel>& step_models, const Matrix& grid)
    {
        if (step_models.size() != log.visited.size())
            throw InputError("assumption3_check: one model per visited step required");
        for (std::size_t n = 0; n < log.visited.size(); ++n) {
            const double avg = variance_over_grid(step_models[n], grid).mean();
            if (log.visited[n].variance >= avg)
                return {true, static_cast<int>(n) + 1};
        }
        return {};
    }

    /// Closed-form episode count after which the max posterior variance on
    /// a finite set of Nz points is at most eps.
    inline double theorem1_time(int Nz, int N, double eps)
    {
        if (Nz < 1 || N < 1)
            throw InputError("theorem1_time: Nz and N must be positive");
        if (!(eps > 0.0 && eps < Nz))
            throw InputError("theorem1_time: eps must lie in (0, Nz)");
        const double nz = Nz, n = N;
        return nz * (nz - eps) / (n * n * eps) + nz * std::log(nz / eps);
    }

    /// Time at which v' = -v^2 / (Nz (Nz/N^2 + v)), v(0) = Nz reaches eps,
    /// by fixed-step RK4 with linear interpolation of the crossing.
    inline double theorem1_time_ode(int Nz, int N, double eps, double h = 1e-3)
    {
        if (!(eps > 0.0 && eps < Nz))
            throw InputError("theorem1_time_ode: eps must lie in (0, Nz)");
        const double nz = Nz, c = nz / (static_cast<double>(N) * N);
        auto f = [&](double v) { return -v * v / (nz * (c + v)); };
        double t = 0.0, v = nz;
        while (v > eps) {
            const double k1 = f(v), k2 = f(v + 0.5 * h * k1), k3 = f(v + 0.5 * h * k2), k4 = f(v + h * k3);
            const double next = v + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
            if (next <= eps)
                return t + h * (v - eps) / (v - next);
            v = next;
            t += h;
        }
        return t;
    }

    struct ConvergenceCheck {
        double bound_time = 0.0; // t(eps)
        int bound_episode = 1; // max(1, ceil(t(eps)))
        int observed_episode = -1; // first tau with max sigma^2_{tau,0} <= eps, -1 if never
        double variance_at_bound = 0.0;
        bool holds = false;
    };

    /// sigma^2_{tau,0} equals the metrics after episode tau - 1, i.e. the
    /// baseline for tau = 1 and rows[tau - 2] afterwards.
    inline ConvergenceCheck convergence_check(const CampaignRecord& rec, int Nz, int N, double eps)
    {
        ConvergenceCheck c;
        c.bound_time = eps >= Nz ? 0.0 : theorem1_time(Nz, N, eps);
        c.bound_episode = std::max(1, static_cast<int>(std::ceil(c.bound_time)));
        if (rec.rows.empty() || static_cast<int>(rec.rows.size()) < c.bound_episode - 1)
            throw InputError("verify_convergence: insufficient episodes");
        auto start_variance = [&](int tau) { return tau == 1 ? rec.baseline.max_variance : rec.rows[static_cast<std::size_t>(tau - 2)].max_variance; };
        const int last = static_cast<int>(rec.rows.size()) + 1;
        for (int tau = 1; tau <= last; ++tau)
            if (start_variance(tau) <= eps) {
                c.observed_episode = tau;
                break;
            }
        c.variance_at_bound = start_variance(c.bound_episode);
        c.holds = c.variance_at_bound <= eps;
        return c;
    }

    inline bool verify_convergence(const CampaignRecord& rec, int Nz, int N, double eps)
    {
        return convergence_check(rec, Nz, N, eps).holds;
    }

    inline std::vector<double> control_score(const std::vector<double>& rewards)
    {
        std::vector<double> out(rewards.size());
        double acc = 0.0;
        for (std::size_t i = 0; i < rewards.size(); ++i)
            out[i] = acc += rewards[i];
        return out;
    }

} // namespace discucb

#endif
