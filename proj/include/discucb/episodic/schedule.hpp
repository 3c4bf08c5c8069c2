#ifndef DISCUCB_EPISODIC_SCHEDULE_HPP
#define DISCUCB_EPISODIC_SCHEDULE_HPP

#include <cmath>
#include <string>

#include <discucb/errors.hpp>

namespace discucb {

    enum class ScheduleKind { theorem, experiment, fixed };

    inline std::string to_string(ScheduleKind k)
    {
        switch (k) {
        case ScheduleKind::experiment:
            return "experiment";
        case ScheduleKind::fixed:
            return "fixed";
        default:
            return "theorem";
        }
    }

    struct ScheduleConfig {
        ScheduleKind kind = ScheduleKind::theorem;
        double fixed_value = 0.01;
        int episode_length = 10;

        void validate() const
        {
            if (episode_length < 1)
                throw InputError("ScheduleConfig: episode_length must be >= 1");
            if (kind == ScheduleKind::fixed && !(fixed_value > 0.0 && std::isfinite(fixed_value)))
                throw InputError("ScheduleConfig: fixed_value must be positive");
        }
    };

    /// Regulariser for the model holding (tau - 1) N + n observations.
    /// The experiment kind uses the total dataset size, which is that same
    /// count, so both data-driven kinds agree.
    inline double regularization(const ScheduleConfig& s, int tau, int n)
    {
        s.validate();
        if (s.kind == ScheduleKind::fixed)
            return s.fixed_value;
        if (tau < 1 || n < 0 || n > s.episode_length)
            throw InputError("regularization: need tau >= 1 and 0 <= n <= N");
        const double total = static_cast<double>(tau - 1) * s.episode_length + n;
        if (total <= 0.0)
            throw InputError("regularization: zero total index");
        return 1.0 / (total * total);
    }

    enum class BetaKind { constant, log };

    /// beta_n: constant, or 2 log(n + 1) with n the total data count.
    inline double beta_value(BetaKind kind, double constant, long n_total)
    {
        if (kind == BetaKind::log)
            return 2.0 * std::log(static_cast<double>(n_total) + 1.0);
        return constant;
    }

} // namespace discucb

#endif
