#ifndef DISCUCB_PLANNER_GREEDY_HPP
#define DISCUCB_PLANNER_GREEDY_HPP

#include <discucb/gp/gp_model.hpp>

namespace discucb {

    /// One-step greedy variance maximiser over a candidate action set
    /// (one action per row). Ties go to the lowest row index.
    inline Vector greedy_variance_action(const GpModel& model, const Vector& x, const Eigen::Ref<const Matrix>& candidates)
    {
        if (candidates.rows() == 0)
            throw InputError("greedy_variance_action: empty candidate set");
        if (x.size() != model.state_dim() || candidates.cols() != model.action_dim())
            throw InputError("greedy_variance_action: dimension mismatch");
        Matrix Z(candidates.rows(), x.size() + candidates.cols());
        Z.leftCols(x.size()) = x.transpose().replicate(candidates.rows(), 1);
        Z.rightCols(candidates.cols()) = candidates;
        const Vector var = model.predict_batch(Z, true).variance;
        Index best = 0;
        for (Index i = 1; i < var.size(); ++i)
            if (var[i] > var[best])
                best = i;
        return candidates.row(best).transpose();
    }

} // namespace discucb

#endif
