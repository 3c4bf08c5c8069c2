#ifndef DISCUCB_GP_KERNEL_HPP
#define DISCUCB_GP_KERNEL_HPP

#include <cmath>
#include <numbers>

#include <discucb/gp/dataset.hpp>

namespace discucb {

    struct KernelParams {
        double gamma = 0.5;

        void validate() const
        {
            if (!(gamma > 0.0) || !std::isfinite(gamma))
                throw InputError("KernelParams: gamma must be positive and finite");
        }
    };

    /// k(z, z') = exp(-gamma * ||z - z'||^2).
    ///
    /// Coordinates with a non-zero period P are angles; their contribution to
    /// the distance is the chord length (P/pi) sin(pi * delta / P), which
    /// matches the shortest angular difference for small deltas and keeps the
    /// kernel positive definite (it is the RBF on the circle embedding).
    class RbfKernel {
    public:
        RbfKernel() = default;
        explicit RbfKernel(KernelParams params, Vector periods = Vector())
            : _params(params), _periods(std::move(periods))
        {
            _params.validate();
            for (Index i = 0; i < _periods.size(); ++i)
                if (!(_periods[i] >= 0.0) || !std::isfinite(_periods[i]))
                    throw InputError("RbfKernel: periods must be finite and non-negative");
        }

        const KernelParams& params() const { return _params; }
        double gamma() const { return _params.gamma; }
        const Vector& periods() const { return _periods; }

        /// Squared (possibly wrap-aware) distance between two inputs.
        double squared_distance(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b) const
        {
            if (a.size() != b.size())
                throw InputError("RbfKernel: dimension mismatch");
            if (_periods.size() != 0 && _periods.size() != a.size())
                throw InputError("RbfKernel: period mask does not match input dimension");
            double d2 = 0.0;
            for (Index i = 0; i < a.size(); ++i)
                d2 += coord_sq(i, a[i] - b[i]);
            return d2;
        }

        double operator()(const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b) const
        {
            return std::exp(-_params.gamma * squared_distance(a, b));
        }

        /// k(z, z) for this stationary kernel.
        double diagonal() const { return 1.0; }

        /// Cross-covariance matrix K(i, j) = k(A.row(i), B.row(j)).
        Matrix cross(const Eigen::Ref<const Matrix>& A, const Eigen::Ref<const Matrix>& B) const
        {
            if (A.cols() != B.cols())
                throw InputError("RbfKernel::cross: dimension mismatch");
            if (_periods.size() != 0 && _periods.size() != A.cols())
                throw InputError("RbfKernel: period mask does not match input dimension");
            Matrix K(A.rows(), B.rows());
            const Index dim = A.cols();
            for (Index j = 0; j < B.rows(); ++j) {
                for (Index i = 0; i < A.rows(); ++i) {
                    double d2 = 0.0;
                    for (Index c = 0; c < dim; ++c)
                        d2 += coord_sq(c, A(i, c) - B(j, c));
                    K(i, j) = std::exp(-_params.gamma * d2);
                }
            }
            return K;
        }

        Matrix gram(const Eigen::Ref<const Matrix>& A) const
        {
            Matrix G = cross(A, A);
            // exact symmetry and unit diagonal regardless of rounding in cross()
            for (Index i = 0; i < G.rows(); ++i) {
                G(i, i) = 1.0;
                for (Index j = 0; j < i; ++j)
                    G(j, i) = G(i, j);
            }
            return G;
        }

        bool operator==(const RbfKernel& o) const
        {
            return _params.gamma == o._params.gamma && _periods.size() == o._periods.size() && _periods == o._periods;
        }

    private:
        double coord_sq(Index c, double delta) const
        {
            if (_periods.size() != 0 && _periods[c] > 0.0) {
                const double p = _periods[c];
                const double chord = (p / std::numbers::pi) * std::sin(std::numbers::pi * delta / p);
                return chord * chord;
            }
            return delta * delta;
        }

        KernelParams _params;
        Vector _periods;
    };

    inline double kernel_eval(const RbfKernel& k, const StateActionPoint& a, const StateActionPoint& b)
    {
        if (a.x.size() != b.x.size() || a.u.size() != b.u.size())
            throw InputError("kernel_eval: dimension mismatch");
        return k(a.joined(), b.joined());
    }

} // namespace discucb

#endif
