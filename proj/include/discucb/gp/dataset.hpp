#ifndef DISCUCB_GP_DATASET_HPP
#define DISCUCB_GP_DATASET_HPP

#include <cmath>
#include <string>

#include <Eigen/Core>

#include <discucb/errors.hpp>

namespace discucb {

    using Vector = Eigen::VectorXd;
    using Matrix = Eigen::MatrixXd;
    using Index = Eigen::Index;

    inline bool all_finite(const Eigen::Ref<const Eigen::MatrixXd>& m)
    {
        return m.allFinite();
    }

    /// A point z = (x, u) of the state-action space.
    struct StateActionPoint {
        Vector x;
        Vector u;

        StateActionPoint() = default;
        StateActionPoint(Vector state, Vector action) : x(std::move(state)), u(std::move(action)) {}

        Index dim() const { return x.size() + u.size(); }

        /// Concatenation [x; u], the GP input vector.
        Vector joined() const
        {
            Vector z(dim());
            z.head(x.size()) = x;
            z.tail(u.size()) = u;
            return z;
        }

        static StateActionPoint split(const Eigen::Ref<const Vector>& z, Index state_dim)
        {
            if (state_dim < 0 || state_dim > z.size())
                throw InputError("StateActionPoint::split: state_dim out of range");
            return {z.head(state_dim), z.tail(z.size() - state_dim)};
        }
    };

    /// Ordered observations (z_i, y_i). Rows of `points` are joined
    /// state-action vectors, rows of `targets` the observed next states.
    class TransitionDataset {
    public:
        TransitionDataset() = default;
        TransitionDataset(Index input_dim, Index output_dim)
            : _points(0, input_dim), _targets(0, output_dim) {}

        TransitionDataset(Matrix points, Matrix targets) : _points(std::move(points)), _targets(std::move(targets))
        {
            if (_points.rows() != _targets.rows())
                throw InputError("TransitionDataset: points and targets differ in length");
            if (!all_finite(_points) || !all_finite(_targets))
                throw InputError("TransitionDataset: non-finite entry");
        }

        Index size() const { return _points.rows(); }
        bool empty() const { return size() == 0; }
        Index input_dim() const { return _points.cols(); }
        Index output_dim() const { return _targets.cols(); }

        const Matrix& points() const { return _points; }
        const Matrix& targets() const { return _targets; }

        Vector point(Index i) const { return _points.row(i).transpose(); }
        Vector target(Index i) const { return _targets.row(i).transpose(); }

        /// Copy of this dataset with (z, y) appended.
        TransitionDataset appended(const Eigen::Ref<const Vector>& z, const Eigen::Ref<const Vector>& y) const
        {
            if (z.size() != input_dim() || y.size() != output_dim())
                throw InputError("TransitionDataset::appended: dimension mismatch");
            if (!z.allFinite() || !y.allFinite())
                throw InputError("TransitionDataset::appended: non-finite observation");
            TransitionDataset out;
            out._points.resize(size() + 1, input_dim());
            out._targets.resize(size() + 1, output_dim());
            out._points.topRows(size()) = _points;
            out._targets.topRows(size()) = _targets;
            out._points.row(size()) = z.transpose();
            out._targets.row(size()) = y.transpose();
            return out;
        }

        /// First `n` observations.
        TransitionDataset prefix(Index n) const
        {
            if (n < 0 || n > size())
                throw InputError("TransitionDataset::prefix: length out of range");
            TransitionDataset out;
            out._points = _points.topRows(n);
            out._targets = _targets.topRows(n);
            return out;
        }

    private:
        Matrix _points;
        Matrix _targets;
    };

} // namespace discucb

#endif
