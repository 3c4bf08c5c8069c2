#ifndef DISCUCB_GP_GP_MODEL_HPP
#define DISCUCB_GP_GP_MODEL_HPP

#include <atomic>
#include <cmath>
#include <cstdint>
#include <memory>
#include <string>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include <discucb/gp/dataset.hpp>
#include <discucb/gp/kernel.hpp>
#include <discucb/gp/prior_mean.hpp>

namespace discucb {

    /// Added to every regularized diagonal entry before factorization.
    inline constexpr double kJitter = 1e-10;
    /// Variances in [-kVarianceSlack, 0) are roundoff and clamp to zero.
    inline constexpr double kVarianceSlack = 1e-10;

    struct Prediction {
        Vector mean; // mu(z)
        Vector data_term; // mu(z) - m(z), the data-driven correction
        double variance = 1.0; // sigma^2(z), shared by all output coordinates
    };

    struct BatchPrediction {
        Matrix mean; // (B x d)
        Matrix data_term; // (B x d)
        Vector variance; // (B)
    };

    inline double clamp_variance(double v)
    {
        if (v >= 0.0)
            return v;
        if (v >= -kVarianceSlack)
            return 0.0;
        throw NumericError("predictive variance " + std::to_string(v) + " is negative beyond roundoff");
    }

    /// Gaussian-process regression with a non-zero prior mean and d outputs
    /// sharing one Gram matrix.
    ///
    /// mu(z)      = (y - m)^T (G + reg I)^{-1} k_z + m(z)
    /// sigma^2(z) = k(z, z) - k_z^T (G + reg I)^{-1} k_z
    ///
    /// Repeated inputs are folded into one row of the factorization with
    /// averaged targets and regularizer reg / count, which yields the same
    /// posterior as the full n x n system. With distinct inputs the stored
    /// factor is exactly chol(G + reg I).
    ///
    /// Models are values: every update returns a new model and leaves the
    /// source untouched, so a model can be shared read-only between threads.
    class GpModel {
    public:
        GpModel() = default;

        GpModel(RbfKernel kernel, PriorMean prior, double reg, Index state_dim, Index action_dim)
            : _kernel(std::move(kernel)), _prior(std::move(prior)), _reg(reg), _state_dim(state_dim), _action_dim(action_dim)
        {
            validate_setup();
            _data = TransitionDataset(input_dim(), output_dim());
            _unique = Matrix(0, input_dim());
            _counts = Vector(0);
            _target_sums = Matrix(0, output_dim());
            _prior_at = Matrix(0, output_dim());
            _chol = Matrix(0, 0);
            refresh_coefficients();
            _id = next_id();
        }

        /// Fit from scratch on `data` with a full factorization.
        static GpModel fit(RbfKernel kernel, PriorMean prior, double reg, Index state_dim, Index action_dim,
            const TransitionDataset& data)
        {
            GpModel m(std::move(kernel), std::move(prior), reg, state_dim, action_dim);
            if (data.input_dim() != m.input_dim() || data.output_dim() != m.output_dim())
                throw InputError("GpModel::fit: dataset dimensions do not match the model");
            m._data = data;
            for (Index i = 0; i < data.size(); ++i) {
                const Index j = m.find_unique(data.points().row(i).transpose());
                if (j >= 0) {
                    m._counts[j] += 1.0;
                    m._target_sums.row(j) += data.targets().row(i);
                }
                else {
                    m.push_unique(data.points().row(i).transpose(), data.targets().row(i).transpose());
                }
            }
            m._prior_at = m._prior.evaluate_rows(m._unique);
            m.factorize();
            m.refresh_coefficients();
            return m;
        }

        // -- accessors ------------------------------------------------------

        const RbfKernel& kernel() const { return _kernel; }
        const PriorMean& prior() const { return _prior; }
        double regularization() const { return _reg; }
        Index state_dim() const { return _state_dim; }
        Index action_dim() const { return _action_dim; }
        Index input_dim() const { return _state_dim + _action_dim; }
        Index output_dim() const { return _prior.output_dim(); }
        const TransitionDataset& data() const { return _data; }
        Index size() const { return _data.size(); }
        Index distinct_size() const { return _unique.rows(); }
        const Matrix& distinct_points() const { return _unique; }
        const Vector& distinct_counts() const { return _counts; }
        /// Lower-triangular factor of the regularized Gram matrix over the distinct inputs.
        const Matrix& cholesky() const { return _chol; }
        /// Solution weights (G + reg I)^{-1} (y - m), one column per output.
        const Matrix& alpha() const { return _alpha; }
        /// Unique per-state identifier; copies share it, updates get a new one.
        std::uint64_t id() const { return _id; }

        // -- updates ---------------------------------------------------------

        /// Append one observation. A new distinct input extends the factor by
        /// one row; a repeated input changes its diagonal entry and refactors.
        GpModel update_with_observation(const Vector& z, const Vector& y) const
        {
            check_input(z);
            if (y.size() != output_dim())
                throw InputError("update_with_observation: target dimension mismatch");
            if (!y.allFinite())
                throw InputError("update_with_observation: non-finite target");

            GpModel next = *this;
            next._data = _data.appended(z, y);
            const Index j = find_unique(z);
            if (j >= 0) {
                next._counts[j] += 1.0;
                next._target_sums.row(j) += y.transpose();
                next.factorize();
            }
            else {
                const Index m = distinct_size();
                const Vector k = _kernel.cross(_unique, z.transpose()).col(0);
                Vector l = k;
                if (m > 0)
                    _chol.triangularView<Eigen::Lower>().solveInPlace(l);
                const double pivot_sq = _kernel.diagonal() + _reg + kJitter - l.squaredNorm();
                if (!(pivot_sq > 0.5 * kJitter) || !std::isfinite(pivot_sq))
                    throw NumericError("update_with_observation: Cholesky pivot collapsed (" + std::to_string(pivot_sq) + ")");
                next.push_unique(z, y);
                next._prior_at.conservativeResize(m + 1, Eigen::NoChange);
                next._prior_at.row(m) = _prior(z).transpose();
                next._chol.conservativeResize(m + 1, m + 1);
                next._chol.col(m).setZero();
                next._chol.row(m).head(m) = l.transpose();
                next._chol(m, m) = std::sqrt(pivot_sq);
            }
            next.refresh_coefficients();
            next._id = next_id();
            return next;
        }

        GpModel update_with_observation(const StateActionPoint& z, const Vector& y) const
        {
            return update_with_observation(z.joined(), y);
        }

        /// Same data and prior, different regularizer (full refactorization).
        GpModel with_regularization(double reg) const
        {
            GpModel next = *this;
            next._reg = reg;
            next.validate_setup();
            next.factorize();
            next.refresh_coefficients();
            next._id = next_id();
            return next;
        }

        /// Same data and regularizer, residuals taken against a new prior.
        GpModel with_prior(PriorMean prior) const
        {
            if (!prior.valid() || prior.output_dim() != output_dim())
                throw InputError("with_prior: prior output dimension mismatch");
            GpModel next = *this;
            next._prior = std::move(prior);
            next._prior_at = next._prior.evaluate_rows(next._unique);
            next.refresh_coefficients();
            next._id = next_id();
            return next;
        }

        // -- predictions -----------------------------------------------------

        Prediction predict(const Vector& z) const
        {
            check_input(z);
            const Vector k = _kernel.cross(_unique, z.transpose()).col(0);
            Prediction p;
            p.data_term = _alpha.transpose() * k;
            if (_flat_mean)
                p.mean = _mean_coeffs.transpose() * k + (*_mean_root)(z);
            else
                p.mean = p.data_term + _prior(z);
            if (!p.mean.allFinite())
                throw NumericError("predict: non-finite mean");
            Vector v = k;
            if (distinct_size() > 0)
                _chol.triangularView<Eigen::Lower>().solveInPlace(v);
            p.variance = clamp_variance(_kernel.diagonal() - v.squaredNorm());
            return p;
        }

        Vector predict_mean(const Vector& z) const { return predict(z).mean; }
        double predict_variance(const Vector& z) const { return predict(z).variance; }
        Vector predict_mean(const StateActionPoint& z) const { return predict(z.joined()).mean; }
        double predict_variance(const StateActionPoint& z) const { return predict(z.joined()).variance; }

        /// Row-wise predictions for a batch of inputs. The variance solve is
        /// skipped when `with_variance` is false.
        BatchPrediction predict_batch(const Eigen::Ref<const Matrix>& Z, bool with_variance = true) const
        {
            if (Z.cols() != input_dim())
                throw InputError("predict_batch: input dimension mismatch");
            BatchPrediction out;
            const Matrix K = _kernel.cross(_unique, Z);
            out.data_term = K.transpose() * _alpha;
            if (_flat_mean)
                out.mean = K.transpose() * _mean_coeffs + _mean_root->evaluate_rows(Z);
            else
                out.mean = out.data_term + _prior.evaluate_rows(Z);
            if (with_variance) {
                Matrix V = K;
                if (distinct_size() > 0)
                    _chol.triangularView<Eigen::Lower>().solveInPlace(V);
                out.variance.resize(Z.rows());
                for (Index i = 0; i < Z.rows(); ++i)
                    out.variance[i] = clamp_variance(_kernel.diagonal() - V.col(i).squaredNorm());
            }
            return out;
        }

        /// cov(a, b) = k(a, b) - k_a^T (G + reg I)^{-1} k_b.
        double posterior_covariance(const Vector& a, const Vector& b) const
        {
            check_input(a);
            check_input(b);
            Matrix K = _kernel.cross(_unique, (Matrix(2, input_dim()) << a.transpose(), b.transpose()).finished());
            if (distinct_size() > 0)
                _chol.triangularView<Eigen::Lower>().solveInPlace(K);
            return _kernel(a, b) - K.col(0).dot(K.col(1));
        }

        /// Predicted variance at `z` after a hypothetical observation at
        /// `z_star`, without touching the model:
        ///   sigma_n^2(z) - cov^2(z_star, z) / (sigma_n^2(z_star) + reg).
        double lemma2_variance_update(const Vector& z_star, const Vector& z) const
        {
            const double cov = posterior_covariance(z_star, z);
            const double var_star = predict_variance(z_star);
            const double var_z = predict_variance(z);
            return clamp_variance(var_z - cov * cov / (var_star + _reg));
        }

        double lemma2_variance_update(const StateActionPoint& z_star, const StateActionPoint& z) const
        {
            return lemma2_variance_update(z_star.joined(), z.joined());
        }

        /// Snapshot of the current posterior mean, usable as a later prior.
        PriorMean freeze_as_prior() const
        {
            FrozenGp f;
            f.kernel = _kernel;
            f.points = _unique;
            f.alpha = _alpha;
            f.parent = std::make_shared<const PriorMean>(_prior);
            f.flat = _flat_mean;
            if (_flat_mean) {
                f.flat_coeffs = _mean_coeffs;
                f.root = _mean_root;
            }
            f.source_id = _id;
            f.source_size = size();
            f.source_reg = _reg;
            return PriorMean::frozen(std::move(f));
        }

    private:
        static std::uint64_t next_id()
        {
            static std::atomic<std::uint64_t> counter{1};
            return counter.fetch_add(1, std::memory_order_relaxed);
        }

        void validate_setup() const
        {
            if (!_prior.valid())
                throw InputError("GpModel: prior mean is required");
            if (!(_reg > 0.0) || !std::isfinite(_reg))
                throw InputError("GpModel: regularization must be positive and finite");
            if (_state_dim < 1 || _action_dim < 0)
                throw InputError("GpModel: invalid state/action dimensions");
            if (_kernel.periods().size() != 0 && _kernel.periods().size() != _state_dim + _action_dim)
                throw InputError("GpModel: kernel period mask does not match input dimension");
        }

        void check_input(const Vector& z) const
        {
            if (z.size() != input_dim())
                throw InputError("GpModel: input dimension " + std::to_string(z.size()) + ", expected " + std::to_string(input_dim()));
            if (!z.allFinite())
                throw InputError("GpModel: non-finite input");
        }

        Index find_unique(const Vector& z) const
        {
            for (Index j = 0; j < _unique.rows(); ++j)
                if (_unique.row(j) == z.transpose())
                    return j;
            return -1;
        }

        void push_unique(const Vector& z, const Vector& y)
        {
            const Index m = _unique.rows();
            _unique.conservativeResize(m + 1, Eigen::NoChange);
            _unique.row(m) = z.transpose();
            _counts.conservativeResize(m + 1);
            _counts[m] = 1.0;
            _target_sums.conservativeResize(m + 1, Eigen::NoChange);
            _target_sums.row(m) = y.transpose();
        }

        void factorize()
        {
            const Index m = distinct_size();
            Matrix A = _kernel.gram(_unique);
            for (Index j = 0; j < m; ++j)
                A(j, j) += _reg / _counts[j] + kJitter;
            Eigen::LLT<Matrix> llt(A);
            if (llt.info() != Eigen::Success)
                throw NumericError("GpModel: regularized Gram matrix is not positive definite");
            _chol = llt.matrixL();
            for (Index j = 0; j < m; ++j)
                if (!(_chol(j, j) * _chol(j, j) > 0.5 * kJitter))
                    throw NumericError("GpModel: Cholesky pivot collapsed at row " + std::to_string(j));
        }

        /// Recompute alpha and the collapsed mean representation.
        void refresh_coefficients()
        {
            const Index m = distinct_size();
            Matrix residual(m, output_dim());
            for (Index j = 0; j < m; ++j)
                residual.row(j) = _target_sums.row(j) / _counts[j] - _prior_at.row(j);
            _alpha = residual;
            if (m > 0) {
                _chol.triangularView<Eigen::Lower>().solveInPlace(_alpha);
                _chol.triangularView<Eigen::Lower>().transpose().solveInPlace(_alpha);
            }

            _flat_mean = false;
            _mean_root.reset();
            if (_prior.is_analytic()) {
                _flat_mean = true;
                _mean_coeffs = _alpha;
                _mean_root = std::make_shared<const PriorMean>(_prior);
            }
            else if (const FrozenGp* f = _prior.frozen_gp(); f && f->flat) {
                const Index mp = f->points.rows();
                if (mp <= m && f->kernel == _kernel && _unique.topRows(mp) == f->points) {
                    _flat_mean = true;
                    _mean_coeffs = _alpha;
                    _mean_coeffs.topRows(mp) += f->flat_coeffs;
                    _mean_root = f->root;
                }
            }
        }

        RbfKernel _kernel;
        PriorMean _prior;
        double _reg = 1.0;
        Index _state_dim = 0;
        Index _action_dim = 0;

        TransitionDataset _data;
        Matrix _unique;
        Vector _counts;
        Matrix _target_sums;
        Matrix _prior_at;
        Matrix _chol;
        Matrix _alpha;

        bool _flat_mean = false;
        Matrix _mean_coeffs;
        std::shared_ptr<const PriorMean> _mean_root;

        std::uint64_t _id = 0;
    };

    // Free-function spellings of the model operations.

    inline Vector predict_mean(const GpModel& m, const StateActionPoint& z) { return m.predict_mean(z); }
    inline double predict_variance(const GpModel& m, const StateActionPoint& z) { return m.predict_variance(z); }
    inline GpModel update_with_observation(const GpModel& m, const StateActionPoint& z, const Vector& y)
    {
        return m.update_with_observation(z, y);
    }
    inline double lemma2_variance_update(const GpModel& m, const StateActionPoint& z_star, const StateActionPoint& z)
    {
        return m.lemma2_variance_update(z_star, z);
    }
    inline PriorMean freeze_as_prior(const GpModel& m) { return m.freeze_as_prior(); }

} // namespace discucb

#endif
