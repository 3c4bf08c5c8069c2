#ifndef DISCUCB_GP_PRIOR_MEAN_HPP
#define DISCUCB_GP_PRIOR_MEAN_HPP

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <utility>

#include <discucb/gp/kernel.hpp>

namespace discucb {

    class PriorMean;

    /// Immutable snapshot of a GP posterior mean used as the prior of a later
    /// model. value(z) = alpha^T k_U(z) + parent(z).
    ///
    /// When the parent chain is made of snapshots over nested prefixes of the
    /// same distinct-point list, the whole chain collapses to
    /// flat_coeffs^T k_U(z) + root(z); `flat` marks that this form is valid.
    struct FrozenGp {
        RbfKernel kernel;
        Matrix points; // distinct inputs U (m x input_dim)
        Matrix alpha; // (m x output_dim)
        std::shared_ptr<const PriorMean> parent;

        bool flat = false;
        Matrix flat_coeffs; // (m x output_dim)
        std::shared_ptr<const PriorMean> root;

        // Provenance, enough to rebuild the snapshot from a dataset prefix.
        std::uint64_t source_id = 0;
        Index source_size = 0; // raw observation count at freeze time
        double source_reg = 0.0;
    };

    /// Mean function m(z) of a GP: either an analytic model p0 supplied by an
    /// environment, or a frozen GP snapshot chained to an earlier prior.
    /// Cheap to copy; evaluation is pure.
    class PriorMean {
    public:
        using Function = std::function<Vector(const Vector& z)>;

        PriorMean() = default;

        static PriorMean analytic(std::string name, Index output_dim, Function fn)
        {
            if (!fn)
                throw InputError("PriorMean::analytic: empty function");
            auto node = std::make_shared<Node>();
            node->name = std::move(name);
            node->output_dim = output_dim;
            node->fn = std::move(fn);
            node->chain_length = 1;
            return PriorMean(std::move(node));
        }

        static PriorMean zero(Index output_dim)
        {
            return analytic("zero", output_dim, [output_dim](const Vector&) { return Vector::Zero(output_dim); });
        }

        static PriorMean frozen(FrozenGp gp)
        {
            if (!gp.parent || !gp.parent->valid())
                throw InputError("PriorMean::frozen: snapshot needs a parent prior");
            if (gp.points.rows() != gp.alpha.rows())
                throw InputError("PriorMean::frozen: coefficient shape mismatch");
            auto node = std::make_shared<Node>();
            node->output_dim = gp.alpha.cols();
            node->chain_length = gp.parent->chain_length() + 1;
            node->name = gp.parent->root_name();
            node->frozen = std::make_shared<const FrozenGp>(std::move(gp));
            return PriorMean(std::move(node));
        }

        bool valid() const { return static_cast<bool>(_node); }
        bool is_analytic() const { return valid() && !_node->frozen; }
        bool is_frozen() const { return valid() && static_cast<bool>(_node->frozen); }
        Index output_dim() const { return _node->output_dim; }

        /// Number of links down to (and including) the analytic root.
        int chain_length() const { return _node->chain_length; }

        /// Name of the analytic root model.
        const std::string& root_name() const { return _node->name; }

        const FrozenGp* frozen_gp() const { return _node ? _node->frozen.get() : nullptr; }

        /// Identity, not value, equality.
        bool same_as(const PriorMean& o) const { return _node == o._node; }

        Vector operator()(const Vector& z) const
        {
            if (!_node)
                throw InputError("PriorMean: evaluating an empty prior");
            if (!_node->frozen) {
                Vector v = _node->fn(z);
                if (v.size() != _node->output_dim)
                    throw InputError("PriorMean: analytic model returned wrong dimension");
                return v;
            }
            const FrozenGp& f = *_node->frozen;
            const Matrix k = f.kernel.cross(f.points, z.transpose());
            if (f.flat)
                return f.flat_coeffs.transpose() * k.col(0) + (*f.root)(z);
            return f.alpha.transpose() * k.col(0) + (*f.parent)(z);
        }

        /// Row-wise evaluation: result.row(i) = m(Z.row(i)).
        Matrix evaluate_rows(const Eigen::Ref<const Matrix>& Z) const
        {
            if (!_node)
                throw InputError("PriorMean: evaluating an empty prior");
            if (!_node->frozen) {
                Matrix out(Z.rows(), _node->output_dim);
                for (Index i = 0; i < Z.rows(); ++i)
                    out.row(i) = (*this)(Z.row(i).transpose()).transpose();
                return out;
            }
            const FrozenGp& f = *_node->frozen;
            const Matrix K = f.kernel.cross(f.points, Z);
            if (f.flat)
                return K.transpose() * f.flat_coeffs + f.root->evaluate_rows(Z);
            return K.transpose() * f.alpha + f.parent->evaluate_rows(Z);
        }

        /// Evaluation that always walks the parent links one by one, ignoring
        /// the collapsed form. Used to cross-check the collapsed path.
        Vector evaluate_recursive(const Vector& z) const
        {
            if (!_node->frozen)
                return (*this)(z);
            const FrozenGp& f = *_node->frozen;
            const Matrix k = f.kernel.cross(f.points, z.transpose());
            return f.alpha.transpose() * k.col(0) + f.parent->evaluate_recursive(z);
        }

    private:
        struct Node {
            std::string name;
            Index output_dim = 0;
            Function fn;
            std::shared_ptr<const FrozenGp> frozen;
            int chain_length = 0;
        };

        explicit PriorMean(std::shared_ptr<const Node> node) : _node(std::move(node)) {}

        std::shared_ptr<const Node> _node;
    };

} // namespace discucb

#endif
