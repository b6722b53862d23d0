#include "dle/global.hpp"

#include <numeric>
#include <string>

namespace dle {

TrajectoryResult run_trajectory(const std::vector<EvolutionMove>& moves, const PhaseVector& y0,
                                const std::vector<Vector>& lambdas, double constraint_tol) {
    if (lambdas.size() != moves.size()) {
        throw ValidationError("run_trajectory: expected one lambda vector per step");
    }

    TrajectoryResult result;
    result.trajectory.states.push_back(y0);

    for (std::size_t n = 0; n < moves.size(); ++n) {
        const PhaseVector& current = result.trajectory.states.back();
        EvolveOptions options;
        options.constraint_tol = constraint_tol;
        try {
            PhaseVector next = evolve(moves[n], current, lambdas[n], options);
            result.trajectory.lambdas.push_back(lambdas[n]);
            result.trajectory.states.push_back(std::move(next));
        } catch (const ConstraintError& err) {
            ConstraintRejection rejection;
            rejection.slice = static_cast<int>(n);
            rejection.residual_norm = err.residual_norm();
            rejection.residual = pre_constraint_residual(moves[n], current);
            rejection.violating_rows = err.violating_rows();
            result.rejection = std::move(rejection);
            break;
        }
    }
    return result;
}

TrajectoryResult run_trajectory(const std::vector<TimeStepSystem>& steps, const PhaseVector& y0,
                                const std::vector<Vector>& lambdas, double rel_tol,
                                double constraint_tol) {
    std::vector<EvolutionMove> moves;
    moves.reserve(steps.size());
    for (const TimeStepSystem& sys : steps) moves.push_back(build_move(sys, rel_tol));
    return run_trajectory(moves, y0, lambdas, constraint_tol);
}

SubspaceBasis make_subspace(Index ambient_dim, const Matrix& basis) {
    if (basis.rows() != ambient_dim) {
        throw ValidationError("make_subspace: basis rows must match the ambient dimension");
    }
    if (basis.cols() > 0 &&
        max_abs(basis.transpose() * basis - Matrix::Identity(basis.cols(), basis.cols())) >
            1e-10) {
        throw ValidationError("make_subspace: basis columns must be orthonormal");
    }
    return SubspaceBasis{ambient_dim, basis};
}

bool same_subspace(const SubspaceBasis& a, const SubspaceBasis& b, double tol) {
    if (a.ambient_dim != b.ambient_dim) return false;
    return max_abs(a.projector() - b.projector()) <= tol;
}

SolutionSpace solution_space(const std::vector<TimeStepSystem>& steps, double rel_tol) {
    if (steps.empty()) {
        throw ValidationError("solution_space: at least one step required");
    }
    const Index q = steps.front().q();
    for (const TimeStepSystem& sys : steps) {
        if (sys.q() != q) {
            throw ValidationError("solution_space: all steps must share one dimension");
        }
    }

    std::vector<EvolutionMove> moves;
    moves.reserve(steps.size());
    for (const TimeStepSystem& sys : steps) moves.push_back(build_move(sys, rel_tol));

    SolutionSpace sol;
    sol.q = q;
    sol.t = static_cast<int>(steps.size());
    for (const EvolutionMove& move : moves) sol.lambda_dims.push_back(move.free_dim);
    const Index total_free =
        std::accumulate(sol.lambda_dims.begin(), sol.lambda_dims.end(), Index{0});
    sol.param_dim = 2 * q + total_free;

    // Slice states as linear images of the parameter vector.
    Matrix current = Matrix::Zero(2 * q, sol.param_dim);
    current.leftCols(2 * q).setIdentity();
    sol.slice_maps.push_back(current);

    Matrix constraints = Matrix::Zero(q * sol.t, sol.param_dim);
    Index lambda_offset = 2 * q;
    for (int n = 0; n < sol.t; ++n) {
        constraints.middleRows(q * n, q) = moves[n].c * current;

        Matrix next = moves[n].e * current;
        next.middleCols(lambda_offset, sol.lambda_dims[n]) += moves[n].f;
        lambda_offset += sol.lambda_dims[n];
        current = std::move(next);
        sol.slice_maps.push_back(current);
    }

    sol.kernel = make_subspace(sol.param_dim, kernel_basis(constraints, rel_tol));
    return sol;
}

SubspaceBasis constraint_space(const SolutionSpace& sol, int slice, double rel_tol) {
    if (slice < 0 || slice > sol.t) {
        throw ValidationError("constraint_space: slice out of range");
    }
    const Matrix states = sol.slice_maps[slice] * sol.kernel.basis;
    if (states.cols() == 0) {
        return SubspaceBasis{2 * sol.q, Matrix::Zero(2 * sol.q, 0)};
    }
    return make_subspace(2 * sol.q, image_basis(states, rel_tol));
}

double solution_product(const SolutionSpace& sol, const Vector& a, const Vector& b, int slice,
                        double membership_tol) {
    if (slice < 0 || slice > sol.t) {
        throw ValidationError("solution_product: slice out of range");
    }
    if (a.size() != sol.param_dim || b.size() != sol.param_dim) {
        throw ValidationError("solution_product: parameter vectors must have length " +
                              std::to_string(sol.param_dim));
    }
    const Matrix p = sol.kernel.projector();
    for (const Vector* v : {&a, &b}) {
        const double off = max_abs(*v - p * *v);
        if (off > membership_tol * std::max(1.0, max_abs(*v))) {
            throw ValidationError("solution_product: parameter vector is not admissible");
        }
    }
    const PhaseVector ya = PhaseVector::from_flat(sol.slice_maps[slice] * a);
    const PhaseVector yb = PhaseVector::from_flat(sol.slice_maps[slice] * b);
    return symplectic_product(ya, yb);
}

NullSplit null_and_representative(const SubspaceBasis& d, Index q, double rel_tol) {
    if (d.ambient_dim != 2 * q) {
        throw ValidationError("null_and_representative: ambient dimension must be 2q");
    }
    if (d.dim() == 0) {
        return NullSplit{SubspaceBasis{2 * q, Matrix::Zero(2 * q, 0)},
                         SubspaceBasis{2 * q, Matrix::Zero(2 * q, 0)}};
    }

    // Skew Gram matrix of the basis; its kernel gives the degenerate
    // directions, its row space the symplectic complement within D.
    const Matrix gram = d.basis.transpose() * symplectic_form(q) * d.basis;
    const SvdBundle gram_svd = svd(gram, rel_tol);

    NullSplit split;
    split.null_space = make_subspace(2 * q, d.basis * gram_svd.v2);
    split.representative = make_subspace(2 * q, d.basis * gram_svd.v1);
    return split;
}

}  // namespace dle
