#include "dle/timestep.hpp"

#include <cmath>
#include <utility>

namespace dle {

PhaseVector::PhaseVector(Vector x_in, Vector p_in) : x(std::move(x_in)), p(std::move(p_in)) {
    if (x.size() != p.size()) {
        throw ValidationError("PhaseVector: x and p must have equal length");
    }
    if (!x.allFinite() || !p.allFinite()) {
        throw ValidationError("PhaseVector: entries must be finite");
    }
}

PhaseVector PhaseVector::zero(Index q) {
    return PhaseVector(Vector::Zero(q), Vector::Zero(q));
}

PhaseVector PhaseVector::from_flat(const Vector& flat) {
    if (flat.size() % 2 != 0) {
        throw ValidationError("PhaseVector: flat vector must have even length");
    }
    const Index q = flat.size() / 2;
    return PhaseVector(flat.head(q), flat.tail(q));
}

Vector PhaseVector::flat() const {
    Vector y(2 * q());
    y.head(q()) = x;
    y.tail(q()) = p;
    return y;
}

double symplectic_product(const PhaseVector& y, const PhaseVector& z) {
    if (y.q() != z.q()) {
        throw ValidationError("symplectic_product: dimension mismatch");
    }
    return y.x.dot(z.p) - z.x.dot(y.p);
}

namespace {

void require_square(const Matrix& m, Index q, const char* name) {
    if (m.rows() != q || m.cols() != q) {
        throw ValidationError(std::string(name) + ": expected a square matrix of matching size");
    }
}

void require_symmetric(const Matrix& m, const char* name) {
    if (max_abs(m - m.transpose()) > 1e-10) {
        throw ValidationError(std::string(name) + ": matrix must be symmetric");
    }
}

}  // namespace

TimeStepSystem::TimeStepSystem(Matrix l, Matrix r, Matrix rbar)
    : l_(std::move(l)), r_(std::move(r)), rbar_(std::move(rbar)) {
    if (l_.rows() == 0) {
        throw ValidationError("TimeStepSystem: dimension must be positive");
    }
    require_square(l_, l_.rows(), "TimeStepSystem L");
    require_square(r_, l_.rows(), "TimeStepSystem R");
    require_square(rbar_, l_.rows(), "TimeStepSystem Rbar");
    if (!is_finite(l_) || !is_finite(r_) || !is_finite(rbar_)) {
        throw ValidationError("TimeStepSystem: entries must be finite");
    }
    require_symmetric(l_, "TimeStepSystem L");
    require_symmetric(rbar_, "TimeStepSystem Rbar");
}

Vector pre_momentum(const TimeStepSystem& sys, const Vector& x_from, const Vector& x_to) {
    return sys.l() * x_from + sys.r() * x_to;
}

Vector post_momentum(const TimeStepSystem& sys, const Vector& x_from, const Vector& x_to) {
    return sys.lbar() * x_from + sys.rbar() * x_to;
}

double step_action(const TimeStepSystem& sys, const Vector& x_from, const Vector& x_to) {
    if (x_from.size() != sys.q() || x_to.size() != sys.q()) {
        throw ValidationError("step_action: dimension mismatch");
    }
    // Oriented so that lattice-built systems reproduce the edge-sum action;
    // equals (x_from . pre_momentum - x_to . post_momentum) / 2.
    return 0.5 * (x_from.dot(sys.l() * x_from) + 2.0 * x_from.dot(sys.r() * x_to) -
                  x_to.dot(sys.rbar() * x_to));
}

namespace {

EvolutionMove assemble_move(const Matrix& drive, const Matrix& same_slice,
                            const Matrix& other_coupling, const Matrix& out_same,
                            double rel_tol) {
    // Solves drive * x_out = p_in - same_slice * x_in. The output state is
    //   x_out = drive^+ (p_in - same_slice x_in) + V2(drive) lambda
    //   p_out = other_coupling x_in + out_same x_out
    const Index q = drive.rows();
    EvolutionMove move;
    move.svd = svd(drive, rel_tol);
    move.q = q;
    move.rank = move.svd.rank;
    move.free_dim = q - move.rank;

    const Matrix plus = pinv(move.svd);
    const Matrix left_null = projector(move.svd, FundamentalSpace::LeftNullSpace);

    move.e.resize(2 * q, 2 * q);
    move.e.topLeftCorner(q, q) = -plus * same_slice;
    move.e.topRightCorner(q, q) = plus;
    move.e.bottomLeftCorner(q, q) = other_coupling - out_same * plus * same_slice;
    move.e.bottomRightCorner(q, q) = out_same * plus;

    move.f.resize(2 * q, move.free_dim);
    move.f.topRows(q) = move.svd.v2;
    move.f.bottomRows(q) = out_same * move.svd.v2;

    move.c.resize(q, 2 * q);
    move.c.leftCols(q) = -left_null * same_slice;
    move.c.rightCols(q) = left_null;

    return move;
}

Matrix output_constraint(const Matrix& out_drive, const Matrix& out_same, double rel_tol) {
    // P_N(out_drive^T) [-out_same, 1]: the constraint satisfied by outputs.
    const Index q = out_drive.rows();
    const Matrix left_null = projector(out_drive, FundamentalSpace::LeftNullSpace, rel_tol);
    Matrix cbar(q, 2 * q);
    cbar.leftCols(q) = -left_null * out_same;
    cbar.rightCols(q) = left_null;
    return cbar;
}

}  // namespace

EvolutionMove build_move(const TimeStepSystem& sys, double rel_tol) {
    // Forward: R x_{n+1} = p_n - L x_n, then p_{n+1} = Lbar x_n + Rbar x_{n+1}.
    EvolutionMove move = assemble_move(sys.r(), sys.l(), sys.lbar(), sys.rbar(), rel_tol);
    move.cbar_next = output_constraint(sys.lbar(), sys.rbar(), rel_tol);
    return move;
}

EvolutionMove build_backward_move(const TimeStepSystem& sys, double rel_tol) {
    // Backward: Lbar x_n = p_{n+1} - Rbar x_{n+1}, then p_n = R x_{n+1} + L x_n.
    EvolutionMove move = assemble_move(sys.lbar(), sys.rbar(), sys.r(), sys.l(), rel_tol);
    move.cbar_next = output_constraint(sys.r(), sys.l(), rel_tol);
    return move;
}

Vector pre_constraint_residual(const EvolutionMove& move, const PhaseVector& y) {
    if (y.q() != move.q) {
        throw ValidationError("pre_constraint_residual: dimension mismatch");
    }
    return move.c * y.flat();
}

ConstraintError::ConstraintError(const std::string& what, double residual_norm,
                                 std::vector<Index> violating_rows)
    : std::runtime_error(what),
      residual_norm_(residual_norm),
      violating_rows_(std::move(violating_rows)) {}

PhaseVector project_onto_constraint(const EvolutionMove& move, const PhaseVector& y) {
    const Vector flat = y.flat();
    const Vector projected = flat - pinv(move.c, kDefaultRelTol) * (move.c * flat);
    return PhaseVector::from_flat(projected);
}

PhaseVector evolve(const EvolutionMove& move, const PhaseVector& y, const Vector& lambda,
                   const EvolveOptions& options) {
    if (lambda.size() != move.free_dim) {
        throw ValidationError("evolve: lambda must have length " + std::to_string(move.free_dim));
    }

    PhaseVector state = options.project ? project_onto_constraint(move, y) : y;

    const Vector residual = pre_constraint_residual(move, state);
    const double scale = std::max(1.0, max_abs(state.flat()));
    const double tol = options.constraint_tol * scale;
    if (max_abs(residual) > tol) {
        std::vector<Index> rows;
        for (Index i = 0; i < residual.size(); ++i) {
            if (std::abs(residual(i)) > tol) rows.push_back(i);
        }
        throw ConstraintError("evolve: state violates the pre-constraint", max_abs(residual),
                              std::move(rows));
    }

    const Vector out = move.e * state.flat() + move.f * lambda;
    return PhaseVector::from_flat(out);
}

}  // namespace dle
