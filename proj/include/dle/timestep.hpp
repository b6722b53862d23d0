// timestep.hpp — one-step forward/backward Hamiltonian evolution of an
// irregular linear system: constraint matrices, evolution matrices, action
// evaluation and the symplectic product.

#pragma once

#include "dle/linalg.hpp"

#include <vector>

namespace dle {

// A point (x, p) of the 2q-dimensional phase space at one time-slice.
struct PhaseVector {
    Vector x;
    Vector p;

    PhaseVector(Vector x_in, Vector p_in);

    static PhaseVector zero(Index q);
    static PhaseVector from_flat(const Vector& flat);

    Index q() const { return x.size(); }
    Vector flat() const;  // (x; p)
};

// omega(y, z) = x(y)^T p(z) - x(z)^T p(y)
double symplectic_product(const PhaseVector& y, const PhaseVector& z);

// The matrix triple (L, R, Rbar) describing one evolution move between two
// q-dimensional configuration spaces. L and Rbar must be symmetric; the
// fourth matrix of the momentum equations is the derived Lbar = -R^T.
class TimeStepSystem {
public:
    TimeStepSystem(Matrix l, Matrix r, Matrix rbar);

    Index q() const { return l_.rows(); }
    const Matrix& l() const { return l_; }
    const Matrix& r() const { return r_; }
    const Matrix& rbar() const { return rbar_; }
    Matrix lbar() const { return -r_.transpose(); }

private:
    Matrix l_;
    Matrix r_;
    Matrix rbar_;
};

// Momenta induced by the quadratic step action.
Vector pre_momentum(const TimeStepSystem& sys, const Vector& x_from, const Vector& x_to);
Vector post_momentum(const TimeStepSystem& sys, const Vector& x_from, const Vector& x_to);

// -(x^T L x + 2 x^T R x' - x'^T Rbar x') / 2
double step_action(const TimeStepSystem& sys, const Vector& x_from, const Vector& x_to);

// One evolution move y_out = E y_in + F lambda. The input slice must satisfy
// the constraint C y_in = 0; outputs satisfy cbar_next y_out = 0. For a
// forward move the decomposition is of R; for a backward move, of Lbar.
struct EvolutionMove {
    Matrix e;          // 2q x 2q
    Matrix f;          // 2q x s
    Matrix c;          // q x 2q, constraint on the input slice
    Matrix cbar_next;  // q x 2q, satisfied by every output
    SvdBundle svd;
    Index q = 0;
    Index rank = 0;      // r
    Index free_dim = 0;  // s = q - r
};

EvolutionMove build_move(const TimeStepSystem& sys, double rel_tol = kDefaultRelTol);
EvolutionMove build_backward_move(const TimeStepSystem& sys, double rel_tol = kDefaultRelTol);

// C y; zero (max norm below tolerance) iff y is on the constraint surface.
Vector pre_constraint_residual(const EvolutionMove& move, const PhaseVector& y);

// Raised when evolve() is handed a state off the constraint surface.
class ConstraintError : public std::runtime_error {
public:
    ConstraintError(const std::string& what, double residual_norm,
                    std::vector<Index> violating_rows);

    double residual_norm() const { return residual_norm_; }
    const std::vector<Index>& violating_rows() const { return violating_rows_; }

private:
    double residual_norm_;
    std::vector<Index> violating_rows_;
};

struct EvolveOptions {
    double constraint_tol = 1e-8;  // scaled by max(1, ||y||_max)
    bool project = false;          // project onto the constraint surface first
};

// Orthogonal projection onto ker C, the constraint surface of the move.
PhaseVector project_onto_constraint(const EvolutionMove& move, const PhaseVector& y);

// E y + F lambda. Rejects states off the constraint surface unless
// options.project is set; lambda must have length free_dim.
PhaseVector evolve(const EvolutionMove& move, const PhaseVector& y, const Vector& lambda,
                   const EvolveOptions& options = {});

}  // namespace dle
