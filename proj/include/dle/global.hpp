// global.hpp — multi-step trajectories and the global-solution apparatus:
// the admissible-parameter space of whole-interval solutions, per-slice
// constraint spaces, the product of solutions and null/representative splits.

#pragma once

#include "dle/timestep.hpp"

#include <optional>
#include <vector>

namespace dle {

struct Trajectory {
    std::vector<PhaseVector> states;  // one per reached slice
    std::vector<Vector> lambdas;      // one per executed step
};

// First slice whose pre-constraint rejected the state.
struct ConstraintRejection {
    int slice = 0;
    double residual_norm = 0.0;
    Vector residual;
    std::vector<Index> violating_rows;
};

struct TrajectoryResult {
    Trajectory trajectory;
    std::optional<ConstraintRejection> rejection;

    bool ok() const { return !rejection.has_value(); }
};

// Chains one-step moves. On rejection the partial trajectory keeps every
// state computed so far, including the rejected one.
TrajectoryResult run_trajectory(const std::vector<EvolutionMove>& moves, const PhaseVector& y0,
                                const std::vector<Vector>& lambdas,
                                double constraint_tol = 1e-8);
TrajectoryResult run_trajectory(const std::vector<TimeStepSystem>& steps, const PhaseVector& y0,
                                const std::vector<Vector>& lambdas,
                                double rel_tol = kDefaultRelTol, double constraint_tol = 1e-8);

// A linear subspace given by an orthonormal basis matrix.
struct SubspaceBasis {
    Index ambient_dim = 0;
    Matrix basis;  // ambient_dim x k, orthonormal columns

    Index dim() const { return basis.cols(); }
    Matrix projector() const { return basis * basis.transpose(); }
};

SubspaceBasis make_subspace(Index ambient_dim, const Matrix& basis);

// ||P_A - P_B||_max <= tol on the projectors.
bool same_subspace(const SubspaceBasis& a, const SubspaceBasis& b, double tol = 1e-8);

// Whole-interval solutions parametrized by w = (y_0, lambda_1, ..., lambda_t):
// stacking every forward pre-constraint on the affine-linear slice states
// turns the solution set into the kernel of one matrix. slice_maps[n] sends
// an admissible parameter vector to the slice-n state.
struct SolutionSpace {
    Index q = 0;
    int t = 0;
    Index param_dim = 0;
    std::vector<Index> lambda_dims;
    SubspaceBasis kernel;             // admissible parameters
    std::vector<Matrix> slice_maps;   // t+1 maps of size 2q x param_dim
};

SolutionSpace solution_space(const std::vector<TimeStepSystem>& steps,
                             double rel_tol = kDefaultRelTol);

// Orthonormal basis of the slice-n states reachable by solutions.
SubspaceBasis constraint_space(const SolutionSpace& sol, int slice,
                               double rel_tol = kDefaultRelTol);

// omega at slice n between the states of two admissible parameter vectors;
// independent of the slice. Parameters outside the kernel are rejected.
double solution_product(const SolutionSpace& sol, const Vector& a, const Vector& b, int slice,
                        double membership_tol = 1e-8);

// Splits a subspace D of a 2q-dimensional phase space into the null space of
// the restricted symplectic form and its orthogonal complement within D (on
// which the form is nondegenerate). The rank of the skew Gram matrix is
// decided at the nondegeneracy threshold, which keeps the smallest retained
// singular value above 1e-8 times the largest.
inline constexpr double kGramRelTol = 1e-8;

struct NullSplit {
    SubspaceBasis null_space;
    SubspaceBasis representative;
};

NullSplit null_and_representative(const SubspaceBasis& d, Index q,
                                  double rel_tol = kGramRelTol);

}  // namespace dle
