// adapted.hpp — symplectic coordinate frames adapted to the constraint
// surfaces of one evolution move. In these coordinates the move copies the
// representative components, injects the free parameters and zeroes the rest.

#pragma once

#include "dle/timestep.hpp"

namespace dle {

enum class SliceSide { Pre, Post };

// The pair of symplectic transforms for one move: wdot maps the earlier
// slice into adapted coordinates, wddot the later one. Component layout
// (1-based): 1..r and q+1..q+r carry the representative space; r+1..q are
// the free directions on the later slice (off-constraint on the earlier);
// q+r+1..2q parametrize the null space (earlier) or off-constraint (later).
struct AdaptedFrame {
    Matrix wdot;
    Matrix wddot;
    Matrix wdot_inv;
    Matrix wddot_inv;
    SvdBundle svd_r;
    Index q = 0;
    Index rank = 0;      // r
    Index free_dim = 0;  // s = q - r
};

AdaptedFrame build_frame(const TimeStepSystem& sys, double rel_tol = kDefaultRelTol);

Vector to_adapted(const AdaptedFrame& frame, const PhaseVector& y, SliceSide side);
PhaseVector from_adapted(const AdaptedFrame& frame, const Vector& adapted, SliceSide side);

struct VectorClass {
    bool on_constraint = false;      // pre- or post-constraint surface
    bool in_null_space = false;      // degenerate directions of the surface
    bool in_representative = false;  // complement carrying the symplectic form
};

// Membership tests by vanishing adapted components; a component vanishes when
// |value| <= tol * max(1, ||adapted||_max).
VectorClass classify(const AdaptedFrame& frame, const PhaseVector& y, SliceSide side,
                     double tol = 1e-8);

// The move in adapted coordinates: keep components 1..r and q+1..q+r, set
// r+1..q to lambda, zero q+r+1..2q. Components r+1..q of the input must
// vanish (the constraint in adapted form).
Vector evolve_adapted(const AdaptedFrame& frame, const Vector& y_adapted, const Vector& lambda,
                      double constraint_tol = 1e-8);

}  // namespace dle
