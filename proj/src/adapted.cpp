#include "dle/adapted.hpp"

#include <cmath>

namespace dle {

AdaptedFrame build_frame(const TimeStepSystem& sys, double rel_tol) {
    const Index q = sys.q();

    AdaptedFrame frame;
    frame.svd_r = svd(sys.r(), rel_tol);
    frame.q = q;
    frame.rank = frame.svd_r.rank;
    frame.free_dim = q - frame.rank;

    const Matrix u = frame.svd_r.full_u();
    const Matrix v = frame.svd_r.full_v();

    // sigma_bar = diag(sigma_1..sigma_r, 1..1)
    Vector sigma_bar = Vector::Ones(q);
    sigma_bar.head(frame.rank) = frame.svd_r.sigma;
    const Vector sigma_bar_inv = sigma_bar.cwiseInverse();

    frame.wdot.resize(2 * q, 2 * q);
    frame.wdot.topLeftCorner(q, q) = -u.transpose() * sys.l();
    frame.wdot.topRightCorner(q, q) = u.transpose();
    frame.wdot.bottomLeftCorner(q, q) = -u.transpose();
    frame.wdot.bottomRightCorner(q, q).setZero();

    frame.wdot_inv.resize(2 * q, 2 * q);
    frame.wdot_inv.topLeftCorner(q, q).setZero();
    frame.wdot_inv.topRightCorner(q, q) = -u;
    frame.wdot_inv.bottomLeftCorner(q, q) = u;
    frame.wdot_inv.bottomRightCorner(q, q) = -sys.l() * u;

    frame.wddot.resize(2 * q, 2 * q);
    frame.wddot.topLeftCorner(q, q) = sigma_bar.asDiagonal() * v.transpose();
    frame.wddot.topRightCorner(q, q).setZero();
    frame.wddot.bottomLeftCorner(q, q) =
        -(sigma_bar_inv.asDiagonal() * v.transpose()) * sys.rbar();
    frame.wddot.bottomRightCorner(q, q) = sigma_bar_inv.asDiagonal() * v.transpose();

    frame.wddot_inv.resize(2 * q, 2 * q);
    frame.wddot_inv.topLeftCorner(q, q) = v * sigma_bar_inv.asDiagonal();
    frame.wddot_inv.topRightCorner(q, q).setZero();
    frame.wddot_inv.bottomLeftCorner(q, q) = sys.rbar() * v * sigma_bar_inv.asDiagonal();
    frame.wddot_inv.bottomRightCorner(q, q) = v * sigma_bar.asDiagonal();

    if (!is_symplectic(frame.wdot, 1e-9) || !is_symplectic(frame.wddot, 1e-9)) {
        throw ValidationError("build_frame: transforms failed the symplectic check");
    }
    return frame;
}

Vector to_adapted(const AdaptedFrame& frame, const PhaseVector& y, SliceSide side) {
    if (y.q() != frame.q) {
        throw ValidationError("to_adapted: dimension mismatch");
    }
    return (side == SliceSide::Pre ? frame.wdot : frame.wddot) * y.flat();
}

PhaseVector from_adapted(const AdaptedFrame& frame, const Vector& adapted, SliceSide side) {
    if (adapted.size() != 2 * frame.q) {
        throw ValidationError("from_adapted: dimension mismatch");
    }
    const Matrix& inv = side == SliceSide::Pre ? frame.wdot_inv : frame.wddot_inv;
    return PhaseVector::from_flat(inv * adapted);
}

namespace {

bool block_vanishes(const Vector& adapted, Index begin, Index end, double cutoff) {
    for (Index i = begin; i < end; ++i) {
        if (std::abs(adapted(i)) > cutoff) return false;
    }
    return true;
}

}  // namespace

VectorClass classify(const AdaptedFrame& frame, const PhaseVector& y, SliceSide side,
                     double tol) {
    const Vector adapted = to_adapted(frame, y, side);
    const double cutoff = tol * std::max(1.0, max_abs(adapted));
    const Index q = frame.q;
    const Index r = frame.rank;

    const bool rep_block = block_vanishes(adapted, 0, r, cutoff) &&
                           block_vanishes(adapted, q, q + r, cutoff);
    const bool mid_block = block_vanishes(adapted, r, q, cutoff);        // r+1..q
    const bool tail_block = block_vanishes(adapted, q + r, 2 * q, cutoff);  // q+r+1..2q

    VectorClass result;
    if (side == SliceSide::Pre) {
        result.on_constraint = mid_block;
        result.in_null_space = rep_block && mid_block;
        result.in_representative = mid_block && tail_block;
    } else {
        result.on_constraint = tail_block;
        result.in_null_space = rep_block && tail_block;
        result.in_representative = mid_block && tail_block;
    }
    return result;
}

Vector evolve_adapted(const AdaptedFrame& frame, const Vector& y_adapted, const Vector& lambda,
                      double constraint_tol) {
    const Index q = frame.q;
    const Index r = frame.rank;
    if (y_adapted.size() != 2 * q) {
        throw ValidationError("evolve_adapted: dimension mismatch");
    }
    if (lambda.size() != frame.free_dim) {
        throw ValidationError("evolve_adapted: lambda must have length " +
                              std::to_string(frame.free_dim));
    }

    const double cutoff = constraint_tol * std::max(1.0, max_abs(y_adapted));
    std::vector<Index> rows;
    for (Index i = r; i < q; ++i) {
        if (std::abs(y_adapted(i)) > cutoff) rows.push_back(i);
    }
    if (!rows.empty()) {
        double worst = 0.0;
        for (Index i : rows) worst = std::max(worst, std::abs(y_adapted(i)));
        throw ConstraintError("evolve_adapted: constraint components are nonzero", worst,
                              std::move(rows));
    }

    Vector out = Vector::Zero(2 * q);
    out.head(r) = y_adapted.head(r);
    out.segment(r, q - r) = lambda;
    out.segment(q, r) = y_adapted.segment(q, r);
    return out;
}

}  // namespace dle
