#include "dle/linalg.hpp"

#include <Eigen/SVD>

#include <cmath>

namespace dle {

bool is_finite(const Matrix& a) {
    return a.allFinite();
}

double max_abs(const Matrix& a) {
    if (a.size() == 0) return 0.0;
    return a.cwiseAbs().maxCoeff();
}

Matrix SvdBundle::full_u() const {
    Matrix u(rows, rows);
    u.leftCols(rank) = u1;
    u.rightCols(rows - rank) = u2;
    return u;
}

Matrix SvdBundle::full_v() const {
    Matrix v(cols, cols);
    v.leftCols(rank) = v1;
    v.rightCols(cols - rank) = v2;
    return v;
}

Matrix SvdBundle::reconstruct() const {
    if (rank == 0) return Matrix::Zero(rows, cols);
    return u1 * sigma.asDiagonal() * v1.transpose();
}

namespace {

// Index of the largest-magnitude entry; the lowest row wins ties.
Index dominant_row(const Vector& column) {
    Index best = 0;
    double best_abs = std::abs(column(0));
    for (Index i = 1; i < column.size(); ++i) {
        const double value = std::abs(column(i));
        if (value > best_abs) {
            best = i;
            best_abs = value;
        }
    }
    return best;
}

// Fixes column signs of the paired factors so that for every singular pair
// the dominant entry of the V column is positive. Unpaired trailing columns
// of the wider factor are fixed by their own dominant entry.
void canonicalize_signs(Matrix& u, Matrix& v) {
    const Index pairs = std::min(u.cols(), v.cols());
    for (Index i = 0; i < pairs; ++i) {
        if (v(dominant_row(v.col(i)), i) < 0.0) {
            v.col(i) = -v.col(i);
            u.col(i) = -u.col(i);
        }
    }
    for (Index i = pairs; i < u.cols(); ++i) {
        if (u(dominant_row(u.col(i)), i) < 0.0) u.col(i) = -u.col(i);
    }
    for (Index i = pairs; i < v.cols(); ++i) {
        if (v(dominant_row(v.col(i)), i) < 0.0) v.col(i) = -v.col(i);
    }
}

}  // namespace

SvdBundle svd(const Matrix& a, double rel_tol) {
    if (a.rows() == 0 || a.cols() == 0) {
        throw ValidationError("svd: matrix must be non-empty");
    }
    if (!is_finite(a)) {
        throw ValidationError("svd: matrix has non-finite entries");
    }
    if (!(rel_tol > 0.0)) {
        throw ValidationError("svd: rel_tol must be positive");
    }

    Eigen::JacobiSVD<Matrix> solver(a, Eigen::ComputeFullU | Eigen::ComputeFullV);
    Matrix u = solver.matrixU();
    Matrix v = solver.matrixV();
    const Vector& values = solver.singularValues();

    canonicalize_signs(u, v);

    const Index m = a.rows();
    const Index n = a.cols();
    const double sigma1 = values.size() > 0 ? values(0) : 0.0;
    const double cutoff = rel_tol * sigma1 * static_cast<double>(std::max(m, n));

    Index r = 0;
    while (r < values.size() && values(r) > cutoff) ++r;

    SvdBundle bundle;
    bundle.rows = m;
    bundle.cols = n;
    bundle.rank = r;
    bundle.tolerance_used = cutoff;
    bundle.sigma = values.head(r);
    bundle.u1 = u.leftCols(r);
    bundle.u2 = u.rightCols(m - r);
    bundle.v1 = v.leftCols(r);
    bundle.v2 = v.rightCols(n - r);
    return bundle;
}

Matrix pinv(const SvdBundle& bundle) {
    if (bundle.rank == 0) return Matrix::Zero(bundle.cols, bundle.rows);
    return bundle.v1 * bundle.sigma.cwiseInverse().asDiagonal() * bundle.u1.transpose();
}

Matrix pinv(const Matrix& a, double rel_tol) {
    return pinv(svd(a, rel_tol));
}

Matrix projector(const SvdBundle& bundle, FundamentalSpace space) {
    switch (space) {
        case FundamentalSpace::Range:
            return bundle.u1 * bundle.u1.transpose();
        case FundamentalSpace::RowSpace:
            return bundle.v1 * bundle.v1.transpose();
        case FundamentalSpace::NullSpace:
            return bundle.v2 * bundle.v2.transpose();
        case FundamentalSpace::LeftNullSpace:
            return bundle.u2 * bundle.u2.transpose();
    }
    throw ValidationError("projector: unknown space");
}

Matrix projector(const Matrix& a, FundamentalSpace space, double rel_tol) {
    return projector(svd(a, rel_tol), space);
}

Matrix kernel_basis(const Matrix& a, double rel_tol) {
    return svd(a, rel_tol).v2;
}

Matrix image_basis(const Matrix& a, double rel_tol) {
    return svd(a, rel_tol).u1;
}

Matrix symplectic_form(Index q) {
    Matrix sigma = Matrix::Zero(2 * q, 2 * q);
    sigma.topRightCorner(q, q) = Matrix::Identity(q, q);
    sigma.bottomLeftCorner(q, q) = -Matrix::Identity(q, q);
    return sigma;
}

bool is_symplectic(const Matrix& w, double tol) {
    if (w.rows() != w.cols()) {
        throw ValidationError("is_symplectic: matrix must be square");
    }
    if (w.rows() % 2 != 0) {
        throw ValidationError("is_symplectic: dimension must be even");
    }
    if (!is_finite(w)) {
        throw ValidationError("is_symplectic: matrix has non-finite entries");
    }
    const Matrix sigma = symplectic_form(w.rows() / 2);
    return max_abs(w.transpose() * sigma * w - sigma) <= tol;
}

Matrix symplectic_inverse(const Matrix& w) {
    if (!is_symplectic(w, 1e-8)) {
        throw ValidationError("symplectic_inverse: matrix is not symplectic");
    }
    const Index q = w.rows() / 2;
    Matrix inv(2 * q, 2 * q);
    inv.topLeftCorner(q, q) = w.bottomRightCorner(q, q).transpose();
    inv.topRightCorner(q, q) = -w.topRightCorner(q, q).transpose();
    inv.bottomLeftCorner(q, q) = -w.bottomLeftCorner(q, q).transpose();
    inv.bottomRightCorner(q, q) = w.topLeftCorner(q, q).transpose();
    return inv;
}

}  // namespace dle
