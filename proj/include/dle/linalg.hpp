// linalg.hpp — rank-revealing SVD, pseudoinverse, fundamental-space
// projectors and symplectic-matrix utilities shared by the whole library.

#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace dle {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

// Raised when an input violates a documented precondition (bad shape,
// non-finite entries, asymmetry, malformed file, ...).
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

inline constexpr double kDefaultRelTol = 1e-12;

bool is_finite(const Matrix& a);
double max_abs(const Matrix& a);

// Narrowed singular value decomposition A = U1 * diag(sigma) * V1^T with the
// full orthogonal factors split by numerical rank r:
//   U = [U1 U2] (m x m),  V = [V1 V2] (n x n),  sigma descending, length r.
// Column signs are canonicalized so results are reproducible run to run.
struct SvdBundle {
    Matrix u1;  // m x r
    Matrix u2;  // m x (m-r)
    Matrix v1;  // n x r
    Matrix v2;  // n x (n-r)
    Vector sigma;          // r positive singular values, descending
    Index rank = 0;
    double tolerance_used = 0.0;  // absolute cutoff applied to singular values
    Index rows = 0;
    Index cols = 0;

    Matrix full_u() const;
    Matrix full_v() const;
    Matrix reconstruct() const;  // u1 * diag(sigma) * v1^T
};

// Numerical rank r = #{sigma_i > rel_tol * sigma_1 * max(m, n)}.
SvdBundle svd(const Matrix& a, double rel_tol = kDefaultRelTol);

// Moore-Penrose pseudoinverse V1 * diag(1/sigma) * U1^T.
Matrix pinv(const SvdBundle& bundle);
Matrix pinv(const Matrix& a, double rel_tol = kDefaultRelTol);

enum class FundamentalSpace { Range, RowSpace, NullSpace, LeftNullSpace };

// Orthogonal projector onto the requested fundamental space of A.
Matrix projector(const SvdBundle& bundle, FundamentalSpace space);
Matrix projector(const Matrix& a, FundamentalSpace space, double rel_tol = kDefaultRelTol);

// Orthonormal bases of ker(A) (columns of V2) and range(A) (columns of U1).
Matrix kernel_basis(const Matrix& a, double rel_tol = kDefaultRelTol);
Matrix image_basis(const Matrix& a, double rel_tol = kDefaultRelTol);

// The canonical symplectic form [[0, I], [-I, 0]] of size 2q x 2q.
Matrix symplectic_form(Index q);

// True iff ||W^T sigma W - sigma||_max <= tol. Throws on odd/non-square W.
bool is_symplectic(const Matrix& w, double tol);

// Block-transpose inverse [[H^T, -F^T], [-G^T, E^T]] of W = [[E, F], [G, H]].
// The input is checked to be symplectic to 1e-8.
Matrix symplectic_inverse(const Matrix& w);

}  // namespace dle
