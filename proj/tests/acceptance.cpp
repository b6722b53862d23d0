// Acceptance suite: runs every release criterion at its pinned tolerance and
// prints one pass/fail line per criterion. Exits nonzero on any failure.

#include "dle/adapted.hpp"
#include "dle/checks.hpp"
#include "dle/global.hpp"
#include "dle/lattice.hpp"
#include "reference_matrices.hpp"
#include "support.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

using namespace dle;
using dletest::fixture;
using dletest::vec;
namespace ref = dletest::ref;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

class Tracker {
public:
    void residual(const std::string& label, double value, double tol) {
        worst_ = std::max(worst_, value);
        if (value > tol) {
            pass_ = false;
            std::ostringstream msg;
            msg << label << " residual " << value << " exceeds " << tol;
            notes_.push_back(msg.str());
        }
    }

    void require(const std::string& label, bool condition) {
        if (!condition) {
            pass_ = false;
            notes_.push_back(label);
        }
    }

    Outcome finish(const std::string& extra = "") const {
        Outcome outcome;
        outcome.pass = pass_;
        std::ostringstream detail;
        if (!pass_) {
            for (std::size_t i = 0; i < notes_.size(); ++i) {
                detail << (i ? "; " : "") << notes_[i];
            }
        } else {
            detail << "worst residual " << worst_;
            if (!extra.empty()) detail << "; " << extra;
        }
        outcome.detail = detail.str();
        return outcome;
    }

private:
    bool pass_ = true;
    double worst_ = 0.0;
    std::vector<std::string> notes_;
};

double ms_since(const std::chrono::steady_clock::time_point& start) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
        .count();
}

Matrix span_projector(const Matrix& columns) {
    if (columns.cols() == 0) return Matrix::Zero(columns.rows(), columns.rows());
    const Matrix basis = image_basis(columns);
    return basis * basis.transpose();
}

// 1. Ring-lattice regression: K, step matrices, evolution matrix and the
//    evolved canonical vector, all entrywise, in under a second.
Outcome criterion_ring_regression() {
    const auto start = std::chrono::steady_clock::now();
    Tracker t;

    const LatticeSpec spec = load_lattice(fixture("tube_3_3.json"));
    t.residual("K", max_abs(build_dynamical_matrix(spec).k - ref::ring_k()), 1e-9);

    const auto steps = split_into_steps(spec);
    t.require("one step", steps.size() == 1);
    t.residual("L", max_abs(steps[0].l() - ref::ring_step().l()), 1e-9);
    t.residual("R", max_abs(steps[0].r() - ref::ring_step().r()), 1e-9);
    t.residual("Rbar", max_abs(steps[0].rbar() - ref::ring_step().rbar()), 1e-9);

    const EvolutionMove move = build_move(steps[0]);
    t.residual("E", max_abs(move.e - ref::ring_e0()), 1e-9);

    const PhaseVector out =
        evolve(move, PhaseVector::from_flat(vec({1, 0, 0, 0, 0, 0})), Vector::Zero(0));
    t.residual("evolved state",
               max_abs(out.flat() - vec({0.75, -0.5, 0.75, 0.375, -0.75, 0.375})), 1e-9);

    const double elapsed = ms_since(start);
    t.require("runtime < 1 s", elapsed < 1000.0);
    std::ostringstream extra;
    extra << "runtime " << elapsed << " ms";
    return t.finish(extra.str());
}

// 2. Collapse-lattice regression: null projector, constraint, evolution
//    matrix, free-column span, and the trivial adapted update.
Outcome criterion_collapse_regression() {
    const auto start = std::chrono::steady_clock::now();
    Tracker t;

    const auto steps = split_into_steps(load_lattice(fixture("tube_3_1.json")));
    const TimeStepSystem& sys = steps[0];
    t.residual("null projector",
               max_abs(projector(sys.r(), FundamentalSpace::LeftNullSpace) -
                       ref::collapse_left_null_projector()),
               1e-9);

    const EvolutionMove move = build_move(sys);
    t.residual("C", max_abs(move.c - ref::collapse_c0()), 1e-9);
    t.residual("E", max_abs(move.e - ref::collapse_e0()), 1e-9);
    t.residual("F span", max_abs(span_projector(move.f) - span_projector(ref::collapse_f1())),
               1e-8);

    const AdaptedFrame frame = build_frame(sys);
    const PhaseVector y0 = PhaseVector::from_flat(vec({2, 0, 0, -1, 0, 0}));
    const Vector adapted = to_adapted(frame, y0, SliceSide::Pre);
    const Vector lambda = vec({0.8, -0.6});
    const Vector updated = evolve_adapted(frame, adapted, lambda);

    const Index q = 3;
    const Index r = frame.rank;
    t.residual("kept components", std::abs(updated(0) - adapted(0)), 1e-9);
    t.residual("kept momenta", max_abs(updated.segment(q, r) - adapted.segment(q, r)), 1e-9);
    t.residual("injected parameters", max_abs(updated.segment(r, q - r) - lambda), 1e-12);
    t.residual("terminal block", max_abs(updated.tail(q - r)), 1e-12);

    const PhaseVector evolved = evolve(move, y0, lambda);
    t.residual("agreement with the matrix path",
               max_abs(to_adapted(frame, evolved, SliceSide::Post) - updated), 1e-8);

    const double elapsed = ms_since(start);
    t.require("runtime < 1 s", elapsed < 1000.0);
    std::ostringstream extra;
    extra << "runtime " << elapsed << " ms";
    return t.finish(extra.str());
}

// 3. Expand and doubled-pair regressions: exact constraint pattern, the
//    evolution matrices, the free-column span and the adapted trajectory.
Outcome criterion_expand_and_doubled_regression() {
    Tracker t;

    const auto expand_steps = split_into_steps(load_lattice(fixture("tube_1_3.json")));
    const EvolutionMove expand = build_move(expand_steps[0]);
    t.residual("expand C", max_abs(expand.c - ref::expand_c0()), 1e-12);
    t.residual("expand E", max_abs(expand.e - ref::expand_e0()), 1e-9);
    t.residual("expand F span",
               max_abs(span_projector(expand.f) - span_projector(ref::expand_f1())), 1e-8);

    const AdaptedFrame frame = build_frame(expand_steps[0]);
    const Vector start = vec({7, 0, 0, -1, 0, 0});
    const Vector lambda = vec({2.5, -1.5});
    const Vector updated = evolve_adapted(frame, start, lambda);
    t.residual("expand adapted trajectory",
               max_abs(updated - vec({7, 2.5, -1.5, -1, 0, 0})), 1e-12);

    const auto doubled_steps = split_into_steps(load_lattice(fixture("tube_2_2_doubled.json")));
    const EvolutionMove doubled = build_move(doubled_steps[0]);
    t.require("doubled rank 1", doubled.rank == 1);
    t.require("doubled free dim 1", doubled.free_dim == 1);
    t.residual("doubled E", max_abs(doubled.e - ref::doubled_pair_e0()), 1e-9);
    return t.finish();
}

// 4. Symplectic conservation on 200 random irregular systems.
Outcome criterion_conservation_suite() {
    Tracker t;
    const CheckSummary summary = run_random_move_checks(20250607, 200);
    for (const CheckResult& result : summary.results) {
        if (result.name == "symplectic_conservation") {
            t.require("200 trials", result.trials == 200);
            t.residual(result.name, result.worst, result.tolerance);
        }
    }
    return t.finish();
}

// 5. Adapted-frame commutation and symplecticity on 200 random systems.
Outcome criterion_commutation_suite() {
    Tracker t;
    const CheckSummary summary = run_random_move_checks(424242, 200);
    for (const CheckResult& result : summary.results) {
        if (result.name == "adapted_commutation" || result.name == "frames_symplectic") {
            t.residual(result.name, result.worst, result.tolerance);
        }
    }
    return t.finish();
}

// 6. Lattice/action consistency on 50 random tube lattices.
Outcome criterion_lattice_suite() {
    Tracker t;
    const CheckSummary summary = run_random_lattice_checks(60616, 50);
    for (const CheckResult& result : summary.results) {
        if (result.name == "dynamical_matrix_row_sums" ||
            result.name == "virtual_vertex_rows_zero" ||
            result.name == "edge_action_matches_quadratic_form" ||
            result.name == "step_actions_sum_to_total") {
            t.residual(result.name, result.worst, result.tolerance);
        }
    }
    return t.finish();
}

// 7. Global solutions: one-step slice spaces equal the move surfaces, and on
//    the narrowing tube the representative dimension and the product of
//    solutions are slice independent.
Outcome criterion_global_suite() {
    Tracker t;

    Rng rng(1719);
    for (int trial = 0; trial < 20; ++trial) {
        const TimeStepSystem sys = random_system(rng, 5);
        const SolutionSpace sol = solution_space({sys});
        const EvolutionMove move = build_move(sys);
        const SubspaceBasis pre = make_subspace(2 * sys.q(), kernel_basis(move.c));
        t.residual("one-step slice space vs constraint surface",
                   max_abs(constraint_space(sol, 0).projector() - pre.projector()), 1e-8);
    }

    const auto steps = split_into_steps(load_lattice(fixture("tube_3_3_1_3.json")));
    const SolutionSpace sol = solution_space(steps);
    Index rep_dim = -1;
    for (int n = 0; n <= sol.t; ++n) {
        const NullSplit split = null_and_representative(constraint_space(sol, n), sol.q);
        if (n == 0) {
            rep_dim = split.representative.dim();
        } else {
            t.require("representative dimension is slice independent",
                      split.representative.dim() == rep_dim);
        }
    }

    for (int trial = 0; trial < 20; ++trial) {
        const Vector a = sol.kernel.basis * random_vector(rng, sol.kernel.dim());
        const Vector b = sol.kernel.basis * random_vector(rng, sol.kernel.dim());
        const double omega0 = solution_product(sol, a, b, 0);
        for (int n = 1; n <= sol.t; ++n) {
            t.residual("product of solutions slice independence",
                       std::abs(solution_product(sol, a, b, n) - omega0), 1e-8);
        }
    }

    std::ostringstream extra;
    extra << "narrowing tube dim Ddot = " << rep_dim;
    return t.finish(extra.str());
}

// 8. The published transform matrices of all four worked models are
//    symplectic and satisfy their defining block relations with the
//    published decomposition factors.
Outcome criterion_reference_transforms() {
    Tracker t;

    struct Case {
        const char* name;
        TimeStepSystem sys;
        Matrix u, sigma, v, wdot, wddot;
    };
    const Case cases[] = {
        {"ring", ref::ring_step(), ref::ring_u(), ref::ring_sigma(), ref::ring_v(),
         ref::ring_wdot(), ref::ring_wddot()},
        {"collapse", ref::collapse_step(), ref::collapse_u(), ref::collapse_sigma(),
         ref::collapse_v(), ref::collapse_wdot(), ref::collapse_wddot()},
        {"expand", ref::expand_step(), ref::expand_u(), ref::expand_sigma(), ref::expand_v(),
         ref::expand_wdot(), ref::expand_wddot()},
        {"doubled", ref::doubled_pair_step(), ref::doubled_pair_u(), ref::doubled_pair_sigma(),
         ref::doubled_pair_v(), ref::doubled_pair_wdot(), ref::doubled_pair_wddot()},
    };

    for (const Case& c : cases) {
        const Index q = c.sys.q();
        const std::string name = c.name;
        t.require(name + " wdot symplectic", is_symplectic(c.wdot, 1e-9));
        t.require(name + " wddot symplectic", is_symplectic(c.wddot, 1e-9));
        t.residual(name + " factorization", max_abs(c.u * c.sigma * c.v.transpose() - c.sys.r()),
                   1e-9);

        Matrix wdot(2 * q, 2 * q);
        wdot.topLeftCorner(q, q) = -c.u.transpose() * c.sys.l();
        wdot.topRightCorner(q, q) = c.u.transpose();
        wdot.bottomLeftCorner(q, q) = -c.u.transpose();
        wdot.bottomRightCorner(q, q).setZero();
        t.residual(name + " wdot blocks", max_abs(c.wdot - wdot), 1e-9);

        Index rank = 0;
        while (rank < q && c.sigma(rank, rank) > 0.0) ++rank;
        Vector sigma_bar = Vector::Ones(q);
        sigma_bar.head(rank) = c.sigma.diagonal().head(rank);
        Matrix wddot(2 * q, 2 * q);
        wddot.topLeftCorner(q, q) = sigma_bar.asDiagonal() * c.v.transpose();
        wddot.topRightCorner(q, q).setZero();
        wddot.bottomLeftCorner(q, q) =
            -(sigma_bar.cwiseInverse().asDiagonal() * c.v.transpose()) * c.sys.rbar();
        wddot.bottomRightCorner(q, q) =
            sigma_bar.cwiseInverse().asDiagonal() * c.v.transpose();
        t.residual(name + " wddot blocks", max_abs(c.wddot - wddot), 1e-9);
    }
    return t.finish();
}

}  // namespace

int main() {
    struct Entry {
        std::string label;
        std::function<Outcome()> run;
    };
    const std::vector<Entry> criteria = {
        {"ring-lattice regression (K, L, R, Rbar, E, evolved state)",
         criterion_ring_regression},
        {"collapse-lattice regression (projector, C, E, F span, adapted update)",
         criterion_collapse_regression},
        {"expand and doubled-pair regressions (C pattern, E, F span, ranks)",
         criterion_expand_and_doubled_regression},
        {"symplectic conservation on 200 random systems",
         criterion_conservation_suite},
        {"adapted-frame commutation on 200 random systems",
         criterion_commutation_suite},
        {"lattice/action consistency on 50 random tubes", criterion_lattice_suite},
        {"global-solution spaces and product of solutions", criterion_global_suite},
        {"published transforms pass symplectic and block checks",
         criterion_reference_transforms},
    };

    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome outcome;
        try {
            outcome = criteria[i].run();
        } catch (const std::exception& err) {
            outcome.pass = false;
            outcome.detail = std::string("exception: ") + err.what();
        }
        if (!outcome.pass) ++failures;
        std::printf("%s  criterion %zu: %s (%s)\n", outcome.pass ? "PASS" : "FAIL", i + 1,
                    criteria[i].label.c_str(), outcome.detail.c_str());
    }
    std::printf("%d/%zu acceptance criteria passed\n",
                static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
