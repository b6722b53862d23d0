#include "dle/checks.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

namespace dle {

double Rng::uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
}

int Rng::uniform_int(int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(engine_);
}

Matrix random_matrix(Rng& rng, Index rows, Index cols, double lo, double hi) {
    Matrix m(rows, cols);
    for (Index i = 0; i < rows; ++i) {
        for (Index j = 0; j < cols; ++j) m(i, j) = rng.uniform(lo, hi);
    }
    return m;
}

Matrix random_symmetric(Rng& rng, Index n, double lo, double hi) {
    Matrix m(n, n);
    for (Index i = 0; i < n; ++i) {
        for (Index j = i; j < n; ++j) {
            m(i, j) = rng.uniform(lo, hi);
            m(j, i) = m(i, j);
        }
    }
    return m;
}

Vector random_vector(Rng& rng, Index n, double lo, double hi) {
    Vector v(n);
    for (Index i = 0; i < n; ++i) v(i) = rng.uniform(lo, hi);
    return v;
}

Matrix random_rank_deficient(Rng& rng, Index rows, Index cols, Index rank) {
    if (rank == 0) return Matrix::Zero(rows, cols);
    const bool full = rank == std::min(rows, cols);
    for (int attempt = 0; attempt < 256; ++attempt) {
        const Matrix m = full ? random_matrix(rng, rows, cols)
                              : random_matrix(rng, rows, rank) * random_matrix(rng, rank, cols);
        const SvdBundle bundle = svd(m);
        // Keep the kept spectrum well away from the rank cutoff so downstream
        // pseudoinverses stay benign.
        if (bundle.rank == rank && bundle.sigma(bundle.rank - 1) > 1e-2 * bundle.sigma(0)) {
            return m;
        }
    }
    throw ValidationError("random_rank_deficient: failed to draw a well-conditioned matrix");
}

TimeStepSystem random_system(Rng& rng, Index max_q) {
    const Index q = rng.uniform_int(1, static_cast<int>(max_q));
    const Matrix l = random_symmetric(rng, q);
    const Matrix rbar = random_symmetric(rng, q);
    const Index rank = rng.uniform_int(0, static_cast<int>(q));
    const Matrix r = random_rank_deficient(rng, q, q, rank);
    return TimeStepSystem(l, r, rbar);
}

std::vector<TimeStepSystem> random_chain(Rng& rng, Index q, int steps) {
    std::vector<TimeStepSystem> chain;
    chain.reserve(steps);
    for (int n = 0; n < steps; ++n) {
        const Matrix l = random_symmetric(rng, q);
        const Matrix rbar = random_symmetric(rng, q);
        const Index rank = rng.uniform_int(std::min<Index>(1, q), static_cast<int>(q));
        chain.emplace_back(l, random_rank_deficient(rng, q, q, rank), rbar);
    }
    return chain;
}

LatticeSpec random_tube_lattice(Rng& rng, int max_steps, Index max_width) {
    const int steps = rng.uniform_int(1, max_steps);
    std::vector<std::vector<LatticeVertex>> slices;
    std::vector<SpacelikeEdge> spacelike;
    std::vector<TimelikeEdge> timelike;

    VertexId next_id = 1;
    std::vector<std::vector<VertexId>> real_ids;
    for (int n = 0; n <= steps; ++n) {
        const int width = rng.uniform_int(1, static_cast<int>(max_width));
        std::vector<LatticeVertex> slice;
        std::vector<VertexId> ids;
        for (int i = 0; i < width; ++i) {
            slice.push_back(LatticeVertex{next_id, false});
            ids.push_back(next_id);
            ++next_id;
        }
        slices.push_back(std::move(slice));
        real_ids.push_back(std::move(ids));

        // Loop of spacelike edges; two vertices close the loop with a
        // doubled edge, a lone vertex has none.
        const auto& loop = real_ids.back();
        if (width == 2) {
            spacelike.push_back(SpacelikeEdge{n, loop[0], loop[1]});
            spacelike.push_back(SpacelikeEdge{n, loop[0], loop[1]});
        } else if (width >= 3) {
            for (int i = 0; i < width; ++i) {
                spacelike.push_back(SpacelikeEdge{n, loop[i], loop[(i + 1) % width]});
            }
        }
    }

    // Zigzag merge of consecutive loops, one timelike edge per advance.
    for (int n = 0; n < steps; ++n) {
        const auto& lower = real_ids[n];
        const auto& upper = real_ids[n + 1];
        std::size_t i = 0;
        std::size_t j = 0;
        timelike.push_back(TimelikeEdge{n, lower[0], upper[0]});
        while (i < lower.size() || j < upper.size()) {
            const bool advance_lower =
                i < lower.size() && (j >= upper.size() || rng.uniform_int(0, 1) == 0);
            if (advance_lower) {
                ++i;
            } else {
                ++j;
            }
            timelike.push_back(
                TimelikeEdge{n, lower[i % lower.size()], upper[j % upper.size()]});
        }
    }

    return LatticeSpec(std::move(slices), std::move(spacelike), std::move(timelike));
}

PhaseVector random_on_constraint(Rng& rng, const EvolutionMove& move) {
    const PhaseVector raw = PhaseVector::from_flat(random_vector(rng, 2 * move.q));
    return project_onto_constraint(move, raw);
}

bool CheckSummary::all_pass() const {
    return std::all_of(results.begin(), results.end(),
                       [](const CheckResult& r) { return r.pass; });
}

void CheckSummary::append(CheckSummary other) {
    for (auto& r : other.results) results.push_back(std::move(r));
}

namespace {

// Accumulates the worst residual of one named invariant.
class Residual {
public:
    Residual(std::string name, double tolerance)
        : name_(std::move(name)), tolerance_(tolerance) {}

    void record(double value) {
        worst_ = std::max(worst_, std::abs(value));
        ++trials_;
    }

    void record(const Matrix& m) { record(max_abs(m)); }

    CheckResult finish() const {
        return CheckResult{name_, trials_, worst_, tolerance_, worst_ <= tolerance_};
    }

private:
    std::string name_;
    double tolerance_;
    double worst_ = 0.0;
    int trials_ = 0;
};

}  // namespace

CheckSummary run_linalg_checks(std::uint64_t seed, int iterations) {
    Rng rng(seed);

    Residual orthogonality("svd_factor_orthogonality", 1e-10);
    Residual reconstruction("svd_reconstruction", 1e-10);
    Residual ordering("svd_value_ordering", 0.0);
    Residual penrose("pseudoinverse_penrose_conditions", 1e-9);
    Residual projector_shape("projector_symmetry_idempotency", 1e-10);
    Residual completeness("projector_completeness", 1e-10);
    Residual annihilation("kernel_annihilation", 1e-9);

    for (int iter = 0; iter < iterations; ++iter) {
        const Index rows = rng.uniform_int(1, 8);
        const Index cols = rng.uniform_int(1, 8);
        Matrix a = random_matrix(rng, rows, cols, -5.0, 5.0);
        // Every third draw forces rank deficiency by duplicating a row.
        if (iter % 3 == 0 && rows >= 2) {
            a.row(rng.uniform_int(0, static_cast<int>(rows) - 1)) =
                a.row(rng.uniform_int(0, static_cast<int>(rows) - 1));
        }

        const SvdBundle bundle = svd(a);
        const Matrix u = bundle.full_u();
        const Matrix v = bundle.full_v();
        orthogonality.record(u.transpose() * u - Matrix::Identity(rows, rows));
        orthogonality.record(v.transpose() * v - Matrix::Identity(cols, cols));

        const double scale = bundle.rank > 0 ? std::max(1.0, bundle.sigma(0)) : 1.0;
        reconstruction.record(max_abs(a - bundle.reconstruct()) / scale);

        double order_violation = 0.0;
        for (Index i = 0; i + 1 < bundle.rank; ++i) {
            order_violation = std::max(order_violation, bundle.sigma(i + 1) - bundle.sigma(i));
        }
        if (bundle.rank > 0 &&
            bundle.sigma(bundle.rank - 1) <= bundle.tolerance_used) {
            order_violation = 1.0;
        }
        ordering.record(order_violation);

        const Matrix plus = pinv(bundle);
        penrose.record(a * plus * a - a);
        penrose.record(plus * a * plus - plus);
        penrose.record(((a * plus) - (a * plus).transpose()).eval());
        penrose.record(((plus * a) - (plus * a).transpose()).eval());

        for (FundamentalSpace space :
             {FundamentalSpace::Range, FundamentalSpace::RowSpace, FundamentalSpace::NullSpace,
              FundamentalSpace::LeftNullSpace}) {
            const Matrix p = projector(bundle, space);
            projector_shape.record(p - p.transpose());
            projector_shape.record(p * p - p);
        }
        completeness.record(projector(bundle, FundamentalSpace::Range) +
                            projector(bundle, FundamentalSpace::LeftNullSpace) -
                            Matrix::Identity(rows, rows));
        annihilation.record(a * bundle.v2);
        annihilation.record(projector(bundle, FundamentalSpace::NullSpace) * a.transpose());
    }

    CheckSummary summary;
    for (const Residual* r : {&orthogonality, &reconstruction, &ordering, &penrose,
                              &projector_shape, &completeness, &annihilation}) {
        summary.results.push_back(r->finish());
    }
    return summary;
}

namespace {

CheckSummary move_checks_impl(const std::vector<TimeStepSystem>& systems, Rng& rng,
                              int iterations) {
    Residual conservation("symplectic_conservation", 1e-8);
    Residual closure("post_constraint_closure", 1e-8);
    Residual annihilation("null_space_annihilation", 1e-9);
    Residual zero_intersection("image_parameter_zero_intersection", 1e-10);
    Residual mixed_action("action_mixed_form", 1e-9);
    Residual backward("backward_inverts_regular_moves", 1e-9);
    Residual frames("frames_symplectic", 1e-9);
    Residual inverse_pattern("frame_inverse_patterns", 1e-9);
    Residual commutation("adapted_commutation", 1e-8);
    Residual classification("classification_agreement", 0.0);
    Residual representative("representative_form_standard", 1e-9);

    for (int iter = 0; iter < iterations; ++iter) {
        const TimeStepSystem& sys = systems[iter % systems.size()];
        const Index q = sys.q();
        const EvolutionMove move = build_move(sys);
        const AdaptedFrame frame = build_frame(sys);

        const PhaseVector y = random_on_constraint(rng, move);
        const PhaseVector z = random_on_constraint(rng, move);
        const Vector lambda_y = random_vector(rng, move.free_dim);
        const Vector lambda_z = random_vector(rng, move.free_dim);

        const PhaseVector y_next = evolve(move, y, lambda_y);
        const PhaseVector z_next = evolve(move, z, lambda_z);
        conservation.record(symplectic_product(y_next, z_next) - symplectic_product(y, z));

        closure.record(move.cbar_next * y_next.flat());

        // Null-space directions are annihilated by the evolution matrix.
        for (Index m = 0; m < move.free_dim; ++m) {
            Vector basis_vec = Vector::Zero(2 * q);
            basis_vec.head(q) = -move.svd.u2.col(m);
            basis_vec.tail(q) = -sys.l() * move.svd.u2.col(m);
            annihilation.record(move.e * basis_vec);
        }

        zero_intersection.record(move.svd.v1.transpose() * move.svd.v2);

        const Vector x_to = random_vector(rng, q);
        const double action = step_action(sys, y.x, x_to);
        const double mixed = 0.5 * (y.x.dot(pre_momentum(sys, y.x, x_to)) -
                                    x_to.dot(post_momentum(sys, y.x, x_to)));
        mixed_action.record(action - mixed);

        const EvolutionMove back = build_backward_move(sys);
        if (move.free_dim == 0 && back.free_dim == 0) {
            backward.record(back.e * move.e - Matrix::Identity(2 * q, 2 * q));
        }

        const Matrix sigma = symplectic_form(q);
        frames.record(frame.wdot.transpose() * sigma * frame.wdot - sigma);
        frames.record(frame.wddot.transpose() * sigma * frame.wddot - sigma);

        inverse_pattern.record(frame.wdot * frame.wdot_inv - Matrix::Identity(2 * q, 2 * q));
        inverse_pattern.record(frame.wddot * frame.wddot_inv - Matrix::Identity(2 * q, 2 * q));
        inverse_pattern.record(symplectic_inverse(frame.wdot) - frame.wdot_inv);
        inverse_pattern.record(symplectic_inverse(frame.wddot) - frame.wddot_inv);

        const Vector adapted_in = to_adapted(frame, y, SliceSide::Pre);
        const Vector adapted_out = evolve_adapted(frame, adapted_in, lambda_y);
        commutation.record(to_adapted(frame, y_next, SliceSide::Post) - adapted_out);

        // classify() against direct membership in the constraint surface and
        // against vectors assembled from known subspace directions.
        {
            const VectorClass got = classify(frame, y, SliceSide::Pre);
            const bool direct_on =
                max_abs(move.c * y.flat()) <= 1e-8 * std::max(1.0, max_abs(y.flat()));
            classification.record(got.on_constraint == direct_on ? 0.0 : 1.0);

            Vector adapted_probe = Vector::Zero(2 * q);
            for (Index i = 0; i < move.rank; ++i) adapted_probe(i) = rng.uniform(0.5, 1.5);
            for (Index i = 0; i < move.rank; ++i) adapted_probe(q + i) = rng.uniform(0.5, 1.5);
            const PhaseVector rep_vec = from_adapted(frame, adapted_probe, SliceSide::Pre);
            const VectorClass rep_class = classify(frame, rep_vec, SliceSide::Pre);
            classification.record(rep_class.on_constraint && rep_class.in_representative &&
                                          (rep_class.in_null_space == (move.rank == 0))
                                      ? 0.0
                                      : 1.0);

            Vector null_probe = Vector::Zero(2 * q);
            for (Index i = q + move.rank; i < 2 * q; ++i) null_probe(i) = rng.uniform(0.5, 1.5);
            const PhaseVector null_vec = from_adapted(frame, null_probe, SliceSide::Pre);
            const VectorClass null_class = classify(frame, null_vec, SliceSide::Pre);
            classification.record(null_class.on_constraint && null_class.in_null_space &&
                                          (null_class.in_representative == (move.free_dim == 0))
                                      ? 0.0
                                      : 1.0);
        }

        // Restricted to the representative components, the basis columns
        // reproduce the standard form of half-dimension r.
        if (move.rank > 0) {
            const Index r = move.rank;
            Matrix rep_basis(2 * q, 2 * r);
            rep_basis.leftCols(r) = frame.wdot_inv.middleCols(0, r);
            rep_basis.rightCols(r) = frame.wdot_inv.middleCols(q, r);
            const Matrix gram = rep_basis.transpose() * sigma * rep_basis;
            representative.record(gram - symplectic_form(r));
        }
    }

    CheckSummary summary;
    for (const Residual* r :
         {&conservation, &closure, &annihilation, &zero_intersection, &mixed_action, &backward,
          &frames, &inverse_pattern, &commutation, &classification, &representative}) {
        summary.results.push_back(r->finish());
    }
    return summary;
}

}  // namespace

CheckSummary run_move_checks(const std::vector<TimeStepSystem>& systems, std::uint64_t seed,
                             int iterations) {
    if (systems.empty()) {
        throw ValidationError("run_move_checks: no systems given");
    }
    Rng rng(seed);
    return move_checks_impl(systems, rng, iterations);
}

CheckSummary run_random_move_checks(std::uint64_t seed, int iterations) {
    Rng rng(seed);
    std::vector<TimeStepSystem> systems;
    systems.reserve(iterations);
    for (int i = 0; i < iterations; ++i) systems.push_back(random_system(rng, 6));
    return move_checks_impl(systems, rng, iterations);
}

namespace {

CheckSummary lattice_checks_impl(const LatticeSpec& spec, Rng& rng, int iterations) {
    Residual row_sums("dynamical_matrix_row_sums", 1e-10);
    Residual virtual_rows("virtual_vertex_rows_zero", 1e-12);
    Residual edge_action("edge_action_matches_quadratic_form", 1e-9);
    Residual additivity("step_actions_sum_to_total", 1e-9);
    Residual coupling("adjacent_coupling_transpose", 1e-12);

    const DynamicalMatrix dyn = build_dynamical_matrix(spec);
    row_sums.record(dyn.k.rowwise().sum());
    row_sums.record(dyn.k.colwise().sum());

    for (int n = 0; n < spec.num_slices(); ++n) {
        for (Index i = 0; i < spec.q(); ++i) {
            if (!spec.slices()[n][i].is_virtual) continue;
            const Index g = dyn.global_index(n, i);
            virtual_rows.record(dyn.k.row(g));
            virtual_rows.record(dyn.k.col(g));
        }
    }

    std::vector<TimeStepSystem> steps;
    if (spec.num_steps() >= 1) steps = split_into_steps(spec);

    for (int n = 0; n < static_cast<int>(steps.size()); ++n) {
        const Matrix k_coupling =
            dyn.k.block(n * spec.q(), (n + 1) * spec.q(), spec.q(), spec.q());
        coupling.record(steps[n].r() - k_coupling);
        coupling.record(steps[n].lbar() + k_coupling.transpose());
    }

    for (int iter = 0; iter < iterations; ++iter) {
        const Vector phi = random_vector(rng, spec.total_vertices());
        const double quadratic = 0.5 * phi.dot(dyn.k * phi);
        edge_action.record(total_action(spec, phi) - quadratic);

        double stepped = 0.0;
        for (int n = 0; n < static_cast<int>(steps.size()); ++n) {
            stepped += step_action(steps[n], phi.segment(n * spec.q(), spec.q()),
                                   phi.segment((n + 1) * spec.q(), spec.q()));
        }
        additivity.record(stepped - quadratic);
    }

    CheckSummary summary;
    for (const Residual* r : {&row_sums, &virtual_rows, &edge_action, &additivity, &coupling}) {
        summary.results.push_back(r->finish());
    }
    return summary;
}

}  // namespace

CheckSummary run_lattice_checks(const LatticeSpec& spec, std::uint64_t seed, int iterations) {
    Rng rng(seed);
    return lattice_checks_impl(spec, rng, iterations);
}

CheckSummary run_random_lattice_checks(std::uint64_t seed, int count) {
    Rng rng(seed);
    CheckSummary merged;
    for (int i = 0; i < count; ++i) {
        const LatticeSpec spec = random_tube_lattice(rng, 4, 5);
        CheckSummary one = lattice_checks_impl(spec, rng, 4);
        if (i == 0) {
            merged = std::move(one);
        } else {
            // Fold the per-lattice results into the running worst case.
            for (std::size_t k = 0; k < merged.results.size(); ++k) {
                CheckResult& acc = merged.results[k];
                const CheckResult& cur = one.results[k];
                acc.trials += cur.trials;
                acc.worst = std::max(acc.worst, cur.worst);
                acc.pass = acc.pass && cur.pass;
            }
        }
    }
    return merged;
}

namespace {

// Vectors of the subspace spanned by `basis` annihilated by `constraint`.
// Uses an absolute singular-value floor tied to the constraint scale, so a
// product that is pure roundoff noise counts as zero.
SubspaceBasis restrict_to_kernel(const SubspaceBasis& space, const Matrix& constraint) {
    if (space.dim() == 0) return space;
    const Matrix product = constraint * space.basis;
    const double floor_abs = 1e-9 * std::max(1.0, max_abs(constraint));
    if (max_abs(product) <= floor_abs) return space;

    const SvdBundle bundle = svd(product);
    Index rank = bundle.rank;
    while (rank > 0 && bundle.sigma(rank - 1) <= floor_abs) --rank;
    const Matrix v = bundle.full_v();
    return make_subspace(space.ambient_dim, space.basis * v.rightCols(v.cols() - rank));
}

CheckSummary chain_checks_impl(const std::vector<TimeStepSystem>& steps, Rng& rng,
                               int iterations) {
    Residual product_const("solution_product_slice_independent", 1e-8);
    Residual rep_dim("representative_dimension_uniform", 0.0);
    Residual telescoping("action_telescopes_over_solutions", 1e-9);
    Residual endpoint("slice_space_endpoint_match", 1e-8);
    Residual interior("slice_space_interior_intersection", 1e-8);

    const SolutionSpace sol = solution_space(steps);
    const Index q = sol.q;

    std::vector<EvolutionMove> moves;
    for (const TimeStepSystem& sys : steps) moves.push_back(build_move(sys));

    std::vector<SubspaceBasis> slice_spaces;
    for (int n = 0; n <= sol.t; ++n) slice_spaces.push_back(constraint_space(sol, n));

    Index rep_dim_0 = -1;
    for (int n = 0; n <= sol.t; ++n) {
        const NullSplit split = null_and_representative(slice_spaces[n], q);
        if (n == 0) rep_dim_0 = split.representative.dim();
        rep_dim.record(split.representative.dim() == rep_dim_0 ? 0.0 : 1.0);
    }

    // For a single step the reachable slice spaces are exactly the
    // constraint surfaces of the move; at the interior slice of a two-step
    // chain, forward images intersect the next pre-constraint surface.
    if (sol.t == 1) {
        const SubspaceBasis pre = make_subspace(2 * q, kernel_basis(moves[0].c));
        endpoint.record(max_abs(slice_spaces[0].projector() - pre.projector()));

        Matrix reach(2 * q, pre.dim() + moves[0].free_dim);
        reach.leftCols(pre.dim()) = moves[0].e * pre.basis;
        reach.rightCols(moves[0].free_dim) = moves[0].f;
        const SubspaceBasis post = make_subspace(2 * q, image_basis(reach));
        endpoint.record(max_abs(slice_spaces[1].projector() - post.projector()));
    }
    if (sol.t == 2) {
        const SubspaceBasis pre0 = make_subspace(2 * q, kernel_basis(moves[0].c));
        Matrix reach(2 * q, pre0.dim() + moves[0].free_dim);
        reach.leftCols(pre0.dim()) = moves[0].e * pre0.basis;
        reach.rightCols(moves[0].free_dim) = moves[0].f;
        const SubspaceBasis post1 = make_subspace(2 * q, image_basis(reach));
        const SubspaceBasis expected = restrict_to_kernel(post1, moves[1].c);
        interior.record(max_abs(slice_spaces[1].projector() - expected.projector()));
    }

    for (int iter = 0; iter < iterations; ++iter) {
        if (sol.kernel.dim() == 0) break;
        const Vector a = sol.kernel.basis * random_vector(rng, sol.kernel.dim());
        const Vector b = sol.kernel.basis * random_vector(rng, sol.kernel.dim());

        const double omega0 = solution_product(sol, a, b, 0);
        for (int n = 1; n <= sol.t; ++n) {
            product_const.record(solution_product(sol, a, b, n) - omega0);
        }

        // Momentum matching makes the summed step actions telescope.
        std::vector<PhaseVector> states;
        for (int n = 0; n <= sol.t; ++n) {
            states.push_back(PhaseVector::from_flat(sol.slice_maps[n] * a));
        }
        double total = 0.0;
        for (int n = 0; n < sol.t; ++n) {
            total += step_action(steps[n], states[n].x, states[n + 1].x);
        }
        const double boundary =
            0.5 * (states.front().x.dot(states.front().p) - states.back().x.dot(states.back().p));
        telescoping.record(total - boundary);
    }

    CheckSummary summary;
    for (const Residual* r : {&product_const, &rep_dim, &telescoping, &endpoint, &interior}) {
        summary.results.push_back(r->finish());
    }
    return summary;
}

}  // namespace

CheckSummary run_chain_checks(const std::vector<TimeStepSystem>& steps, std::uint64_t seed,
                              int iterations) {
    Rng rng(seed);
    return chain_checks_impl(steps, rng, iterations);
}

CheckSummary run_random_chain_checks(std::uint64_t seed, int count) {
    Rng rng(seed);
    CheckSummary merged;
    for (int i = 0; i < count; ++i) {
        const Index q = rng.uniform_int(2, 4);
        const int t = rng.uniform_int(1, 3);
        const std::vector<TimeStepSystem> chain = random_chain(rng, q, t);
        CheckSummary one = chain_checks_impl(chain, rng, 4);
        if (i == 0) {
            merged = std::move(one);
        } else {
            for (std::size_t k = 0; k < merged.results.size(); ++k) {
                CheckResult& acc = merged.results[k];
                const CheckResult& cur = one.results[k];
                acc.trials += cur.trials;
                acc.worst = std::max(acc.worst, cur.worst);
                acc.pass = acc.pass && cur.pass;
            }
        }
    }
    return merged;
}

}  // namespace dle
