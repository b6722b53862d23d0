// checks.hpp — seeded random generators for systems, lattices and states,
// plus the invariant suites behind the `check` command. Each suite reports
// its worst residual against a pinned tolerance.

#pragma once

#include "dle/adapted.hpp"
#include "dle/global.hpp"
#include "dle/lattice.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace dle {

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double uniform(double lo, double hi);
    int uniform_int(int lo, int hi);  // inclusive bounds

private:
    std::mt19937_64 engine_;
};

Matrix random_matrix(Rng& rng, Index rows, Index cols, double lo = -2.0, double hi = 2.0);
Matrix random_symmetric(Rng& rng, Index n, double lo = -2.0, double hi = 2.0);
Vector random_vector(Rng& rng, Index n, double lo = -2.0, double hi = 2.0);

// Exact rank deficiency via a low-rank product; resampled until the kept
// spectrum stays clear of the rank cutoff.
Matrix random_rank_deficient(Rng& rng, Index rows, Index cols, Index rank);

// Random symmetric L, Rbar and a generically rank-deficient R.
TimeStepSystem random_system(Rng& rng, Index max_q);
std::vector<TimeStepSystem> random_chain(Rng& rng, Index q, int steps);

// Random tube lattice: every slice is a loop, consecutive loops are joined
// by a triangulation-style zigzag of timelike edges.
LatticeSpec random_tube_lattice(Rng& rng, int max_steps, Index max_width);

// Random state projected onto the constraint surface of the move.
PhaseVector random_on_constraint(Rng& rng, const EvolutionMove& move);

struct CheckResult {
    std::string name;
    int trials = 0;
    double worst = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

struct CheckSummary {
    std::vector<CheckResult> results;

    bool all_pass() const;
    void append(CheckSummary other);
};

// Decomposition/pseudoinverse/projector invariants on random matrices.
CheckSummary run_linalg_checks(std::uint64_t seed, int iterations);

// One-step invariants (conservation, constraint closure, adapted frames) on
// the given systems, cycled across iterations with fresh random states.
CheckSummary run_move_checks(const std::vector<TimeStepSystem>& systems, std::uint64_t seed,
                             int iterations);
CheckSummary run_random_move_checks(std::uint64_t seed, int iterations);

// Lattice invariants: row sums, virtual rows, action identities.
CheckSummary run_lattice_checks(const LatticeSpec& spec, std::uint64_t seed, int iterations);
CheckSummary run_random_lattice_checks(std::uint64_t seed, int count);

// Whole-interval invariants on a chain of steps.
CheckSummary run_chain_checks(const std::vector<TimeStepSystem>& steps, std::uint64_t seed,
                              int iterations);
CheckSummary run_random_chain_checks(std::uint64_t seed, int count);

}  // namespace dle
