// lattice.hpp — massless scalar field on a 2D spacetime lattice with tube
// topology: slices of vertices, spacelike/timelike edges, the dynamical
// matrix of the quadratic action and its splitting into time-step systems.

#pragma once

#include "dle/timestep.hpp"

#include <nlohmann/json_fwd.hpp>

#include <cstdint>
#include <vector>

namespace dle {

using VertexId = std::int64_t;

struct LatticeVertex {
    VertexId id = 0;
    bool is_virtual = false;
};

// Edge within one slice (a and b are vertex ids of that slice).
struct SpacelikeEdge {
    int slice = 0;
    VertexId a = 0;
    VertexId b = 0;
};

// Edge from vertex a at `slice` to vertex b at `slice + 1`.
struct TimelikeEdge {
    int slice = 0;
    VertexId a = 0;
    VertexId b = 0;
};

enum class EdgeKind { InteriorSpacelike, InteriorTimelike, BoundarySpacelike, BoundaryTimelike };

// Edge weights of the triangulated model. Per-step extraction uses the split
// convention (boundary spacelike, interior timelike); the interior spacelike
// and boundary timelike weights exist only for the unsplit matrix path.
double edge_weight(EdgeKind kind);

// A validated lattice. Slices are padded with synthetic virtual vertices so
// every slice holds exactly q entries; virtual vertices carry no edges.
// Repeated edges are allowed and accumulate weight.
class LatticeSpec {
public:
    LatticeSpec(std::vector<std::vector<LatticeVertex>> slices,
                std::vector<SpacelikeEdge> spacelike, std::vector<TimelikeEdge> timelike);

    Index q() const { return q_; }
    int num_slices() const { return static_cast<int>(slices_.size()); }
    int num_steps() const { return num_slices() - 1; }
    Index total_vertices() const { return q_ * num_slices(); }

    const std::vector<std::vector<LatticeVertex>>& slices() const { return slices_; }
    const std::vector<SpacelikeEdge>& spacelike() const { return spacelike_; }
    const std::vector<TimelikeEdge>& timelike() const { return timelike_; }

    // Position of a vertex in the padded slice order.
    Index local_index(int slice, VertexId id) const;

private:
    std::vector<std::vector<LatticeVertex>> slices_;
    std::vector<SpacelikeEdge> spacelike_;
    std::vector<TimelikeEdge> timelike_;
    Index q_ = 0;
};

// Parses the lattice document: {"slices": [[id | {"id": k, "virtual": true},
// ...], ...], "spacelike": [[slice, a, b], ...], "timelike": [[slice, a, b],
// ...]}. Unknown keys are rejected.
LatticeSpec parse_lattice(const nlohmann::json& doc);
LatticeSpec load_lattice(const std::string& path);

// Symmetric N x N matrix K of the action (1/2) phi^T K phi, N = q (t+1).
// Assembled step by step with split weights, so a spacelike edge shared by
// two steps accumulates the interior weight. Row sums vanish and rows of
// virtual vertices are identically zero.
struct DynamicalMatrix {
    Matrix k;
    Index q = 0;
    int num_slices = 0;

    Index global_index(int slice, Index local) const { return slice * q + local; }
};

DynamicalMatrix build_dynamical_matrix(const LatticeSpec& spec);

// One TimeStepSystem per step, built from the step-local lattice.
std::vector<TimeStepSystem> split_into_steps(const LatticeSpec& spec);

// (1/2) sum over edges of the split lattice of w (phi_i - phi_j)^2.
double total_action(const LatticeSpec& spec, const Vector& phi);

}  // namespace dle
