#include "dle/lattice.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <utility>

namespace dle {

double edge_weight(EdgeKind kind) {
    switch (kind) {
        case EdgeKind::InteriorSpacelike: return 1.0;
        case EdgeKind::InteriorTimelike: return -2.0;
        case EdgeKind::BoundarySpacelike: return 0.5;
        case EdgeKind::BoundaryTimelike: return -1.0;
    }
    throw ValidationError("edge_weight: unknown edge kind");
}

namespace {

std::string edge_name(const char* kind, int slice, VertexId a, VertexId b) {
    return std::string(kind) + " edge [" + std::to_string(slice) + ", " + std::to_string(a) +
           ", " + std::to_string(b) + "]";
}

}  // namespace

LatticeSpec::LatticeSpec(std::vector<std::vector<LatticeVertex>> slices,
                         std::vector<SpacelikeEdge> spacelike,
                         std::vector<TimelikeEdge> timelike)
    : slices_(std::move(slices)), spacelike_(std::move(spacelike)), timelike_(std::move(timelike)) {
    if (slices_.empty()) {
        throw ValidationError("LatticeSpec: at least one slice required");
    }

    std::map<VertexId, std::pair<int, bool>> where;  // id -> (slice, is_virtual)
    VertexId max_id = 0;
    for (int n = 0; n < static_cast<int>(slices_.size()); ++n) {
        for (const LatticeVertex& v : slices_[n]) {
            if (v.id <= 0) {
                throw ValidationError("LatticeSpec: vertex ids must be positive, got " +
                                      std::to_string(v.id));
            }
            if (!where.emplace(v.id, std::make_pair(n, v.is_virtual)).second) {
                throw ValidationError("LatticeSpec: duplicate vertex id " + std::to_string(v.id));
            }
            max_id = std::max(max_id, v.id);
        }
        q_ = std::max<Index>(q_, static_cast<Index>(slices_[n].size()));
    }
    if (q_ == 0) {
        throw ValidationError("LatticeSpec: slices must not all be empty");
    }

    // Pad short slices with synthetic virtual vertices.
    for (auto& slice : slices_) {
        while (static_cast<Index>(slice.size()) < q_) {
            slice.push_back(LatticeVertex{++max_id, true});
        }
    }

    auto require_real = [&](VertexId id, int slice, const std::string& name) {
        auto it = where.find(id);
        if (it == where.end()) {
            throw ValidationError("LatticeSpec: unknown vertex " + std::to_string(id) + " in " +
                                  name);
        }
        if (it->second.first != slice) {
            throw ValidationError("LatticeSpec: vertex " + std::to_string(id) + " is not on slice " +
                                  std::to_string(slice) + " in " + name);
        }
        if (it->second.second) {
            throw ValidationError("LatticeSpec: virtual vertex " + std::to_string(id) +
                                  " cannot carry edges in " + name);
        }
    };

    for (const SpacelikeEdge& e : spacelike_) {
        const std::string name = edge_name("spacelike", e.slice, e.a, e.b);
        if (e.slice < 0 || e.slice >= num_slices()) {
            throw ValidationError("LatticeSpec: slice out of range in " + name);
        }
        if (e.a == e.b) {
            throw ValidationError("LatticeSpec: edges must connect distinct vertices in " + name);
        }
        require_real(e.a, e.slice, name);
        require_real(e.b, e.slice, name);
    }
    for (const TimelikeEdge& e : timelike_) {
        const std::string name = edge_name("timelike", e.slice, e.a, e.b);
        if (e.slice < 0 || e.slice >= num_steps()) {
            throw ValidationError("LatticeSpec: slice out of range in " + name);
        }
        require_real(e.a, e.slice, name);
        require_real(e.b, e.slice + 1, name);
    }
}

Index LatticeSpec::local_index(int slice, VertexId id) const {
    const auto& vertices = slices_.at(slice);
    for (Index i = 0; i < static_cast<Index>(vertices.size()); ++i) {
        if (vertices[i].id == id) return i;
    }
    throw ValidationError("LatticeSpec: vertex " + std::to_string(id) + " not on slice " +
                          std::to_string(slice));
}

namespace {

using nlohmann::json;

void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed,
                         const std::string& context) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (!allowed.count(it.key())) {
            throw ValidationError("lattice document: unknown key \"" + it.key() + "\" in " +
                                  context);
        }
    }
}

VertexId parse_id(const json& value, const std::string& context) {
    if (!value.is_number_integer()) {
        throw ValidationError("lattice document: expected an integer vertex id in " + context);
    }
    return value.get<VertexId>();
}

}  // namespace

LatticeSpec parse_lattice(const json& doc) {
    if (!doc.is_object()) {
        throw ValidationError("lattice document: top level must be an object");
    }
    reject_unknown_keys(doc, {"slices", "spacelike", "timelike"}, "top level");
    if (!doc.contains("slices") || !doc["slices"].is_array()) {
        throw ValidationError("lattice document: \"slices\" must be an array");
    }

    std::vector<std::vector<LatticeVertex>> slices;
    for (const json& slice : doc["slices"]) {
        if (!slice.is_array()) {
            throw ValidationError("lattice document: each slice must be an array");
        }
        std::vector<LatticeVertex> vertices;
        for (const json& entry : slice) {
            if (entry.is_object()) {
                reject_unknown_keys(entry, {"id", "virtual"}, "vertex entry");
                if (!entry.contains("id")) {
                    throw ValidationError("lattice document: vertex entry missing \"id\"");
                }
                LatticeVertex v;
                v.id = parse_id(entry["id"], "vertex entry");
                v.is_virtual = entry.value("virtual", false);
                vertices.push_back(v);
            } else {
                vertices.push_back(LatticeVertex{parse_id(entry, "slice entry"), false});
            }
        }
        slices.push_back(std::move(vertices));
    }

    auto parse_edges = [&](const char* key, auto make) {
        std::vector<decltype(make(0, 0, 0))> edges;
        if (!doc.contains(key)) return edges;
        if (!doc[key].is_array()) {
            throw ValidationError(std::string("lattice document: \"") + key +
                                  "\" must be an array");
        }
        for (const json& entry : doc[key]) {
            if (!entry.is_array() || entry.size() != 3) {
                throw ValidationError(std::string("lattice document: each \"") + key +
                                      "\" entry must be [slice, a, b]");
            }
            if (!entry[0].is_number_integer()) {
                throw ValidationError(std::string("lattice document: slice index in \"") + key +
                                      "\" must be an integer");
            }
            edges.push_back(make(entry[0].get<int>(), parse_id(entry[1], key),
                                 parse_id(entry[2], key)));
        }
        return edges;
    };

    auto spacelike = parse_edges("spacelike", [](int s, VertexId a, VertexId b) {
        return SpacelikeEdge{s, a, b};
    });
    auto timelike = parse_edges("timelike", [](int s, VertexId a, VertexId b) {
        return TimelikeEdge{s, a, b};
    });

    return LatticeSpec(std::move(slices), std::move(spacelike), std::move(timelike));
}

LatticeSpec load_lattice(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ValidationError("cannot open lattice file: " + path);
    }
    json doc;
    try {
        in >> doc;
    } catch (const json::parse_error& err) {
        throw ValidationError("lattice document: " + std::string(err.what()));
    }
    return parse_lattice(doc);
}

namespace {

// Accumulates one weighted edge into the quadratic form.
void add_edge(Matrix& k, Index i, Index j, double weight) {
    k(i, i) += weight;
    k(j, j) += weight;
    k(i, j) -= weight;
    k(j, i) -= weight;
}

// Spacelike edges of a slice restricted to one step carry boundary weight;
// timelike edges are always interior under the tube topology.
const double kSplitSpacelike = edge_weight(EdgeKind::BoundarySpacelike);
const double kSplitTimelike = edge_weight(EdgeKind::InteriorTimelike);

template <typename SpacelikeFn, typename TimelikeFn>
void for_each_step_edge(const LatticeSpec& spec, int step, SpacelikeFn&& on_spacelike,
                        TimelikeFn&& on_timelike) {
    for (const SpacelikeEdge& e : spec.spacelike()) {
        if (e.slice == step || e.slice == step + 1) {
            on_spacelike(e.slice - step, spec.local_index(e.slice, e.a),
                         spec.local_index(e.slice, e.b));
        }
    }
    for (const TimelikeEdge& e : spec.timelike()) {
        if (e.slice == step) {
            on_timelike(spec.local_index(step, e.a), spec.local_index(step + 1, e.b));
        }
    }
}

}  // namespace

DynamicalMatrix build_dynamical_matrix(const LatticeSpec& spec) {
    DynamicalMatrix result;
    result.q = spec.q();
    result.num_slices = spec.num_slices();
    result.k = Matrix::Zero(spec.total_vertices(), spec.total_vertices());

    for (int step = 0; step < spec.num_steps(); ++step) {
        const Index base = step * spec.q();
        for_each_step_edge(
            spec, step,
            [&](int side, Index a, Index b) {
                const Index offset = base + side * spec.q();
                add_edge(result.k, offset + a, offset + b, kSplitSpacelike);
            },
            [&](Index a, Index b) {
                add_edge(result.k, base + a, base + spec.q() + b, kSplitTimelike);
            });
    }
    return result;
}

std::vector<TimeStepSystem> split_into_steps(const LatticeSpec& spec) {
    if (spec.num_steps() < 1) {
        throw ValidationError("split_into_steps: need at least two slices");
    }
    const Index q = spec.q();

    std::vector<TimeStepSystem> steps;
    steps.reserve(spec.num_steps());
    for (int step = 0; step < spec.num_steps(); ++step) {
        Matrix local = Matrix::Zero(2 * q, 2 * q);
        for_each_step_edge(
            spec, step,
            [&](int side, Index a, Index b) {
                const Index offset = side * q;
                add_edge(local, offset + a, offset + b, kSplitSpacelike);
            },
            [&](Index a, Index b) { add_edge(local, a, q + b, kSplitTimelike); });

        steps.emplace_back(local.topLeftCorner(q, q), local.topRightCorner(q, q),
                           -local.bottomRightCorner(q, q));
    }
    return steps;
}

double total_action(const LatticeSpec& spec, const Vector& phi) {
    if (phi.size() != spec.total_vertices()) {
        throw ValidationError("total_action: field vector must have length " +
                              std::to_string(spec.total_vertices()));
    }
    double action = 0.0;
    for (int step = 0; step < spec.num_steps(); ++step) {
        const Index base = step * spec.q();
        for_each_step_edge(
            spec, step,
            [&](int side, Index a, Index b) {
                const Index offset = base + side * spec.q();
                const double d = phi(offset + a) - phi(offset + b);
                action += 0.5 * kSplitSpacelike * d * d;
            },
            [&](Index a, Index b) {
                const double d = phi(base + a) - phi(base + spec.q() + b);
                action += 0.5 * kSplitTimelike * d * d;
            });
    }
    return action;
}

}  // namespace dle
