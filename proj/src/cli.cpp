#include "dle/cli.hpp"

#include "dle/checks.hpp"
#include "dle/report.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdint>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

namespace dle {

namespace {

using nlohmann::json;

struct CliConfig {
    std::string input_path;
    std::string y0_csv;
    std::string lambda_csv;
    std::string companion_csv;
    double rel_tol = 1e-12;
    double constraint_tol = 1e-8;
    std::uint64_t seed = 0;
    bool seed_given = false;
    int iterations = 100;
    bool machine = false;
    bool project = false;
};

struct LoadedInput {
    std::optional<LatticeSpec> lattice;
    std::vector<TimeStepSystem> steps;
};

Matrix parse_matrix(const json& value, const std::string& name) {
    if (!value.is_array() || value.empty()) {
        throw ValidationError("input document: \"" + name + "\" must be a non-empty array of rows");
    }
    const std::size_t rows = value.size();
    std::size_t cols = 0;
    Matrix m;
    for (std::size_t i = 0; i < rows; ++i) {
        const json& row = value[i];
        if (!row.is_array() || row.empty()) {
            throw ValidationError("input document: \"" + name + "\" rows must be non-empty arrays");
        }
        if (i == 0) {
            cols = row.size();
            m.resize(rows, cols);
        } else if (row.size() != cols) {
            throw ValidationError("input document: \"" + name + "\" rows have unequal lengths");
        }
        for (std::size_t j = 0; j < cols; ++j) {
            if (!row[j].is_number()) {
                throw ValidationError("input document: \"" + name + "\" entries must be numbers");
            }
            m(i, j) = row[j].get<double>();
        }
    }
    return m;
}

std::vector<TimeStepSystem> parse_raw_steps(const json& doc) {
    for (auto it = doc.begin(); it != doc.end(); ++it) {
        if (it.key() != "steps") {
            throw ValidationError("input document: unknown key \"" + it.key() + "\"");
        }
    }
    if (!doc["steps"].is_array() || doc["steps"].empty()) {
        throw ValidationError("input document: \"steps\" must be a non-empty array");
    }
    std::vector<TimeStepSystem> steps;
    for (const json& step : doc["steps"]) {
        if (!step.is_object()) {
            throw ValidationError("input document: each step must be an object");
        }
        for (auto it = step.begin(); it != step.end(); ++it) {
            if (it.key() != "L" && it.key() != "R" && it.key() != "Rbar") {
                throw ValidationError("input document: unknown step key \"" + it.key() + "\"");
            }
        }
        for (const char* key : {"L", "R", "Rbar"}) {
            if (!step.contains(key)) {
                throw ValidationError(std::string("input document: step missing \"") + key + "\"");
            }
        }
        steps.emplace_back(parse_matrix(step["L"], "L"), parse_matrix(step["R"], "R"),
                           parse_matrix(step["Rbar"], "Rbar"));
    }
    const Index q = steps.front().q();
    for (const TimeStepSystem& sys : steps) {
        if (sys.q() != q) {
            throw ValidationError("input document: all steps must share one dimension");
        }
    }
    return steps;
}

LoadedInput load_input(const std::string& path) {
    if (path.empty()) {
        throw ValidationError("an input file is required (--input PATH)");
    }
    std::ifstream in(path);
    if (!in) {
        throw ValidationError("cannot open input file: " + path);
    }
    json doc;
    try {
        in >> doc;
    } catch (const json::parse_error& err) {
        throw ValidationError("input document: " + std::string(err.what()));
    }
    if (!doc.is_object()) {
        throw ValidationError("input document: top level must be an object");
    }

    LoadedInput input;
    if (doc.contains("steps")) {
        input.steps = parse_raw_steps(doc);
    } else {
        input.lattice = parse_lattice(doc);
        if (input.lattice->num_slices() < 2) {
            throw ValidationError("lattice document: need >= 2 slices to build steps");
        }
        input.steps = split_into_steps(*input.lattice);
    }
    return input;
}

Vector parse_csv(const std::string& text, const std::string& what) {
    std::vector<double> values;
    std::stringstream stream(text);
    std::string token;
    while (std::getline(stream, token, ',')) {
        try {
            std::size_t used = 0;
            values.push_back(std::stod(token, &used));
            while (used < token.size() && std::isspace(static_cast<unsigned char>(token[used]))) {
                ++used;
            }
            if (used != token.size()) throw std::invalid_argument(token);
        } catch (const std::exception&) {
            throw ValidationError(what + ": cannot parse number \"" + token + "\"");
        }
    }
    Vector v(static_cast<Index>(values.size()));
    for (std::size_t i = 0; i < values.size(); ++i) v(static_cast<Index>(i)) = values[i];
    return v;
}

// One lambda vector per step: explicit CSV segments (";"-separated), then
// seeded random values, then zeros.
std::vector<Vector> make_lambdas(const CliConfig& config, const std::vector<EvolutionMove>& moves) {
    std::vector<std::string> segments;
    if (!config.lambda_csv.empty()) {
        std::stringstream stream(config.lambda_csv);
        std::string segment;
        while (std::getline(stream, segment, ';')) segments.push_back(segment);
        if (segments.size() > moves.size()) {
            throw ValidationError("--lambda: more segments than steps");
        }
    }

    Rng rng(config.seed);
    std::vector<Vector> lambdas;
    for (std::size_t n = 0; n < moves.size(); ++n) {
        const Index want = moves[n].free_dim;
        if (n < segments.size() && !segments[n].empty()) {
            Vector v = parse_csv(segments[n], "--lambda");
            if (v.size() != want) {
                throw ValidationError("--lambda: step " + std::to_string(n) + " expects " +
                                      std::to_string(want) + " values");
            }
            lambdas.push_back(std::move(v));
        } else if (config.seed_given) {
            lambdas.push_back(random_vector(rng, want, -1.0, 1.0));
        } else {
            lambdas.push_back(Vector::Zero(want));
        }
    }
    return lambdas;
}

// ---------------------------------------------------------------------------
// output helpers

void print_matrix(std::ostream& out, const Matrix& m, const std::string& indent) {
    char buffer[32];
    for (Index i = 0; i < m.rows(); ++i) {
        out << indent << "[";
        for (Index j = 0; j < m.cols(); ++j) {
            std::snprintf(buffer, sizeof(buffer), "%.6g", m(i, j));
            out << (j > 0 ? ", " : "") << buffer;
        }
        out << "]\n";
    }
}

void print_vector(std::ostream& out, const Vector& v) {
    char buffer[32];
    out << "[";
    for (Index i = 0; i < v.size(); ++i) {
        std::snprintf(buffer, sizeof(buffer), "%.6g", v(i));
        out << (i > 0 ? ", " : "") << buffer;
    }
    out << "]";
}

JsonValue envelope(const std::string& command, const std::string& status, JsonValue data) {
    JsonValue doc = JsonValue::object();
    doc.set("command", JsonValue::string(command));
    doc.set("status", JsonValue::string(status));
    doc.set("data", std::move(data));
    return doc;
}

int emit_validation_error(const std::string& command, const CliConfig& config,
                          const std::string& message, std::ostream& out, std::ostream& err) {
    err << "error: " << message << "\n";
    if (config.machine) {
        JsonValue data = JsonValue::object();
        data.set("error", JsonValue::string("validation"));
        data.set("message", JsonValue::string(message));
        out << envelope(command, "error", std::move(data)).dump() << "\n";
    }
    return kExitValidation;
}

// ---------------------------------------------------------------------------
// build

int cmd_build(const CliConfig& config, std::ostream& out, std::ostream& err) {
    const LoadedInput input = load_input(config.input_path);
    const Index q = input.steps.front().q();

    std::vector<EvolutionMove> moves;
    for (const TimeStepSystem& sys : input.steps) moves.push_back(build_move(sys, config.rel_tol));

    if (config.machine) {
        JsonValue data = JsonValue::object();
        data.set("source", JsonValue::string(input.lattice ? "lattice" : "raw"));
        data.set("q", JsonValue::integer(q));
        data.set("num_steps", JsonValue::integer(static_cast<std::int64_t>(input.steps.size())));
        if (input.lattice) {
            data.set("num_slices", JsonValue::integer(input.lattice->num_slices()));
            data.set("dynamical_matrix",
                     JsonValue::from_matrix(build_dynamical_matrix(*input.lattice).k));
        }
        JsonValue steps = JsonValue::array();
        for (std::size_t n = 0; n < input.steps.size(); ++n) {
            const TimeStepSystem& sys = input.steps[n];
            const EvolutionMove& move = moves[n];
            JsonValue step = JsonValue::object();
            step.set("index", JsonValue::integer(static_cast<std::int64_t>(n)));
            step.set("L", JsonValue::from_matrix(sys.l()));
            step.set("R", JsonValue::from_matrix(sys.r()));
            step.set("Rbar", JsonValue::from_matrix(sys.rbar()));
            step.set("rank", JsonValue::integer(move.rank));
            step.set("free_dim", JsonValue::integer(move.free_dim));
            step.set("C", JsonValue::from_matrix(move.c));
            step.set("Cbar_next", JsonValue::from_matrix(move.cbar_next));
            step.set("E", JsonValue::from_matrix(move.e));
            step.set("F", JsonValue::from_matrix(move.f));
            steps.push(std::move(step));
        }
        data.set("steps", std::move(steps));
        out << envelope("build", "ok", std::move(data)).dump() << "\n";
        return kExitOk;
    }

    out << "input: " << config.input_path << " (" << (input.lattice ? "lattice" : "raw")
        << ", q=" << q << ", steps=" << input.steps.size() << ")\n";
    if (input.lattice) {
        out << "dynamical matrix K:\n";
        print_matrix(out, build_dynamical_matrix(*input.lattice).k, "  ");
    }
    for (std::size_t n = 0; n < input.steps.size(); ++n) {
        const EvolutionMove& move = moves[n];
        out << "step " << n << ": rank=" << move.rank << " free=" << move.free_dim << "\n";
        out << " L:\n";
        print_matrix(out, input.steps[n].l(), "  ");
        out << " R:\n";
        print_matrix(out, input.steps[n].r(), "  ");
        out << " Rbar:\n";
        print_matrix(out, input.steps[n].rbar(), "  ");
        out << " pre-constraint C:\n";
        print_matrix(out, move.c, "  ");
        out << " post-constraint Cbar:\n";
        print_matrix(out, move.cbar_next, "  ");
        out << " E:\n";
        print_matrix(out, move.e, "  ");
        if (move.free_dim > 0) {
            out << " F:\n";
            print_matrix(out, move.f, "  ");
        }
    }
    return kExitOk;
}

// ---------------------------------------------------------------------------
// evolve

JsonValue trajectory_to_json(const TrajectoryResult& result,
                             const std::vector<EvolutionMove>& moves,
                             const std::vector<AdaptedFrame>& frames) {
    JsonValue slices = JsonValue::array();
    const auto& states = result.trajectory.states;
    for (std::size_t n = 0; n < states.size(); ++n) {
        JsonValue slice = JsonValue::object();
        slice.set("slice", JsonValue::integer(static_cast<std::int64_t>(n)));
        slice.set("x", JsonValue::from_vector(states[n].x));
        slice.set("p", JsonValue::from_vector(states[n].p));
        if (n < moves.size()) {
            slice.set("pre_constraint_residual",
                      JsonValue::from_vector(pre_constraint_residual(moves[n], states[n])));
            slice.set("adapted_pre",
                      JsonValue::from_vector(to_adapted(frames[n], states[n], SliceSide::Pre)));
        }
        if (n > 0) {
            slice.set("adapted_post", JsonValue::from_vector(to_adapted(
                                          frames[n - 1], states[n], SliceSide::Post)));
        }
        slices.push(std::move(slice));
    }
    return slices;
}

int cmd_evolve(const CliConfig& config, std::ostream& out, std::ostream& err) {
    const LoadedInput input = load_input(config.input_path);
    const Index q = input.steps.front().q();

    if (config.y0_csv.empty()) {
        throw ValidationError("evolve requires --y0");
    }
    const Vector y0_flat = parse_csv(config.y0_csv, "--y0");
    if (y0_flat.size() != 2 * q) {
        throw ValidationError("--y0: expected " + std::to_string(2 * q) + " values");
    }
    const PhaseVector y0 = PhaseVector::from_flat(y0_flat);

    std::vector<EvolutionMove> moves;
    std::vector<AdaptedFrame> frames;
    for (const TimeStepSystem& sys : input.steps) {
        moves.push_back(build_move(sys, config.rel_tol));
        frames.push_back(build_frame(sys, config.rel_tol));
    }
    const std::vector<Vector> lambdas = make_lambdas(config, moves);

    PhaseVector start = y0;
    if (config.project) start = project_onto_constraint(moves.front(), y0);
    const TrajectoryResult result =
        run_trajectory(moves, start, lambdas, config.constraint_tol);

    // Optional companion vector for symplectic products along the run.
    std::optional<TrajectoryResult> companion;
    if (!config.companion_csv.empty()) {
        const Vector companion_flat = parse_csv(config.companion_csv, "--companion");
        if (companion_flat.size() != 2 * q) {
            throw ValidationError("--companion: expected " + std::to_string(2 * q) + " values");
        }
        CliConfig companion_config = config;
        companion_config.lambda_csv.clear();
        companion = run_trajectory(moves, PhaseVector::from_flat(companion_flat),
                                   make_lambdas(companion_config, moves), config.constraint_tol);
    }

    if (config.machine) {
        JsonValue data = JsonValue::object();
        data.set("q", JsonValue::integer(q));
        data.set("num_steps", JsonValue::integer(static_cast<std::int64_t>(moves.size())));
        data.set("slices", trajectory_to_json(result, moves, frames));
        JsonValue lambda_json = JsonValue::array();
        for (const Vector& l : result.trajectory.lambdas) {
            lambda_json.push(JsonValue::from_vector(l));
        }
        data.set("lambdas", std::move(lambda_json));
        if (companion) {
            data.set("companion_slices", trajectory_to_json(*companion, moves, frames));
            JsonValue products = JsonValue::array();
            const std::size_t shared =
                std::min(result.trajectory.states.size(), companion->trajectory.states.size());
            for (std::size_t n = 0; n < shared; ++n) {
                products.push(JsonValue::number(symplectic_product(
                    result.trajectory.states[n], companion->trajectory.states[n])));
            }
            data.set("symplectic_products", std::move(products));
        }
        if (!result.ok()) {
            const ConstraintRejection& rejection = *result.rejection;
            JsonValue info = JsonValue::object();
            info.set("slice", JsonValue::integer(rejection.slice));
            info.set("residual_norm", JsonValue::number(rejection.residual_norm));
            info.set("residual", JsonValue::from_vector(rejection.residual));
            JsonValue rows = JsonValue::array();
            for (Index row : rejection.violating_rows) rows.push(JsonValue::integer(row));
            info.set("violating_rows", std::move(rows));
            data.set("rejection", std::move(info));
            out << envelope("evolve", "error", std::move(data)).dump() << "\n";
            err << "error: pre-constraint rejected the state at slice " << rejection.slice
                << " (residual " << format_number(rejection.residual_norm) << ")\n";
            return kExitConstraint;
        }
        out << envelope("evolve", "ok", std::move(data)).dump() << "\n";
        return kExitOk;
    }

    for (std::size_t n = 0; n < result.trajectory.states.size(); ++n) {
        const PhaseVector& state = result.trajectory.states[n];
        out << "slice " << n << ":\n  x = ";
        print_vector(out, state.x);
        out << "\n  p = ";
        print_vector(out, state.p);
        out << "\n";
        if (n < moves.size()) {
            out << "  adapted(pre) = ";
            print_vector(out, to_adapted(frames[n], state, SliceSide::Pre));
            out << "\n";
        }
        if (n > 0) {
            out << "  adapted(post) = ";
            print_vector(out, to_adapted(frames[n - 1], state, SliceSide::Post));
            out << "\n";
        }
        if (companion && n < companion->trajectory.states.size()) {
            out << "  omega(y, companion) = "
                << format_number(
                       symplectic_product(state, companion->trajectory.states[n]))
                << "\n";
        }
    }
    if (!result.ok()) {
        err << "error: pre-constraint rejected the state at slice " << result.rejection->slice
            << " (residual " << format_number(result.rejection->residual_norm) << ")\n";
        return kExitConstraint;
    }
    return kExitOk;
}

// ---------------------------------------------------------------------------
// analyze

int cmd_analyze(const CliConfig& config, std::ostream& out, std::ostream& err) {
    const LoadedInput input = load_input(config.input_path);
    const SolutionSpace sol = solution_space(input.steps, config.rel_tol);

    struct SliceDims {
        Index dim_d, dim_n, dim_ddot;
    };
    std::vector<SliceDims> dims;
    for (int n = 0; n <= sol.t; ++n) {
        const SubspaceBasis d = constraint_space(sol, n, config.rel_tol);
        const NullSplit split = null_and_representative(d, sol.q);
        dims.push_back({d.dim(), split.null_space.dim(), split.representative.dim()});
    }

    if (config.machine) {
        JsonValue data = JsonValue::object();
        data.set("q", JsonValue::integer(sol.q));
        data.set("t", JsonValue::integer(sol.t));
        data.set("param_dim", JsonValue::integer(sol.param_dim));
        data.set("solution_dim", JsonValue::integer(sol.kernel.dim()));
        JsonValue slices = JsonValue::array();
        for (int n = 0; n <= sol.t; ++n) {
            JsonValue slice = JsonValue::object();
            slice.set("slice", JsonValue::integer(n));
            slice.set("dim_D", JsonValue::integer(dims[n].dim_d));
            slice.set("dim_N", JsonValue::integer(dims[n].dim_n));
            slice.set("dim_Ddot", JsonValue::integer(dims[n].dim_ddot));
            slices.push(std::move(slice));
        }
        data.set("slices", std::move(slices));
        out << envelope("analyze", "ok", std::move(data)).dump() << "\n";
        return kExitOk;
    }

    (void)err;
    out << "q = " << sol.q << ", steps = " << sol.t << "\n";
    out << "parameter dimension = " << sol.param_dim
        << ", solution dimension = " << sol.kernel.dim() << "\n";
    for (int n = 0; n <= sol.t; ++n) {
        out << "slice " << n << ": dim D = " << dims[n].dim_d << ", dim N = " << dims[n].dim_n
            << ", dim Ddot = " << dims[n].dim_ddot << "\n";
    }
    return kExitOk;
}

// ---------------------------------------------------------------------------
// check

int cmd_check(const CliConfig& config, std::ostream& out, std::ostream& err) {
    if (config.iterations < 1) {
        throw ValidationError("--iterations must be >= 1");
    }

    CheckSummary summary = run_linalg_checks(config.seed + 1, config.iterations);
    if (!config.input_path.empty()) {
        const LoadedInput input = load_input(config.input_path);
        summary.append(run_move_checks(input.steps, config.seed + 2, config.iterations));
        if (input.lattice) {
            summary.append(run_lattice_checks(*input.lattice, config.seed + 3,
                                              std::max(1, config.iterations / 4)));
        }
        summary.append(run_chain_checks(input.steps, config.seed + 4,
                                        std::max(1, config.iterations / 4)));
    } else {
        summary.append(run_random_move_checks(config.seed + 2, config.iterations));
        summary.append(
            run_random_lattice_checks(config.seed + 3, std::max(1, config.iterations / 4)));
        summary.append(
            run_random_chain_checks(config.seed + 4, std::max(1, config.iterations / 4)));
    }

    if (config.machine) {
        JsonValue data = JsonValue::object();
        data.set("seed", JsonValue::integer(static_cast<std::int64_t>(config.seed)));
        data.set("iterations", JsonValue::integer(config.iterations));
        JsonValue checks = JsonValue::array();
        for (const CheckResult& r : summary.results) {
            JsonValue entry = JsonValue::object();
            entry.set("name", JsonValue::string(r.name));
            entry.set("trials", JsonValue::integer(r.trials));
            entry.set("worst_residual", JsonValue::number(r.worst));
            entry.set("tolerance", JsonValue::number(r.tolerance));
            entry.set("pass", JsonValue::boolean(r.pass));
            checks.push(std::move(entry));
        }
        data.set("checks", std::move(checks));
        data.set("all_pass", JsonValue::boolean(summary.all_pass()));
        out << envelope("check", summary.all_pass() ? "ok" : "error", std::move(data)).dump()
            << "\n";
    } else {
        for (const CheckResult& r : summary.results) {
            out << (r.pass ? "pass" : "FAIL") << "  " << r.name << "  (trials " << r.trials
                << ", worst " << format_number(r.worst) << ", tol " << format_number(r.tolerance)
                << ")\n";
        }
        out << (summary.all_pass() ? "all checks passed" : "some checks FAILED") << "\n";
    }
    if (!summary.all_pass()) {
        err << "error: invariant suite reported failures\n";
        return kExitCheckFailed;
    }
    return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"discrete-time canonical evolution of linear dynamical systems"};
    app.require_subcommand(1);

    CliConfig config;
    std::string command;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--input", config.input_path, "lattice or raw-matrix JSON file");
        cmd->add_option("--rel-tol", config.rel_tol, "relative rank tolerance")
            ->check(CLI::PositiveNumber);
        cmd->add_option("--constraint-tol", config.constraint_tol,
                        "constraint-surface tolerance")
            ->check(CLI::PositiveNumber);
        cmd->add_flag("--machine", config.machine, "emit a single JSON document");
    };

    CLI::App* build = app.add_subcommand("build", "report per-step evolution matrices");
    add_common(build);

    CLI::App* evolve = app.add_subcommand("evolve", "run a trajectory from initial data");
    add_common(evolve);
    evolve->add_option("--y0", config.y0_csv, "initial state, 2q comma-separated values");
    evolve->add_option("--lambda", config.lambda_csv,
                       "free parameters per step, ';'-separated CSV groups");
    evolve->add_option("--companion", config.companion_csv,
                       "second initial state for symplectic products");
    evolve->add_flag("--project", config.project,
                     "project the initial state onto the first constraint surface");
    auto* evolve_seed = evolve->add_option("--seed", config.seed, "seed for randomized lambdas");

    CLI::App* analyze = app.add_subcommand("analyze", "global solution-space dimensions");
    add_common(analyze);

    CLI::App* check = app.add_subcommand("check", "run the invariant suites");
    add_common(check);
    auto* check_seed = check->add_option("--seed", config.seed, "seed for randomized systems");
    check->add_option("--iterations", config.iterations, "trials per suite");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {  // --help
            out << app.help();
            return kExitOk;
        }
        err << "error: " << e.what() << "\n";
        return kExitValidation;
    }
    config.seed_given = evolve_seed->count() > 0 || check_seed->count() > 0;

    if (build->parsed()) command = "build";
    if (evolve->parsed()) command = "evolve";
    if (analyze->parsed()) command = "analyze";
    if (check->parsed()) command = "check";

    try {
        if (command == "build") return cmd_build(config, out, err);
        if (command == "evolve") return cmd_evolve(config, out, err);
        if (command == "analyze") return cmd_analyze(config, out, err);
        if (command == "check") return cmd_check(config, out, err);
        err << "error: no command given\n";
        return kExitValidation;
    } catch (const ValidationError& e) {
        return emit_validation_error(command, config, e.what(), out, err);
    } catch (const ConstraintError& e) {
        err << "error: " << e.what() << "\n";
        return kExitConstraint;
    }
}

}  // namespace dle
