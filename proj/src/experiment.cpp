#include "initlab/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include "initlab/convergence.hpp"
#include "initlab/io.hpp"
#include "initlab/svg_plot.hpp"

namespace initlab {

namespace {

namespace stdfs = std::filesystem;

std::string trim(const std::string& s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

/// Strips a trailing comment: '#' at the start or preceded by whitespace.
std::string strip_comment(const std::string& s) {
    for (std::size_t c = 0; c < s.size(); ++c) {
        if (s[c] == '#' &&
            (c == 0 || std::isspace(static_cast<unsigned char>(s[c - 1])))) {
            return s.substr(0, c);
        }
    }
    return s;
}

struct RawEntry {
    std::string value;
    int line = 0;
    bool used = false;
};

/// Every key the config format understands, as `section.key`.  Matched at
/// parse time so a typo is reported with its own line even when required
/// keys are also missing.
const char* const kKnownKeys[] = {
    "case.nx",      "case.ny",      "case.lx",     "case.ly",
    "case.shape",   "case.cx",      "case.cy",     "case.width",
    "case.height",  "case.radius",  "case.u_inf",  "case.rho",
    "case.nu",      "case.k_inf",   "case.l0",
    "solver.dt",    "solver.t_end", "solver.cfl_limit",
    "solver.poisson_tol", "solver.n_correctors", "solver.sample_every",
    "experiment.strategies",   "experiment.output_dir",
    "experiment.tol",          "experiment.seed",
    "experiment.seed_stride",  "experiment.idw_power",
    "experiment.idw_k",        "experiment.perturb_amp",
    "experiment.prior_path",   "experiment.prior_drop_k",
    "experiment.surrogate",    "experiment.k_lower",
    "experiment.k_upper",      "experiment.snapshot_final",
    "experiment.snapshot_time_average", "experiment.parallel",
};

bool is_known_key(const std::string& full) {
    for (const char* k : kKnownKeys) {
        if (full == k) return true;
    }
    return false;
}

/// Flat-section key = value store with typed, tracked access.
class ConfigReader {
  public:
    ConfigReader(const std::string& text, std::string filename)
        : file_(std::move(filename)) {
        std::istringstream in(text);
        std::string line;
        int lineno = 0;
        std::string section;
        while (std::getline(in, line)) {
            ++lineno;
            if (!line.empty() && line.back() == '\r') line.pop_back();
            line = trim(strip_comment(line));
            if (line.empty()) continue;
            if (line.front() == '[') {
                if (line.back() != ']') {
                    fail(lineno, "malformed section header '" + line + "'");
                }
                section = trim(line.substr(1, line.size() - 2));
                if (section != "case" && section != "solver" &&
                    section != "experiment") {
                    fail(lineno, "unknown section '" + section + "'");
                }
                continue;
            }
            const std::size_t eq = line.find('=');
            if (eq == std::string::npos) {
                fail(lineno, "expected 'key = value', got '" + line + "'");
            }
            const std::string key = trim(line.substr(0, eq));
            const std::string value = trim(line.substr(eq + 1));
            if (key.empty()) fail(lineno, "missing key before '='");
            if (section.empty()) {
                fail(lineno, "key '" + key + "' outside a section");
            }
            const std::string full = section + "." + key;
            if (!is_known_key(full)) {
                fail(lineno, "unknown key '" + key + "'");
            }
            if (entries_.count(full) != 0) {
                fail(lineno, "duplicate key '" + key + "' in [" + section + "]");
            }
            entries_[full] = RawEntry{value, lineno, false};
        }
    }

    [[noreturn]] void fail(int line, const std::string& msg) const {
        throw ConfigError(file_ + ": " + msg + " at line " +
                          std::to_string(line));
    }

    bool has(const std::string& full) const {
        return entries_.count(full) != 0;
    }

    const RawEntry* take(const std::string& full) {
        const auto it = entries_.find(full);
        if (it == entries_.end()) return nullptr;
        it->second.used = true;
        return &it->second;
    }

    std::string require_string(const std::string& full) {
        const RawEntry* e = take(full);
        if (e == nullptr) {
            throw ConfigError(file_ + ": missing required key '" + full + "'");
        }
        if (e->value.empty()) {
            fail(e->line, "empty value for '" + full + "'");
        }
        return e->value;
    }

    std::string string_or(const std::string& full, const std::string& dflt) {
        const RawEntry* e = take(full);
        return e == nullptr ? dflt : e->value;
    }

    double parse_num(const RawEntry& e, const std::string& full) const {
        try {
            std::size_t used = 0;
            const double v = std::stod(e.value, &used);
            if (used != e.value.size()) throw std::invalid_argument(e.value);
            return v;
        } catch (const std::exception&) {
            fail(e.line, "expected a number for '" + full + "', got '" +
                             e.value + "'");
        }
    }

    double require_double(const std::string& full) {
        const RawEntry* e = take(full);
        if (e == nullptr) {
            throw ConfigError(file_ + ": missing required key '" + full + "'");
        }
        return parse_num(*e, full);
    }

    double double_or(const std::string& full, double dflt) {
        const RawEntry* e = take(full);
        return e == nullptr ? dflt : parse_num(*e, full);
    }

    long int_or(const std::string& full, long dflt) {
        const RawEntry* e = take(full);
        if (e == nullptr) return dflt;
        const double v = parse_num(*e, full);
        const long r = static_cast<long>(v);
        if (static_cast<double>(r) != v) {
            fail(e->line, "expected an integer for '" + full + "'");
        }
        return r;
    }

    long require_int(const std::string& full) {
        const RawEntry* e = take(full);
        if (e == nullptr) {
            throw ConfigError(file_ + ": missing required key '" + full + "'");
        }
        const double v = parse_num(*e, full);
        const long r = static_cast<long>(v);
        if (static_cast<double>(r) != v) {
            fail(e->line, "expected an integer for '" + full + "'");
        }
        return r;
    }

    bool bool_or(const std::string& full, bool dflt) {
        const RawEntry* e = take(full);
        if (e == nullptr) return dflt;
        if (e->value == "true") return true;
        if (e->value == "false") return false;
        fail(e->line, "expected true/false for '" + full + "', got '" +
                          e->value + "'");
    }

    std::vector<std::string> list_or(const std::string& full) {
        const RawEntry* e = take(full);
        std::vector<std::string> out;
        if (e == nullptr) return out;
        std::string item;
        std::istringstream ls(e->value);
        while (std::getline(ls, item, ',')) {
            item = trim(item);
            if (!item.empty()) out.push_back(item);
        }
        return out;
    }

    int line_of(const std::string& full) const {
        const auto it = entries_.find(full);
        return it == entries_.end() ? 0 : it->second.line;
    }

    /// Every key must have been consumed.  Keys that survive to here are
    /// schema-valid but inapplicable, like `radius` with a rect shape.
    void reject_unused() const {
        const RawEntry* worst = nullptr;
        std::string worst_key;
        for (const auto& [full, e] : entries_) {
            if (e.used) continue;
            if (worst == nullptr || e.line < worst->line) {
                worst = &e;
                worst_key = full.substr(full.find('.') + 1);
            }
        }
        if (worst != nullptr) {
            fail(worst->line,
                 "key '" + worst_key + "' does not apply to this configuration");
        }
    }

    const std::string& file() const { return file_; }

  private:
    std::map<std::string, RawEntry> entries_;
    std::string file_;
};

void write_text(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError(path + ": cannot open for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw IoError(path + ": write failed");
}

std::string fmt6(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
}

struct ObstacleBounds {
    double x0 = 0.0, x1 = 0.0, y0 = 0.0, y1 = 0.0;
    bool any = false;
};

ObstacleBounds obstacle_bounds(const Grid& grid, const ObstacleMask& mask) {
    int i0 = mask.nx, i1 = -1, j0 = mask.ny, j1 = -1;
    for (int j = 0; j < mask.ny; ++j) {
        for (int i = 0; i < mask.nx; ++i) {
            if (!mask.is_solid(i, j)) continue;
            i0 = std::min(i0, i);
            i1 = std::max(i1, i);
            j0 = std::min(j0, j);
            j1 = std::max(j1, j);
        }
    }
    ObstacleBounds b;
    if (i1 < 0) return b;
    b.any = true;
    b.x0 = i0 * grid.dx;
    b.x1 = (i1 + 1) * grid.dx;
    b.y0 = j0 * grid.dy;
    b.y1 = (j1 + 1) * grid.dy;
    return b;
}

/// Gaussian lateral kick centered half an obstacle length downstream; the
/// same field for every strategy, so all runs break symmetry identically.
void apply_perturbation(FlowState& state, const Grid& grid,
                        const ObstacleMask& mask,
                        const FreestreamConditions& fs, double amp) {
    const ObstacleBounds b = obstacle_bounds(grid, mask);
    if (!b.any) return;
    const double length = std::max(b.x1 - b.x0, b.y1 - b.y0);
    const double xp = b.x1 + 0.5 * length;
    const double yp = 0.5 * (b.y0 + b.y1);
    const double sigma = 0.25 * length;
    const double inv2s2 = 1.0 / (2.0 * sigma * sigma);
    for (int j = 0; j <= grid.spec.ny; ++j) {
        const double y = grid.y_face(j);
        for (int i = 0; i < grid.spec.nx; ++i) {
            const double x = grid.x_center(i);
            const double r2 =
                (x - xp) * (x - xp) + (y - yp) * (y - yp);
            state.v(i, j) += amp * fs.u_inf * std::exp(-r2 * inv2s2);
        }
    }
    apply_boundary_conditions(grid, mask, fs, state);
}

std::string csv_cell(bool ok, double v) {
    return ok ? format_double(v) : std::string();
}

void write_comparison_files(const ExperimentConfig& cfg,
                            const ComparisonTable& table) {
    // Machine table: deterministic columns only, so identical configs
    // reproduce it byte-for-byte.  Wall-clock columns live in the aligned
    // text table and timings.csv.
    std::string csv = "strategy,status,t_conv_s,t_conv_ctu,final_filtered_force\n";
    for (const StrategyResult& r : table.rows) {
        csv += r.name;
        csv += r.ok ? ",ok," : ",failed,";
        csv += csv_cell(r.ok, r.t_conv) + ",";
        csv += csv_cell(r.ok, r.t_conv_ctu) + ",";
        csv += csv_cell(r.ok, r.final_filtered) + "\n";
    }
    write_text(cfg.output_dir + "/comparison.csv", csv);

    std::string tim = "strategy,init_seconds,solve_seconds_to_conv,"
                      "solve_seconds_total\n";
    for (const StrategyResult& r : table.rows) {
        tim += r.name + "," + format_double(r.init_seconds) + "," +
               csv_cell(r.ok, r.solve_seconds_to_conv) + "," +
               format_double(r.solve_seconds_total) + "\n";
    }
    write_text(cfg.output_dir + "/timings.csv", tim);

    const std::vector<std::string> head = {
        "strategy",   "status",        "init_s",        "t_conv_s",
        "t_conv_ctu", "solve_s_conv",  "final_filtered", "error"};
    std::vector<std::vector<std::string>> cells;
    cells.push_back(head);
    for (const StrategyResult& r : table.rows) {
        std::vector<std::string> row;
        row.push_back(r.name);
        row.push_back(r.ok ? "ok" : "failed");
        row.push_back(fmt6(r.init_seconds));
        row.push_back(r.ok ? fmt6(r.t_conv) : "-");
        row.push_back(r.ok ? fmt6(r.t_conv_ctu) : "-");
        row.push_back(r.ok ? fmt6(r.solve_seconds_to_conv) : "-");
        row.push_back(r.ok ? fmt6(r.final_filtered) : "-");
        row.push_back(r.ok ? "" : r.error);
        cells.push_back(row);
    }
    std::vector<std::size_t> width(head.size(), 0);
    for (const auto& row : cells) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            width[c] = std::max(width[c], row[c].size());
        }
    }
    std::string txt;
    for (const auto& row : cells) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            txt += row[c];
            if (c + 1 < row.size()) {
                txt.append(width[c] - row[c].size() + 2, ' ');
            }
        }
        while (!txt.empty() && txt.back() == ' ') txt.pop_back();
        txt += '\n';
    }
    write_text(cfg.output_dir + "/comparison.txt", txt);
}

StrategyKind strategy_kind_from_name(const std::string& name,
                                     const ConfigReader& reader, int line) {
    if (name == "uniform") return StrategyKind::kUniform;
    if (name == "potential") return StrategyKind::kPotential;
    if (name == "prior") return StrategyKind::kPrior;
    if (name == "surrogate_uniform") return StrategyKind::kSurrogateUniform;
    if (name == "surrogate_idw") return StrategyKind::kSurrogateIdw;
    if (name == "surrogate_hybrid") return StrategyKind::kSurrogateHybrid;
    reader.fail(line, "unknown strategy '" + name + "'");
}

}  // namespace

bool ComparisonTable::all_ok() const {
    for (const StrategyResult& r : rows) {
        if (!r.ok) return false;
    }
    return !rows.empty();
}

const StrategyResult* ComparisonTable::find(const std::string& name) const {
    for (const StrategyResult& r : rows) {
        if (r.name == name) return &r;
    }
    return nullptr;
}

int thread_cap() {
    const char* env = std::getenv("INITLAB_THREADS");
    if (env != nullptr && *env != '\0') {
        try {
            const int v = std::stoi(env);
            if (v >= 1) return v;
        } catch (const std::exception&) {
        }
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

ExperimentConfig parse_config(const std::string& text,
                              const std::string& filename) {
    ConfigReader reader(text, filename);
    ExperimentConfig cfg;

    cfg.grid.nx = static_cast<int>(reader.require_int("case.nx"));
    cfg.grid.ny = static_cast<int>(reader.require_int("case.ny"));
    cfg.grid.lx = reader.require_double("case.lx");
    cfg.grid.ly = reader.require_double("case.ly");

    const std::string shape = reader.require_string("case.shape");
    const int shape_line = reader.line_of("case.shape");
    if (shape == "rect") {
        RectShape r;
        r.cx = reader.require_double("case.cx");
        r.cy = reader.require_double("case.cy");
        r.width = reader.require_double("case.width");
        r.height = reader.require_double("case.height");
        cfg.shape = r;
    } else if (shape == "circle") {
        CircleShape c;
        c.cx = reader.require_double("case.cx");
        c.cy = reader.require_double("case.cy");
        c.radius = reader.require_double("case.radius");
        cfg.shape = c;
    } else {
        reader.fail(shape_line, "shape must be 'rect' or 'circle', got '" +
                                    shape + "'");
    }

    cfg.fs.u_inf = reader.require_double("case.u_inf");
    cfg.fs.rho = reader.require_double("case.rho");
    cfg.fs.nu = reader.require_double("case.nu");
    cfg.fs.k_inf = reader.require_double("case.k_inf");
    cfg.fs.l0 = reader.require_double("case.l0");

    cfg.solver.dt = reader.require_double("solver.dt");
    cfg.solver.t_end = reader.require_double("solver.t_end");
    cfg.solver.cfl_limit = reader.double_or("solver.cfl_limit", 0.9);
    cfg.solver.poisson_tol = reader.double_or("solver.poisson_tol", 1e-7);
    cfg.solver.n_correctors =
        static_cast<int>(reader.int_or("solver.n_correctors", 2));
    cfg.solver.sample_every =
        static_cast<int>(reader.int_or("solver.sample_every", 1));

    cfg.output_dir = reader.require_string("experiment.output_dir");
    cfg.tol = reader.double_or("experiment.tol", 0.01);
    cfg.seed = reader.int_or("experiment.seed", 0);
    cfg.seed_stride =
        static_cast<int>(reader.int_or("experiment.seed_stride", 4));
    cfg.idw.power = reader.double_or("experiment.idw_power", 2.0);
    cfg.idw.k_nearest = static_cast<int>(reader.int_or("experiment.idw_k", 8));
    cfg.perturb_amp = reader.double_or("experiment.perturb_amp", 0.0);
    cfg.snapshot_final = reader.bool_or("experiment.snapshot_final", false);
    cfg.snapshot_time_average =
        reader.bool_or("experiment.snapshot_time_average", false);
    cfg.parallel = reader.bool_or("experiment.parallel", false);

    const std::string prior_path =
        reader.string_or("experiment.prior_path", "");
    const bool prior_drop_k =
        reader.bool_or("experiment.prior_drop_k", false);

    const std::string surrogate =
        reader.string_or("experiment.surrogate", "proxy:4");
    const int surrogate_line = reader.line_of("experiment.surrogate");
    if (surrogate.rfind("proxy:", 0) == 0) {
        cfg.surrogate_from_file = false;
        const std::string num = surrogate.substr(6);
        try {
            std::size_t used = 0;
            cfg.surrogate_factor = std::stoi(num, &used);
            if (used != num.size()) throw std::invalid_argument(num);
        } catch (const std::exception&) {
            reader.fail(surrogate_line,
                        "surrogate proxy factor must be an integer, got '" +
                            num + "'");
        }
        if (cfg.surrogate_factor < 2) {
            reader.fail(surrogate_line, "surrogate proxy factor must be >= 2");
        }
    } else if (surrogate.rfind("file:", 0) == 0) {
        cfg.surrogate_from_file = true;
        cfg.surrogate_path = surrogate.substr(5);
        if (cfg.surrogate_path.empty()) {
            reader.fail(surrogate_line, "surrogate file path is empty");
        }
    } else {
        reader.fail(surrogate_line == 0 ? 1 : surrogate_line,
                    "surrogate must be 'proxy:<factor>' or 'file:<path>'");
    }

    const bool has_lower = reader.has("experiment.k_lower");
    const bool has_upper = reader.has("experiment.k_upper");
    if (has_lower != has_upper) {
        throw ConfigError(reader.file() +
                          ": k_lower and k_upper must be set together");
    }
    if (has_lower) {
        BlendParams bp;
        bp.k_inf = cfg.fs.k_inf;
        bp.k_lower = reader.require_double("experiment.k_lower");
        bp.k_upper = reader.require_double("experiment.k_upper");
        validate_blend(bp);
        cfg.blend = bp;
    }

    const std::vector<std::string> names =
        reader.list_or("experiment.strategies");
    const int strategies_line = reader.line_of("experiment.strategies");
    if (names.empty()) {
        throw ConfigError(reader.file() +
                          ": experiment.strategies must list at least one "
                          "strategy");
    }
    for (const std::string& name : names) {
        InitStrategy strat;
        strat.kind = strategy_kind_from_name(name, reader, strategies_line);
        strat.prior_path = prior_path;
        strat.prior_drop_k = prior_drop_k;
        strat.blend = cfg.blend;
        strat.seed_stride = cfg.seed_stride;
        for (const InitStrategy& existing : cfg.strategies) {
            if (existing.kind == strat.kind) {
                reader.fail(strategies_line,
                            "duplicate strategy '" + name + "'");
            }
        }
        if (strat.kind == StrategyKind::kPrior && prior_path.empty()) {
            throw ConfigError(reader.file() +
                              ": strategy 'prior' needs experiment.prior_path");
        }
        cfg.strategies.push_back(strat);
    }

    reader.reject_unused();

    // Numeric invariants (the constructors own the detailed messages).
    make_grid(cfg.grid);
    validate_freestream(cfg.fs);
    validate_solver_config(cfg.solver);
    if (!(cfg.tol > 0.0)) {
        throw ConfigError(reader.file() + ": experiment.tol must be positive");
    }
    if (cfg.seed_stride < 1) {
        throw ConfigError(reader.file() +
                          ": experiment.seed_stride must be >= 1");
    }
    if (!(cfg.idw.power > 0.0)) {
        throw ConfigError(reader.file() +
                          ": experiment.idw_power must be positive");
    }
    if (cfg.idw.k_nearest < 1) {
        throw ConfigError(reader.file() + ": experiment.idw_k must be >= 1");
    }
    if (!std::isfinite(cfg.perturb_amp) || cfg.perturb_amp < 0.0) {
        throw ConfigError(reader.file() +
                          ": experiment.perturb_amp must be finite and >= 0");
    }
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError(path + ": cannot open config file");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path);
}

ComparisonTable run_experiment(const ExperimentConfig& cfg) {
    const Grid grid = make_grid(cfg.grid);
    const ObstacleMask mask = rasterize_obstacle(grid, cfg.shape);
    validate_freestream(cfg.fs);
    validate_solver_config(cfg.solver);
    if (cfg.strategies.empty()) {
        throw ConfigError("run_experiment: no strategies requested");
    }
    if (cfg.output_dir.empty()) {
        throw ConfigError("run_experiment: output_dir is empty");
    }
    std::error_code ec;
    stdfs::create_directories(cfg.output_dir, ec);
    if (ec) {
        throw IoError(cfg.output_dir + ": cannot create output directory (" +
                      ec.message() + ")");
    }

    bool needs_surrogate = false;
    for (const InitStrategy& s : cfg.strategies) {
        needs_surrogate = needs_surrogate || strategy_needs_surrogate(s.kind);
    }
    std::optional<SurrogateData> surrogate;
    std::string surrogate_error;
    if (needs_surrogate) {
        try {
            if (cfg.surrogate_from_file) {
                surrogate = read_surrogate(cfg.surrogate_path);
                validate_surrogate(*surrogate);
            } else {
                surrogate = build_proxy_surrogate(grid, mask, cfg.fs,
                                                  cfg.surrogate_factor);
            }
        } catch (const std::exception& e) {
            surrogate_error = e.what();
        }
    }

    ComparisonTable table;
    table.rows.resize(cfg.strategies.size());

    const auto run_one = [&](std::size_t si) {
        const InitStrategy& strat = cfg.strategies[si];
        StrategyResult row;
        row.name = strategy_name(strat.kind);
        const std::string dir = cfg.output_dir + "/" + row.name;
        std::error_code dir_ec;
        stdfs::create_directories(dir, dir_ec);
        try {
            if (dir_ec) {
                throw IoError(dir + ": cannot create strategy directory (" +
                              dir_ec.message() + ")");
            }
            if (strategy_needs_surrogate(strat.kind) && !surrogate) {
                throw std::runtime_error("surrogate unavailable: " +
                                         surrogate_error);
            }
            const auto t_init = std::chrono::steady_clock::now();
            FlowState init =
                make_initial_state(strat, grid, mask, cfg.fs,
                                   surrogate ? &*surrogate : nullptr);
            if (cfg.perturb_amp != 0.0) {
                apply_perturbation(init, grid, mask, cfg.fs, cfg.perturb_amp);
            }
            row.init_seconds = seconds_since(t_init);

            TransientSolver solver(grid, mask, cfg.fs, cfg.solver);
            std::vector<double> clock_at_sample;
            RunOptions opts;
            const auto t_solve = std::chrono::steady_clock::now();
            opts.on_sample = [&](const ForceSample&) {
                clock_at_sample.push_back(seconds_since(t_solve));
            };
            if (cfg.snapshot_time_average) {
                opts.time_average_start = (2.0 / 3.0) * cfg.solver.t_end;
            }
            RunResult rr = solver.run(std::move(init), opts);
            row.solve_seconds_total = seconds_since(t_solve);

            std::vector<double> t, fx;
            t.reserve(rr.series.samples.size());
            fx.reserve(rr.series.samples.size());
            for (const ForceSample& s : rr.series.samples) {
                t.push_back(s.t);
                fx.push_back(s.fx);
            }
            const std::vector<double> filtered = running_median(fx);
            write_force_csv(dir + "/force.csv", rr.series);
            write_filtered_csv(dir + "/filtered.csv", rr.series, filtered);

            const ConvergenceReport rep =
                convergence_time(t, fx, filtered, cfg.tol);
            row.t_conv = rep.t_conv;
            row.t_conv_ctu = to_ctu(rep.t_conv, cfg.fs);
            row.final_filtered = rep.final_value;
            row.solve_seconds_to_conv = clock_at_sample.at(rep.index);

            if (cfg.snapshot_final) {
                write_snapshot(dir + "/final.vtk", grid, rr.final_state,
                               cfg.fs);
            }
            if (cfg.snapshot_time_average && rr.time_average) {
                write_snapshot(dir + "/time_average.vtk", grid,
                               *rr.time_average, cfg.fs);
            }
            row.ok = true;
        } catch (const std::exception& e) {
            row.ok = false;
            row.error = e.what();
            try {
                write_text(dir + "/error.txt", row.error + "\n");
            } catch (const std::exception&) {
                // The table still records the failure.
            }
        }
        table.rows[si] = row;
    };

    const int cap = thread_cap();
    const std::size_t n = cfg.strategies.size();
    if (cfg.parallel && cap > 1 && n > 1) {
        std::atomic<std::size_t> next{0};
        const auto worker = [&]() {
            while (true) {
                const std::size_t si = next.fetch_add(1);
                if (si >= n) break;
                run_one(si);
            }
        };
        const int workers =
            std::min<int>(cap, static_cast<int>(n));
        std::vector<std::thread> threads;
        threads.reserve(static_cast<std::size_t>(workers) - 1);
        for (int w = 1; w < workers; ++w) threads.emplace_back(worker);
        worker();
        for (std::thread& th : threads) th.join();
    } else {
        for (std::size_t si = 0; si < n; ++si) run_one(si);
    }

    write_comparison_files(cfg, table);
    try {
        emit_plots(cfg.output_dir);
    } catch (const std::exception& e) {
        try {
            write_text(cfg.output_dir + "/plot_warnings.log",
                       std::string(e.what()) + "\n");
        } catch (const std::exception&) {
        }
    }
    return table;
}

void emit_plots(const std::string& output_dir) {
    if (!stdfs::is_directory(output_dir)) {
        throw IoError(output_dir + ": not a directory");
    }
    std::vector<std::string> names;
    for (const auto& entry : stdfs::directory_iterator(output_dir)) {
        if (entry.is_directory()) {
            names.push_back(entry.path().filename().string());
        }
    }
    std::sort(names.begin(), names.end());

    std::vector<PlotSeries> raw_series;
    std::vector<PlotSeries> filt_series;
    std::vector<std::string> warnings;
    for (const std::string& name : names) {
        const std::string path = output_dir + "/" + name + "/filtered.csv";
        if (!stdfs::exists(path)) {
            warnings.push_back("missing series for '" + name + "': " + path);
            continue;
        }
        CsvTable tb;
        try {
            tb = read_csv(path);
        } catch (const std::exception& e) {
            warnings.push_back(std::string("unreadable series: ") + e.what());
            continue;
        }
        const int ct = tb.column("t");
        const int cfx = tb.column("fx");
        const int cfl = tb.column("filtered");
        if (ct < 0 || cfx < 0 || cfl < 0 || tb.columns[ct].empty()) {
            warnings.push_back("series lacks t/fx/filtered columns: " + path);
            continue;
        }
        const std::vector<double>& t = tb.columns[ct];
        const std::vector<double>& fx = tb.columns[cfx];
        const std::vector<double>& fl = tb.columns[cfl];

        std::optional<double> marker;
        try {
            marker = convergence_time(t, fx, fl, 0.01).t_conv;
        } catch (const std::exception&) {
            marker.reset();
        }
        raw_series.push_back(PlotSeries{name, t, fx, marker});
        filt_series.push_back(PlotSeries{name, t, fl, marker});
    }
    if (raw_series.empty()) {
        throw IoError(output_dir + ": no series found");
    }

    PlotOptions raw_opts;
    raw_opts.title = "Streamwise force on the obstacle";
    raw_opts.x_label = "t [s]";
    raw_opts.y_label = "fx [N/m]";
    write_text(output_dir + "/force_raw.svg",
               render_line_svg(raw_series, raw_opts));

    PlotOptions filt_opts;
    filt_opts.title = "Filtered streamwise force (running median)";
    filt_opts.x_label = "t [s]";
    filt_opts.y_label = "fx filtered [N/m]";
    write_text(output_dir + "/force_filtered.svg",
               render_line_svg(filt_series, filt_opts));

    if (!warnings.empty()) {
        std::string log;
        for (const std::string& warning : warnings) log += warning + "\n";
        write_text(output_dir + "/plot_warnings.log", log);
    }
}

}  // namespace initlab
