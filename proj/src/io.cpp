#include "initlab/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "initlab/solver.hpp"

namespace initlab {

namespace {

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError(path + ": cannot open for writing");
    }
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) {
        throw IoError(path + ": write failed");
    }
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError(path + ": cannot open for reading");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

double parse_double(const std::string& text, const std::string& where) {
    try {
        std::size_t used = 0;
        const double value = std::stod(text, &used);
        while (used < text.size() &&
               (text[used] == ' ' || text[used] == '\t' || text[used] == '\r')) {
            ++used;
        }
        if (used != text.size()) {
            throw IoError(where + ": trailing characters in number '" + text + "'");
        }
        return value;
    } catch (const std::invalid_argument&) {
        throw IoError(where + ": expected a number, got '" + text + "'");
    } catch (const std::out_of_range&) {
        throw IoError(where + ": number out of range '" + text + "'");
    }
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return out;
}

std::string strip_cr(std::string s) {
    if (!s.empty() && s.back() == '\r') s.pop_back();
    return s;
}

void append_rows(std::string& out, const Field2D& f) {
    for (int j = 0; j < f.ny(); ++j) {
        for (int i = 0; i < f.nx(); ++i) {
            if (i > 0) out += ' ';
            out += format_double(f(i, j));
        }
        out += '\n';
    }
}

/// Streams whitespace-separated tokens and tracks nothing else; snapshot
/// parse errors name the missing construct, not a line.
class TokenReader {
  public:
    TokenReader(const std::string& text, std::string path)
        : stream_(text), path_(std::move(path)) {}

    std::string next(const char* expected_what) {
        std::string tok;
        if (!(stream_ >> tok)) {
            throw IoError(path_ + ": truncated file, expected " +
                          std::string(expected_what));
        }
        return tok;
    }

    bool try_next(std::string& tok) { return static_cast<bool>(stream_ >> tok); }

    double next_double(const char* what) {
        return parse_double(next(what), path_);
    }

    long next_long(const char* what) {
        const std::string tok = next(what);
        try {
            std::size_t used = 0;
            const long v = std::stol(tok, &used);
            if (used != tok.size()) throw std::invalid_argument(tok);
            return v;
        } catch (const std::exception&) {
            throw IoError(path_ + ": expected an integer for " +
                          std::string(what) + ", got '" + tok + "'");
        }
    }

    void expect(const char* literal) {
        const std::string tok = next(literal);
        if (tok != literal) {
            throw IoError(path_ + ": expected '" + std::string(literal) +
                          "', got '" + tok + "'");
        }
    }

    const std::string& path() const { return path_; }

  private:
    std::istringstream stream_;
    std::string path_;
};

void read_values(TokenReader& tr, std::size_t n, std::vector<double>& out) {
    out.resize(n);
    for (std::size_t idx = 0; idx < n; ++idx) {
        out[idx] = tr.next_double("field value");
    }
}

Field2D resample_bilinear(const Field2D& src, double lx, double ly, int tnx,
                          int tny) {
    const double sdx = lx / src.nx();
    const double sdy = ly / src.ny();
    const double tdx = lx / tnx;
    const double tdy = ly / tny;
    Field2D out(tnx, tny);
    for (int j = 0; j < tny; ++j) {
        double fy = ((j + 0.5) * tdy) / sdy - 0.5;
        fy = std::min(std::max(fy, 0.0), static_cast<double>(src.ny() - 1));
        int j0 = std::min(static_cast<int>(fy), src.ny() - 2);
        if (src.ny() == 1) j0 = 0;
        const int j1 = std::min(j0 + 1, src.ny() - 1);
        const double wy = fy - j0;
        for (int i = 0; i < tnx; ++i) {
            double fx = ((i + 0.5) * tdx) / sdx - 0.5;
            fx = std::min(std::max(fx, 0.0), static_cast<double>(src.nx() - 1));
            int i0 = std::min(static_cast<int>(fx), src.nx() - 2);
            if (src.nx() == 1) i0 = 0;
            const int i1 = std::min(i0 + 1, src.nx() - 1);
            const double wx = fx - i0;
            out(i, j) = (1.0 - wy) * ((1.0 - wx) * src(i0, j0) + wx * src(i1, j0)) +
                        wy * ((1.0 - wx) * src(i0, j1) + wx * src(i1, j1));
        }
    }
    return out;
}

}  // namespace

std::string format_double(double x) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

// ---- force history CSV ------------------------------------------------------

void write_force_csv(const std::string& path, const ForceSeries& series) {
    std::string out = "t,fx,fy\n";
    for (const ForceSample& s : series.samples) {
        out += format_double(s.t);
        out += ',';
        out += format_double(s.fx);
        out += ',';
        out += format_double(s.fy);
        out += '\n';
    }
    write_file(path, out);
}

void write_filtered_csv(const std::string& path, const ForceSeries& series,
                        const std::vector<double>& filtered) {
    if (filtered.size() != series.samples.size()) {
        throw IoError(path + ": filtered column length does not match series");
    }
    std::string out = "t,fx,fy,filtered\n";
    for (std::size_t idx = 0; idx < series.samples.size(); ++idx) {
        const ForceSample& s = series.samples[idx];
        out += format_double(s.t);
        out += ',';
        out += format_double(s.fx);
        out += ',';
        out += format_double(s.fy);
        out += ',';
        out += format_double(filtered[idx]);
        out += '\n';
    }
    write_file(path, out);
}

ForceSeries read_force_csv(const std::string& path) {
    const std::string text = read_file(path);
    std::istringstream in(text);
    std::string line;
    int lineno = 0;

    if (!std::getline(in, line)) {
        throw IoError(path + ": empty file");
    }
    ++lineno;
    const std::vector<std::string> header = split_csv(strip_cr(line));
    if (header.size() < 3 || header[0] != "t" || header[1] != "fx" ||
        header[2] != "fy") {
        throw IoError(path + ":1: header must start with t,fx,fy");
    }

    ForceSeries series;
    while (std::getline(in, line)) {
        ++lineno;
        line = strip_cr(line);
        if (line.empty()) continue;
        const std::vector<std::string> cols = split_csv(line);
        if (cols.size() < 3) {
            throw IoError(path + ":" + std::to_string(lineno) +
                          ": expected at least 3 columns");
        }
        const std::string where = path + ":" + std::to_string(lineno);
        ForceSample s;
        s.t = parse_double(cols[0], where);
        s.fx = parse_double(cols[1], where);
        s.fy = parse_double(cols[2], where);
        series.samples.push_back(s);
    }
    if (series.samples.empty()) {
        throw IoError(path + ": no data rows");
    }
    return series;
}

int CsvTable::column(const std::string& name) const {
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (header[c] == name) return static_cast<int>(c);
    }
    return -1;
}

CsvTable read_csv(const std::string& path) {
    const std::string text = read_file(path);
    std::istringstream in(text);
    std::string line;
    int lineno = 0;

    if (!std::getline(in, line)) {
        throw IoError(path + ": empty file");
    }
    ++lineno;
    CsvTable table;
    table.header = split_csv(strip_cr(line));
    if (table.header.empty() || table.header[0].empty()) {
        throw IoError(path + ":1: missing header");
    }
    table.columns.resize(table.header.size());

    while (std::getline(in, line)) {
        ++lineno;
        line = strip_cr(line);
        if (line.empty()) continue;
        const std::vector<std::string> cols = split_csv(line);
        if (cols.size() != table.header.size()) {
            throw IoError(path + ":" + std::to_string(lineno) + ": expected " +
                          std::to_string(table.header.size()) +
                          " columns, got " + std::to_string(cols.size()));
        }
        const std::string where = path + ":" + std::to_string(lineno);
        for (std::size_t c = 0; c < cols.size(); ++c) {
            table.columns[c].push_back(parse_double(cols[c], where));
        }
    }
    return table;
}

// ---- flow snapshots ---------------------------------------------------------

void write_snapshot(const std::string& path, const Grid& grid,
                    const FlowState& state, const FreestreamConditions& fs) {
    const int nx = grid.spec.nx;
    const int ny = grid.spec.ny;
    const std::size_t n_cells = static_cast<std::size_t>(nx) * ny;

    Field2D uc(nx, ny);
    Field2D vc(nx, ny);
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            uc(i, j) = u_at_center(state.u, i, j);
            vc(i, j) = v_at_center(state.v, i, j);
        }
    }
    const Field2D p0 = total_pressure(grid, fs, state);

    std::string out;
    out.reserve(n_cells * 5 * 18 + 1024);
    out += "# vtk DataFile Version 3.0\n";
    out += "flow snapshot t=" + format_double(state.t) + "\n";
    out += "ASCII\n";
    out += "DATASET STRUCTURED_POINTS\n";
    out += "DIMENSIONS " + std::to_string(nx + 1) + " " + std::to_string(ny + 1) +
           " 1\n";
    out += "ORIGIN 0 0 0\n";
    out += "SPACING " + format_double(grid.dx) + " " + format_double(grid.dy) +
           " 1\n";
    out += "CELL_DATA " + std::to_string(n_cells) + "\n";

    const auto scalar = [&](const char* name, const Field2D& f) {
        out += "SCALARS ";
        out += name;
        out += " double 1\nLOOKUP_TABLE default\n";
        append_rows(out, f);
    };
    scalar("u", uc);
    scalar("v", vc);
    scalar("p", state.p);
    scalar("k", state.k);
    scalar("total_pressure", p0);

    out += "FIELD RestartData 3\n";
    out += "sim_time 1 1 double\n" + format_double(state.t) + "\n";
    out += "u_face 1 " +
           std::to_string(static_cast<std::size_t>(nx + 1) * ny) + " double\n";
    append_rows(out, state.u);
    out += "v_face 1 " +
           std::to_string(static_cast<std::size_t>(nx) * (ny + 1)) + " double\n";
    append_rows(out, state.v);

    write_file(path, out);

    std::string meta = std::to_string(nx) + " " + std::to_string(ny) + " " +
                       format_double(grid.spec.lx) + " " +
                       format_double(grid.spec.ly) + " " +
                       format_double(fs.u_inf) + " " + format_double(fs.rho) +
                       " " + format_double(fs.nu) + " " +
                       format_double(fs.k_inf) + " " + format_double(fs.l0) +
                       "\n";
    write_file(path + ".meta", meta);
}

Snapshot read_snapshot(const std::string& path) {
    const std::string text = read_file(path);
    if (text.rfind("# vtk DataFile", 0) != 0) {
        throw IoError(path + ": not a legacy VTK file (missing '# vtk DataFile')");
    }
    // Skip the two header lines (magic + title), then tokenize the rest.
    std::size_t pos = text.find('\n');
    if (pos != std::string::npos) pos = text.find('\n', pos + 1);
    if (pos == std::string::npos) {
        throw IoError(path + ": truncated header");
    }
    TokenReader tr(text.substr(pos + 1), path);

    std::string tok = tr.next("ASCII marker");
    if (tok == "BINARY") {
        throw IoError(path + ": binary VTK files are not supported");
    }
    if (tok != "ASCII") {
        throw IoError(path + ": expected ASCII marker, got '" + tok + "'");
    }
    tr.expect("DATASET");
    tok = tr.next("dataset type");
    if (tok != "STRUCTURED_POINTS") {
        throw IoError(path + ": unsupported dataset type '" + tok +
                      "' (need STRUCTURED_POINTS)");
    }

    Snapshot snap;
    double dx = 0.0;
    double dy = 0.0;
    bool have_dims = false;
    bool have_spacing = false;
    bool in_cell_data = false;
    std::unordered_map<std::string, std::vector<double>> scalars;
    std::vector<double> values;

    while (tr.try_next(tok)) {
        if (tok == "DIMENSIONS") {
            const long px = tr.next_long("x point count");
            const long py = tr.next_long("y point count");
            const long pz = tr.next_long("z point count");
            if (px < 2 || py < 2 || pz != 1) {
                throw IoError(path + ": need a 2D grid (px, py >= 2, pz == 1)");
            }
            snap.nx = static_cast<int>(px - 1);
            snap.ny = static_cast<int>(py - 1);
            have_dims = true;
        } else if (tok == "ORIGIN") {
            tr.next_double("origin x");
            tr.next_double("origin y");
            tr.next_double("origin z");
        } else if (tok == "SPACING") {
            dx = tr.next_double("spacing x");
            dy = tr.next_double("spacing y");
            tr.next_double("spacing z");
            have_spacing = true;
        } else if (tok == "CELL_DATA") {
            if (!have_dims) {
                throw IoError(path + ": CELL_DATA before DIMENSIONS");
            }
            const long n = tr.next_long("cell count");
            if (n != static_cast<long>(snap.nx) * snap.ny) {
                throw IoError(path + ": CELL_DATA count does not match grid");
            }
            in_cell_data = true;
        } else if (tok == "POINT_DATA") {
            throw IoError(path + ": point data snapshots are not supported "
                          "(need CELL_DATA)");
        } else if (tok == "SCALARS") {
            if (!in_cell_data) {
                throw IoError(path + ": SCALARS outside CELL_DATA");
            }
            const std::string name = tr.next("scalar name");
            tr.next("scalar type");
            std::string peek = tr.next("LOOKUP_TABLE or component count");
            if (peek != "LOOKUP_TABLE") {
                if (peek != "1") {
                    throw IoError(path + ": scalar '" + name +
                                  "' must have 1 component");
                }
                tr.expect("LOOKUP_TABLE");
            }
            tr.next("lookup table name");
            read_values(tr, static_cast<std::size_t>(snap.nx) * snap.ny, values);
            scalars[name] = values;
        } else if (tok == "FIELD") {
            tr.next("field data name");
            const long n_arrays = tr.next_long("field array count");
            for (long a = 0; a < n_arrays; ++a) {
                const std::string name = tr.next("field array name");
                const long nc = tr.next_long("component count");
                const long nt = tr.next_long("tuple count");
                tr.next("field array type");
                read_values(tr, static_cast<std::size_t>(nc) * nt, values);
                if (name == "sim_time" && !values.empty()) {
                    snap.sim_time = values[0];
                } else if (name == "u_face") {
                    if (nt != static_cast<long>(snap.nx + 1) * snap.ny) {
                        throw IoError(path + ": u_face tuple count mismatch");
                    }
                    snap.u_face = Field2D(snap.nx + 1, snap.ny);
                    snap.u_face.raw() = values;
                } else if (name == "v_face") {
                    if (nt != static_cast<long>(snap.nx) * (snap.ny + 1)) {
                        throw IoError(path + ": v_face tuple count mismatch");
                    }
                    snap.v_face = Field2D(snap.nx, snap.ny + 1);
                    snap.v_face.raw() = values;
                }
            }
        } else {
            throw IoError(path + ": unsupported construct '" + tok + "'");
        }
    }

    if (!have_dims || !have_spacing) {
        throw IoError(path + ": missing DIMENSIONS or SPACING");
    }
    snap.lx = dx * snap.nx;
    snap.ly = dy * snap.ny;
    snap.has_faces = snap.u_face.nx() > 0 && snap.v_face.nx() > 0;

    const auto take = [&](const char* name, Field2D& dst) {
        const auto it = scalars.find(name);
        if (it == scalars.end()) return false;
        dst = Field2D(snap.nx, snap.ny);
        dst.raw() = it->second;
        return true;
    };
    if (!take("u", snap.u_center) || !take("v", snap.v_center)) {
        throw IoError(path + ": snapshot must carry cell scalars 'u' and 'v'");
    }
    if (!take("p", snap.p)) {
        snap.p = Field2D(snap.nx, snap.ny, 0.0);
    }
    snap.has_k = take("k", snap.k);

    // Optional sidecar with grid and flow parameters.
    std::ifstream meta_in(path + ".meta");
    if (meta_in) {
        std::string meta_text((std::istreambuf_iterator<char>(meta_in)),
                              std::istreambuf_iterator<char>());
        TokenReader mt(meta_text, path + ".meta");
        const long mnx = mt.next_long("nx");
        const long mny = mt.next_long("ny");
        const double mlx = mt.next_double("lx");
        const double mly = mt.next_double("ly");
        if (mnx != snap.nx || mny != snap.ny) {
            throw IoError(path + ".meta: grid size disagrees with the snapshot");
        }
        snap.lx = mlx;
        snap.ly = mly;
        snap.meta_fs.u_inf = mt.next_double("u_inf");
        snap.meta_fs.rho = mt.next_double("rho");
        snap.meta_fs.nu = mt.next_double("nu");
        snap.meta_fs.k_inf = mt.next_double("k_inf");
        snap.meta_fs.l0 = mt.next_double("l0");
        snap.has_meta = true;
    }
    return snap;
}

FlowState snapshot_to_state(const Snapshot& snap, const Grid& target,
                            double default_k) {
    const int nx = target.spec.nx;
    const int ny = target.spec.ny;
    const double rel_x = std::abs(snap.lx - target.spec.lx) /
                         std::max(target.spec.lx, 1e-300);
    const double rel_y = std::abs(snap.ly - target.spec.ly) /
                         std::max(target.spec.ly, 1e-300);
    if (rel_x > 1e-9 || rel_y > 1e-9) {
        throw IoError("snapshot domain " + format_double(snap.lx) + " x " +
                      format_double(snap.ly) + " does not match target " +
                      format_double(target.spec.lx) + " x " +
                      format_double(target.spec.ly));
    }

    FlowState state = FlowState::zeros(target);
    state.t = snap.sim_time;

    if (snap.has_faces && snap.nx == nx && snap.ny == ny) {
        state.u = snap.u_face;
        state.v = snap.v_face;
        state.p = snap.p;
        state.k = snap.has_k ? snap.k : Field2D(nx, ny, default_k);
        return state;
    }

    const Field2D uc = (snap.nx == nx && snap.ny == ny)
                           ? snap.u_center
                           : resample_bilinear(snap.u_center, target.spec.lx,
                                               target.spec.ly, nx, ny);
    const Field2D vc = (snap.nx == nx && snap.ny == ny)
                           ? snap.v_center
                           : resample_bilinear(snap.v_center, target.spec.lx,
                                               target.spec.ly, nx, ny);
    state.p = (snap.nx == nx && snap.ny == ny)
                  ? snap.p
                  : resample_bilinear(snap.p, target.spec.lx, target.spec.ly,
                                      nx, ny);
    if (snap.has_k) {
        state.k = (snap.nx == nx && snap.ny == ny)
                      ? snap.k
                      : resample_bilinear(snap.k, target.spec.lx,
                                          target.spec.ly, nx, ny);
    } else {
        state.k.fill(default_k);
    }

    for (int j = 0; j < ny; ++j) {
        state.u(0, j) = uc(0, j);
        for (int i = 1; i < nx; ++i) {
            state.u(i, j) = 0.5 * (uc(i - 1, j) + uc(i, j));
        }
        state.u(nx, j) = uc(nx - 1, j);
    }
    for (int i = 0; i < nx; ++i) {
        state.v(i, 0) = vc(i, 0);
        for (int j = 1; j < ny; ++j) {
            state.v(i, j) = 0.5 * (vc(i, j - 1) + vc(i, j));
        }
        state.v(i, ny) = vc(i, ny - 1);
    }
    return state;
}

// ---- surrogate point clouds -------------------------------------------------

void write_surrogate(const std::string& path, const SurrogateData& data) {
    std::string out = "SURROGATE v1\n";
    out += "bbox " + format_double(data.xmin) + " " + format_double(data.ymin) +
           " " + format_double(data.xmax) + " " + format_double(data.ymax) +
           "\n";
    out += "n " + std::to_string(data.points.size()) + "\n";
    for (const SurrogatePoint& pt : data.points) {
        out += format_double(pt.x);
        out += ' ';
        out += format_double(pt.y);
        out += ' ';
        out += format_double(pt.u);
        out += ' ';
        out += format_double(pt.v);
        out += ' ';
        out += format_double(pt.p);
        out += ' ';
        out += format_double(pt.k);
        out += '\n';
    }
    write_file(path, out);
}

SurrogateData read_surrogate(const std::string& path) {
    const std::string text = read_file(path);
    std::istringstream in(text);
    std::string line;
    int lineno = 0;

    const auto next_line = [&](const char* what) {
        while (std::getline(in, line)) {
            ++lineno;
            line = strip_cr(line);
            if (!line.empty()) return;
        }
        throw IoError(path + ": truncated file, expected " + std::string(what));
    };
    const auto where = [&]() { return path + ":" + std::to_string(lineno); };
    const auto fields = [&](std::size_t want) {
        std::istringstream ls(line);
        std::vector<double> vals;
        std::string tok;
        while (ls >> tok) {
            vals.push_back(parse_double(tok, where()));
        }
        if (vals.size() != want) {
            throw IoError(where() + ": expected " + std::to_string(want) +
                          " values, got " + std::to_string(vals.size()));
        }
        return vals;
    };

    next_line("format header");
    if (line != "SURROGATE v1") {
        throw IoError(where() + ": expected 'SURROGATE v1' header");
    }

    SurrogateData data;
    next_line("bounding box");
    {
        std::istringstream ls(line);
        std::string tag;
        ls >> tag;
        if (tag != "bbox") {
            throw IoError(where() + ": expected 'bbox xmin ymin xmax ymax'");
        }
        std::vector<double> bb;
        std::string tok;
        while (ls >> tok) bb.push_back(parse_double(tok, where()));
        if (bb.size() != 4) {
            throw IoError(where() + ": bbox needs 4 values, got " +
                          std::to_string(bb.size()));
        }
        data.xmin = bb[0];
        data.ymin = bb[1];
        data.xmax = bb[2];
        data.ymax = bb[3];
    }
    if (!(data.xmax > data.xmin) || !(data.ymax > data.ymin)) {
        throw IoError(where() + ": degenerate bounding box");
    }

    next_line("point count");
    long n = 0;
    {
        std::istringstream ls(line);
        std::string tag;
        std::string count;
        ls >> tag >> count;
        std::string extra;
        if (tag != "n" || count.empty() || (ls >> extra)) {
            throw IoError(where() + ": expected 'n <count>'");
        }
        try {
            std::size_t used = 0;
            n = std::stol(count, &used);
            if (used != count.size()) throw std::invalid_argument(count);
        } catch (const std::exception&) {
            throw IoError(where() + ": expected a point count, got '" + count +
                          "'");
        }
    }
    if (n < 4) {
        throw IoError(where() + ": need at least 4 points, got " +
                      std::to_string(n));
    }

    const double slack =
        1e-12 * std::hypot(data.xmax - data.xmin, data.ymax - data.ymin);
    data.points.reserve(static_cast<std::size_t>(n));
    for (long row = 0; row < n; ++row) {
        next_line("point row");
        const std::vector<double> vals = fields(6);
        SurrogatePoint pt{vals[0], vals[1], vals[2], vals[3], vals[4], vals[5]};
        if (pt.k < 0.0) {
            throw IoError(where() + ": negative k");
        }
        if (pt.x < data.xmin - slack || pt.x > data.xmax + slack ||
            pt.y < data.ymin - slack || pt.y > data.ymax + slack) {
            throw IoError(where() + ": point outside the bounding box");
        }
        data.points.push_back(pt);
    }
    return data;
}

}  // namespace initlab
