#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "initlab/field.hpp"
#include "initlab/grid.hpp"
#include "initlab/solver.hpp"

namespace initlab {

class IoError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Shortest decimal representation that round-trips a double exactly.
std::string format_double(double x);

// ---- force history CSV ------------------------------------------------------

/// Writes `t,fx,fy` rows.
void write_force_csv(const std::string& path, const ForceSeries& series);

/// Writes `t,fx,fy,filtered` rows; `filtered` must match the series length.
void write_filtered_csv(const std::string& path, const ForceSeries& series,
                        const std::vector<double>& filtered);

/// Reads a force CSV; requires the header to start with `t,fx,fy` and
/// ignores any extra columns.
ForceSeries read_force_csv(const std::string& path);

/// A numeric table with named columns.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> columns;  ///< one vector per header entry

    /// Index of a named column, or -1.
    int column(const std::string& name) const;
};

/// Reads a CSV of numbers under a one-line header; every row must have the
/// header's width.
CsvTable read_csv(const std::string& path);

// ---- flow snapshots ---------------------------------------------------------

/// A flow snapshot loaded from disk.  Cell-centred fields are always
/// populated; the staggered face arrays are present only when the file
/// carries the restart payload written by this tool.
struct Snapshot {
    int nx = 0;
    int ny = 0;
    double lx = 0.0;
    double ly = 0.0;
    double sim_time = 0.0;
    Field2D u_center;
    Field2D v_center;
    Field2D p;
    Field2D k;
    bool has_k = false;
    bool has_faces = false;
    Field2D u_face;
    Field2D v_face;
    bool has_meta = false;
    FreestreamConditions meta_fs{};
};

/// Writes a legacy-ASCII structured-points file with cell-centred u, v, p, k
/// and total pressure, plus a restart payload holding the exact staggered
/// velocities, and a one-line `<path>.meta` sidecar with grid and flow
/// parameters.
void write_snapshot(const std::string& path, const Grid& grid,
                    const FlowState& state, const FreestreamConditions& fs);

/// Reads a snapshot written by write_snapshot, or a foreign structured-points
/// file with at least cell-centred u and v.
Snapshot read_snapshot(const std::string& path);

/// Rebuilds a flow state on `target` from a snapshot.  Same-resolution
/// snapshots with a restart payload restore bit-exactly; otherwise cell
/// centres are interpolated bilinearly and faces reconstructed by averaging.
/// Missing k fields are filled with `default_k`.  Throws IoError when the
/// physical domain sizes disagree.
FlowState snapshot_to_state(const Snapshot& snap, const Grid& target,
                            double default_k);

// ---- surrogate point clouds -------------------------------------------------

struct SurrogatePoint {
    double x = 0.0;
    double y = 0.0;
    double u = 0.0;
    double v = 0.0;
    double p = 0.0;
    double k = 0.0;
};

struct SurrogateData {
    double xmin = 0.0;
    double xmax = 0.0;
    double ymin = 0.0;
    double ymax = 0.0;
    std::vector<SurrogatePoint> points;
};

/// Writes the `SURROGATE v1` text format: a header, the bounding box, the
/// point count, then one `x y u v p k` row per point.
void write_surrogate(const std::string& path, const SurrogateData& data);

/// Parses a `SURROGATE v1` file.  Errors carry `path:line:` prefixes and
/// reject fewer than 4 points, negative k, and points outside the box.
SurrogateData read_surrogate(const std::string& path);

}  // namespace initlab
