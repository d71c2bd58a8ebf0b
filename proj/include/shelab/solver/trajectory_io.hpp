#pragma once

#include "shelab/solver/solver.hpp"

#include <filesystem>
#include <vector>

namespace shelab::solver {

// Binary dump, all fields little-endian:
//   f64 R, f64 dx, f64 dt, f64 T, i64 boundary (0 dirichlet-frozen, 1 periodic),
//   i64 rows (M+1), i64 cols (J), then rows*cols f64 values in row-major order.
// A JSON sidecar `<path>.json` carries the provenance.
void write_trajectory(const std::filesystem::path& path, const FieldTrajectory& trajectory);

struct TrajectoryDump {
    GridSpec grid;
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> values;
};

TrajectoryDump read_trajectory(const std::filesystem::path& path);

} // namespace shelab::solver
