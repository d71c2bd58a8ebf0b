#include "shelab/solver/trajectory_io.hpp"

#include "shelab/error.hpp"

#include <json.hpp>

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

namespace shelab::solver {

namespace {

template <class T>
T to_little(T v) {
    if constexpr (std::endian::native == std::endian::little) {
        return v;
    } else {
        unsigned char b[sizeof(T)];
        std::memcpy(b, &v, sizeof(T));
        for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(b[i], b[sizeof(T) - 1 - i]);
        std::memcpy(&v, b, sizeof(T));
        return v;
    }
}

template <class T>
void put(std::ofstream& out, T v) {
    v = to_little(v);
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::ifstream& in, const std::filesystem::path& path) {
    T v{};
    if (!in.read(reinterpret_cast<char*>(&v), sizeof(T))) {
        throw IoError("truncated trajectory file " + path.string());
    }
    return to_little(v);
}

} // namespace

void write_trajectory(const std::filesystem::path& path, const FieldTrajectory& trajectory) {
    const Provenance& prov = trajectory.provenance();
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    put(out, prov.grid.R);
    put(out, prov.grid.dx);
    put(out, prov.grid.dt);
    put(out, prov.grid.T);
    put<std::int64_t>(out, prov.grid.boundary == Boundary::Periodic ? 1 : 0);
    put<std::int64_t>(out, static_cast<std::int64_t>(trajectory.rows()));
    put<std::int64_t>(out, static_cast<std::int64_t>(trajectory.cells()));
    for (double v : trajectory.values()) put(out, v);
    if (!out) throw IoError("failed writing " + path.string());

    nlohmann::json side;
    side["grid"] = {{"R", prov.grid.R},
                    {"dx", prov.grid.dx},
                    {"dt", prov.grid.dt},
                    {"T", prov.grid.T},
                    {"boundary", to_string(prov.grid.boundary)}};
    side["noise"] = {{"seed", prov.noise.seed}, {"replication", prov.noise.replication}};
    if (std::isinf(prov.level)) {
        side["level"] = nullptr;
    } else {
        side["level"] = prov.level;
    }
    side["b"] = prov.drift;
    side["sigma"] = prov.diffusion;
    side["u0"] = prov.u0;
    side["rows"] = trajectory.rows();
    side["cols"] = trajectory.cells();

    const std::filesystem::path side_path = path.string() + ".json";
    std::ofstream js(side_path, std::ios::trunc);
    if (!js) throw IoError("cannot open " + side_path.string() + " for writing");
    js << side.dump(2) << '\n';
    if (!js) throw IoError("failed writing " + side_path.string());
}

TrajectoryDump read_trajectory(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    TrajectoryDump d;
    d.grid.R = get<double>(in, path);
    d.grid.dx = get<double>(in, path);
    d.grid.dt = get<double>(in, path);
    d.grid.T = get<double>(in, path);
    d.grid.boundary = get<std::int64_t>(in, path) == 1 ? Boundary::Periodic : Boundary::DirichletFrozen;
    const auto rows = get<std::int64_t>(in, path);
    const auto cols = get<std::int64_t>(in, path);
    if (rows <= 0 || cols <= 0) throw IoError("corrupt trajectory header in " + path.string());
    d.rows = static_cast<std::size_t>(rows);
    d.cols = static_cast<std::size_t>(cols);
    d.values.resize(d.rows * d.cols);
    for (double& v : d.values) v = get<double>(in, path);
    return d;
}

} // namespace shelab::solver
