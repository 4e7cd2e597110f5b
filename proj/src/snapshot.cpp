#include "rtlab/snapshot.hpp"

#include "rtlab/mesh_ops.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

namespace rtlab {

namespace {

static_assert(std::endian::native == std::endian::little, "snapshot I/O assumes a little-endian host");

constexpr char kMagic[8] = {'R', 'T', 'F', 'L', 'D', '1', 0, 0};
constexpr std::size_t kHeader = 64;

template <class T>
void put(unsigned char* buf, std::size_t at, T v) {
    std::memcpy(buf + at, &v, sizeof(T));
}
template <class T>
T get(const unsigned char* buf, std::size_t at) {
    T v;
    std::memcpy(&v, buf + at, sizeof(T));
    return v;
}

}  // namespace

void write_snapshot(const std::filesystem::path& path, const Grid& g, int staggering, std::span<const double> values) {
    unsigned char header[kHeader] = {};
    std::memcpy(header, kMagic, 8);
    put<std::uint32_t>(header, 8, std::uint32_t(g.dim()));
    for (int a = 0; a < 3; ++a) {
        put<std::uint32_t>(header, 12 + 4 * a, a < g.dim() ? std::uint32_t(g.n(a)) : 0u);
        put<double>(header, 24 + 8 * a, a < g.dim() ? g.extent(a) : 0.0);
    }
    put<std::int32_t>(header, 48, staggering);
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ValidationError("cannot open snapshot for writing: " + path.string());
    os.write(reinterpret_cast<const char*>(header), kHeader);
    os.write(reinterpret_cast<const char*>(values.data()), std::streamsize(values.size() * sizeof(double)));
}

SnapshotArray read_snapshot(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ValidationError("cannot open snapshot: " + path.string());
    unsigned char header[kHeader];
    if (!is.read(reinterpret_cast<char*>(header), kHeader) || std::memcmp(header, kMagic, 8) != 0)
        throw ValidationError("not a field snapshot: " + path.string());
    const int d = int(get<std::uint32_t>(header, 8));
    std::vector<int> n(d);
    std::vector<double> L(d);
    for (int a = 0; a < d; ++a) {
        n[a] = int(get<std::uint32_t>(header, 12 + 4 * a));
        L[a] = get<double>(header, 24 + 8 * a);
    }
    SnapshotArray out;
    out.grid = Grid::make(d, n, L);
    out.staggering = get<std::int32_t>(header, 48);
    const std::size_t count = out.staggering < 0 ? out.grid.cells() : out.grid.faces(out.staggering);
    out.values.resize(count);
    if (!is.read(reinterpret_cast<char*>(out.values.data()), std::streamsize(count * sizeof(double))))
        throw ValidationError("truncated snapshot: " + path.string());
    return out;
}

std::filesystem::path write_scalar_snapshot(const std::filesystem::path& dir, const std::string& stem,
                                            const ScalarField& f) {
    const auto p = dir / (stem + ".bin");
    write_snapshot(p, f.grid, -1, f.v);
    return p;
}

std::vector<std::filesystem::path> write_velocity_snapshot(const std::filesystem::path& dir, const std::string& stem,
                                                           const VelocityField& v) {
    std::vector<std::filesystem::path> out;
    for (int a = 0; a < v.grid.dim(); ++a) {
        const auto p = dir / (stem + "_" + std::to_string(a) + ".bin");
        write_snapshot(p, v.grid, a, v.comp(a));
        out.push_back(p);
    }
    return out;
}

NormCsv::NormCsv(std::ostream& os) : os_(os) {
    os_ << "t,l2,h1,h2\n";
    os_.precision(12);
}

void NormCsv::record(double t, const VelocityField& u) {
    os_ << t << ',' << norm_l2(u) << ',' << norm_h1(u) << ',' << norm_h2(u) << '\n';
}

void NormCsv::record(double t, const ScalarField& f) {
    os_ << t << ',' << norm_l2(f) << ',' << norm_h1(f) << ',' << norm_h2(f) << '\n';
}

}  // namespace rtlab
