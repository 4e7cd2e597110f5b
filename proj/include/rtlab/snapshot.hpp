#pragma once

// Field snapshots: flat little-endian float64 arrays behind a 64-byte header.
//
//   bytes  0..7   magic "RTFLD1" padded with zeros
//   bytes  8..11  uint32 dimension d
//   bytes 12..23  uint32 cells per axis (n1, n2, n3; unused axes 0)
//   bytes 24..47  float64 extents (L1, L2, L3; unused axes 0)
//   bytes 48..51  int32 staggering: -1 cell centered, a >= 0 faces normal to axis a
//   bytes 52..63  reserved, zero
//
// One file per field component; a velocity field is written as d files.

#include "rtlab/grid.hpp"

#include <filesystem>
#include <ostream>

namespace rtlab {

struct SnapshotArray {
    Grid grid;
    int staggering = -1;
    std::vector<double> values;
};

void write_snapshot(const std::filesystem::path& path, const Grid& g, int staggering, std::span<const double> values);
SnapshotArray read_snapshot(const std::filesystem::path& path);

/// Writes <stem>.bin for a scalar field.
std::filesystem::path write_scalar_snapshot(const std::filesystem::path& dir, const std::string& stem,
                                            const ScalarField& f);
/// Writes <stem>_<a>.bin for every velocity component.
std::vector<std::filesystem::path> write_velocity_snapshot(const std::filesystem::path& dir, const std::string& stem,
                                                           const VelocityField& v);

/// CSV with columns t,l2,h1,h2.
class NormCsv {
public:
    explicit NormCsv(std::ostream& os);
    void record(double t, const VelocityField& u);
    void record(double t, const ScalarField& f);

private:
    std::ostream& os_;
};

}  // namespace rtlab
