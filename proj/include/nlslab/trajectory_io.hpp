#pragma once

#include <iosfwd>
#include <memory>
#include <string>

#include "nlslab/flow.hpp"

namespace nlslab {

// One JSON object per line: {"t", "mass", "energy", "Hs_norms": [...]}.
void write_trajectory_jsonl(std::ostream& out, const Trajectory& tr);

// Binary snapshot. Header: magic "NLSF", u32 version, u32 d, f64 cutoff,
// u64 mode count, then d int32 per mode. Payload: re, im f64 per mode.
// Everything little-endian.
void write_snapshot(std::ostream& out, const SpectralField& u);
SpectralField read_snapshot(std::istream& in);
void write_snapshot_file(const std::string& path, const SpectralField& u);
SpectralField read_snapshot_file(const std::string& path);

}  // namespace nlslab
