#pragma once

// Artifact I/O: atomic file writes and the flat binary snapshot format.
//
// Snapshot record layout (all little-endian), records appended back to back:
//   bytes  0..7   magic "KSLGSNP1"
//   bytes  8..15  uint64 grid descriptor hash (FNV-1a of Grid::descriptor())
//   bytes 16..23  float64 t
//   bytes 24..31  uint64 cell count N
//   then N float64 values of u, then N float64 values of v

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "kslog/stepper.hpp"

namespace kslog {

inline constexpr char kSnapshotMagic[8] = {'K', 'S', 'L', 'G', 'S', 'N', 'P', '1'};

/// Writes `contents` to a sibling temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);
std::string read_file(const std::filesystem::path& path);

/// Appends one snapshot record to `buffer`.
void encode_snapshot(const StateSnapshot& s, std::string& buffer);

/// Decodes every record of a snapshot file on `grid`; throws Io on a bad
/// magic, truncated record, or grid hash mismatch. step_index is the record
/// ordinal.
std::vector<StateSnapshot> decode_snapshots(const std::string& bytes, const GridPtr& grid);

}  // namespace kslog
