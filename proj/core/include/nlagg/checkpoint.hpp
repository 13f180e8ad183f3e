#pragma once

// Restartable state: one directory holding phi.fld, mu.fld, u.fld, p.fld and
// a key=value manifest (format_version, step, t as a hex float).

#include <filesystem>

#include "nlagg/simulation.hpp"

namespace nlagg {

inline constexpr int kCheckpointVersion = 1;

/// Writes into a sibling temporary directory and renames it into place.
void write_checkpoint(const SimState& s, const std::filesystem::path& dir);

/// CorruptHeader on a missing/garbled manifest or version mismatch,
/// SizeMismatch on truncated fields or grids that disagree.
SimState read_checkpoint(const std::filesystem::path& dir);

}  // namespace nlagg
