#pragma once

// Run configuration files: INI/TOML-style sections of `key = value` lines,
// `#` or `;` comments, strings optionally double-quoted.
//
//   [grid]      nx*, ny*, lx, ly
//   [fluid]     rho1, rho2, nu1, nu2
//   [potential] alpha, kind (logarithmic | quadratic)
//   [kernel]    kind*, width*, strength*     kind: gaussian | wendland
//   [time]      dt*, t_end*
//   [solver]    lambda, newton_tol, newton_max, advection (upwind | centered),
//               include_flux
//   [initial]   preset*, amplitude, cx, cy, radius, width, mean, seed, modes
//               preset: bubble | random-mix | stratified
//   [output]    snapshot_every, checkpoint_every
//
// Starred keys are required. Anything not listed is an UnknownKey error.

#include <filesystem>
#include <string>

#include "nlagg/simulation.hpp"

namespace nlagg {

/// MissingKey, UnknownKey, or InvalidValue naming the offending key.
SimConfig parse_config_string(const std::string& text);
SimConfig parse_config(const std::filesystem::path& path);

/// Canonical text with every key spelled out; parse_config_string inverts it
/// exactly (doubles are written with 17 significant digits).
std::string format_config(const SimConfig& cfg);

std::string to_string(InitialPreset p);
std::string to_string(Advection a);

}  // namespace nlagg
