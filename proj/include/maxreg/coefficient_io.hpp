#pragma once

#include "maxreg/coefficients.hpp"

#include <filesystem>

namespace maxreg {

enum class BlockFormat { binary, csv };

// A coefficient file is a JSON header (grid, mesh, matrix_dim, lambda,
// Lambda, T, support, kind, seed, params) naming a sibling sample block:
//   binary: little-endian (f64 re, f64 im) per sample in (t, cell, row, col) order
//   csv:    header "j,cell,row,col,re,im", one row per entry
// Doubles are written with 17 significant digits so a round trip is exact.

/// Writes `header` and its block next to it (same stem, ".bin" or ".csv").
void save_coefficients(const std::filesystem::path& header, const CoefficientField& A,
                       BlockFormat format = BlockFormat::binary);
CoefficientField load_coefficients(const std::filesystem::path& header);

} // namespace maxreg
