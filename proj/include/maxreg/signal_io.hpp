#pragma once

#include "maxreg/fourier.hpp"

#include <filesystem>
#include <cstdint>
#include <iosfwd>

namespace maxreg {

// Binary layout, little-endian throughout:
//
//   offset  size  field
//   0       4     magic "MRTS"
//   4       4     u32 format version (1)
//   8       8     f64 t_start
//   16      8     f64 t_end
//   24      8     u64 n_points
//   32      4     u32 sampling (0 = node, 1 = cell_centered)
//   36      4     u32 reserved (0)
//   40      8     u64 dim
//   48      16*n*dim  samples as (f64 re, f64 im), time-major: sample j, component c
//
// CSV: header "t,re,im" for dim 1, "t,re0,im0,re1,im1,..." otherwise; one row
// per grid point. The grid window and sampling are written as a leading
// comment line "# t_start=...,t_end=...,sampling=node|cell_centered".

inline constexpr std::uint32_t kSignalFormatVersion = 1;

void write_signal_binary(std::ostream& os, const TimeSignal& s);
TimeSignal read_signal_binary(std::istream& is);

void write_signal_csv(std::ostream& os, const TimeSignal& s);
/// Reads the CSV layout above. Row counts that are not a power of two are
/// resampled onto the next power-of-two grid; a missing comment line means
/// a node grid spanning the first t to last t + dt.
TimeSignal read_signal_csv(std::istream& is);

void save_signal(const std::filesystem::path& path, const TimeSignal& s);
/// Dispatches on extension: ".csv" or anything else as binary.
TimeSignal load_signal(const std::filesystem::path& path);

namespace detail {
void put_u32(std::ostream& os, std::uint32_t v);
void put_u64(std::ostream& os, std::uint64_t v);
void put_f64(std::ostream& os, double v);
std::uint32_t get_u32(std::istream& is);
std::uint64_t get_u64(std::istream& is);
double get_f64(std::istream& is);
} // namespace detail

} // namespace maxreg
