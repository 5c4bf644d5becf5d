#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pgptycho/field.hpp"
#include "pgptycho/scan.hpp"
#include "pgptycho/solver.hpp"

namespace pgptycho {

// ---------------------------------------------------------------------------
// PGA1 arrays
//
//   "PGA1" | u8 dtype (0 = f64 real, 1 = f64 complex re/im) | u8 ndim
//   | ndim x u64 dims | row-major payload | f64 pitch (m)
//
// All multi-byte values little-endian.
// ---------------------------------------------------------------------------

enum class PgaDtype : std::uint8_t { Real = 0, Complex = 1 };

struct PgaArray {
  PgaDtype dtype = PgaDtype::Real;
  std::vector<std::uint64_t> dims;
  std::vector<double> real;        // dtype Real
  std::vector<complex_t> complex;  // dtype Complex
  double pitch = 1.0;

  std::uint64_t element_count() const;

  static PgaArray from(const RealField& field);
  static PgaArray from(const ComplexField& field);
  // 3-D array (count, height, width); all frames must share shape and pitch.
  static PgaArray from_stack(const std::vector<RealField>& frames);

  RealField to_real_field() const;
  ComplexField to_complex_field() const;
  std::vector<RealField> to_real_stack() const;
};

std::vector<std::uint8_t> encode_pga1(const PgaArray& array);
// Throws FormatError carrying the byte offset of the first inconsistency.
PgaArray decode_pga1(std::span<const std::uint8_t> bytes);

void write_pga1(const std::filesystem::path& path, const PgaArray& array);
PgaArray read_pga1(const std::filesystem::path& path);

inline void write_pga1(const std::filesystem::path& path, const RealField& field) {
  write_pga1(path, PgaArray::from(field));
}
inline void write_pga1(const std::filesystem::path& path, const ComplexField& field) {
  write_pga1(path, PgaArray::from(field));
}

// ---------------------------------------------------------------------------
// Scan positions CSV: header `index,x_m,y_m`, one row per position.
// ---------------------------------------------------------------------------

void write_scan_csv(const std::filesystem::path& path, const std::vector<Point2>& positions);
std::vector<Point2> read_scan_csv(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// PNG renders: hue = phase / 2pi, value = |z| / max|z|, saturation 1.
// ---------------------------------------------------------------------------

// Row-major 8-bit RGB triples.
std::vector<std::uint8_t> render_complex_rgb(const ComplexField& field);
void write_png_rgb(const std::filesystem::path& path, std::span<const std::uint8_t> rgb,
                   std::size_t width, std::size_t height);
void render_complex_png(const ComplexField& field, const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Structured text and small utilities.
// ---------------------------------------------------------------------------

nlohmann::json report_to_json(const ReconstructionReport& report);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);
void write_text_file(const std::filesystem::path& path, const std::string& text);
nlohmann::json read_json_file(const std::filesystem::path& path);

// Lower-case hex SHA-256 of the file contents.
std::string sha256_file(const std::filesystem::path& path);

}  // namespace pgptycho
