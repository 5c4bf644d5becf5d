#include "pgptycho/io.hpp"

#include <openssl/evp.h>
#include <png.h>

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <memory>
#include <numbers>
#include <sstream>

namespace pgptycho {

namespace {

static_assert(std::endian::native == std::endian::little,
              "PGA1 encoding assumes a little-endian host");

constexpr char kMagic[4] = {'P', 'G', 'A', '1'};

template <typename T>
void put(std::vector<std::uint8_t>& out, T value) {
  std::uint8_t bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  out.insert(out.end(), bytes, bytes + sizeof(T));
}

template <typename T>
T get(std::span<const std::uint8_t> bytes, std::size_t offset) {
  T value;
  std::memcpy(&value, bytes.data() + offset, sizeof(T));
  return value;
}

std::vector<std::uint64_t> dims_of(const Shape& shape) {
  return {static_cast<std::uint64_t>(shape.height), static_cast<std::uint64_t>(shape.width)};
}

Shape shape_2d(const std::vector<std::uint64_t>& dims) {
  if (dims.size() == 2) return {dims[0], dims[1]};
  if (dims.size() == 3 && dims[0] == 1) return {dims[1], dims[2]};
  throw FormatError("expected a 2-D array, got " + std::to_string(dims.size()) + " dimensions", 5);
}

}  // namespace

std::uint64_t PgaArray::element_count() const {
  std::uint64_t n = 1;
  for (auto d : dims) n *= d;
  return n;
}

PgaArray PgaArray::from(const RealField& field) {
  PgaArray a;
  a.dtype = PgaDtype::Real;
  a.dims = dims_of(field.shape());
  a.real = field.values();
  a.pitch = field.pitch();
  return a;
}

PgaArray PgaArray::from(const ComplexField& field) {
  PgaArray a;
  a.dtype = PgaDtype::Complex;
  a.dims = dims_of(field.shape());
  a.complex = field.values();
  a.pitch = field.pitch();
  return a;
}

PgaArray PgaArray::from_stack(const std::vector<RealField>& frames) {
  if (frames.empty()) throw ArgumentError("cannot encode an empty frame stack");
  PgaArray a;
  a.dtype = PgaDtype::Real;
  const auto& first = frames.front();
  a.dims = {frames.size(), first.height(), first.width()};
  a.pitch = first.pitch();
  a.real.reserve(frames.size() * first.size());
  for (const auto& f : frames) {
    require_same_shape(f.shape(), first.shape(), "frame stack");
    if (f.pitch() != first.pitch()) throw DimensionError("frame stack pitches differ");
    a.real.insert(a.real.end(), f.begin(), f.end());
  }
  return a;
}

RealField PgaArray::to_real_field() const {
  if (dtype != PgaDtype::Real) throw FormatError("expected real dtype", 4);
  return RealField(shape_2d(dims), pitch, real);
}

ComplexField PgaArray::to_complex_field() const {
  if (dtype != PgaDtype::Complex) throw FormatError("expected complex dtype", 4);
  return ComplexField(shape_2d(dims), pitch, complex);
}

std::vector<RealField> PgaArray::to_real_stack() const {
  if (dtype != PgaDtype::Real) throw FormatError("expected real dtype", 4);
  if (dims.size() == 2) return {to_real_field()};
  if (dims.size() != 3) {
    throw FormatError("expected a 3-D frame stack, got " + std::to_string(dims.size()) +
                          " dimensions",
                      5);
  }
  const Shape shape{dims[1], dims[2]};
  std::vector<RealField> frames;
  frames.reserve(dims[0]);
  for (std::uint64_t i = 0; i < dims[0]; ++i) {
    const auto begin = real.begin() + static_cast<std::ptrdiff_t>(i * shape.size());
    frames.emplace_back(shape, pitch,
                        std::vector<double>(begin, begin + static_cast<std::ptrdiff_t>(shape.size())));
  }
  return frames;
}

std::vector<std::uint8_t> encode_pga1(const PgaArray& array) {
  const auto n = array.element_count();
  const bool is_complex = array.dtype == PgaDtype::Complex;
  if ((is_complex ? array.complex.size() : array.real.size()) != n) {
    throw DimensionError("PGA1 payload length does not match dims");
  }
  if (array.dims.size() > 255) throw ArgumentError("PGA1 supports at most 255 dimensions");
  std::vector<std::uint8_t> out;
  out.reserve(6 + 8 * array.dims.size() + n * (is_complex ? 16 : 8) + 8);
  out.insert(out.end(), kMagic, kMagic + 4);
  out.push_back(static_cast<std::uint8_t>(array.dtype));
  out.push_back(static_cast<std::uint8_t>(array.dims.size()));
  for (auto d : array.dims) put<std::uint64_t>(out, d);
  if (is_complex) {
    for (const auto& z : array.complex) {
      put<double>(out, z.real());
      put<double>(out, z.imag());
    }
  } else {
    for (double v : array.real) put<double>(out, v);
  }
  put<double>(out, array.pitch);
  return out;
}

PgaArray decode_pga1(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
    throw FormatError("bad PGA1 magic", 0);
  }
  if (bytes.size() < 6) throw FormatError("truncated PGA1 header", bytes.size());
  PgaArray a;
  const std::uint8_t dtype = bytes[4];
  if (dtype > 1) throw FormatError("unknown PGA1 dtype code " + std::to_string(dtype), 4);
  a.dtype = static_cast<PgaDtype>(dtype);
  const std::size_t ndim = bytes[5];
  std::size_t offset = 6;
  if (bytes.size() < offset + 8 * ndim) {
    throw FormatError("truncated PGA1 dims: expected " + std::to_string(8 * ndim) + " bytes", offset);
  }
  a.dims.resize(ndim);
  for (std::size_t i = 0; i < ndim; ++i, offset += 8) a.dims[i] = get<std::uint64_t>(bytes, offset);

  const std::uint64_t n = a.element_count();
  const std::uint64_t element = a.dtype == PgaDtype::Complex ? 16 : 8;
  const std::uint64_t expected = n * element + 8;
  const std::uint64_t actual = bytes.size() - offset;
  if (actual != expected) {
    throw FormatError("PGA1 payload length mismatch: expected " + std::to_string(expected) +
                          " bytes (payload + pitch), found " + std::to_string(actual),
                      offset);
  }
  if (a.dtype == PgaDtype::Complex) {
    a.complex.resize(n);
    for (std::uint64_t k = 0; k < n; ++k, offset += 16) {
      a.complex[k] = {get<double>(bytes, offset), get<double>(bytes, offset + 8)};
    }
  } else {
    a.real.resize(n);
    for (std::uint64_t k = 0; k < n; ++k, offset += 8) a.real[k] = get<double>(bytes, offset);
  }
  a.pitch = get<double>(bytes, offset);
  return a;
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in), {});
}

void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  write_file_bytes(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

nlohmann::json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void write_pga1(const std::filesystem::path& path, const PgaArray& array) {
  write_file_bytes(path, encode_pga1(array));
}

PgaArray read_pga1(const std::filesystem::path& path) { return decode_pga1(read_file_bytes(path)); }

void write_scan_csv(const std::filesystem::path& path, const std::vector<Point2>& positions) {
  std::ostringstream os;
  os << "index,x_m,y_m\n" << std::setprecision(17);
  for (std::size_t i = 0; i < positions.size(); ++i) {
    os << i << ',' << positions[i].x << ',' << positions[i].y << '\n';
  }
  write_text_file(path, os.str());
}

std::vector<Point2> read_scan_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line) || line.rfind("index,x_m,y_m", 0) != 0) {
    throw FormatError(path.string() + ": missing 'index,x_m,y_m' header", 0);
  }
  std::vector<Point2> positions;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string index, x, y;
    if (!std::getline(row, index, ',') || !std::getline(row, x, ',') || !std::getline(row, y)) {
      throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": expected 3 columns");
    }
    try {
      positions.push_back({std::stod(x), std::stod(y)});
    } catch (const std::exception&) {
      throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": bad number");
    }
  }
  return positions;
}

std::vector<std::uint8_t> render_complex_rgb(const ComplexField& field) {
  double peak = 0.0;
  for (const auto& z : field) peak = std::max(peak, std::abs(z));
  std::vector<std::uint8_t> rgb(field.size() * 3, 0);
  if (peak == 0.0) return rgb;
  const auto to_byte = [](double v) {
    return static_cast<std::uint8_t>(std::lround(255.0 * std::clamp(v, 0.0, 1.0)));
  };
  for (std::size_t k = 0; k < field.size(); ++k) {
    const double value = std::abs(field[k]) / peak;
    double phase = std::arg(field[k]);
    if (phase < 0.0) phase += 2.0 * std::numbers::pi;
    double hue = phase / (2.0 * std::numbers::pi) * 6.0;
    if (hue >= 6.0) hue -= 6.0;
    const int sector = static_cast<int>(hue);
    const double f = hue - sector;
    const double q = value * (1.0 - f);
    const double t = value * f;
    double r = 0, g = 0, b = 0;
    switch (sector) {
      case 0: r = value, g = t, b = 0; break;
      case 1: r = q, g = value, b = 0; break;
      case 2: r = 0, g = value, b = t; break;
      case 3: r = 0, g = q, b = value; break;
      case 4: r = t, g = 0, b = value; break;
      default: r = value, g = 0, b = q; break;
    }
    rgb[3 * k] = to_byte(r);
    rgb[3 * k + 1] = to_byte(g);
    rgb[3 * k + 2] = to_byte(b);
  }
  return rgb;
}

void write_png_rgb(const std::filesystem::path& path, std::span<const std::uint8_t> rgb,
                   std::size_t width, std::size_t height) {
  if (rgb.size() != width * height * 3) throw DimensionError("PNG buffer size mismatch");
  std::unique_ptr<FILE, int (*)(FILE*)> file(std::fopen(path.c_str(), "wb"), &std::fclose);
  if (!file) throw IoError("cannot write " + path.string());
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw IoError("libpng initialisation failed");
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("libpng failed writing " + path.string());
  }
  png_init_io(png, file.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), 8,
               PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (std::size_t r = 0; r < height; ++r) {
    png_write_row(png, const_cast<png_bytep>(rgb.data() + r * width * 3));
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

void render_complex_png(const ComplexField& field, const std::filesystem::path& path) {
  write_png_rgb(path, render_complex_rgb(field), field.width(), field.height());
}

nlohmann::json report_to_json(const ReconstructionReport& report) {
  using nlohmann::json;
  auto finite_or_null = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
  json epochs = json::array();
  for (const auto& e : report.epochs) {
    epochs.push_back({{"epoch", e.epoch},
                      {"lr", e.lr},
                      {"fidelity", e.fidelity},
                      {"reg_probe_support", e.reg_probe_support},
                      {"reg_object_amplitude", e.reg_object_amplitude},
                      {"reg_object_fourier", e.reg_object_fourier},
                      {"dominance_ratio", finite_or_null(e.dominance_ratio)},
                      {"dominance_warning", e.dominance_warning}});
  }
  return json{{"epochs", std::move(epochs)},
              {"epoch_count", report.epochs.size()},
              {"final_fidelity", report.final_fidelity},
              {"final_regularization", report.final_regularization},
              {"dominance_warning_epochs", report.dominance_warning_count()},
              {"has_probe", report.probe.has_value()},
              {"wall_ms", report.wall_ms},
              {"warnings", report.warnings}};
}

std::string sha256_file(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
    throw IoError("SHA-256 failed for " + path.string());
  }
  std::ostringstream os;
  os << std::hex << std::setfill('0');
  for (unsigned int i = 0; i < length; ++i) os << std::setw(2) << static_cast<int>(digest[i]);
  return os.str();
}

}  // namespace pgptycho
