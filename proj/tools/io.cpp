#include "io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string_view>

#include <json.hpp>

#include "otkit/error.hpp"

namespace otkit::io {

namespace {

using json = nlohmann::json;

[[noreturn]] void format_error(const fs::path& path, const std::string& where,
                               const std::string& what) {
  fail(ErrorCode::FormatError, path.string() + ":" + where + ": " + what);
}

std::string at_line(std::size_t line) { return "line " + std::to_string(line); }
std::string at_byte(std::size_t byte) { return "byte " + std::to_string(byte); }

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

bool parse_double(std::string_view s, double& out) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return false;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(out);
}

std::string number(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ec == std::errc() ? ptr : buf);
}

struct CsvRow {
  std::size_t line;
  std::vector<double> fields;
};

// Numeric rows of a CSV file. A first line whose first field is not a number
// is treated as a header and skipped; blank lines are ignored.
std::vector<CsvRow> read_numeric_csv(const fs::path& path) {
  const std::string text = read_text(path);
  std::vector<CsvRow> rows;
  std::size_t line_no = 0;
  std::size_t start = 0;
  bool first = true;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    const std::string_view line = trim(std::string_view(text).substr(start, end - start));
    ++line_no;
    start = end + 1;
    if (line.empty()) {
      if (end == text.size()) break;
      continue;
    }
    std::vector<std::string_view> parts;
    std::size_t p = 0;
    while (true) {
      const std::size_t comma = line.find(',', p);
      parts.push_back(line.substr(p, comma == std::string_view::npos ? line.npos : comma - p));
      if (comma == std::string_view::npos) break;
      p = comma + 1;
    }
    CsvRow row{line_no, {}};
    for (std::size_t k = 0; k < parts.size(); ++k) {
      double v = 0.0;
      if (!parse_double(parts[k], v)) {
        if (first && k == 0) break;  // header
        format_error(path, at_line(line_no),
                     "field " + std::to_string(k + 1) + " is not a number: '" +
                         std::string(trim(parts[k])) + "'");
      }
      row.fields.push_back(v);
    }
    first = false;
    if (!row.fields.empty()) rows.push_back(std::move(row));
    if (end == text.size()) break;
  }
  if (rows.empty()) format_error(path, at_line(line_no), "no data rows");
  return rows;
}

json read_json(const fs::path& path) {
  const std::string text = read_text(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    format_error(path, at_byte(e.byte), "invalid JSON");
  }
}

double json_scalar(const json& doc, const char* key, double fallback, const fs::path& path) {
  if (!doc.contains(key)) return fallback;
  const json& v = doc.at(key);
  if (v.is_array() && v.size() == 1) return json_scalar(json{{key, v[0]}}, key, fallback, path);
  if (!v.is_number()) format_error(path, std::string("key ") + key, "expected a number");
  return v.get<double>();
}

void write_json(const fs::path& path, const json& doc) { write_text(path, doc.dump(2) + "\n"); }

// Tokenizer for the PNM headers and ASCII rasters.
class PnmReader {
 public:
  PnmReader(const fs::path& path, std::string data) : path_(path), data_(std::move(data)) {}

  std::string where() const { return at_line(line_) + " (" + at_byte(pos_) + ")"; }

  void skip_space() {
    while (pos_ < data_.size()) {
      const char c = data_[pos_];
      if (c == '#') {
        while (pos_ < data_.size() && data_[pos_] != '\n') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        if (c == '\n') ++line_;
        ++pos_;
      } else {
        break;
      }
    }
  }

  std::uint32_t unsigned_token(const char* what) {
    skip_space();
    const std::size_t begin = pos_;
    std::uint64_t v = 0;
    while (pos_ < data_.size() && std::isdigit(static_cast<unsigned char>(data_[pos_]))) {
      v = v * 10 + static_cast<std::uint64_t>(data_[pos_] - '0');
      if (v > 0xFFFFFFFFull) format_error(path_, where(), std::string(what) + " is too large");
      ++pos_;
    }
    if (pos_ == begin) {
      pos_ = begin;
      format_error(path_, where(), std::string("expected ") + what);
    }
    return static_cast<std::uint32_t>(v);
  }

  std::string magic() {
    if (data_.size() < 2) format_error(path_, where(), "file too short for a PNM header");
    pos_ = 2;
    return data_.substr(0, 2);
  }

  // Exactly one whitespace byte separates the header from binary samples.
  void end_header() {
    if (pos_ >= data_.size() || !std::isspace(static_cast<unsigned char>(data_[pos_]))) {
      format_error(path_, where(), "expected whitespace after the header");
    }
    ++pos_;
  }

  std::uint32_t binary_sample(std::size_t bytes) {
    if (pos_ + bytes > data_.size()) {
      format_error(path_, at_byte(pos_), "truncated raster");
    }
    std::uint32_t v = static_cast<unsigned char>(data_[pos_]);
    if (bytes == 2) v = (v << 8) | static_cast<unsigned char>(data_[pos_ + 1]);
    pos_ += bytes;
    return v;
  }

  std::size_t pos() const { return pos_; }

 private:
  fs::path path_;
  std::string data_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
};

struct PnmHeader {
  bool ascii;
  std::size_t width;
  std::size_t height;
  std::uint32_t maxval;
};

PnmHeader read_header(PnmReader& in, const fs::path& path, const char* ascii_magic,
                      const char* binary_magic) {
  const std::string magic = in.magic();
  if (magic != ascii_magic && magic != binary_magic) {
    format_error(path, at_byte(0),
                 std::string("expected magic ") + ascii_magic + " or " + binary_magic + ", got '" +
                     magic + "'");
  }
  PnmHeader h{magic == ascii_magic, 0, 0, 0};
  h.width = in.unsigned_token("width");
  h.height = in.unsigned_token("height");
  h.maxval = in.unsigned_token("maxval");
  if (h.width == 0 || h.height == 0) format_error(path, in.where(), "empty image");
  if (h.maxval == 0 || h.maxval > 65535) {
    format_error(path, in.where(), "maxval must be in 1..65535, got " + std::to_string(h.maxval));
  }
  if (!h.ascii) in.end_header();
  return h;
}

std::vector<std::uint32_t> read_samples(PnmReader& in, const fs::path& path, const PnmHeader& h,
                                        std::size_t count) {
  std::vector<std::uint32_t> out(count);
  const std::size_t bytes = h.maxval > 255 ? 2 : 1;
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t at = in.pos();
    const std::uint32_t v = h.ascii ? in.unsigned_token("sample") : in.binary_sample(bytes);
    if (v > h.maxval) {
      format_error(path, h.ascii ? in.where() : at_byte(at),
                   "sample " + std::to_string(v) + " exceeds maxval " + std::to_string(h.maxval));
    }
    out[k] = v;
  }
  return out;
}

std::string binary_raster(const std::vector<std::uint32_t>& samples, std::uint32_t maxval) {
  std::string out;
  const bool wide = maxval > 255;
  out.reserve(samples.size() * (wide ? 2 : 1));
  for (std::uint32_t v : samples) {
    if (wide) out.push_back(static_cast<char>((v >> 8) & 0xFF));
    out.push_back(static_cast<char>(v & 0xFF));
  }
  return out;
}

}  // namespace

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot open '" + path.string() + "' for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) fail(ErrorCode::IoError, "read failed on '" + path.string() + "'");
  return buf.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::IoError, "cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) fail(ErrorCode::IoError, "write failed on '" + path.string() + "'");
}

DiscreteMeasure read_measure_csv(const fs::path& path) {
  const auto rows = read_numeric_csv(path);
  const std::size_t fields = rows.front().fields.size();
  if (fields < 2) format_error(path, at_line(rows.front().line), "expected `x,weight` rows");
  std::vector<double> coords;
  std::vector<double> weights;
  for (const auto& row : rows) {
    if (row.fields.size() != fields) {
      format_error(path, at_line(row.line),
                   "expected " + std::to_string(fields) + " fields, got " +
                       std::to_string(row.fields.size()));
    }
    if (row.fields.back() < 0.0) format_error(path, at_line(row.line), "negative weight");
    coords.insert(coords.end(), row.fields.begin(), row.fields.end() - 1);
    weights.push_back(row.fields.back());
  }
  return DiscreteMeasure(fields - 1, std::move(coords), std::move(weights));
}

void write_measure_csv(const fs::path& path, const DiscreteMeasure& measure) {
  std::string out;
  for (std::size_t i = 0; i < measure.size(); ++i) {
    for (double x : measure.point(i)) out += number(x) + ",";
    out += number(measure.weight(i)) + "\n";
  }
  write_text(path, out);
}

fs::path sidecar_path(const fs::path& csv) {
  fs::path p = csv;
  return p.replace_extension(".json");
}

bool is_grid_csv(const fs::path& path) { return fs::exists(sidecar_path(path)); }

GridDensity read_grid_csv(const fs::path& path) {
  const auto rows = read_numeric_csv(path);
  std::vector<double> values;
  values.reserve(rows.size());
  for (const auto& row : rows) {
    if (row.fields.size() != 1) format_error(path, at_line(row.line), "expected one value per row");
    if (row.fields[0] < 0.0) format_error(path, at_line(row.line), "negative value");
    values.push_back(row.fields[0]);
  }
  double spacing = 1.0;
  double origin = 0.0;
  const fs::path side = sidecar_path(path);
  if (fs::exists(side)) {
    const json doc = read_json(side);
    if (!doc.is_object()) format_error(side, at_byte(0), "expected a JSON object");
    spacing = json_scalar(doc, "spacing", 1.0, side);
    origin = json_scalar(doc, "origin", 0.0, side);
    if (!(spacing > 0.0)) format_error(side, "key spacing", "spacing must be positive");
  }
  return GridDensity::line(std::move(values), spacing, origin);
}

void write_grid_csv(const fs::path& path, const GridDensity& grid) {
  if (grid.dimension() != 1) fail(ErrorCode::DimensionError, "grid CSV holds 1-D grids only");
  std::string out;
  for (double v : grid.values) out += number(v) + "\n";
  write_text(path, out);
  write_json(sidecar_path(path), {{"spacing", grid.spacing[0]}, {"origin", grid.origin[0]}});
}

GrayImage read_pgm(const fs::path& path) {
  PnmReader in(path, read_text(path));
  const PnmHeader h = read_header(in, path, "P2", "P5");
  GrayImage img{h.width, h.height, h.maxval, read_samples(in, path, h, h.width * h.height)};
  return img;
}

void write_pgm(const fs::path& path, const GrayImage& image) {
  if (image.pixels.size() != image.width * image.height) {
    fail(ErrorCode::InvalidArgument, "PGM raster size does not match its dimensions");
  }
  write_text(path, "P5\n" + std::to_string(image.width) + " " + std::to_string(image.height) +
                       "\n" + std::to_string(image.maxval) + "\n" +
                       binary_raster(image.pixels, image.maxval));
}

GridDensity to_grid(const GrayImage& image) {
  std::vector<double> values(image.pixels.size());
  for (std::size_t k = 0; k < values.size(); ++k) {
    values[k] = static_cast<double>(image.pixels[k]) / static_cast<double>(image.maxval);
  }
  return GridDensity::image(image.width, image.height, std::move(values));
}

RgbImage read_ppm(const fs::path& path) {
  PnmReader in(path, read_text(path));
  const PnmHeader h = read_header(in, path, "P3", "P6");
  if (h.maxval != 255) {
    format_error(path, in.where(), "only 8-bit PPM (maxval 255) is supported");
  }
  const auto samples = read_samples(in, path, h, 3 * h.width * h.height);
  RgbImage img{h.width, h.height, std::vector<std::uint8_t>(samples.begin(), samples.end())};
  return img;
}

void write_ppm(const fs::path& path, const RgbImage& image) {
  if (image.pixels.size() != 3 * image.size()) {
    fail(ErrorCode::InvalidArgument, "PPM raster size does not match its dimensions");
  }
  write_text(path, "P6\n" + std::to_string(image.width) + " " + std::to_string(image.height) +
                       "\n255\n" + std::string(image.pixels.begin(), image.pixels.end()));
}

void write_plan_csv(const fs::path& path, const TransportPlan& plan) {
  std::string out = "i,j,mass\n";
  for (const auto& c : plan.couplings) {
    out += std::to_string(c.source) + "," + std::to_string(c.target) + "," + number(c.mass) + "\n";
  }
  write_text(path, out);
}

void write_sinogram_csv(const fs::path& path, const Sinogram& sinogram) {
  if (sinogram.profiles.empty()) fail(ErrorCode::InvalidArgument, "empty sinogram");
  // Each profile's t-grid is centered on the projected image center, so the
  // absolute offsets move with the angle; rows are keyed by the offset from
  // that center, which the profiles share.
  const GridDensity& first = sinogram.profiles.front();
  for (const auto& p : sinogram.profiles) {
    if (p.dimension() != 1 || p.size() != first.size() ||
        std::abs(p.spacing[0] - first.spacing[0]) > 1e-12 * first.spacing[0]) {
      fail(ErrorCode::DimensionMismatch, "profiles differ in bin count or spacing");
    }
  }
  std::string out = "offset";
  for (double a : sinogram.angles) out += "," + number(a);
  out += "\n";
  const double mid = 0.5 * static_cast<double>(first.size() - 1);
  for (std::size_t k = 0; k < first.size(); ++k) {
    out += number((static_cast<double>(k) - mid) * first.spacing[0]);
    for (const auto& p : sinogram.profiles) out += "," + number(p.values[k]);
    out += "\n";
  }
  write_text(path, out);
}

void write_cdt_csv(const fs::path& path, const CdtSignal& signal, const std::string& reference_name) {
  const GridDensity& ref = signal.reference;
  std::string out = "x,reference,value\n";
  for (std::size_t k = 0; k < ref.size(); ++k) {
    out += number(ref.center(0, k)) + "," + number(ref.values[k]) + "," + number(signal.values[k]) + "\n";
  }
  write_text(path, out);
  json side{{"schema_version", 1}, {"spacing", ref.spacing[0]}, {"origin", ref.origin[0]}};
  if (!reference_name.empty()) side["reference"] = reference_name;
  write_json(sidecar_path(path), side);
}

CdtSignal read_cdt_csv(const fs::path& path) {
  const auto rows = read_numeric_csv(path);
  const fs::path side = sidecar_path(path);
  if (!fs::exists(side)) fail(ErrorCode::IoError, "missing sidecar '" + side.string() + "'");
  const json doc = read_json(side);
  const double spacing = json_scalar(doc, "spacing", 1.0, side);
  if (!(spacing > 0.0)) format_error(side, "key spacing", "spacing must be positive");
  std::vector<double> reference;
  std::vector<double> values;
  for (const auto& row : rows) {
    if (row.fields.size() != 3) format_error(path, at_line(row.line), "expected `x,reference,value`");
    if (row.fields[1] < 0.0) format_error(path, at_line(row.line), "negative reference value");
    reference.push_back(row.fields[1]);
    values.push_back(row.fields[2]);
  }
  const double origin = json_scalar(doc, "origin", rows.front().fields[0], side);
  return {GridDensity::line(std::move(reference), spacing, origin), std::move(values)};
}

}  // namespace otkit::io
