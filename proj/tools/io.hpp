#pragma once

// File codecs for the command-line tool. Parse failures throw FormatError
// with the file name, line (text formats) or byte offset (binary formats);
// missing or unwritable files throw IoError.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "otkit/cdt.hpp"
#include "otkit/image.hpp"
#include "otkit/measures.hpp"
#include "otkit/plan.hpp"
#include "otkit/sliced.hpp"

namespace otkit::io {

namespace fs = std::filesystem;

/// Rows `x,weight`; an optional header line is skipped when its first field
/// is not a number. LF and CRLF line ends are both accepted.
DiscreteMeasure read_measure_csv(const fs::path& path);
void write_measure_csv(const fs::path& path, const DiscreteMeasure& measure);

/// `<stem>.json` next to a grid CSV.
fs::path sidecar_path(const fs::path& csv);

/// One value per row plus the sidecar `{ "spacing": h, "origin": x0 }`. A
/// missing sidecar means spacing 1 and origin 0.
GridDensity read_grid_csv(const fs::path& path);
void write_grid_csv(const fs::path& path, const GridDensity& grid);

/// A CSV is a grid when it has a sidecar, otherwise a point measure.
bool is_grid_csv(const fs::path& path);

struct GrayImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::uint32_t maxval = 255;
  std::vector<std::uint32_t> pixels;  // row-major from the top-left pixel
};

/// P2 or P5 (maxval up to 65535, 16-bit samples big-endian).
GrayImage read_pgm(const fs::path& path);
/// P5 with the image's maxval.
void write_pgm(const fs::path& path, const GrayImage& image);

/// Intensities divided by maxval, as a unit-spacing 2-D grid (not normalized).
GridDensity to_grid(const GrayImage& image);

/// P3 or P6 with maxval 255.
RgbImage read_ppm(const fs::path& path);
void write_ppm(const fs::path& path, const RgbImage& image);

/// Rows `i,j,mass` after an `i,j,mass` header.
void write_plan_csv(const fs::path& path, const TransportPlan& plan);

/// Header `offset,<angle_0>,...`; one row per bin, keyed by the offset from
/// the bin under the image center. Profiles must share bin count and spacing.
void write_sinogram_csv(const fs::path& path, const Sinogram& sinogram);

/// Rows `x,reference,value` plus a sidecar recording the grid and, when
/// given, the file the reference came from.
void write_cdt_csv(const fs::path& path, const CdtSignal& signal,
                   const std::string& reference_name = {});
CdtSignal read_cdt_csv(const fs::path& path);

/// Whole file as text; IoError when unreadable.
std::string read_text(const fs::path& path);
void write_text(const fs::path& path, const std::string& text);

}  // namespace otkit::io
