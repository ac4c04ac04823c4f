#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <ostream>
#include <random>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "io.hpp"
#include "otkit/cdt.hpp"
#include "otkit/entropic.hpp"
#include "otkit/error.hpp"
#include "otkit/exact1d.hpp"
#include "otkit/geodesics.hpp"
#include "otkit/lp.hpp"
#include "otkit/sliced.hpp"

namespace otkit::cli {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

class Stopwatch {
 public:
  double ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

// Flags shared by the subcommands; each subcommand registers the ones it reads.
struct Flags {
  std::string method = "auto";
  double p = 2.0;
  double lambda = 0.0;
  double rel_lambda = 0.05;
  double tol = 1e-9;
  std::size_t max_iter = 100000;
  std::size_t angles = 32;
  std::size_t frames = 5;
  std::uint64_t seed = 42;
  std::string out;
  double eps_floor = 1e-8;
  std::size_t k = 5;
  std::size_t max_atoms = 4096;
  std::size_t sweeps = 10;
  std::size_t directions = 3;
  bool smooth = false;
  std::size_t smooth_radius = 2;
  std::string reference;
  std::string report;
  std::vector<std::string> inputs;
  std::string action;
  std::vector<std::size_t> sizes{64, 128, 256, 512};
  std::vector<std::string> methods{"lp", "sinkhorn"};
  std::size_t reps = 1;
  double timeout_ms = 60000.0;
  double bench_tol = 1e-6;
};

enum class Kind { Measure, Grid1, Grid2 };

struct Input {
  Kind kind;
  DiscreteMeasure measure;  // always filled (normalized)
  GridDensity grid;         // filled for grids (normalized)
};

std::string lower_ext(const fs::path& p) {
  std::string e = p.extension().string();
  std::transform(e.begin(), e.end(), e.begin(), [](unsigned char c) { return std::tolower(c); });
  return e;
}

GridDensity unit_mass(const GridDensity& g) { return normalize(g, 0.0); }

Input load_input(const fs::path& path) {
  const std::string ext = lower_ext(path);
  if (ext == ".pgm") {
    GridDensity g = unit_mass(io::to_grid(io::read_pgm(path)));
    DiscreteMeasure m = to_measure(g);
    return {Kind::Grid2, std::move(m), std::move(g)};
  }
  if (ext == ".csv") {
    if (io::is_grid_csv(path)) {
      GridDensity g = unit_mass(io::read_grid_csv(path));
      DiscreteMeasure m = to_measure(g);
      return {Kind::Grid1, std::move(m), std::move(g)};
    }
    return {Kind::Measure, io::read_measure_csv(path).normalized(), {}};
  }
  fail(ErrorCode::FormatError, "unsupported input '" + path.string() + "' (expected .csv or .pgm)");
}

double resolve_lambda(const Flags& f, const CostMatrix& cost) {
  const double lambda = f.lambda > 0.0 ? f.lambda : f.rel_lambda * cost.max();
  if (!(lambda > 0.0)) {
    fail(ErrorCode::InvalidArgument, "lambda resolves to 0 (all costs are zero); pass --lambda");
  }
  return lambda;
}

SinkhornOptions sinkhorn_options(const Flags& f) {
  SinkhornOptions o;
  o.tol = f.tol;
  o.max_iter = f.max_iter;
  return o;
}

json base_report(const char* command) {
  return json{{"schema_version", kSchemaVersion}, {"command", command}};
}

void emit(const json& report, const Flags& f, std::ostream& out) {
  out << report.dump(2) << "\n";
  if (!f.report.empty()) io::write_text(f.report, report.dump(2) + "\n");
}

bool one_d(const Input& in) {
  return in.kind == Kind::Grid1 || (in.kind == Kind::Measure && in.measure.dim() == 1);
}

std::string auto_method(const Input& a, const Input& b) {
  if (one_d(a) && one_d(b)) return "exact1d";
  if (a.kind == Kind::Grid2 && b.kind == Kind::Grid2) return "sliced";
  return "lp";
}

// ---------------------------------------------------------------- distance

int cmd_distance(const Flags& f, std::ostream& out) {
  const Input a = load_input(f.inputs.at(0));
  const Input b = load_input(f.inputs.at(1));
  const std::string method = f.method == "auto" ? auto_method(a, b) : f.method;
  json report = base_report("distance");
  report["method"] = method;
  report["p"] = f.p;
  const Stopwatch clock;
  if (method == "exact1d") {
    if (!one_d(a) || !one_d(b)) fail(ErrorCode::DimensionError, "exact1d needs 1-D inputs");
    if (a.kind == Kind::Grid1 && b.kind == Kind::Grid1) {
      report["value"] = wasserstein_1d(a.grid, b.grid, f.p);
    } else {
      report["value"] = wasserstein_1d(a.measure, b.measure, f.p);
    }
  } else if (method == "lp") {
    const CostMatrix cost = cost_matrix(a.measure, b.measure, f.p);
    const TransportPlan plan = solve_lp(a.measure, b.measure, cost);
    report["value"] = std::pow(plan.total_cost, 1.0 / f.p);
    report["iterations"] = plan.iterations;
  } else if (method == "multiscale") {
    if (a.kind == Kind::Measure || b.kind == Kind::Measure) {
      fail(ErrorCode::InvalidArgument, "multiscale needs grid inputs");
    }
    const TransportPlan plan = solve_multiscale(a.grid, b.grid, f.p);
    report["value"] = std::pow(plan.total_cost, 1.0 / f.p);
    report["iterations"] = plan.iterations;
  } else if (method == "sinkhorn") {
    const CostMatrix cost = cost_matrix(a.measure, b.measure, f.p);
    const double lambda = resolve_lambda(f, cost);
    const SinkhornResult r = sinkhorn_solve(a.measure, b.measure, cost, lambda, sinkhorn_options(f));
    report["value"] = r.regularized_cost;
    report["transport_cost"] = r.transport_cost;
    report["entropy"] = r.entropy;
    report["lambda"] = lambda;
    report["marginal_residual"] = r.state.marginal_residual;
    report["iterations"] = r.state.iterations;
  } else if (method == "sliced") {
    if (a.kind != Kind::Grid2 || b.kind != Kind::Grid2) {
      fail(ErrorCode::DimensionError, "sliced needs two PGM images");
    }
    report["value"] = sliced_wasserstein(a.grid, b.grid, f.p, f.angles);
    report["angles"] = f.angles;
  } else {
    fail(ErrorCode::InvalidArgument, "unknown method '" + method + "'");
  }
  report["runtime_ms"] = clock.ms();
  emit(report, f, out);
  if (!f.out.empty()) io::write_text(f.out, report.dump(2) + "\n");
  return 0;
}

// -------------------------------------------------------------------- plan

int cmd_plan(const Flags& f, std::ostream& out) {
  const Input a = load_input(f.inputs.at(0));
  const Input b = load_input(f.inputs.at(1));
  const std::string method = f.method == "auto" ? (one_d(a) && one_d(b) ? "exact1d" : "lp") : f.method;
  json report = base_report("plan");
  report["method"] = method;
  report["p"] = f.p;
  const Stopwatch clock;
  TransportPlan plan;
  if (method == "exact1d") {
    if (!one_d(a) || !one_d(b)) fail(ErrorCode::DimensionError, "exact1d needs 1-D inputs");
    plan = monotone_plan_1d(a.measure, b.measure, f.p);
  } else if (method == "lp") {
    plan = solve_lp(a.measure, b.measure, cost_matrix(a.measure, b.measure, f.p));
  } else if (method == "auction") {
    plan = solve_auction(a.measure, b.measure, cost_matrix(a.measure, b.measure, f.p));
  } else if (method == "multiscale") {
    if (a.kind == Kind::Measure || b.kind == Kind::Measure) {
      fail(ErrorCode::InvalidArgument, "multiscale needs grid inputs");
    }
    plan = solve_multiscale(a.grid, b.grid, f.p);
  } else if (method == "sinkhorn") {
    const CostMatrix cost = cost_matrix(a.measure, b.measure, f.p);
    const double lambda = resolve_lambda(f, cost);
    SinkhornResult r = sinkhorn_solve(a.measure, b.measure, cost, lambda, sinkhorn_options(f));
    report["lambda"] = lambda;
    report["marginal_residual"] = r.state.marginal_residual;
    report["regularized_cost"] = r.regularized_cost;
    plan = std::move(r.plan);
  } else {
    fail(ErrorCode::InvalidArgument, "unknown method '" + method + "'");
  }
  report["runtime_ms"] = clock.ms();
  report["cost"] = plan.total_cost;
  report["iterations"] = plan.iterations;
  report["source_size"] = plan.source_size;
  report["target_size"] = plan.target_size;
  report["couplings"] = plan.couplings.size();
  if (method == "multiscale") {
    // grid plans index every cell, empty ones included
    report["marginal_error"] = marginal_error(plan, to_measure(a.grid, true), to_measure(b.grid, true));
  } else {
    report["marginal_error"] = marginal_error(plan, a.measure, b.measure);
  }
  if (!f.out.empty()) io::write_plan_csv(f.out, plan);
  emit(report, f, out);
  return 0;
}

// ---------------------------------------------------------------- retrieve

// Histogram values of a 1-D measure on the union of two supports.
double lp_norm_on_union(const DiscreteMeasure& a, const DiscreteMeasure& b, double q) {
  std::map<double, std::pair<double, double>> bins;
  for (std::size_t i = 0; i < a.size(); ++i) bins[a.point(i)[0]].first += a.weight(i);
  for (std::size_t j = 0; j < b.size(); ++j) bins[b.point(j)[0]].second += b.weight(j);
  double sum = 0.0;
  for (const auto& [x, w] : bins) sum += std::pow(std::abs(w.first - w.second), q);
  return std::pow(sum, 1.0 / q);
}

struct Ranked {
  std::string file;
  double distance;
};

std::vector<Ranked> rank(std::vector<Ranked> items) {
  // ties (to 1e-12) are broken by file name
  auto key = [](double d) { return std::round(d * 1e12); };
  std::sort(items.begin(), items.end(), [&](const Ranked& x, const Ranked& y) {
    const double kx = key(x.distance);
    const double ky = key(y.distance);
    return kx != ky ? kx < ky : x.file < y.file;
  });
  return items;
}

json ranking_json(const std::vector<Ranked>& items, std::size_t k) {
  json arr = json::array();
  for (std::size_t r = 0; r < std::min(k, items.size()); ++r) {
    arr.push_back({{"rank", r + 1}, {"file", items[r].file}, {"distance", items[r].distance}});
  }
  return arr;
}

int cmd_retrieve(const Flags& f, std::ostream& out, std::ostream& err) {
  const fs::path query_path = f.inputs.at(0);
  const fs::path corpus_dir = f.inputs.at(1);
  if (!fs::is_directory(corpus_dir)) {
    fail(ErrorCode::IoError, "'" + corpus_dir.string() + "' is not a directory");
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(corpus_dir)) {
    if (entry.is_regular_file() && lower_ext(entry.path()) == ".csv") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) fail(ErrorCode::EmptyCorpus, "no .csv histograms in '" + corpus_dir.string() + "'");
  if (f.k == 0) fail(ErrorCode::InvalidArgument, "k must be positive");

  const std::string method = f.method == "auto" ? "exact1d" : f.method;
  const Input query = load_input(query_path);
  if (!one_d(query)) fail(ErrorCode::DimensionError, "retrieve works on 1-D histograms");
  const Stopwatch clock;
  std::vector<Ranked> by_method;
  std::vector<Ranked> by_l1;
  std::vector<Ranked> by_l2;
  for (const auto& file : files) {
    const Input item = load_input(file);
    if (!one_d(item)) fail(ErrorCode::DimensionError, "'" + file.string() + "' is not 1-D");
    double d = 0.0;
    if (method == "exact1d") {
      d = wasserstein_1d(query.measure, item.measure, f.p);
    } else if (method == "lp") {
      d = std::pow(solve_lp(query.measure, item.measure, cost_matrix(query.measure, item.measure, f.p))
                       .total_cost,
                   1.0 / f.p);
    } else if (method == "sinkhorn") {
      const CostMatrix cost = cost_matrix(query.measure, item.measure, f.p);
      d = sinkhorn_solve(query.measure, item.measure, cost, resolve_lambda(f, cost),
                         sinkhorn_options(f))
              .transport_cost;
    } else {
      fail(ErrorCode::InvalidArgument, "unknown method '" + method + "'");
    }
    const std::string name = file.filename().string();
    by_method.push_back({name, d});
    by_l1.push_back({name, lp_norm_on_union(query.measure, item.measure, 1.0)});
    by_l2.push_back({name, lp_norm_on_union(query.measure, item.measure, 2.0)});
  }
  json report = base_report("retrieve");
  report["method"] = method;
  report["query"] = query_path.filename().string();
  report["k"] = f.k;
  report["corpus_size"] = files.size();
  if (f.k > files.size()) {
    const std::string warning = "k = " + std::to_string(f.k) + " exceeds the corpus size " +
                                std::to_string(files.size()) + "; returning the full ranking";
    err << "otkit: warning: " << warning << "\n";
    report["warning"] = warning;
  }
  report["results"] = ranking_json(rank(by_method), f.k);
  report["l1"] = ranking_json(rank(by_l1), f.k);
  report["l2"] = ranking_json(rank(by_l2), f.k);
  report["runtime_ms"] = clock.ms();
  emit(report, f, out);
  if (!f.out.empty()) io::write_text(f.out, report.dump(2) + "\n");
  return 0;
}

// ------------------------------------------------------------------- morph

MorphSolver morph_solver(const std::string& method, bool& forced) {
  forced = method != "auto";
  if (method == "auto" || method == "lp") return MorphSolver::Lp;
  if (method == "sinkhorn") return MorphSolver::Entropic;
  if (method == "exact1d") return MorphSolver::Exact1d;
  fail(ErrorCode::InvalidArgument, "unknown morph method '" + method + "'");
}

int cmd_morph(const Flags& f, std::ostream& out) {
  if (f.out.empty()) fail(ErrorCode::InvalidArgument, "morph needs --out DIR");
  const fs::path src_path = f.inputs.at(0);
  const fs::path dst_path = f.inputs.at(1);
  const bool images = lower_ext(src_path) == ".pgm";
  io::GrayImage src_image;
  GridDensity source;
  GridDensity target;
  if (images) {
    src_image = io::read_pgm(src_path);
    source = unit_mass(io::to_grid(src_image));
    target = unit_mass(io::to_grid(io::read_pgm(dst_path)));
  } else {
    source = unit_mass(io::read_grid_csv(src_path));
    target = unit_mass(io::read_grid_csv(dst_path));
  }
  MorphOptions options;
  options.solver = morph_solver(f.method, options.force_solver);
  options.rel_lambda = f.rel_lambda;
  options.max_atoms = f.max_atoms;
  const Stopwatch clock;
  const GeodesicPath path = morph(source, target, f.frames, options);
  const double runtime = clock.ms();

  const fs::path dir = f.out;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail(ErrorCode::IoError, "cannot create '" + dir.string() + "': " + ec.message());

  // Frames are written in the source's intensity units, so frame 0
  // reproduces the source raster.
  double source_total = 0.0;
  for (std::uint32_t v : src_image.pixels) source_total += v;
  json frames = json::array();
  for (std::size_t k = 0; k < path.samples.size(); ++k) {
    const GeodesicFrame& frame = path.samples[k];
    char name[32];
    std::snprintf(name, sizeof name, "frame_%03zu%s", k, images ? ".pgm" : ".csv");
    if (images) {
      io::GrayImage img{src_image.width, src_image.height, src_image.maxval, {}};
      std::vector<double> raw(frame.density.size());
      double peak = 0.0;
      for (std::size_t c = 0; c < raw.size(); ++c) {
        raw[c] = frame.density.values[c] * frame.density.cell_volume() * source_total;
        peak = std::max(peak, raw[c]);
      }
      double scale = 1.0;
      if (peak > 65535.0) scale = 65535.0 / peak;
      img.maxval = std::max<std::uint32_t>(
          src_image.maxval, static_cast<std::uint32_t>(std::min(65535.0, std::ceil(peak * scale - 1e-9))));
      img.pixels.resize(raw.size());
      for (std::size_t c = 0; c < raw.size(); ++c) {
        img.pixels[c] = static_cast<std::uint32_t>(std::min<double>(img.maxval, std::lround(raw[c] * scale)));
      }
      io::write_pgm(dir / name, img);
    } else {
      io::write_grid_csv(dir / name, frame.density);
    }
    frames.push_back({{"index", k},
                      {"t", frame.t},
                      {"file", name},
                      {"atoms", frame.measure.size()},
                      {"mass", frame.density.mass()}});
  }
  json report = base_report("morph");
  report["solver"] = path.solver;
  report["cost"] = path.plan.total_cost;
  report["source_atoms"] = path.source.size();
  report["target_atoms"] = path.target.size();
  report["frames"] = frames;
  report["runtime_ms"] = runtime;
  io::write_text(dir / "path.json", report.dump(2) + "\n");
  emit(report, f, out);
  return 0;
}

// ------------------------------------------------------------------- color

std::vector<double> channel_histogram(const std::vector<std::uint8_t>& pixels, std::size_t stride,
                                      std::size_t c) {
  std::vector<double> h(256, 0.0);
  const std::size_t n = pixels.size() / stride;
  for (std::size_t i = 0; i < n; ++i) h[pixels[stride * i + c]] += 1.0 / static_cast<double>(n);
  return h;
}

double l1(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += std::abs(a[k] - b[k]);
  return s;
}

std::vector<double> to_8bit(const io::GrayImage& img) {
  std::vector<double> v(img.pixels.size());
  for (std::size_t k = 0; k < v.size(); ++k) {
    v[k] = std::round(255.0 * img.pixels[k] / static_cast<double>(img.maxval));
  }
  return v;
}

int cmd_color(const Flags& f, std::ostream& out) {
  if (f.out.empty()) fail(ErrorCode::InvalidArgument, "color needs --out FILE");
  const fs::path src_path = f.inputs.at(0);
  const fs::path dst_path = f.inputs.at(1);
  json report = base_report("color");
  const Stopwatch clock;
  if (lower_ext(src_path) == ".pgm") {
    const io::GrayImage src = io::read_pgm(src_path);
    const io::GrayImage dst = io::read_pgm(dst_path);
    const std::vector<double> values = to_8bit(src);
    const std::vector<double> target = to_8bit(dst);
    const auto mapped = transfer_1d(gray_histogram(values), gray_histogram(target), values);
    io::GrayImage result{src.width, src.height, 255, std::vector<std::uint32_t>(mapped.size())};
    std::vector<std::uint8_t> bytes(mapped.size());
    std::vector<std::uint8_t> target_bytes(target.begin(), target.end());
    for (std::size_t k = 0; k < mapped.size(); ++k) {
      result.pixels[k] = static_cast<std::uint32_t>(std::lround(std::clamp(mapped[k], 0.0, 255.0)));
      bytes[k] = static_cast<std::uint8_t>(result.pixels[k]);
    }
    io::write_pgm(f.out, result);
    report["mode"] = "gray";
    report["histogram_l1"] = l1(channel_histogram(bytes, 1, 0), channel_histogram(target_bytes, 1, 0));
  } else {
    const RgbImage src = io::read_ppm(src_path);
    const RgbImage dst = io::read_ppm(dst_path);
    ColorTransferOptions options;
    options.n_directions = f.directions;
    options.n_sweeps = f.sweeps;
    options.smooth = f.smooth;
    options.smooth_radius = f.smooth_radius;
    options.seed = f.seed;
    const RgbImage result = transfer_color(src, dst, options);
    io::write_ppm(f.out, result);
    report["mode"] = "rgb";
    report["sweeps"] = options.n_sweeps;
    report["directions"] = options.n_directions;
    report["smooth"] = options.smooth;
    report["seed"] = options.seed;
    json per_channel = json::array();
    for (std::size_t c = 0; c < 3; ++c) {
      per_channel.push_back(l1(channel_histogram(result.pixels, 3, c), channel_histogram(dst.pixels, 3, c)));
    }
    report["histogram_l1"] = per_channel;
  }
  report["runtime_ms"] = clock.ms();
  emit(report, f, out);
  return 0;
}

// --------------------------------------------------------------------- cdt

bool is_cdt_file(const fs::path& path) {
  if (!io::is_grid_csv(path)) return false;
  const std::string text = io::read_text(path);
  return text.rfind("x,reference,value", 0) == 0;
}

int cmd_cdt(const Flags& f, std::ostream& out) {
  json report = base_report("cdt");
  report["action"] = f.action;
  const Stopwatch clock;
  if (f.action == "forward") {
    if (f.inputs.size() != 1) fail(ErrorCode::InvalidArgument, "cdt forward takes one signal");
    if (f.reference.empty()) fail(ErrorCode::InvalidArgument, "cdt forward needs --reference");
    if (f.out.empty()) fail(ErrorCode::InvalidArgument, "cdt forward needs --out FILE");
    const GridDensity signal = cdt_prepare(io::read_grid_csv(f.inputs[0]), f.eps_floor);
    const GridDensity reference = cdt_prepare(io::read_grid_csv(f.reference), f.eps_floor);
    const CdtSignal t = cdt_forward(signal, reference);
    io::write_cdt_csv(f.out, t, fs::path(f.reference).filename().string());
    double norm = 0.0;
    for (double v : t.values) norm += v * v * t.reference.spacing[0];
    report["norm"] = std::sqrt(norm);
  } else if (f.action == "inverse") {
    if (f.inputs.size() != 1) fail(ErrorCode::InvalidArgument, "cdt inverse takes one transform");
    if (f.out.empty()) fail(ErrorCode::InvalidArgument, "cdt inverse needs --out FILE");
    const GridDensity signal = cdt_inverse(io::read_cdt_csv(f.inputs[0]));
    io::write_grid_csv(f.out, signal);
    report["cells"] = signal.size();
  } else if (f.action == "distance") {
    if (f.inputs.size() != 2) fail(ErrorCode::InvalidArgument, "cdt distance takes two inputs");
    CdtSignal a;
    CdtSignal b;
    if (is_cdt_file(f.inputs[0]) && is_cdt_file(f.inputs[1])) {
      a = io::read_cdt_csv(f.inputs[0]);
      b = io::read_cdt_csv(f.inputs[1]);
    } else {
      const GridDensity x = cdt_prepare(io::read_grid_csv(f.inputs[0]), f.eps_floor);
      const GridDensity y = cdt_prepare(io::read_grid_csv(f.inputs[1]), f.eps_floor);
      const GridDensity reference = f.reference.empty()
                                        ? average_reference({x, y})
                                        : cdt_prepare(io::read_grid_csv(f.reference), f.eps_floor);
      a = cdt_forward(x, reference);
      b = cdt_forward(y, reference);
    }
    report["value"] = cdt_distance(a, b);
  } else {
    fail(ErrorCode::InvalidArgument, "cdt action must be forward, inverse or distance");
  }
  report["runtime_ms"] = clock.ms();
  emit(report, f, out);
  return 0;
}

// ---------------------------------------------------------------- radoncdt

int cmd_radoncdt(const Flags& f, std::ostream& out) {
  json report = base_report("radoncdt");
  report["action"] = f.action;
  report["angles"] = f.angles;
  const Stopwatch clock;
  auto image = [](const std::string& p) { return unit_mass(io::to_grid(io::read_pgm(p))); };
  if (f.action == "forward") {
    if (f.inputs.size() != 1) fail(ErrorCode::InvalidArgument, "radoncdt forward takes one image");
    if (f.reference.empty()) fail(ErrorCode::InvalidArgument, "radoncdt forward needs --reference");
    const RadonCdtImage t =
        radon_cdt_forward(image(f.inputs[0]), image(f.reference), f.angles, f.eps_floor);
    if (!f.out.empty()) {
      Sinogram stack{t.reference_sinogram.angles, {}};
      for (const auto& s : t.values) {
        GridDensity g = s.reference;
        g.values = s.values;
        stack.profiles.push_back(std::move(g));
      }
      io::write_sinogram_csv(f.out, stack);
    }
    double sq = 0.0;
    for (const auto& s : t.values) {
      for (double v : s.values) sq += v * v * s.reference.spacing[0];
    }
    report["norm"] = std::sqrt(sq / static_cast<double>(t.values.size()));
  } else if (f.action == "distance") {
    if (f.inputs.size() != 2) fail(ErrorCode::InvalidArgument, "radoncdt distance takes two images");
    const GridDensity a = image(f.inputs[0]);
    const GridDensity b = image(f.inputs[1]);
    const GridDensity templ = f.reference.empty() ? average_reference({a, b}) : image(f.reference);
    report["value"] = radon_cdt_distance(radon_cdt_forward(a, templ, f.angles, f.eps_floor),
                                         radon_cdt_forward(b, templ, f.angles, f.eps_floor));
  } else if (f.action == "sinogram") {
    if (f.inputs.size() != 1) fail(ErrorCode::InvalidArgument, "radoncdt sinogram takes one image");
    if (f.out.empty()) fail(ErrorCode::InvalidArgument, "radoncdt sinogram needs --out FILE");
    io::write_sinogram_csv(f.out, radon(image(f.inputs[0]), f.angles));
  } else {
    fail(ErrorCode::InvalidArgument, "radoncdt action must be forward, distance or sinogram");
  }
  report["runtime_ms"] = clock.ms();
  emit(report, f, out);
  return 0;
}

// ------------------------------------------------------------------- bench

int cmd_bench(const Flags& f, std::ostream& out, std::ostream& err) {
  BenchConfig config;
  config.sizes = f.sizes;
  config.methods = f.methods;
  config.repetitions = std::max<std::size_t>(1, f.reps);
  config.seed = f.seed;
  config.rel_lambda = f.rel_lambda;
  config.tol = f.bench_tol;
  config.timeout_ms = f.timeout_ms;
  for (std::size_t k = 1; k < config.sizes.size(); ++k) {
    if (config.sizes[k] <= config.sizes[k - 1]) {
      fail(ErrorCode::InvalidArgument, "bench sizes must be strictly increasing");
    }
  }
  const BenchSummary summary = run_bench(config);
  std::ostringstream csv;
  csv << "method,n,wall_ms,cost,residual,iterations,timed_out\n";
  json records = json::array();
  for (const auto& r : summary.records) {
    csv << r.method << "," << r.n << "," << r.wall_ms << "," << r.cost << "," << r.residual << ","
        << r.iterations << "," << (r.timed_out ? 1 : 0) << "\n";
    records.push_back({{"method", r.method},
                       {"n", r.n},
                       {"wall_ms", r.wall_ms},
                       {"cost", r.cost},
                       {"residual", r.residual},
                       {"iterations", r.iterations},
                       {"timed_out", r.timed_out}});
  }
  if (!f.out.empty()) io::write_text(f.out, csv.str());
  json report = base_report("bench");
  report["records"] = records;
  report["slopes"] = summary.slopes;
  report["ordering_holds"] = summary.ordering_holds;
  emit(report, f, out);
  if (!summary.ordering_holds) {
    err << "otkit: bench ordering slope(lp) > slope(sinkhorn) does not hold\n";
    return 3;
  }
  return 0;
}

int exit_code(ErrorCode code) {
  switch (category(code)) {
    case ErrorCategory::Usage: return 1;
    case ErrorCategory::Io: return 2;
    case ErrorCategory::Numeric: return 3;
  }
  return 3;
}

}  // namespace

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = std::min(x.size(), y.size());
  if (n < 2) return std::numeric_limits<double>::quiet_NaN();
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    mx += std::log(x[k]);
    my += std::log(y[k]);
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double dx = std::log(x[k]) - mx;
    sxy += dx * (std::log(y[k]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

BenchSummary run_bench(const BenchConfig& config) {
  BenchSummary summary;
  for (const std::string& method : config.methods) {
    if (method != "lp" && method != "sinkhorn" && method != "auction") {
      fail(ErrorCode::InvalidArgument, "bench method must be lp, sinkhorn or auction");
    }
  }
  for (const std::string& method : config.methods) {
    std::vector<double> sizes;
    std::vector<double> times;
    bool skipping = false;
    for (std::size_t n : config.sizes) {
      BenchRecord rec;
      rec.method = method;
      rec.n = n;
      if (skipping) {
        rec.timed_out = true;
        summary.records.push_back(rec);
        continue;
      }
      std::mt19937_64 rng(config.seed + n);
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      std::vector<double> xs(2 * n);
      std::vector<double> ys(2 * n);
      for (double& v : xs) v = unit(rng);
      for (double& v : ys) v = unit(rng);
      const DiscreteMeasure mu = DiscreteMeasure::uniform(2, xs);
      const DiscreteMeasure nu = DiscreteMeasure::uniform(2, ys);
      const CostMatrix cost = cost_matrix(mu, nu, 2.0);
      double best = std::numeric_limits<double>::infinity();
      TransportPlan plan;
      for (std::size_t rep = 0; rep < config.repetitions; ++rep) {
        const Stopwatch clock;
        if (method == "lp") {
          plan = solve_lp(mu, nu, cost);
        } else if (method == "auction") {
          plan = solve_auction(mu, nu, cost);
        } else {
          SinkhornOptions o;
          o.tol = config.tol;
          plan = sinkhorn_solve(mu, nu, cost, config.rel_lambda * cost.max(), o).plan;
        }
        best = std::min(best, clock.ms());
      }
      rec.wall_ms = best;
      rec.cost = plan.total_cost;
      rec.iterations = plan.iterations;
      rec.residual = marginal_error(plan, mu, nu);
      rec.timed_out = best > config.timeout_ms;
      skipping = rec.timed_out;
      summary.records.push_back(rec);
      sizes.push_back(static_cast<double>(n));
      times.push_back(std::max(best, 1e-6));
    }
    summary.slopes[method] = loglog_slope(sizes, times);
  }
  if (summary.slopes.count("lp") && summary.slopes.count("sinkhorn")) {
    summary.ordering_holds = summary.slopes["lp"] > summary.slopes["sinkhorn"];
  }
  return summary;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Optimal transport toolkit", "otkit"};
  app.require_subcommand(1);
  Flags f;

  auto inputs = [&](CLI::App* sub, std::size_t count, const char* what) {
    sub->add_option("inputs", f.inputs, what)->required()->expected(static_cast<int>(count));
  };
  auto solver_flags = [&](CLI::App* sub) {
    sub->add_option("--p", f.p, "Cost exponent p >= 1")->capture_default_str();
    auto* lam = sub->add_option("--lambda", f.lambda, "Entropic regularization (cost units)");
    sub->add_option("--rel-lambda", f.rel_lambda, "Entropic regularization as a fraction of max cost")
        ->capture_default_str()
        ->excludes(lam);
    sub->add_option("--tol", f.tol, "Sinkhorn marginal tolerance")->capture_default_str();
    sub->add_option("--max-iter", f.max_iter, "Sinkhorn iteration cap")->capture_default_str();
  };
  auto output = [&](CLI::App* sub, const char* what) { return sub->add_option("--out", f.out, what); };
  auto report = [&](CLI::App* sub) {
    sub->add_option("--report", f.report, "Also write the JSON report to this file");
  };

  auto* distance = app.add_subcommand("distance", "Transport distance between two inputs");
  inputs(distance, 2, "Two inputs: .csv measures or grids, or .pgm images");
  distance->add_option("--method", f.method, "auto, exact1d, lp, multiscale, sinkhorn or sliced")
      ->capture_default_str();
  solver_flags(distance);
  distance->add_option("--angles", f.angles, "Radon angles for sliced")->capture_default_str();
  output(distance, "Write the JSON report to this file");
  report(distance);

  auto* plan = app.add_subcommand("plan", "Transport plan between two inputs");
  inputs(plan, 2, "Source and target");
  plan->add_option("--method", f.method, "auto, exact1d, lp, auction, multiscale or sinkhorn")
      ->capture_default_str();
  solver_flags(plan);
  output(plan, "Write the plan as i,j,mass CSV");
  report(plan);

  auto* retrieve = app.add_subcommand("retrieve", "Rank a corpus of 1-D histograms against a query");
  inputs(retrieve, 2, "Query file and corpus directory");
  retrieve->add_option("--method", f.method, "exact1d, lp or sinkhorn")->capture_default_str();
  retrieve->add_option("--k", f.k, "Number of results")->capture_default_str();
  solver_flags(retrieve);
  output(retrieve, "Write the JSON report to this file");
  report(retrieve);

  auto* morph_cmd = app.add_subcommand("morph", "Displacement interpolation frames");
  inputs(morph_cmd, 2, "Source and target (.pgm images or 1-D grid .csv)");
  morph_cmd->add_option("--method", f.method, "auto, exact1d, lp or sinkhorn")->capture_default_str();
  morph_cmd->add_option("--frames", f.frames, "Number of frames (>= 2)")->capture_default_str();
  morph_cmd->add_option("--rel-lambda", f.rel_lambda, "Entropic lambda as a fraction of max cost")
      ->capture_default_str();
  morph_cmd->add_option("--max-atoms", f.max_atoms, "Atom cap per side for images")->capture_default_str();
  output(morph_cmd, "Output directory")->required();
  report(morph_cmd);

  auto* color = app.add_subcommand("color", "Color (.ppm) or grayvalue (.pgm) transfer");
  inputs(color, 2, "Source and target images");
  color->add_option("--sweeps", f.sweeps, "Sliced sweeps")->capture_default_str();
  color->add_option("--directions", f.directions, "Directions per sweep")->capture_default_str();
  color->add_option("--seed", f.seed, "Direction generator seed")->capture_default_str();
  color->add_flag("--smooth", f.smooth, "Box-filter the color displacement field");
  color->add_option("--smooth-radius", f.smooth_radius, "Box filter radius (pixels)")->capture_default_str();
  output(color, "Output image")->required();
  report(color);

  auto* cdt = app.add_subcommand("cdt", "Cumulative distribution transform of 1-D grid signals");
  cdt->add_option("action", f.action, "forward, inverse or distance")->required();
  cdt->add_option("inputs", f.inputs, "Signal or transform files")->required();
  cdt->add_option("--reference", f.reference, "Reference grid CSV");
  cdt->add_option("--eps-floor", f.eps_floor, "Positivity floor relative to the max value")
      ->capture_default_str();
  output(cdt, "Output file");
  report(cdt);

  auto* radoncdt = app.add_subcommand("radoncdt", "Radon-CDT of PGM images");
  radoncdt->add_option("action", f.action, "forward, distance or sinogram")->required();
  radoncdt->add_option("inputs", f.inputs, "Images")->required();
  radoncdt->add_option("--reference", f.reference, "Template image");
  radoncdt->add_option("--angles", f.angles, "Radon angles")->capture_default_str();
  radoncdt->add_option("--eps-floor", f.eps_floor, "Profile floor relative to the profile max")
      ->capture_default_str();
  output(radoncdt, "Output CSV (angles as columns)");
  report(radoncdt);

  auto* bench = app.add_subcommand("bench", "Runtime scaling of the discrete solvers");
  bench->add_option("--sizes", f.sizes, "Problem sizes N")->delimiter(',')->capture_default_str();
  bench->add_option("--methods", f.methods, "lp, sinkhorn, auction")->delimiter(',')->capture_default_str();
  bench->add_option("--reps", f.reps, "Repetitions per cell (minimum time kept)")->capture_default_str();
  bench->add_option("--seed", f.seed, "Instance seed")->capture_default_str();
  bench->add_option("--rel-lambda", f.rel_lambda, "Sinkhorn lambda as a fraction of max cost")
      ->capture_default_str();
  bench->add_option("--tol", f.bench_tol, "Sinkhorn tolerance")->capture_default_str();
  bench->add_option("--timeout-ms", f.timeout_ms, "Per-cell time limit")->capture_default_str();
  output(bench, "Write the records as CSV");
  report(bench);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "otkit: " << e.what() << "\n";
    return 1;
  }

  try {
    if (distance->parsed()) return cmd_distance(f, out);
    if (plan->parsed()) return cmd_plan(f, out);
    if (retrieve->parsed()) return cmd_retrieve(f, out, err);
    if (morph_cmd->parsed()) return cmd_morph(f, out);
    if (color->parsed()) return cmd_color(f, out);
    if (cdt->parsed()) return cmd_cdt(f, out);
    if (radoncdt->parsed()) return cmd_radoncdt(f, out);
    if (bench->parsed()) return cmd_bench(f, out, err);
  } catch (const Error& e) {
    err << "otkit: " << e.what() << "\n";
    return exit_code(e.code());
  } catch (const fs::filesystem_error& e) {
    err << "otkit: IoError: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "otkit: " << e.what() << "\n";
    return 3;
  }
  return 1;
}

}  // namespace otkit::cli
