#include "cli.hpp"

#include <alphacf/density.hpp>
#include <alphacf/entropy.hpp>
#include <alphacf/error.hpp>
#include <alphacf/maps.hpp>
#include <alphacf/natext.hpp>
#include <alphacf/symbolic.hpp>
#include <fmt/format.h>

#include <CLI11.hpp>
#include <chrono>
#include <fstream>
#include <functional>
#include <json.hpp>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace alphacf::cli {

namespace {

struct Common {
  unsigned threads = 0;
  std::string format = "csv";
  std::string out_path;
};

struct Sink {
  std::ostream& fallback;
  std::ofstream file;
  std::ostream* stream;

  Sink(const std::string& path, std::ostream& out) : fallback(out), stream(&out) {
    if (!path.empty()) {
      file.open(path, std::ios::binary);
      if (!file) throw Error(ErrorCode::ParseError, "cannot open output file " + path);
      stream = &file;
    }
  }
  void write(const std::string& s) { *stream << s; }
};

void write_file(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::ParseError, "cannot open output file " + path);
  f << text;
}

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--threads", c.threads, "Worker threads (0: one per core)");
  sub->add_option("--format", c.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
  sub->add_option("--out", c.out_path, "Write results to this file instead of stdout");
}

class Progress {
 public:
  Progress(std::ostream& err, std::size_t total) : err_(err), total_(total), t0_(Clock::now()) {}
  void tick(std::size_t done, double alpha) {
    const double s = std::chrono::duration<double>(Clock::now() - t0_).count();
    err_ << fmt::format("row {}/{} alpha={:.6f} ({:.2f} rows/s)\n", done, total_, alpha,
                        s > 0 ? static_cast<double>(done) / s : 0.0);
  }

 private:
  using Clock = std::chrono::steady_clock;
  std::ostream& err_;
  std::size_t total_;
  Clock::time_point t0_;
};

// --- entropy ---------------------------------------------------------------

struct EntropyArgs {
  double alpha = 0.5;
  double alpha_min = 0.0;
  double alpha_max = 1.0;
  std::size_t steps = 1;
  std::size_t n = 10000;
  std::size_t N = 10000;
  std::uint64_t seed = kDefaultSeed;
  std::vector<std::size_t> n_values{500, 2000, 8000, 32000};
};

int emit_rows(const std::vector<EntropyEstimate>& rows, const Common& c, std::ostream& out) {
  Sink sink(c.out_path, out);
  if (c.format == "json") {
    sink.write(entropy_json(rows) + "\n");
  } else {
    sink.write(entropy_csv_header());
    for (const auto& r : rows) sink.write(entropy_csv_row(r));
  }
  return kOk;
}

int run_scan(double lo, double hi, const EntropyArgs& a, const Common& c, std::ostream& out,
             std::ostream& err) {
  if (a.steps == 0) throw Error(ErrorCode::ParseError, "--steps must be positive");
  if (a.N < 2) throw Error(ErrorCode::ParseError, "--ensemble must be at least 2");
  if (a.n == 0) throw Error(ErrorCode::ParseError, "--n must be positive");
  if (!(lo > 0.0 && hi <= 1.0 && (lo < hi || a.steps == 1))) {
    throw Error(ErrorCode::ParseError, fmt::format("alpha range [{}, {}] must satisfy 0 < min < max <= 1", lo, hi));
  }
  std::vector<EntropyEstimate> rows;
  Progress progress(err, a.steps);
  for (std::size_t k = 0; k < a.steps; ++k) {
    auto row = entropy_scan_row(lo, hi, a.steps, k, a.n, a.N, a.seed, {c.threads});
    rows.push_back(row);
    progress.tick(k + 1, row.alpha);
  }
  return emit_rows(rows, c, out);
}

// --- density ---------------------------------------------------------------

struct DensityArgs {
  std::optional<double> alpha;
  std::optional<int> r;
  std::string method = "ulam";
  std::size_t bins = 4096;
  std::size_t iters = 10000;
  double tol = 1e-10;
  int depth = 8;
  std::size_t points = 1000;
  std::string sidecar;
};

int run_density(const DensityArgs& a, const Common& c, std::ostream& out) {
  if (a.alpha.has_value() == a.r.has_value()) {
    throw Error(ErrorCode::ParseError, "density: give exactly one of --alpha and --r");
  }
  const double alpha = a.alpha ? *a.alpha : 1.0 / *a.r;
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw Error(ErrorCode::ParseError, fmt::format("density: alpha = {} outside (0, 1]", alpha));
  }
  Density d;
  if (a.method == "ulam") {
    UlamOptions opt;
    opt.bins = a.bins;
    opt.max_iters = a.iters;
    opt.tol = a.tol;
    opt.par = {c.threads};
    d = ulam_density(AlphaContext(alpha), opt);
  } else if (a.method == "closed") {
    d = closed_form_density(alpha);
  } else {
    const auto r = a.r ? a.r : AlphaContext(alpha).one_over_r();
    if (!r) {
      throw Error(ErrorCode::UnsupportedAlpha,
                  fmt::format("series density needs alpha = 1/r, got {}", alpha));
    }
    d = series_density_one_over_r(*r, a.depth);
  }
  Sink sink(c.out_path, out);
  if (c.format == "json") {
    sink.write(density_json(d) + "\n");
    return kOk;
  }
  sink.write(density_csv(d, a.points));
  std::string sidecar = a.sidecar;
  if (sidecar.empty() && !c.out_path.empty()) sidecar = c.out_path + ".json";
  if (!sidecar.empty()) write_file(sidecar, density_json(d) + "\n");
  return kOk;
}

// --- natext ----------------------------------------------------------------

struct NatextArgs {
  std::optional<int> r;
  std::optional<double> alpha;
  bool prop1 = false;
  int depth = 12;
  double min_width = kDefaultMinWidth;
  std::size_t samples = 100000;
  int bins = 20;
  std::uint64_t seed = kDefaultSeed;
  std::string check = "all";
  std::string points_out;
  std::string summary_out;
};

struct CheckLine {
  std::string check;
  std::string metric;
  double value;
  double threshold;
  bool pass;
};

constexpr double kOverlapThreshold = 1e-6;
constexpr double kCoveredThreshold = 0.95;

int run_natext(const NatextArgs& a, const Common& c, std::ostream& out, std::ostream& err) {
  NatExtDomain dom;
  if (a.prop1) {
    if (!a.alpha) throw Error(ErrorCode::ParseError, "natext --prop1 needs --alpha");
    dom = prop1_domain(*a.alpha);
  } else {
    int r = 0;
    if (a.r) {
      r = *a.r;
    } else if (a.alpha) {
      const auto one = AlphaContext(*a.alpha).one_over_r();
      if (!one) {
        throw Error(ErrorCode::UnsupportedAlpha,
                    fmt::format("natext needs alpha = 1/r or --prop1, got {}", *a.alpha));
      }
      r = *one;
    } else {
      throw Error(ErrorCode::ParseError, "natext: give --r or --alpha");
    }
    if (a.depth < 2) throw Error(ErrorCode::ParseError, "natext: --depth must be at least 2");
    dom = build_domain(r, a.depth, a.min_width);
  }
  const Parallelism par{c.threads};
  const bool all = a.check == "all";
  std::vector<CheckLine> lines;

  if (!a.summary_out.empty()) write_file(a.summary_out, domain_summary_json(dom) + "\n");
  if (!a.points_out.empty()) {
    const auto ks = sample_K(dom, a.samples, a.seed, par);
    std::string csv = "x,y\n";
    for (const auto& p : ks.points) csv += fmt::format("{:.17g},{:.17g}\n", p.x, p.y);
    write_file(a.points_out, csv);
    err << fmt::format("sampled {} points, acceptance {:.4f}\n", ks.points.size(), ks.acceptance());
  }
  if (all || a.check == "invariance") {
    const auto inv = check_invariance(dom, a.samples, a.bins, a.seed, par);
    lines.push_back({"invariance", "distance", inv.distance, inv.threshold, inv.distance <= inv.threshold});
    lines.push_back({"invariance", "outside", static_cast<double>(inv.outside), 0.0, inv.outside == 0});
  }
  if (all || a.check == "injectivity") {
    const auto inj = check_injectivity(dom, a.samples, a.seed, par);
    lines.push_back({"injectivity", "collisions", static_cast<double>(inj.collisions()), 0.0,
                     inj.collisions() == 0});
  }
  if ((all || a.check == "complementarity") && !a.prop1) {
    const auto cm = complementarity_check(dom.r, dom.depth, a.min_width);
    lines.push_back({"complementarity", "overlap", cm.overlap_measure, kOverlapThreshold,
                     cm.overlap_measure < kOverlapThreshold});
    const double frac = cm.covered_measure / cm.target;
    lines.push_back({"complementarity", "covered_fraction", frac, kCoveredThreshold,
                     frac >= kCoveredThreshold});
  } else if (a.check == "complementarity") {
    throw Error(ErrorCode::ParseError, "natext: the complementarity check needs --r");
  }

  bool pass = true;
  Sink sink(c.out_path, out);
  if (c.format == "json") {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& l : lines) {
      j.push_back({{"check", l.check},
                   {"metric", l.metric},
                   {"value", l.value},
                   {"threshold", l.threshold},
                   {"pass", l.pass}});
    }
    sink.write(j.dump(2) + "\n");
  } else {
    sink.write("check,metric,value,threshold,pass\n");
    for (const auto& l : lines) {
      sink.write(fmt::format("{},{},{:.17g},{:.17g},{}\n", l.check, l.metric, l.value, l.threshold,
                             l.pass ? 1 : 0));
    }
  }
  for (const auto& l : lines) {
    if (!l.pass) {
      pass = false;
      err << fmt::format("check failed: {} {} = {:.6g} (threshold {:.6g})\n", l.check, l.metric,
                         l.value, l.threshold);
    }
  }
  return pass ? kOk : kCheckFailed;
}

// --- reflect / orbit -------------------------------------------------------

int run_reflect(const std::string& text, const std::string& form, const Common& c,
                std::ostream& out) {
  const auto seq = parse_by_excess(text);
  const auto refl =
      reflect_traced(seq, form == "terminal" ? ReflectForm::Terminal : ReflectForm::Compact);
  const double v = eval_by_excess(seq);
  const double w = eval_by_excess(refl.seq);
  std::string rules;
  for (int r : refl.rules) rules += std::to_string(r);
  Sink sink(c.out_path, out);
  if (c.format == "json") {
    nlohmann::json j{{"input", format_by_excess(seq)},
                     {"reflected", format_by_excess(refl.seq)},
                     {"value", v},
                     {"reflected_value", w},
                     {"one_minus_value", 1.0 - v},
                     {"rules", refl.rules}};
    sink.write(j.dump(2) + "\n");
  } else {
    sink.write("input,reflected,value,reflected_value,one_minus_value,rules\n");
    sink.write(fmt::format("\"{}\",\"{}\",{:.17g},{:.17g},{:.17g},{}\n", format_by_excess(seq),
                           format_by_excess(refl.seq), v, w, 1.0 - v, rules));
  }
  return kOk;
}

int run_orbit(double alpha, double x0, std::size_t n, const Common& c, std::ostream& out,
              std::ostream& err) {
  const AlphaContext ctx(alpha);
  const auto rec = orbit(ctx, x0, n);
  Sink sink(c.out_path, out);
  if (c.format == "json") {
    nlohmann::json j = nlohmann::json::array();
    for (std::size_t i = 0; i < rec.points.size(); ++i) {
      j.push_back({{"i", i},
                   {"x", rec.points[i]},
                   {"j", rec.digits[i].j},
                   {"sign", sign_value(rec.digits[i].sign)}});
    }
    if (rec.escaped_zero) {
      j.push_back({{"i", rec.points.size()}, {"x", rec.stop_point}, {"j", nullptr}, {"sign", nullptr}});
    }
    sink.write(j.dump(2) + "\n");
  } else {
    sink.write("i,x,j,sign\n");
    for (std::size_t i = 0; i < rec.points.size(); ++i) {
      sink.write(fmt::format("{},{:.17g},{},{}\n", i, rec.points[i], rec.digits[i].j,
                             rec.digits[i].sign == Sign::Plus ? "+" : "-"));
    }
    if (rec.escaped_zero) sink.write(fmt::format("{},{:.17g},,\n", rec.points.size(), rec.stop_point));
  }
  if (rec.escaped_zero) err << "orbit reached 0 (no digit); stopped early\n";
  return kOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Numerical toolkit for the alpha-continued-fraction maps T_alpha", "alphacf"};
  app.require_subcommand(1);
  Common common;
  std::function<int()> action;

  EntropyArgs ea;
  auto* point = app.add_subcommand(
      "entropy-point", "Ensemble Birkhoff estimate of the entropy at one alpha (one CSV row)");
  add_common(point, common);
  point->add_option("--alpha", ea.alpha, "Parameter alpha in (0, 1]")->required();
  point->add_option("--n", ea.n, "Iterates per orbit")->capture_default_str();
  point->add_option("--ensemble,-N", ea.N, "Number of orbits")->capture_default_str();
  point->add_option("--seed", ea.seed, "Master seed")->capture_default_str();
  point->callback([&] { action = [&] { return run_scan(ea.alpha, ea.alpha, ea, common, out, err); }; });

  auto* scan = app.add_subcommand(
      "entropy-scan", "Ensemble entropy estimates on a uniform alpha grid; row k uses a seed derived from (seed, k)");
  add_common(scan, common);
  scan->add_option("--alpha-min", ea.alpha_min, "First alpha")->required();
  scan->add_option("--alpha-max", ea.alpha_max, "Last alpha")->required();
  scan->add_option("--steps", ea.steps, "Grid points")->capture_default_str();
  scan->add_option("--n", ea.n, "Iterates per orbit")->capture_default_str();
  scan->add_option("--ensemble,-N", ea.N, "Number of orbits per alpha")->capture_default_str();
  scan->add_option("--seed", ea.seed, "Master seed")->capture_default_str();
  scan->callback([&] {
    action = [&] { return run_scan(ea.alpha_min, ea.alpha_max, ea, common, out, err); };
  });

  auto* sd = app.add_subcommand(
      "stddev-scan", "Per-orbit standard deviation of the Birkhoff estimate against n, with the log-log slope");
  add_common(sd, common);
  sd->add_option("--alpha", ea.alpha, "Parameter alpha in (0, 1]")->required();
  sd->add_option("--n-values", ea.n_values, "Ascending orbit lengths (at least 3)")
      ->delimiter(',')
      ->capture_default_str();
  std::size_t sd_N = 100;
  sd->add_option("--ensemble,-N", sd_N, "Number of orbits per n")->capture_default_str();
  sd->add_option("--seed", ea.seed, "Master seed")->capture_default_str();
  sd->callback([&] {
    action = [&] {
      const std::size_t N = sd_N;
      const auto s = stddev_scan(AlphaContext(ea.alpha), ea.n_values, N, ea.seed, {common.threads});
      Sink sink(common.out_path, out);
      if (common.format == "json") {
        nlohmann::json pts = nlohmann::json::array();
        for (const auto& p : s.points) pts.push_back({{"n", p.n}, {"mean", p.mean}, {"stddev", p.stddev}});
        nlohmann::json j{{"alpha", ea.alpha}, {"N", N}, {"seed", ea.seed}, {"slope", s.slope}, {"points", pts}};
        sink.write(j.dump(2) + "\n");
      } else {
        sink.write("alpha,n,N,mean,stddev,slope\n");
        for (const auto& p : s.points) {
          sink.write(fmt::format("{:.17g},{},{},{:.17g},{:.17g},{:.17g}\n", ea.alpha, p.n, N, p.mean,
                                 p.stddev, s.slope));
        }
      }
      err << fmt::format("slope of log stddev against log n: {:.6f}\n", s.slope);
      return static_cast<int>(kOk);
    };
  });

  DensityArgs da;
  auto* dens = app.add_subcommand(
      "density", "Invariant density: Ulam approximation, closed form, or series for alpha = 1/r");
  add_common(dens, common);
  auto* da_alpha = dens->add_option_function<double>("--alpha", [&](double v) { da.alpha = v; },
                                                     "Parameter alpha in (0, 1]");
  dens->add_option_function<int>("--r", [&](int v) { da.r = v; }, "Use alpha = 1/r")
      ->excludes(da_alpha);
  dens->add_option("--method", da.method, "ulam, closed or series")
      ->check(CLI::IsMember({"ulam", "closed", "series"}))
      ->capture_default_str();
  dens->add_option("--bins", da.bins, "Ulam bins")->capture_default_str();
  dens->add_option("--iters", da.iters, "Ulam power-iteration cap")->capture_default_str();
  dens->add_option("--tol", da.tol, "Ulam L1 convergence tolerance")->capture_default_str();
  dens->add_option("--depth", da.depth, "Series truncation depth")->capture_default_str();
  dens->add_option("--points", da.points, "CSV grid points")->capture_default_str();
  dens->add_option("--sidecar", da.sidecar,
                   "JSON metadata file (default: <out>.json when --out is given)");
  dens->callback([&] { action = [&] { return run_density(da, common, out); }; });

  NatextArgs na;
  auto* nat = app.add_subcommand(
      "natext", "Natural extension domain for alpha = 1/r: sampling and invariance, injectivity and complementarity checks");
  add_common(nat, common);
  nat->add_option_function<int>("--r", [&](int v) { na.r = v; }, "alpha = 1/r, r >= 3");
  nat->add_option_function<double>("--alpha", [&](double v) { na.alpha = v; },
                                   "alpha (1/r, or in [sqrt 2 - 1, 1/2] with --prop1)");
  nat->add_flag("--prop1", na.prop1, "Use the domain for sqrt(2) - 1 <= alpha <= 1/2");
  nat->add_option("--depth", na.depth, "Truncation depth of the excluded sets")->capture_default_str();
  nat->add_option("--min-width", na.min_width, "Smallest y-range still expanded")->capture_default_str();
  nat->add_option("--samples", na.samples, "Sample size for the checks and the point cloud")
      ->capture_default_str();
  nat->add_option("--bins", na.bins, "Histogram bins per axis for the invariance check")
      ->capture_default_str();
  nat->add_option("--seed", na.seed, "Master seed")->capture_default_str();
  nat->add_option("--check", na.check, "Checks to run")
      ->check(CLI::IsMember({"all", "invariance", "injectivity", "complementarity", "none"}))
      ->capture_default_str();
  nat->add_option("--points-out", na.points_out, "Write a K-distributed point cloud (x,y CSV)");
  nat->add_option("--summary-out", na.summary_out, "Write the domain summary JSON");
  nat->callback([&] { action = [&] { return run_natext(na, common, out, err); }; });

  std::string seq_text;
  std::string form = "compact";
  auto* refl = app.add_subcommand(
      "reflect", "Reflect a by-excess expansion: print the expansion of 1 - x and both values");
  add_common(refl, common);
  refl->add_option("sequence", seq_text, "Expansion such as \"<3,3;y=3>\" or \"<2^2,5;y=2.5>\"")
      ->required();
  refl->add_option("--form", form, "Stop early (compact) or reduce to a bare remainder (terminal)")
      ->check(CLI::IsMember({"compact", "terminal"}))
      ->capture_default_str();
  refl->callback([&] { action = [&] { return run_reflect(seq_text, form, common, out); }; });

  double oa = 0.5, ox = 0.0;
  std::size_t on = 10;
  auto* orb = app.add_subcommand("orbit", "Iterates and digits of T_alpha from x0");
  add_common(orb, common);
  orb->add_option("--alpha", oa, "Parameter alpha in [0, 1]")->required();
  orb->add_option("--x0", ox, "Starting point in [alpha - 1, alpha]")->required();
  orb->add_option("--n", on, "Number of points")->capture_default_str();
  orb->callback([&] { action = [&] { return run_orbit(oa, ox, on, common, out, err); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kOk : kConfigError;
  }
  try {
    return action();
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    const bool numeric = e.code() == ErrorCode::QuadratureFailure ||
                         e.code() == ErrorCode::RejectionStarvation;
    return numeric ? kCheckFailed : kConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kConfigError;
  }
}

}  // namespace alphacf::cli
