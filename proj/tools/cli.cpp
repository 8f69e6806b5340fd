#include "cli.hpp"

#include <fmt/format.h>
#include <openssl/evp.h>

#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <json.hpp>
#include <limits>
#include <optional>
#include <stdexcept>

#include "pdm/eigensolve.hpp"
#include "pdm/hamiltonian.hpp"
#include "pdm/limits.hpp"
#include "pdm/observables.hpp"
#include "pdm/parallel.hpp"
#include "validate.hpp"

namespace pdm::cli {

namespace {

using json = nlohmann::ordered_json;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Params {
  std::string command;
  Index n = 0;
  double gamma = 0;
  std::vector<double> gamma_scaled;
  double gamma_n = 0;
  std::vector<Index> n_list;
  std::vector<double> targets;
  std::vector<double> gamma_n_list;
  std::string variant = "canonical";
  std::string op = "full";
  int bins = 100;
  std::vector<double> range;
  bool analytic = false;
  double tol = 1e-12;
  std::size_t threads = 0;
  std::string out = ".";
  std::uint64_t seed = SolverOptions{}.seed;

  bool has_n = false;
  bool has_gamma_n = false;
};

std::string num(double x) { return fmt::format("{:.17g}", x); }

json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

class Csv {
 public:
  explicit Csv(std::string_view header) : text_(header) { text_ += '\n'; }

  template <class... Cells>
  void row(const Cells&... cells) {
    bool first = true;
    ((text_ += (first ? "" : ","), text_ += cell(cells), first = false), ...);
    text_ += '\n';
  }

  const std::string& text() const { return text_; }

 private:
  static std::string cell(double x) { return num(x); }
  static std::string cell(Index x) { return fmt::format("{}", x); }
  static std::string cell(std::string_view s) { return std::string(s); }
  static std::string cell(const char* s) { return s; }

  std::string text_;
};

// Collects phase timings and written files; the manifest goes out last.
class Run {
 public:
  Run(const Params& p, const SolverOptions& opts) : dir_(p.out), opts_(opts) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw IoError(fmt::format("cannot create output directory {}: {}", p.out, ec.message()));
    manifest_["command"] = p.command;
    manifest_["version"] = kVersion;
  }

  json& manifest() { return manifest_; }

  template <class F>
  auto time(const char* phase, F&& f) {
    const auto t0 = std::chrono::steady_clock::now();
    auto finish = [&] {
      timings_[phase] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    };
    if constexpr (std::is_void_v<decltype(f())>) {
      f();
      finish();
    } else {
      auto r = f();
      finish();
      return r;
    }
  }

  void write(const std::string& name, const std::string& content) {
    time(("write " + name).c_str(), [&] { put(name, content); });
    files_.push_back({{"file", name}, {"bytes", content.size()}, {"sha256", sha256_hex(content)}});
  }

  void finish() {
    manifest_["solver"] = {{"method", "bisection"},
                           {"abs_tol", opts_.abs_tol},
                           {"max_iter", opts_.max_iter},
                           {"threads", opts_.threads},
                           {"seed", opts_.seed}};
    manifest_["timings_seconds"] = timings_;
    manifest_["outputs"] = files_;
    put("manifest.json", manifest_.dump(2) + "\n");
  }

 private:
  void put(const std::string& name, const std::string& content) {
    const auto path = dir_ / name;
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    f.write(content.data(), static_cast<std::streamsize>(content.size()));
    f.close();
    if (!f) throw IoError("cannot write " + path.string());
  }

  std::filesystem::path dir_;
  SolverOptions opts_;
  json manifest_;
  json timings_ = json::object();
  json files_ = json::array();
};

Variant variant_of(const Params& p) {
  return p.variant == "literal" ? Variant::LiteralSum : Variant::Canonical;
}

ChainSpec spec_for(const Params& p, Index n) {
  const Variant v = variant_of(p);
  if (!p.gamma_scaled.empty()) return ChainSpec::scaled(n, p.gamma_scaled[0], p.gamma_scaled[1], v);
  if (p.has_gamma_n) return ChainSpec::with_gamma_n(n, p.gamma_n, v);
  return ChainSpec::fixed(n, p.gamma, v);
}

ChainSpec single_spec(const Params& p) {
  if (!p.has_n) throw UsageError(p.command + ": --n is required");
  return spec_for(p, p.n);
}

TridiagonalOperatord select_op(const std::string& op, const ChainSpec& spec) {
  if (op == "h0") return build_h0<double>(spec);
  if (op == "h1") return build_h1<double>(spec);
  return build_full<double>(spec);
}

json spec_json(const ChainSpec& spec, const Params& p) {
  json j = {{"n", spec.n_sites()}, {"gamma", spec.gamma()}, {"gamma_n", spec.gamma_n()}, {"variant", p.variant}};
  if (spec.scaling()) j["scaling"] = {{"c", spec.scaling()->c}, {"alpha", spec.scaling()->alpha}};
  return j;
}

std::span<const double> view(const Vectord& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }

std::vector<Index> sizes_or(const Params& p, std::vector<Index> fallback) {
  return p.n_list.empty() ? fallback : p.n_list;
}

std::vector<double> gamma_ns_or(const Params& p, std::vector<double> fallback) {
  return p.gamma_n_list.empty() ? fallback : p.gamma_n_list;
}

int cmd_spectrum(const Params& p, const SolverOptions& opts) {
  const auto spec = single_spec(p);
  Run run(p, opts);
  const auto op = run.time("build", [&] { return select_op(p.op, spec); });
  const Vectord v = run.time("solve", [&] { return eigenvalues(op, opts); });

  Csv csv("index,energy");
  for (Index j = 0; j < v.size(); ++j) csv.row(j + 1, v[j]);
  run.write("spectrum.csv", csv.text());

  const double trace = op.diag().sum();
  const double frob2 = op.diag().squaredNorm() + 2.0 * op.off().squaredNorm();
  const double sum = v.sum();
  const double sum2 = v.squaredNorm();
  const double first_err = std::abs(sum - trace) / std::max(std::abs(trace), 1.0);
  const double second_err = std::abs(sum2 - frob2) / std::max(frob2, 1.0);
  auto& m = run.manifest();
  m["params"] = spec_json(spec, p);
  m["params"]["op"] = p.op;
  m["trace_identity"] = {{"trace", trace},
                         {"eigenvalue_sum", sum},
                         {"relative_error", first_err},
                         {"frobenius_squared", frob2},
                         {"eigenvalue_square_sum", sum2},
                         {"relative_error_second", second_err},
                         {"tolerance", 1e-8},
                         {"verified", first_err <= 1e-8 && second_err <= 1e-8}};
  run.finish();
  return kOk;
}

int cmd_dos(const Params& p, const SolverOptions& opts) {
  const auto spec = single_spec(p);
  std::optional<std::pair<double, double>> range;
  if (!p.range.empty()) {
    if (!(p.range[0] < p.range[1])) throw UsageError("--range: need lo < hi");
    range = {p.range[0], p.range[1]};
  }

  std::function<double(double)> cdf;
  std::size_t skip = 0;
  if (p.analytic) {
    if (p.op == "h0" || (p.op == "full" && spec.gamma() == 0.0)) {
      cdf = rho0_cdf;
      skip = 1;  // rho0 diverges at both band edges
    } else if (p.op == "h1" && spec.gamma() > 0.0) {
      cdf = [g = spec.gamma(), n = spec.n_sites()](double e) { return rho1_cdf(e, g, n); };
    } else {
      throw UsageError("--analytic: no closed-form density for this operator and gamma");
    }
  }

  Run run(p, opts);
  const auto op = run.time("build", [&] { return select_op(p.op, spec); });
  const Vectord v = run.time("solve", [&] { return eigenvalues(op, opts); });
  const auto hist = run.time("histogram", [&] { return dos_histogram(view(v), p.bins, range); });

  Csv csv("bin_left,bin_right,density");
  for (std::size_t b = 0; b < hist.bins(); ++b) csv.row(hist.edges[b], hist.edges[b + 1], hist.density[b]);
  run.write("dos.csv", csv.text());

  auto& m = run.manifest();
  m["params"] = spec_json(spec, p);
  m["params"]["op"] = p.op;
  m["params"]["bins"] = p.bins;
  m["params"]["range"] = range ? json::array({range->first, range->second}) : json(nullptr);
  m["histogram_integral"] = hist.integral();
  if (cdf) {
    Csv ref("bin_left,bin_right,density");
    for (std::size_t b = 0; b < hist.bins(); ++b) {
      const double l = hist.edges[b], r = hist.edges[b + 1];
      ref.row(l, r, (cdf(r) - cdf(l)) / (r - l));
    }
    run.write("dos_analytic.csv", ref.text());
    m["l1_distance"] = dos_l1_distance(hist, cdf, skip);
    m["l1_skipped_edge_bins"] = skip;
  }
  run.finish();
  return kOk;
}

int cmd_pr(const Params& p, const SolverOptions& opts) {
  const auto spec = single_spec(p);
  Run run(p, opts);
  const auto op = run.time("build", [&] { return select_op(p.op, spec); });
  const Vectord v = run.time("solve", [&] { return eigenvalues(op, opts); });
  const auto records = run.time("vectors", [&] { return state_records(op, v, 0, op.size(), opts); });

  Csv csv("index,energy,pr,pr_norm");
  for (const auto& r : records) csv.row(r.index, r.energy, r.pr, r.pr_norm);
  run.write("pr.csv", csv.text());
  run.manifest()["params"] = spec_json(spec, p);
  run.manifest()["params"]["op"] = p.op;
  run.finish();
  return kOk;
}

void scaling_rows(Csv& csv, const ScalingVerdict& verdict, std::optional<double> gamma_n = {}) {
  for (const auto& s : verdict.samples) {
    if (gamma_n)
      csv.row(*gamma_n, verdict.energy_target, s.n, s.pr_norm, verdict.trend, to_string(verdict.classification));
    else
      csv.row(verdict.energy_target, s.n, s.pr_norm, verdict.trend, to_string(verdict.classification));
  }
}

// Default grid points that at least one size of the family reaches.
std::vector<double> covered_grid(const ScalingFamily& family) {
  std::vector<double> out;
  for (double e : default_energy_grid(family.gamma_n())) {
    for (std::size_t k = 0; k < family.sizes().size(); ++k) {
      const auto& p = family.profile(k);
      if (e >= p.front().energy && e <= p.back().energy) {
        out.push_back(e);
        break;
      }
    }
  }
  return out;
}

int cmd_scaling(const Params& p, const SolverOptions& opts) {
  if (!p.has_gamma_n) throw UsageError("scaling: --gammaN is required");
  const auto sizes = sizes_or(p, {500, 1000, 2000});

  Run run(p, opts);
  const ScalingFamily family =
      run.time("solve", [&] { return ScalingFamily(p.gamma_n, sizes, opts, variant_of(p)); });
  const auto targets = p.targets.empty() ? covered_grid(family) : p.targets;
  Csv csv("energy_target,N,pr_norm,slope,classification");
  for (double t : targets) scaling_rows(csv, family.classify(t));
  run.write("scaling.csv", csv.text());

  auto& m = run.manifest();
  m["params"] = {{"gamma_n", p.gamma_n}, {"n_list", sizes}, {"targets", targets}, {"variant", p.variant}};
  try {
    const auto edge = mobility_edge(family, targets);
    m["edge_estimate"] = edge.edge;
  } catch (const Error&) {
    m["edge_estimate"] = nullptr;
  }
  run.finish();
  return kOk;
}

int cmd_edge(const Params& p, const SolverOptions& opts) {
  const auto sizes = sizes_or(p, {500, 1000, 2000});
  const auto gamma_ns = gamma_ns_or(p, {0.25, 0.5, 1, 4});

  Run run(p, opts);
  Csv edges("gammaN,edge,extended_below,localized_from,violations");
  Csv profile("gammaN,energy_target,N,pr_norm,slope,classification");
  json notes = json::array();
  run.time("solve", [&] {
    for (double gn : gamma_ns) {
      const ScalingFamily family(gn, sizes, opts, variant_of(p));
      const auto grid = p.targets.empty() ? covered_grid(family) : p.targets;
      try {
        const auto e = mobility_edge(family, grid);
        edges.row(gn, e.edge, e.extended_below, e.localized_from, e.violations);
        for (const auto& v : e.profile) scaling_rows(profile, v, gn);
      } catch (const Error& ex) {
        edges.row(gn, NAN, NAN, NAN, Index{-1});
        for (double t : grid) scaling_rows(profile, family.classify(t), gn);
        notes.push_back({{"gamma_n", gn}, {"no_edge", ex.what()}});
      }
    }
  });
  run.write("edge.csv", edges.text());
  run.write("edge_profile.csv", profile.text());
  run.manifest()["params"] = {{"gamma_n_list", gamma_ns}, {"n_list", sizes}, {"variant", p.variant}};
  if (!p.targets.empty()) run.manifest()["params"]["targets"] = p.targets;
  run.manifest()["notes"] = notes;
  run.finish();
  return kOk;
}

int cmd_fraction(const Params& p, const SolverOptions& opts) {
  const auto sizes = sizes_or(p, {200, 400, 800, 1600});
  const auto gamma_ns = gamma_ns_or(p, {0, 0.25, 0.5, 1, 2, 4});
  for (Index n : sizes)
    if (n < 1) throw UsageError("--n-list entries must be >= 1");

  struct Item {
    double gamma_n;
    Index n;
    double gamma = 0;
    double fraction = 0;
  };
  std::vector<Item> items;
  for (double gn : gamma_ns)
    for (Index n : sizes) items.push_back({gn, n});

  Run run(p, opts);
  SolverOptions inner = opts;
  inner.threads = 1;
  run.time("solve", [&] {
    parallel_for(static_cast<std::ptrdiff_t>(items.size()), opts.threads, [&](std::ptrdiff_t k) {
      auto& it = items[static_cast<std::size_t>(k)];
      const auto spec = ChainSpec::with_gamma_n(it.n, it.gamma_n, variant_of(p));
      it.gamma = spec.gamma();
      it.fraction = localized_fraction(spec, inner);
    });
  });

  Csv csv("gamma,N,fraction,extrapolated");
  json limits = json::array();
  for (std::size_t g = 0; g < gamma_ns.size(); ++g) {
    const auto first = items.begin() + static_cast<std::ptrdiff_t>(g * sizes.size());
    std::vector<std::pair<Index, double>> per_n;
    for (auto it = first; it != first + static_cast<std::ptrdiff_t>(sizes.size()); ++it)
      per_n.emplace_back(it->n, it->fraction);
    double limit = NAN;
    if (per_n.size() >= 2) limit = extrapolate_fraction(per_n).limit;
    for (auto it = first; it != first + static_cast<std::ptrdiff_t>(sizes.size()); ++it)
      csv.row(it->gamma, it->n, it->fraction, limit);
    limits.push_back({{"gamma_n", gamma_ns[g]}, {"extrapolated", finite_or_null(limit)}});
  }
  run.write("fraction.csv", csv.text());
  run.manifest()["params"] = {{"gamma_n_list", gamma_ns}, {"n_list", sizes}, {"variant", p.variant}, {"edge", 2.0}};
  run.manifest()["extrapolation"] = limits;
  run.finish();
  return kOk;
}

int cmd_limits(const Params& p, const SolverOptions& opts) {
  const auto spec = single_spec(p);
  const Index n = spec.n_sites();
  Run run(p, opts);
  Csv csv("op,j,closed_form,numeric,abs_error");
  json summary = json::object();

  if (p.op != "h1") {
    const Vectord v = run.time("solve h0", [&] { return eigenvalues(build_h0<double>(spec), opts); });
    double worst = 0;
    for (Index j = 1; j <= n; ++j) {
      const double e = bloch_energy(j, n);
      worst = std::max(worst, std::abs(v[j - 1] - e));
      csv.row("h0", j, e, v[j - 1], std::abs(v[j - 1] - e));
    }
    summary["h0_max_abs_error"] = worst;
  }
  if (p.op != "h0") {
    const Vectord v = run.time("solve h1", [&] { return eigenvalues(build_h1<double>(spec), opts); });
    double central = 0;
    // level j counts from the top
    for (Index j = 1; j <= n; ++j) {
      const double e = laguerre_energy(j, n, spec.gamma());
      const double err = std::abs(v[n - j] - e);
      if (j > n / 10 && j <= n - n / 10 && e != 0.0) central = std::max(central, err / std::abs(e));
      csv.row("h1", j, e, v[n - j], err);
    }
    summary["h1_central_max_rel_error"] = central;
  }
  run.write("limits.csv", csv.text());
  run.manifest()["params"] = spec_json(spec, p);
  run.manifest()["params"]["op"] = p.op;
  run.manifest()["summary"] = summary;
  run.finish();
  return kOk;
}

int cmd_validate(const Params& p, const SolverOptions& opts, std::ostream& out) {
  Run run(p, opts);
  const auto results = run.time("checks", [&] { return run_validation(p.seed); });
  print_validation(out, results);

  Csv csv("check,cases,worst,tolerance,pass");
  for (const auto& r : results)
    csv.row(std::string_view(r.name), Index{r.cases}, r.worst, r.tolerance, r.pass ? "1" : "0");
  run.write("validate.csv", csv.text());
  run.manifest()["params"] = {{"seed", p.seed}};
  run.manifest()["passed"] = all_passed(results);
  run.finish();
  return all_passed(results) ? kOk : kValidation;
}

}  // namespace

std::string sha256_hex(std::string_view data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw IoError("SHA-256 failed");
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", md[i]);
  return hex;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Spectra, densities of states and localization of the position-dependent-mass chain",
               "pdmchain"};
  app.set_version_flag("--version", std::string(kVersion));
  app.set_config("--config", "", "Read options from a key = value file (flags override)");
  app.require_subcommand(1, 1);

  Params p;
  auto* o_n = app.add_option("--n", p.n, "Number of sites")
                  ->check(CLI::Range(Index{1}, std::numeric_limits<Index>::max()));
  auto* o_g = app.add_option("--gamma", p.gamma, "Fixed gamma")->check(CLI::NonNegativeNumber);
  auto* o_gs = app.add_option("--gamma-scaled", p.gamma_scaled, "gamma = c * N^-alpha, given as c,alpha")
                   ->delimiter(',')
                   ->expected(2);
  auto* o_gn = app.add_option("--gammaN", p.gamma_n, "Fixed product gamma*N")->check(CLI::NonNegativeNumber);
  o_g->excludes(o_gs, o_gn);
  o_gs->excludes(o_gn);
  app.add_option("--n-list", p.n_list, "Comma-separated sizes")->delimiter(',');
  app.add_option("--targets", p.targets, "Comma-separated target energies")->delimiter(',');
  app.add_option("--gammaN-list", p.gamma_n_list, "Comma-separated gamma*N values")->delimiter(',');
  app.add_option("--variant", p.variant, "canonical | literal")->check(CLI::IsMember({"canonical", "literal"}));
  app.add_option("--op", p.op, "Operator: h0 | h1 | full")->check(CLI::IsMember({"h0", "h1", "full"}));
  app.add_option("--bins", p.bins, "Histogram bins")->check(CLI::PositiveNumber);
  app.add_option("--range", p.range, "Histogram range lo,hi")->delimiter(',')->expected(2);
  app.add_flag("--analytic", p.analytic, "Also write the closed-form density (dos)");
  app.add_option("--tol", p.tol, "Eigenvalue tolerance relative to the spectral width")
      ->check(CLI::PositiveNumber);
  app.add_option("--threads", p.threads, "Worker threads (0 = all cores)");
  app.add_option("--out", p.out, "Output directory");
  app.add_option("--seed", p.seed, "Seed for start vectors and validation instances");

  const std::vector<std::pair<const char*, const char*>> commands = {
      {"spectrum", "Eigenvalues -> spectrum.csv"},
      {"dos", "Density-of-states histogram -> dos.csv [dos_analytic.csv]"},
      {"pr", "Participation ratios -> pr.csv"},
      {"scaling", "Finite-size scaling of pr/N at target energies -> scaling.csv"},
      {"edge", "Mobility edge per gamma*N -> edge.csv, edge_profile.csv"},
      {"fraction", "Fraction of levels above E = 2 -> fraction.csv"},
      {"limits", "Closed-form vs numerical levels of H0 and H1 -> limits.csv"},
      {"validate", "Oracle and identity self-checks -> validate.csv"},
  };
  for (const auto& [name, help] : commands) app.add_subcommand(name, help)->fallthrough();

  std::vector<const char*> argv{"pdmchain"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kOk : kUsage;
  }

  p.command = app.get_subcommands().front()->get_name();
  p.has_n = o_n->count() > 0;
  p.has_gamma_n = o_gn->count() > 0;

  try {
    SolverOptions opts;
    opts.abs_tol = p.tol;
    opts.threads = p.threads == 0 ? default_threads() : p.threads;
    opts.seed = p.seed;
    p.threads = opts.threads;

    if (p.command == "spectrum") return cmd_spectrum(p, opts);
    if (p.command == "dos") return cmd_dos(p, opts);
    if (p.command == "pr") return cmd_pr(p, opts);
    if (p.command == "scaling") return cmd_scaling(p, opts);
    if (p.command == "edge") return cmd_edge(p, opts);
    if (p.command == "fraction") return cmd_fraction(p, opts);
    if (p.command == "limits") return cmd_limits(p, opts);
    return cmd_validate(p, opts, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kNumerical;
  }
}

}  // namespace pdm::cli
