#include "CLI11.hpp"
#include "json.hpp"

#include "pinren/annealed.hpp"
#include "pinren/homogeneous.hpp"
#include "pinren/io.hpp"
#include "pinren/moments.hpp"
#include "pinren/quenched.hpp"
#include "pinren/renewal.hpp"
#include "pinren/spectral.hpp"
#include "pinren/util.hpp"
#include "pinren/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

using json = nlohmann::ordered_json;
using namespace pinren;

namespace {

// Flags shared by every subcommand.  Thread count deliberately never reaches
// an output file: results must be byte-identical for any worker pool size.
struct CommandLine {
  CLI::App* cmd = nullptr;
  CLI::Option* seed_opt = nullptr;
  std::string config_path;
  std::string out_dir = ".";
  std::uint64_t seed = 0;
  int threads = 1;
};

void setup_command(CLI::App& app, CommandLine& cl, const char* name,
                   const char* desc) {
  cl.cmd = app.add_subcommand(name, desc);
  cl.cmd->add_option("--config", cl.config_path,
                     "flat key=value experiment config file");
  cl.seed_opt =
      cl.cmd->add_option("--seed", cl.seed, "RNG seed (overrides the config)");
  cl.cmd->add_option("--out", cl.out_dir, "output directory");
  cl.cmd->add_option("--threads", cl.threads, "worker threads")
      ->check(CLI::Range(1, 64));
}

RunConfig load_config(const CommandLine& cl) {
  RunConfig cfg = cl.config_path.empty() ? RunConfig::parse_text("")
                                         : RunConfig::parse_file(cl.config_path);
  if (cl.seed_opt->count() > 0)
    cfg.override_value("seed", std::to_string(cl.seed));
  return cfg;
}

std::string out_path(const CommandLine& cl, const std::string& name) {
  std::filesystem::create_directories(cl.out_dir);
  return (std::filesystem::path(cl.out_dir) / name).string();
}

void emit(const CommandLine& cl, const std::string& name,
          const std::string& content) {
  const std::string path = out_path(cl, name);
  write_text_file(path, content);
  std::printf("wrote %s\n", path.c_str());
}

json manifest_base(const char* command, const RunConfig& cfg) {
  json m;
  m["version"] = kPinrenVersion;
  m["command"] = command;
  m["config_hash"] = hex64(cfg.hash());
  json c = json::object();
  for (const auto& [k, v] : cfg.entries())
    c[k] = v;
  m["config"] = c;
  return m;
}

json fit_json(const ScalingFit& fit, double lo, double hi) {
  json f;
  f["exponent"] = fit.exponent;
  f["stderr"] = fit.exponent_err;
  f["ci_low"] = fit.exponent - 2.0 * fit.exponent_err;
  f["ci_high"] = fit.exponent + 2.0 * fit.exponent_err;
  f["amplitude"] = fit.amplitude;
  f["window"] = json::array({lo, hi});
  f["points"] = fit.abscissa.size();
  return f;
}

std::vector<double> lin_grid(double lo, double hi, std::int64_t pts,
                             const char* what) {
  if (pts < 1 || !(std::isfinite(lo) && std::isfinite(hi)) || hi < lo)
    throw std::invalid_argument(std::string(what) + " grid is malformed");
  if (pts == 1) {
    if (hi != lo)
      throw std::invalid_argument(std::string(what) +
                                  " grid with one point needs min = max");
    return {lo};
  }
  std::vector<double> g((std::size_t)pts);
  for (std::int64_t i = 0; i < pts; ++i)
    g[(std::size_t)i] =
        (lo * (double)(pts - 1 - i) + hi * (double)i) / (double)(pts - 1);
  return g;
}

std::vector<double> geo_grid(double lo, double hi, std::int64_t pts,
                             const char* what) {
  if (!(lo > 0.0))
    throw std::invalid_argument(std::string(what) +
                                " grid needs a positive minimum");
  if (pts < 1 || !std::isfinite(hi) || hi < lo)
    throw std::invalid_argument(std::string(what) + " grid is malformed");
  if (pts == 1) {
    if (hi != lo)
      throw std::invalid_argument(std::string(what) +
                                  " grid with one point needs min = max");
    return {lo};
  }
  std::vector<double> g((std::size_t)pts);
  for (std::int64_t i = 0; i < pts; ++i)
    g[(std::size_t)i] =
        lo * std::pow(hi / lo, (double)i / (double)(pts - 1));
  return g;
}

std::uint64_t require_seed(const RunConfig& cfg, const char* command) {
  if (!cfg.has("seed"))
    throw std::invalid_argument(std::string(command) +
                                " is stochastic; pass --seed or a seed= key");
  return cfg.raw_seed("seed");
}

int run_annealed_curve(const CommandLine& cl) {
  RunConfig cfg = load_config(cl);
  cfg.restrict_keys({"alpha", "alpha_hat", "horizon", "beta_min", "beta_max",
                     "beta_points", "rel_tol", "h_min", "h_max", "h_points",
                     "h_tol", "gamma_fit_lo", "gamma_fit_hi",
                     "gamma_fit_points", "nu_fit_beta", "nu_fit_delta_lo",
                     "nu_fit_delta_hi", "nu_fit_points"});
  const std::int64_t horizon = cfg.integer_or("horizon", 4096);
  const PowerLawRenewal base =
      normalize_power_law(cfg.number("alpha"), (std::uint64_t)horizon);
  const PowerLawRenewal dis =
      normalize_power_law(cfg.number("alpha_hat"), (std::uint64_t)horizon);
  const double rel_tol = cfg.number_or("rel_tol", 1e-8);
  const std::vector<double> betas =
      lin_grid(cfg.number_or("beta_min", 0.05), cfg.number_or("beta_max", 1.0),
               cfg.integer_or("beta_points", 20), "beta");

  const AnnealedCurve curve =
      compute_annealed_curve(base, dis, betas, cl.threads, rel_tol);

  CsvTable csv;
  csv.columns = {"beta", "h_c_a", "beta0", "regime"};
  for (std::size_t i = 0; i < betas.size(); ++i)
    csv.rows.push_back({format_double(betas[i]), format_double(curve.hca[i]),
                        format_double(curve.beta0),
                        curve.hca[i] == 0.0 ? "flat-zero" : "decreasing"});
  emit(cl, "annealed_curve.csv", csv.render());

  // Homogeneous free-energy companion table on a geometric reward grid; the
  // slope column is the contact density.
  const double h_tol = cfg.number_or("h_tol", 1e-12);
  CsvTable hom;
  hom.columns = {"h", "F", "Fprime"};
  for (double h : geo_grid(cfg.number_or("h_min", 1e-4),
                           cfg.number_or("h_max", 0.1),
                           cfg.integer_or("h_points", 13), "h")) {
    hom.rows.push_back({format_double(h),
                        format_double(solve_free_energy(base, h, h_tol)),
                        format_double(free_energy_slope(base, h, h_tol))});
  }
  emit(cl, "homogeneous_curve.csv", hom.render());

  json m = manifest_base("annealed-curve", cfg);
  m["beta0"] = curve.beta0;
  double deficit = 0.0;
  for (std::size_t i = 1; i + 1 < betas.size(); ++i)
    deficit = std::max(
        deficit, 0.5 * (curve.hca[i - 1] + curve.hca[i + 1]) - curve.hca[i]);
  m["concavity"] = json{{"concave", deficit <= 1e-9},
                        {"worst_chord_deficit", deficit}};
  {
    const double lo = cfg.number_or("gamma_fit_lo", 1e-4);
    const double hi = cfg.number_or("gamma_fit_hi", 1e-2);
    const int pts = (int)cfg.integer_or("gamma_fit_points", 9);
    try {
      m["gamma_ann"] = fit_json(annealed_gamma_fit(base, dis, lo, hi, pts),
                                lo, hi);
    } catch (const std::domain_error&) {
      m["gamma_ann"] = "log-corrected, not fitted";
    }
  }
  if (cfg.has("nu_fit_beta")) {
    const double lo = cfg.number_or("nu_fit_delta_lo", 3e-5);
    const double hi = cfg.number_or("nu_fit_delta_hi", 1e-3);
    const int pts = (int)cfg.integer_or("nu_fit_points", 8);
    try {
      m["nu_a"] = fit_json(
          annealed_nu_fit(base, dis, cfg.number("nu_fit_beta"), lo, hi, pts),
          lo, hi);
    } catch (const std::domain_error&) {
      m["nu_a"] = "log-corrected, not fitted";
    }
  }
  m["outputs"] = json::array({"annealed_curve.csv", "homogeneous_curve.csv"});
  emit(cl, "annealed_curve_manifest.json", m.dump(2) + "\n");
  return 0;
}

// Formula-driven cell labels.  Boundary tuples where no theorem applies
// stay "unknown"; the conjectured tier lives in its own column and is never
// folded into the proven one.
std::string classify_cell(double a, double ah) {
  if (a + ah < 1.0)
    return "irrelevant";
  if (ah < 1.0)
    return "trivially-relevant";
  if (ah > 2.0) {
    if (a > 0.5)
      return "relevant";
    if (a < 0.5)
      return "irrelevant";
    return "unknown";
  }
  if (ah > 1.0 && a > 1.0 / ah)
    return "relevant";
  return "unknown";
}

int run_phase_portrait(const CommandLine& cl) {
  RunConfig cfg = load_config(cl);
  cfg.restrict_keys({"alpha_min", "alpha_max", "alpha_points",
                     "alpha_hat_min", "alpha_hat_max", "alpha_hat_points"});
  const std::vector<double> as =
      lin_grid(cfg.number_or("alpha_min", 0.1), cfg.number_or("alpha_max", 2.0),
               cfg.integer_or("alpha_points", 20), "alpha");
  const std::vector<double> ahs = lin_grid(
      cfg.number_or("alpha_hat_min", 0.1), cfg.number_or("alpha_hat_max", 3.0),
      cfg.integer_or("alpha_hat_points", 30), "alpha_hat");
  if (as.front() <= 0.0 || as.back() > 2.0 || ahs.front() <= 0.0 ||
      ahs.back() > 3.0)
    throw std::invalid_argument(
        "phase portrait covers alpha in (0,2] and alpha_hat in (0,3]");

  const std::size_t cells = as.size() * ahs.size();
  std::vector<std::vector<std::string>> rows(cells);
  parallel_for(cells, cl.threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const double a = as[i / ahs.size()];
      const double ah = ahs[i % ahs.size()];
      const bool conj = a > 1.0 - 1.0 / std::min(ah, 2.0);
      rows[i] = {format_double(a), format_double(ah), classify_cell(a, ah),
                 conj ? "yes" : "no"};
    }
  });

  CsvTable csv;
  csv.columns = {"alpha", "alpha_hat", "classification",
                 "conjectured_relevant"};
  csv.rows = std::move(rows);
  emit(cl, "phase_portrait.csv", csv.render());

  json m = manifest_base("phase-portrait", cfg);
  m["cells"] = cells;
  m["outputs"] = json::array({"phase_portrait.csv"});
  emit(cl, "phase_portrait_manifest.json", m.dump(2) + "\n");
  return 0;
}

int run_quenched_mc(const CommandLine& cl) {
  RunConfig cfg = load_config(cl);
  cfg.restrict_keys({"alpha", "alpha_hat", "beta", "h", "h_min", "h_max",
                     "h_points", "n", "replicas", "horizon", "seed"});
  const std::uint64_t seed = require_seed(cfg, "quenched-mc");
  const std::int64_t horizon = cfg.integer_or("horizon", 4096);
  const PowerLawRenewal base =
      normalize_power_law(cfg.number("alpha"), (std::uint64_t)horizon);
  const PowerLawRenewal dis =
      normalize_power_law(cfg.number("alpha_hat"), (std::uint64_t)horizon);
  const double beta = cfg.number("beta");
  const std::size_t n = (std::size_t)cfg.integer_or("n", 2000);
  const int replicas = (int)cfg.integer_or("replicas", 32);
  std::vector<double> hs;
  if (cfg.has("h")) {
    if (cfg.has("h_min") || cfg.has("h_max") || cfg.has("h_points"))
      throw std::invalid_argument("give either h or an h_min/h_max grid");
    hs = {cfg.number("h")};
  } else {
    hs = lin_grid(cfg.number("h_min"), cfg.number("h_max"),
                  cfg.integer_or("h_points", 9), "h");
  }

  // All grid points ride on the same seed, hence the same disorder paths;
  // the curve in h is then smooth in the common randomness.
  CsvTable csv;
  csv.columns = {"n", "beta", "h", "logZ_mean", "stderr", "replicas", "seed"};
  for (double h : hs) {
    const QuenchedMcEstimate est = quenched_free_energy_mc(
        base, dis, beta, h, n, replicas, seed, cl.threads);
    csv.rows.push_back({std::to_string(n), format_double(beta),
                        format_double(h),
                        format_double((double)n * est.value),
                        format_double((double)n * est.se),
                        std::to_string(est.replicas), std::to_string(seed)});
  }
  emit(cl, "quenched_mc.csv", csv.render());

  json m = manifest_base("quenched-mc", cfg);
  m["seed"] = seed;
  m["outputs"] = json::array({"quenched_mc.csv"});
  emit(cl, "quenched_mc_manifest.json", m.dump(2) + "\n");
  return 0;
}

int run_second_moment(const CommandLine& cl) {
  RunConfig cfg = load_config(cl);
  cfg.restrict_keys(
      {"alpha", "alpha_hat", "beta", "n_min", "n_max", "n_points", "horizon"});
  const std::int64_t horizon = cfg.integer_or("horizon", 4096);
  const PowerLawRenewal base =
      normalize_power_law(cfg.number("alpha"), (std::uint64_t)horizon);
  const PowerLawRenewal dis =
      normalize_power_law(cfg.number("alpha_hat"), (std::uint64_t)horizon);
  const double beta = cfg.number("beta");
  std::vector<std::size_t> grid;
  for (double v : lin_grid((double)cfg.integer_or("n_min", 50),
                           (double)cfg.integer_or("n_max", 300),
                           cfg.integer_or("n_points", 6), "n")) {
    const std::size_t r = (std::size_t)std::llround(v);
    if (grid.empty() || grid.back() != r)
      grid.push_back(r);
  }

  const BoundednessReport rep = boundedness_probe(base, dis, beta, grid);

  CsvTable csv;
  csv.columns = {"n", "beta", "first_moment", "second_moment"};
  for (std::size_t i = 0; i < rep.n_grid.size(); ++i)
    csv.rows.push_back({std::to_string(rep.n_grid[i]), format_double(beta),
                        format_double(rep.first_moment[i]),
                        format_double(rep.second_moment[i])});
  emit(cl, "second_moment.csv", csv.render());

  json m = manifest_base("second-moment", cfg);
  m["coupling_height"] = rep.coupling_height;
  m["first_moment_max"] = rep.first_moment_max;
  m["second_moment_growth"] = rep.second_moment_growth;
  m["outputs"] = json::array({"second_moment.csv"});
  emit(cl, "second_moment_manifest.json", m.dump(2) + "\n");
  return 0;
}

int run_spectral_check(const CommandLine& cl) {
  RunConfig cfg = load_config(cl);
  cfg.restrict_keys({"alpha", "theta", "n_max", "quadrature", "horizon"});
  const std::size_t n_max = (std::size_t)cfg.integer_or("n_max", 2000);
  const std::int64_t horizon =
      cfg.integer_or("horizon", (std::int64_t)std::max<std::size_t>(4096, 2 * n_max));
  const PowerLawRenewal law =
      normalize_power_law(cfg.number("alpha"), (std::uint64_t)horizon);
  const double theta = cfg.number_or("theta", 0.0);
  const std::size_t quadrature =
      (std::size_t)cfg.integer_or("quadrature", 1 << 18);

  SpectralInverter inv(law, theta, n_max, quadrature);
  std::vector<double> kv(n_max + 1, 0.0);
  const double f = theta == 0.0 ? 0.0 : solve_free_energy(law, theta, 1e-13);
  for (std::size_t j = 1; j <= n_max; ++j)
    kv[j] = std::exp(theta - f * (double)j) * law.k(j);
  std::vector<double> u(n_max + 1, 0.0);
  u[0] = 1.0;
  for (std::size_t j = 1; j <= n_max; ++j)
    u[j] = block_dot_rev(kv.data(), u.data(), j);

  CsvTable csv;
  csv.columns = {"n", "u_convolution", "u_inversion", "abs_diff"};
  double worst = 0.0;
  for (std::size_t j = 0; j <= n_max; ++j) {
    const double ui = inv.mass(j);
    const double d = std::fabs(ui - u[j]);
    worst = std::max(worst, d);
    csv.rows.push_back({std::to_string(j), format_double(u[j]),
                        format_double(ui), format_double(d)});
  }
  emit(cl, "spectral_check.csv", csv.render());

  json m = manifest_base("spectral-check", cfg);
  m["worst_abs_diff"] = worst;
  m["quadrature_nodes"] = inv.nodes();
  m["outputs"] = json::array({"spectral_check.csv"});
  emit(cl, "spectral_check_manifest.json", m.dump(2) + "\n");
  return 0;
}

int run_verify(const CommandLine& cl, const std::string& suite_arg) {
  RunConfig cfg = load_config(cl);
  cfg.restrict_keys({"suite", "seed", "uhat_perturbation"});
  const std::string suite =
      !suite_arg.empty() ? suite_arg : cfg.text_or("suite", "all");
  VerifyOptions opt;
  opt.seed = cfg.has("seed") ? cfg.raw_seed("seed") : 0;
  opt.threads = cl.threads;
  opt.uhat_perturbation = cfg.number_or("uhat_perturbation", 0.0);

  const VerifyReport report = run_verify_suite(suite, opt);
  for (const auto& c : report.checks)
    std::printf("[%s] %s: %s\n", c.pass ? "ok" : "FAIL", c.name.c_str(),
                c.detail.c_str());
  std::printf("suite %s: %zu checks, %s\n", report.suite.c_str(),
              report.checks.size(), report.all_pass() ? "all pass" : "FAILED");

  json m = manifest_base("verify", cfg);
  m["suite"] = report.suite;
  m["seed"] = opt.seed;
  m["all_pass"] = report.all_pass();
  json checks = json::array();
  for (const auto& c : report.checks)
    checks.push_back(json{{"name", c.name},
                          {"status", c.pass ? "pass" : "fail"},
                          {"seed", c.seed},
                          {"detail", c.detail}});
  m["checks"] = checks;
  emit(cl, "verify_report.json", m.dump(2) + "\n");
  return report.all_pass() ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"numerical laboratory for pinning on a renewal disorder set"};
  app.require_subcommand(1);

  CommandLine ann, por, que, sec, spe, ver;
  setup_command(app, ann, "annealed-curve",
                "critical curve, onset coupling, and scaling fits");
  setup_command(app, por, "phase-portrait",
                "classify the tail-exponent plane cell by cell");
  setup_command(app, que, "quenched-mc",
                "Monte Carlo free energy over frozen disorder paths");
  setup_command(app, sec, "second-moment",
                "moment growth probe at the annealed critical point");
  setup_command(app, spe, "spectral-check",
                "Fourier inversion against the convolution recursion");
  setup_command(app, ver, "verify", "self-check suites with a JSON report");
  std::string suite_arg;
  ver.cmd->add_option(
      "suite", suite_arg,
      "oracles, inequalities, asymptotics, spectral, or all (default)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*ann.cmd)
      return run_annealed_curve(ann);
    if (*por.cmd)
      return run_phase_portrait(por);
    if (*que.cmd)
      return run_quenched_mc(que);
    if (*sec.cmd)
      return run_second_moment(sec);
    if (*spe.cmd)
      return run_spectral_check(spe);
    if (*ver.cmd)
      return run_verify(ver, suite_arg);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "pinren: %s\n", e.what());
    return 2;
  }
  return 2;
}
