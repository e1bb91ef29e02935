#include "affine/cli.hpp"

#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "affine/config.hpp"
#include "affine/format.hpp"
#include "affine/io.hpp"
#include "affine/reduction.hpp"
#include "affine/riccati.hpp"
#include "affine/timechange.hpp"
#include "affine/verify.hpp"

namespace affine {

namespace {

struct CommonOpts {
  std::string params_file;
  std::string x0_text;
  std::string u0_file;
  std::string out_file;
  double T = 1.0;
  double mesh = 0x1p-10;
  int level0 = 6;
  int level_cap = 22;
  double tau_tol = 1e-4;
  long samples = 1;
  std::uint64_t seed = 0;
  int workers = 0;
  double rtol = 1e-8;
  double atol = 1e-10;
  bool invert = false;
};

SimConfig sim_config(const CommonOpts& o) {
  SimConfig cfg;
  cfg.T = o.T;
  cfg.mesh = o.mesh;
  cfg.level0 = o.level0;
  cfg.level_cap = o.level_cap;
  cfg.tau_tol = o.tau_tol;
  cfg.seed = o.seed;
  cfg.workers = o.workers;
  return cfg;
}

std::vector<std::pair<std::string, std::string>> header_common(
    const char* cmd, const CommonOpts& o) {
  std::vector<std::pair<std::string, std::string>> kv;
  kv.emplace_back("command", cmd);
  kv.emplace_back("params", o.params_file);
  return kv;
}

// Opens --out, or falls back to stdout.
struct OutStream {
  explicit OutStream(const std::string& path) {
    if (!path.empty()) {
      file.open(path, std::ios::binary | std::ios::trunc);
      if (!file) throw ConfigError(path + ": cannot open for writing");
    }
  }
  std::ostream& get() { return file.is_open() ? file : std::cout; }
  std::ofstream file;
};

int cmd_validate(const CommonOpts& o) {
  const ConfigFile cfg = parse_config_file(o.params_file);
  const AdmissibleParamSet p = params_from_config(cfg);
  const ValidationReport rep = validate(p);

  OutStream out(o.out_file);
  std::ostream& os = out.get();
  write_run_header(os, header_common("validate", o));
  if (rep.ok()) {
    os << "admissible\n";
    const ModelClass mc = classify(p);
    os << "constant_block_zero = " << (mc.constant_block_zero ? 1 : 0) << "\n";
    os << "free_drift_block_zero = " << (mc.free_drift_block_zero ? 1 : 0) << "\n";
    os << "killing_free = " << (mc.killing_free ? 1 : 0) << "\n";
    os << "directly_simulable = " << (mc.directly_simulable() ? 1 : 0) << "\n";
    return 0;
  }
  os << "not admissible\n" << rep.to_string();
  return 1;
}

int cmd_reduce(const CommonOpts& o) {
  const ConfigFile cfg = parse_config_file(o.params_file);
  const AdmissibleParamSet p = params_from_config(cfg);
  const ReductionPlan plan = reduce_for_simulation(p);

  if (o.out_file.empty()) throw ConfigError("reduce needs --out");
  {
    std::ofstream out(o.out_file, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError(o.out_file + ": cannot open for writing");
    out << "# reduced from " << o.params_file << "\n";
    out << params_to_config_text(plan.reduced);
  }
  {
    ReductionSidecar sc;
    sc.added_aux = plan.added_aux;
    sc.original_dim = plan.original.dim;
    sc.frame = plan.frame;
    const std::string scpath = o.out_file + ".reduction";
    std::ofstream out(scpath, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError(scpath + ": cannot open for writing");
    out << sidecar_to_config_text(sc);
  }
  std::cout << "reduced parameter set written to " << o.out_file
            << " (mapping in " << o.out_file << ".reduction)\n";
  return 0;
}

int cmd_riccati(const CommonOpts& o) {
  const ConfigFile cfg = parse_config_file(o.params_file);
  const AdmissibleParamSet p = params_from_config(cfg);
  if (o.u0_file.empty()) throw ConfigError("riccati needs --u0-file");
  const std::vector<CVec> us = read_u0_list(o.u0_file, p.d());

  RiccatiOptions opts;
  opts.rtol = o.rtol;
  opts.atol = o.atol;

  std::vector<double> queries;
  for (int k = 0; k <= 512; ++k)
    queries.push_back(k == 512 ? o.T : o.T * (double)k / 512.0);

  OutStream out(o.out_file);
  std::ostream& os = out.get();
  auto kv = header_common("riccati", o);
  kv.emplace_back("T", fmt17(o.T));
  kv.emplace_back("rtol", fmt17(o.rtol));
  kv.emplace_back("atol", fmt17(o.atol));
  write_run_header(os, kv);

  for (std::size_t a = 0; a < us.size(); ++a) {
    os << "# u0 =";
    for (Eigen::Index k = 0; k < us[a].size(); ++k)
      os << " " << fmt17(us[a][k].real()) << " " << fmt17(us[a][k].imag());
    os << "\n";
    const RiccatiSolution sol = solve_riccati(p, us[a], o.T, opts, queries);
    write_riccati_table(os, sol);
    if (a + 1 < us.size()) os << "\n";
  }
  return 0;
}

int cmd_simulate(const CommonOpts& o) {
  const ConfigFile cfg = parse_config_file(o.params_file);
  const AdmissibleParamSet p = params_from_config(cfg);
  if (o.x0_text.empty()) throw ConfigError("simulate needs --x0");
  const Vec x0 = parse_real_list(o.x0_text, "--x0");
  if ((int)x0.size() != p.d())
    throw ConfigError("--x0 must have " + std::to_string(p.d()) + " entries");

  const ReductionPlan plan = reduce_for_simulation(p);
  const Simulator sim(plan.reduced, plan.embed_x(x0), sim_config(o));

  OutStream out(o.out_file);
  std::ostream& os = out.get();
  auto kv = header_common("simulate", o);
  kv.emplace_back("x0", o.x0_text);
  kv.emplace_back("T", fmt17(o.T));
  kv.emplace_back("mesh", fmt17(o.mesh));
  kv.emplace_back("level0", std::to_string(o.level0));
  kv.emplace_back("level_cap", std::to_string(o.level_cap));
  kv.emplace_back("tau_tol", fmt17(o.tau_tol));
  kv.emplace_back("samples", std::to_string(o.samples));
  kv.emplace_back("seed", std::to_string(o.seed));
  kv.emplace_back("frame", o.invert ? "original" : "reduced");
  write_run_header(os, kv);

  for (long k = 0; k < o.samples; ++k) {
    ProcessPath path = sim.run((std::uint64_t)k);
    if (o.invert) path = invert_frames(path, plan);
    os << "# sample = " << k << "\n";
    write_path_table(os, path);
    if (k + 1 < o.samples) os << "\n";
  }
  return 0;
}

int cmd_verify(const CommonOpts& o) {
  const ConfigFile cfg = parse_config_file(o.params_file);
  const AdmissibleParamSet p = params_from_config(cfg);
  if (o.x0_text.empty()) throw ConfigError("verify needs --x0");
  const Vec x0 = parse_real_list(o.x0_text, "--x0");
  if ((int)x0.size() != p.d())
    throw ConfigError("--x0 must have " + std::to_string(p.d()) + " entries");

  std::vector<CVec> us = o.u0_file.empty() ? default_u_grid(p.dim)
                                           : read_u0_list(o.u0_file, p.d());
  const std::vector<double> ts = {0.25 * o.T, 0.5 * o.T, o.T};

  RiccatiOptions ropts;
  ropts.rtol = o.rtol;
  ropts.atol = o.atol;

  const std::vector<CFEstimate> est =
      mc_cf(p, x0, us, ts, o.samples, sim_config(o));
  const CompareReport cmp = compare_cf(est, p, x0, ropts);
  const MomentReport mom = moment_check(p, x0, ts, o.samples, sim_config(o));

  OutStream out(o.out_file);
  std::ostream& os = out.get();
  auto kv = header_common("verify", o);
  kv.emplace_back("x0", o.x0_text);
  kv.emplace_back("T", fmt17(o.T));
  kv.emplace_back("samples", std::to_string(o.samples));
  kv.emplace_back("seed", std::to_string(o.seed));
  write_run_header(os, kv);
  write_compare_table(os, cmp);
  os << "\n";
  write_moment_table(os, mom);

  std::cout << cmp.to_string() << mom.to_string();
  return cmp.pass && mom.pass ? 0 : 1;
}

void add_common(CLI::App* sub, CommonOpts& o, bool needs_x0, bool needs_u0) {
  sub->add_option("--params", o.params_file, "parameter configuration file")
      ->required()
      ->envname("AFFINE_PARAMS");
  if (needs_x0)
    sub->add_option("--x0", o.x0_text, "initial state, comma separated")
        ->envname("AFFINE_X0");
  if (needs_u0)
    sub->add_option("--u0-file", o.u0_file, "transform argument list file")
        ->envname("AFFINE_U0_FILE");
  sub->add_option("--T", o.T, "time horizon")->envname("AFFINE_T");
  sub->add_option("--mesh", o.mesh, "driver grid mesh")->envname("AFFINE_MESH");
  sub->add_option("--level0", o.level0, "first dyadic level")
      ->envname("AFFINE_LEVEL0");
  sub->add_option("--level-cap", o.level_cap, "last dyadic level")
      ->envname("AFFINE_LEVEL_CAP");
  sub->add_option("--tau-tol", o.tau_tol, "time change gap tolerance")
      ->envname("AFFINE_TAU_TOL");
  sub->add_option("--samples", o.samples, "number of samples")
      ->envname("AFFINE_SAMPLES");
  sub->add_option("--seed", o.seed, "base seed")->envname("AFFINE_SEED");
  sub->add_option("--out", o.out_file, "output file (default stdout)")
      ->envname("AFFINE_OUT");
  sub->add_option("--workers", o.workers, "worker threads (0 = auto)")
      ->envname("AFFINE_WORKERS");
  sub->add_option("--rtol", o.rtol, "ODE relative tolerance")
      ->envname("AFFINE_RTOL");
  sub->add_option("--atol", o.atol, "ODE absolute tolerance")
      ->envname("AFFINE_ATOL");
}

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"pathwise construction and verification of affine processes"};
  app.require_subcommand(1);

  CommonOpts o;
  CLI::App* v = app.add_subcommand("validate", "check admissibility");
  add_common(v, o, false, false);
  CLI::App* r = app.add_subcommand("reduce", "rewrite into simulable form");
  add_common(r, o, false, false);
  CLI::App* q = app.add_subcommand("riccati", "solve the transform ODE");
  add_common(q, o, false, true);
  CLI::App* s = app.add_subcommand("simulate", "draw state paths");
  add_common(s, o, true, false);
  s->add_flag("--invert-frames", o.invert,
              "map samples back to the original coordinates");
  CLI::App* w = app.add_subcommand("verify", "Monte Carlo against the ODE");
  add_common(w, o, true, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (v->parsed()) return cmd_validate(o);
    if (r->parsed()) return cmd_reduce(o);
    if (q->parsed()) return cmd_riccati(o);
    if (s->parsed()) return cmd_simulate(o);
    if (w->parsed()) return cmd_verify(o);
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace affine
