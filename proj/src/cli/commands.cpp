#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include "amolab/cli.hpp"
#include "amolab/detkernel.hpp"
#include "amolab/green.hpp"
#include "amolab/interp.hpp"
#include "amolab/spectral.hpp"
#include "amolab/verify.hpp"

namespace amolab::cli {

namespace {

/// Values given on the command line; unset fields leave the config alone.
struct Overrides {
  std::string config_path;
  std::optional<double> lambda;
  std::optional<std::string> theta;
  std::optional<int> golden;
  std::vector<std::string> coeffs;
  std::optional<double> liouville;
  std::optional<int> levels;
  std::vector<long> liouville_seed;
  std::optional<long> precision;
  std::optional<double> eta;
  std::optional<int> N;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs;
};

void add_common(CLI::App* sub, Overrides& o) {
  sub->add_option("--config", o.config_path, "JSON run configuration (flags take precedence)");
  sub->add_option("--lambda", o.lambda, "coupling lambda");
  sub->add_option("--theta", o.theta, "phase: 0, 1/2, alpha/2 or alpha/2+1/2");
  sub->add_option("--golden", o.golden, "golden-mean frequency with this many quotients");
  sub->add_option("--coeffs", o.coeffs, "explicit partial quotients a_1 ... a_m")->delimiter(',');
  sub->add_option("--liouville", o.liouville, "Liouville frequency with this beta");
  sub->add_option("--levels", o.levels, "constructed Liouville levels");
  sub->add_option("--liouville-seed", o.liouville_seed, "leading quotients of the Liouville construction")
      ->delimiter(',');
  sub->add_option("--precision", o.precision, "MPFR mantissa bits (>= 64)");
  sub->add_option("--eta", o.eta, "resonance window constant, in (0, 1/20)");
  sub->add_option("-N,--box", o.N, "half-width of the box [-N, N]");
  sub->add_option("--out", o.out, "output directory");
  sub->add_option("--seed", o.seed, "seed for every randomised draw");
  sub->add_option("--jobs", o.jobs, "worker threads");
}

RunConfig resolve(const Overrides& o) {
  RunConfig c;
  if (!o.config_path.empty()) {
    std::ifstream in(o.config_path);
    if (!in) throw ConfigError("cannot read config '" + o.config_path + "'");
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("config '" + o.config_path + "': " + e.what());
    }
    c = config_from_json(j, c);
  }
  if (const char* env = std::getenv("AMOLAB_PRECISION_BITS"); env && *env) {
    char* end = nullptr;
    long bits = std::strtol(env, &end, 10);
    if (*end != '\0') throw ConfigError(std::string("AMOLAB_PRECISION_BITS is not an integer: '") + env + "'");
    c.precision = bits;
  }
  if (o.lambda) c.lambda = *o.lambda;
  if (o.theta) {
    try {
      c.theta = theta_kind_from_string(*o.theta);
    } catch (const PreconditionError& e) {
      throw ConfigError(e.what());
    }
  }
  int kinds = (o.golden ? 1 : 0) + (o.coeffs.empty() ? 0 : 1) + (o.liouville ? 1 : 0);
  if (kinds > 1) throw ConfigError("give at most one of --golden, --coeffs, --liouville");
  auto& f = c.frequency;
  if (o.golden) {
    f.kind = FrequencySpec::Kind::Golden;
    f.depth = *o.golden;
  }
  if (!o.coeffs.empty()) {
    f.kind = FrequencySpec::Kind::Coeffs;
    f.coeffs = o.coeffs;
  }
  if (o.liouville) {
    f.kind = FrequencySpec::Kind::Liouville;
    f.beta = *o.liouville;
  }
  if (o.levels) f.levels = *o.levels;
  if (!o.liouville_seed.empty()) f.seed = o.liouville_seed;
  if (o.precision) c.precision = *o.precision;
  if (o.eta) c.eta = *o.eta;
  if (o.N) c.N = *o.N;
  if (o.out) c.out_dir = *o.out;
  if (o.seed) c.seed = *o.seed;
  if (o.jobs) c.jobs = *o.jobs;
  validate(c);
  return c;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot write " + path.string());
  os << text;
}

Real parse_real(const std::string& s, const char* what) {
  try {
    return Real(std::string_view(s));
  } catch (const std::exception&) {
    throw ConfigError(std::string(what) + " '" + s + "' is not a number");
  }
}

ModelParams params_of(const RunConfig& c, const cfrac::Frequency& f, Real energy = Real(0)) {
  return make_params(c.lambda, f, c.theta, std::move(energy));
}

nlohmann::json logsigned_json(const LogSigned& x) { return {{"sign", x.sign}, {"logmag", x.logmag.str()}}; }

// --- cf -----------------------------------------------------------------

int cmd_cf(const RunConfig& c, std::ostream& out) {
  auto f = build_frequency(c.frequency);
  auto b = cfrac::beta_estimate(f);
  write_file(c.out_dir / "frequency.json", cfrac::to_json(f) + "\n");
  write_file(c.out_dir / "beta.json", cfrac::to_json(b) + "\n");
  out << "depth " << f.depth() << ", q_m has " << f.q_deep().get_str().size() << " digits, beta_hat "
      << b.tail().str(6) << " (running max " << b.running_max.str(6) << ")\n";
  return kOk;
}

// --- spectrum -----------------------------------------------------------

struct SpectrumArgs {
  std::optional<int> sweep_k;
  std::optional<int> grid;
  std::vector<std::string> energies;
};

int cmd_spectrum(const RunConfig& c, const SpectrumArgs& a, std::ostream& out) {
  auto f = build_frequency(c.frequency);
  auto p = params_of(c, f);
  auto ev = spectral::spectrum_sample(p, c.N);
  std::ostringstream os;
  os << "index,energy\n";
  for (size_t i = 0; i < ev.size(); ++i) os << i << ',' << ev[i].str() << '\n';
  write_file(c.out_dir / "spectrum.csv", os.str());
  out << ev.size() << " eigenvalues in [" << ev.front().str(8) << ", " << ev.back().str(8) << "]\n";
  if (!a.sweep_k) return kOk;

  const int k = *a.sweep_k;
  const int M = a.grid.value_or(4 * k);
  if (k < 1 || M < 1) throw ConfigError("--sweep-k and --grid must be positive");
  std::vector<Real> es;
  for (const auto& s : a.energies) es.push_back(parse_real(s, "energy"));
  if (es.empty()) es.push_back(ev[ev.size() / 2]);
  auto rows = det::theta_sweep(p, es, k, M, 0.0);
  std::ostringstream sw;
  sw << "k,theta,E,sign,logmag,normalized_logmag\n";
  for (size_t e = 0; e < es.size(); ++e)
    for (int i = 0; i < M; ++i) {
      const auto& x = rows[e][static_cast<size_t>(i)];
      Real theta = Real(i) / Real(M);
      sw << k << ',' << theta.str() << ',' << es[e].str() << ',' << x.sign << ',' << x.logmag.str() << ','
         << (x.logmag / Real(k)).str() << '\n';
    }
  write_file(c.out_dir / "sweep.csv", sw.str());
  out << "theta sweep: " << es.size() << " energies x " << M << " phases, k = " << k << "\n";
  return kOk;
}

// --- decay --------------------------------------------------------------

struct DecayArgs {
  std::optional<std::string> e_lo, e_hi;
  std::optional<int> level;
};

int cmd_decay(const RunConfig& c, const DecayArgs& a, std::ostream& out) {
  auto f = build_frequency(c.frequency);
  auto p = params_of(c, f);
  const Real bound = Real(2) + Real(2) * p.lambda;
  Real lo = a.e_lo ? parse_real(*a.e_lo, "--e-lo") : -bound;
  Real hi = a.e_hi ? parse_real(*a.e_hi, "--e-hi") : bound;
  const int level = a.level.value_or(f.level_below(mpz_class(c.N / 2)));
  if (level < 1 || level > f.depth()) throw ConfigError("level " + std::to_string(level) + " out of range");

  std::vector<spectral::EigenPair> pairs;
  if (lo < hi) {
    try {
      pairs = spectral::eigen_solve(p, c.N, lo, hi);
    } catch (const PreconditionError& e) {
      throw ConfigError(e.what());
    }
  }

  std::ostringstream csv, prof;
  csv << "index,energy,max_site,status,tail,target,within_0.1\n";
  prof << "index,ell_times_2,site_center,r_value,log_r,bound_rhs\n";
  nlohmann::json fits = nlohmann::json::array();
  int localized = 0;
  for (const auto& e : pairs) {
    csv << e.index << ',' << e.energy.str() << ',' << e.max_site << ',';
    if (!spectral::is_localized(e)) {
      csv << "not localized,,,\n";
      continue;
    }
    ++localized;
    auto fit = spectral::decay_fit(e, f, p.lambda);
    csv << "localized," << nlohmann::json(fit.tail).dump() << ',' << nlohmann::json(fit.target).dump() << ','
        << (fit.within(0.1) ? 1 : 0) << '\n';
    auto j = nlohmann::json::parse(spectral::fit_json(fit));
    j["index"] = e.index;
    j["energy"] = e.energy.str();
    fits.push_back(std::move(j));
    auto profile = spectral::decay_profile(e, f, level, c.eta);
    std::istringstream lines(spectral::profile_csv(profile, p.lambda, Real(fit.beta_est)));
    std::string line;
    std::getline(lines, line);  // header
    while (std::getline(lines, line)) prof << e.index << ',' << line << '\n';
  }
  write_file(c.out_dir / "decay.csv", csv.str());
  write_file(c.out_dir / "profiles.csv", prof.str());
  nlohmann::json report{{"config", to_json(c)},
                        {"window", {lo.str(), hi.str()}},
                        {"level", level},
                        {"q", f.q(level).get_str()},
                        {"eigenpairs", pairs.size()},
                        {"localized", localized},
                        {"fits", fits}};
  write_file(c.out_dir / "decay.json", report.dump(2) + "\n");
  out << pairs.size() << " eigenpairs, " << localized << " localized, profiles at level " << level << " (q = "
      << f.q(level).get_str() << ")\n";
  return kOk;
}

// --- green --------------------------------------------------------------

struct GreenArgs {
  long x1 = 0;
  int k = 50;
  std::optional<long> y;
  std::string energy = "0";
};

int cmd_green(const RunConfig& c, const GreenArgs& a, std::ostream& out) {
  auto f = build_frequency(c.frequency);
  auto p = params_of(c, f, parse_real(a.energy, "energy"));
  if (a.k < 1) throw ConfigError("--k must be positive");
  auto I = green::Interval::from_start(a.x1, a.k);
  const Site y = a.y.value_or(a.x1);
  if (!I.contains(y)) throw ConfigError("y must lie in the interval");
  green::GreenPair d, cr;
  try {
    d = green::green_direct(I, p, y);
    cr = green::green_cramer(I, p, y);
  } catch (const ResonantInterval& e) {
    out << "resonant interval: " << e.what() << "\n";
    return kVerifyFailed;
  }
  Real diff(0);
  for (auto [u, v] : {std::pair{&d.left, &cr.left}, std::pair{&d.right, &cr.right}})
    if (!u->is_zero() && !v->is_zero()) diff = fmax(diff, abs(u->logmag - v->logmag));
  nlohmann::json j{{"config", to_json(c)},
                   {"interval", {I.x1, I.x2}},
                   {"y", y},
                   {"energy", p.energy.str()},
                   {"direct", {{"left", logsigned_json(d.left)}, {"right", logsigned_json(d.right)}}},
                   {"cramer", {{"left", logsigned_json(cr.left)}, {"right", logsigned_json(cr.right)}}},
                   {"max_logmag_difference", diff.str()}};
  write_file(c.out_dir / "green.json", j.dump(2) + "\n");
  out << "G(x1,y): " << to_string(d.left) << "  G(y,x2): " << to_string(d.right) << "  |direct - cramer| "
      << diff.str(3) << "\n";
  return kOk;
}

// --- lagrange -----------------------------------------------------------

struct LagrangeArgs {
  std::string set = "regular";
  std::optional<int> level;
  long y = 1;
  long j = 1;
  std::vector<std::string> residues;
  std::optional<std::string> energy;
};

int cmd_lagrange(const RunConfig& c, const LagrangeArgs& a, std::ostream& out) {
  auto f = build_frequency(c.frequency);
  auto p = params_of(c, f);
  const int n = a.level.value_or(f.level_below(mpz_class(c.N / 2)));
  interp::ThetaSet ts = [&] {
    try {
      if (a.set == "custom") {
        std::vector<Real> r;
        for (const auto& s : a.residues) r.push_back(parse_real(s, "residue"));
        return interp::ThetaSet::custom(std::move(r));
      }
      if (a.set == "regular") return interp::regular_set(p, a.y, n);
      if (a.set == "half-peak") return interp::half_peak_set(p, n, a.j, c.eta);
      if (a.set == "peak") return interp::peak_set(p, n, a.j, c.eta);
    } catch (const PreconditionError& e) {
      throw ConfigError(e.what());
    }
    throw ConfigError("--set must be custom, regular, half-peak or peak");
  }();
  auto la = interp::la_terms(ts);
  write_file(c.out_dir / "la.csv", interp::la_csv(ts, la));
  Real la_max = la.values.front();
  for (const auto& v : la.values) la_max = fmax(la_max, v);
  out << ts.size() << " nodes (" << interp::to_string(ts.provenance()) << "), max La " << la_max.str(6) << "\n";
  if (!a.energy) return kOk;

  auto pe = p.with_energy(parse_real(*a.energy, "energy"));
  nlohmann::json j{{"config", to_json(c)}, {"energy", pe.energy.str()}, {"nodes", ts.size()}};
  int code = kOk;
  try {
    auto w = interp::uniformity_witness(ts, la, pe);
    j["witness"] = w.index;
    j["margin"] = w.margin.str();
    j["violation"] = false;
    out << "witness node " << w.index << ", margin " << w.margin.str(6) << "\n";
  } catch (const interp::UniformityViolation& e) {
    auto& m = j["margins"] = nlohmann::json::array();
    for (const auto& x : e.margins()) m.push_back(x.str());
    j["violation"] = true;
    out << e.what() << "\n";
    code = kVerifyFailed;
  }
  write_file(c.out_dir / "uniformity.json", j.dump(2) + "\n");
  return code;
}

// --- verify -------------------------------------------------------------

struct VerifyArgs {
  std::string scale = "full";
  std::optional<int> k;
  std::vector<int> criteria;
};

int cmd_verify(const RunConfig& c, const VerifyArgs& a, std::ostream& out) {
  verify::Options o;
  o.seed = c.seed;
  o.jobs = c.jobs;
  o.precision = c.precision;
  o.k = a.k;
  try {
    o.scale = verify::scale_from_string(a.scale);
  } catch (const PreconditionError& e) {
    throw ConfigError(e.what());
  }
  if (a.k && *a.k < 1) throw ConfigError("--k must be positive");
  for (int id : a.criteria) {
    bool known = false;
    for (const auto& ci : verify::criteria()) known = known || ci.id == id;
    if (!known) throw ConfigError("no criterion with id " + std::to_string(id));
  }
  auto v = verify::run_suite(o, a.criteria);
  for (const auto& r : v.results) {
    std::ostringstream t;
    t.precision(3);
    t << std::fixed << r.seconds;
    out << "criterion " << r.id << ' ' << (r.pass ? "PASS" : "FAIL") << "  " << r.name << ": " << r.summary << " ["
        << t.str() << " s]\n";
  }
  write_file(c.out_dir / "verdict.json", verify::verdict_json(v));
  out << (v.pass() ? "all criteria passed" : "verification failed") << "; verdict in "
      << (c.out_dir / "verdict.json").string() << "\n";
  return v.pass() ? kOk : kVerifyFailed;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Almost Mathieu operator localization lab", "amolab"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "amolab 0.1");

  Overrides ov;
  SpectrumArgs sa;
  DecayArgs da;
  GreenArgs ga;
  LagrangeArgs la;
  VerifyArgs va;
  std::function<int(const RunConfig&)> action;

  auto* cf = app.add_subcommand("cf", "continued fraction, convergents and beta estimate");
  add_common(cf, ov);
  cf->callback([&] { action = [&](const RunConfig& c) { return cmd_cf(c, out); }; });

  auto* sp = app.add_subcommand("spectrum", "box eigenvalues and optional determinant theta sweep");
  add_common(sp, ov);
  sp->add_option("--sweep-k", sa.sweep_k, "length k of the determinants P_k in the sweep");
  sp->add_option("--grid", sa.grid, "phases in the sweep (default 4k)");
  sp->add_option("--energy", sa.energies, "sweep energies (default: the middle eigenvalue)")->delimiter(',');
  sp->callback([&] { action = [&](const RunConfig& c) { return cmd_spectrum(c, sa, out); }; });

  auto* dc = app.add_subcommand("decay", "eigenpairs, decay fits and peak profiles");
  add_common(dc, ov);
  dc->add_option("--e-lo", da.e_lo, "lower end of the energy window");
  dc->add_option("--e-hi", da.e_hi, "upper end of the energy window (exclusive)");
  dc->add_option("--level", da.level, "continued-fraction level of the profiles (default: q_n <= N/2)");
  dc->callback([&] { action = [&](const RunConfig& c) { return cmd_decay(c, da, out); }; });

  auto* gr = app.add_subcommand("green", "boundary Green function of an interval, two ways");
  add_common(gr, ov);
  gr->add_option("--x1", ga.x1, "left end of the interval");
  gr->add_option("--k", ga.k, "interval length");
  gr->add_option("--y", ga.y, "interior site (default x1)");
  gr->add_option("--energy", ga.energy, "energy");
  gr->callback([&] { action = [&](const RunConfig& c) { return cmd_green(c, ga, out); }; });

  auto* lg = app.add_subcommand("lagrange", "Lagrange terms of a node set and the uniformity witness");
  add_common(lg, ov);
  lg->add_option("--set", la.set, "custom, regular, half-peak or peak");
  lg->add_option("--level", la.level, "continued-fraction level n");
  lg->add_option("--y", la.y, "site of the regular set");
  lg->add_option("--j", la.j, "multiple of q_n for the peak sets");
  lg->add_option("--residues", la.residues, "phases in [0,1) of a custom set")->delimiter(',');
  lg->add_option("--energy", la.energy, "energy for the uniformity witness");
  lg->callback([&] { action = [&](const RunConfig& c) { return cmd_lagrange(c, la, out); }; });

  auto* vf = app.add_subcommand("verify", "run the acceptance suite and write verdict.json");
  add_common(vf, ov);
  vf->add_option("--scale", va.scale, "quick or full");
  vf->add_option("--k", va.k, "replace the k of the determinant sweeps");
  vf->add_option("--criteria", va.criteria, "run only these criteria")->delimiter(',');
  vf->callback([&] { action = [&](const RunConfig& c) { return cmd_verify(c, va, out); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    RunConfig c = resolve(ov);
    PrecisionGuard guard(static_cast<mpfr_prec_t>(c.precision));
    return action(c);
  } catch (const ConfigError& e) {
    err << "amolab: " << e.what() << "\n";
    return kUsage;
  } catch (const PreconditionError& e) {
    err << "amolab: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    err << "amolab: " << e.what() << "\n";
    return kVerifyFailed;
  }
}

}  // namespace amolab::cli
