#include "cli.hpp"

#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include "CLI11.hpp"
#include "homsense/error.hpp"
#include "homsense/estimator.hpp"
#include "homsense/parallel.hpp"
#include "homsense/qfi.hpp"
#include "homsense/state_json.hpp"

namespace homsense::cli {

using nlohmann::json;

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x == 0.0 ? 0.0 : x);
  return buf;
}

namespace {

std::string header(const json& config) { return "# homsense " + config.dump() + "\n"; }

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) parts.push_back(cur);
  if (!s.empty() && s.back() == sep) parts.emplace_back();
  return parts;
}

double parse_double(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw InvalidSpec("cannot parse " + what + " value '" + s + "'");
  }
}

std::uint64_t parse_count(const std::string& s, const std::string& what) {
  if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) {
    throw InvalidSpec("cannot parse " + what + " value '" + s + "'");
  }
  try {
    return std::stoull(s);
  } catch (const std::exception&) {
    throw InvalidSpec(what + " value '" + s + "' is out of range");
  }
}

json parse_interval(const std::string& s, const std::string& what) {
  const auto p = split(s, ':');
  if (p.size() != 2) throw InvalidSpec(what + " must be lo:hi");
  const double lo = parse_double(p[0], what), hi = parse_double(p[1], what);
  if (!(hi > lo)) throw InvalidSpec(what + " must satisfy lo < hi");
  return {{"lo", lo}, {"hi", hi}};
}

json parse_range(const std::string& s) {
  const auto p = split(s, ':');
  if (p.size() != 3) throw InvalidSpec("range must be start:stop:count");
  const double a = parse_double(p[0], "range"), b = parse_double(p[1], "range");
  const std::uint64_t n = parse_count(p[2], "range count");
  if (n < 2) throw InvalidSpec("range count must be at least 2");
  if (!(b > a)) throw InvalidSpec("range must satisfy start < stop");
  return {{"start", a}, {"stop", b}, {"count", n}};
}

SearchWindow window_of(const json& j) { return {j.at("lo").get<double>(), j.at("hi").get<double>()}; }
json window_json(const SearchWindow& w) { return {{"lo", w.lo}, {"hi", w.hi}}; }

DetectionModel detector(const json& c) {
  DetectionModel d{c.at("gamma").get<double>()};
  validate(d);
  return d;
}

std::string chirp_column(const std::optional<Chirp>& c) { return c ? format_number(c->sign() * c->c) : "0"; }

std::string spec_columns(const PhaseMatchingSpec& s) {
  std::string r = family_name(s.family);
  for (double v : {s.sigma, s.delta, s.delta_t, s.reflectivity, s.tau_bar, s.omega_bar, s.peak_width, s.omega0}) {
    r += "," + format_number(v);
  }
  r += "," + chirp_column(s.freq_chirp) + "," + chirp_column(s.time_chirp);
  return r;
}

constexpr const char* kSpecHeader =
    "family,sigma,delta,delta_t,reflectivity,tau_bar,omega_bar,peak_width,omega0,freq_chirp,time_chirp";

QfiMatrix qfi_for(const State& st, Convention conv) {
  return conv == Convention::Printed ? qfi_analytic(st) : qfi_numeric(st);
}

// ---- subcommand bodies -------------------------------------------------

Output run_qfi(const json& c) {
  const Convention conv = convention_from_name(c.at("convention").get<std::string>());
  const double n = c.at("repeats").get<double>();
  std::vector<QcrEntry> entries;
  const std::string preset = c.at("preset").get<std::string>();
  if (preset == "table1") {
    entries = table1_preset();
  } else if (preset == "table2") {
    entries = table2_preset();
  } else {
    entries.push_back({"state", spec_from_json(c.at("state"))});
  }
  const bool as_json = c.at("format") == "json";
  std::string csv = header(c) + "label," + kSpecHeader + ",convention,f_tt,f_mm,f_mt,var_tau,var_mu,cov\n";
  json rows = json::array();
  for (const QcrEntry& e : entries) {
    const QfiMatrix q = qfi_for(State(e.spec), conv);
    const CrCovariance cov = invert(q, n);
    csv += e.label + "," + spec_columns(e.spec) + "," + convention_name(conv);
    for (double v : {q.f_tt, q.f_mm, q.f_mt, cov.var_tau, cov.var_mu, cov.cov_mu_tau}) csv += "," + format_number(v);
    csv += "\n";
    rows.push_back({{"label", e.label}, {"state", spec_to_json(e.spec)}, {"convention", convention_name(conv)},
                    {"f_tt", q.f_tt}, {"f_mm", q.f_mm}, {"f_mt", q.f_mt}, {"var_tau", cov.var_tau},
                    {"var_mu", cov.var_mu}, {"cov", cov.cov_mu_tau}});
  }
  if (as_json) return {json{{"provenance", c}, {"rows", rows}}.dump(2) + "\n", std::nullopt};
  return {csv, std::nullopt};
}

Output run_tables(const json& c) {
  const Convention conv = convention_from_name(c.at("convention").get<std::string>());
  const std::string which = c.at("which").get<std::string>();
  std::vector<std::pair<std::string, std::vector<QcrEntry>>> tables;
  if (which == "table1" || which == "all") tables.emplace_back("table1", table1_preset());
  if (which == "table2" || which == "all") tables.emplace_back("table2", table2_preset());
  std::string csv = header(c) + "table,label," + kSpecHeader +
                    ",convention,f_tt,f_mm,f_mt,d_tau_sqrt_n,d_mu_sqrt_n,d_mutau_sqrt_n\n";
  json rows = json::array();
  for (const auto& [name, entries] : tables) {
    const std::vector<QcrRow> table = qcr_table(entries, 1.0, conv);
    for (std::size_t i = 0; i < table.size(); ++i) {
      const QcrRow& r = table[i];
      csv += name + "," + r.label + "," + spec_columns(entries[i].spec) + "," + convention_name(conv);
      for (double v : {r.qfi.f_tt, r.qfi.f_mm, r.qfi.f_mt, r.d_tau, r.d_mu, r.d_mutau}) csv += "," + format_number(v);
      csv += "\n";
      rows.push_back({{"table", name}, {"label", r.label}, {"state", spec_to_json(entries[i].spec)},
                      {"f_tt", r.qfi.f_tt}, {"f_mm", r.qfi.f_mm}, {"f_mt", r.qfi.f_mt},
                      {"d_tau_sqrt_n", r.d_tau}, {"d_mu_sqrt_n", r.d_mu}, {"d_mutau_sqrt_n", r.d_mutau}});
    }
  }
  if (c.at("format") == "json") return {json{{"provenance", c}, {"rows", rows}}.dump(2) + "\n", std::nullopt};
  return {csv, std::nullopt};
}

Output run_fi_sweep(const json& c) {
  const State st(spec_from_json(c.at("state")));
  const HomModel model(st);
  const DetectionModel det = detector(c);
  const bool tau_axis = c.at("axis") == "tau";
  const double other = c.at("other").get<double>();
  const json& r = c.at("range");
  const double a = r.at("start").get<double>(), b = r.at("stop").get<double>();
  const std::size_t n = r.at("count").get<std::size_t>();
  struct Row {
    double x;
    OutcomeProbabilities p;
    double coincidence;
    FisherMatrix f;
  };
  std::vector<Row> rows(n);
  parallel_for(n, [&](std::size_t i) {
    const double x = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
    const double mu = tau_axis ? other : x, tau = tau_axis ? x : other;
    rows[i] = {x, model.outcomes(mu, tau, det), model.coincidence(mu, tau), model.fisher(mu, tau, det)};
  });
  Output out;
  if (c.at("reference").get<bool>()) {
    const QfiMatrix q = qfi_numeric(st);
    out.companion = json{{"provenance", c}, {"convention", "canonical"}, {"f_tt", q.f_tt}, {"f_mm", q.f_mm},
                         {"f_mt", q.f_mt}}.dump(2) + "\n";
  }
  if (c.at("format") == "json") {
    json arr = json::array();
    for (const Row& w : rows) {
      arr.push_back({{"param_value", w.x}, {"p0", w.p.p0}, {"p1", w.p.p1}, {"p2", w.p.p2},
                     {"coincidence", w.coincidence}, {"f_tt", w.f.f_tt}, {"f_mm", w.f.f_mm},
                     {"f_mt", w.f.f_mt}, {"singular", w.f.singular_point}});
    }
    out.main = json{{"provenance", c}, {"rows", arr}}.dump(2) + "\n";
    return out;
  }
  std::string csv = header(c) + "param_value,p0,p1,p2,coincidence,f_tt,f_mm,f_mt,singular\n";
  for (const Row& w : rows) {
    for (double v : {w.x, w.p.p0, w.p.p1, w.p.p2, w.coincidence, w.f.f_tt, w.f.f_mm, w.f.f_mt}) {
      csv += format_number(v) + ",";
    }
    csv += w.f.singular_point ? "1\n" : "0\n";
  }
  out.main = std::move(csv);
  return out;
}

Output run_wigner(const json& c) {
  const State st(spec_from_json(c.at("state")));
  const WignerMethod method = c.at("method") == "numeric" ? WignerMethod::Numeric : WignerMethod::Analytic;
  const json& om = c.at("omega");
  const json& tm = c.at("time");
  const WignerGrid g = wigner_grid(st, {om.at("lo").get<double>(), om.at("hi").get<double>()},
                                   {tm.at("lo").get<double>(), tm.at("hi").get<double>()},
                                   c.at("nx").get<std::size_t>(), c.at("ny").get<std::size_t>(), method);
  const std::size_t nx = g.omega_axis.size(), ny = g.time_axis.size();
  if (c.at("format") == "json") {
    json values = json::array();
    for (std::size_t i = 0; i < nx; ++i) {
      values.push_back(std::vector<double>(g.values.begin() + i * ny, g.values.begin() + (i + 1) * ny));
    }
    return {json{{"provenance", c}, {"norm_estimate", g.norm_estimate}, {"omega_axis", g.omega_axis},
                 {"time_axis", g.time_axis}, {"values", values}}.dump() + "\n",
            std::nullopt};
  }
  std::string csv = header(c) + "# norm_estimate=" + format_number(g.norm_estimate) + "\n";
  if (c.at("layout") == "matrix") {
    csv += "omega";
    for (double t : g.time_axis) csv += "," + format_number(t);
    csv += "\n";
    for (std::size_t i = 0; i < nx; ++i) {
      csv += format_number(g.omega_axis[i]);
      for (std::size_t j = 0; j < ny; ++j) csv += "," + format_number(g.at(i, j));
      csv += "\n";
    }
  } else {
    csv += "omega,t,w\n";
    for (std::size_t i = 0; i < nx; ++i) {
      for (std::size_t j = 0; j < ny; ++j) {
        csv += format_number(g.omega_axis[i]) + "," + format_number(g.time_axis[j]) + "," +
               format_number(g.at(i, j)) + "\n";
      }
    }
  }
  return {csv, std::nullopt};
}

Output run_simulate(const json& c) {
  const State st(spec_from_json(c.at("state")));
  const std::uint64_t seed = c.at("seed").get<std::uint64_t>();
  const TrialCounts t = simulate_trials(HomModel(st), c.at("mu").get<double>(), c.at("tau").get<double>(),
                                        detector(c), c.at("trials").get<std::uint64_t>(), seed);
  if (c.at("format") == "csv") {
    return {header(c) + "n0,n1,n2,seed\n" + std::to_string(t.n0) + "," + std::to_string(t.n1) + "," +
                std::to_string(t.n2) + "," + std::to_string(seed) + "\n",
            std::nullopt};
  }
  return {json{{"n0", t.n0}, {"n1", t.n1}, {"n2", t.n2}, {"seed", seed}, {"provenance", c}}.dump(2) + "\n",
          std::nullopt};
}

Output run_estimate(const json& c) {
  const State st(spec_from_json(c.at("state")));
  const HomModel model(st);
  const DetectionModel det = detector(c);
  const json& k = c.at("counts");
  const TrialCounts counts{k.at(0).get<std::uint64_t>(), k.at(1).get<std::uint64_t>(), k.at(2).get<std::uint64_t>()};
  const std::string target = c.at("target").get<std::string>();
  const double other = c.at("other").get<double>(), center = c.at("center").get<double>();
  const Axis axis = target == "mu" ? Axis::Mu : Axis::Tau;
  const SearchWindow w =
      c.at("window").is_null() ? preset_window(model, axis, center, other) : window_of(c.at("window"));
  std::optional<SearchWindow> mw;
  Target which = Target::Tau;
  if (target == "mu") which = Target::Mu;
  if (target == "joint") {
    which = Target::Joint;
    mw = c.at("mu_window").is_null() ? preset_window(model, Axis::Mu, 0.0, center) : window_of(c.at("mu_window"));
  }
  const EstimationResult r = mle_estimate(counts, model, det, w, which, other, mw);
  if (c.at("format") == "json") {
    json j{{"provenance", c},
           {"target", target},
           {"estimate", r.estimate},
           {"estimate_mu", r.estimate_mu},
           {"dip_value_hat", r.dip_value_hat},
           {"std_error", r.std_error},
           {"cr_std_error", r.cr_std_error},
           {"gamma_hat", r.gamma_hat.value_or(0.0)},
           {"window", window_json(r.window)},
           {"converged", r.converged}};
    return {j.dump(2) + "\n", std::nullopt};
  }
  std::string csv = header(c) +
                    "target,estimate,estimate_mu,dip_value_hat,std_error,cr_std_error,gamma_hat,window_lo,"
                    "window_hi,converged\n" +
                    target;
  for (double v : {r.estimate, r.estimate_mu, r.dip_value_hat, r.std_error, r.cr_std_error,
                   r.gamma_hat.value_or(0.0), r.window.lo, r.window.hi}) {
    csv += "," + format_number(v);
  }
  csv += r.converged ? ",1\n" : ",0\n";
  return {csv, std::nullopt};
}

Output run_cr_study(const json& c) {
  const State st(spec_from_json(c.at("state")));
  const HomModel model(st);
  const DetectionModel det = detector(c);
  const std::uint64_t n = c.at("trials").get<std::uint64_t>();
  const double tau = c.at("tau").is_null() ? optimal_operating_tau(model, det, n) : c.at("tau").get<double>();
  std::optional<SearchWindow> w;
  if (!c.at("window").is_null()) w = window_of(c.at("window"));
  const CrStudyReport rep = cr_saturation_study(model, tau, c.at("mu").get<double>(), det, n,
                                                c.at("experiments").get<std::size_t>(),
                                                c.at("seed").get<std::uint64_t>(), w);
  json summary{{"true_tau", rep.true_tau},         {"true_mu", rep.true_mu},
               {"gamma", rep.gamma},               {"trials", rep.n_repeats},
               {"experiments", rep.n_experiments}, {"seed", rep.seed},
               {"window", window_json(rep.window)}, {"fisher", rep.fisher},
               {"mean_tau_hat", rep.mean_tau_hat}, {"empirical_var", rep.empirical_var},
               {"ratio", rep.ratio},               {"ratio_error", rep.ratio_error},
               {"failure_rate", rep.failure_rate}};
  Output out;
  if (c.at("format") == "json") {
    json arr = json::array();
    for (const CrExperiment& e : rep.experiments) {
      arr.push_back({{"experiment_id", e.id}, {"tau_hat", e.tau_hat}, {"converged", e.converged}});
    }
    out.main = json{{"provenance", c}, {"summary", summary}, {"experiments", arr}}.dump(2) + "\n";
    return out;
  }
  std::string csv = header(c) + "experiment_id,tau_hat,converged\n";
  for (const CrExperiment& e : rep.experiments) {
    csv += std::to_string(e.id) + "," + format_number(e.tau_hat) + (e.converged ? ",1\n" : ",0\n");
  }
  out.main = std::move(csv);
  out.companion = json{{"provenance", c}, {"summary", summary}}.dump(2) + "\n";
  return out;
}

// ---- output -------------------------------------------------------------

void write_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  const fs::path tmp = target.string() + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw InvalidSpec("cannot open output file '" + path + "'");
    f << content;
    f.flush();
    if (!f) {
      f.close();
      fs::remove(tmp);
      throw InvalidSpec("failed writing output file '" + path + "'");
    }
  }
  fs::rename(tmp, target);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidSpec("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

json read_provenance(const std::string& text) {
  const std::string tag = "# homsense ";
  try {
    if (text.rfind(tag, 0) == 0) return json::parse(text.substr(tag.size(), text.find('\n') - tag.size()));
    const json j = json::parse(text);
    if (j.contains("provenance")) return j.at("provenance");
  } catch (const json::exception& e) {
    throw InvalidSpec(std::string("unreadable provenance: ") + e.what());
  }
  throw InvalidSpec("no provenance header found");
}

Output execute(const json& config) {
  try {
    const std::string cmd = config.at("command").get<std::string>();
    if (cmd == "qfi") return run_qfi(config);
    if (cmd == "tables") return run_tables(config);
    if (cmd == "fi-sweep") return run_fi_sweep(config);
    if (cmd == "wigner") return run_wigner(config);
    if (cmd == "simulate") return run_simulate(config);
    if (cmd == "estimate") return run_estimate(config);
    if (cmd == "cr-study") return run_cr_study(config);
    throw InvalidSpec("unknown command '" + cmd + "'");
  } catch (const json::exception& e) {
    throw InvalidSpec(std::string("malformed configuration: ") + e.what());
  }
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Time-frequency HOM metrology toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  std::string state_path, out_path, format, convention = "printed", companion_path;
  double gamma = 0.0;
  std::uint64_t seed = 0;

  auto common = [&](CLI::App* sub, bool with_state) {
    if (with_state) sub->add_option("--state", state_path, "State-spec JSON file")->required();
    sub->add_option("--out", out_path, "Output path (written atomically; stdout when absent)");
    sub->add_option("--format", format, "csv | json")->check(CLI::IsMember({"csv", "json"}));
  };

  CLI::App* qfi = app.add_subcommand("qfi", "Quantum Fisher information and Cramer-Rao covariance");
  std::string preset;
  double repeats = 1.0;
  qfi->add_option("--state", state_path, "State-spec JSON file");
  qfi->add_option("--out", out_path, "Output path");
  qfi->add_option("--format", format, "csv | json")->check(CLI::IsMember({"csv", "json"}));
  qfi->add_option("--preset", preset, "table1 | table2")->check(CLI::IsMember({"table1", "table2"}));
  qfi->add_option("--convention", convention, "printed | canonical")
      ->check(CLI::IsMember({"printed", "canonical"}));
  qfi->add_option("--repeats", repeats, "Number of repetitions N for the covariance")->check(CLI::PositiveNumber);

  CLI::App* tables = app.add_subcommand("tables", "Preset Cramer-Rao tables");
  std::string which = "all";
  tables->add_option("--out", out_path, "Output path");
  tables->add_option("--format", format, "csv | json")->check(CLI::IsMember({"csv", "json"}));
  tables->add_option("--which", which, "table1 | table2 | all")->check(CLI::IsMember({"table1", "table2", "all"}));
  tables->add_option("--convention", convention, "printed | canonical")
      ->check(CLI::IsMember({"printed", "canonical"}));

  CLI::App* sweep = app.add_subcommand("fi-sweep", "Outcome probabilities and Fisher information along an axis");
  std::string axis = "tau", range;
  double other = 0.0;
  common(sweep, true);
  sweep->add_option("--gamma", gamma, "Detector loss reflectivity");
  sweep->add_option("--axis", axis, "tau | mu")->check(CLI::IsMember({"tau", "mu"}));
  sweep->add_option("--range", range, "start:stop:count")->required();
  sweep->add_option("--other", other, "Value of the fixed coordinate");
  sweep->add_option("--reference-out", companion_path, "Companion file with the canonical QFI");

  CLI::App* wig = app.add_subcommand("wigner", "Sampled chronocyclic Wigner function");
  std::size_t nx = 101, ny = 101;
  std::string omega_range, time_range, method = "analytic", layout = "long";
  common(wig, true);
  wig->add_option("--nx", nx, "Frequency samples");
  wig->add_option("--ny", ny, "Time samples");
  wig->add_option("--omega", omega_range, "lo:hi (default: spectral support)");
  wig->add_option("--time", time_range, "lo:hi (default: temporal support)");
  wig->add_option("--method", method, "analytic | numeric")->check(CLI::IsMember({"analytic", "numeric"}));
  wig->add_option("--layout", layout, "long | matrix (csv only)")->check(CLI::IsMember({"long", "matrix"}));

  CLI::App* sim = app.add_subcommand("simulate", "Multinomial HOM trial counts");
  double mu = 0.0, tau = 0.0;
  std::uint64_t trials = 0;
  common(sim, true);
  sim->add_option("--gamma", gamma, "Detector loss reflectivity");
  sim->add_option("--mu", mu, "Frequency shift");
  sim->add_option("--tau", tau, "Time delay");
  sim->add_option("--trials", trials, "Number of repetitions")->required()->check(CLI::PositiveNumber);
  sim->add_option("--seed", seed, "64-bit seed");

  CLI::App* est = app.add_subcommand("estimate", "Maximum-likelihood delay / shift estimate from counts");
  std::string counts_s, target = "tau", window_s, mu_window_s;
  double center = 0.0;
  common(est, true);
  est->add_option("--gamma", gamma, "Detector loss reflectivity");
  est->add_option("--counts", counts_s, "n0,n1,n2")->required();
  est->add_option("--target", target, "tau | mu | joint")->check(CLI::IsMember({"tau", "mu", "joint"}));
  est->add_option("--window", window_s, "lo:hi search window (default: preset around --center)");
  est->add_option("--center", center, "Center of the preset window");
  est->add_option("--other", other, "Value of the fixed coordinate");
  est->add_option("--mu-window", mu_window_s, "lo:hi frequency window for joint estimation");

  CLI::App* cr = app.add_subcommand("cr-study", "Monte Carlo Cramer-Rao saturation study");
  std::size_t experiments = 500;
  std::uint64_t cr_trials = 10000;
  common(cr, true);
  cr->add_option("--gamma", gamma, "Detector loss reflectivity");
  CLI::Option* cr_tau = cr->add_option("--tau", tau, "Operating delay (default: Fisher-optimal flank point)");
  cr->add_option("--mu", mu, "Frequency shift");
  cr->add_option("--trials", cr_trials, "Repetitions per experiment")->check(CLI::PositiveNumber);
  cr->add_option("--experiments", experiments, "Number of experiments");
  cr->add_option("--seed", seed, "64-bit seed");
  cr->add_option("--window", window_s, "lo:hi search window");
  cr->add_option("--summary-out", companion_path, "Summary JSON path (default: <out>.summary.json or stderr)");

  CLI::App* replay = app.add_subcommand("replay", "Re-run the configuration recorded in an output file");
  std::string replay_path;
  replay->add_option("--from", replay_path, "Output file carrying a provenance header")->required();
  replay->add_option("--out", out_path, "Output path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    json c;
    auto with_state = [&](const std::string& cmd) {
      c["command"] = cmd;
      c["version"] = kVersion;
      c["state"] = spec_to_json(load_spec(state_path));
    };
    if (*replay) {
      c = read_provenance(read_file(replay_path));
    } else if (*qfi) {
      if (preset.empty() == state_path.empty()) throw InvalidSpec("give exactly one of --state or --preset");
      c["command"] = "qfi";
      c["version"] = kVersion;
      c["state"] = preset.empty() ? spec_to_json(load_spec(state_path)) : json(nullptr);
      c["preset"] = preset;
      c["convention"] = convention;
      c["repeats"] = repeats;
    } else if (*tables) {
      c = {{"command", "tables"}, {"version", kVersion}, {"which", which}, {"convention", convention}};
    } else if (*sweep) {
      with_state("fi-sweep");
      c["gamma"] = gamma;
      c["axis"] = axis;
      c["range"] = parse_range(range);
      c["other"] = other;
      c["reference"] = !companion_path.empty();
    } else if (*wig) {
      with_state("wigner");
      const State st(spec_from_json(c["state"]));
      // The time axis of W mirrors the temporal amplitude.
      c["omega"] = omega_range.empty() ? json{{"lo", st.support_lo()}, {"hi", st.support_hi()}}
                                       : parse_interval(omega_range, "--omega");
      c["time"] = time_range.empty() ? json{{"lo", -st.temporal_hi()}, {"hi", -st.temporal_lo()}}
                                     : parse_interval(time_range, "--time");
      c["nx"] = nx;
      c["ny"] = ny;
      c["method"] = method;
      c["layout"] = layout;
    } else if (*sim) {
      with_state("simulate");
      c["gamma"] = gamma;
      c["mu"] = mu;
      c["tau"] = tau;
      c["trials"] = trials;
      c["seed"] = seed;
    } else if (*est) {
      with_state("estimate");
      const auto parts = split(counts_s, ',');
      if (parts.size() != 3) throw InvalidSpec("--counts must be n0,n1,n2");
      c["gamma"] = gamma;
      c["counts"] = {parse_count(parts[0], "n0"), parse_count(parts[1], "n1"), parse_count(parts[2], "n2")};
      c["target"] = target;
      c["window"] = window_s.empty() ? json(nullptr) : parse_interval(window_s, "--window");
      c["mu_window"] = mu_window_s.empty() ? json(nullptr) : parse_interval(mu_window_s, "--mu-window");
      c["center"] = center;
      c["other"] = other;
    } else if (*cr) {
      with_state("cr-study");
      c["gamma"] = gamma;
      c["tau"] = cr_tau->count() ? json(tau) : json(nullptr);
      c["mu"] = mu;
      c["trials"] = cr_trials;
      c["experiments"] = experiments;
      c["seed"] = seed;
      c["window"] = window_s.empty() ? json(nullptr) : parse_interval(window_s, "--window");
    }
    if (!*replay) c["format"] = format.empty() ? (*sim ? "json" : "csv") : format;

    const Output o = execute(c);
    if (out_path.empty()) {
      out << o.main;
    } else {
      write_atomic(out_path, o.main);
    }
    if (o.companion) {
      std::string cpath = companion_path;
      if (cpath.empty() && c.at("command") == "cr-study" && !out_path.empty()) cpath = out_path + ".summary.json";
      if (cpath.empty()) {
        err << *o.companion;
      } else {
        write_atomic(cpath, *o.companion);
      }
    }
    return 0;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return e.kind() == ErrorKind::Validation ? 2 : 3;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace homsense::cli
