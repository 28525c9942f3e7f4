#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "poocox/em.hpp"
#include "poocox/errors.hpp"
#include "poocox/inference.hpp"
#include "poocox/pedigree.hpp"
#include "poocox/report.hpp"
#include "poocox/simulator.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace poocox;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitIo = 4;

struct SimulateArgs {
  int families = 100;
  double beta = -0.6;
  double q = 0.2;
  std::string scenario = "S1";
  std::uint64_t seed = 1;
  double censor_min = 15.0;
  double censor_max = 80.0;
};

struct FitArgs {
  std::string ped;
  std::string poo;
  EMConfig em;
  int bootstrap = 0;
};

struct ReplicateArgs {
  std::vector<std::string> cases{"A", "B", "C"};
  std::vector<std::string> scenarios{"S0", "S1", "S2", "Oracle"};
  int replicates = 200;
  std::uint64_t seed = 1;
  double q = 0.2;
  double epsilon = 0.0;
  double eta = 0.0;
  double tol = 1e-4;
  int max_iter = 1000;
  bool proband_correction = false;
  int jobs = 1;
};

struct CheckOracleArgs {
  std::string ped;
  std::string poo;
  std::string report;
  double q = 0.2;
  double epsilon = 0.01;
  double eta = 0.001;
  std::size_t cap = kBruteForceCap;
};

struct CurveArgs {
  std::string report;
  std::vector<double> z;
  double max_age = 100.0;
  double step = 1.0;
  double level = 0.95;
};

// Config echo: every resolved parameter except the output location.
json echo(const SimulateArgs& a) {
  return {{"families", a.families}, {"beta", a.beta},         {"q", a.q},
          {"scenario", a.scenario}, {"seed", a.seed},         {"censor_min", a.censor_min},
          {"censor_max", a.censor_max}};
}
void load(const json& j, SimulateArgs& a) {
  a.families = j.value("families", a.families);
  a.beta = j.value("beta", a.beta);
  a.q = j.value("q", a.q);
  a.scenario = j.value("scenario", a.scenario);
  a.seed = j.value("seed", a.seed);
  a.censor_min = j.value("censor_min", a.censor_min);
  a.censor_max = j.value("censor_max", a.censor_max);
}

json echo(const FitArgs& a) {
  json j = to_json(a.em);
  j["ped"] = a.ped;
  j["poo"] = a.poo;
  return j;
}
void load(const json& j, FitArgs& a) {
  a.em = em_config_from_json(j);
  a.bootstrap = a.em.bootstrap_B.value_or(0);
  a.ped = j.value("ped", a.ped);
  a.poo = j.value("poo", a.poo);
}

json echo(const ReplicateArgs& a) {
  return {{"cases", a.cases}, {"scenarios", a.scenarios}, {"replicates", a.replicates},
          {"seed", a.seed},   {"q", a.q},                 {"epsilon", a.epsilon}, {"eta", a.eta}, {"tol", a.tol},
          {"max_iter", a.max_iter}, {"proband_correction", a.proband_correction}, {"jobs", a.jobs}};
}
void load(const json& j, ReplicateArgs& a) {
  a.cases = j.value("cases", a.cases);
  a.scenarios = j.value("scenarios", a.scenarios);
  a.replicates = j.value("replicates", a.replicates);
  a.seed = j.value("seed", a.seed);
  a.q = j.value("q", a.q);
  a.epsilon = j.value("epsilon", a.epsilon);
  a.eta = j.value("eta", a.eta);
  a.tol = j.value("tol", a.tol);
  a.max_iter = j.value("max_iter", a.max_iter);
  a.proband_correction = j.value("proband_correction", a.proband_correction);
  a.jobs = j.value("jobs", a.jobs);
}

json echo(const CheckOracleArgs& a) {
  return {{"ped", a.ped}, {"poo", a.poo}, {"report", a.report}, {"q", a.q},
          {"epsilon", a.epsilon}, {"eta", a.eta}, {"cap", a.cap}};
}
void load(const json& j, CheckOracleArgs& a) {
  a.ped = j.value("ped", a.ped);
  a.poo = j.value("poo", a.poo);
  a.report = j.value("report", a.report);
  a.q = j.value("q", a.q);
  a.epsilon = j.value("epsilon", a.epsilon);
  a.eta = j.value("eta", a.eta);
  a.cap = j.value("cap", a.cap);
}

json echo(const CurveArgs& a) {
  return {{"report", a.report}, {"z", a.z}, {"max_age", a.max_age}, {"step", a.step}, {"level", a.level}};
}
void load(const json& j, CurveArgs& a) {
  a.report = j.value("report", a.report);
  a.z = j.value("z", a.z);
  a.max_age = j.value("max_age", a.max_age);
  a.step = j.value("step", a.step);
  a.level = j.value("level", a.level);
}

json config_document(const std::string& subcommand, json params) {
  return {{"version", kVersion}, {"subcommand", subcommand}, {"parameters", std::move(params)}};
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("cannot read " + path);
  return ss.str();
}

json read_json(const std::string& path) {
  const auto text = read_text(path);
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

// All outputs of a command are staged and committed together, so a failure
// leaves no partial files behind.
class OutputSet {
 public:
  explicit OutputSet(fs::path dir) : dir_(std::move(dir)) {}
  void add(const std::string& name, std::string content) { files_.emplace_back(name, std::move(content)); }

  void commit() const {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw IoError("cannot create " + dir_.string() + ": " + ec.message());
    std::vector<fs::path> staged;
    try {
      for (const auto& [name, content] : files_) {
        const auto tmp = dir_ / (name + ".tmp");
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        staged.push_back(tmp);
        if (!out) throw IoError("cannot write " + tmp.string());
        out << content;
        out.close();
        if (!out) throw IoError("cannot write " + tmp.string());
      }
    } catch (...) {
      for (const auto& p : staged) fs::remove(p, ec);
      throw;
    }
    for (const auto& [name, content] : files_) {
      fs::rename(dir_ / (name + ".tmp"), dir_ / name, ec);
      if (ec) throw IoError("cannot write " + (dir_ / name).string() + ": " + ec.message());
    }
  }

 private:
  fs::path dir_;
  std::vector<std::pair<std::string, std::string>> files_;
};

std::vector<Pedigree> load_families(const std::string& ped, const std::string& poo) {
  auto families = read_ped_file(ped);
  if (!poo.empty()) {
    std::ifstream in(poo);
    if (!in) throw IoError("cannot open " + poo);
    apply_origin_sidecar(in, families);
  }
  std::map<std::string, std::pair<std::size_t, std::string>> findings;
  for (const auto& f : families)
    for (const auto& w : validate(f)) {
      auto& [count, first] = findings[w.code];
      if (count++ == 0) first = w.message;
    }
  for (const auto& [code, entry] : findings) {
    if (entry.first == 1)
      std::cerr << "warning: " << entry.second << '\n';
    else
      std::cerr << fmt::format("warning: {} ({} occurrences; first: {})\n", code, entry.first, entry.second);
  }
  return families;
}

Scenario scenario_or_throw(const std::string& s) {
  auto sc = parse_scenario(s);
  if (!sc) throw ValidationError("unknown scenario '" + s + "' (expected S0, S1, S2 or Oracle)");
  return *sc;
}

std::vector<StudyCase> resolve_cases(const std::vector<std::string>& specs) {
  const auto reference = reference_cases();
  std::vector<StudyCase> out;
  for (const auto& entry : specs) {
    bool found = false;
    for (const auto& c : reference)
      if (c.label == entry) {
        out.push_back(c);
        found = true;
      }
    if (found) continue;
    const auto a = entry.find(':');
    const auto b = a == std::string::npos ? a : entry.find(':', a + 1);
    if (b == std::string::npos) throw ValidationError("case '" + entry + "' is neither A/B/C nor LABEL:FAMILIES:BETA");
    try {
      std::size_t used = 0;
      const std::string n_text = entry.substr(a + 1, b - a - 1);
      const std::string beta_text = entry.substr(b + 1);
      StudyCase c{entry.substr(0, a), std::stoi(n_text, &used), 0.0};
      if (used != n_text.size()) throw std::invalid_argument(n_text);
      c.beta = std::stod(beta_text, &used);
      if (used != beta_text.size()) throw std::invalid_argument(beta_text);
      out.push_back(c);
    } catch (const std::logic_error&) {
      throw ValidationError("malformed case '" + entry + "'");
    }
  }
  return out;
}

int run_simulate(const SimulateArgs& a, const std::string& out_dir) {
  SimulationConfig cfg;
  cfg.families = a.families;
  cfg.beta = a.beta;
  cfg.q = a.q;
  cfg.censor_min = a.censor_min;
  cfg.censor_max = a.censor_max;
  const auto scenario = scenario_or_throw(a.scenario);
  const auto data = simulate_families(cfg, scenario, a.seed);

  OutputSet out(out_dir);
  std::ostringstream ped;
  write_ped(ped, data.families);
  out.add("pedigree.ped", ped.str());
  std::ostringstream truth;
  write_truth(truth, data.truth);
  out.add("truth.txt", truth.str());
  if (scenario == Scenario::Oracle) {
    std::ostringstream poo;
    write_origin_sidecar(poo, data.families);
    out.add("poo.txt", poo.str());
  }
  out.add("config.json", config_document("simulate", echo(a)).dump(2) + "\n");
  out.commit();
  std::cout << fmt::format("simulated {} families ({} individuals), scenario {}, seed {}\n", data.families.size(),
                           data.families.size() * kFamilySize, a.scenario, a.seed);
  return 0;
}

int run_fit(FitArgs a, const std::string& out_dir) {
  if (a.bootstrap > 0) a.em.bootstrap_B = a.bootstrap;
  a.em.check();
  const auto families = load_families(a.ped, a.poo);
  const auto result = em_fit(families, a.em);
  const auto report = fit_report(result, a.em);

  OutputSet out(out_dir);
  out.add("report.json", report.dump(2) + "\n");
  out.add("config.json", config_document("fit", echo(a)).dump(2) + "\n");
  out.commit();
  std::cout << fmt::format("beta_hat = {:.6f}  se = {:.6f}  p = {}  iterations = {}  converged = {}  seed = {}\n",
                           result.fit.beta_hat, std::sqrt(result.fit.covariance(0, 0)),
                           report["p_wald"].is_null() ? std::string("NA") : fmt::format("{:.4g}", report["p_wald"].get<double>()),
                           result.iterations, result.converged ? "yes" : "no", a.em.seed);
  for (const auto& w : result.warnings) std::cerr << "warning: " << w << '\n';
  for (const auto& w : result.trace.warnings) std::cerr << "warning: " << w << '\n';
  return 0;
}

int run_replicate(const ReplicateArgs& a, const std::string& out_dir) {
  StudyConfig cfg;
  cfg.cases = resolve_cases(a.cases);
  cfg.scenarios.clear();
  for (const auto& s : a.scenarios) cfg.scenarios.push_back(scenario_or_throw(s));
  cfg.replicates = a.replicates;
  cfg.seed = a.seed;
  cfg.simulation.q = a.q;
  cfg.epsilon = a.epsilon;
  cfg.eta = a.eta;
  cfg.em.tol = a.tol;
  cfg.em.max_iter = a.max_iter;
  cfg.em.proband_correction = a.proband_correction;
  cfg.jobs = a.jobs;
  if (a.jobs < 1) throw ValidationError("jobs must be positive");
  const auto rows = replicate_study(cfg);

  OutputSet out(out_dir);
  std::ostringstream csv;
  write_study_csv(csv, rows);
  out.add("study.csv", csv.str());
  out.add("config.json", config_document("replicate", echo(a)).dump(2) + "\n");
  out.commit();
  std::size_t failed = 0;
  for (const auto& r : rows) failed += r.error.empty() ? 0 : 1;
  std::cout << fmt::format("{} rows written ({} failed), seed {}\n", rows.size(), failed, a.seed);
  return 0;
}

int run_check_oracle(const CheckOracleArgs& a, const std::optional<std::string>& out_dir) {
  const auto families = load_families(a.ped, a.poo);
  ModelParams params;
  params.q = a.q;
  params.epsilon = a.epsilon;
  params.eta = a.eta;
  if (!a.report.empty()) {
    const auto fit = fit_summary_from_report(read_json(a.report));
    params.beta = fit.beta;
    params.gamma = fit.gamma;
    params.baseline = fit.baseline;
  }
  params.check();
  for (const auto& ped : families)
    if (ped.size() > a.cap)
      throw CapExceeded(fmt::format("family {} has {} members; brute force is capped at {}", ped.family_id(),
                                    ped.size(), a.cap));

  constexpr double kTolerance = 1e-8;
  json per_family = json::array();
  double overall = 0.0;
  for (const auto& ped : families) {
    const auto jt = posterior_marginals(ped, params);
    const auto bf = brute_force_marginals(ped, params, a.cap);
    json individuals = json::array();
    double fam_max = 0.0;
    for (std::size_t i = 0; i < ped.size(); ++i) {
      double dev = 0.0;
      for (std::size_t g = 0; g < 4; ++g) dev = std::max(dev, std::abs(jt.marginals[i][g] - bf.marginals[i][g]));
      fam_max = std::max(fam_max, dev);
      individuals.push_back({{"id", ped[i].individual_id}, {"max_deviation", dev}});
    }
    overall = std::max(overall, fam_max);
    per_family.push_back({{"family_id", ped.family_id()},
                          {"members", ped.size()},
                          {"max_deviation", fam_max},
                          {"log_evidence_deviation", std::abs(jt.log_evidence - bf.log_evidence)},
                          {"individuals", individuals}});
  }
  const bool pass = overall <= kTolerance;
  json report = {{"version", kVersion},
                 {"tolerance", kTolerance},
                 {"max_deviation", overall},
                 {"pass", pass},
                 {"families", per_family}};
  if (out_dir) {
    OutputSet out(*out_dir);
    out.add("oracle.json", report.dump(2) + "\n");
    out.add("config.json", config_document("check-oracle", echo(a)).dump(2) + "\n");
    out.commit();
  }
  std::cout << fmt::format("{} families, max marginal deviation {:.3e}: {}\n", families.size(), overall,
                           pass ? "PASS" : "FAIL");
  return pass ? 0 : kExitNumerical;
}

int run_curve(const CurveArgs& a, const std::string& out_dir) {
  const auto fit = fit_summary_from_report(read_json(a.report));
  const auto rows = survival_table(fit, a.z, a.max_age, a.step, a.level);
  OutputSet out(out_dir);
  std::ostringstream csv;
  write_curve_csv(csv, rows);
  out.add("curve.csv", csv.str());
  out.add("config.json", config_document("curve", echo(a)).dump(2) + "\n");
  out.commit();
  std::cout << fmt::format("{} ages written{}\n", rows.size(),
                           fit.bootstrap.empty() ? " (no bootstrap replicates: bands are NA)" : "");
  return 0;
}

void print_exception(const std::exception& e, int depth = 0) {
  std::cerr << (depth == 0 ? "error: " : "  caused by: ") << e.what() << '\n';
  try {
    std::rethrow_if_nested(e);
  } catch (const std::exception& inner) {
    print_exception(inner, depth + 1);
  }
}

// The innermost cause decides the exit code.
int exit_code_for(const std::exception& e) {
  try {
    std::rethrow_if_nested(e);
  } catch (const std::exception& inner) {
    return exit_code_for(inner);
  }
  if (dynamic_cast<const IoError*>(&e)) return kExitIo;
  if (dynamic_cast<const ValidationError*>(&e)) return kExitValidation;
  if (dynamic_cast<const NumericalError*>(&e)) return kExitNumerical;
  if (dynamic_cast<const json::exception*>(&e)) return kExitValidation;
  return kExitNumerical;
}

// `--config FILE` is applied before the regular parse so that explicit flags
// override echoed values.
std::optional<std::string> find_config(int argc, char** argv) {
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--config" && i + 1 < argc) return std::string(argv[i + 1]);
    if (arg.rfind("--config=", 0) == 0) return arg.substr(9);
  }
  return std::nullopt;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Parent-of-origin Cox survival estimation on pedigrees"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  SimulateArgs sim;
  FitArgs fit;
  ReplicateArgs rep;
  CheckOracleArgs oracle;
  CurveArgs curve;
  std::string out_dir;
  std::string config_path;
  bool full = false;

  auto add_common = [&](CLI::App* sub, bool out_required) {
    auto* o = sub->add_option("--out", out_dir, "Output directory");
    if (out_required) o->required();
    sub->add_option("--config", config_path, "Load parameters from a config echo; explicit flags take precedence");
  };

  auto* s = app.add_subcommand("simulate", "Simulate ten-person families under a genotyping scenario");
  s->add_option("--families", sim.families, "Number of families");
  s->add_option("--beta", sim.beta, "Paternal-origin log hazard ratio");
  s->add_option("--q", sim.q, "Disease allele frequency");
  s->add_option("--scenario", sim.scenario, "S0, S1, S2 or Oracle");
  s->add_option("--seed", sim.seed, "Random seed");
  s->add_option("--censor-min", sim.censor_min, "Lower bound of uniform censoring age");
  s->add_option("--censor-max", sim.censor_max, "Upper bound of uniform censoring age");
  add_common(s, true);

  auto* f = app.add_subcommand("fit", "Fit the EM estimator to a PED file and write a JSON report");
  f->add_option("--ped", fit.ped, "PED phenotype file");
  f->add_option("--poo", fit.poo, "Optional parent-of-origin sidecar (family id poo)");
  f->add_option("--q", fit.em.q, "Disease allele frequency");
  f->add_option("--epsilon", fit.em.epsilon, "False negative rate of the gene test");
  f->add_option("--eta", fit.em.eta, "False positive rate of the gene test");
  f->add_flag("--proband-correction", fit.em.proband_correction, "Remove proband phenotypes");
  f->add_option("--bootstrap", fit.bootstrap, "Family bootstrap replicates (0 = none)");
  f->add_option("--jobs", fit.em.jobs, "Bootstrap worker threads");
  f->add_option("--tol", fit.em.tol, "Convergence tolerance on baseline survival at test ages");
  f->add_option("--test-ages", fit.em.test_ages, "Ages monitored for convergence");
  f->add_option("--max-iter", fit.em.max_iter, "Maximum EM iterations");
  f->add_option("--seed", fit.em.seed, "Seed for initial weights and bootstrap");
  add_common(f, true);

  auto* r = app.add_subcommand("replicate", "Run the simulation study and write one CSV row per replicate");
  r->add_option("--cases", rep.cases, "Cases: A, B, C or LABEL:FAMILIES:BETA")->delimiter(',');
  r->add_option("--scenarios", rep.scenarios, "Scenarios to run")->delimiter(',');
  r->add_option("--replicates", rep.replicates, "Replicates per case and scenario");
  r->add_option("--seed", rep.seed, "Study seed");
  r->add_option("--q", rep.q, "Disease allele frequency");
  r->add_option("--epsilon", rep.epsilon, "Test error rate assumed by the fit (simulated tests are error-free)");
  r->add_option("--eta", rep.eta, "Test error rate assumed by the fit");
  r->add_option("--tol", rep.tol, "EM tolerance");
  r->add_option("--max-iter", rep.max_iter, "Maximum EM iterations");
  r->add_flag("--proband-correction", rep.proband_correction, "Remove proband phenotypes");
  r->add_option("--jobs", rep.jobs, "Worker threads (results do not depend on it)");
  r->add_flag("--full", full, "Full design: cases A, B, C, all scenarios, 200 replicates");
  add_common(r, true);

  auto* c = app.add_subcommand("check-oracle", "Compare junction-tree marginals with brute-force enumeration");
  c->add_option("--ped", oracle.ped, "PED phenotype file");
  c->add_option("--poo", oracle.poo, "Optional parent-of-origin sidecar");
  c->add_option("--report", oracle.report, "Take beta, gamma and baseline from a fit report");
  c->add_option("--q", oracle.q, "Disease allele frequency");
  c->add_option("--epsilon", oracle.epsilon, "False negative rate of the gene test");
  c->add_option("--eta", oracle.eta, "False positive rate of the gene test");
  c->add_option("--cap", oracle.cap, "Largest family enumerated");
  add_common(c, false);

  auto* v = app.add_subcommand("curve", "Export survival curves by parent of origin from a fit report");
  v->add_option("--report", curve.report, "Fit report (report.json)");
  v->add_option("--z", curve.z, "Covariate profile")->delimiter(',');
  v->add_option("--max-age", curve.max_age, "Last age of the grid");
  v->add_option("--step", curve.step, "Grid step");
  v->add_option("--level", curve.level, "Band coverage");
  add_common(v, true);

  try {
    if (const auto cfg = find_config(argc, argv)) {
      const auto doc = read_json(*cfg);
      const auto sub = doc.at("subcommand").get<std::string>();
      const auto& p = doc.at("parameters");
      if (sub == "simulate") load(p, sim);
      else if (sub == "fit") load(p, fit);
      else if (sub == "replicate") load(p, rep);
      else if (sub == "check-oracle") load(p, oracle);
      else if (sub == "curve") load(p, curve);
      else throw ValidationError("config echo names unknown subcommand '" + sub + "'");
    }
  } catch (const std::exception& e) {
    print_exception(e);
    return exit_code_for(e);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    if (s->parsed()) return run_simulate(sim, out_dir);
    if (f->parsed()) {
      if (fit.ped.empty()) throw ValidationError("--ped is required");
      return run_fit(fit, out_dir);
    }
    if (r->parsed()) {
      if (full) rep = ReplicateArgs{{"A", "B", "C"}, {"S0", "S1", "S2", "Oracle"}, 200, rep.seed, rep.q, rep.epsilon, rep.eta, rep.tol,
                                    rep.max_iter, rep.proband_correction, rep.jobs};
      return run_replicate(rep, out_dir);
    }
    if (c->parsed()) {
      if (oracle.ped.empty()) throw ValidationError("--ped is required");
      return run_check_oracle(oracle, out_dir.empty() ? std::nullopt : std::optional<std::string>(out_dir));
    }
    if (v->parsed()) {
      if (curve.report.empty()) throw ValidationError("--report is required");
      return run_curve(curve, out_dir);
    }
  } catch (const std::exception& e) {
    print_exception(e);
    return exit_code_for(e);
  }
  return kExitValidation;
}
