#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "clf/catalog.hpp"
#include "clf/cegis.hpp"
#include "clf/check.hpp"
#include "clf/simulate.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitPatternMismatch = 1;
constexpr int kExitNumerical = 4;
constexpr int kExitAuditFailed = 5;
constexpr int kExitUsage = 64;
constexpr int kExitHashMismatch = 65;
constexpr int kExitOutsideRegion = 66;

// CLF_LOG: quiet | error | info (default) | debug
enum class Level { Quiet = 0, Error = 1, Info = 2, Debug = 3 };

Level log_level() {
  static const Level lvl = [] {
    const char* v = std::getenv("CLF_LOG");
    const std::string s = v ? v : "info";
    if (s == "quiet") return Level::Quiet;
    if (s == "error") return Level::Error;
    if (s == "debug") return Level::Debug;
    return Level::Info;
  }();
  return lvl;
}

std::mutex log_mutex;

void log(Level lvl, const std::string& msg) {
  if (static_cast<int>(lvl) > static_cast<int>(log_level())) return;
  std::lock_guard<std::mutex> lock(log_mutex);
  std::cerr << msg << '\n';
}

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw UsageError(path + ": " + e.what());
  }
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw UsageError("cannot write " + path.string());
  out << text;
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw UsageError("not a number: '" + item + "'");
    }
  }
  return out;
}

struct ModelSource {
  std::string path;
  int bench{0};

  void add_options(CLI::App* app) {
    app->add_option("--model", path, "model JSON file");
    app->add_option("--bench", bench, "benchmark id from the built-in catalog");
  }

  [[nodiscard]] clf::Model load() const {
    if (!path.empty() && bench) throw UsageError("give either --model or --bench, not both");
    if (bench) return clf::benchmark(bench).model;
    if (path.empty()) throw UsageError("a model is required (--model or --bench)");
    return clf::load_model(read_json(path));
  }
};

std::string plant_hash(const clf::SwitchedPlant& p) { return clf::model_hash(clf::Model{p}); }

// ---------------------------------------------------------------------------

struct SynthArgs {
  ModelSource src;
  std::string tmpl;
  std::optional<double> eps;
  std::optional<double> alpha;
  double lambda{2.0};
  std::string c0;
  std::optional<std::size_t> max_iters;
  std::uint64_t seed{0};
  std::string out;
  std::string dump_relaxation;
  std::string dump_sdp;
};

clf::SynthesisConfig make_config(const clf::SwitchedPlant& plant, const SynthArgs& a) {
  auto cfg = clf::default_config(plant);
  if (!a.tmpl.empty()) {
    json spec = a.tmpl;
    if (a.tmpl != "quad") {
      spec = json::array();
      std::stringstream ss(a.tmpl);
      std::string m;
      while (std::getline(ss, m, ',')) spec.push_back(m);
    }
    cfg.tmpl = clf::template_for(plant, spec);
  }
  if (a.eps) std::fill(cfg.eps.begin(), cfg.eps.end(), *a.eps);
  if (a.alpha) cfg.alpha_scale = *a.alpha;
  cfg.lambda = a.lambda;
  if (a.max_iters) cfg.max_iters = *a.max_iters;
  cfg.seed = a.seed;
  return cfg;
}

int cmd_synth(const SynthArgs& a) {
  const auto plant = clf::as_switched(a.src.load());
  auto cfg = make_config(plant, a);
  std::optional<std::vector<double>> c0;
  if (!a.c0.empty()) {
    c0 = parse_list(a.c0);
    if (c0->size() != cfg.tmpl.size()) throw UsageError("--c0 needs " + std::to_string(cfg.tmpl.size()) + " values");
  }
  if (log_level() >= Level::Debug)
    cfg.on_iteration = [](const clf::IterationLog& l) {
      std::ostringstream os;
      os << "iteration " << l.iteration << ": witnesses " << l.witnesses << ", gamma " << l.gamma_positivity << " / "
         << l.gamma_decrease << ", " << l.outcome;
      log(Level::Debug, os.str());
    };
  const auto sp = clf::prepare(plant, cfg);
  if (!a.dump_relaxation.empty())
    write_text(a.dump_relaxation, clf::relaxation_to_json(sp.relaxed, plant.variables).dump(2) + "\n");

  const auto res = clf::synthesize(plant, cfg, c0);
  if (!a.dump_sdp.empty() && !res.candidates.empty()) {
    const auto& c = res.candidates.back();
    write_text(a.dump_sdp, "# positivity\n" + clf::dump_sdp(clf::positivity_program(sp.relaxed, c, cfg.check.strict)) +
                               "# decrease\n" + clf::dump_sdp(clf::decrease_program(sp.relaxed, c, cfg.check.strict)));
  }
  if (!res.success) {
    log(Level::Error, plant.name + ": " + clf::to_string(res.reason) + " after " + std::to_string(res.iterations) +
                          " iterations (" + res.detail + ")");
    return clf::exit_code(res.reason);
  }
  const std::string text = clf::certificate_to_json(*res.certificate).dump(2) + "\n";
  if (a.out.empty())
    std::cout << text;
  else
    write_text(a.out, text);
  log(Level::Info, plant.name + ": certificate found in " + std::to_string(res.iterations) + " iterations");
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct CertArgs {
  ModelSource src;
  std::string cert;
};

std::pair<clf::SwitchedPlant, clf::Certificate> load_pair(const CertArgs& a, int& status) {
  auto plant = clf::as_switched(a.src.load());
  if (a.cert.empty()) throw UsageError("--cert is required");
  auto cert = clf::certificate_from_json(read_json(a.cert));
  status = cert.model_hash == plant_hash(plant) ? kExitOk : kExitHashMismatch;
  return {std::move(plant), std::move(cert)};
}

int cmd_verify(const CertArgs& a, std::size_t samples, std::uint64_t seed) {
  int status = kExitOk;
  auto [plant, cert] = load_pair(a, status);
  if (status != kExitOk) {
    log(Level::Error, "certificate was issued for a different model");
    return status;
  }
  auto cfg = clf::default_config(plant);
  cfg.alpha_scale = cert.alpha_scale;
  cfg.eps.clear();
  for (const auto& m : cert.modes) cfg.eps.push_back(m.eps);
  cfg.lambda = cert.lambda;
  auto sp = clf::prepare(plant, cfg);
  for (std::size_t q = 0; q < cert.modes.size(); ++q) {
    // certificate records the phi and eps actually used
    sp.phi[q] = cert.modes[q].phi;
    sp.eps_eff[q] = cert.modes[q].eps;
    sp.decay[q] = cert.modes[q].eps * cert.modes[q].phi.polynomial();
  }
  const auto rep = clf::confirm_by_sampling(sp, cert.V, samples, seed);
  std::cout << clf::confirmation_to_json(rep).dump(2) << "\n";
  return rep.ok() ? kExitOk : kExitAuditFailed;
}

int cmd_sim(const CertArgs& a, const std::string& x0s, double horizon, std::optional<double> step,
            std::optional<double> lambda, const std::string& out) {
  int status = kExitOk;
  auto [plant, cert] = load_pair(a, status);
  if (status != kExitOk) {
    log(Level::Error, "certificate was issued for a different model");
    return status;
  }
  const auto x0 = parse_list(x0s);
  if (x0.size() != plant.n()) throw UsageError("--x0 needs " + std::to_string(plant.n()) + " values");
  if (!clf::in_pstar(cert, plant.domain, x0)) {
    log(Level::Error, "initial state lies outside the certified region");
    return kExitOutsideRegion;
  }
  const clf::SwitchingLaw law(plant, cert, lambda);
  clf::SimOptions opt;
  opt.horizon = horizon;
  opt.step = step.value_or(clf::default_step(cert));
  const auto tr = clf::simulate(law, plant.domain, x0, opt);
  const auto audit = clf::audit_trace(tr, cert, plant.domain);

  const fs::path csv(out);
  std::ostringstream os;
  clf::write_trace_csv(os, tr);
  write_text(csv, os.str());
  std::vector<std::string> ids;
  for (const auto& m : plant.modes) ids.push_back(m.id);
  fs::path stem = csv;
  stem.replace_extension();
  write_text(stem.string() + ".switches.json", clf::switches_to_json(tr, ids).dump(2) + "\n");
  write_text(stem.string() + ".audit.json", clf::audit_to_json(audit).dump(2) + "\n");
  log(Level::Info, std::string("simulation halted (") + clf::to_string(tr.halt) + ") with " +
                       std::to_string(tr.switches.size()) + " switches; audit " + (audit.ok() ? "passed" : "FAILED"));
  return audit.ok() ? kExitOk : kExitAuditFailed;
}

// ---------------------------------------------------------------------------

struct BenchRow {
  int id{0};
  std::string name;
  bool success{false};
  std::string reason;
  std::size_t iterations{0};
  std::size_t witnesses{0};
  std::optional<int> reference_iterations;
  std::string expect;
  std::optional<int> max_iterations;
  bool match{false};
  std::string certificate;
  clf::SynthesisStats stats;
};

std::string status_text(const BenchRow& r) { return r.success ? "ok" : "fail:" + r.reason; }

std::string text_table(const std::vector<BenchRow>& rows) {
  std::vector<std::vector<std::string>> cells{
      {"id", "name", "status", "itr", "witnesses", "ref_itr", "expect", "match"}};
  for (const auto& r : rows)
    cells.push_back({std::to_string(r.id), r.name, status_text(r), std::to_string(r.iterations),
                     std::to_string(r.witnesses), r.reference_iterations ? std::to_string(*r.reference_iterations) : "TO",
                     r.expect + (r.max_iterations ? "<=" + std::to_string(*r.max_iterations) : ""),
                     r.match ? "yes" : "NO"});
  std::vector<std::size_t> width(cells.front().size(), 0);
  for (const auto& row : cells)
    for (std::size_t i = 0; i < row.size(); ++i) width[i] = std::max(width[i], row[i].size());
  std::ostringstream os;
  for (const auto& row : cells) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      os << std::left << std::setw(static_cast<int>(width[i])) << row[i];
      if (i + 1 < row.size()) os << "  ";
    }
    os << "\n";
  }
  return os.str();
}

int cmd_bench(const std::string& suite, const std::vector<int>& only, unsigned jobs, const std::string& out_dir,
              std::uint64_t seed, const std::string& expected_path) {
  const json pattern = expected_path.empty() ? clf::expected_pattern() : read_json(expected_path);
  std::vector<clf::BenchmarkEntry> selected;
  for (auto& e : clf::benchmark_catalog()) {
    const bool in_suite = suite == "all" || (suite == "switched" && e.suite == clf::Suite::Switched) ||
                          (suite == "affine" && e.suite == clf::Suite::Affine);
    const bool pick = only.empty() ? in_suite : std::find(only.begin(), only.end(), e.id) != only.end();
    if (pick) selected.push_back(std::move(e));
  }
  if (selected.empty()) throw UsageError("no benchmarks selected");
  fs::create_directories(out_dir);

  std::vector<BenchRow> rows(selected.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < selected.size(); k = next++) {
      const auto& e = selected[k];
      const auto plant = clf::as_switched(e.model);
      auto cfg = clf::default_config(plant);
      cfg.seed = seed;
      BenchRow r;
      r.id = e.id;
      r.name = plant.name;
      r.reference_iterations = e.reference_iterations;
      log(Level::Info, "running " + plant.name);
      try {
        const auto res = clf::synthesize(plant, cfg);
        r.success = res.success;
        r.reason = res.success ? "" : clf::to_string(res.reason);
        r.iterations = res.iterations;
        r.witnesses = res.success ? res.certificate->witness_count : res.witnesses.size();
        r.stats = res.stats;
        if (res.success) {
          std::ostringstream name;
          name << "sys" << std::setw(2) << std::setfill('0') << e.id << ".cert.json";
          r.certificate = name.str();
          write_text(fs::path(out_dir) / r.certificate, clf::certificate_to_json(*res.certificate).dump(2) + "\n");
        }
      } catch (const clf::Error& ex) {
        r.reason = std::string("error: ") + ex.what();
      }
      log(Level::Info, plant.name + ": " + status_text(r) + " (" + std::to_string(r.iterations) + " iterations)");
      rows[k] = std::move(r);
    }
  };
  const unsigned n_threads = std::max(1U, std::min<unsigned>(jobs, static_cast<unsigned>(selected.size())));
  std::vector<std::thread> pool;
  for (unsigned i = 1; i < n_threads; ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  bool all_match = true;
  for (auto& r : rows) {
    r.expect = "must-succeed";
    for (const auto& p : pattern.at("rows"))
      if (p.at("id").get<int>() == r.id) {
        r.expect = p.at("expect").get<std::string>();
        if (p.contains("max_iterations")) r.max_iterations = p.at("max_iterations").get<int>();
      }
    if (r.expect == "allowed-fail")
      r.match = true;
    else
      r.match = r.success && r.iterations >= 1 &&
                (!r.max_iterations || r.iterations <= static_cast<std::size_t>(*r.max_iterations));
    all_match = all_match && r.match;
  }

  json report{{"suite", only.empty() ? suite : "selection"}, {"seed", seed}, {"pattern_match", all_match}};
  json timings = json::array();
  auto jrows = json::array();
  for (const auto& r : rows) {
    json j{{"id", r.id},
           {"name", r.name},
           {"status", r.success ? "success" : "failure"},
           {"reason", r.reason},
           {"iterations", r.iterations},
           {"witness_count", r.witnesses},
           {"expect", r.expect},
           {"match", r.match}};
    j["reference_iterations"] = r.reference_iterations ? json(*r.reference_iterations) : json(nullptr);
    j["max_iterations"] = r.max_iterations ? json(*r.max_iterations) : json(nullptr);
    j["certificate"] = r.certificate.empty() ? json(nullptr) : json(r.certificate);
    jrows.push_back(j);
    timings.push_back({{"id", r.id},
                       {"candidate_seconds", r.stats.candidate_seconds},
                       {"sdp_seconds", r.stats.sdp_seconds},
                       {"total_seconds", r.stats.total_seconds}});
  }
  report["rows"] = jrows;
  const std::string table = text_table(rows);
  write_text(fs::path(out_dir) / "report.json", report.dump(2) + "\n");
  write_text(fs::path(out_dir) / "report.txt", table);
  write_text(fs::path(out_dir) / "timings.json", timings.dump(2) + "\n");
  std::cout << table;
  return all_match ? kExitOk : kExitPatternMismatch;
}

int cmd_catalog_export(const std::string& out_dir) {
  for (const auto& doc : clf::catalog_documents()) {
    std::ostringstream name;
    name << "sys" << std::setw(2) << std::setfill('0') << doc["metadata"]["id"].get<int>() << ".json";
    write_text(fs::path(out_dir) / name.str(), doc.dump(2) + "\n");
  }
  write_text(fs::path(out_dir) / "expected.json", clf::expected_pattern().dump(2) + "\n");
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Control Lyapunov function synthesis for switched polynomial systems"};
  app.require_subcommand(1);

  SynthArgs sa;
  auto* synth = app.add_subcommand("synth", "synthesize a certificate");
  sa.src.add_options(synth);
  synth->add_option("--template", sa.tmpl, "\"quad\" or a comma-separated monomial list");
  synth->add_option("--eps", sa.eps, "decrease rate for every mode");
  synth->add_option("--alpha", sa.alpha, "positivity scale of alpha(x) = a |x|^2");
  synth->add_option("--lambda", sa.lambda, "switching threshold factor (> 1)")->check(CLI::PositiveNumber);
  synth->add_option("--c0", sa.c0, "comma-separated initial candidate");
  synth->add_option("--max-iters", sa.max_iters, "iteration cap");
  synth->add_option("--seed", sa.seed, "sampling seed");
  synth->add_option("--out", sa.out, "certificate path (stdout when absent)");
  synth->add_option("--dump-relaxation", sa.dump_relaxation, "write the relaxation data as JSON");
  synth->add_option("--dump-sdp", sa.dump_sdp, "write the last check programs as text");

  CertArgs va;
  std::size_t samples = 100000;
  std::uint64_t vseed = 0;
  auto* verify = app.add_subcommand("verify", "re-check a certificate by sampling");
  va.src.add_options(verify);
  verify->add_option("--cert", va.cert, "certificate JSON")->required();
  verify->add_option("--samples", samples, "sample count");
  verify->add_option("--seed", vseed, "sampling seed");

  CertArgs ma;
  std::string x0;
  double horizon = 50.0;
  std::optional<double> step, lambda;
  std::string trace_out = "trace.csv";
  auto* sim = app.add_subcommand("sim", "simulate the closed loop and audit the trace");
  ma.src.add_options(sim);
  sim->add_option("--cert", ma.cert, "certificate JSON")->required();
  sim->add_option("--x0", x0, "comma-separated initial state")->required();
  sim->add_option("--horizon", horizon, "simulated time");
  sim->add_option("--step", step, "RK4 step");
  sim->add_option("--lambda", lambda, "override the switching factor");
  sim->add_option("--out", trace_out, "trace CSV path");

  std::string suite = "switched", out_dir = "bench-out", expected;
  std::vector<int> only;
  unsigned jobs = 1;
  std::uint64_t bseed = 0;
  auto* bench = app.add_subcommand("bench", "run the benchmark suite");
  bench->add_option("--suite", suite, "switched | affine | all")->check(CLI::IsMember({"switched", "affine", "all"}));
  bench->add_option("--only", only, "benchmark ids")->delimiter(',');
  bench->add_option("--jobs", jobs, "concurrent benchmarks");
  bench->add_option("--out-dir", out_dir, "output directory");
  bench->add_option("--seed", bseed, "sampling seed");
  bench->add_option("--expected", expected, "expected pattern JSON (built-in when absent)");

  std::string cat_dir = "benchmarks";
  auto* catalog = app.add_subcommand("catalog", "export the benchmark catalog");
  catalog->add_option("--out-dir", cat_dir, "output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    if (synth->parsed()) return cmd_synth(sa);
    if (verify->parsed()) return cmd_verify(va, samples, vseed);
    if (sim->parsed()) return cmd_sim(ma, x0, horizon, step, lambda, trace_out);
    if (bench->parsed()) return cmd_bench(suite, only, jobs, out_dir, bseed, expected);
    if (catalog->parsed()) return cmd_catalog_export(cat_dir);
  } catch (const UsageError& e) {
    log(Level::Error, std::string("usage: ") + e.what());
    return kExitUsage;
  } catch (const clf::ModelError& e) {
    log(Level::Error, std::string("model: ") + e.what());
    return kExitUsage;
  } catch (const clf::ParseError& e) {
    log(Level::Error, std::string("parse: ") + e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    log(Level::Error, std::string("error: ") + e.what());
    return kExitNumerical;
  }
  return kExitUsage;
}
