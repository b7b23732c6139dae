// gap-edit: command-line front end. Exit codes: 0 success or CLOSE, 1 FAR (or a
// failed calibration/selftest check), 2 usage or I/O error.
#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "gapedit/gapedit.hpp"

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;
using namespace gapedit;

namespace {

constexpr int kExitClose = 0;
constexpr int kExitFar = 1;
constexpr int kExitError = 2;

struct ConfigFlags {
  std::uint64_t k = 1;
  std::string seed = "0";
  std::uint32_t branching = 0;
  double lambda_const = 0.4;
  double kappa = 0;  // 0: calibration file, else the library default
  double budget = 0;
  std::uint32_t reps = 0;
  double c_h = 4.0;
  std::uint64_t implicit_max_len = 0;
  std::uint64_t nominal_length = 0;
  std::string calibration;
  std::string format = "json";
  std::string out;

  // kappa from a calibrate report: the cell with matching (n, k) when present,
  // otherwise the report's global value
  double kappa_from_file(std::uint64_t n) const {
    const json j = json::parse(read_file(calibration));
    if (j.value("version", 0) != 1) throw UsageError("calibration: unsupported version");
    for (const auto& c : j.at("cells"))
      if (c.at("n").get<std::uint64_t>() == n && c.at("k").get<std::uint64_t>() == k) return c.at("kappa").get<double>();
    return j.at("kappa").get<double>();
  }

  EngineConfig engine(std::uint64_t n) const {
    EngineConfig c;
    c.k = k;
    c.seed = Seed::parse(seed);
    c.branching = branching;
    c.lambda_const = lambda_const;
    c.budget = budget;
    c.reps = reps;
    c.c_h = c_h;
    c.implicit_max_len = implicit_max_len;
    c.nominal_length = nominal_length;
    if (kappa > 0) c.kappa = kappa;
    else if (!calibration.empty()) c.kappa = kappa_from_file(n);
    return c;
  }
};

void add_config_flags(CLI::App* app, ConfigFlags& f) {
  app->add_option("--k", f.k, "closeness parameter k")->check(CLI::PositiveNumber);
  app->add_option("--seed", f.seed, "master seed (decimal or 0x-hex)")->envname("GAPEDIT_SEED");
  app->add_option("--branching", f.branching, "tree branching B (0: formula)");
  app->add_option("--lambda-const", f.lambda_const, "lambda = c * ln n_padded")->check(CLI::PositiveNumber);
  app->add_option("--kappa", f.kappa, "threshold factor, theta = kappa * k");
  app->add_option("--budget", f.budget, "operations per repetition (0: default formula)");
  app->add_option("--reps", f.reps, "repetitions (0: 3 * ceil(log2 n_padded))");
  app->add_option("--c-h", f.c_h, "matching sample-rate constant")->check(CLI::PositiveNumber);
  app->add_option("--implicit-max-len", f.implicit_max_len, "nodes this short answer distances on demand (0: B)");
  app->add_option("--nominal-length", f.nominal_length, "length the tree is sized for (0: this text)");
  app->add_option("--calibration", f.calibration, "calibrate report supplying kappa");
  app->add_option("--format", f.format, "report format")->check(CLI::IsMember({"json", "csv"}));
}

AlphabetKind parse_alphabet(const std::string& s) {
  if (s == "bytes") return AlphabetKind::bytes;
  if (s == "utf8") return AlphabetKind::utf8;
  throw UsageError("alphabet must be bytes or utf8");
}

Side parse_side(const std::string& s) {
  if (s == "x" || s == "X") return Side::x;
  if (s == "y" || s == "Y") return Side::y;
  if (s == "both" || s == "BOTH") return Side::both;
  throw UsageError("side must be x, y or both");
}

std::string csv_line(const std::vector<std::string>& cells) {
  std::string s;
  for (std::size_t i = 0; i < cells.size(); ++i) s += (i ? "," : "") + cells[i];
  return s + "\n";
}

template <class T>
std::string str(T v) {
  std::ostringstream o;
  o << v;
  return o.str();
}

// json report to stdout, or a flat key,value CSV when asked
void emit(const json& j, const ConfigFlags& f, const std::string& out_path = {}) {
  std::string text;
  if (f.format == "csv") {
    text = "key,value\n";
    for (auto it = j.begin(); it != j.end(); ++it) {
      if (it->is_object()) {
        for (auto jt = it->begin(); jt != it->end(); ++jt) text += it.key() + "." + jt.key() + "," + jt->dump() + "\n";
      } else {
        text += it.key() + "," + it->dump() + "\n";
      }
    }
  } else {
    text = j.dump(2) + "\n";
  }
  if (!out_path.empty()) write_file_atomic(out_path, text);
  std::cout << text;
}

json stats_json(const QueryStats& s) {
  return {{"x_reads", s.x_reads},
          {"y_reads", s.y_reads},
          {"index_symbol_reads", s.index_symbol_reads},
          {"nodes_visited", s.nodes_visited},
          {"prune_hits", s.prune_hits},
          {"prune_fails", s.prune_fails},
          {"leaf_hits", s.leaf_hits},
          {"table_lookups", s.table_lookups},
          {"distance_cells", s.distance_cells},
          {"operations", s.operations},
          {"wall_nanos", s.wall_nanos}};
}

json verdict_json(const QueryResult& r, std::string_view mode) {
  const GapVerdict& g = r.verdict;
  json j;
  j["verdict"] = to_string(g.decision);
  j["mode"] = mode;
  j["estimate"] = std::isfinite(g.estimate) ? json(g.estimate) : json(nullptr);
  j["threshold"] = g.threshold;
  j["close_votes"] = g.close_votes;
  j["far_votes"] = g.far_votes;
  j["reps_run"] = g.reps_run;
  j["reps_total"] = g.reps_total;
  j["timed_out"] = g.timed_out;
  j["length_shortcut"] = g.length_shortcut;
  j["stats"] = stats_json(r.stats);
  return j;
}

json header_json(const IndexHeader& h) {
  return {{"version", h.version},
          {"side", to_string(h.side)},
          {"alphabet", to_string(h.alphabet)},
          {"n", h.text_length},
          {"nominal_length", h.nominal_length},
          {"n_padded", h.shape.n_padded},
          {"branching", h.shape.branching},
          {"depth", h.shape.depth},
          {"k", h.k},
          {"lambda_const", h.lambda_const},
          {"u_min", h.u_min},
          {"c_h", h.c_h},
          {"kappa", h.kappa},
          {"threshold", h.threshold()},
          {"c1", h.recover.c1},
          {"c2", h.recover.c2},
          {"reps", h.reps},
          {"budget", h.budget},
          {"implicit_max_len", h.implicit_max_len},
          {"seed", h.seed.hex()}};
}

// ---- preprocess ----

struct PreprocessArgs {
  ConfigFlags cfg;
  std::string input, side = "y", alphabet = "bytes";
};

int cmd_preprocess(const PreprocessArgs& a) {
  if (a.cfg.out.empty()) throw UsageError("preprocess needs --out");
  const Text t = Text::decode(read_file(a.input), parse_alphabet(a.alphabet));
  const IndexBundle b = preprocess(t, a.cfg.engine(t.size()), parse_side(a.side), parse_alphabet(a.alphabet));
  const std::string bytes = save_index(b);
  write_file_atomic(a.cfg.out, bytes);
  PreprocessStats st;
  if (b.y) st = b.y->stats;
  else st = b.x->stats;
  json j;
  j["command"] = "preprocess";
  j["index"] = a.cfg.out;
  j["bytes"] = bytes.size();
  j["header"] = header_json(b.header);
  j["stats"] = {{"wall_nanos", st.wall_nanos},
                {"nodes", st.nodes},
                {"sample_positions", st.sample_positions},
                {"fingerprint_entries", st.fingerprint_entries},
                {"dense_nodes", st.dense_nodes},
                {"dense_cells", st.dense_cells}};
  ConfigFlags f = a.cfg;
  emit(j, f);
  return 0;
}

// ---- query ----

struct QueryArgs {
  ConfigFlags cfg;
  std::string y_index, x_raw, x_index;
  bool no_early_stop = false;
};

int cmd_query(const QueryArgs& a) {
  const IndexBundle yb = load_index(read_file(a.y_index));
  if (!yb.y) throw UsageError("--y-index does not contain Y tables (side " + std::string(to_string(yb.header.side)) + ")");
  QueryOptions opt;
  opt.early_stop = !a.no_early_stop;
  opt.budget = a.cfg.budget;
  QueryResult r;
  std::string mode;
  if (!a.x_index.empty()) {
    const IndexBundle xb = load_index(read_file(a.x_index));
    if (!xb.x) throw UsageError("--x-index does not contain X fingerprints");
    r = gap_query(*xb.x, *yb.y, opt);
    mode = "two-sided";
  } else if (!a.x_raw.empty()) {
    r = gap_query(Text::decode(read_file(a.x_raw), yb.header.alphabet), *yb.y, opt);
    mode = "one-sided";
  } else {
    throw UsageError("query needs --x or --x-index");
  }
  json j = verdict_json(r, mode);
  j["k"] = yb.header.k;
  j["kappa"] = yb.header.kappa;
  emit(j, a.cfg, a.cfg.out);
  return r.verdict.decision == Decision::close ? kExitClose : kExitFar;
}

// ---- generate ----

struct GenerateArgs {
  ConfigFlags cfg;
  std::string kind = "planted";
  std::uint64_t n = 1024, edits = 0, period = 7, stride = 0, oracle_cap = 4096, far_bound = 0;
  std::uint32_t sigma = 4;
};

int cmd_generate(const GenerateArgs& a) {
  if (a.cfg.out.empty()) throw UsageError("generate needs --out DIR");
  InstanceSpec s;
  s.kind = parse_instance_kind(a.kind);
  s.n = a.n;
  s.alphabet = a.sigma;
  s.edits = a.edits;
  s.period = a.period;
  s.stride = a.stride;
  s.seed = Seed::parse(a.cfg.seed);
  const Instance inst = generate_instance(s, a.oracle_cap, a.far_bound);
  const fs::path dir(a.cfg.out);
  fs::create_directories(dir);
  write_file_atomic(dir / "x.txt", inst.x);
  write_file_atomic(dir / "y.txt", inst.y);
  json m;
  m["version"] = 1;
  m["kind"] = to_string(s.kind);
  m["n"] = s.n;
  m["alphabet_size"] = s.alphabet;
  m["edits"] = s.edits;
  m["period"] = s.period;
  m["stride"] = s.stride;
  m["seed"] = s.seed.hex();
  m["x_length"] = inst.x.size();
  m["y_length"] = inst.y.size();
  m["ed"] = inst.ed ? json(*inst.ed) : json(nullptr);
  m["ed_greater_than"] = inst.ed_above ? json(*inst.ed_above) : json(nullptr);
  m["oracle"] = inst.oracle.empty() ? json(nullptr) : json(inst.oracle);
  write_file_atomic(dir / "manifest.json", m.dump(2) + "\n");
  emit(m, a.cfg);
  return 0;
}

// ---- calibrate ----

struct CalibrateArgs {
  ConfigFlags cfg;
  std::vector<std::uint64_t> ns{1024, 4096}, ks{4, 16, 64};
  std::uint32_t trials = 100, texts = 4, psl_trials = 10000;
};

int cmd_calibrate(CalibrateArgs a) {
  if (a.trials < 100) throw UsageError("calibrate needs --trials >= 100");
  if (a.cfg.reps == 0) a.cfg.reps = 9;
  const EngineConfig base = a.cfg.engine(0);
  json cells = json::array();
  double kappa = 1, c_eff = 0;
  for (std::uint64_t n : a.ns)
    for (std::uint64_t k : a.ks) {
      if (k > n) continue;
      CellSpec c;
      c.n = n;
      c.k = k;
      c.branching = a.cfg.branching;
      c.implicit_max_len = a.cfg.implicit_max_len;
      c.reps = a.cfg.reps;
      c.texts = a.texts;
      const CellCalibration r = calibrate_cell(c, base, a.trials, mix_seed(base.seed, n, k));
      kappa = std::max(kappa, r.kappa);
      c_eff = std::max(c_eff, r.c_eff);
      cells.push_back({{"n", n},
                       {"k", k},
                       {"branching", r.shape.branching},
                       {"depth", r.shape.depth},
                       {"reps", c.reps},
                       {"trials", r.trials},
                       {"ratio_p50", r.p50},
                       {"ratio_p90", r.p90},
                       {"ratio_p99", r.p99},
                       {"ratio_max", r.max},
                       {"kappa", r.kappa},
                       {"far_feasible", 4 * r.kappa * static_cast<double>(k) <= static_cast<double>(n)},
                       {"fails_per_rep_max", r.fails_per_rep_max},
                       {"c_eff", r.c_eff},
                       {"preprocess_seconds", r.preprocess_seconds},
                       {"query_seconds", r.query_seconds}});
      std::cerr << "calibrated n=" << n << " k=" << k << " kappa=" << r.kappa << "\n";
    }
  json j;
  j["version"] = 1;
  j["kappa"] = kappa;
  j["c_h"] = base.c_h;
  j["c1"] = base.recover.c1;
  j["c2"] = base.recover.c2;
  j["C_eff"] = c_eff;
  j["lambda_const"] = base.lambda_const;
  j["cells"] = cells;
  bool ok = true;
  if (a.psl_trials > 0) {
    RecoverHarnessConfig hc;
    hc.trials = a.psl_trials;
    const RecoverReport rep = recover_contract_harness(base.recover, hc);
    const RecoverCell* w = rep.worst();
    ok = rep.passed();
    j["recover"] = {{"trials", rep.trials},
                    {"delta_target", rep.delta_target},
                    {"passed", ok},
                    {"worst_frequency", w ? w->frequency() : 0.0},
                    {"worst_cell", w ? w->family + "/" + w->adversary : ""}};
  }
  emit(j, a.cfg, a.cfg.out);
  return ok ? 0 : kExitFar;
}

// ---- bench ----

struct BenchArgs {
  ConfigFlags cfg;
  std::string suite = "reads";
  std::uint64_t n = 4096;
  std::vector<std::uint64_t> ks{4, 16, 64};
  std::uint32_t trials = 5;
};

// Fixed CSV header; documented in README.
constexpr const char* kBenchHeader = "n,k,mode,x_reads,y_reads,index_symbol_reads,operations,wall_nanos,verdict,expected,correct";

int cmd_bench(BenchArgs a) {
  if (a.suite != "reads" && a.suite != "two-sided" && a.suite != "gap") throw UsageError("suite: reads, two-sided or gap");
  std::string csv = std::string(kBenchHeader) + "\n";
  json rows = json::array();
  std::size_t correct = 0, total = 0;
  for (std::uint64_t k : a.ks) {
    ConfigFlags f = a.cfg;
    f.k = k;
    const EngineConfig cfg = f.engine(a.n);
    const Seed s = mix_seed(cfg.seed, a.n, k);
    const std::string y = generate_instance({InstanceKind::planted, a.n, 4, 0, 7, 0, s}).y;
    const YIndex yi = preprocess_y(Text::from_bytes(y), cfg);
    for (std::uint32_t t = 0; t < a.trials; ++t) {
      struct Case {
        std::string x;
        Decision expected;
      };
      std::vector<Case> cases{{plant_edits(y, k, 4, mix_seed(s, t, 1)), Decision::close}};
      if (a.suite == "gap") {
        const double need = std::ceil(4 * cfg.threshold());
        if (need <= static_cast<double>(a.n))
          cases.push_back({generate_instance({InstanceKind::far, a.n, 4, 0, 7, 0, mix_seed(s, t, 2)}, 0,
                                             static_cast<std::uint64_t>(need) - 1)
                               .x,
                           Decision::far});
      }
      for (const Case& c : cases) {
        QueryResult r;
        std::string mode;
        if (a.suite == "two-sided") {
          const XIndex xi = preprocess_x(Text::from_bytes(c.x), [&] {
            EngineConfig xc = cfg;
            xc.nominal_length = y.size();
            return xc;
          }());
          r = gap_query(xi, yi);
          mode = "two-sided";
        } else {
          r = gap_query(Text::from_bytes(c.x), yi);
          mode = "one-sided";
        }
        const bool ok = r.verdict.decision == c.expected;
        correct += ok;
        ++total;
        csv += csv_line({str(a.n), str(k), mode, str(r.stats.x_reads), str(r.stats.y_reads),
                         str(r.stats.index_symbol_reads), str(r.stats.operations), str(r.stats.wall_nanos),
                         std::string(to_string(r.verdict.decision)), std::string(to_string(c.expected)), ok ? "1" : "0"});
        rows.push_back({{"n", a.n},
                        {"k", k},
                        {"mode", mode},
                        {"x_reads", r.stats.x_reads},
                        {"y_reads", r.stats.y_reads},
                        {"index_symbol_reads", r.stats.index_symbol_reads},
                        {"operations", r.stats.operations},
                        {"wall_nanos", r.stats.wall_nanos},
                        {"verdict", to_string(r.verdict.decision)},
                        {"expected", to_string(c.expected)},
                        {"correct", ok}});
      }
    }
  }
  if (a.cfg.format == "csv") {
    if (!a.cfg.out.empty()) write_file_atomic(a.cfg.out, csv);
    std::cout << csv;
  } else {
    json j;
    j["suite"] = a.suite;
    j["rows"] = rows;
    j["correctness"] = total ? static_cast<double>(correct) / static_cast<double>(total) : 0.0;
    const std::string text = j.dump(2) + "\n";
    if (!a.cfg.out.empty()) write_file_atomic(a.cfg.out, text);
    std::cout << text;
  }
  return 0;
}

// ---- selftest ----

int cmd_selftest(const ConfigFlags& f) {
  json checks = json::array();
  bool all = true;
  auto check = [&](const std::string& name, bool ok) {
    checks.push_back({{"check", name}, {"passed", ok}});
    all = all && ok;
  };
  const std::string y = generate_instance({InstanceKind::planted, 512, 4, 0, 7, 0, Seed::from_u64(11)}).y;
  EngineConfig cfg;
  cfg.k = 4;
  cfg.kappa = 16;
  cfg.reps = 5;
  cfg.seed = Seed::parse(f.seed);
  const IndexBundle both = preprocess(Text::from_bytes(y), cfg, Side::both);
  check("identical strings are CLOSE", gap_query(Text::from_bytes(y), *both.y).verdict.decision == Decision::close);
  check("two-sided identical strings are CLOSE", gap_query(*both.x, *both.y).verdict.decision == Decision::close);
  const std::string far = generate_instance({InstanceKind::far, 512, 4, 0, 7, 0, Seed::from_u64(12)}).x;
  check("disjoint alphabets are FAR", gap_query(Text::from_bytes(far), *both.y).verdict.decision == Decision::far);
  const std::string bytes = save_index(both);
  check("index round-trips byte-identically", save_index(load_index(bytes)) == bytes);
  check("range-min transfer example",
        range_min_transfer<std::int64_t>({0, 2}, {-1, 1}, {5, 0}) == std::vector<std::int64_t>{2, 2});
  check("banded oracle agrees with DP", [] {
    const Instance i = generate_instance({InstanceKind::random, 200, 4, 0, 7, 0, Seed::from_u64(13)});
    const Text a = Text::from_bytes(i.x), b = Text::from_bytes(i.y);
    const auto r = edit_distance_banded(a, b, 200);
    return r && *r == edit_distance(a, b);
  }());
  json j;
  j["checks"] = checks;
  j["passed"] = all;
  emit(j, f);
  return all ? 0 : kExitFar;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gap-edit: (k, K)-gap edit distance with precision trees"};
  app.require_subcommand(1);

  PreprocessArgs pa;
  auto* pre = app.add_subcommand("preprocess", "build an index for one text");
  pre->add_option("input", pa.input, "text file")->required()->check(CLI::ExistingFile);
  pre->add_option("--side", pa.side, "x, y or both");
  pre->add_option("--alphabet", pa.alphabet, "bytes or utf8")->check(CLI::IsMember({"bytes", "utf8"}));
  pre->add_option("--out", pa.cfg.out, "index file")->required();
  add_config_flags(pre, pa.cfg);

  QueryArgs qa;
  auto* qry = app.add_subcommand("query", "decide CLOSE/FAR; exit 0 = CLOSE, 1 = FAR");
  qry->add_option("--y-index", qa.y_index, "Y index file")->required()->check(CLI::ExistingFile);
  auto* xr = qry->add_option("--x", qa.x_raw, "raw X file (one-sided)")->check(CLI::ExistingFile);
  auto* xi = qry->add_option("--x-index", qa.x_index, "X index file (two-sided)")->check(CLI::ExistingFile);
  xr->excludes(xi);
  qry->add_flag("--no-early-stop", qa.no_early_stop, "run every repetition");
  qry->add_option("--out", qa.cfg.out, "also write the report here");
  add_config_flags(qry, qa.cfg);

  GenerateArgs ga;
  auto* gen = app.add_subcommand("generate", "write an instance pair and manifest");
  gen->add_option("--kind", ga.kind, "random|planted|periodic|adversarial-boundary|far");
  gen->add_option("--n", ga.n, "length")->check(CLI::PositiveNumber);
  gen->add_option("--sigma", ga.sigma, "alphabet size, 2..26");
  gen->add_option("--edits", ga.edits, "planted edit count");
  gen->add_option("--period", ga.period, "period for periodic");
  gen->add_option("--stride", ga.stride, "edit spacing for adversarial-boundary");
  gen->add_option("--oracle-cap", ga.oracle_cap, "largest n verified by full DP");
  gen->add_option("--far-bound", ga.far_bound, "far instances verify ED > this (0: n - 1)");
  gen->add_option("--out", ga.cfg.out, "output directory")->required();
  add_config_flags(gen, ga.cfg);

  CalibrateArgs ca;
  auto* cal = app.add_subcommand("calibrate", "measure estimate/k on planted instances and choose kappa");
  cal->add_option("--n", ca.ns, "lengths")->delimiter(',');
  cal->add_option("--ks", ca.ks, "k values")->delimiter(',');
  cal->add_option("--trials", ca.trials, "instances per cell (>= 100)");
  cal->add_option("--texts", ca.texts, "distinct Y strings per cell");
  cal->add_option("--psl-trials", ca.psl_trials, "Recover harness trials (0 skips)");
  cal->add_option("--out", ca.cfg.out, "report file");
  add_config_flags(cal, ca.cfg);

  BenchArgs ba;
  auto* ben = app.add_subcommand("bench", "read-count and correctness rows");
  ben->add_option("--suite", ba.suite, "reads, two-sided or gap");
  ben->add_option("--n", ba.n, "length")->check(CLI::PositiveNumber);
  ben->add_option("--ks", ba.ks, "k values")->delimiter(',');
  ben->add_option("--trials", ba.trials, "instances per k");
  ben->add_option("--out", ba.cfg.out, "report file");
  add_config_flags(ben, ba.cfg);

  ConfigFlags sa;
  auto* self = app.add_subcommand("selftest", "quick end-to-end checks");
  add_config_flags(self, sa);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitError;
  }
  try {
    if (*pre) return cmd_preprocess(pa);
    if (*qry) return cmd_query(qa);
    if (*gen) return cmd_generate(ga);
    if (*cal) return cmd_calibrate(ca);
    if (*ben) return cmd_bench(ba);
    if (*self) return cmd_selftest(sa);
  } catch (const std::exception& e) {
    std::cerr << "gap-edit: error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}
