// conformal-lab: experiment harness over the conformal_lab headers.
//
// Subcommands: gen, partition, bumps, spectrum, heat, certify, resist,
// separate, barrier, subdiff, walk, optimize, cbt, plus `run --config FILE`
// which executes any of them from a flat key-value config with sections.
//
// Contracts:
//   - reports are byte-deterministic for a fixed (config, seed); wall-clock
//     timings are printed to stderr only
//   - CSV output has no header rows, '.' decimal, LF endings, and numbers
//     rounded to 12 significant digits; JSON carries full-precision values
//     inside a schema/version/seed/config envelope
//   - exit codes: 0 success, 64 usage or config error, 65 deterministic
//     invariant violation, 70 runtime failure

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <deque>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "conformal_lab/bumps.hpp"
#include "conformal_lab/confopt.hpp"
#include "conformal_lab/generators.hpp"
#include "conformal_lab/graph_core.hpp"
#include "conformal_lab/partitions.hpp"
#include "conformal_lab/resistance.hpp"
#include "conformal_lab/separators.hpp"
#include "conformal_lab/spectral.hpp"
#include "conformal_lab/walks.hpp"

namespace {

using json = nlohmann::ordered_json;
using namespace conformal_lab;

constexpr const char* kTool = "conformal-lab";
constexpr const char* kVersion = "0.1.0";
constexpr int kExitUsage = 64;
constexpr int kExitInvariant = 65;
constexpr int kExitRuntime = 70;

const std::set<std::string>& experiment_kinds() {
  static const std::set<std::string> kinds = {
      "gen",    "partition", "bumps",   "spectrum", "heat",
      "certify", "resist",   "separate", "barrier", "subdiff",
      "walk",   "optimize",  "cbt"};
  return kinds;
}

// ---------------------------------------------------------------------------
// small parsing/formatting helpers

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

long long parse_ll(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    long long v = std::stoll(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("");
    return v;
  } catch (...) {
    throw std::invalid_argument(what + ": expected an integer, got '" + s +
                                "'");
  }
}

std::uint64_t parse_u64(const std::string& s, const std::string& what) {
  try {
    if (!s.empty() && s[0] == '-') throw std::invalid_argument("");
    std::size_t pos = 0;
    std::uint64_t v = std::stoull(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("");
    return v;
  } catch (...) {
    throw std::invalid_argument(what + ": expected a nonnegative integer, got '" +
                                s + "'");
  }
}

double parse_num(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument("");
    return v;
  } catch (...) {
    throw std::invalid_argument(what + ": expected a number, got '" + s + "'");
  }
}

std::vector<std::string> split_commas(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, ',')) out.push_back(trim(item));
  if (!s.empty() && s.back() == ',') out.push_back("");
  return out;
}

// CSV presentation rounding: 12 significant digits, '.' decimal.
std::string csv_num(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

std::string csv_row(std::initializer_list<std::string> fields) {
  std::string out;
  bool first = true;
  for (const auto& f : fields) {
    if (!first) out += ',';
    out += f;
    first = false;
  }
  return out;
}

void write_text(const std::string& out_path, const std::string& text) {
  if (out_path.empty()) {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream f(out_path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open output file: " + out_path);
  f << text;
  f.flush();
  if (!f) throw std::runtime_error("write failed: " + out_path);
}

std::string slurp_or_die(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::invalid_argument("cannot open file: " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

// ---------------------------------------------------------------------------
// experiment configuration: flat key-value text with three sections

struct ExperimentConfig {
  std::string kind;
  std::uint64_t seed = 0;
  int threads = 1;
  std::string format;  // empty = subcommand default
  std::string out;     // empty = stdout
  std::map<std::string, std::string> generator;
  std::map<std::string, std::string> params;
};

ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig cfg;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int ln = 0;
  auto fail = [&](const std::string& msg) {
    throw std::invalid_argument("config line " + std::to_string(ln) + ": " +
                                msg);
  };
  while (std::getline(in, line)) {
    ++ln;
    std::string s = trim(line);
    if (s.empty() || s[0] == '#' || s[0] == ';') continue;
    if (s.front() == '[') {
      if (s.back() != ']') fail("unterminated section header");
      section = trim(s.substr(1, s.size() - 2));
      if (section != "experiment" && section != "generator" &&
          section != "params")
        fail("unknown section [" + section + "]");
      continue;
    }
    std::size_t eq = s.find('=');
    if (eq == std::string::npos) fail("expected 'key = value'");
    std::string key = trim(s.substr(0, eq));
    std::string value = trim(s.substr(eq + 1));
    if (key.empty()) fail("empty key");
    if (section.empty()) fail("key outside any section");
    if (section == "experiment") {
      if (key == "kind") {
        cfg.kind = value;
      } else if (key == "seed") {
        cfg.seed = parse_u64(value, "config seed");
      } else if (key == "threads") {
        long long t = parse_ll(value, "config threads");
        if (t < 1) fail("threads must be >= 1");
        cfg.threads = static_cast<int>(t);
      } else if (key == "format") {
        cfg.format = value;
      } else if (key == "out") {
        cfg.out = value;
      } else {
        fail("unknown experiment key '" + key + "'");
      }
    } else {
      auto& dst = (section == "generator") ? cfg.generator : cfg.params;
      if (!dst.emplace(key, value).second)
        fail("duplicate key '" + key + "' in [" + section + "]");
    }
  }
  if (cfg.kind.empty())
    throw std::invalid_argument("config: missing experiment.kind");
  if (experiment_kinds().count(cfg.kind) == 0)
    throw std::invalid_argument("config: unknown experiment kind '" + cfg.kind +
                                "'");
  return cfg;
}

std::string serialize_config(const ExperimentConfig& cfg) {
  std::ostringstream s;
  s << "[experiment]\n";
  s << "kind = " << cfg.kind << "\n";
  s << "seed = " << cfg.seed << "\n";
  s << "threads = " << cfg.threads << "\n";
  if (!cfg.format.empty()) s << "format = " << cfg.format << "\n";
  if (!cfg.out.empty()) s << "out = " << cfg.out << "\n";
  if (!cfg.generator.empty()) {
    s << "\n[generator]\n";
    for (const auto& [k, v] : cfg.generator) s << k << " = " << v << "\n";
  }
  if (!cfg.params.empty()) {
    s << "\n[params]\n";
    for (const auto& [k, v] : cfg.params) s << k << " = " << v << "\n";
  }
  return s.str();
}

// Config echo for report envelopes. The output path is deliberately not
// echoed: it is where the report goes, not part of what was computed, and
// identical experiments must emit identical bytes wherever they land.
json config_json(const ExperimentConfig& cfg, const std::string& fmt) {
  json j;
  j["kind"] = cfg.kind;
  j["seed"] = cfg.seed;
  j["threads"] = cfg.threads;
  j["format"] = fmt;
  json gen = json::object();
  for (const auto& [k, v] : cfg.generator) gen[k] = v;
  j["generator"] = std::move(gen);
  json par = json::object();
  for (const auto& [k, v] : cfg.params) par[k] = v;
  j["params"] = std::move(par);
  return j;
}

// Typed access to the params map with unknown-key detection: any key a
// handler never touched is reported as a usage error (catches config typos).
class Params {
 public:
  explicit Params(const std::map<std::string, std::string>& kv) : kv_(kv) {}

  bool has(const std::string& k) const {
    used_.insert(k);
    return kv_.count(k) != 0;
  }
  std::string str(const std::string& k, const std::string& dflt = "") const {
    used_.insert(k);
    auto it = kv_.find(k);
    return it == kv_.end() ? dflt : it->second;
  }
  std::string str_required(const std::string& k) const {
    used_.insert(k);
    auto it = kv_.find(k);
    if (it == kv_.end())
      throw std::invalid_argument("missing required parameter --" + k);
    return it->second;
  }
  double num(const std::string& k, double dflt) const {
    used_.insert(k);
    auto it = kv_.find(k);
    return it == kv_.end() ? dflt : parse_num(it->second, "--" + k);
  }
  double num_required(const std::string& k) const {
    return parse_num(str_required(k), "--" + k);
  }
  long long integer(const std::string& k, long long dflt) const {
    used_.insert(k);
    auto it = kv_.find(k);
    return it == kv_.end() ? dflt : parse_ll(it->second, "--" + k);
  }
  long long integer_required(const std::string& k) const {
    return parse_ll(str_required(k), "--" + k);
  }
  std::vector<long long> int_list(const std::string& k,
                                  const std::string& dflt) const {
    std::string raw = dflt.empty() ? str_required(k) : str(k, dflt);
    std::vector<long long> out;
    for (const auto& piece : split_commas(raw))
      out.push_back(parse_ll(piece, "--" + k));
    if (out.empty()) throw std::invalid_argument("--" + k + ": empty list");
    return out;
  }
  std::vector<double> num_list(const std::string& k,
                               const std::string& dflt) const {
    std::string raw = dflt.empty() ? str_required(k) : str(k, dflt);
    std::vector<double> out;
    for (const auto& piece : split_commas(raw))
      out.push_back(parse_num(piece, "--" + k));
    if (out.empty()) throw std::invalid_argument("--" + k + ": empty list");
    return out;
  }
  bool flag(const std::string& k, bool dflt) const {
    used_.insert(k);
    auto it = kv_.find(k);
    if (it == kv_.end()) return dflt;
    if (it->second == "true" || it->second == "1") return true;
    if (it->second == "false" || it->second == "0") return false;
    throw std::invalid_argument("--" + k + ": expected true/false, got '" +
                                it->second + "'");
  }
  void finish() const {
    for (const auto& [k, v] : kv_)
      if (used_.count(k) == 0)
        throw std::invalid_argument("unknown parameter '" + k +
                                    "' for this experiment");
  }

 private:
  std::map<std::string, std::string> kv_;
  mutable std::set<std::string> used_;
};

// ---------------------------------------------------------------------------
// input material

GeneratorSpec spec_from_kv(const std::map<std::string, std::string>& kv,
                           std::uint64_t fallback_seed) {
  static const std::map<std::string, GraphKind> kinds = {
      {"grid", GraphKind::grid},
      {"tri_grid", GraphKind::tri_grid},
      {"cycle", GraphKind::cycle},
      {"path", GraphKind::path},
      {"binary_tree", GraphKind::binary_tree},
      {"canopy_tree", GraphKind::canopy_tree},
      {"prism", GraphKind::prism},
      {"stacked_triangulation", GraphKind::stacked_triangulation},
      {"decorated_tree", GraphKind::decorated_tree},
      {"transient_tree", GraphKind::transient_tree},
      {"star", GraphKind::star}};
  Params p(kv);
  GeneratorSpec spec;
  std::string kind = p.str_required("kind");
  auto it = kinds.find(kind);
  if (it == kinds.end()) {
    std::string names;
    for (const auto& [k, v] : kinds) names += (names.empty() ? "" : ", ") + k;
    throw std::invalid_argument("unknown generator kind '" + kind +
                                "' (valid: " + names + ")");
  }
  spec.kind = it->second;
  spec.size = static_cast<int>(p.integer("size", 0));
  spec.size2 = static_cast<int>(p.integer("size2", 0));
  spec.wrap = p.flag("wrap", false);
  spec.alpha = p.num("alpha", 1.0);
  spec.l_max = static_cast<int>(p.integer("l-max", 10000));
  spec.insertions = static_cast<int>(p.integer("insertions", 0));
  if (p.has("d-sequence")) spec.d_sequence = p.int_list("d-sequence", "");
  spec.max_vertices = p.integer("max-vertices", 1000000);
  spec.seed = p.has("seed") ? parse_u64(p.str("seed"), "generator seed")
                            : fallback_seed;
  p.finish();
  return spec;
}

Graph cli_load_graph(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::invalid_argument("cannot open graph file: " + path);
  return read_graph(f);
}

ConformalWeight cli_load_weights(const std::string& path, int n) {
  std::ifstream f(path);
  if (!f) throw std::invalid_argument("cannot open weight file: " + path);
  return ConformalWeight(read_weights(f, n));
}

Graph input_graph(const ExperimentConfig& cfg, const Params& p) {
  if (!cfg.generator.empty()) {
    if (p.has("graph"))
      throw std::invalid_argument(
          "give either --graph or a [generator] section, not both");
    return generate(spec_from_kv(cfg.generator, cfg.seed)).graph;
  }
  std::string path = p.str("graph");
  if (path.empty())
    throw std::invalid_argument(
        cfg.kind + ": provide --graph FILE (or a [generator] config section)");
  return cli_load_graph(path);
}

ConformalWeight input_weight(const Graph& g, const Params& p) {
  std::string path = p.str("weight");
  if (path.empty()) return ConformalWeight::constant(g.n(), 1.0);
  return cli_load_weights(path, g.n());
}

// Interior predicate for bounded regions: vertices further than `collar`
// (in dist_G) from every vertex of non-maximal degree. Returns an empty
// function when collar <= 0 or the graph is degree-regular.
std::function<bool(int)> collar_predicate(const Graph& g, long long collar) {
  if (collar <= 0) return nullptr;
  int dmax = 0;
  for (int v = 0; v < g.n(); ++v) dmax = std::max(dmax, g.degree(v));
  std::vector<int> dist(g.n(), -1);
  std::vector<int> queue;
  for (int v = 0; v < g.n(); ++v)
    if (g.degree(v) < dmax) {
      dist[v] = 0;
      queue.push_back(v);
    }
  if (queue.empty()) return nullptr;
  for (std::size_t head = 0; head < queue.size(); ++head) {
    int x = queue[head];
    for (int y : g.neighbors(x))
      if (dist[y] < 0) {
        dist[y] = dist[x] + 1;
        queue.push_back(y);
      }
  }
  auto shared = std::make_shared<std::vector<int>>(std::move(dist));
  long long c = collar;
  return [shared, c](int v) { return (*shared)[v] > c; };
}

// ---------------------------------------------------------------------------
// handlers: each fills a JSON data object and CSV rows from the same numbers

struct Report {
  json data;
  std::vector<std::string> csv;
};

Report h_spectrum(const ExperimentConfig& cfg, const Params& p) {
  Graph g = input_graph(cfg, p);
  long long count = p.integer("count", 0);
  SpectralData sd = count > 0
                        ? SpectralData::partial(g, static_cast<int>(count))
                        : SpectralData::dense(g, false);
  Report r;
  json eig = json::array();
  for (int k = 0; k < sd.count(); ++k) {
    double l = sd.eigenvalue(k);
    if (std::abs(l) <= 1e-12) l = 0.0;  // snap numerically-zero eigenvalues
    eig.push_back(l);
    r.csv.push_back(csv_row({std::to_string(k), csv_num(l)}));
  }
  r.data["mode"] = count > 0 ? "partial" : "dense";
  r.data["count"] = sd.count();
  r.data["eigenvalues"] = std::move(eig);
  return r;
}

Report h_heat(const ExperimentConfig& cfg, const Params& p) {
  Graph g = input_graph(cfg, p);
  int x = static_cast<int>(p.integer("x", 0));
  auto grid = p.int_list("T-grid", "16,32,64,128,256,512,1024");
  bool dense = p.flag("dense", g.n() <= 2048);
  std::optional<SpectralData> sd;
  if (dense) sd.emplace(SpectralData::dense(g, true));
  SpectralDimensionEstimate est =
      spectral_dimension_estimate(g, x, grid, sd ? &*sd : nullptr);
  Report r;
  json rows = json::array();
  for (const auto& row : est.rows) {
    json jr;
    jr["T"] = row.t;
    jr["p2t"] = row.p2t;
    jr["slope_to_next"] = row.slope_to_next;  // NaN -> null on the last row
    rows.push_back(std::move(jr));
    r.csv.push_back(csv_row({std::to_string(row.t), csv_num(row.p2t)}));
  }
  r.data["x"] = x;
  r.data["rows"] = std::move(rows);
  r.data["underflow"] = est.underflow;
  r.data["relaxation_time"] = est.relaxation_time;
  return r;
}

Report h_partition(const ExperimentConfig& cfg, const Params& p) {
  Graph g = input_graph(cfg, p);
  ConformalWeight w = input_weight(g, p);
  double tau = p.num_required("tau");
  double alpha = p.num("alpha", 16.0);
  std::string method = p.str("method", "exp");
  auto deltas = p.num_list("deltas", "0.1,0.25,0.5");
  long long trials = p.integer("trials", 200);
  if (trials < 1) throw std::invalid_argument("--trials must be >= 1");

  PartitionSampler base;
  if (method == "exp" || method == "boost") {
    base = [&g, &w, tau](std::uint64_t s) {
      return exp_clustering(g, w, tau, s);
    };
  } else if (method == "ckr") {
    base = [&g, &w, tau](std::uint64_t s) {
      return ckr_partition(g, w, tau, s);
    };
  } else {
    throw std::invalid_argument("--method must be exp, ckr, or boost");
  }
  PartitionSampler sampler = base;
  if (method == "boost") {
    sampler = [&g, &w, base, tau, alpha](std::uint64_t s) {
      return pad_boost(g, w, base, tau, alpha, s);
    };
  }

  Partition single = sampler(cfg.seed);
  verify_partition(g, w, single);
  PaddingProfile prof = padding_profile(g, w, sampler, tau, alpha, deltas,
                                        static_cast<int>(trials), cfg.seed);

  Report r;
  json rows = json::array();
  for (std::size_t i = 0; i < prof.delta_grid.size(); ++i) {
    json jr;
    jr["delta"] = prof.delta_grid[i];
    jr["empirical_pad"] = prof.empirical_pad[i];
    jr["std_error"] = prof.std_error[i];
    rows.push_back(std::move(jr));
    r.csv.push_back(csv_row({csv_num(prof.delta_grid[i]),
                             csv_num(prof.empirical_pad[i]),
                             csv_num(prof.std_error[i])}));
  }
  r.data["method"] = method;
  r.data["tau"] = tau;
  r.data["alpha"] = alpha;
  r.data["trials"] = prof.trials;
  r.data["rows"] = std::move(rows);
  json sj;
  sj["blocks"] = single.block_count();
  sj["verified"] = true;  // verify_partition throws otherwise
  r.data["single_draw"] = std::move(sj);
  return r;
}

json bump_params_json(const BumpFamily& fam) {
  json pj;
  pj["R"] = fam.params.R;
  pj["alpha"] = fam.params.alpha;
  pj["K"] = fam.params.K;
  pj["eta"] = fam.params.eta;
  pj["delta"] = fam.params.delta;
  return pj;
}

BumpFamily build_family(const Graph& g, const ConformalWeight& w,
                        const Params& p, std::uint64_t seed, double* delta_out) {
  double R = p.num_required("R");
  double K = p.num("K", 0.0);
  if (K <= 0.0) K = static_cast<double>(max_ball_size(g, w, R));
  double alpha = p.num("alpha", 8.0);
  double delta = p.num("delta", 0.0);
  if (delta_out) *delta_out = delta;
  if (delta > 0.0)
    return bump_family_delocalized(g, w, R, K, alpha, delta, seed);
  return bump_family_easy(g, w, R, K, alpha, seed);
}

Report h_bumps(const ExperimentConfig& cfg, const Params& p) {
  Graph g = input_graph(cfg, p);
  ConformalWeight w = input_weight(g, p);
  double delta = 0.0;
  BumpFamily fam = build_family(g, w, p, cfg.seed, &delta);
  std::vector<double> pi = stationary_distribution(g);

  Report r;
  json rows = json::array();
  for (int i = 0; i < fam.size(); ++i) {
    double core_mass = 0.0;
    for (int v : fam.cores[i]) core_mass += pi[v];
    json jr;
    jr["support_size"] = fam.supports[i].size();
    jr["core_mass"] = core_mass;
    jr["rayleigh"] = fam.rayleigh[i];
    rows.push_back(std::move(jr));
    r.csv.push_back(
        csv_row({std::to_string(fam.supports[i].size()), csv_num(core_mass),
                 csv_num(fam.rayleigh[i])}));
  }
  r.data["variant"] = delta > 0.0 ? "delocalized" : "easy";
  r.data["size"] = fam.size();
  r.data["params"] = bump_params_json(fam);
  r.data["rows"] = std::move(rows);
  return r;
}

Report h_certify(const ExperimentConfig& cfg, const Params& p) {
  Graph g = input_graph(cfg, p);
  ConformalWeight w = input_weight(g, p);
  long long T = p.integer_required("T");
  double eps = p.num("eps", 0.5);
  double beta = p.num("beta", 0.2);
  double delta = 0.0;
  BumpFamily fam = build_family(g, w, p, cfg.seed, &delta);
  SpectralData sd = SpectralData::dense(g, true);
  HeatKernel hk(g, &sd);
  ReturnCertificate cert =
      bump_return_certificate(g, hk, fam.dense_functions(g.n()), T, eps, beta);

  Report r;
  r.data["variant"] = delta > 0.0 ? "delocalized" : "easy";
  r.data["family_size"] = fam.size();
  r.data["params"] = bump_params_json(fam);
  r.data["T"] = T;
  r.data["eps"] = eps;
  r.data["beta"] = beta;
  r.data["max_support"] = cert.max_support;
  r.data["threshold"] = cert.threshold;
  r.data["guaranteed_mass"] = cert.guaranteed_mass;
  r.data["vacuous"] = cert.vacuous;
  r.data["certified_count"] = cert.certified.size();
  r.data["certified_mass"] = cert.certified_mass;
  json rows = json::array();
  for (const auto& ps : cert.sets) {
    json jr;
    jr["index"] = ps.index;
    jr["set_size"] = ps.set.size();
    jr["level"] = ps.level;
    jr["rayleigh"] = ps.rayleigh;
    jr["inner"] = ps.inner;
    jr["retention_bound"] = ps.pwdsj_bound;
    jr["mass_at_one"] = ps.mass_at_one;
    rows.push_back(std::move(jr));
    r.csv.push_back(csv_row(
        {std::to_string(ps.index), std::to_string(ps.set.size()),
         csv_num(ps.level), csv_num(ps.rayleigh), csv_num(ps.pwdsj_bound),
         csv_num(ps.mass_at_one)}));
  }
  r.data["sets"] = std::move(rows);
  return r;
}

Report h_resist(const ExperimentConfig& cfg, const Params& p) {
  Graph g = input_graph(cfg, p);
  ConformalWeight w = input_weight(g, p);
  int x = static_cast<int>(p.integer_required("x"));
  double R = p.num_required("R");
  double C = p.num("C", 2.0);
  AnnulusCertificate cert = annulus_test_function(g, w, C, x, R);

  Report r;
  r.data["x"] = x;
  r.data["R"] = R;
  r.data["C"] = C;
  r.data["degenerate"] = cert.degenerate;
  r.data["inner_radius"] = cert.inner_radius;
  r.data["inner_size"] = cert.inner.size();
  r.data["outer_size"] = cert.outer.size();
  r.data["energy"] = cert.energy;
  r.data["energy_bound"] = cert.energy_bound;
  r.data["bound"] = cert.lower_bound;
  double exact = std::numeric_limits<double>::quiet_NaN();
  double ratio = std::numeric_limits<double>::quiet_NaN();
  if (!cert.degenerate) {
    ResistanceQuery q = effective_resistance(g, cert.inner, cert.outer);
    exact = q.value;
    ratio = cert.lower_bound > 0.0 ? exact / cert.lower_bound : ratio;
  }
  r.data["exact"] = exact;  // null in JSON when degenerate
  r.data["ratio"] = ratio;
  r.csv.push_back(csv_row({csv_num(R), csv_num(cert.lower_bound),
                           csv_num(exact), csv_num(ratio)}));
  return r;
}

Report h_separate(const ExperimentConfig& cfg, const Params& p) {
  Graph g = input_graph(cfg, p);
  int x = static_cast<int>(p.integer_required("x"));
  auto radii = p.int_list("radii", "");
  long long ratio = p.integer("ratio", 6);
  if (ratio < 2) throw std::invalid_argument("--ratio must be >= 2");

  Report r;
  json rows = json::array();
  for (long long rad : radii) {
    SeparatorResult s = min_vertex_cut_annulus(
        g, x, static_cast<int>(rad), static_cast<int>(rad * ratio));
    json jr;
    jr["r"] = s.r;
    jr["r_prime"] = s.r_prime;
    jr["kappa"] = s.kappa;
    jr["q"] = s.q;
    jr["cut"] = s.cut;
    rows.push_back(std::move(jr));
    r.csv.push_back(csv_row(
        {std::to_string(s.r), std::to_string(s.kappa), csv_num(s.q)}));
  }
  r.data["x"] = x;
  r.data["ratio"] = ratio;
  r.data["rows"] = std::move(rows);
  return r;
}

Report h_barrier(const ExperimentConfig& cfg, const Params& p) {
  Graph g = input_graph(cfg, p);
  long long rr = p.integer_required("r");
  long long rp = p.integer("r-prime", 6 * rr);
  std::string provider = p.str("provider", "annulus");
  SeparatorProvider prov;
  if (provider == "annulus")
    prov = annulus_cut_provider(g, static_cast<int>(rr), static_cast<int>(rp));
  else if (provider == "sphere")
    prov = sphere_cut_provider(g, static_cast<int>(rr), static_cast<int>(rp));
  else
    throw std::invalid_argument("--provider must be annulus or sphere");
  BarrierSet b =
      barrier(g, static_cast<int>(rr), static_cast<int>(rp), prov, cfg.seed);

  std::string set_out = p.str("set-out");
  if (!set_out.empty()) {
    std::string text;
    for (int v : b.W) {
      text += std::to_string(v);
      text += '\n';
    }
    write_text(set_out, text);
  }

  int max_diam = 0;
  for (int d : b.component_diameter) max_diam = std::max(max_diam, d);
  Report r;
  r.data["r"] = b.r;
  r.data["r_prime"] = b.r_prime;
  r.data["provider"] = provider;
  r.data["barrier_size"] = b.W.size();
  r.data["fraction"] = b.fraction;
  r.data["component_count"] = b.component_diameter.size();
  r.data["max_component_diameter"] = max_diam;
  r.data["diameter_bound"] = 2 * b.r_prime;
  r.csv.push_back(csv_row({std::to_string(b.r), std::to_string(b.r_prime),
                           std::to_string(b.W.size()), csv_num(b.fraction),
                           std::to_string(max_diam)}));
  return r;
}

Report h_subdiff(const ExperimentConfig& cfg, const Params& p) {
  Graph g = input_graph(cfg, p);
  std::vector<int> radii;
  for (long long v : p.int_list("radii", "")) radii.push_back(static_cast<int>(v));
  auto grid = p.int_list("T-grid", "");
  long long trials = p.integer("trials", 200);
  long long collar = p.integer("collar", 0);
  long long stay_collar = p.integer("stay-collar", 0);
  std::optional<ConformalWeight> w;
  if (p.has("weight")) w = input_weight(g, p);

  SubdiffusivityReport rep = subdiffusivity_experiment(
      g, radii, grid, static_cast<int>(trials), cfg.seed,
      collar_predicate(g, collar), w ? &*w : nullptr,
      collar_predicate(g, stay_collar));

  Report r;
  r.data["growth_exponent"] = rep.growth_exponent;
  r.data["separator_exponent"] = rep.separator_exponent;
  r.data["speed_bound"] = rep.speed_bound;
  r.data["speed_exponent"] = rep.speed_exponent;
  r.data["discarded_trials"] = rep.discarded_trials;
  r.data["roots_used"] = rep.roots_used;
  json rows = json::array();
  for (std::size_t i = 0; i < rep.displacement.size(); ++i) {
    const auto& row = rep.displacement[i];
    json jr;
    jr["T"] = row.T;
    jr["mean"] = row.mean;
    jr["std_error"] = row.std_error;
    jr["trials"] = row.trials;
    if (w) {
      jr["conformal_second_moment"] = rep.conformal_second_moment[i];
      jr["conformal_ratio"] = rep.conformal_ratio[i];
    }
    rows.push_back(std::move(jr));
    r.csv.push_back(csv_row({csv_num(row.T), csv_num(row.mean),
                             csv_num(row.std_error),
                             std::to_string(row.trials)}));
  }
  r.data["displacement"] = std::move(rows);
  return r;
}

Report h_walk(const ExperimentConfig& cfg, const Params& p) {
  Graph g = input_graph(cfg, p);
  auto grid = p.int_list("T-grid", "");
  long long trials = p.integer_required("trials");
  std::optional<ConformalWeight> w;
  if (p.has("weight")) w = input_weight(g, p);
  std::vector<SpeedRow> rows = speed_profile(
      g, w ? &*w : nullptr, grid, static_cast<int>(trials), cfg.seed);

  Report r;
  json jrows = json::array();
  for (const auto& row : rows) {
    json jr;
    jr["T"] = row.T;
    jr["mean"] = row.mean;
    jr["std_error"] = row.std_error;
    jr["trials"] = row.trials;
    jrows.push_back(std::move(jr));
    r.csv.push_back(csv_row({csv_num(row.T), csv_num(row.mean),
                             csv_num(row.std_error),
                             std::to_string(row.trials)}));
  }
  r.data["metric"] = w ? "conformal" : "graph";
  r.data["rows"] = std::move(jrows);
  return r;
}

Report h_optimize(const ExperimentConfig& cfg, const Params& p) {
  Graph g = input_graph(cfg, p);
  double R = p.num_required("R");
  long long iterations = p.integer("iterations", 40);
  GrowthObjective base =
      growth_objective(g, ConformalWeight::constant(g.n(), 1.0), R);
  auto [w, obj] = optimize_weight(g, R, static_cast<int>(iterations), cfg.seed);
  std::string weight_out = p.str("weight-out");
  if (!weight_out.empty()) save_weights(weight_out, w);

  Report r;
  r.data["R"] = R;
  r.data["iterations"] = iterations;
  json bj;
  bj["value"] = base.value;
  bj["argmax"] = base.argmax;
  r.data["baseline"] = std::move(bj);
  json oj;
  oj["value"] = obj.value;
  oj["argmax"] = obj.argmax;
  r.data["optimized"] = std::move(oj);
  r.data["improved"] = obj.value < base.value;
  r.data["weight_out"] = weight_out;
  r.csv.push_back(csv_row({csv_num(R), csv_num(base.value), csv_num(obj.value)}));
  return r;
}

Report h_cbt(const ExperimentConfig& cfg, const Params& p) {
  int n = static_cast<int>(p.integer_required("n"));
  double Q = p.num("Q", 1.0);
  CbtCertificate cert = cbt_certificate(n);

  Report r;
  r.data["n"] = cert.n;
  r.data["vertices"] = cert.vertices;
  r.data["alpha_l2_sq"] = cert.alpha_l2_sq;
  r.data["alpha_budget"] = cert.alpha_budget;
  r.data["budget_ok"] = cert.alpha_l2_sq <= cert.alpha_budget;
  json by_depth = json::array();
  for (int d = 0; d <= cert.n; ++d)
    by_depth.push_back(cert.alpha[(std::size_t(1) << d) - 1]);
  r.data["alpha_by_depth"] = std::move(by_depth);
  r.data["Q"] = Q;
  r.data["implied_l2_lower"] = cert.implied_l2_lower(Q);
  r.data["certified_growth_lower"] = cert.certified_growth_lower();
  r.csv.push_back(csv_row({std::to_string(cert.n), csv_num(cert.alpha_l2_sq),
                           csv_num(cert.alpha_budget),
                           csv_num(cert.certified_growth_lower())}));

  if (p.has("weight")) {
    ConformalWeight w =
        cli_load_weights(p.str_required("weight"),
                         static_cast<int>(cert.vertices));
    CbtAudit a = cbt_audit(n, w, Q);
    json aj;
    aj["claimed_growth"] = a.claimed_growth;
    aj["growth_ok"] = a.growth_ok;
    aj["worst_ratio"] = a.worst_ratio;
    aj["grid_slack"] = a.grid_slack;
    aj["balls_checked"] = a.balls_checked;
    aj["implied_lower"] = a.implied_lower;
    aj["measured_lower"] = a.measured_lower;
    aj["actual_l2"] = a.actual_l2;
    aj["consistent"] = a.consistent;
    r.data["audit"] = std::move(aj);
    r.csv.push_back(csv_row(
        {csv_num(a.claimed_growth), csv_num(a.worst_ratio),
         csv_num(a.implied_lower), csv_num(a.measured_lower),
         csv_num(a.actual_l2), std::string(a.consistent ? "1" : "0")}));
  }
  return r;
}

// ---------------------------------------------------------------------------
// dispatch

std::string default_format(const std::string& kind) {
  static const std::set<std::string> tabular = {
      "spectrum", "heat", "partition", "bumps", "walk", "separate"};
  return tabular.count(kind) ? "csv" : "json";
}

void emit(const ExperimentConfig& cfg, const std::string& fmt, Report&& rep) {
  std::string text;
  if (fmt == "csv") {
    for (const auto& line : rep.csv) {
      text += line;
      text += '\n';
    }
  } else {
    json env;
    env["schema"] = std::string("conformal-lab/") + cfg.kind + "-report-v1";
    env["tool"] = kTool;
    env["version"] = kVersion;
    env["seed"] = cfg.seed;
    env["config"] = config_json(cfg, fmt);
    env["data"] = std::move(rep.data);
    text = env.dump(2);
    text += '\n';
  }
  write_text(cfg.out, text);
}

void run_experiment(const ExperimentConfig& cfg) {
  if (experiment_kinds().count(cfg.kind) == 0)
    throw std::invalid_argument("unknown experiment kind '" + cfg.kind + "'");
  if (cfg.threads < 1)
    throw std::invalid_argument("--threads must be >= 1");
  auto t0 = std::chrono::steady_clock::now();

  if (cfg.kind == "gen") {
    if (!cfg.format.empty() && cfg.format != "edges")
      throw std::invalid_argument("gen emits the edge-list format only");
    if (cfg.generator.empty())
      throw std::invalid_argument("gen: provide generator flags (--kind ...)");
    Params p(cfg.params);
    p.finish();  // gen takes no [params] keys
    GeneratedGraph gg = generate(spec_from_kv(cfg.generator, cfg.seed));
    std::ostringstream ss;
    write_graph(ss, gg.graph);
    write_text(cfg.out, ss.str());
    auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                  std::chrono::steady_clock::now() - t0)
                  .count();
    std::fprintf(stderr, "gen: n=%d m=%lld [%lld ms]\n", gg.graph.n(),
                 static_cast<long long>(gg.graph.edges().size()),
                 static_cast<long long>(ms));
    return;
  }

  std::string fmt = cfg.format.empty() ? default_format(cfg.kind) : cfg.format;
  if (fmt != "csv" && fmt != "json")
    throw std::invalid_argument("--format must be csv or json");

  using Handler = Report (*)(const ExperimentConfig&, const Params&);
  static const std::map<std::string, Handler> handlers = {
      {"spectrum", h_spectrum}, {"heat", h_heat},
      {"partition", h_partition}, {"bumps", h_bumps},
      {"certify", h_certify},   {"resist", h_resist},
      {"separate", h_separate}, {"barrier", h_barrier},
      {"subdiff", h_subdiff},   {"walk", h_walk},
      {"optimize", h_optimize}, {"cbt", h_cbt}};
  Params p(cfg.params);
  Report rep = handlers.at(cfg.kind)(cfg, p);
  p.finish();
  emit(cfg, fmt, std::move(rep));

  auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                std::chrono::steady_clock::now() - t0)
                .count();
  std::fprintf(stderr, "%s: done [%lld ms]\n", cfg.kind.c_str(),
               static_cast<long long>(ms));
}

// ---------------------------------------------------------------------------
// CLI wiring

struct SubOpts {
  ExperimentConfig cfg;
  std::map<std::string, std::string> vals;  // params (or generator, for gen)
};

CLI::Option* bind_param(CLI::App* cmd, SubOpts& so, const std::string& flag,
                        const std::string& key, const std::string& help) {
  auto* dst = &so.vals;
  return cmd->add_option_function<std::string>(
      flag, [dst, key](const std::string& v) { (*dst)[key] = v; }, help);
}

void bind_flag(CLI::App* cmd, SubOpts& so, const std::string& flag,
               const std::string& key, const std::string& help) {
  auto* dst = &so.vals;
  cmd->add_flag_callback(flag, [dst, key]() { (*dst)[key] = "true"; }, help);
}

void add_common(CLI::App* cmd, SubOpts& so, bool with_graph,
                bool with_weight) {
  if (with_graph)
    bind_param(cmd, so, "--graph", "graph", "input graph file (edge list)");
  if (with_weight)
    bind_param(cmd, so, "--weight", "weight",
               "conformal weight file, one value per vertex (default: unit)");
  cmd->add_option("--seed", so.cfg.seed, "top-level seed (default 0)");
  cmd->add_option("--out", so.cfg.out, "output file (default: stdout)");
  cmd->add_option("--format", so.cfg.format, "csv | json");
  cmd->add_option("--threads", so.cfg.threads,
                  "accepted for config compatibility; execution is sequential")
      ->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{std::string(kTool) +
               ": conformal-metric experiments on finite graphs"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kTool) + " " + kVersion);
  app.footer(
      "Exit codes: 0 success; 64 usage or config error; 65 deterministic\n"
      "invariant violation; 70 runtime failure.\n"
      "Reports are byte-deterministic for a fixed (config, seed); timings go\n"
      "to stderr. CSV: no headers, '.' decimal, LF endings, 12 significant\n"
      "digits. JSON: schema/tool/version/seed/config envelope around data.");

  std::deque<SubOpts> subs;
  ExperimentConfig pending;
  bool have_pending = false;

  auto queue = [&](SubOpts& so, const std::string& kind, bool gen_section) {
    // copy the collected key-values into the config and arm execution
    return [&so, &pending, &have_pending, kind, gen_section]() {
      so.cfg.kind = kind;
      if (gen_section)
        so.cfg.generator = so.vals;
      else
        so.cfg.params = so.vals;
      pending = so.cfg;
      have_pending = true;
    };
  };

  {  // gen
    auto& so = subs.emplace_back();
    auto* c = app.add_subcommand("gen", "generate a graph (edge-list output)");
    c->set_help_flag("--help", "print help");  // frees -h for the --h alias
    c->add_option_function<std::string>(
        "--kind", [&so](const std::string& v) { so.vals["kind"] = v; },
        "grid | tri_grid | cycle | path | binary_tree | canopy_tree | prism | "
        "stacked_triangulation | decorated_tree | transient_tree | star")
        ->required();
    bind_param(c, so, "--size,--h,--n", "size",
               "primary size (side / length / height / leaves)");
    bind_param(c, so, "--size2", "size2", "grid column count (0 = square)");
    bind_flag(c, so, "--wrap", "wrap", "wrap grid into a torus");
    bind_param(c, so, "--alpha", "alpha", "decorated tree tail exponent");
    bind_param(c, so, "--l-max", "l-max", "decorated tree length truncation");
    bind_param(c, so, "--insertions", "insertions",
               "stacked triangulation insertions");
    bind_param(c, so, "--d-sequence", "d-sequence",
               "transient tree degree sequence, comma separated");
    bind_param(c, so, "--max-vertices", "max-vertices",
               "abort above this vertex count");
    c->add_option("--seed", so.cfg.seed, "generator seed (default 0)");
    c->add_option("--out", so.cfg.out, "output file (default: stdout)");
    c->add_option("--threads", so.cfg.threads, "accepted; sequential")
        ->check(CLI::PositiveNumber);
    c->callback(queue(so, "gen", true));
  }
  {  // spectrum
    auto& so = subs.emplace_back();
    auto* c = app.add_subcommand(
        "spectrum", "normalized Laplacian eigenvalues (CSV: k, lambda)");
    add_common(c, so, true, false);
    bind_param(c, so, "--count", "count",
               "smallest eigenvalues to compute (0 = full dense solve)");
    c->callback(queue(so, "spectrum", false));
  }
  {  // heat
    auto& so = subs.emplace_back();
    auto* c = app.add_subcommand(
        "heat", "return-probability decay along a dyadic horizon grid "
                "(CSV: T, p2t)");
    add_common(c, so, true, false);
    bind_param(c, so, "--x", "x", "base vertex (default 0)");
    bind_param(c, so, "--T-grid", "T-grid",
               "dyadic doubling horizons (default 16,...,1024)");
    bind_param(c, so, "--dense", "dense",
               "true/false: dense spectrum for the relaxation time "
               "(default: auto by size)");
    c->callback(queue(so, "heat", false));
  }
  {  // partition
    auto& so = subs.emplace_back();
    auto* c = app.add_subcommand(
        "partition", "random partition padding profile "
                     "(CSV: delta, empirical_pad, stderr)");
    add_common(c, so, true, true);
    bind_param(c, so, "--tau", "tau", "diameter bound tau")->required();
    bind_param(c, so, "--alpha", "alpha", "padding scale alpha (default 16)");
    bind_param(c, so, "--method", "method", "exp | ckr | boost (default exp)");
    bind_param(c, so, "--deltas", "deltas",
               "delta grid (default 0.1,0.25,0.5)");
    bind_param(c, so, "--trials", "trials", "Monte Carlo trials (default 200)");
    c->callback(queue(so, "partition", false));
  }
  {  // bumps
    auto& so = subs.emplace_back();
    auto* c = app.add_subcommand(
        "bumps", "disjoint bump family report "
                 "(CSV: support_size, core_mass, rayleigh)");
    add_common(c, so, true, true);
    bind_param(c, so, "--R", "R", "bump radius R")->required();
    bind_param(c, so, "--K", "K",
               "ball-size budget K (default: measured max |B(x,R)|)");
    bind_param(c, so, "--alpha", "alpha", "partition scale (default 8)");
    bind_param(c, so, "--delta", "delta",
               "delocalization parameter (0 = easy variant)");
    c->callback(queue(so, "bumps", false));
  }
  {  // certify
    auto& so = subs.emplace_back();
    auto* c = app.add_subcommand(
        "certify", "return-probability certificate from a bump family (JSON)");
    add_common(c, so, true, true);
    bind_param(c, so, "--R", "R", "bump radius R")->required();
    bind_param(c, so, "--T", "T", "walk horizon T")->required();
    bind_param(c, so, "--K", "K",
               "ball-size budget K (default: measured max |B(x,R)|)");
    bind_param(c, so, "--alpha", "alpha", "partition scale (default 8)");
    bind_param(c, so, "--delta", "delta",
               "delocalization parameter (0 = easy variant)");
    bind_param(c, so, "--eps", "eps", "retention slack (default 0.5)");
    bind_param(c, so, "--beta", "beta", "level threshold (default 0.2)");
    c->callback(queue(so, "certify", false));
  }
  {  // resist
    auto& so = subs.emplace_back();
    auto* c = app.add_subcommand(
        "resist", "annulus test-function resistance certificate (JSON: R, "
                  "bound, exact, ratio)");
    add_common(c, so, true, true);
    bind_param(c, so, "--x", "x", "center vertex")->required();
    bind_param(c, so, "--R", "R", "conformal annulus scale R")->required();
    bind_param(c, so, "--C", "C", "regulation constant (default 2)");
    c->callback(queue(so, "resist", false));
  }
  {  // separate
    auto& so = subs.emplace_back();
    auto* c = app.add_subcommand(
        "separate", "annulus minimum vertex cuts (CSV: r, kappa, q)");
    add_common(c, so, true, false);
    bind_param(c, so, "--x", "x", "center vertex")->required();
    bind_param(c, so, "--radii", "radii", "inner radii, comma separated")
        ->required();
    bind_param(c, so, "--ratio", "ratio", "outer radius ratio (default 6)");
    c->callback(queue(so, "separate", false));
  }
  {  // barrier
    auto& so = subs.emplace_back();
    auto* c = app.add_subcommand(
        "barrier", "randomized separator barrier (JSON report)");
    add_common(c, so, true, false);
    bind_param(c, so, "--r", "r", "priority radius r")->required();
    bind_param(c, so, "--r-prime", "r-prime", "outer radius (default 6r)");
    bind_param(c, so, "--provider", "provider",
               "annulus | sphere (default annulus)");
    bind_param(c, so, "--set-out", "set-out",
               "write barrier vertex ids to this file");
    c->callback(queue(so, "barrier", false));
  }
  {  // subdiff
    auto& so = subs.emplace_back();
    auto* c = app.add_subcommand(
        "subdiff", "subdiffusivity experiment: growth/separator exponents vs "
                   "walk displacement (JSON report)");
    add_common(c, so, true, true);
    bind_param(c, so, "--radii", "radii",
               "increasing radii for the exponent fits")
        ->required();
    bind_param(c, so, "--T-grid", "T-grid", "walk horizons")->required();
    bind_param(c, so, "--trials", "trials", "walks per horizon (default 200)");
    bind_param(c, so, "--collar", "collar",
               "start collar: walks start further than this from the "
               "boundary (default 0 = anywhere)");
    bind_param(c, so, "--stay-collar", "stay-collar",
               "discard walks leaving this collar (default 0 = never)");
    c->callback(queue(so, "subdiff", false));
  }
  {  // walk
    auto& so = subs.emplace_back();
    auto* c = app.add_subcommand(
        "walk", "mean walk displacement (CSV: T, mean, stderr, trials)");
    add_common(c, so, true, true);
    bind_param(c, so, "--T-grid", "T-grid", "walk horizons")->required();
    bind_param(c, so, "--trials", "trials", "walks per horizon")->required();
    c->callback(queue(so, "walk", false));
  }
  {  // optimize
    auto& so = subs.emplace_back();
    auto* c = app.add_subcommand(
        "optimize", "minimize max ball growth over normalized weights (JSON)");
    add_common(c, so, true, false);
    bind_param(c, so, "--R", "R", "ball scale R >= 1")->required();
    bind_param(c, so, "--iterations", "iterations",
               "descent iterations (default 40)");
    bind_param(c, so, "--weight-out", "weight-out",
               "write the optimized weight to this file");
    c->callback(queue(so, "optimize", false));
  }
  {  // cbt
    auto& so = subs.emplace_back();
    auto* c = app.add_subcommand(
        "cbt", "binary-tree growth lower-bound certificate and audit (JSON)");
    add_common(c, so, false, true);
    bind_param(c, so, "--n", "n", "tree height (2..20)")->required();
    bind_param(c, so, "--Q", "Q", "claimed growth ratio (default 1)");
    c->callback(queue(so, "cbt", false));
  }
  {  // run
    auto& so = subs.emplace_back();
    auto* c = app.add_subcommand("run", "execute an experiment config file");
    auto* config_path =
        c->add_option("--config", "config file (flat key-value with "
                                  "[experiment]/[generator]/[params] sections)")
            ->required();
    auto* echo_path = c->add_option(
        "--echo-config", "write the canonical form of the config here");
    auto* dry = c->add_flag("--dry-run", "parse and validate only");
    c->callback([&so, config_path, echo_path, dry, &pending, &have_pending]() {
      ExperimentConfig cfg =
          parse_config_text(slurp_or_die(config_path->as<std::string>()));
      if (!echo_path->results().empty())
        write_text(echo_path->as<std::string>(), serialize_config(cfg));
      if (dry->count() > 0) {
        std::fprintf(stderr, "run: config ok (kind %s)\n", cfg.kind.c_str());
        return;
      }
      pending = cfg;
      have_pending = true;
      (void)so;
    });
  }

  try {
    app.parse(argc, argv);
    if (have_pending) run_experiment(pending);
    return 0;
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "%s: %s\n", kTool, e.what());
    return kExitUsage;
  } catch (const std::out_of_range& e) {
    std::fprintf(stderr, "%s: %s\n", kTool, e.what());
    return kExitUsage;
  } catch (const std::domain_error& e) {
    std::fprintf(stderr, "%s: %s\n", kTool, e.what());
    return kExitUsage;
  } catch (const std::logic_error& e) {
    std::fprintf(stderr, "%s: invariant violation: %s\n", kTool, e.what());
    return kExitInvariant;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "%s: error: %s\n", kTool, e.what());
    return kExitRuntime;
  }
}
