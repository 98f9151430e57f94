#include "rgap/experiments.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <boost/version.hpp>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <sstream>
#include <toml.hpp>

#include "rgap/errors.hpp"
#include "rgap/functionals.hpp"
#include "rgap/rearrangement.hpp"
#include "rgap/serialization.hpp"

namespace rgap {

namespace {

constexpr const char* kVersion = "0.1.0";

// ---------------------------------------------------------------------------------------------
// configuration access

class Config {
 public:
  explicit Config(toml::table tbl) : tbl_(std::move(tbl)) {}

  const toml::table& table() const { return tbl_; }

  double real(const std::string& key, double fallback) const {
    const toml::node_view<const toml::node> node = at(key);
    if (!node) return fallback;
    if (auto v = node.value<double>()) return *v;
    throw ConfigError("key '" + key + "' must be a number");
  }

  Index integer(const std::string& key, Index fallback) const {
    const toml::node_view<const toml::node> node = at(key);
    if (!node) return fallback;
    if (auto v = node.value<std::int64_t>()) return static_cast<Index>(*v);
    throw ConfigError("key '" + key + "' must be an integer");
  }

  std::string text(const std::string& key, const std::string& fallback) const {
    const toml::node_view<const toml::node> node = at(key);
    if (!node) return fallback;
    if (auto v = node.value<std::string>()) return *v;
    throw ConfigError("key '" + key + "' must be a string");
  }

  std::vector<double> reals(const std::string& key, std::vector<double> fallback) const {
    const toml::node_view<const toml::node> node = at(key);
    if (!node) return fallback;
    const toml::array* arr = node.as_array();
    if (!arr) throw ConfigError("key '" + key + "' must be an array of numbers");
    std::vector<double> out;
    for (const toml::node& el : *arr) {
      auto v = el.value<double>();
      if (!v) throw ConfigError("key '" + key + "' must be an array of numbers");
      out.push_back(*v);
    }
    return out;
  }

  std::vector<std::string> texts(const std::string& key, std::vector<std::string> fallback) const {
    const toml::node_view<const toml::node> node = at(key);
    if (!node) return fallback;
    const toml::array* arr = node.as_array();
    if (!arr) throw ConfigError("key '" + key + "' must be an array of strings");
    std::vector<std::string> out;
    for (const toml::node& el : *arr) {
      auto v = el.value<std::string>();
      if (!v) throw ConfigError("key '" + key + "' must be an array of strings");
      out.push_back(*v);
    }
    return out;
  }

  bool has(const std::string& key) const { return static_cast<bool>(at(key)); }

 private:
  toml::node_view<const toml::node> at(const std::string& key) const { return tbl_.at_path(key); }

  toml::table tbl_;
};

toml::table load_config(const RunOptions& opts) {
  toml::table tbl;
  if (!opts.config.empty()) {
    try {
      tbl = toml::parse_file(opts.config.string());
    } catch (const toml::parse_error& e) {
      std::ostringstream os;
      os << "cannot parse " << opts.config.string() << ": " << e.description() << " at " << e.source().begin;
      throw ConfigError(os.str());
    }
  }
  for (const std::string& ov : opts.overrides) {
    const auto eq = ov.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + ov + "' is not key=value");
    std::string key = ov.substr(0, eq);
    const std::string rhs = ov.substr(eq + 1);
    toml::table parsed;
    try {
      parsed = toml::parse("value = " + rhs);
    } catch (const toml::parse_error&) {
      parsed = toml::table{{"value", rhs}};
    }
    toml::table* target = &tbl;
    std::size_t start = 0;
    for (std::size_t dot = key.find('.'); dot != std::string::npos; dot = key.find('.', start)) {
      const std::string part = key.substr(start, dot - start);
      if (!target->contains(part)) target->insert(part, toml::table{});
      target = (*target)[part].as_table();
      if (!target) throw ConfigError("override '" + ov + "' descends into a non-table");
      start = dot + 1;
    }
    target->insert_or_assign(key.substr(start), *parsed.get("value"));
  }
  return tbl;
}

SpaceConfig space_config(const Config& cfg) {
  SpaceConfig s;
  s.builder = cfg.text("space.builder", s.builder);
  s.N = cfg.real("space.N", s.N);
  s.K = cfg.real("space.K", s.builder == "suspension" ? s.N - 1 : s.K);
  s.L = cfg.real("space.L", 0);
  s.L_fraction = cfg.real("space.L_fraction", 1);
  s.fiber = cfg.real("space.fiber", s.fiber);
  s.n_t = cfg.integer("space.n_t", s.n_t);
  s.n_theta = cfg.integer("space.n_theta", s.n_theta);
  s.n_cells = cfg.integer("space.n_cells", s.n_cells);
  return s;
}

std::uint64_t require_seed(const Config& cfg, const RunOptions& opts) {
  if (opts.seed) return *opts.seed;
  if (cfg.has("seed")) return static_cast<std::uint64_t>(cfg.integer("seed", 0));
  throw ConfigError("this command is randomized: pass --seed or set 'seed' in the config");
}

// Independent stream per sample so results do not depend on scheduling.
Rng sample_rng(std::uint64_t seed, std::size_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  return Rng(seq);
}

double grid_resolution(const DiscreteMMS& X) {
  switch (X.tag()) {
    case BuilderTag::suspension: return X.param("n_t");
    case BuilderTag::model_interval:
    case BuilderTag::truncated_model: return X.param("n_cells");
    case BuilderTag::custom: break;
  }
  return static_cast<double>(X.size());
}

ModelSpaced space_model(const DiscreteMMS& X) { return ModelSpaced(X.param("K"), X.param("N")); }

// ---------------------------------------------------------------------------------------------
// output

struct Audit {
  std::string name;
  double value = 0;
  double bound = 0;
  bool pass = true;
};

struct Output {
  std::ostringstream csv;
  Json manifest = Json::object();
  std::vector<Audit> audits;
  bool solver_failure = false;

  void audit(std::string name, double value, double bound, bool pass) {
    audits.push_back({std::move(name), value, bound, pass});
  }
};

std::string timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

Json config_json(const toml::table& tbl) {
  std::ostringstream os;
  os << toml::json_formatter{tbl};
  return Json::parse(os.str());
}

std::string csv_real(double x) { return format_real(x); }

// ---------------------------------------------------------------------------------------------
// commands

void cmd_model_profile(const Config& cfg, Output& out) {
  const double K = cfg.real("K", 1);
  const double N = cfg.real("N", 2);
  const ModelSpaced ms(K, N);
  std::vector<double> vs = cfg.reals("v_grid", {});
  if (vs.empty()) {
    const Index points = cfg.integer("points", 11);
    if (points < 2) throw ConfigError("points must be at least 2");
    for (Index k = 0; k < points; ++k) vs.push_back(static_cast<double>(k) / static_cast<double>(points - 1));
  }
  out.csv << "v,r,iso_profile\n";
  double worst_symmetry = 0;
  for (double v : vs) {
    if (!(v >= 0 && v <= 1)) throw ConfigError("v_grid entries must lie in [0, 1]");
    out.csv << csv_real(v) << ',' << csv_real(ms.radius_for_volume(v)) << ',' << csv_real(ms.iso_profile(v)) << '\n';
    worst_symmetry = std::max(worst_symmetry, std::abs(ms.iso_profile(v) - ms.iso_profile(1 - v)));
  }
  out.audit("profile_symmetry", worst_symmetry, 1e-10, worst_symmetry <= 1e-10);
}

void cmd_model_lambda(const Config& cfg, Output& out) {
  const std::vector<double> Ns = cfg.reals("N_grid", {2, 3});
  const std::vector<double> vs = cfg.reals("v_grid", {0.25, 0.5});
  const std::vector<double> ps = cfg.reals("p_grid", {1.5, 2, 3});
  const Index n = cfg.integer("n", 1024);
  const double tol = cfg.real("tol", 1e-10);
  const double max_discrepancy = cfg.real("max_discrepancy", 1e-3);

  struct Case {
    double K, N, v, p;
  };
  std::vector<Case> cases;
  for (double N : Ns)
    for (double v : vs)
      for (double p : ps) cases.push_back({cfg.real("K", N - 1), N, v, p});

  struct Row {
    double model = 0, shooting = 0;
    std::string method, status = "ok";
  };
  const auto rows = parallel_map<Row>(cases.size(), [&](std::size_t i) {
    const Case& c = cases[i];
    Row row;
    try {
      const EigenResult m = lambda_model(c.K, c.N, c.v, c.p, n, tol);
      const EigenResult s = lambda_shooting(c.K, c.N, c.v, c.p, tol);
      row.model = m.lambda;
      row.method = to_string(m.method);
      row.shooting = s.lambda;
    } catch (const SolverError& e) {
      row.status = std::string("solver_failure: ") + e.what();
    }
    return row;
  });

  out.csv << "K,N,v,p,lambda_model,method,lambda_shooting,discrepancy,status\n";
  double worst = 0;
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const Case& c = cases[i];
    const Row& r = rows[i];
    const double disc = r.status == "ok" ? std::abs(r.model - r.shooting) / r.shooting : 0;
    if (r.status != "ok") out.solver_failure = true;
    worst = std::max(worst, disc);
    out.csv << csv_real(c.K) << ',' << csv_real(c.N) << ',' << csv_real(c.v) << ',' << csv_real(c.p) << ','
            << csv_real(r.model) << ',' << r.method << ',' << csv_real(r.shooting) << ',' << csv_real(disc) << ','
            << r.status << '\n';
  }
  out.audit("max_discrepancy", worst, max_discrepancy, worst <= max_discrepancy);
}

Subset make_domain(const DiscreteMMS& X, const std::string& kind, double v, double alpha, Rng& rng) {
  if (kind == "full") return Subset::all(X.size());
  if (kind == "cap") return cap(X, v);
  if (kind == "band") return equatorial_band(X, v);
  if (kind == "shifted") return shifted_cap(X, v, alpha);
  if (kind == "random") return random_connected_domain(X, v, rng);
  throw ConfigError("unknown domain kind '" + kind + "'");
}

SampledFunction make_function(const DiscreteMMS& X, const Subset& omega, const std::string& kind, Rng& rng) {
  if (kind == "bumps") return random_lipschitz(X, omega, rng);
  if (kind == "uniform") {
    SampledFunction u = random_values(X, rng);
    for (Index i = 0; i < X.size(); ++i)
      if (!omega.contains(i)) u.values()[i] = 0;
    return u;
  }
  if (kind == "radial") return radial_function(X, [](double t) { return 1 + std::cos(t); });
  throw ConfigError("unknown function kind '" + kind + "'");
}

void cmd_rearrange(const Config& cfg, const RunOptions& opts, Output& out) {
  const DiscreteMMS X = build_space(space_config(cfg));
  const ModelSpaced ms = space_model(X);
  Rng rng = sample_rng(require_seed(cfg, opts), 0);
  const Subset omega = make_domain(X, cfg.text("domain", "full"), cfg.real("v", 0.5), cfg.real("alpha", 0.3), rng);
  const SampledFunction u = make_function(X, omega, cfg.text("function", "bumps"), rng);
  const DistributionFunction df = distribution(u, omega);
  Index J = cfg.integer("J", 0);
  if (J == 0) J = default_rearrangement_cells(X, ms.radius_for_volume(std::min(df.domain_mass, 1.0)));
  const RearrangedFunction w = rearrange(df, ms, J, omega.count() < X.size());

  out.csv << "x,u_star\n";
  for (Index j = 0; j < w.grid.size(); ++j) out.csv << csv_real(w.grid[j]) << ',' << csv_real(w.values[j]) << '\n';

  double worst = 0;
  for (double p : cfg.reals("p_grid", {1, 2, 3.5})) {
    const double a = lp_norm(u, omega, p);
    const double b = lp_norm_rearranged(df, ms, p);
    worst = std::max(worst, a > 0 ? std::abs(a - b) / a : std::abs(b));
  }
  out.manifest["distribution"] = to_json(df);
  out.manifest["lipschitz"] = {{"u", lipschitz_constant(u)}, {"u_star", lipschitz_constant(w)}};
  out.audit("norm_preservation", worst, 1e-10, worst <= 1e-10);
}

void cmd_ps_check(const Config& cfg, const RunOptions& opts, Output& out) {
  const DiscreteMMS X = build_space(space_config(cfg));
  const ModelSpaced ms = space_model(X);
  const std::uint64_t seed = require_seed(cfg, opts);
  const Index samples = cfg.integer("samples", 500);
  const std::vector<double> ps = cfg.reals("p_grid", {1.5, 2, 3});
  const std::string domain = cfg.text("domain", "mixed");
  const double C = cfg.real("C", 4.0);
  const double n = grid_resolution(X);
  if (samples < 1) throw ConfigError("samples must be positive");

  struct Row {
    double mass = 0;
    std::vector<DeficitReport> reports;
  };
  const auto rows = parallel_map<Row>(static_cast<std::size_t>(samples), [&](std::size_t k) {
    Rng rng = sample_rng(seed, k);
    std::string kind = domain;
    if (domain == "mixed") kind = k % 2 == 0 ? "full" : "random";
    std::uniform_real_distribution<double> vol(0.2, 0.8);
    const double v = vol(rng);
    const Subset omega = make_domain(X, kind, v, 0.3, rng);
    const SampledFunction u = random_lipschitz(X, omega, rng);
    Row row;
    row.mass = measure(X, omega);
    for (double p : ps) row.reports.push_back(polya_szego_report(u, omega, p, ms));
    return row;
  });

  out.csv << "sample,domain_mass,p,energy_in,energy_model,deficit,relative_deficit,violation\n";
  Index violations = 0;
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < rows.size(); ++k)
    for (std::size_t q = 0; q < ps.size(); ++q) {
      const DeficitReport& rep = rows[k].reports[q];
      if (rep.energy_in == 0) continue;  // constant inputs carry no information
      const double rel = rep.deficit / rep.energy_in;
      const bool bad = rel < -C / n;
      violations += bad;
      worst = std::min(worst, rel * n);
      out.csv << k << ',' << csv_real(rows[k].mass) << ',' << csv_real(ps[q]) << ',' << csv_real(rep.energy_in) << ','
              << csv_real(rep.energy_model) << ',' << csv_real(rep.deficit) << ',' << csv_real(rel) << ','
              << (bad ? 1 : 0) << '\n';
    }
  out.manifest["tolerance"] = {{"C", C}, {"resolution", n}};
  out.manifest["worst_scaled_deficit"] = worst;
  out.audit("violations", static_cast<double>(violations), 0, violations == 0);
}

void cmd_gap_check(const Config& cfg, const RunOptions& opts, Output& out) {
  const DiscreteMMS X = build_space(space_config(cfg));
  const double p = cfg.real("p", 2);
  const double v = cfg.real("v", 0.5);
  const double alpha = cfg.real("alpha", 0.3);
  const double C = cfg.real("C", 1.0);
  const Index n_model = cfg.integer("n_model", 4096);
  const Index random_count = cfg.integer("random_count", 20);
  const std::vector<std::string> kinds = cfg.texts("domains", {"cap", "band", "shifted", "random"});
  const bool needs_seed = std::find(kinds.begin(), kinds.end(), "random") != kinds.end();
  const std::uint64_t seed = needs_seed ? require_seed(cfg, opts) : 0;
  const double n = grid_resolution(X);

  struct Job {
    std::string kind;
    Index index;
  };
  std::vector<Job> jobs;
  for (const std::string& k : kinds) {
    if (k == "random")
      for (Index i = 0; i < random_count; ++i) jobs.push_back({k, i});
    else
      jobs.push_back({k, 0});
  }
  struct Row {
    GapRow gap;
    std::string status = "ok";
  };
  const auto rows = parallel_map<Row>(jobs.size(), [&](std::size_t j) {
    Rng rng = sample_rng(seed, static_cast<std::size_t>(jobs[j].index));
    Row row;
    const Subset omega = make_domain(X, jobs[j].kind, v, alpha, rng);
    try {
      row.gap = gap_row(X, omega, jobs[j].kind, p, n_model);
    } catch (const SolverError& e) {
      row.gap.domain = jobs[j].kind;
      row.status = std::string("solver_failure: ") + e.what();
    }
    return row;
  });

  out.csv << "domain,index,v,lambda_domain,lambda_model,deficit,tolerance,violation,status\n";
  Index violations = 0;
  double min_probe = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < rows.size(); ++j) {
    const GapRow& g = rows[j].gap;
    const double tol = C / n * g.lambda_model;
    const bool ok = rows[j].status == "ok";
    if (!ok) out.solver_failure = true;
    const bool bad = ok && g.deficit < -tol;
    violations += bad;
    if (ok && jobs[j].kind == "shifted") min_probe = std::min(min_probe, g.deficit);
    out.csv << g.domain << ',' << jobs[j].index << ',' << csv_real(g.v) << ',' << csv_real(g.lambda_domain) << ','
            << csv_real(g.lambda_model) << ',' << csv_real(g.deficit) << ',' << csv_real(tol) << ',' << (bad ? 1 : 0)
            << ',' << rows[j].status << '\n';
  }
  out.audit("violations", static_cast<double>(violations), 0, violations == 0);
  if (cfg.has("min_probe_deficit") && std::isfinite(min_probe)) {
    const double bound = cfg.real("min_probe_deficit", 0);
    out.audit("shifted_probe_deficit", min_probe, bound, min_probe >= bound);
  }
}

void cmd_rigidity_probe(const Config& cfg, const RunOptions& opts, Output& out) {
  SpaceConfig base = space_config(cfg);
  if (base.builder != "suspension") throw ConfigError("rigidity-probe needs a suspension space");
  std::vector<double> grid = cfg.reals("n_t_grid", {static_cast<double>(base.n_t)});
  const double v = cfg.real("v", 0.5);
  const double p = cfg.real("p", 2);
  const double alpha = cfg.real("alpha", 0.3);
  const double C = cfg.real("C", 1.0);
  const int starts = static_cast<int>(cfg.integer("starts", 8));
  const Index n_model = cfg.integer("n_model", 4096);
  const double uniqueness_bound = cfg.real("uniqueness_bound", 1e-4);
  const std::uint64_t seed = require_seed(cfg, opts);

  out.csv << "quantity,n_t,value,bound\n";
  std::vector<double> ps_relative;
  bool pass_profile = true;
  bool pass_gap = true;
  const ModelSpaced ms(base.N - 1, base.N);
  for (std::size_t g = 0; g < grid.size(); ++g) {
    SpaceConfig sc = base;
    sc.n_t = static_cast<Index>(grid[g]);
    const DiscreteMMS X = build_space(sc);
    const Subset omega = cap(X, v);
    const double r = ms.radius_for_volume(measure(X, omega));
    const double nt = static_cast<double>(sc.n_t);

    const SampledFunction radial =
        radial_function(X, [r](double t) { return t < r ? std::cos(std::numbers::pi / 2 * t / r) : 0.0; });
    const DeficitReport ps_rep = polya_szego_report(radial, omega, p, ms);
    const double rel = ps_rep.deficit / ps_rep.energy_in;
    ps_relative.push_back(rel);
    out.csv << "ps_radial_relative_deficit," << sc.n_t << ',' << csv_real(rel) << ',' << csv_real(4.0 / nt) << '\n';

    const EigenResult dom = lambda_domain(X, omega, p, 1e-12);
    const GapRow cap_row = gap_row(X, omega, "cap", p, n_model);
    const double dist = radial_profile_distance(X, dom, p, n_model);
    pass_profile = pass_profile && dist <= 5 / nt;
    pass_gap = pass_gap && cap_row.deficit >= -C / nt * cap_row.lambda_model;
    out.csv << "cap_deficit," << sc.n_t << ',' << csv_real(cap_row.deficit) << ','
            << csv_real(-C / nt * cap_row.lambda_model) << '\n';
    out.csv << "profile_distance," << sc.n_t << ',' << csv_real(dist) << ',' << csv_real(5 / nt) << '\n';

    const Subset shifted = shifted_cap(X, v, alpha);
    const GapRow sh = gap_row(X, shifted, "shifted", p, n_model);
    out.csv << "shifted_deficit," << sc.n_t << ',' << csv_real(sh.deficit) << ",\n";
  }
  out.audit("profile_distance", pass_profile ? 0 : 1, 0, pass_profile);
  out.audit("cap_gap", pass_gap ? 0 : 1, 0, pass_gap);
  for (std::size_t g = 1; g < ps_relative.size(); ++g) {
    // refining by a factor k should divide the deficit by k
    const double expected = grid[g] / grid[g - 1];
    const double actual = ps_relative[g - 1] / ps_relative[g];
    out.csv << "ps_refinement_ratio," << static_cast<Index>(grid[g]) << ',' << csv_real(actual) << ','
            << csv_real(expected) << '\n';
    out.audit("ps_first_order_" + std::to_string(static_cast<Index>(grid[g])), actual, expected,
              std::abs(actual / expected - 1) <= 0.2);
  }

  SpaceConfig sc = base;
  sc.n_t = static_cast<Index>(grid.front());
  const DiscreteMMS X = build_space(sc);
  const UniquenessReport uq = uniqueness_probe(X, cap(X, v), p, starts, seed, 1e-13);
  out.csv << "uniqueness_distance," << sc.n_t << ',' << csv_real(uq.max_distance) << ','
          << csv_real(uniqueness_bound) << '\n';
  out.manifest["uniqueness"] = {{"successes", uq.successes}, {"failures", uq.failures}, {"lambdas", uq.lambdas}};
  if (uq.failures > 0) out.manifest["uniqueness"]["failure_messages"] = uq.failure_messages;
  // only the linear case is asserted
  if (p == 2) out.audit("uniqueness", uq.max_distance, uniqueness_bound, uq.max_distance <= uniqueness_bound);
}

void cmd_almost_rigidity_sweep(const Config& cfg, Output& out) {
  const double N = cfg.real("N", 2);
  const double p = cfg.real("p", 2);
  const double v = cfg.real("v", 0.3);
  const Index n_cells = cfg.integer("n_cells", 1024);
  const double tol = cfg.real("tol", 1e-9);
  const std::vector<double> fractions = cfg.reals("L_fractions", {1, 0.9, 0.75, 0.5});
  const ModelSpaced ms(N - 1, N);

  const auto rows = parallel_map<SweepRow>(fractions.size(), [&](std::size_t i) {
    return almost_rigidity_row(N, p, v, fractions[i] * ms.diameter(), n_cells);
  });
  out.csv << "L,diameter_deficit,v,lambda_domain,lambda_model,delta\n";
  bool nonneg = true;
  bool rigid = true;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const SweepRow& r = rows[i];
    out.csv << csv_real(r.L) << ',' << csv_real(ms.diameter() - r.L) << ',' << csv_real(r.v) << ','
            << csv_real(r.lambda_domain) << ',' << csv_real(r.lambda_model) << ',' << csv_real(r.delta) << '\n';
    nonneg = nonneg && r.delta >= -tol * r.lambda_model;
    if (fractions[i] == 1) rigid = rigid && std::abs(r.delta) <= tol * r.lambda_model;
  }
  // trend as L decreases, reported only
  std::vector<std::size_t> order(rows.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return rows[a].L > rows[b].L; });
  bool monotone = true;
  for (std::size_t k = 1; k < order.size(); ++k) monotone = monotone && rows[order[k]].delta > rows[order[k - 1]].delta;
  out.manifest["monotone_in_L"] = monotone;
  out.audit("delta_nonnegative", nonneg ? 0 : 1, 0, nonneg);
  out.audit("delta_at_full_diameter", rigid ? 0 : 1, 0, rigid);
}

}  // namespace

// ---------------------------------------------------------------------------------------------

DiscreteMMS build_space(const SpaceConfig& cfg) {
  if (cfg.builder == "model_interval") return build_model_interval(cfg.K, cfg.N, cfg.n_cells);
  if (cfg.builder == "truncated_model") {
    const double L = cfg.L > 0 ? cfg.L : cfg.L_fraction * ModelSpaced(cfg.K, cfg.N).diameter();
    return build_truncated_model(cfg.K, cfg.N, L, cfg.n_cells);
  }
  if (cfg.builder == "suspension") return build_suspension(cfg.N, cfg.fiber, cfg.n_t, cfg.n_theta);
  throw ConfigError("unknown space builder '" + cfg.builder + "'");
}

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"model-profile", "model-lambda", "rearrange", "ps-check",
                                              "gap-check",     "rigidity-probe", "almost-rigidity-sweep"};
  return names;
}

GapRow gap_row(const DiscreteMMS& X, const Subset& omega, const std::string& name, double p, Index n_model) {
  GapRow row;
  row.domain = name;
  row.v = measure(X, omega);
  row.lambda_domain = lambda_domain(X, omega, p, 1e-12).lambda;
  row.lambda_model = lambda_model(X.param("K"), X.param("N"), row.v, p, n_model, 1e-12).lambda;
  row.deficit = row.lambda_domain - row.lambda_model;
  return row;
}

double radial_profile_distance(const DiscreteMMS& X, const EigenResult& domain, double p, Index n_model) {
  // the cap is the support of the (positive) domain eigenfunction
  Subset omega = Subset::none(X.size());
  for (Index i = 0; i < X.size(); ++i)
    if (domain.eigenfunction[i] > 0) omega.insert(i);
  const EigenResult w = lambda_model(X.param("K"), X.param("N"), measure(X, omega), p, n_model, 1e-12);
  const auto profile = [&](double t) {
    const Eigen::VectorXd& x = w.grid;
    if (t <= x[0]) return w.eigenfunction[0];
    if (t >= x[x.size() - 1]) return 0.0;
    const auto it = std::upper_bound(x.data(), x.data() + x.size(), t);
    const Index j = static_cast<Index>(it - x.data());
    const double a = (t - x[j - 1]) / (x[j] - x[j - 1]);
    return (1 - a) * w.eigenfunction[j - 1] + a * w.eigenfunction[j];
  };
  long double sum = 0;
  for (Index i = 0; i < X.size(); ++i)
    sum += X.masses()[i] * std::pow(std::abs(domain.eigenfunction[i] - profile(X.coordinates()(i, 0))), p);
  return std::pow(static_cast<double>(sum), 1 / p);
}

SweepRow almost_rigidity_row(double N, double p, double v, double L, Index n_cells) {
  const DiscreteMMS X = build_truncated_model(N - 1, N, L, n_cells);
  const Subset omega = cap(X, v);
  SweepRow row;
  row.L = L;
  row.v = measure(X, omega);
  row.lambda_domain = lambda_domain(X, omega, p, 1e-12).lambda;
  row.lambda_model = lambda_model(N - 1, N, row.v, p, std::max<Index>(64, omega.count()), 1e-12).lambda;
  row.delta = row.lambda_domain - row.lambda_model;
  return row;
}

ExitCode run_command(const RunOptions& opts, std::ostream& log) {
  const auto& names = command_names();
  if (std::find(names.begin(), names.end(), opts.command) == names.end()) {
    log << "unknown command '" << opts.command << "'\n";
    return ExitCode::config_error;
  }
  Output out;
  toml::table tbl;
  try {
    tbl = load_config(opts);
    const Config cfg(tbl);
    log << "running " << opts.command << '\n';
    if (opts.command == "model-profile") cmd_model_profile(cfg, out);
    else if (opts.command == "model-lambda") cmd_model_lambda(cfg, out);
    else if (opts.command == "rearrange") cmd_rearrange(cfg, opts, out);
    else if (opts.command == "ps-check") cmd_ps_check(cfg, opts, out);
    else if (opts.command == "gap-check") cmd_gap_check(cfg, opts, out);
    else if (opts.command == "rigidity-probe") cmd_rigidity_probe(cfg, opts, out);
    else cmd_almost_rigidity_sweep(cfg, out);
  } catch (const ConfigError& e) {
    log << "config error: " << e.what() << '\n';
    return ExitCode::config_error;
  } catch (const DomainError& e) {
    log << "config error: " << e.what() << '\n';
    return ExitCode::config_error;
  } catch (const PreconditionError& e) {
    log << "config error: " << e.what() << '\n';
    return ExitCode::config_error;
  } catch (const SolverError& e) {
    log << "solver failure: " << e.what() << " (" << e.diagnostics() << ")\n";
    return ExitCode::solver_failure;
  }

  ExitCode code = ExitCode::ok;
  if (std::any_of(out.audits.begin(), out.audits.end(), [](const Audit& a) { return !a.pass; }))
    code = ExitCode::audit_violation;
  if (out.solver_failure) code = ExitCode::solver_failure;

  std::error_code ec;
  std::filesystem::create_directories(opts.out_dir, ec);
  const std::filesystem::path csv_path = opts.out_dir / (opts.command + ".csv");
  const std::filesystem::path json_path = opts.out_dir / (opts.command + ".json");
  {
    std::ofstream f(csv_path);
    f << "# rgap " << opts.command << " generated " << timestamp() << '\n' << out.csv.str();
    if (!f) {
      log << "cannot write " << csv_path.string() << '\n';
      return ExitCode::config_error;
    }
  }
  Json audits = Json::array();
  for (const Audit& a : out.audits)
    audits.push_back({{"name", a.name}, {"value", a.value}, {"bound", a.bound}, {"pass", a.pass}});
  out.manifest["command"] = opts.command;
  out.manifest["config"] = config_json(tbl);
  out.manifest["overrides"] = opts.overrides;
  if (opts.seed) out.manifest["seed"] = *opts.seed;
  out.manifest["versions"] = {{"rgap", kVersion},
                              {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                                            "." + std::to_string(EIGEN_MINOR_VERSION)},
                              {"boost", BOOST_LIB_VERSION}};
  out.manifest["files"] = {csv_path.filename().string()};
  out.manifest["audits"] = audits;
  out.manifest["exit_code"] = static_cast<int>(code);
  out.manifest["generated"] = timestamp();
  {
    std::ofstream f(json_path);
    f << out.manifest.dump(2) << '\n';
  }
  for (const Audit& a : out.audits)
    log << (a.pass ? "  pass " : "  FAIL ") << a.name << " value=" << a.value << " bound=" << a.bound << '\n';
  log << "wrote " << csv_path.string() << " and " << json_path.string() << '\n';
  return code;
}

}  // namespace rgap
