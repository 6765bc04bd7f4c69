#include "experiments.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <random>
#include <set>
#include <sstream>

#include <CLI11.hpp>

#include "ndlab/commdim.hpp"
#include "ndlab/cstar.hpp"
#include "ndlab/fock.hpp"
#include "ndlab/instances.hpp"
#include "ndlab/roe.hpp"

namespace ndlab::cli {

std::string format_double(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::string Table::to_csv() const {
  std::string out;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += cells[i];
    }
    out += '\n';
  };
  line(columns);
  for (const auto& r : rows) line(r);
  return out;
}

bool RunReport::pass() const {
  return std::all_of(criteria.begin(), criteria.end(), [](const Criterion& c) { return c.pass; });
}

std::vector<std::string> RunReport::failing() const {
  std::vector<std::string> out;
  for (const Criterion& c : criteria)
    if (!c.pass) out.push_back(c.name);
  return out;
}

Json RunReport::to_json() const {
  Json j;
  j["id"] = id;
  j["version"] = kVersion;
  j["anchor"] = anchor;
  j["config"] = config;
  Json crit = Json::array();
  for (const Criterion& c : criteria) {
    Json e;
    e["name"] = c.name;
    e["value"] = c.value;
    e["bound"] = c.bound;
    e["tol"] = c.tol;
    e["pass"] = c.pass;
    if (!c.note.empty()) e["note"] = c.note;
    crit.push_back(e);
  }
  j["criteria"] = crit;
  j["pass"] = pass();
  j["table"] = {{"columns", table.columns}, {"rows", table.rows}};
  j["elapsed_ms"] = elapsed_ms ? Json(*elapsed_ms) : Json(nullptr);
  return j;
}

namespace {

// ---------------------------------------------------------------------------
// parameters

class Params {
 public:
  Params(const Json& j, std::set<std::string> allowed) : j_(j) {
    if (!j_.is_object()) throw InputError("params must be an object");
    allowed.insert("seed");
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!allowed.count(it.key())) throw InputError("unknown parameter '" + it.key() + "'");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  template <class T>
  T get(const std::string& key, T fallback) const {
    if (!j_.contains(key)) return fallback;
    try {
      return j_.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
      throw InputError("parameter '" + key + "' has the wrong type");
    }
  }

  const Json& raw(const std::string& key) const { return j_.at(key); }

  std::uint64_t seed() const { return get<std::uint64_t>("seed", 0); }

 private:
  const Json& j_;
};

Index positive(Index v, const std::string& what) {
  if (v < 1) throw InputError(what + " must be positive");
  return v;
}

Criterion at_most(std::string name, double value, double bound, double tol, std::string note = {}) {
  return {std::move(name), value, bound, tol, value <= bound + tol, std::move(note)};
}

Criterion at_least(std::string name, double value, double bound, double tol, std::string note = {}) {
  return {std::move(name), value, bound, tol, value >= bound - tol, std::move(note)};
}

Criterion near(std::string name, double value, double target, double tol, std::string note = {}) {
  return {std::move(name), value, target, tol, std::abs(value - target) <= tol, std::move(note)};
}

std::string rat(const Rational& q) { return to_string(q); }
std::string dbl(double x) { return format_double(x); }
std::string num(Index x) { return std::to_string(x); }

std::vector<Word> words_up_to(int n, Index max_len) {
  std::vector<Word> out{Word{}};
  std::size_t begin = 0;
  for (Index len = 1; len <= max_len; ++len) {
    const std::size_t end = out.size();
    for (std::size_t i = begin; i < end; ++i)
      for (int a = 1; a <= n; ++a) {
        Word w = out[i];
        w.letters.push_back(a);
        out.push_back(w);
      }
    begin = end;
  }
  return out;
}

// ---------------------------------------------------------------------------
// fock

RunReport sigma_check(const Params& p) {
  const Index kmin = p.get<Index>("k_min", 2), kmax = p.get<Index>("k_max", 32);
  if (kmin < 2 || kmax < kmin) throw InputError("need 2 <= k_min <= k_max");
  RunReport rep;
  rep.table.columns = {"k", "l", "stable_diag_min", "stable_diag_max", "max_offdiag_ratio"};
  Index diag_bad = 0, off_bad = 0, direct_bad = 0;
  std::vector<Index> diag_fail_k;
  Rational worst_ratio = 0;
  for (Index k = kmin; k <= kmax; ++k) {
    const SchurProfile prof(k);
    const Index l = prof.l();
    Rational dmin = 2, dmax = -1, ratio = 0;
    bool k_diag_ok = true;
    for (Index i = k + l + 1; i <= k + l + 2 * k; ++i) {
      const Rational s = prof.sigma(i, i);
      dmin = std::min(dmin, s);
      dmax = std::max(dmax, s);
      if (s != 1) {
        ++diag_bad;
        k_diag_ok = false;
      }
      for (Index q = 1; q < l; ++q) {
        const Rational dev = abs(prof.sigma(i, i + q) - 1);
        const Rational bound(2 + q, l + 1);
        if (dev > bound) ++off_bad;
        ratio = std::max(ratio, Rational(dev / bound));
      }
    }
    for (Index i = 1; i <= k + l + 3 * k; ++i)
      for (Index j = std::max<Index>(1, i - k); j <= i + k; ++j)
        if (prof.sigma(i, j) != prof.direct(i, j)) ++direct_bad;
    if (!k_diag_ok) diag_fail_k.push_back(k);
    worst_ratio = std::max(worst_ratio, ratio);
    rep.table.rows.push_back({num(k), num(l), rat(dmin), rat(dmax), rat(ratio)});
  }
  std::string note;
  if (!diag_fail_k.empty()) {
    note = "sigma_ii != 1 for k =";
    for (Index k : diag_fail_k) note += " " + num(k);
  }
  rep.criteria.push_back(at_most("stable_diagonal_exact", static_cast<double>(diag_bad), 0, 0, note));
  rep.criteria.push_back(
      at_most("offdiag_bound", static_cast<double>(off_bad), 0, 0, "max ratio " + rat(worst_ratio)));
  rep.criteria.push_back(at_most("profile_matches_direct_sum", static_cast<double>(direct_bad), 0, 0));
  return rep;
}

RunReport kappa_psd(const Params& p) {
  const Index kmin = p.get<Index>("k_min", 2), kmax = p.get<Index>("k_max", 64);
  if (kmin < 2 || kmax < kmin) throw InputError("need 2 <= k_min <= k_max");
  RunReport rep;
  rep.table.columns = {"k", "min_eigenvalue", "operator_norm", "multiplier_norm"};
  double worst_min = 1e300, worst_norm = 0, worst_mult = 0;
  for (Index k = kmin; k <= kmax; ++k) {
    const RationalMatrix kap = kappa_matrix(k);
    const CMatrix m = kap.to_real().cast<Complex>();
    const PsdReport psd = psd_check(m, 1e-10);
    const double norm = operator_norm(m);
    Rational mult = 0;
    for (Index i = 0; i < k; ++i) mult = std::max(mult, kap(i, i));
    worst_min = std::min(worst_min, psd.min_eigenvalue);
    worst_norm = std::max(worst_norm, norm);
    worst_mult = std::max(worst_mult, to_double(mult));
    rep.table.rows.push_back({num(k), dbl(psd.min_eigenvalue), dbl(norm), rat(mult)});
  }
  rep.criteria.push_back(at_least("min_eigenvalue", worst_min, 0.0, 1e-10));
  rep.criteria.push_back(at_most("operator_norm", worst_norm, 1.0, 1e-10));
  rep.criteria.push_back(at_most("schur_multiplier_norm", worst_mult, 1.0, 1e-10, "max diagonal entry"));
  return rep;
}

RunReport calkin(const Params& p) {
  const int n = p.get<int>("n", 2);
  const Index max_len = p.get<Index>("max_len", 3);
  const auto ks = p.get<std::vector<Index>>("ks", {8, 12, 16, 20});
  const auto cks = p.get<std::vector<Index>>("composite_ks", {});
  const Index depth = p.get<Index>("composite_depth", 19);
  const Index cmax = p.get<Index>("composite_max_len", 2);
  if (n < 2 || max_len < 0 || ks.empty()) throw InputError("calkin-defect: bad n, max_len or ks");
  RunReport rep;
  rep.table.columns = {"n", "k", "len_mu", "len_nu", "exact_sup", "exact_sup_rational", "paper_bound"};
  const auto words = words_up_to(n, max_len);
  Index violations = 0, monotone_bad = 0;
  Rational worst = 0;
  std::map<std::pair<Index, Index>, Rational> prev;  // (|mu|, |nu|) -> sup at previous k
  for (std::size_t ki = 0; ki < ks.size(); ++ki) {
    const Index k = ks[ki];
    std::map<std::pair<Index, Index>, std::pair<Rational, Rational>> by_len;
    for (const Word& mu : words)
      for (const Word& nu : words) {
        const CalkinDefect d = calkin_defect(mu, nu, k);
        if (!d.holds()) ++violations;
        worst = std::max(worst, Rational(d.exact_sup / d.paper_bound));
        auto key = std::make_pair(mu.length(), nu.length());
        auto it = by_len.find(key);
        if (it == by_len.end() || d.exact_sup > it->second.first) by_len[key] = {d.exact_sup, d.paper_bound};
        if (ki > 0) {
          auto pit = prev.find(key);
          if (pit != prev.end() && d.exact_sup > pit->second) ++monotone_bad;
        }
      }
    for (const auto& [key, v] : by_len) {
      prev[key] = v.first;
      rep.table.rows.push_back({num(n), num(k), num(key.first), num(key.second), dbl(to_double(v.first)), rat(v.first),
                                rat(v.second)});
    }
  }
  rep.criteria.push_back(at_most("calkin_bound", static_cast<double>(violations), 0, 0, "max sup/bound " + rat(worst)));
  rep.criteria.push_back(at_most("nonincreasing_in_k", static_cast<double>(monotone_bad), 0, 0));
  if (!cks.empty()) {
    const TruncatedFock fock(n, depth);
    const auto cwords = words_up_to(n, cmax);
    Index mismatches = 0;
    double dev = 0;
    for (Index k : cks)
      for (const Word& mu : cwords)
        for (const Word& nu : cwords) {
          const CalkinDefect d = calkin_defect(mu, nu, k, fock);
          if (!d.composite_matches_schur.value_or(false)) ++mismatches;
          dev = std::max(dev, d.composite_max_deviation);
        }
    rep.criteria.push_back(at_most("schur_composite_oracle", static_cast<double>(mismatches), 0, 0,
                                   "depth " + num(depth) + ", max deviation " + dbl(dev) + " (tol 1e-12)"));
  }
  return rep;
}

RunReport fock_triple(const Params& p) {
  const int n = p.get<int>("n", 2);
  const Index k = p.get<Index>("k", 4), L = p.get<Index>("L", 20);
  const TruncatedFock fock(n, L);
  const FockTripleReport r = fock_triple_report(fock, k);
  RunReport rep;
  rep.table.columns = {"quantity", "value"};
  rep.table.rows = {{"psi_norm", dbl(r.psi_norm)},
                    {"phi_norm", dbl(r.phi_norm)},
                    {"psi_profile_min_eigenvalue", dbl(r.psi_profile_min_eigenvalue)},
                    {"p_residual", dbl(r.p_summand.residual())},
                    {"p_orthogonality", dbl(r.p_summand.orthogonality)},
                    {"q_residual", dbl(r.q_summand.residual())},
                    {"q_orthogonality", dbl(r.q_summand.orthogonality)}};
  rep.criteria.push_back(near("psi_norm", r.psi_norm, 1.0, 1e-9));
  rep.criteria.push_back(near("phi_norm", r.phi_norm, 2.0, 1e-9));
  rep.criteria.push_back(at_least("psi_completely_positive", r.psi_profile_min_eigenvalue, 0.0, 1e-10));
  rep.criteria.push_back(at_most("p_summand_order_zero", std::max(r.p_summand.residual(), r.p_summand.orthogonality), 0.0, 1e-10));
  rep.criteria.push_back(at_most("q_summand_order_zero", std::max(r.q_summand.residual(), r.q_summand.orthogonality), 0.0, 1e-10));
  return rep;
}

// ---------------------------------------------------------------------------
// roe

struct RoeSetup {
  std::shared_ptr<const CoarseSpace> space;
  std::function<DiscreteCover(Index r)> cover;
};

RoeSetup roe_space(const Json& desc) {
  if (!desc.is_object() || desc.size() != 1) throw InputError("space: expected one of z_interval, grid, explicit");
  RoeSetup s;
  try {
    if (desc.contains("z_interval")) {
      const Index len = desc["z_interval"].at("len").get<Index>();
      s.space = std::make_shared<CoarseSpace>(CoarseSpace::z_interval(len));
      auto sp = s.space;
      s.cover = [sp](Index r) { return cover_Z(*sp, r); };
    } else if (desc.contains("grid")) {
      const Index d = desc["grid"].at("d").get<Index>(), side = desc["grid"].at("side").get<Index>();
      s.space = std::make_shared<CoarseSpace>(CoarseSpace::grid(d, side));
      auto sp = s.space;
      s.cover = [sp, d, side](Index r) { return cover_Zd(*sp, r, d, side); };
    } else if (desc.contains("explicit")) {
      const Json& e = desc["explicit"];
      const auto rows = e.at("dist").get<std::vector<std::vector<Index>>>();
      std::vector<Index> table;
      for (const auto& row : rows) {
        if (row.size() != rows.size()) throw InputError("explicit space: distance matrix must be square");
        table.insert(table.end(), row.begin(), row.end());
      }
      s.space = std::make_shared<CoarseSpace>(static_cast<Index>(rows.size()), std::move(table));
      auto families = e.at("cover").get<std::vector<PointSets>>();
      auto sp = s.space;
      DiscreteCover c = DiscreteCover::from_families(*sp, families);
      c.validate(*sp);
      s.cover = [c](Index) { return c; };
    } else {
      throw InputError("space: expected one of z_interval, grid, explicit");
    }
  } catch (const nlohmann::json::exception& ex) {
    throw InputError(std::string("space: ") + ex.what());
  }
  return s;
}

RunReport roe_converge(const Params& p) {
  const Json space_spec = p.has("space") ? p.raw("space") : Json{{"z_interval", {{"len", 200}}}};
  const auto rs = p.get<std::vector<Index>>("rs", {2, 4, 8, 16, 32});
  const std::string op = p.get<std::string>("operator", "shift");
  if (rs.empty()) throw InputError("rs must be nonempty");
  RoeSetup setup = roe_space(space_spec);
  std::optional<BandMatrix> a;
  if (op == "shift") {
    a = BandMatrix::shift(setup.space);
  } else if (op == "random") {
    std::mt19937_64 rng(derive_seed(p.seed(), 0));
    a = BandMatrix::random(setup.space, p.get<Index>("width", 1), p.get<double>("entry_bound", 1.0), rng);
  } else {
    throw InputError("operator must be shift or random");
  }
  RunReport rep;
  rep.table.columns = {"r", "defect", "commutator_sum", "paper_bound", "residual"};
  double unital = 0, residual = 0, worst_excess = -1e300;
  Index bound_bad = 0, chain_bad = 0, decrease_bad = 0;
  double prev = 1e300;
  for (Index r : rs) {
    positive(r, "r");
    const DiscreteCover cover = setup.cover(r);
    const HFamily hf = h_family(*setup.space, cover, r);
    const CommutatorReport comm = commutator_report(*a, hf);
    const PhiPsiReport pp = phi_psi_defect(*a, hf, cover);
    unital = std::max(unital, pp.unital_defect);
    residual = std::max(residual, pp.residual);
    worst_excess = std::max(worst_excess, comm.total - comm.paper_bound);
    if (!comm.holds) ++bound_bad;
    if (!pp.holds) ++chain_bad;
    if (!(pp.defect < prev)) ++decrease_bad;
    prev = pp.defect;
    rep.table.rows.push_back({num(r), dbl(pp.defect), dbl(pp.commutator_sum), dbl(comm.paper_bound), dbl(pp.residual)});
  }
  rep.criteria.push_back(at_most("unital", unital, 0.0, 1e-12));
  rep.criteria.push_back(at_most("defect_strictly_decreasing", static_cast<double>(decrease_bad), 0, 0));
  rep.criteria.push_back(at_most("commutator_bound", static_cast<double>(bound_bad), 0, 0,
                                 "max ||[h,a]|| - bound " + dbl(worst_excess) + " (tol 1e-9)"));
  rep.criteria.push_back(at_most("psi_residual", residual, 0.0, 0.0));
  rep.criteria.push_back(at_most("defect_vs_commutators", static_cast<double>(chain_bad), 0, 0, "tol 1e-9"));
  return rep;
}

// ---------------------------------------------------------------------------
// commdim

std::vector<double> sample_path(Index n, const std::function<double(double)>& f) {
  std::vector<double> out(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = f(n == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(n - 1));
  return out;
}

RunReport commutative_dim(const Params& p) {
  const std::string space = p.get<std::string>("space", "path");
  RunReport rep;
  rep.table.columns = {"scale", "sets", "colors", "error", "oscillation_bound"};
  Index err_bad = 0;
  double worst_gap = -1e300;
  int max_colors = 0;
  auto record = [&](const std::string& scale, const FinSpace& sp, const ColoredCover& cover, const std::vector<double>& f) {
    const PartitionOfUnity pou = build_pou(cover, sp);
    const ApproxTriple t = build_commutative_triple(sp, cover, pou);
    const double err = commutative_error(t, f), osc = oscillation_bound(f, pou);
    if (err > osc + 1e-12) ++err_bad;
    worst_gap = std::max(worst_gap, err - osc);
    max_colors = std::max(max_colors, cover.num_colors);
    rep.table.rows.push_back({scale, num(static_cast<Index>(cover.sets.size())), num(cover.num_colors), dbl(err), dbl(osc)});
    return t;
  };
  if (space == "path") {
    const Index N = positive(p.get<Index>("points", 128), "points");
    const auto meshes = p.get<std::vector<double>>("meshes", {1.0 / 8, 1.0 / 16, 1.0 / 32});
    const double cmesh = p.get<double>("contractify_mesh", 1.0 / 32);
    const double eps = p.get<double>("eps", 0.05);
    const FinSpace sp = FinSpace::path(N);
    const auto f = sample_path(N, [](double t) { return std::sin(t); });
    for (double m : meshes) record(dbl(m), sp, interval_cover(sp, m), f);
    rep.criteria.push_back(at_most("error_within_oscillation", static_cast<double>(err_bad), 0, 0,
                                   "max error - bound " + dbl(worst_gap) + " (tol 1e-12)"));
    rep.criteria.push_back(at_most("colors", max_colors, 2, 0));

    const ColoredCover cover = interval_cover(sp, cmesh);
    const ApproxTriple t = build_commutative_triple(sp, cover, build_pou(cover, sp));
    const auto h = sample_path(N, [](double x) { return std::min(1.0, x / 0.1); });
    const auto g = sample_path(N, [](double x) { return std::max(0.0, std::sin(x) - std::sin(0.1)); });
    const ApproxTriple hat = contractify(t, h, eps);
    const Index dF = hat.F.matrix_dim();
    const double one_norm = operator_norm(hat.phi.apply(CMatrix::Identity(dF, dF)));
    const double cerr = commutative_error(hat, g);
    rep.table.rows.push_back({"contractify@" + dbl(cmesh), num(dF), num(hat.colors()), dbl(cerr), dbl(eps)});
    rep.criteria.push_back(at_most("contractify_phi_unit_norm", one_norm, 1.0, 1e-10));
    rep.criteria.push_back(at_most("contractify_error", cerr, eps, 0.0));
  } else if (space.rfind("grid:", 0) == 0) {
    Index rows = 0, cols = 0;
    char x = 0;
    std::istringstream in(space.substr(5));
    if (!(in >> rows >> x >> cols) || x != 'x' || rows < 1 || cols < 1) throw InputError("space: expected grid:AxB");
    const auto Rs = p.get<std::vector<Index>>("Rs", {1, 2, 4});
    const FinSpace sp = FinSpace::grid(rows, cols);
    std::vector<double> f(static_cast<std::size_t>(rows * cols));
    const double scale = static_cast<double>(std::max<Index>(1, rows + cols - 2));
    for (Index r = 0; r < rows; ++r)
      for (Index c = 0; c < cols; ++c) f[static_cast<std::size_t>(r * cols + c)] = std::sin(static_cast<double>(r + c) / scale);
    for (Index R : Rs) record("R=" + num(R), sp, grid_brick_cover(sp, rows, cols, R), f);
    rep.criteria.push_back(at_most("error_within_oscillation", static_cast<double>(err_bad), 0, 0,
                                   "max error - bound " + dbl(worst_gap) + " (tol 1e-12)"));
    rep.criteria.push_back(at_most("colors", max_colors, 3, 0));
  } else {
    throw InputError("space must be path or grid:AxB");
  }
  return rep;
}

// ---------------------------------------------------------------------------
// cstar suites

RunReport prune_demo(const Params& p) {
  const Index count = positive(p.get<Index>("instances", 100), "instances");
  const auto epss = p.get<std::vector<double>>("eps", {1e-6, 1e-8});
  const int max_colors = p.get<int>("max_colors", 3);
  if (max_colors < 2 || max_colors > 3) throw InputError("max_colors must be 2 or 3");
  RunReport rep;
  rep.table.columns = {"eps", "instances", "planted", "dropped", "max_dropped_mass", "min_mass_bound", "max_post_error",
                       "error_bound", "max_surviving_product"};
  Index mass_bad = 0, err_bad = 0, prod_bad = 0, missed = 0;
  for (std::size_t e = 0; e < epss.size(); ++e) {
    const double eps = epss[e];
    if (!(eps > 0 && eps < 1)) throw InputError("eps must lie in (0, 1)");
    Index planted = 0, dropped = 0;
    double mass = 0, post = 0, prod = 0, mass_bound = 1e300, err_bound = 0;
    for (Index i = 0; i < count; ++i) {
      std::mt19937_64 rng(derive_seed(p.seed(), e * 1000003 + static_cast<std::uint64_t>(i)));
      const PruneInstance inst = random_prune_instance(rng, eps, max_colors);
      const PruneResult res = prune_to_order_zero(inst.triple, inst.testset, eps);
      const PruneCertificate& c = res.certificate;
      planted += static_cast<Index>(inst.planted.size());
      dropped += static_cast<Index>(c.bad_blocks.size());
      const Index base = static_cast<Index>(inst.testset.size());
      for (std::size_t b = 0; b < inst.planted.size(); ++b)
        if (std::find(c.bad_blocks.begin(), c.bad_blocks.end(), base + static_cast<Index>(b)) == c.bad_blocks.end()) ++missed;
      if (c.dropped_mass > c.dropped_bound) ++mass_bad;
      if (!(c.post_error < c.error_bound)) ++err_bad;
      if (!(c.max_surviving_product < c.product_bound)) ++prod_bad;
      mass = std::max(mass, c.dropped_mass);
      post = std::max(post, c.post_error);
      prod = std::max(prod, c.max_surviving_product);
      mass_bound = std::min(mass_bound, c.dropped_bound);
      err_bound = c.error_bound;
    }
    rep.table.rows.push_back({dbl(eps), num(count), num(planted), num(dropped), dbl(mass), dbl(mass_bound), dbl(post),
                              dbl(err_bound), dbl(prod)});
  }
  rep.criteria.push_back(at_most("dropped_mass", static_cast<double>(mass_bad), 0, 0));
  rep.criteria.push_back(at_most("post_error", static_cast<double>(err_bad), 0, 0));
  rep.criteria.push_back(at_most("surviving_products", static_cast<double>(prod_bad), 0, 0));
  rep.criteria.push_back(at_most("planted_blocks_dropped", static_cast<double>(missed), 0, 0));
  return rep;
}

RunReport orderzero_roundtrip(const Params& p) {
  const Index count = positive(p.get<Index>("instances", 100), "instances");
  const Index max_dim = positive(p.get<Index>("max_dim", 64), "max_dim");
  RunReport rep;
  rep.table.columns = {"instance", "blocks", "D", "residual", "trace_pullback_defect"};
  double worst_res = 0, worst_tr = 0;
  for (Index i = 0; i < count; ++i) {
    std::mt19937_64 rng(derive_seed(p.seed(), static_cast<std::uint64_t>(i)));
    const OrderZeroInstance inst = random_order_zero(rng, max_dim);
    const OrderZeroDecomposition dec = order_zero_decompose(inst.phi);
    const double tr = trace_pullback_defect(inst.phi, CMatrix::Identity(inst.D, inst.D) / static_cast<double>(inst.D));
    worst_res = std::max(worst_res, dec.residual);
    worst_tr = std::max(worst_tr, tr);
    rep.table.rows.push_back({num(i), num(inst.F.num_blocks()), num(inst.D), dbl(dec.residual), dbl(tr)});
  }
  rep.criteria.push_back(at_most("decomposition_residual", worst_res, 0.0, 1e-9));
  rep.criteria.push_back(at_most("trace_pullback_defect", worst_tr, 0.0, 1e-8));
  return rep;
}

std::vector<CMatrix> image_samples(std::mt19937_64& rng, const ApproxTriple& t, int count) {
  std::vector<CMatrix> out;
  const Index dF = t.F.matrix_dim();
  for (int i = 0; i < count; ++i) {
    CMatrix x = FdElement::from_matrix(t.F, random_matrix(rng, dF, dF)).to_matrix();
    x /= std::max(1.0, operator_norm(x));
    out.push_back(t.phi.apply(x));
  }
  return out;
}

RunReport permanence_tensor(const Params& p) {
  const Index count = positive(p.get<Index>("instances", 10), "instances");
  const Index dmin = p.get<Index>("d_min", 2), dmax = p.get<Index>("d_max", 8);
  if (dmin < 2 || dmax < dmin || dmax * dmax > kTensorAmbientCap) throw InputError("need 2 <= d_min <= d_max, d_max^2 <= 256");
  RunReport rep;
  rep.table.columns = {"instance", "d1", "d2", "tensor_colors", "max_order_zero_residual", "approximation_error", "sum_colors"};
  Index input_bad = 0, tensor_bad = 0, color_bad = 0, sum_bad = 0;
  double worst = 0;
  for (Index i = 0; i < count; ++i) {
    std::mt19937_64 rng(derive_seed(p.seed(), static_cast<std::uint64_t>(i)));
    std::uniform_int_distribution<Index> dim(dmin, dmax);
    const Index d1 = dim(rng), d2 = dim(rng);
    const ApproxTriple t1 = random_block_triple(rng, d1, 2), t2 = random_block_triple(rng, d2, 2);
    const auto s1 = image_samples(rng, t1, 3), s2 = image_samples(rng, t2, 3);
    if (!validate_triple(t1, s1, 1e-9).pass || !validate_triple(t2, s2, 1e-9).pass) ++input_bad;
    const ApproxTriple tt = tensor_triples(t1, t2);
    std::vector<CMatrix> st;
    for (std::size_t a = 0; a < s1.size(); ++a) st.push_back(kron(s1[a], s2[a]));
    const ValidationReport v = validate_triple(tt, st, 1e-9);
    double res = 0;
    for (double r : v.order_zero_residual) res = std::max(res, r);
    worst = std::max(worst, res);
    if (!v.pass || res > 1e-9) ++tensor_bad;
    if (tt.colors() != 4) ++color_bad;
    const Index d3 = std::max<Index>(3, dim(rng));
    const ApproxTriple t3 = random_block_triple(rng, d3, 3);
    const ApproxTriple sum = direct_sum_triples(t1, t3);
    if (sum.colors() != std::max(t1.colors(), t3.colors()) || sum.ambient_dim != d1 + d3) ++sum_bad;
    rep.table.rows.push_back({num(i), num(d1), num(d2), num(tt.colors()), dbl(res), dbl(v.approximation_error), num(sum.colors())});
  }
  rep.criteria.push_back(at_most("inputs_validated", static_cast<double>(input_bad), 0, 0));
  rep.criteria.push_back(at_most("tensor_validated", static_cast<double>(tensor_bad), 0, 0, "max residual " + dbl(worst) + " (tol 1e-9)"));
  rep.criteria.push_back(at_most("tensor_has_4_colors", static_cast<double>(color_bad), 0, 0));
  rep.criteria.push_back(at_most("direct_sum_max_colors", static_cast<double>(sum_bad), 0, 0));
  return rep;
}

// ---------------------------------------------------------------------------
// registry

struct Entry {
  ExperimentInfo info;
  std::set<std::string> params;
  std::function<RunReport(const Params&)> run;
};

const std::vector<Entry>& registry() {
  static const std::vector<Entry> reg = {
      {{"sigma-check", "fock", "exact Schur profile: stable diagonal, off-diagonal decay, tabulation vs block sums",
        "Schur profile of the two shifted kappa block chains"},
       {"k_min", "k_max"},
       sigma_check},
      {{"kappa-psd", "fock", "kappa_k: spectrum, operator norm and Schur multiplier norm",
        "tent matrices kappa_k defining the Fock-space c.p. maps"},
       {"k_min", "k_max"},
       kappa_psd},
      {{"calkin-defect", "fock", "tail defect |1 - sigma| on T_mu T_nu* against 2(2+||mu|-|nu||)/k",
        "asymptotic factorisation of the Cuntz-Toeplitz generators through Schur multiplication"},
       {"n", "max_len", "ks", "composite_ks", "composite_depth", "composite_max_len"},
       calkin},
      {{"fock-triple", "fock", "norms of psi_k, phi_k and order zero of both phi_k summands",
        "two-colour Fock-space approximation (psi_k, phi_k)"},
       {"n", "k", "L"},
       fock_triple},
      {{"roe-converge", "roe", "Phi_r Psi_r convergence on band matrices with discrete covers",
        "partition-of-unity approximation of uniform Roe algebras"},
       {"space", "rs", "operator", "width", "entry_bound"},
       roe_converge},
      {{"commutative-dim", "commdim", "interval and brick covers: approximation error, colours, contraction",
        "covering-dimension triples for C(X)"},
       {"space", "points", "meshes", "contractify_mesh", "eps", "Rs"},
       commutative_dim},
      {{"prune-demo", "cstar", "pruning to order zero: dropped mass, post error, surviving products",
        "cutting approximately orthogonal blocks out of an approximation"},
       {"instances", "eps", "max_colors"},
       prune_demo},
      {{"orderzero-roundtrip", "cstar", "random h.pi maps: decomposition residual and trace pullback",
        "structure of order zero maps and their tracial pullbacks"},
       {"instances", "max_dim"},
       orderzero_roundtrip},
      {{"permanence-tensor", "cstar", "tensor products and direct sums of validated triples",
        "colour counts under tensor products and direct sums"},
       {"instances", "d_min", "d_max"},
       permanence_tensor},
  };
  return reg;
}

// ---------------------------------------------------------------------------
// command line

Json parse_value(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::exception&) {
    return Json(text);
  }
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot write " + path);
  f << content;
}

}  // namespace

const std::vector<ExperimentInfo>& experiments() {
  static const std::vector<ExperimentInfo> list = [] {
    std::vector<ExperimentInfo> out;
    for (const Entry& e : registry()) out.push_back(e.info);
    return out;
  }();
  return list;
}

RunReport run_experiment(const Json& config) {
  if (!config.is_object() || !config.contains("experiment") || !config["experiment"].is_string())
    throw InputError("config: missing experiment id");
  const std::string id = config["experiment"].get<std::string>();
  for (auto it = config.begin(); it != config.end(); ++it)
    if (it.key() != "experiment" && it.key() != "params" && it.key() != "outputs")
      throw InputError("config: unknown key '" + it.key() + "'");
  const auto& reg = registry();
  auto entry = std::find_if(reg.begin(), reg.end(), [&](const Entry& e) { return e.info.id == id; });
  if (entry == reg.end()) throw InputError("unknown experiment '" + id + "'");
  const Json params = config.contains("params") ? config["params"] : Json::object();
  RunReport rep = entry->run(Params(params, entry->params));
  rep.id = id;
  rep.anchor = entry->info.anchor;
  rep.config = config;
  return rep;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"ndlab experiment runner"};
  app.require_subcommand(1);
  std::string config_path;
  std::vector<std::string> sets;
  bool timing = false, as_json = false;
  std::string module;
  auto* run = app.add_subcommand("run", "run one experiment");
  run->add_option("--config", config_path, "JSON config file")->required();
  run->add_option("--set", sets, "parameter override key=value (value parsed as JSON when possible)");
  run->add_flag("--timing", timing, "record wall time in the report");
  auto* list = app.add_subcommand("list", "list experiments");
  list->add_flag("--json", as_json, "JSON array output");
  list->add_option("--module", module, "only experiments of this module");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }

  if (*list) {
    Json arr = Json::array();
    std::ostringstream text;
    for (const ExperimentInfo& e : experiments()) {
      if (!module.empty() && e.module != module) continue;
      arr.push_back({{"id", e.id}, {"module", e.module}, {"description", e.description}, {"anchor", e.anchor}});
      text << e.id << std::string(e.id.size() < 21 ? 21 - e.id.size() : 1, ' ') << e.module
           << std::string(e.module.size() < 9 ? 9 - e.module.size() : 1, ' ') << e.description << " [" << e.anchor << "]\n";
    }
    out << (as_json ? arr.dump(2) + "\n" : text.str());
    return 0;
  }

  try {
    std::ifstream f(config_path);
    if (!f) throw InputError("cannot read " + config_path);
    Json config;
    try {
      config = Json::parse(f);
    } catch (const nlohmann::json::exception& e) {
      throw InputError(std::string("config: ") + e.what());
    }
    for (const std::string& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos || eq == 0) throw InputError("--set expects key=value");
      const std::string key = s.substr(0, eq);
      const Json value = parse_value(s.substr(eq + 1));
      if (key == "experiment") {
        config["experiment"] = value;
      } else if (key.rfind("outputs.", 0) == 0) {
        config["outputs"][key.substr(8)] = value;
      } else {
        config["params"][key.rfind("params.", 0) == 0 ? key.substr(7) : key] = value;
      }
    }
    const auto t0 = std::chrono::steady_clock::now();
    RunReport rep = run_experiment(config);
    if (timing)
      rep.elapsed_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();

    const Json outputs = config.value("outputs", Json::object());
    if (outputs.contains("json")) write_file(outputs["json"].get<std::string>(), rep.to_json().dump(2) + "\n");
    if (outputs.contains("csv")) write_file(outputs["csv"].get<std::string>(), rep.table.to_csv());

    out << rep.id << " v" << kVersion << " -- " << rep.anchor << "\n";
    for (const Criterion& c : rep.criteria) {
      out << (c.pass ? "PASS " : "FAIL ") << c.name << " value=" << format_double(c.value)
          << " bound=" << format_double(c.bound) << " tol=" << format_double(c.tol);
      if (!c.note.empty()) out << " (" << c.note << ")";
      out << "\n";
    }
    if (rep.elapsed_ms) out << "elapsed_ms " << format_double(*rep.elapsed_ms) << "\n";
    if (!rep.pass()) {
      for (const std::string& name : rep.failing()) err << "criterion failed: " << name << "\n";
      return 1;
    }
    return 0;
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const PreconditionError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
}

}  // namespace ndlab::cli
