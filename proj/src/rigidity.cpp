#include "qstate/rigidity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

#include "qstate/kernels.hpp"

namespace qstate {

namespace {

using kernels::Point2;

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double mode_value(const TrigMode& m, double u, double v) {
  const double phase = kTwoPi * (m.k1 * u + m.k2 * v);
  return m.sine ? std::sin(phase) : std::cos(phase);
}

double sup_abs(std::span<const double> x) {
  double m = 0.0;
  for (double a : x) m = std::max(m, std::abs(a));
  return m;
}

// Smooth random function on a square chart of side `period`: sum over
// |k|_inf <= k_max of damped normal coefficients times cos/sin modes.
struct RandomTrig {
  std::vector<TrigMode> modes;
  std::vector<double> coef;
  double period = 1.0;

  RandomTrig(int k_max, double side, std::mt19937_64& rng) : modes(trig_basis(k_max)), period(side) {
    std::normal_distribution<double> normal(0.0, 1.0);
    for (const TrigMode& m : modes) coef.push_back(normal(rng) * std::exp(-(m.k1 * m.k1 + m.k2 * m.k2) / 4.0));
  }

  double operator()(double x, double y) const {
    double s = 0.0;
    for (std::size_t i = 0; i < modes.size(); ++i) s += coef[i] * mode_value(modes[i], x / period, y / period);
    return s;
  }
};

void check_torus_pair(const PerturbationProblem& p) {
  require_same_mesh(p.f, p.g, "upsilon_search");
  if (p.f.mesh()->topology() != Topology::torus) throw std::invalid_argument("upsilon_search needs a torus mesh");
  if (!(p.epsilon > 0.0) || !std::isfinite(p.epsilon)) throw std::invalid_argument("upsilon_search: epsilon must be > 0");
  if (p.k_max < 1 || p.k_max > 5) throw std::invalid_argument("upsilon_search: k_max must lie in [1, 5]");
  if (p.budget < 0) throw std::invalid_argument("upsilon_search: negative budget");
  if (!(p.epsilon < std::max(p.f.sup_norm(), p.g.sup_norm()))) {
    throw std::invalid_argument("upsilon_search: epsilon must be smaller than the fields' sup norm");
  }
}

constexpr int kRestartLength = 250;

// Current point of the search with its perturbation values and derivatives.
struct SearchState {
  std::vector<double> a, b;
  std::vector<double> pf, pg;
  std::vector<double> fu, fv, gu, gv;
  double value = 0.0;
};

}  // namespace

std::vector<TrigMode> trig_basis(int k_max) {
  if (k_max < 1) throw std::invalid_argument("trig_basis: k_max must be >= 1");
  std::vector<TrigMode> out;
  for (int k1 = 0; k1 <= k_max; ++k1) {
    for (int k2 = -k_max; k2 <= k_max; ++k2) {
      if (k1 == 0 && k2 <= 0) continue;
      out.push_back({k1, k2, false});
      out.push_back({k1, k2, true});
    }
  }
  return out;
}

ScalarField perturbation_field(const MeshPtr& mesh, int k_max, std::span<const double> coefficients) {
  const std::vector<TrigMode> modes = trig_basis(k_max);
  if (coefficients.size() != modes.size()) throw std::invalid_argument("perturbation_field: coefficient count");
  std::vector<double> values(mesh->vertex_count(), 0.0);
  for (VertexId v = 0; v < values.size(); ++v) {
    const auto& uv = mesh->params(v);
    for (std::size_t i = 0; i < modes.size(); ++i) {
      if (coefficients[i] != 0.0) values[v] += coefficients[i] * mode_value(modes[i], uv[0], uv[1]);
    }
  }
  return ScalarField(mesh, std::move(values));
}

nlohmann::ordered_json UpsilonEstimate::to_json() const {
  nlohmann::ordered_json j;
  j["epsilon"] = epsilon;
  j["base_norm"] = base_norm;
  j["best_norm"] = best_norm;
  j["ratio"] = base_norm > 0.0 ? best_norm / base_norm : 1.0;
  j["f_perturbation_sup"] = f_perturbation_sup;
  j["g_perturbation_sup"] = g_perturbation_sup;
  j["iterations"] = iterations_used;
  j["seed"] = seed;
  return j;
}

UpsilonEstimate upsilon_search(const PerturbationProblem& p, const UpsilonEstimate* warm) {
  check_torus_pair(p);
  const MeshPtr& mesh = p.f.mesh();
  const AreaForm form = area_form(mesh);
  const std::size_t n = mesh->vertex_count();
  const std::vector<TrigMode> modes = trig_basis(p.k_max);
  const std::size_t m = modes.size();
  const double rho = form.density.front();

  // Mode samples and their discrete chart derivatives.
  std::vector<std::vector<double>> phi(m), du(m), dv(m);
  for (std::size_t i = 0; i < m; ++i) {
    phi[i].resize(n);
    for (VertexId v = 0; v < n; ++v) phi[i][v] = mode_value(modes[i], mesh->params(v)[0], mesh->params(v)[1]);
    kernels::Gradient g = kernels::parallel::chart_gradient(*mesh, phi[i]);
    du[i] = std::move(g.du);
    dv[i] = std::move(g.dv);
  }
  const kernels::Gradient df = kernels::parallel::chart_gradient(*mesh, p.f.values());
  const kernels::Gradient dg = kernels::parallel::chart_gradient(*mesh, p.g.values());

  UpsilonEstimate est;
  est.epsilon = p.epsilon;
  est.seed = p.seed;
  est.base_norm = bracket_sup_norm(poisson_bracket(form, p.f, p.g));
  est.best_norm = est.base_norm;
  est.f_coefficients.assign(m, 0.0);
  est.g_coefficients.assign(m, 0.0);

  auto load = [&](SearchState& s, const std::vector<double>& a, const std::vector<double>& b) {
    s.a = a;
    s.b = b;
    s.pf.assign(n, 0.0);
    s.pg.assign(n, 0.0);
    s.fu = df.du;
    s.fv = df.dv;
    s.gu = dg.du;
    s.gv = dg.dv;
    for (std::size_t i = 0; i < m; ++i) {
      for (VertexId v = 0; v < n; ++v) {
        if (a[i] != 0.0) {
          s.pf[v] += a[i] * phi[i][v];
          s.fu[v] += a[i] * du[i][v];
          s.fv[v] += a[i] * dv[i][v];
        }
        if (b[i] != 0.0) {
          s.pg[v] += b[i] * phi[i][v];
          s.gu[v] += b[i] * du[i][v];
          s.gv[v] += b[i] * dv[i][v];
        }
      }
    }
    double worst = 0.0;
    for (VertexId v = 0; v < n; ++v) worst = std::max(worst, std::abs((s.fv[v] * s.gu[v] - s.fu[v] * s.gv[v]) / rho));
    s.value = worst;
    return sup_abs(s.pf) < p.epsilon && sup_abs(s.pg) < p.epsilon;
  };

  auto record = [&](const SearchState& s) {
    if (s.value < est.best_norm) {
      est.best_norm = s.value;
      est.f_coefficients = s.a;
      est.g_coefficients = s.b;
    }
  };

  SearchState cur;
  if (warm && warm->f_coefficients.size() == m && warm->g_coefficients.size() == m) {
    if (load(cur, warm->f_coefficients, warm->g_coefficients)) record(cur);
  }

  std::mt19937_64 rng(p.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> pick(0, 2 * m - 1);

  int used = 0;
  for (int restart = 0; used < p.budget; ++restart) {
    // Even restarts resume from the best point, odd ones from a random
    // feasible point.
    std::vector<double> a = est.f_coefficients;
    std::vector<double> b = est.g_coefficients;
    if (restart % 2 == 1) {
      for (std::size_t i = 0; i < m; ++i) {
        a[i] = normal(rng);
        b[i] = normal(rng);
      }
      const double fa = unit(rng) * 0.9 * p.epsilon / std::max(1e-300, sup_abs(perturbation_field(mesh, p.k_max, a).values()));
      const double fb = unit(rng) * 0.9 * p.epsilon / std::max(1e-300, sup_abs(perturbation_field(mesh, p.k_max, b).values()));
      for (std::size_t i = 0; i < m; ++i) {
        a[i] *= fa;
        b[i] *= fb;
      }
    }
    const bool feasible = load(cur, a, b);
    ++used;
    if (!feasible) continue;
    record(cur);

    double step = 0.5 * p.epsilon;
    std::size_t stale = 0;
    for (int k = 1; k < kRestartLength && used < p.budget; ++k) {
      const std::size_t coord = pick(rng);
      const double t = unit(rng) < 0.5 ? step : -step;
      const bool on_f = coord < m;
      const std::size_t i = on_f ? coord : coord - m;
      ++used;

      const std::vector<double>& pert = on_f ? cur.pf : cur.pg;
      bool ok = true;
      for (VertexId v = 0; v < n && ok; ++v) ok = std::abs(pert[v] + t * phi[i][v]) < p.epsilon;
      double worst = 0.0;
      if (ok) {
        for (VertexId v = 0; v < n; ++v) {
          double fu = cur.fu[v], fv = cur.fv[v], gu = cur.gu[v], gv = cur.gv[v];
          if (on_f) {
            fu += t * du[i][v];
            fv += t * dv[i][v];
          } else {
            gu += t * du[i][v];
            gv += t * dv[i][v];
          }
          worst = std::max(worst, std::abs((fv * gu - fu * gv) / rho));
          if (worst >= cur.value) break;
        }
      }
      if (ok && worst < cur.value) {
        std::vector<double>& pv = on_f ? cur.pf : cur.pg;
        std::vector<double>& xu = on_f ? cur.fu : cur.gu;
        std::vector<double>& xv = on_f ? cur.fv : cur.gv;
        for (VertexId v = 0; v < n; ++v) {
          pv[v] += t * phi[i][v];
          xu[v] += t * du[i][v];
          xv[v] += t * dv[i][v];
        }
        (on_f ? cur.a : cur.b)[i] += t;
        cur.value = worst;
        record(cur);
        stale = 0;
      } else if (++stale >= 2 * m) {
        step *= 0.5;
        stale = 0;
      }
    }
  }
  est.iterations_used = used;
  est.f_perturbation_sup = sup_abs(perturbation_field(mesh, p.k_max, est.f_coefficients).values());
  est.g_perturbation_sup = sup_abs(perturbation_field(mesh, p.k_max, est.g_coefficients).values());
  return est;
}

std::vector<UpsilonEstimate> upsilon_curve(const PerturbationProblem& p, std::span<const double> epsilons) {
  std::vector<std::size_t> order(epsilons.size());
  for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return epsilons[a] < epsilons[b]; });
  std::vector<UpsilonEstimate> out(epsilons.size());
  const UpsilonEstimate* previous = nullptr;
  for (std::size_t k : order) {
    PerturbationProblem q = p;
    q.epsilon = epsilons[k];
    out[k] = upsilon_search(q, previous);
    previous = &out[k];
  }
  return out;
}

nlohmann::ordered_json LemmaTrial::to_json() const {
  nlohmann::ordered_json j;
  j["covered"] = covered;
  j["cells_checked"] = cells_checked;
  j["cells_missed"] = cells_missed;
  j["displacement_sup"] = displacement_sup;
  return j;
}

nlohmann::ordered_json LemmaReport::to_json() const {
  nlohmann::ordered_json j;
  j["pass_fraction"] = pass_fraction;
  j["trials"] = nlohmann::ordered_json::array();
  for (const LemmaTrial& t : trials) j["trials"].push_back(t.to_json());
  return j;
}

namespace {

struct DiskGrid {
  std::vector<Point2> points;
  std::vector<MeshCell> cells;
};

DiskGrid polar_disk(double r, int n) {
  DiskGrid d;
  d.points.resize(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i) {
    const double rad = r * i / (n - 1);
    for (int j = 0; j < n; ++j) {
      const double th = kTwoPi * j / n;
      d.points[static_cast<std::size_t>(i) * n + j] = {rad * std::cos(th), rad * std::sin(th)};
    }
  }
  for (int i = 0; i + 1 < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const int jn = (j + 1) % n;
      MeshCell c;
      c.v = {static_cast<VertexId>(i * n + j), static_cast<VertexId>((i + 1) * n + j),
             static_cast<VertexId>((i + 1) * n + jn), static_cast<VertexId>(i * n + jn)};
      c.size = 4;
      d.cells.push_back(c);
    }
  }
  return d;
}

kernels::RasterGrid disk_raster(double r, int n) {
  kernels::RasterGrid g;
  g.x0 = -r;
  g.y0 = -r;
  g.dx = 2.0 * r / n;
  g.dy = g.dx;
  g.nx = n;
  g.ny = n;
  return g;
}

void check_lemma(const LemmaOptions& opt) {
  if (!(opt.r > 0.0)) throw std::invalid_argument("perturbed identity: r must be positive");
  if (!(opt.delta > 0.0 && opt.delta < opt.r)) throw std::invalid_argument("perturbed identity: delta must lie in (0, r)");
  if (opt.trials < 1) throw std::invalid_argument("perturbed identity: trials must be >= 1");
  if (opt.grid < kMinGrid || opt.grid > kMaxGrid) throw std::invalid_argument("perturbed identity: grid out of range");
}

}  // namespace

LemmaTrial perturbed_identity_trial(const LemmaOptions& opt, std::size_t trial) {
  check_lemma(opt);
  std::seed_seq seq{static_cast<std::uint32_t>(opt.seed), static_cast<std::uint32_t>(opt.seed >> 32),
                    static_cast<std::uint32_t>(trial), static_cast<std::uint32_t>(trial >> 32)};
  std::mt19937_64 rng(seq);
  DiskGrid disk = polar_disk(opt.r, opt.grid);
  const RandomTrig dx(opt.k_max, 4.0 * opt.r, rng);
  const RandomTrig dy(opt.k_max, 4.0 * opt.r, rng);

  std::vector<Point2> disp(disk.points.size());
  double sup = 0.0;
  for (std::size_t k = 0; k < disp.size(); ++k) {
    disp[k] = {dx(disk.points[k][0], disk.points[k][1]), dy(disk.points[k][0], disk.points[k][1])};
    sup = std::max(sup, std::hypot(disp[k][0], disp[k][1]));
  }
  const double scale = sup > 0.0 ? 0.999 * opt.delta / sup : 0.0;
  LemmaTrial t;
  for (std::size_t k = 0; k < disp.size(); ++k) {
    disk.points[k][0] += scale * disp[k][0];
    disk.points[k][1] += scale * disp[k][1];
    t.displacement_sup = std::max(t.displacement_sup, scale * std::hypot(disp[k][0], disp[k][1]));
  }

  const kernels::RasterGrid grid = disk_raster(opt.r, opt.grid);
  const std::vector<std::uint32_t> counts = kernels::parallel::count_hull_centers(disk.points, disk.cells, grid);
  const double inner = opt.r - opt.delta - 2.0 * std::hypot(grid.dx, grid.dy);
  for (int iy = 0; iy < grid.ny; ++iy) {
    for (int ix = 0; ix < grid.nx; ++ix) {
      const Point2 c = grid.center(ix, iy);
      if (std::hypot(c[0], c[1]) > inner) continue;
      ++t.cells_checked;
      if (counts[grid.index(ix, iy)] == 0) ++t.cells_missed;
    }
  }
  t.covered = t.cells_missed == 0;
  return t;
}

LemmaReport perturbed_identity_coverage(const LemmaOptions& opt) {
  check_lemma(opt);
  LemmaReport rep;
  rep.trials.resize(static_cast<std::size_t>(opt.trials));
  const std::int64_t n = opt.trials;
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t k = 0; k < n; ++k) rep.trials[k] = perturbed_identity_trial(opt, static_cast<std::size_t>(k));
  std::size_t pass = 0;
  for (const LemmaTrial& t : rep.trials) pass += t.covered;
  rep.pass_fraction = static_cast<double>(pass) / static_cast<double>(rep.trials.size());
  return rep;
}

RadialReport radial_contraction_coverage(double r, double delta, int grid_n) {
  if (!(r > 0.0 && delta > 0.0 && delta < r)) throw std::invalid_argument("radial contraction: need 0 < delta < r");
  DiskGrid disk = polar_disk(r, grid_n);
  const double s = 1.0 - delta / r;
  for (Point2& p : disk.points) {
    p[0] *= s;
    p[1] *= s;
  }
  const kernels::RasterGrid grid = disk_raster(r, grid_n);
  const std::vector<std::uint32_t> counts = kernels::parallel::count_hull_centers(disk.points, disk.cells, grid);
  const double diag = std::hypot(grid.dx, grid.dy);
  RadialReport rep{true, true};
  for (int iy = 0; iy < grid.ny; ++iy) {
    for (int ix = 0; ix < grid.nx; ++ix) {
      const Point2 c = grid.center(ix, iy);
      const double d = std::hypot(c[0], c[1]);
      const bool hit = counts[grid.index(ix, iy)] > 0;
      if (d <= r - delta - 2.0 * diag && !hit) rep.inner_covered = false;
      if (d > r - delta + diag && hit) rep.outer_empty = false;
    }
  }
  return rep;
}

nlohmann::ordered_json StabilityTrial::to_json() const {
  nlohmann::ordered_json j;
  j["max_bracket"] = max_bracket;
  j["f_distance"] = f_distance;
  j["g_distance"] = g_distance;
  j["passed"] = passed;
  return j;
}

nlohmann::ordered_json StabilityReport::to_json() const {
  nlohmann::ordered_json j;
  j["witness"] = witness;
  j["region_size"] = region_size;
  j["pass_fraction"] = pass_fraction;
  j["min_max_bracket"] = min_max_bracket;
  j["trials"] = nlohmann::ordered_json::array();
  for (const StabilityTrial& t : trials) j["trials"].push_back(t.to_json());
  return j;
}

VertexId stability_witness(const BracketField& base) {
  const SurfaceMesh& mesh = *base.values.mesh();
  double umin = std::numeric_limits<double>::infinity(), umax = -umin, vmin = umin, vmax = -umin;
  for (VertexId v = 0; v < mesh.vertex_count(); ++v) {
    umin = std::min(umin, mesh.params(v)[0]);
    umax = std::max(umax, mesh.params(v)[0]);
    vmin = std::min(vmin, mesh.params(v)[1]);
    vmax = std::max(vmax, mesh.params(v)[1]);
  }
  const double cu = 0.5 * (umin + umax);
  const double cv = 0.5 * (vmin + vmax);
  bool found = false;
  VertexId best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (VertexId v = 0; v < mesh.vertex_count(); ++v) {
    if (std::abs(base.values[v] - 1.0) > 1e-6) continue;
    const double d = std::hypot(mesh.params(v)[0] - cu, mesh.params(v)[1] - cv);
    if (d < best_d) {
      best_d = d;
      best = v;
      found = true;
    }
  }
  if (!found) throw std::invalid_argument("local_stability_probe: {F0,G0} does not attain 1 at any vertex");
  return best;
}

std::vector<VertexId> probe_region(const SurfaceMesh& mesh, VertexId witness, double radius) {
  std::vector<VertexId> out;
  const auto& w = mesh.params(witness);
  for (VertexId v = 0; v < mesh.vertex_count(); ++v) {
    if (std::hypot(mesh.params(v)[0] - w[0], mesh.params(v)[1] - w[1]) <= radius) out.push_back(v);
  }
  return out;
}

double probe_max_bracket(const AreaForm& form, const ScalarField& f, const ScalarField& g,
                         std::span<const VertexId> region) {
  const BracketField b = poisson_bracket(form, f, g);
  double m = -std::numeric_limits<double>::infinity();
  for (VertexId v : region) m = std::max(m, b.values[v]);
  return m;
}

StabilityReport local_stability_probe(const AreaForm& form, const ScalarField& f0, const ScalarField& g0,
                                      const StabilityOptions& opt) {
  require_same_mesh(f0, g0, "local_stability_probe");
  if (!(opt.epsilon > 0.0 && opt.epsilon < 1.0)) throw std::invalid_argument("local_stability_probe: epsilon in (0,1)");
  if (!(opt.delta >= 0.0)) throw std::invalid_argument("local_stability_probe: delta must be >= 0");
  if (opt.trials < 1) throw std::invalid_argument("local_stability_probe: trials must be >= 1");
  if (!(opt.probe_radius > 0.0)) throw std::invalid_argument("local_stability_probe: probe radius must be > 0");
  const MeshPtr& mesh = f0.mesh();
  StabilityReport rep;
  rep.witness = stability_witness(poisson_bracket(form, f0, g0));
  const std::vector<VertexId> region = probe_region(*mesh, rep.witness, opt.probe_radius);
  rep.region_size = region.size();
  const double side = std::max(mesh->spacing_u() * (mesh->n_u() - 1), mesh->spacing_v() * (mesh->n_v() - 1));

  rep.trials.resize(static_cast<std::size_t>(opt.trials));
  const std::int64_t n = opt.trials;
#pragma omp parallel for schedule(dynamic)
  for (std::int64_t k = 0; k < n; ++k) {
    std::seed_seq seq{static_cast<std::uint32_t>(opt.seed), static_cast<std::uint32_t>(opt.seed >> 32),
                      static_cast<std::uint32_t>(k)};
    std::mt19937_64 rng(seq);
    auto perturb = [&](const ScalarField& base) {
      const RandomTrig r(opt.k_max, 2.0 * side, rng);
      std::vector<double> p(mesh->vertex_count());
      for (VertexId v = 0; v < p.size(); ++v) p[v] = r(mesh->params(v)[0], mesh->params(v)[1]);
      const double sup = sup_abs(p);
      const double scale = sup > 0.0 ? 0.999 * opt.delta / sup : 0.0;
      for (VertexId v = 0; v < p.size(); ++v) p[v] = base[v] + scale * p[v];
      return ScalarField(mesh, std::move(p));
    };
    const ScalarField f = perturb(f0);
    const ScalarField g = perturb(g0);
    StabilityTrial t;
    t.f_distance = c0_distance(f, f0);
    t.g_distance = c0_distance(g, g0);
    t.max_bracket = probe_max_bracket(form, f, g, region);
    t.passed = t.max_bracket > 1.0 - opt.epsilon;
    rep.trials[k] = t;
  }
  std::size_t pass = 0;
  rep.min_max_bracket = std::numeric_limits<double>::infinity();
  for (const StabilityTrial& t : rep.trials) {
    pass += t.passed;
    rep.min_max_bracket = std::min(rep.min_max_bracket, t.max_bracket);
  }
  rep.pass_fraction = static_cast<double>(pass) / static_cast<double>(rep.trials.size());
  return rep;
}

}  // namespace qstate
