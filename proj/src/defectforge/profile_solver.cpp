#include "defectforge/profile_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "defectforge/banded.hpp"
#include "defectforge/bulk_potential.hpp"
#include "defectforge/common.hpp"

namespace defectforge {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Cells are indexed 0..N-1: cell 0 spans (0, r[0]) with u interpolated from
// u(0) = 0 and v constant (so v'(0) = 0 is the natural condition); cell i
// spans (r[i-1], r[i]).
struct Geometry {
  std::vector<double> r_mid, len;
};

Geometry make_geometry(const RadialGrid& g) {
  Geometry geo;
  const int n = g.n();
  geo.r_mid.resize(n);
  geo.len.resize(n);
  double prev = 0.0;
  for (int i = 0; i < n; ++i) {
    geo.len[i] = g.r[i] - prev;
    geo.r_mid[i] = 0.5 * (g.r[i] + prev);
    prev = g.r[i];
  }
  return geo;
}

struct CellState {
  BinghamCoeffs b;
  MomentSet m;
  bool feasible = true;
};

// Midpoint field values on cell i.
inline void cell_values(int i, const std::vector<double>& u, const std::vector<double>& v,
                        const Geometry& geo, double& um, double& vm, double& du, double& dv) {
  if (i == 0) {
    um = 0.5 * u[0];
    vm = v[0];
    du = u[0] / geo.len[0];
    dv = 0.0;
  } else {
    um = 0.5 * (u[i - 1] + u[i]);
    vm = 0.5 * (v[i - 1] + v[i]);
    du = (u[i] - u[i - 1]) / geo.len[i];
    dv = (v[i] - v[i - 1]) / geo.len[i];
  }
}

// Clamp a node into {v <= 0} intersected with the physical eigenvalue region
// at the given margin (the region is convex, so cyclic clamping converges).
void clamp_node(double& u, double& v, double margin) {
  const double lo = -1.0 / 3.0 + margin, hi = 2.0 / 3.0 - margin;
  for (int round = 0; round < 3; ++round) {
    v = std::min(v, 0.0);
    v = std::clamp(v, 0.5 * lo, 0.5 * hi);
    u = std::clamp(u, v + lo, v + hi);
    u = std::clamp(u, -v - hi, -v - lo);
  }
}

// PSD projection of a symmetric 2x2 [[axx, axy], [axy, ayy]].
void psd_clamp(double& axx, double& axy, double& ayy) {
  const double mean = 0.5 * (axx + ayy);
  const double rad = std::sqrt(0.25 * (axx - ayy) * (axx - ayy) + axy * axy);
  double l1 = mean - rad, l2 = mean + rad;
  if (l1 >= 0.0) return;
  // Eigenvector for l2.
  double ex, ey;
  if (rad < 1e-300) {
    ex = 1.0;
    ey = 0.0;
  } else if (std::abs(axy) > 1e-300) {
    ex = l2 - ayy;
    ey = axy;
  } else if (axx >= ayy) {
    ex = 1.0;
    ey = 0.0;
  } else {
    ex = 0.0;
    ey = 1.0;
  }
  const double nn = std::sqrt(ex * ex + ey * ey);
  ex /= nn;
  ey /= nn;
  l1 = 0.0;
  l2 = std::max(l2, 0.0);
  axx = l2 * ex * ex + l1 * ey * ey;
  axy = (l2 - l1) * ex * ey;
  ayy = l2 * ey * ey + l1 * ex * ex;
}

class EnergyModel {
 public:
  EnergyModel(const RadialGrid& grid, double alpha, int k, const QuadratureSpec& quad,
              double margin)
      : grid_(grid), geo_(make_geometry(grid)), alpha_(alpha), k2_(double(k) * k), quad_(quad),
        margin_(margin) {}

  const Geometry& geo() const { return geo_; }

  void set_bulk_floor(double phi_bulk) { phi_bulk_ = phi_bulk; }
  double bulk_floor() const { return phi_bulk_; }

  // Refresh the per-cell closure states for nodal fields (u, v); returns the
  // shifted energy (+inf if any cell left the feasible set).
  double energy(const std::vector<double>& u, const std::vector<double>& v,
                std::vector<CellState>& cells) const {
    const int n = grid_.n();
    bool all_ok = true;
    parallel_for(n, [&](std::size_t b, std::size_t e) {
      for (std::size_t i = b; i < e; ++i) {
        double um, vm, du, dv;
        cell_values(static_cast<int>(i), u, v, geo_, um, vm, du, dv);
        CellState& cs = cells[i];
        if (!cs.feasible) {  // re-seed a previously failed cell
          cs.b = {7.5 * um, 7.5 * vm};
          cs.m = moments_any(cs.b, quad_);
        }
        cs.feasible = refine_closure(cs.b, cs.m, {um, vm}, quad_, 1e-12, 40);
        if (!cs.feasible) all_ok = false;
      }
    });
    if (!all_ok) return kInf;
    Kahan acc;
    for (int i = 0; i < n; ++i) {
      double um, vm, du, dv;
      cell_values(i, u, v, geo_, um, vm, du, dv);
      acc.add(geo_.len[i] * geo_.r_mid[i] * cell_density(i, um, vm, du, dv, cells[i]));
    }
    return acc.value();
  }

  // Gradient with respect to the free nodes (0..n-2); cells must be fresh.
  void gradient(const std::vector<double>& u, const std::vector<double>& v,
                const std::vector<CellState>& cells, std::vector<double>& gu,
                std::vector<double>& gv) const {
    const int n = grid_.n();
    gu.assign(n, 0.0);
    gv.assign(n, 0.0);
    for (int i = 0; i < n; ++i) {
      double um, vm, du, dv;
      cell_values(i, u, v, geo_, um, vm, du, dv);
      const double w = geo_.len[i] * geo_.r_mid[i];
      const double fu_term = 2.0 * (cells[i].b.f - alpha_ * um) + 2.0 * k2_ * um /
                                 (geo_.r_mid[i] * geo_.r_mid[i]);
      const double fv_term = 6.0 * (cells[i].b.g - alpha_ * vm);
      if (i == 0) {
        gu[0] += w * (2.0 * du / geo_.len[0] + 0.5 * fu_term);
        gv[0] += w * fv_term;  // v enters cell 0 with weight 1
      } else {
        gu[i - 1] += w * (-2.0 * du / geo_.len[i] + 0.5 * fu_term);
        gu[i] += w * (2.0 * du / geo_.len[i] + 0.5 * fu_term);
        gv[i - 1] += w * (-6.0 * dv / geo_.len[i] + 0.5 * fv_term);
        gv[i] += w * (6.0 * dv / geo_.len[i] + 0.5 * fv_term);
      }
    }
    gu[n - 1] = gv[n - 1] = 0.0;  // Dirichlet node
  }

  // Modified Hessian: exact stiffness plus PSD-clamped per-cell bulk blocks,
  // plus `ridge` times the lumped mass.  SPD by construction.
  void hessian(const std::vector<double>& /*u*/, const std::vector<double>& /*v*/,
               const std::vector<CellState>& cells, double ridge, BandedSym& out) const {
    const int n = grid_.n();
    const int nf = n - 1;  // free nodes
    out = BandedSym(2 * nf, 3);
    for (int i = 0; i < n; ++i) {
      const double w = geo_.len[i] * geo_.r_mid[i];
      // Bulk block at the midpoint.
      const MomentSet& m = cells[i].m;
      const double delta = m.d * m.e - m.c * m.c;
      double huu = 2.0 * (m.d / delta - alpha_);
      double huv = -2.0 * std::numbers::sqrt3 * m.c / delta;
      double hvv = 6.0 * (m.e / delta - alpha_);
      psd_clamp(huu, huv, hvv);
      huu += 2.0 * k2_ / (geo_.r_mid[i] * geo_.r_mid[i]);  // curvature of k^2 u^2/r^2
      const int l = i - 1, r = i;  // node indices (l = -1 means the origin)
      const double wl_u = 0.5, wr_u = 0.5;
      const double wl_v = (i == 0) ? 0.0 : 0.5;
      const double wr_v = (i == 0) ? 1.0 : 0.5;
      auto add = [&](int node_a, int ca, double wa, int node_b, int cb, double wb, double val) {
        if (node_a < 0 || node_b < 0 || node_a >= nf || node_b >= nf) return;
        int ia = 2 * node_a + ca, ib = 2 * node_b + cb;
        if (ia <= ib)
          out.add(ia, ib, wa * wb * val);
        else
          out.add(ib, ia, wa * wb * val);
      };
      // Stiffness of the derivative terms.
      const double su = 2.0 / geo_.len[i] * geo_.r_mid[i];
      const double sv = 6.0 / geo_.len[i] * geo_.r_mid[i];
      if (i == 0) {
        add(r, 0, 1.0, r, 0, 1.0, su);
      } else {
        add(l, 0, 1.0, l, 0, 1.0, su);
        add(r, 0, 1.0, r, 0, 1.0, su);
        add(l, 0, 1.0, r, 0, 1.0, -su);
        add(l, 1, 1.0, l, 1, 1.0, sv);
        add(r, 1, 1.0, r, 1, 1.0, sv);
        add(l, 1, 1.0, r, 1, 1.0, -sv);
      }
      // Midpoint bulk + k^2 blocks scattered through the interpolation weights.
      for (auto [na, wa] : {std::pair{l, wl_u}, std::pair{r, wr_u}})
        for (auto [nb, wb] : {std::pair{l, wl_u}, std::pair{r, wr_u}}) {
          if (na > nb || (na == nb && false)) continue;
          if (na == nb)
            add(na, 0, wa, nb, 0, wb, w * huu);
          else
            add(na, 0, wa, nb, 0, wb, w * huu);
        }
      for (auto [na, wa] : {std::pair{l, wl_u}, std::pair{r, wr_u}})
        for (auto [nb, wb] : {std::pair{l, wl_v}, std::pair{r, wr_v}})
          add(na, 0, wa, nb, 1, wb, w * huv);
      for (auto [na, wa] : {std::pair{l, wl_v}, std::pair{r, wr_v}})
        for (auto [nb, wb] : {std::pair{l, wl_v}, std::pair{r, wr_v}}) {
          if (na > nb) continue;
          add(na, 1, wa, nb, 1, wb, w * hvv);
        }
    }
    // Lumped-mass ridge.
    if (ridge > 0.0) {
      std::vector<double> lump(2 * nf, 0.0);
      for (int i = 0; i < n; ++i) {
        const double w = geo_.len[i] * geo_.r_mid[i];
        if (i == 0) {
          lump[0] += 0.5 * w;
          lump[1] += w;
        } else {
          if (i - 1 < nf) {
            lump[2 * (i - 1)] += 0.5 * w;
            lump[2 * (i - 1) + 1] += 0.5 * w;
          }
          if (i < nf) {
            lump[2 * i] += 0.5 * w;
            lump[2 * i + 1] += 0.5 * w;
          }
        }
      }
      for (int d = 0; d < 2 * nf; ++d) out.add(d, d, ridge * lump[d]);
    }
  }

  double cell_density(int i, double um, double vm, double du, double dv,
                      const CellState& cs) const {
    const double phi = 2.0 * cs.b.f * um + 6.0 * cs.b.g * vm - cs.m.log_z -
                       alpha_ * (um * um + 3.0 * vm * vm);
    return du * du + 3.0 * dv * dv + k2_ * um * um / (geo_.r_mid[i] * geo_.r_mid[i]) + phi -
           phi_bulk_;
  }

  void lumped_mass(std::vector<double>& lu, std::vector<double>& lv) const {
    const int n = grid_.n();
    lu.assign(n, 0.0);
    lv.assign(n, 0.0);
    for (int i = 0; i < n; ++i) {
      const double w = geo_.len[i] * geo_.r_mid[i];
      if (i == 0) {
        lu[0] += 0.5 * w;
        lv[0] += w;
      } else {
        lu[i - 1] += 0.5 * w;
        lu[i] += 0.5 * w;
        lv[i - 1] += 0.5 * w;
        lv[i] += 0.5 * w;
      }
    }
  }

  double margin() const { return margin_; }
  double alpha() const { return alpha_; }
  const QuadratureSpec& quad() const { return quad_; }

 private:
  const RadialGrid& grid_;
  Geometry geo_;
  double alpha_;
  double k2_;
  QuadratureSpec quad_;
  double margin_;
  double phi_bulk_ = 0.0;
};

std::vector<CellState> make_cells(const EnergyModel& model, const RadialGrid& grid,
                                  const std::vector<double>& u, const std::vector<double>& v) {
  std::vector<CellState> cells(grid.n());
  const Geometry& geo = model.geo();
  for (int i = 0; i < grid.n(); ++i) {
    double um, vm, du, dv;
    cell_values(i, u, v, geo, um, vm, du, dv);
    cells[i].b = {7.5 * um, 7.5 * vm};
    cells[i].m = moments_any(cells[i].b, model.quad());
    cells[i].feasible = true;
  }
  return cells;
}

struct DescentResult {
  std::vector<double> u, v;
  std::vector<CellState> cells;
  std::vector<double> energy_history;
  int iterations = 0;
  double grad_norm = 0.0;
  bool converged = false;
};

DescentResult minimize(const EnergyModel& model, const RadialGrid& grid,
                       std::vector<double> u, std::vector<double> v,
                       const ProfileSolveOptions& opt) {
  const int n = grid.n();
  const int nf = n - 1;
  for (int i = 0; i < nf; ++i) clamp_node(u[i], v[i], model.margin());

  DescentResult res;
  std::vector<CellState> cells = make_cells(model, grid, u, v);
  double E = model.energy(u, v, cells);
  if (!std::isfinite(E))
    throw Error(ErrorCode::NoConvergence, "solve: infeasible initial profile");
  res.energy_history.push_back(E);

  std::vector<double> gu, gv, lu, lv;
  model.lumped_mass(lu, lv);
  double ridge = 0.0;
  BandedSym hess;
  BandedLDLT ldlt;
  std::vector<double> rhs(2 * nf), u_t(u), v_t(v);
  std::vector<CellState> cells_t(cells);

  int it = 0;
  for (; it < opt.max_iter; ++it) {
    model.gradient(u, v, cells, gu, gv);
    // Scaled projected gradient (KKT measure for the v <= 0 face).
    double pg = 0.0;
    for (int i = 0; i < nf; ++i) {
      pg = std::max(pg, std::abs(gu[i]) / lu[i]);
      double gvi = gv[i];
      if (v[i] >= 0.0) gvi = std::max(gvi, 0.0);
      pg = std::max(pg, std::abs(gvi) / lv[i]);
    }
    res.grad_norm = pg;
    if (pg < opt.tol) {
      res.converged = true;
      break;
    }

    model.hessian(u, v, cells, ridge, hess);
    LDLTResult fr = ldlt.factor(hess);
    if (fr.negative_pivots > 0 || !fr.ok) {
      ridge = std::max(ridge * 10.0, 1e-8);
      continue;
    }
    for (int i = 0; i < nf; ++i) {
      rhs[2 * i] = -gu[i];
      rhs[2 * i + 1] = -gv[i];
    }
    ldlt.solve(rhs);
    double pred = 0.0;  // g . delta
    for (int i = 0; i < nf; ++i) pred += gu[i] * rhs[2 * i] + gv[i] * rhs[2 * i + 1];

    bool accepted = false;
    double t = 1.0;
    for (int ls = 0; ls < 30; ++ls, t *= 0.5) {
      for (int i = 0; i < nf; ++i) {
        u_t[i] = u[i] + t * rhs[2 * i];
        v_t[i] = v[i] + t * rhs[2 * i + 1];
        clamp_node(u_t[i], v_t[i], model.margin());
      }
      cells_t = cells;
      double E_t = model.energy(u_t, v_t, cells_t);
      if (E_t <= E + 1e-4 * t * pred || (E_t < E && t < 1e-6)) {
        u.swap(u_t);
        v.swap(v_t);
        cells.swap(cells_t);
        E = E_t;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      ridge = std::max(ridge * 10.0, 1e-8);
      if (ridge > 1e8)
        throw Error(ErrorCode::NoConvergence, "solve: line search stalled");
      continue;
    }
    ridge *= 0.25;
    if (ridge < 1e-14) ridge = 0.0;
    res.energy_history.push_back(E);
  }
  if (!res.converged && it >= opt.max_iter)
    throw Error(ErrorCode::NoConvergence,
                "solve: projected gradient " + std::to_string(res.grad_norm) +
                    " above tolerance after max iterations");
  res.u = std::move(u);
  res.v = std::move(v);
  res.cells = std::move(cells);
  res.iterations = it;
  return res;
}

std::vector<double> initial_u(const RadialGrid& g, double s2v, int k) {
  std::vector<double> u(g.n());
  const double ak = std::abs(static_cast<double>(k));
  for (int i = 0; i < g.n(); ++i) {
    const double rk = std::pow(g.r[i], ak);
    u[i] = 0.5 * s2v * rk / (rk + 1.0);
  }
  return u;
}

std::vector<double> initial_v(const RadialGrid& g, double s2v) {
  std::vector<double> v(g.n());
  for (int i = 0; i < g.n(); ++i) {
    const double r2 = g.r[i] * g.r[i];
    v[i] = -s2v / 6.0 * r2 / (r2 + 1.0);
  }
  return v;
}

}  // namespace

CellCoeffs build_cell_coeffs(const RadialGrid& grid, const std::vector<double>& u,
                             const std::vector<double>& v, const QuadratureSpec& quad,
                             const std::vector<double>* warm_f,
                             const std::vector<double>* warm_g) {
  const int n = grid.n();
  Geometry geo = make_geometry(grid);
  CellCoeffs cc;
  cc.r_mid = geo.r_mid;
  cc.len = geo.len;
  auto resize = [&](std::vector<double>& x) { x.assign(n, 0.0); };
  resize(cc.u_mid);
  resize(cc.v_mid);
  resize(cc.du);
  resize(cc.dv);
  resize(cc.f);
  resize(cc.g);
  resize(cc.log_z);
  resize(cc.a);
  resize(cc.b);
  resize(cc.c);
  resize(cc.d);
  resize(cc.e);
  resize(cc.h);
  resize(cc.delta);
  parallel_for(n, [&](std::size_t bgn, std::size_t end) {
    for (std::size_t i = bgn; i < end; ++i) {
      double um, vm, du, dv;
      cell_values(static_cast<int>(i), u, v, geo, um, vm, du, dv);
      cc.u_mid[i] = um;
      cc.v_mid[i] = vm;
      cc.du[i] = du;
      cc.dv[i] = dv;
      BinghamCoeffs b{7.5 * um, 7.5 * vm};
      if (warm_f && warm_g) b = {(*warm_f)[std::min<std::size_t>(i, warm_f->size() - 1)],
                                 (*warm_g)[std::min<std::size_t>(i, warm_g->size() - 1)]};
      MomentSet m = moments_any(b, quad);
      if (!refine_closure(b, m, {um, vm}, quad, 1e-12, 60)) {
        b = {7.5 * um, 7.5 * vm};
        m = moments_any(b, quad);
        if (!refine_closure(b, m, {um, vm}, quad, 1e-12, 60))
          throw Error(ErrorCode::NoConvergence, "cell closure failed");
      }
      cc.f[i] = b.f;
      cc.g[i] = b.g;
      cc.log_z[i] = m.log_z;
      cc.a[i] = m.a;
      cc.b[i] = m.b;
      cc.c[i] = m.c;
      cc.d[i] = m.d;
      cc.e[i] = m.e;
      cc.h[i] = m.h;
      cc.delta[i] = m.d * m.e - m.c * m.c;
    }
  });
  return cc;
}

ProfileSolution solve_profile(double alpha, int k, const RadialGrid& grid,
                              const ProfileSolveOptions& opt) {
  if (!(alpha > 7.5))
    throw Error(ErrorCode::UsageError, "solve: alpha must exceed 7.5");
  if (k == 0) throw Error(ErrorCode::UsageError, "solve: k must be nonzero");

  CriticalPointSet cps = critical_points(alpha);
  if (!cps.has_eta1) throw Error(ErrorCode::NoConvergence, "solve: no uniaxial minimizer");
  const double s2v = cps.s2_eta1;

  EnergyModel model(grid, alpha, k, opt.quad, opt.margin);
  // Bulk floor through the same closure path so the boundary cells sit at ~0.
  {
    OrderParams pb{0.5 * s2v, -s2v / 6.0};
    InvertOptions io;
    io.quad = opt.quad;
    BinghamCoeffs bb = invert(pb, io);
    MomentSet mb = moments_any(bb, opt.quad);
    model.set_bulk_floor(2.0 * bb.f * pb.u + 6.0 * bb.g * pb.v - mb.log_z -
                         alpha * (pb.u * pb.u + 3.0 * pb.v * pb.v));
  }

  std::vector<double> u0 = initial_u(grid, s2v, k);
  std::vector<double> v0 = initial_v(grid, s2v);
  u0.back() = 0.5 * s2v;
  v0.back() = -s2v / 6.0;

  DescentResult best = minimize(model, grid, u0, v0, opt);

  std::optional<double> spread;
  if (opt.extra_seeds > 0) {
    std::mt19937_64 rng(opt.seed + 1);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    double e_ref = best.energy_history.back();
    double max_dev = 0.0;
    for (int s = 0; s < opt.extra_seeds; ++s) {
      std::vector<double> up = u0, vp = v0;
      for (int i = 0; i + 1 < grid.n(); ++i) {
        const double bump = 0.05 * std::sin(3.0 * grid.r[i] / grid.domain_end() + unif(rng));
        up[i] *= 1.0 + 0.05 * unif(rng) + bump * 0.02;
        vp[i] *= 1.0 + 0.05 * unif(rng);
      }
      DescentResult alt = minimize(model, grid, up, vp, opt);
      max_dev = std::max(max_dev, std::abs(alt.energy_history.back() - e_ref));
    }
    spread = max_dev;
  }

  ProfileSolution sol;
  sol.profile.grid = grid;
  sol.profile.u = best.u;
  sol.profile.v = best.v;
  sol.profile.alpha = alpha;
  sol.profile.k = k;
  sol.profile.s2_value = s2v;
  sol.profile.eta1 = cps.eta1;

  // Nodal closure cache.
  const int n = grid.n();
  sol.profile.f.assign(n, 0.0);
  sol.profile.g.assign(n, 0.0);
  parallel_for(n, [&](std::size_t bgn, std::size_t end) {
    for (std::size_t i = bgn; i < end; ++i) {
      BinghamCoeffs b = best.cells[i].b;  // warm start from the adjacent cell
      MomentSet m = moments_any(b, opt.quad);
      if (!refine_closure(b, m, {sol.profile.u[i], sol.profile.v[i]}, opt.quad, 1e-12, 60))
        throw Error(ErrorCode::NoConvergence, "nodal closure failed");
      sol.profile.f[i] = b.f;
      sol.profile.g[i] = b.g;
    }
  });

  sol.diag.iterations = best.iterations;
  sol.diag.grad_norm = best.grad_norm;
  sol.diag.energy_history = best.energy_history;
  sol.diag.energy = best.energy_history.back() +
                    model.bulk_floor() * 0.5 * grid.domain_end() * grid.domain_end();
  sol.diag.energy_monotone = std::is_sorted(best.energy_history.rbegin(),
                                            best.energy_history.rend());
  sol.diag.seed_energy_spread = spread;
  sol.diag.invariants = check_profile_invariants(sol.profile);
  sol.diag.residual_weighted_max = ode_residual(sol.profile).weighted_max;

  if (opt.throw_on_invariant) {
    for (const auto& c : sol.diag.invariants)
      if (!c.pass)
        throw Error(ErrorCode::InvariantViolation,
                    "solve: invariant '" + c.name + "' fails near r = " +
                        std::to_string(c.where_r) +
                        " (grid too coarse or alpha too close to 7.5)");
  }
  return sol;
}

double reduced_energy(const RadialProfile& p, const QuadratureSpec& quad) {
  CellCoeffs cc = build_cell_coeffs(p.grid, p.u, p.v, quad, &p.f, &p.g);
  const double k2 = double(p.k) * p.k;
  Kahan acc;
  for (int i = 0; i < p.grid.n(); ++i) {
    const double phi = 2.0 * cc.f[i] * cc.u_mid[i] + 6.0 * cc.g[i] * cc.v_mid[i] - cc.log_z[i] -
                       p.alpha * (cc.u_mid[i] * cc.u_mid[i] + 3.0 * cc.v_mid[i] * cc.v_mid[i]);
    acc.add(cc.len[i] * cc.r_mid[i] *
            (cc.du[i] * cc.du[i] + 3.0 * cc.dv[i] * cc.dv[i] +
             k2 * cc.u_mid[i] * cc.u_mid[i] / (cc.r_mid[i] * cc.r_mid[i]) + phi));
  }
  return acc.value();
}

OdeResidual ode_residual(const RadialProfile& p) {
  const int n = p.n();
  OdeResidual out;
  out.res_u.assign(n, 0.0);
  out.res_v.assign(n, 0.0);
  std::vector<double> du, d2u, dv, d2v;
  derivatives_3pt(p.grid.r, p.u, du, d2u);
  derivatives_3pt(p.grid.r, p.v, dv, d2v);
  const double k2 = double(p.k) * p.k;
  for (int i = 1; i + 1 < n; ++i) {
    const double r = p.grid.r[i];
    out.res_u[i] = d2u[i] + du[i] / r - k2 * p.u[i] / (r * r) - (p.f[i] - p.alpha * p.u[i]);
    out.res_v[i] = d2v[i] + dv[i] / r - (p.g[i] - p.alpha * p.v[i]);
    const double w = r / (1.0 + r);
    out.weighted_max = std::max(out.weighted_max,
                                w * std::max(std::abs(out.res_u[i]), std::abs(out.res_v[i])));
  }
  return out;
}

ThirdDerivativeReport third_derivative_check(const RadialProfile& p) {
  const int n = p.n();
  std::vector<double> du, d2u, dv, d2v, d3u, d3v;
  derivatives_3pt(p.grid.r, p.u, du, d2u);
  derivatives_3pt(p.grid.r, p.v, dv, d2v);
  third_derivative_5pt(p.grid.r, p.u, d3u);
  third_derivative_5pt(p.grid.r, p.v, d3v);
  const double k2 = double(p.k) * p.k;

  ThirdDerivativeReport rep;
  const int lo = std::max(2, n / 20), hi = n - std::max(2, n / 20);
  double scale_u = 1.0, scale_v = 1.0;
  std::vector<double> lhs_u(n, 0.0), rhs_u(n, 0.0), lhs_v(n, 0.0), rhs_v(n, 0.0);
  for (int i = lo; i < hi; ++i) {
    const double r = p.grid.r[i];
    MomentSet m = moments_theta_reduced({p.f[i], p.g[i]});
    ClosureJacobian j = jacobian_from_moments(m);
    lhs_u[i] = d3u[i] + d2u[i] / r - (1.0 + k2) * du[i] / (r * r) +
               2.0 * k2 * p.u[i] / (r * r * r);
    rhs_u[i] = (j.f_u - p.alpha) * du[i] + j.f_v * dv[i];
    lhs_v[i] = d3v[i] + d2v[i] / r - dv[i] / (r * r);
    rhs_v[i] = j.g_u * du[i] + (j.g_v - p.alpha) * dv[i];
    scale_u = std::max(scale_u, std::abs(rhs_u[i]));
    scale_v = std::max(scale_v, std::abs(rhs_v[i]));
  }
  for (int i = lo; i < hi; ++i) {
    const double w = p.grid.r[i] / (1.0 + p.grid.r[i]);
    rep.weighted_max_u = std::max(rep.weighted_max_u,
                                  w * std::abs(lhs_u[i] - rhs_u[i]) / scale_u);
    rep.weighted_max_v = std::max(rep.weighted_max_v,
                                  w * std::abs(lhs_v[i] - rhs_v[i]) / scale_v);
  }
  rep.pass = rep.weighted_max_u < 1e-2 && rep.weighted_max_v < 1e-2;
  return rep;
}

std::vector<InvariantCheck> check_profile_invariants(const RadialProfile& p) {
  const int n = p.n();
  std::vector<InvariantCheck> out;
  auto push = [&](const std::string& name, bool pass, double worst, double where) {
    out.push_back({name, pass, worst, where});
  };

  double worst, where;

  worst = 1e300;
  where = 0.0;
  for (int i = 0; i + 1 < n; ++i)
    if (p.u[i] < worst) {
      worst = p.u[i];
      where = p.grid.r[i];
    }
  push("u_positive", worst > 0.0, worst, where);

  worst = -1e300;
  for (int i = 0; i + 1 < n; ++i)
    if (p.v[i] > worst) {
      worst = p.v[i];
      where = p.grid.r[i];
    }
  push("v_negative", worst < 0.0, worst, where);

  worst = -1e300;
  for (int i = 0; i + 1 < n; ++i) {
    const double s = 3.0 * p.v[i] + p.u[i];
    if (s > worst) {
      worst = s;
      where = p.grid.r[i];
    }
  }
  push("cone_3v_plus_u_negative", worst < 0.0, worst, where);

  worst = 1e300;
  for (int i = 0; i + 1 < n; ++i) {
    const double d = p.u[i + 1] - p.u[i];
    if (d < worst) {
      worst = d;
      where = p.grid.r[i];
    }
  }
  push("u_strictly_increasing", worst > 0.0, worst, where);

  worst = -1e300;
  for (int i = 0; i + 1 < n; ++i) {
    const double d = p.v[i + 1] - p.v[i];
    if (d > worst) {
      worst = d;
      where = p.grid.r[i];
    }
  }
  push("v_strictly_decreasing", worst < 0.0, worst, where);

  bool phys = true;
  where = 0.0;
  for (int i = 0; i < n; ++i)
    if (!in_physical_region({p.u[i], p.v[i]}, 0.0)) {
      phys = false;
      where = p.grid.r[i];
      break;
    }
  push("physical_region", phys, phys ? 1.0 : 0.0, where);

  const double bu = std::abs(p.u[n - 1] - 0.5 * p.s2_value);
  const double bv = std::abs(p.v[n - 1] + p.s2_value / 6.0);
  push("boundary_values_exact", bu == 0.0 && bv == 0.0, bu + bv, p.grid.r[n - 1]);

  // u / r^{|k|} bounded near the origin (smoothness order of the core).
  {
    const double ak = std::abs(static_cast<double>(p.k));
    double lo_ratio = 1e300, hi_ratio = 0.0;
    for (int i = 0; i < n / 10 + 2 && i < n; ++i) {
      if (p.u[i] <= 1e-12) continue;
      const double ratio = p.u[i] / std::pow(p.grid.r[i], ak);
      lo_ratio = std::min(lo_ratio, ratio);
      hi_ratio = std::max(hi_ratio, ratio);
    }
    const bool ok = hi_ratio > 0.0 && hi_ratio / std::max(lo_ratio, 1e-300) < 1e3;
    push("u_over_r_pow_k_bounded", ok, hi_ratio / std::max(lo_ratio, 1e-300), p.grid.r[0]);
  }

  // w = v/u + 1/3 < 0 on the interior.
  worst = -1e300;
  for (int i = 0; i + 1 < n; ++i) {
    if (p.u[i] <= 0.0) continue;
    const double wv = p.v[i] / p.u[i] + 1.0 / 3.0;
    if (wv > worst) {
      worst = wv;
      where = p.grid.r[i];
    }
  }
  push("w_ratio_negative", worst < 0.0, worst, where);

  // p = u u' >= 0 and q = c v' / (u (de - c^2)) >= 0 on the trimmed interior.
  {
    std::vector<double> du, d2u, dv, d2v;
    derivatives_3pt(p.grid.r, p.u, du, d2u);
    derivatives_3pt(p.grid.r, p.v, dv, d2v);
    const int lo_i = std::max(1, n / 50), hi_i = n - std::max(1, n / 50);
    double worst_p = 1e300, where_p = 0.0, worst_q = 1e300, where_q = 0.0;
    for (int i = lo_i; i < hi_i; ++i) {
      const double pv = p.u[i] * du[i];
      if (pv < worst_p) {
        worst_p = pv;
        where_p = p.grid.r[i];
      }
      MomentSet m = moments_theta_reduced({p.f[i], p.g[i]});
      const double delta = m.d * m.e - m.c * m.c;
      const double qv = m.c * dv[i] / (p.u[i] * delta);
      if (qv < worst_q) {
        worst_q = qv;
        where_q = p.grid.r[i];
      }
    }
    push("p_uuprime_nonneg", worst_p >= 0.0, worst_p, where_p);
    push("q_cvprime_nonneg", worst_q >= -1e-10, worst_q, where_q);
  }

  return out;
}

}  // namespace defectforge
