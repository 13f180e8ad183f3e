#include "nlagg/ns.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "nlagg/fast_poisson.hpp"
#include "nlagg/linear_solver.hpp"
#include "nlagg/nch.hpp"

namespace nlagg {

void FluidParams::validate() const {
  auto ok = [](double v) { return v > 0.0 && std::isfinite(v); };
  NLAGG_REQUIRE(ok(rho1) && ok(rho2), ErrorKind::InvalidArgument, "densities must be positive");
  NLAGG_REQUIRE(ok(nu1) && ok(nu2), ErrorKind::InvalidArgument, "viscosities must be positive");
}

namespace {

ScalarField blend(const ScalarField& phi, double a, double b) {
  // a at phi = 1, b at phi = -1; exactly (a+b)/2 everywhere when a == b.
  const double mid = 0.5 * (a + b), half = 0.5 * (a - b);
  const double lo = std::min(a, b), hi = std::max(a, b);
  ScalarField out(phi.domain());
  for (std::size_t c = 0; c < phi.size(); ++c) {
    const double s = std::clamp(phi[c], -1.0, 1.0);
    out[c] = std::clamp(mid + half * s, lo, hi);
  }
  return out;
}

// Average of the cells touching each corner, layout (nx+1) x (ny+1).
std::vector<double> corner_average(const ScalarField& f) {
  const Domain& d = f.domain();
  std::vector<double> out(static_cast<std::size_t>(d.nx + 1) * (d.ny + 1));
  for (int j = 0; j <= d.ny; ++j)
    for (int i = 0; i <= d.nx; ++i) {
      double s = 0.0;
      int n = 0;
      for (int jj = j - 1; jj <= j; ++jj)
        for (int ii = i - 1; ii <= i; ++ii)
          if (ii >= 0 && ii < d.nx && jj >= 0 && jj < d.ny) {
            s += f(ii, jj);
            ++n;
          }
      out[static_cast<std::size_t>(j) * (d.nx + 1) + i] = s / n;
    }
  return out;
}

// Diagonal of apply_viscous.
VectorField viscous_diagonal(const ScalarField& nu) {
  const Domain& d = nu.domain();
  const double hx = d.hx(), hy = d.hy();
  const std::vector<double> nuc = corner_average(nu);
  const std::vector<double> w = corner_weights(d);
  auto corner = [&](int i, int j) {
    const std::size_t k = static_cast<std::size_t>(j) * (d.nx + 1) + i;
    return w[k] * nuc[k];
  };
  VectorField diag(d);
  for (int j = 0; j < d.ny; ++j)
    for (int i = 1; i < d.nx; ++i) {
      const double c1 = j > 0 ? 1.0 : 2.0, c2 = j + 1 < d.ny ? 1.0 : 2.0;
      diag.x(i, j) = (nu(i - 1, j) + nu(i, j)) / (hx * hx) +
                     0.5 * (corner(i, j) * c1 * c1 + corner(i, j + 1) * c2 * c2) / (hy * hy);
    }
  for (int j = 1; j < d.ny; ++j)
    for (int i = 0; i < d.nx; ++i) {
      const double c1 = i > 0 ? 1.0 : 2.0, c2 = i + 1 < d.nx ? 1.0 : 2.0;
      diag.y(i, j) = (nu(i, j - 1) + nu(i, j)) / (hy * hy) +
                     0.5 * (corner(i, j) * c1 * c1 + corner(i + 1, j) * c2 * c2) / (hx * hx);
    }
  return diag;
}

// Copies between a VectorField and one flat array (x faces, then y faces).
void flatten(const VectorField& v, std::span<double> out) {
  std::copy(v.xs().begin(), v.xs().end(), out.begin());
  std::copy(v.ys().begin(), v.ys().end(), out.begin() + static_cast<std::ptrdiff_t>(v.xs().size()));
}

void unflatten(std::span<const double> in, VectorField& v) {
  const auto nxf = static_cast<std::ptrdiff_t>(v.xs().size());
  std::copy(in.begin(), in.begin() + nxf, v.xs().begin());
  std::copy(in.begin() + nxf, in.end(), v.ys().begin());
}

// Centred derivatives of a face component; no-slip ghosts across the walls.
struct FaceDerivs {
  double ddx, ddy;
};

FaceDerivs x_face_derivs(const VectorField& u, int i, int j) {
  const Domain& d = u.domain();
  const double up = j + 1 < d.ny ? u.x(i, j + 1) : -u.x(i, j);
  const double down = j > 0 ? u.x(i, j - 1) : -u.x(i, j);
  return {(u.x(i + 1, j) - u.x(i - 1, j)) / (2.0 * d.hx()), (up - down) / (2.0 * d.hy())};
}

FaceDerivs y_face_derivs(const VectorField& u, int i, int j) {
  const Domain& d = u.domain();
  const double right = i + 1 < d.nx ? u.y(i + 1, j) : -u.y(i, j);
  const double left = i > 0 ? u.y(i - 1, j) : -u.y(i, j);
  return {(right - left) / (2.0 * d.hx()), (u.y(i, j + 1) - u.y(i, j - 1)) / (2.0 * d.hy())};
}

// Cell-centred d/dy and d/dx with Neumann reflection.
double cell_ddy(const ScalarField& f, int i, int j) {
  const Domain& d = f.domain();
  const double up = j + 1 < d.ny ? f(i, j + 1) : f(i, j);
  const double down = j > 0 ? f(i, j - 1) : f(i, j);
  return (up - down) / (2.0 * d.hy());
}

double cell_ddx(const ScalarField& f, int i, int j) {
  const Domain& d = f.domain();
  const double right = i + 1 < d.nx ? f(i + 1, j) : f(i, j);
  const double left = i > 0 ? f(i - 1, j) : f(i, j);
  return (right - left) / (2.0 * d.hx());
}

}  // namespace

ScalarField density(const ScalarField& phi, const FluidParams& fp) { return blend(phi, fp.rho1, fp.rho2); }

ScalarField viscosity(const ScalarField& phi, const FluidParams& fp) { return blend(phi, fp.nu1, fp.nu2); }

VectorField face_average(const ScalarField& f) {
  const Domain& d = f.domain();
  VectorField out(d);
  for (int j = 0; j < d.ny; ++j) {
    out.x(0, j) = f(0, j);
    out.x(d.nx, j) = f(d.nx - 1, j);
    for (int i = 1; i < d.nx; ++i) out.x(i, j) = 0.5 * (f(i - 1, j) + f(i, j));
  }
  for (int i = 0; i < d.nx; ++i) {
    out.y(i, 0) = f(i, 0);
    out.y(i, d.ny) = f(i, d.ny - 1);
  }
  for (int j = 1; j < d.ny; ++j)
    for (int i = 0; i < d.nx; ++i) out.y(i, j) = 0.5 * (f(i, j - 1) + f(i, j));
  return out;
}

VectorField apply_viscous(const VectorField& v, const ScalarField& nu) {
  const Domain& d = v.domain();
  const double hx = d.hx(), hy = d.hy();
  const StrainRate s = strain_rate(v);
  const std::vector<double> nuc = corner_average(nu);
  std::vector<double> txy(s.dxy.size());
  for (std::size_t k = 0; k < txy.size(); ++k) txy[k] = s.corner_weight[k] * nuc[k] * s.dxy[k];
  auto corner = [&](int i, int j) { return txy[static_cast<std::size_t>(j) * (d.nx + 1) + i]; };

  VectorField out(d);
  for (int j = 0; j < d.ny; ++j)
    for (int i = 1; i < d.nx; ++i) {
      const double c1 = j > 0 ? 1.0 : 2.0, c2 = j + 1 < d.ny ? 1.0 : 2.0;
      out.x(i, j) = (nu(i - 1, j) * s.dxx(i - 1, j) - nu(i, j) * s.dxx(i, j)) / hx +
                    (corner(i, j) * c1 - corner(i, j + 1) * c2) / hy;
    }
  for (int j = 1; j < d.ny; ++j)
    for (int i = 0; i < d.nx; ++i) {
      const double c1 = i > 0 ? 1.0 : 2.0, c2 = i + 1 < d.nx ? 1.0 : 2.0;
      out.y(i, j) = (nu(i, j - 1) * s.dyy(i, j - 1) - nu(i, j) * s.dyy(i, j)) / hy +
                    (corner(i, j) * c1 - corner(i + 1, j) * c2) / hx;
    }
  return out;
}

VectorField convection(const VectorField& u, const ScalarField& rho) {
  const Domain& d = u.domain();
  const VectorField rf = face_average(rho);
  VectorField out(d);
  for (int j = 0; j < d.ny; ++j)
    for (int i = 1; i < d.nx; ++i) {
      const FaceDerivs g = x_face_derivs(u, i, j);
      const double vbar = 0.25 * (u.y(i - 1, j) + u.y(i, j) + u.y(i - 1, j + 1) + u.y(i, j + 1));
      out.x(i, j) = rf.x(i, j) * (u.x(i, j) * g.ddx + vbar * g.ddy);
    }
  for (int j = 1; j < d.ny; ++j)
    for (int i = 0; i < d.nx; ++i) {
      const FaceDerivs g = y_face_derivs(u, i, j);
      const double ubar = 0.25 * (u.x(i, j - 1) + u.x(i + 1, j - 1) + u.x(i, j) + u.x(i + 1, j));
      out.y(i, j) = rf.y(i, j) * (ubar * g.ddx + u.y(i, j) * g.ddy);
    }
  return out;
}

VectorField flux_transport(const VectorField& u, const ScalarField& mu) {
  const Domain& d = u.domain();
  VectorField out(d);
  for (int j = 0; j < d.ny; ++j)
    for (int i = 1; i < d.nx; ++i) {
      const FaceDerivs g = x_face_derivs(u, i, j);
      const double gx = (mu(i, j) - mu(i - 1, j)) / d.hx();
      const double gy = 0.5 * (cell_ddy(mu, i - 1, j) + cell_ddy(mu, i, j));
      out.x(i, j) = gx * g.ddx + gy * g.ddy;
    }
  for (int j = 1; j < d.ny; ++j)
    for (int i = 0; i < d.nx; ++i) {
      const FaceDerivs g = y_face_derivs(u, i, j);
      const double gx = 0.5 * (cell_ddx(mu, i, j - 1) + cell_ddx(mu, i, j));
      const double gy = (mu(i, j) - mu(i, j - 1)) / d.hy();
      out.y(i, j) = gx * g.ddx + gy * g.ddy;
    }
  return out;
}

VectorField capillary_force(const ScalarField& mu, const ScalarField& phi) {
  const Domain& d = mu.domain();
  VectorField out(d);
  for (int j = 0; j < d.ny; ++j)
    for (int i = 1; i < d.nx; ++i)
      out.x(i, j) = 0.5 * (mu(i - 1, j) + mu(i, j)) * (phi(i, j) - phi(i - 1, j)) / d.hx();
  for (int j = 1; j < d.ny; ++j)
    for (int i = 0; i < d.nx; ++i)
      out.y(i, j) = 0.5 * (mu(i, j - 1) + mu(i, j)) * (phi(i, j) - phi(i, j - 1)) / d.hy();
  return out;
}

NsState ns_step(const NsState& ns, const ScalarField& phi_old, const ScalarField& phi,
                const ScalarField& mu, const FluidParams& fp, double dt, const NsStepOptions& opt,
                NsStepStats* stats) {
  NLAGG_REQUIRE(dt > 0.0 && std::isfinite(dt), ErrorKind::InvalidArgument, "time step must be positive");
  fp.validate();
  check_cfl(ns.u, dt);
  const Domain& d = ns.u.domain();
  const int cap = opt.linear.max_iter > 0 ? opt.linear.max_iter : default_iteration_cap(d);
  NsStepStats st;

  const ScalarField rho_old = density(phi_old, fp);
  const ScalarField rho = density(phi, fp);
  const ScalarField nu = viscosity(phi, fp);
  const VectorField rho_f = face_average(rho);

  // Momentum predictor: (rho_f/dt + L_nu) w = rhs.
  VectorField rhs = capillary_force(mu, phi);
  rhs -= convection(ns.u, rho_old);
  rhs -= grad(ns.p.values);
  if (opt.include_flux && fp.rho1 != fp.rho2) {
    VectorField ft = flux_transport(ns.u, mu);
    ft *= fp.rho_prime();
    rhs += ft;
  }
  {
    auto rx = rhs.xs(), ry = rhs.ys();
    auto ux = ns.u.xs(), uy = ns.u.ys();
    auto fx = rho_f.xs(), fy = rho_f.ys();
    for (std::size_t k = 0; k < rx.size(); ++k) rx[k] += fx[k] / dt * ux[k];
    for (std::size_t k = 0; k < ry.size(); ++k) ry[k] += fy[k] / dt * uy[k];
  }
  rhs.enforce_no_slip();

  VectorField pred = ns.u;
  {
    const std::size_t n = d.x_faces() + d.y_faces();
    VectorField mass = rho_f;
    mass *= 1.0 / dt;
    mass.enforce_no_slip();
    std::vector<double> m(n), diag(n), b(n), x(n);
    flatten(mass, m);
    flatten(viscous_diagonal(nu) + mass, diag);
    for (double& v : diag)
      if (v == 0.0) v = 1.0;  // wall faces: identity rows
    flatten(rhs, b);
    flatten(pred, x);
    VectorField tmp(d);
    // Wall faces carry identity rows with zero right-hand side.
    LinearMap apply = [&](std::span<const double> in, std::span<double> out) {
      unflatten(in, tmp);
      tmp.enforce_no_slip();
      flatten(apply_viscous(tmp, nu), out);
      for (std::size_t k = 0; k < n; ++k) out[k] = m[k] == 0.0 ? in[k] : out[k] + m[k] * in[k];
    };
    LinearMap precondition = jacobi(diag);
    CgOptions cg{opt.linear.rel_tol, cap, false, "momentum"};
    st.viscous_iterations = solve_pcg(apply, precondition, b, x, cg).iterations;
    unflatten(x, pred);
    pred.enforce_no_slip();
  }

  // Pressure correction: -div((1/rho_f) grad q) = -div(pred)/dt.
  ScalarField q(d);
  {
    ScalarField b = div(pred);
    b *= -1.0 / dt;
    remove_mean(b);
    VectorField inv_rho(d);
    {
      auto ix = inv_rho.xs(), iy = inv_rho.ys();
      auto fx = rho_f.xs(), fy = rho_f.ys();
      for (std::size_t k = 0; k < ix.size(); ++k) ix[k] = 1.0 / fx[k];
      for (std::size_t k = 0; k < iy.size(); ++k) iy[k] = 1.0 / fy[k];
    }
    const double rho_mean = rho.mean();
    const FastPoisson& fast = fast_poisson(d, FastPoisson::Layout::CellNeumann);
    ScalarField tmp(d);
    LinearMap apply = [&](std::span<const double> in, std::span<double> out) {
      std::copy(in.begin(), in.end(), tmp.values().begin());
      VectorField g = grad(tmp);
      auto gx = g.xs(), gy = g.ys();
      auto ix = inv_rho.xs(), iy = inv_rho.ys();
      for (std::size_t k = 0; k < gx.size(); ++k) gx[k] *= ix[k];
      for (std::size_t k = 0; k < gy.size(); ++k) gy[k] *= iy[k];
      const ScalarField dv = div(g);
      for (std::size_t k = 0; k < out.size(); ++k) out[k] = -dv[k];
    };
    LinearMap precondition;
    if (opt.linear.preconditioner == Preconditioner::Spectral) {
      precondition = [&](std::span<const double> in, std::span<double> out) {
        std::copy(in.begin(), in.end(), out.begin());
        fast.solve(out, 0.0);
        for (double& v : out) v *= rho_mean;
      };
    } else {
      std::vector<double> diag(d.cells(), 0.0);
      for (int j = 0; j < d.ny; ++j)
        for (int i = 0; i < d.nx; ++i) {
          double v = (inv_rho.x(i, j) * (i > 0) + inv_rho.x(i + 1, j) * (i + 1 < d.nx)) / (d.hx() * d.hx());
          v += (inv_rho.y(i, j) * (j > 0) + inv_rho.y(i, j + 1) * (j + 1 < d.ny)) / (d.hy() * d.hy());
          diag[static_cast<std::size_t>(j) * d.nx + i] = v;
        }
      precondition = jacobi(diag);
    }
    if (b.max_abs() > 0.0) {
      CgOptions cg{opt.linear.rel_tol, cap, true, "pressure"};
      st.pressure_iterations = solve_pcg(apply, precondition, b.values(), q.values(), cg).iterations;
    }
    remove_mean(q);

    VectorField g = grad(q);
    auto gx = g.xs(), gy = g.ys();
    auto ix = inv_rho.xs(), iy = inv_rho.ys();
    auto px = pred.xs(), py = pred.ys();
    for (std::size_t k = 0; k < gx.size(); ++k) px[k] -= dt * ix[k] * gx[k];
    for (std::size_t k = 0; k < gy.size(); ++k) py[k] -= dt * iy[k] * gy[k];
    pred.enforce_no_slip();
  }

  NsState out{std::move(pred), ns.p, ns.t + dt};
  out.p.values += q;
  remove_mean(out.p.values);
  out.p.mean_zero = true;
  if (!out.u.all_finite() || !out.p.values.all_finite())
    throw Error(ErrorKind::SolverDivergence, "momentum step produced non-finite values");
  if (stats) *stats = st;
  return out;
}

double kinetic_energy(const VectorField& u, const ScalarField& rho) {
  const VectorField rf = face_average(rho);
  double s = 0.0;
  auto ux = u.xs(), uy = u.ys(), fx = rf.xs(), fy = rf.ys();
  for (std::size_t k = 0; k < ux.size(); ++k) s += fx[k] * ux[k] * ux[k];
  for (std::size_t k = 0; k < uy.size(); ++k) s += fy[k] * uy[k] * uy[k];
  return 0.5 * s * u.domain().cell_area();
}

double viscous_dissipation(const VectorField& u, const ScalarField& nu) {
  const StrainRate s = strain_rate(u);
  const std::vector<double> nuc = corner_average(nu);
  double centres = 0.0;
  for (std::size_t k = 0; k < s.dxx.size(); ++k) centres += nu[k] * (s.dxx[k] * s.dxx[k] + s.dyy[k] * s.dyy[k]);
  double corners = 0.0;
  for (std::size_t k = 0; k < s.dxy.size(); ++k) corners += 2.0 * s.corner_weight[k] * nuc[k] * s.dxy[k] * s.dxy[k];
  return (centres + corners) * u.domain().cell_area();
}

double relative_divergence(const VectorField& u) {
  const double umax = u.max_abs();
  if (umax == 0.0) return 0.0;
  const Domain& d = u.domain();
  return div(u).max_abs() * std::min(d.hx(), d.hy()) / umax;
}

double pressure_l4_ratio(const Domain& d, const VectorField& f, const SolveOptions& opt) {
  NLAGG_REQUIRE(f.domain() == d, ErrorKind::InvalidArgument, "forcing lives on a different grid");
  NLAGG_REQUIRE(f.max_abs() > 0.0, ErrorKind::ZeroInput, "pressure ratio needs a nonzero forcing");
  const StokesSolution sol = solve_stokes(f, opt);
  const double den = std::sqrt(norm_grad_vec(sol.u) * norm_l2_vec(f));
  NLAGG_REQUIRE(den > 0.0, ErrorKind::ZeroInput, "Stokes velocity vanished");
  return norm_l4(sol.p.values) / den;
}

}  // namespace nlagg
