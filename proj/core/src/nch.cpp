#include "nlagg/nch.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "nlagg/fast_poisson.hpp"
#include "nlagg/linear_solver.hpp"

namespace nlagg {

ScalarField chemical_potential(const ScalarField& phi, const KernelSpec& k, const PotentialSpec& p) {
  ScalarField mu = convolve(k, phi);
  for (std::size_t c = 0; c < mu.size(); ++c) mu[c] = f_prime(p, phi[c]) - mu[c];
  return mu;
}

ScalarField regularized_chemical_potential(const ScalarField& phi, const KernelSpec& k,
                                           const PotentialSpec& p, const YosidaParams& yp) {
  ScalarField mu = convolve(k, phi);
  for (std::size_t c = 0; c < mu.size(); ++c) mu[c] = yosida_f_prime(p, yp, phi[c]) - mu[c];
  return mu;
}

VectorField advective_flux(const VectorField& u, const ScalarField& phi, Advection scheme) {
  const Domain& d = phi.domain();
  VectorField f(d);
  auto face = [scheme](double vel, double left, double right) {
    if (scheme == Advection::Centered) return vel * (0.5 * (left + right));
    return vel * (vel > 0.0 ? left : right);
  };
  for (int j = 0; j < d.ny; ++j)
    for (int i = 1; i < d.nx; ++i) f.x(i, j) = face(u.x(i, j), phi(i - 1, j), phi(i, j));
  for (int j = 1; j < d.ny; ++j)
    for (int i = 0; i < d.nx; ++i) f.y(i, j) = face(u.y(i, j), phi(i, j - 1), phi(i, j));
  return f;
}

void check_cfl(const VectorField& u, double dt) {
  const Domain& d = u.domain();
  const double courant = u.max_abs() * dt / std::min(d.hx(), d.hy());
  if (!(courant <= 1.0)) {
    std::ostringstream msg;
    msg << "advective Courant number " << courant << " exceeds 1";
    throw Error(ErrorKind::CflViolation, msg.str());
  }
}

namespace {

// Newton runs on the chemical potential m = F'_lambda(phi) - J * phi_n, with
// phi = psi(m + J * phi_n). The step equation is then the gradient of the
// strictly convex functional
//   G(m) = sum [Psi(m + c) - (phi_n - dt a) m] / dt - 1/2 sum m Delta_h m,
// which drives the line search.
struct Residual {
  ScalarField r;               // (psi(m + c) - phi_n)/dt + a - Delta_h m
  ScalarField lap;             // Delta_h m
  std::vector<double> dpsi;    // psi'(m + c)
  double merit = 0.0;
  double l2 = 0.0;
  double linf = 0.0;
};

Residual evaluate(const ScalarField& m, const ScalarField& phi_n, const ScalarField& adv, const ScalarField& conv,
                  double dt, const PotentialSpec& p, const YosidaParams& yp) {
  const Domain& d = m.domain();
  Residual res{ScalarField(d), ScalarField(d), std::vector<double>(m.size()), 0.0, 0.0, 0.0};
  apply_laplace_neumann(d, m.values(), res.lap.values());
  double merit = 0.0, s = 0.0, mx = 0.0;
  for (std::size_t c = 0; c < m.size(); ++c) {
    const YosidaDual y = yosida_dual(p, yp, m[c] + conv[c]);
    const double v = (y.inverse - phi_n[c]) / dt + adv[c] - res.lap[c];
    res.r[c] = v;
    res.dpsi[c] = y.derivative;
    merit += (y.value - (phi_n[c] - dt * adv[c]) * m[c]) / dt - 0.5 * m[c] * res.lap[c];
    s += v * v;
    mx = std::max(mx, std::abs(v));
  }
  res.merit = merit;
  res.l2 = std::sqrt(s);
  res.linf = mx;
  return res;
}

[[noreturn]] void newton_failure(const std::string& why, int it, double res) {
  std::ostringstream msg;
  msg << "Cahn-Hilliard Newton " << why << " after " << it << " iterations (residual " << res << ")";
  throw Error(ErrorKind::NewtonDivergence, msg.str());
}

}  // namespace

ChState ch_step(const ChState& s, const VectorField& u, const ChStepParams& prm, const KernelSpec& k,
                const PotentialSpec& p, ChStepStats* stats) {
  NLAGG_REQUIRE(prm.dt > 0.0 && std::isfinite(prm.dt), ErrorKind::InvalidArgument,
                "time step must be positive");
  check_cfl(u, prm.dt);
  const Domain& d = s.phi.domain();
  const double dt = prm.dt;

  const ScalarField adv = div(advective_flux(u, s.phi, prm.advection));
  const ScalarField conv = convolve(k, s.phi);

  // Start from the chemical potential that reproduces phi_n.
  ScalarField m(d);
  for (std::size_t c = 0; c < m.size(); ++c) m[c] = yosida_f_prime(p, prm.yosida, s.phi[c]) - conv[c];
  Residual res = evaluate(m, s.phi, adv, conv, dt, p, prm.yosida);
  ChStepStats st;

  const int cap = prm.linear.max_iter > 0 ? prm.linear.max_iter : default_iteration_cap(d);
  const FastPoisson& fast = fast_poisson(d, FastPoisson::Layout::CellNeumann);
  std::vector<double> diag(m.size()), rhs(m.size()), z(m.size());
  ScalarField trial(d);

  while (res.linf * dt > prm.newton_tol) {
    if (st.newton_iterations >= prm.newton_max) newton_failure("did not converge", st.newton_iterations, res.linf * dt);
    ++st.newton_iterations;

    // (diag(psi')/dt - Delta_h) delta = -R; the same operator as I/dt - Delta_h F''_lambda
    // after the change of variables delta_phi = psi' delta.
    double shift = 0.0;
    for (std::size_t c = 0; c < m.size(); ++c) {
      diag[c] = res.dpsi[c] / dt;
      shift += diag[c];
      rhs[c] = -res.r[c];
    }
    shift /= static_cast<double>(m.size());
    LinearMap apply = [&](std::span<const double> in, std::span<double> out) {
      apply_laplace_neumann(d, in, out);
      for (std::size_t c = 0; c < out.size(); ++c) out[c] = diag[c] * in[c] - out[c];
    };
    LinearMap precondition;
    if (prm.linear.preconditioner == Preconditioner::Spectral) {
      precondition = [&](std::span<const double> in, std::span<double> out) {
        std::copy(in.begin(), in.end(), out.begin());
        fast.solve(out, shift);
      };
    } else {
      std::vector<double> jd(diag);
      for (int j = 0; j < d.ny; ++j)
        for (int i = 0; i < d.nx; ++i) {
          double v = 0.0;
          if (i > 0) v += 1.0 / (d.hx() * d.hx());
          if (i < d.nx - 1) v += 1.0 / (d.hx() * d.hx());
          if (j > 0) v += 1.0 / (d.hy() * d.hy());
          if (j < d.ny - 1) v += 1.0 / (d.hy() * d.hy());
          jd[static_cast<std::size_t>(j) * d.nx + i] += v;
        }
      precondition = jacobi(jd);
    }
    std::fill(z.begin(), z.end(), 0.0);
    CgOptions cg{prm.linear.rel_tol, cap, false, "ch-newton"};
    st.cg_iterations += solve_pcg(apply, precondition, rhs, z, cg).iterations;

    double slope = 0.0;
    for (std::size_t c = 0; c < z.size(); ++c) slope += res.r[c] * z[c];
    if (!std::isfinite(slope)) newton_failure("produced a non-finite update", st.newton_iterations, res.linf * dt);

    double theta = 1.0;
    for (int halvings = 0;; ++halvings) {
      for (std::size_t c = 0; c < z.size(); ++c) trial[c] = m[c] + theta * z[c];
      Residual next = evaluate(trial, s.phi, adv, conv, dt, p, prm.yosida);
      // Armijo on the convex merit; near convergence round-off swamps the merit
      // difference and the residual norm decides.
      if (next.merit <= res.merit + 1e-4 * theta * slope || next.l2 < 0.5 * res.l2) {
        m = trial;
        res = std::move(next);
        break;
      }
      if (halvings == 40) newton_failure("line search stalled", st.newton_iterations, res.linf * dt);
      theta *= 0.5;
    }
  }
  st.final_residual = res.linf * dt;

  // Write the update in flux form so the cell sum of phi is preserved to round-off.
  ChState out{ScalarField(d), ScalarField(d), s.t + dt};
  for (std::size_t c = 0; c < m.size(); ++c) out.phi[c] = s.phi[c] + dt * (res.lap[c] - adv[c]);
  if (!out.phi.all_finite()) newton_failure("produced a non-finite state", st.newton_iterations, res.linf * dt);

  out.mu = out.phi.max_abs() < 1.0 ? chemical_potential(out.phi, k, p)
                                   : regularized_chemical_potential(out.phi, k, p, prm.yosida);
  if (stats) *stats = st;
  return out;
}

double ch_energy(const ScalarField& phi, const KernelSpec& k, const PotentialSpec& p) {
  const ScalarField conv = convolve(k, phi);
  double s = 0.0;
  for (std::size_t c = 0; c < phi.size(); ++c) s += f_value(p, phi[c]) - 0.5 * conv[c] * phi[c];
  return s * phi.domain().cell_area();
}

double stationary_residual(const ScalarField& phi, const KernelSpec& k, const PotentialSpec& p) {
  ScalarField mu = chemical_potential(phi, k, p);
  remove_mean(mu);
  return norm_l2(mu);
}

double separation_margin(const ScalarField& phi) { return 1.0 - phi.max_abs(); }

}  // namespace nlagg
