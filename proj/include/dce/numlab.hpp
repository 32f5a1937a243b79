#pragma once

// Numerical laboratory: method-of-lines integration of concrete equations
// f(x) u_t = (g(x) A(u) u_x)_x + h(x) B(u) u_x, monitoring of conserved
// functionals with boundary-flux accounting, and random-jet-point residual
// evaluation as an oracle independent of the symbolic verifier.

#include "conslaw.hpp"
#include "equations.hpp"
#include "eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace dce {

struct IntegrationError : std::runtime_error {
    double t;
    IntegrationError(const std::string& what, double time)
        : std::runtime_error(what + " at t = " + std::to_string(time)),
          t(time) {}
};

enum class Boundary { Periodic, Dirichlet, NoFlux };

struct Grid {
    double x_lo = 0.0;
    double x_hi = 1.0;
    int n = 64;  // number of cells
    Boundary boundary = Boundary::Periodic;
    double left_value = 0.0;   // Dirichlet value at x_lo
    double right_value = 0.0;  // Dirichlet value at x_hi

    double dx() const { return (x_hi - x_lo) / n; }
    // Periodic grids omit the duplicated right endpoint.
    int num_nodes() const { return boundary == Boundary::Periodic ? n : n + 1; }
    double node(int i) const { return x_lo + i * dx(); }
};

inline void check_grid(const Grid& g) {
    if (g.n < 16) throw std::invalid_argument("grid must have at least 16 cells");
    if (!(g.x_hi > g.x_lo))
        throw std::invalid_argument("grid interval must have x_hi > x_lo");
}

struct SolveConfig {
    double t_end = 0.1;
    double safety = 0.4;  // fraction of the diffusion CFL step
    int stride = 1;       // record every stride-th step

    void check() const {
        if (!(t_end > 0)) throw std::invalid_argument("t_end must be positive");
        if (!(safety > 0 && safety < 1))
            throw std::invalid_argument("safety factor must lie in (0, 1)");
        if (stride < 1) throw std::invalid_argument("stride must be >= 1");
    }
};

struct Trajectory {
    Grid grid;
    std::vector<double> times;
    std::vector<std::vector<double>> states;  // one vector of nodal u per time
};

namespace detail {

// Wrap a closed-form expression of a single variable as a double function.
// Polynomials get compiled to a Horner tape; anything else falls back to the
// generic evaluator.
inline std::function<double(double)> scalar_fn(const Expr& e, const Expr& var) {
    auto slow = [e, var](double v) {
        NumBindings b;
        b.atoms[var] = v;
        return eval_num(e, b);
    };
    try {
        std::vector<double> coef;
        Expr d = e;
        for (int k = 0; k <= 8; ++k) {
            NumBindings at0;
            at0.atoms[var] = 0.0;
            double ck = eval_num(d, at0);
            for (int j = 2; j <= k; ++j) ck /= j;
            coef.push_back(ck);
            d = diff(d, var);
            if (d.is_zero()) break;
        }
        if (!d.is_zero()) return slow;
        // guard against a wrong Taylor reconstruction of a non-polynomial
        for (double probe : {-1.3, 0.7, 2.1}) {
            double horner = 0;
            for (std::size_t k = coef.size(); k-- > 0;)
                horner = horner * probe + coef[k];
            double exact = slow(probe);
            if (!(std::fabs(horner - exact) <=
                  1e-9 * std::max(1.0, std::fabs(exact))))
                return slow;
        }
        return [coef](double v) {
            double r = 0;
            for (std::size_t k = coef.size(); k-- > 0;) r = r * v + coef[k];
            return r;
        };
    } catch (const std::exception&) {
        return slow;
    }
}

}  // namespace detail

// Spatial semidiscretization and classic four-stage explicit time stepping.
// The diffusion term is differenced in flux form (second order); the
// convection term h(x) B(u) u_x uses central differences.
inline Trajectory solve(const DCEquation& eq, const Bindings& binds,
                        const std::function<double(double)>& u0,
                        const Grid& grid, const SolveConfig& cfg) {
    check_grid(grid);
    cfg.check();
    Expr xv = var(eq.space);
    Expr fef = simplify(substitute(apply_assumptions(eq.f, eq.assumptions), binds));
    Expr geg = simplify(substitute(apply_assumptions(eq.g, eq.assumptions), binds));
    Expr heh = simplify(substitute(apply_assumptions(eq.h, eq.assumptions), binds));
    Expr aeu = simplify(substitute(eq.A, binds));
    Expr beu = simplify(substitute(eq.B, binds));
    auto fx = detail::scalar_fn(fef, xv);
    auto gx = detail::scalar_fn(geg, xv);
    auto hx = detail::scalar_fn(heh, xv);
    auto Au = detail::scalar_fn(aeu, u_jet(0));
    auto Bu = detail::scalar_fn(beu, u_jet(0));

    const int m = grid.num_nodes();
    const double dx = grid.dx();
    const bool periodic = grid.boundary == Boundary::Periodic;

    std::vector<double> fi(m), hi(m), ghalf(grid.n + (periodic ? 1 : 0));
    double fmin = std::numeric_limits<double>::infinity();
    for (int i = 0; i < m; ++i) {
        fi[i] = fx(grid.node(i));
        hi[i] = hx(grid.node(i));
        if (fi[i] == 0 || !std::isfinite(fi[i]))
            throw std::invalid_argument("f vanishes or is not finite on the grid");
        fmin = std::min(fmin, std::fabs(fi[i]));
    }
    // g at the half nodes between node i and node i+1 (wrapping if periodic).
    for (int i = 0; i < static_cast<int>(ghalf.size()); ++i)
        ghalf[i] = gx(grid.node(i) + dx / 2);

    // Step-size bounds from sampled coefficient magnitudes over u in [-2, 2].
    double gmax = 0;
    for (double gv : ghalf) gmax = std::max(gmax, std::fabs(gv));
    double abound = 0, bmax = 0;
    for (int k = 0; k <= 64; ++k) {
        double u = -2.0 + 4.0 * k / 64;
        double du = 1e-4;
        abound = std::max(abound, std::fabs(Au(u)));
        abound = std::max(abound, std::fabs((Au(u + du) - Au(u - du)) / (2 * du)));
        bmax = std::max(bmax, std::fabs(Bu(u)));
    }
    double hmax = 0;
    for (double hv : hi) hmax = std::max(hmax, std::fabs(hv));
    double dt = cfg.safety * dx * dx * fmin / std::max(gmax * std::max(abound, 1e-12), 1e-12);
    double adv = hmax * bmax;
    if (adv > 0) dt = std::min(dt, cfg.safety * dx * fmin / adv);
    dt = std::min(dt, cfg.t_end);
    if (dt < 1e-12) throw IntegrationError("step size underflow", 0.0);

    auto rhs = [&](const std::vector<double>& u, std::vector<double>& du) {
        auto at = [&](int i) -> double {
            if (periodic) return u[((i % grid.n) + grid.n) % grid.n];
            return u[i];
        };
        // flux(i) = g A((u_i + u_{i+1})/2) (u_{i+1} - u_i)/dx at half node i.
        auto flux = [&](int i) -> double {
            double ul = at(i), ur = at(i + 1);
            int j = periodic ? ((i % grid.n) + grid.n) % grid.n : i;
            return ghalf[j] * Au((ul + ur) / 2) *
                   (ur - ul) / dx;
        };
        for (int i = 0; i < m; ++i) du[i] = 0;
        int lo = periodic ? 0 : 1, hi_i = periodic ? m - 1 : m - 2;
        for (int i = lo; i <= hi_i; ++i) {
            double diffusion = (flux(i) - flux(i - 1)) / dx;
            double convection = hi[i] * Bu(u[i]) * (at(i + 1) - at(i - 1)) / (2 * dx);
            du[i] = (diffusion + convection) / fi[i];
        }
        if (!periodic && grid.boundary == Boundary::NoFlux) {
            // Reflection ghosts: zero diffusive flux and zero u_x at the ends.
            du[0] = (flux(0) - 0.0) / (dx / 2) / fi[0];
            du[m - 1] = (0.0 - flux(m - 2)) / (dx / 2) / fi[m - 1];
        }
        // Dirichlet endpoints stay pinned (du = 0).
    };

    std::vector<double> u(m);
    for (int i = 0; i < m; ++i) u[i] = u0(grid.node(i));
    if (grid.boundary == Boundary::Dirichlet) {
        u[0] = grid.left_value;
        u[m - 1] = grid.right_value;
    }

    Trajectory traj;
    traj.grid = grid;
    traj.times.push_back(0.0);
    traj.states.push_back(u);

    std::vector<double> k1(m), k2(m), k3(m), k4(m), tmp(m);
    double t = 0.0;
    long step = 0;
    while (t < cfg.t_end - 1e-14) {
        double h = std::min(dt, cfg.t_end - t);
        rhs(u, k1);
        for (int i = 0; i < m; ++i) tmp[i] = u[i] + h / 2 * k1[i];
        rhs(tmp, k2);
        for (int i = 0; i < m; ++i) tmp[i] = u[i] + h / 2 * k2[i];
        rhs(tmp, k3);
        for (int i = 0; i < m; ++i) tmp[i] = u[i] + h * k3[i];
        rhs(tmp, k4);
        for (int i = 0; i < m; ++i)
            u[i] += h / 6 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
        t += h;
        ++step;
        double umax = 0;
        for (double v : u) umax = std::max(umax, std::fabs(v));
        if (!std::isfinite(umax) || umax > 1e8)
            throw IntegrationError("non-finite or blown-up state", t);
        if (step % cfg.stride == 0 || t >= cfg.t_end - 1e-14) {
            traj.times.push_back(t);
            traj.states.push_back(u);
        }
    }
    return traj;
}

namespace detail {

// u_x at a node: central in the interior / wrap, one-sided second order at
// the ends of a bounded grid.
inline double node_ux(const Trajectory& tr, const std::vector<double>& u, int i) {
    const Grid& g = tr.grid;
    double dx = g.dx();
    if (g.boundary == Boundary::Periodic) {
        int n = g.n;
        return (u[(i + 1) % n] - u[(i - 1 + n) % n]) / (2 * dx);
    }
    int m = g.num_nodes();
    if (i == 0) return (-3 * u[0] + 4 * u[1] - u[2]) / (2 * dx);
    if (i == m - 1) return (3 * u[m - 1] - 4 * u[m - 2] + u[m - 3]) / (2 * dx);
    return (u[i + 1] - u[i - 1]) / (2 * dx);
}

inline double eval_at_node(const Expr& e, char space, double t, double x,
                           double u, double ux) {
    NumBindings b;
    b.atoms[var('t')] = t;
    b.atoms[var(space)] = x;
    b.atoms[u_jet(0)] = u;
    b.atoms[u_jet(1)] = ux;
    return eval_num(e, b);
}

}  // namespace detail

// Trapezoid quadrature of the density over the grid per snapshot.
inline std::vector<double> conserved_functional(const Trajectory& tr,
                                                const Expr& F, char space = 'x') {
    const Grid& g = tr.grid;
    double dx = g.dx();
    std::vector<double> out;
    out.reserve(tr.times.size());
    for (size_t k = 0; k < tr.times.size(); ++k) {
        const auto& u = tr.states[k];
        double t = tr.times[k];
        double q = 0;
        int m = g.num_nodes();
        for (int i = 0; i < m; ++i) {
            double fv = detail::eval_at_node(F, space, t, g.node(i), u[i],
                                             detail::node_ux(tr, u, i));
            double w = 1.0;
            if (g.boundary != Boundary::Periodic && (i == 0 || i == m - 1))
                w = 0.5;
            q += w * fv;
        }
        out.push_back(q * dx);
    }
    return out;
}

// G(x_hi) - G(x_lo) per snapshot, with one-sided u_x at the endpoints.
inline std::vector<double> boundary_flux(const Trajectory& tr, const Expr& G,
                                         char space = 'x') {
    const Grid& g = tr.grid;
    std::vector<double> out;
    out.reserve(tr.times.size());
    for (size_t k = 0; k < tr.times.size(); ++k) {
        const auto& u = tr.states[k];
        double t = tr.times[k];
        double lo, hi;
        if (g.boundary == Boundary::Periodic) {
            // The periodic continuation repeats u[0] at x_hi.
            double ux0 = detail::node_ux(tr, u, 0);
            lo = detail::eval_at_node(G, space, t, g.x_lo, u[0], ux0);
            hi = detail::eval_at_node(G, space, t, g.x_hi, u[0], ux0);
        } else {
            int m = g.num_nodes();
            lo = detail::eval_at_node(G, space, t, g.x_lo, u[0],
                                      detail::node_ux(tr, u, 0));
            hi = detail::eval_at_node(G, space, t, g.x_hi, u[m - 1],
                                      detail::node_ux(tr, u, m - 1));
        }
        out.push_back(hi - lo);
    }
    return out;
}

inline double drift(const std::vector<double>& series) {
    if (series.empty()) throw std::invalid_argument("empty series");
    double q0 = series.front(), d = 0;
    for (double q : series) d = std::max(d, std::fabs(q - q0));
    return d / std::max(1.0, std::fabs(q0));
}

struct DriftReport {
    std::vector<double> q;                // conserved functional per snapshot
    std::vector<double> flux_correction;  // time integral of [G] per snapshot
    std::vector<double> budget;           // Q(t) - Q(0) + correction
    double drift = 0;                     // max normalized budget
};

// Drift measured against the boundary-flux-corrected budget
// Q(t) - Q(0) + \int_0^t (G(x_hi) - G(x_lo)) dt' (time trapezoid).
inline DriftReport flux_corrected_drift(const Trajectory& tr, const Expr& F,
                                        const Expr& G, char space = 'x') {
    DriftReport r;
    r.q = conserved_functional(tr, F, space);
    std::vector<double> phi = boundary_flux(tr, G, space);
    r.flux_correction.resize(r.q.size(), 0.0);
    for (size_t k = 1; k < r.q.size(); ++k) {
        double dt = tr.times[k] - tr.times[k - 1];
        r.flux_correction[k] =
            r.flux_correction[k - 1] + dt / 2 * (phi[k] + phi[k - 1]);
    }
    double q0 = r.q.front();
    double denom = std::max(1.0, std::fabs(q0));
    r.budget.resize(r.q.size());
    for (size_t k = 0; k < r.q.size(); ++k) {
        r.budget[k] = r.q[k] - q0 + r.flux_correction[k];
        r.drift = std::max(r.drift, std::fabs(r.budget[k]) / denom);
    }
    return r;
}

// Columns: t, Q, flux_correction, drift (running normalized budget).
inline void write_csv(const std::string& path, const Trajectory& tr,
                      const DriftReport& rep) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open " + path);
    out << "t,Q,flux_correction,drift\n";
    double denom = std::max(1.0, std::fabs(rep.q.front()));
    double running = 0;
    char buf[160];
    for (size_t k = 0; k < tr.times.size(); ++k) {
        running = std::max(running, std::fabs(rep.budget[k]) / denom);
        std::snprintf(buf, sizeof buf, "%.12g,%.12g,%.12g,%.12g\n", tr.times[k],
                      rep.q[k], rep.flux_correction[k], running);
        out << buf;
    }
}

struct SampleBox {
    double t_lo = -1, t_hi = 1;
    double x_lo = -1, x_hi = 1;
    double u_lo = -1, u_hi = 1;
    double ux_lo = -1, ux_hi = 1;
    double uxx_lo = -1, uxx_hi = 1;
};

// Evaluate the divergence D_t F + D_x G (with u_t eliminated through the
// evolution form) at random jet points; returns the maximum residual,
// normalized by the size of the largest contributing term so a rescaled
// conserved vector gets the same verdict.
inline double random_point_residual(const DCEquation& eq,
                                    const ConservedVector& cv, int count,
                                    unsigned long seed,
                                    const SampleBox& box = {},
                                    const NumBindings& extra = {}) {
    Expr xv = var(eq.space);
    Expr lam = evolution_form(eq);
    Expr F = apply_assumptions(cv.F, eq.assumptions);
    Expr G = apply_assumptions(cv.G, eq.assumptions);
    // D_t F = F_t + F_u u_t;  D_x G = G_x + G_u u_x + G_{u_x} u_xx.
    std::vector<Expr> terms = {
        apply_rules(diff(F, var('t')), eq.rules),
        simplify(apply_rules(diff(F, u_jet(0)), eq.rules) * lam),
        apply_rules(diff(G, xv), eq.rules),
        simplify(apply_rules(diff(G, u_jet(0)), eq.rules) * u_jet(1)),
        simplify(apply_rules(diff(G, u_jet(1)), eq.rules) * u_jet(2))};

    std::mt19937_64 rng(seed);
    auto pick = [&](double lo, double hi) {
        std::uniform_real_distribution<double> d(lo, hi);
        return d(rng);
    };
    double worst = 0;
    for (int k = 0; k < count; ++k) {
        bool done = false;
        for (int attempt = 0; attempt < 100 && !done; ++attempt) {
            NumBindings b = extra;
            b.atoms[var('t')] = pick(box.t_lo, box.t_hi);
            b.atoms[xv] = pick(box.x_lo, box.x_hi);
            b.atoms[u_jet(0)] = pick(box.u_lo, box.u_hi);
            b.atoms[u_jet(1)] = pick(box.ux_lo, box.ux_hi);
            b.atoms[u_jet(2)] = pick(box.uxx_lo, box.uxx_hi);
            double sum = 0, scale = 0;
            bool ok = true;
            for (const Expr& term : terms) {
                double v = eval_num(term, b);
                if (!std::isfinite(v)) {
                    ok = false;
                    break;
                }
                sum += v;
                scale = std::max(scale, std::fabs(v));
            }
            if (!ok) continue;
            worst = std::max(worst, std::fabs(sum) / std::max(1.0, scale));
            done = true;
        }
        if (!done)
            throw DomainError(
                "could not sample an evaluable jet point after 100 attempts");
    }
    return worst;
}

}  // namespace dce
