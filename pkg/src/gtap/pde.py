"""Parisi PDE solver for atomic order parameters.

The backward equation

    dPhi/dt = -(xi''(t)/2) (Phi_xx + zeta(t) Phi_x^2)

with a log-cosh type boundary is solved layer by layer: on a piece where the
CDF zeta(s) is the constant z > 0, the Cole-Hopf transform exp(z Phi) obeys
the linear heat equation, so

    Phi(t, x) = (1/z) log E exp(z Phi(t', x + sigma g)),  sigma^2 = xi'(t') - xi'(t),

with g standard normal; z = 0 degenerates to the plain heat semigroup
Phi(t, x) = E Phi(t', x + sigma g). The Gaussian expectations are evaluated
with Gauss-Hermite quadrature on a uniform x-grid, and x-derivatives are
propagated by the differentiated recursion (Gibbs-weighted moments), so the
solution is exact in t for atomic zeta up to quadrature and interpolation
error.

The same Gibbs weights give a deterministic propagator for expectations
E f(X_s) of the optimal-control diffusion

    dX = xi''(s) zeta(s) Phi_x(s, X) ds + sqrt(xi''(s)) dW,

which is the Doob transform of the time-changed Brownian motion by
exp(z Phi). An Euler-Maruyama simulator of the same SDE is provided for
Monte-Carlo cross-checks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .measures import OrderParameter
from .model import MixedModel, ShiftedModel
from .numerics import (gauss_hermite, grid_derivative, hermite_eval,
                       linear_eval, log2cosh)

__all__ = [
    "SolverConfig", "PDESolution", "solve", "solve_steps", "solve_band",
    "unify", "simulate_control", "second_derivative_identity",
    "parisi_functional", "parisi_measure",
]


@dataclass(frozen=True)
class SolverConfig:
    """Numerical knobs shared across the PDE-based functionals."""

    dx: float = 1.0 / 64.0
    gh_order: int = 40
    x_max: float | None = None     # half-width of the x grid; auto if None
    x_pad: float = 0.0             # extra half-width on top of the auto rule
    bisect_tol: float = 1e-10
    sde_steps: int = 4096
    edge_curvature_tol: float = 1e-2

    def with_pad(self, pad: float) -> "SolverConfig":
        return replace(self, x_pad=max(self.x_pad, pad))


DEFAULT_CONFIG = SolverConfig()


class Frame:
    """Values of Phi and its first three x-derivatives at a fixed time."""

    __slots__ = ("t", "x0", "dx", "phi", "phi_x", "phi_xx", "phi_xxx")

    def __init__(self, t, x0, dx, phi, phi_x, phi_xx, phi_xxx):
        self.t = t
        self.x0 = x0
        self.dx = dx
        self.phi = phi
        self.phi_x = phi_x
        self.phi_xx = phi_xx
        self.phi_xxx = phi_xxx

    def eval_phi(self, x):
        return hermite_eval(self.x0, self.dx, self.phi, self.phi_x, x)

    def eval_phi_x(self, x):
        return hermite_eval(self.x0, self.dx, self.phi_x, self.phi_xx, x)

    def eval_phi_xx(self, x):
        return hermite_eval(self.x0, self.dx, self.phi_xx, self.phi_xxx, x)

    def eval_phi_xxx(self, x):
        return linear_eval(self.x0, self.dx, self.phi_xxx, x)


def _boundary_frame(kind: str, a: float, t: float, x: np.ndarray) -> Frame:
    th = np.tanh(x)
    sech2 = 1.0 - th * th
    phi = log2cosh(x)
    if kind == "band":
        phi = phi - a * x
        phi_x = th - a
    else:
        phi_x = th.copy()
    return Frame(t, float(x[0]), float(x[1] - x[0]),
                 phi, phi_x, sech2, -2.0 * th * sech2)


def _gibbs_step(upper: Frame, t_lo: float, sigma: float, level: float,
                x: np.ndarray, gh_order: int) -> Frame:
    """One Cole-Hopf layer backwards: from the upper frame down to t_lo with
    sigma^2 = xi'(t_upper) - xi'(t_lo) and constant CDF value `level`."""
    dx = float(x[1] - x[0])
    if sigma <= 1e-14:
        return Frame(t_lo, float(x[0]), dx, upper.phi.copy(),
                     upper.phi_x.copy(), upper.phi_xx.copy(),
                     upper.phi_xxx.copy())
    g, w = gauss_hermite(gh_order)
    X = x[:, None] + sigma * g[None, :]
    P = upper.eval_phi(X)
    Px = upper.eval_phi_x(X)
    Pxx = upper.eval_phi_xx(X)
    Pxxx = upper.eval_phi_xxx(X)
    if level <= 0.0:
        phi = P @ w
        phi_x = Px @ w
        phi_xx = Pxx @ w
        phi_xxx = Pxxx @ w
    else:
        logits = level * P
        m = logits.max(axis=1, keepdims=True)
        Wg = w[None, :] * np.exp(logits - m)
        Z = Wg.sum(axis=1, keepdims=True)
        om = Wg / Z
        phi = (m[:, 0] + np.log(Z[:, 0])) / level
        ex = np.sum(om * Px, axis=1)
        exx = np.sum(om * Pxx, axis=1)
        var = np.sum(om * Px * Px, axis=1) - ex * ex
        cov = np.sum(om * Pxx * Px, axis=1) - exx * ex
        dev = Px - ex[:, None]
        m3 = np.sum(om * dev ** 3, axis=1)
        phi_x = ex
        phi_xx = exx + level * var
        phi_xxx = np.sum(om * Pxxx, axis=1) + 3.0 * level * cov + level ** 2 * m3
    return Frame(t_lo, float(x[0]), dx, phi, phi_x, phi_xx, phi_xxx)


def _gibbs_weights(upper: Frame, sigma: float, level: float, x: np.ndarray,
                   gh_order: int) -> tuple[np.ndarray, np.ndarray]:
    """Transition points X and normalized Doob weights for one layer."""
    g, w = gauss_hermite(gh_order)
    X = x[:, None] + sigma * g[None, :]
    if level <= 0.0:
        om = np.broadcast_to(w[None, :], X.shape)
        return X, om
    logits = level * upper.eval_phi(X)
    m = logits.max(axis=1, keepdims=True)
    Wg = w[None, :] * np.exp(logits - m)
    om = Wg / Wg.sum(axis=1, keepdims=True)
    return X, om


class PDESolution:
    """Layered solution of a Parisi PDE with an atomic order parameter.

    Attributes of note: `x_grid`, the uniform evaluation grid; `nodes` and
    `levels`, the piecewise-constant CDF of zeta; `boundary` in
    {"original", "band"}; `a`, the band tilt (0 for the original boundary).
    """

    def __init__(self, *, sp, spp, int_sp, interval, nodes, levels,
                 boundary: str, a: float, config: SolverConfig,
                 zeta: OrderParameter | None = None):
        self.sp = sp            # xi'(t) along the solve interval
        self.spp = spp          # xi''(t)
        self.int_sp = int_sp    # xi(t): antiderivative of sp
        self.zeta = zeta        # measure form, when constructed from one
        self.boundary = boundary
        self.a = float(a)
        self.config = config
        t0, t1 = interval
        self.t0, self.t1 = float(t0), float(t1)
        self.nodes = np.asarray(nodes, dtype=float)
        self.levels = np.asarray(levels, dtype=float)
        if self.nodes.size != self.levels.size + 1:
            raise ValueError("need one more node than levels")
        if np.any(np.diff(self.nodes) < -1e-12) or np.any(np.diff(self.levels) < -1e-12):
            raise ValueError("nodes and levels must be nondecreasing")
        if np.any(self.levels < -1e-12) or np.any(self.levels > 1.0 + 1e-12):
            raise ValueError("levels must lie in [0, 1]")
        var_total = max(self.sp(self.t1) - self.sp(self.t0), 0.0)
        if config.x_max is not None:
            x_max = config.x_max + config.x_pad
        else:
            x_max = 6.0 + 4.0 * math.sqrt(var_total) + abs(a) + config.x_pad
        n = int(math.ceil(x_max / config.dx))
        self.x_grid = config.dx * np.arange(-n, n + 1)
        self._frames: dict[float, Frame] = {}
        self._level_grads: dict[int, np.ndarray] | None = None
        self._solve()

    # -- construction -----------------------------------------------------

    @staticmethod
    def _key(t: float) -> float:
        return round(float(t), 12)

    def _level_at(self, t: float) -> float:
        """CDF value governing the layer [t, next node)."""
        if t >= self.t1 - 1e-13:
            return float(self.levels[-1])
        idx = int(np.searchsorted(self.nodes, t + 1e-13, side="right")) - 1
        idx = min(max(idx, 0), len(self.levels) - 1)
        return float(self.levels[idx])

    def _solve(self) -> None:
        x = self.x_grid
        self._frames[self._key(self.t1)] = _boundary_frame(
            self.boundary, self.a, self.t1, x)
        for p in range(len(self.levels) - 1, -1, -1):
            t_hi, t_lo = float(self.nodes[p + 1]), float(self.nodes[p])
            sigma = math.sqrt(max(self.sp(t_hi) - self.sp(t_lo), 0.0))
            upper = self._frames[self._key(t_hi)]
            fr = _gibbs_step(upper, t_lo, sigma, float(self.levels[p]), x,
                             self.config.gh_order)
            self._frames[self._key(t_lo)] = fr
        top = self._frames[self._key(self.t0)]
        edge = max(abs(top.phi_xx[0]), abs(top.phi_xx[-1]))
        if edge > self.config.edge_curvature_tol:
            raise RuntimeError(
                f"x grid too small: boundary influence {edge:.2e} at the edge")

    def frame_at(self, t: float, cache: bool = True) -> Frame:
        """Solved frame at time t (sub-layer recursion for off-node t)."""
        key = self._key(t)
        if key in self._frames:
            return self._frames[key]
        if not self.t0 - 1e-12 <= t <= self.t1 + 1e-12:
            raise ValueError(f"time {t} outside [{self.t0}, {self.t1}]")
        idx = int(np.searchsorted(self.nodes, t + 1e-13, side="left"))
        idx = min(idx, len(self.nodes) - 1)
        t_up = float(self.nodes[idx])
        upper = self._frames[self._key(t_up)]
        sigma = math.sqrt(max(self.sp(t_up) - self.sp(t), 0.0))
        fr = _gibbs_step(upper, float(t), sigma, self._level_at(t),
                         self.x_grid, self.config.gh_order)
        if cache:
            self._frames[key] = fr
        return fr

    # -- evaluation ---------------------------------------------------------

    def _check_x(self, x: np.ndarray) -> np.ndarray:
        if np.any(np.abs(x) > self.x_grid[-1] + 1e-12):
            raise ValueError(
                f"evaluation beyond the solved grid |x| <= {self.x_grid[-1]:g}; "
                "enlarge x_max or x_pad")
        return x

    def phi(self, t: float, x):
        return self.frame_at(t).eval_phi(self._check_x(np.asarray(x, dtype=float)))

    def phi_x(self, t: float, x):
        return self.frame_at(t).eval_phi_x(self._check_x(np.asarray(x, dtype=float)))

    def phi_xx(self, t: float, x):
        return self.frame_at(t).eval_phi_xx(self._check_x(np.asarray(x, dtype=float)))

    def inverse_phi_x(self, t: float, a: float) -> float:
        """Unique x with Phi_x(t, x) = a (Phi_x is strictly increasing)."""
        fr = self.frame_at(t)
        lo, hi = fr.phi_x[0], fr.phi_x[-1]
        if not lo < a < hi:
            raise RuntimeError(
                f"target slope {a} outside grid range ({lo:.6f}, {hi:.6f})")
        x = float(np.interp(a, fr.phi_x, self.x_grid))
        for _ in range(4):
            r = float(fr.eval_phi_x(x)) - a
            c = float(fr.eval_phi_xx(x))
            if c <= 0:
                break
            step = r / c
            x -= step
            if abs(step) < self.config.bisect_tol:
                break
        if abs(float(fr.eval_phi_x(x)) - a) > 10.0 * self.config.bisect_tol:
            lo_x, hi_x = float(self.x_grid[0]), float(self.x_grid[-1])
            for _ in range(200):
                mid = 0.5 * (lo_x + hi_x)
                if float(fr.eval_phi_x(mid)) < a:
                    lo_x = mid
                else:
                    hi_x = mid
                if hi_x - lo_x < self.config.bisect_tol:
                    break
            x = 0.5 * (lo_x + hi_x)
        return x

    # -- exact integrals of the order parameter ------------------------------

    def int_xi_pp_zeta(self, t: float | None = None) -> float:
        """Integral of xi''(s) zeta(s) ds from t (default t0) to t1."""
        t = self.t0 if t is None else float(t)
        total = 0.0
        for p in range(len(self.levels)):
            lo, hi = float(self.nodes[p]), float(self.nodes[p + 1])
            if hi <= t:
                continue
            lo = max(lo, t)
            total += self.levels[p] * (self.sp(hi) - self.sp(lo))
        return float(total)

    def int_s_xi_pp_zeta(self) -> float:
        """Integral of s xi''(s) zeta(s) ds over [t0, t1], via the exact
        antiderivative s xi'(s) - xi(s) of s xi''(s)."""

        def theta(s):
            return s * self.sp(s) - self.int_sp(s)

        total = 0.0
        for p in range(len(self.levels)):
            lo, hi = float(self.nodes[p]), float(self.nodes[p + 1])
            total += self.levels[p] * (theta(hi) - theta(lo))
        return float(total)

    def int_zeta(self) -> float:
        """Integral of zeta(s) ds over [t0, t1]."""
        return float(np.sum(self.levels * np.diff(self.nodes)))

    # -- level sensitivities --------------------------------------------------

    def level_gradients(self) -> np.ndarray:
        """d Phi(t0, x) / d level_p as grid functions, shape (r, n_grid).

        Forward-mode differentiation of the layered recursion: the explicit
        derivative in a layer's own level is (<Phi> - Phi)/z (variance/2 in
        the z -> 0 limit), and sensitivities from layers closer to the
        boundary propagate down by Gibbs averaging.
        """
        if self._level_grads is None:
            self._compute_level_gradients()
        r = len(self.levels)
        return np.stack([self._level_grads[p] for p in range(r)])

    def _compute_level_gradients(self) -> None:
        x = self.x_grid
        gh = self.config.gh_order
        dx = self.config.dx
        sens: dict[int, np.ndarray] = {}
        for p in range(len(self.levels) - 1, -1, -1):
            t_hi, t_lo = float(self.nodes[p + 1]), float(self.nodes[p])
            sigma = math.sqrt(max(self.sp(t_hi) - self.sp(t_lo), 0.0))
            upper = self._frames[self._key(t_hi)]
            lower = self._frames[self._key(t_lo)]
            level = float(self.levels[p])
            if sigma <= 1e-14:
                new_sens = dict(sens)
                new_sens[p] = np.zeros_like(x)
                sens = new_sens
                continue
            X, om = _gibbs_weights(upper, sigma, level, x, gh)
            P = upper.eval_phi(X)
            mean_p = np.sum(om * P, axis=1)
            if level > 0.0:
                own = (mean_p - lower.phi) / level
            else:
                own = 0.5 * (np.sum(om * P * P, axis=1) - mean_p ** 2)
            new_sens = {p: own}
            for j, S in sens.items():
                Sd = grid_derivative(S, dx)
                SX = hermite_eval(float(x[0]), dx, S, Sd, X)
                new_sens[j] = np.sum(om * SX, axis=1)
            sens = new_sens
        self._level_grads = sens

    # -- pathwise expectations -------------------------------------------------

    def path_expectation(self, s: float, f_values: np.ndarray, x_start):
        """E f(X_s) for the optimal-control diffusion started at (t0, x).

        `f_values` holds f on the x grid at time s. The expectation is pulled
        back with the exact layer transition kernels (Doob weights), so the
        result is deterministic up to quadrature error.
        """
        if not self.t0 - 1e-12 <= s <= self.t1 + 1e-12:
            raise ValueError("measurement time outside the solved interval")
        x = self.x_grid
        gh = self.config.gh_order
        dx = self.config.dx
        f_cur = np.asarray(f_values, dtype=float)
        t_cur = float(s)
        while t_cur > self.t0 + 1e-13:
            idx = int(np.searchsorted(self.nodes, t_cur - 1e-13, side="left")) - 1
            idx = max(idx, 0)
            t_lo = float(self.nodes[idx])
            upper = self.frame_at(t_cur)
            level = self._level_at(t_lo)
            sigma = math.sqrt(max(self.sp(t_cur) - self.sp(t_lo), 0.0))
            if sigma > 1e-14:
                X, om = _gibbs_weights(upper, sigma, level, x, gh)
                fd = grid_derivative(f_cur, dx)
                fX = hermite_eval(float(x[0]), dx, f_cur, fd, X)
                f_cur = np.sum(om * fX, axis=1)
            t_cur = t_lo
        fd = grid_derivative(f_cur, dx)
        return hermite_eval(float(x[0]), dx, f_cur, fd,
                            np.asarray(x_start, dtype=float))

    def phi_x_table(self, t: float) -> np.ndarray:
        """Phi_x on the grid at time t, without derivative bookkeeping.

        Cheaper than frame_at for the many drift evaluations of the SDE
        simulator; exact same Gibbs-weighted recursion, first moment only.
        """
        key = self._key(t)
        if key in self._frames:
            return self._frames[key].phi_x
        idx = int(np.searchsorted(self.nodes, t + 1e-13, side="left"))
        idx = min(idx, len(self.nodes) - 1)
        t_up = float(self.nodes[idx])
        upper = self._frames[self._key(t_up)]
        sigma = math.sqrt(max(self.sp(t_up) - self.sp(t), 0.0))
        if sigma <= 1e-14:
            return upper.phi_x
        X, om = _gibbs_weights(upper, sigma, self._level_at(t), self.x_grid,
                               self.config.gh_order)
        return np.sum(om * upper.eval_phi_x(X), axis=1)

    def expected_u_squared(self, s: float, x_start):
        """E[(Phi_x(s, X_s))^2] started from (t0, x_start)."""
        fr = self.frame_at(s)
        return self.path_expectation(s, fr.phi_x ** 2, x_start)

    def expected_uxx_squared(self, s: float, x_start):
        """E[(Phi_xx(s, X_s))^2] started from (t0, x_start)."""
        fr = self.frame_at(s)
        return self.path_expectation(s, fr.phi_xx ** 2, x_start)


def solve(model: MixedModel, zeta: OrderParameter,
          config: SolverConfig = DEFAULT_CONFIG) -> PDESolution:
    """Original-boundary Parisi PDE on zeta.interval (inside [0, 1])."""
    t0, t1 = zeta.interval
    if t0 < -1e-12 or t1 > 1.0 + 1e-12:
        raise ValueError("original-boundary solve needs an interval inside [0, 1]")
    return PDESolution(sp=model.xi_prime, spp=model.xi_double_prime,
                       int_sp=model.xi, interval=zeta.interval,
                       nodes=zeta.nodes, levels=zeta.levels, zeta=zeta,
                       boundary="original", a=0.0, config=config)


def solve_steps(model: MixedModel, interval, nodes, levels,
                config: SolverConfig = DEFAULT_CONFIG) -> PDESolution:
    """Original-boundary solve from an explicit CDF step function.

    Unlike `solve`, zero-mass pieces are kept, which preserves the slot
    structure needed by level_gradients during optimization.
    """
    return PDESolution(sp=model.xi_prime, spp=model.xi_double_prime,
                       int_sp=model.xi, interval=interval, nodes=nodes,
                       levels=levels, boundary="original", a=0.0,
                       config=config)


def solve_band(shifted: ShiftedModel, a: float, zeta: OrderParameter,
               config: SolverConfig = DEFAULT_CONFIG) -> PDESolution:
    """Band-boundary Parisi PDE on [0, 1-q]: boundary log2 - ax + logcosh x."""
    t0, t1 = zeta.interval
    if abs(t0) > 1e-12 or t1 > shifted.horizon + 1e-9:
        raise ValueError("band solve requires zeta on [0, 1-q]")
    return PDESolution(sp=shifted.xi_q_prime, spp=shifted.xi_q_double_prime,
                       int_sp=shifted.xi_q, interval=zeta.interval,
                       nodes=zeta.nodes, levels=zeta.levels, zeta=zeta,
                       boundary="band", a=float(a), config=config)


def unify(original_sol: PDESolution, a: float, x):
    """Map an original-boundary solution to the matching band value.

    With I = int_{t0}^{t1} xi'' zeta ds, the band solution with tilt a and
    shifted order parameter equals Phi(t0, x - a I) - a x + (a^2/2) I.
    """
    if original_sol.boundary != "original":
        raise ValueError("unify expects an original-boundary solution")
    I = original_sol.int_xi_pp_zeta()
    x = np.asarray(x, dtype=float)
    return original_sol.phi(original_sol.t0, x - a * I) - a * x + 0.5 * a * a * I


def simulate_control(sol: PDESolution, x0: float, n_paths: int,
                     n_steps: int | None = None, seed: int = 0,
                     times=None, antithetic: bool = True) -> dict:
    """Euler-Maruyama sample of the optimal-control SDE.

    Returns means and standard errors of u(s)^2 = Phi_x(s, X_s)^2 and of
    Phi_xx(s, X_s)^2 at the requested times (default: the nodes of zeta),
    plus the raw per-path u^2 samples. Diffusion increments use the exact
    variance xi'(t + dt) - xi'(t); the drift is explicit Euler, O(dt) bias.
    """
    cfg = sol.config
    n_steps = n_steps or cfg.sde_steps
    if times is None:
        times = [float(t) for t in sol.nodes]
    times_set = {PDESolution._key(t) for t in times}
    grid = np.unique(np.concatenate(
        [np.linspace(sol.t0, sol.t1, n_steps + 1),
         np.asarray(sorted(times_set), dtype=float)]))
    rng = np.random.default_rng(seed)
    half = (n_paths + 1) // 2 if antithetic else n_paths
    n_all = 2 * half if antithetic else half
    X = np.full(n_all, float(x0))

    measured_u2: dict[float, np.ndarray] = {}
    measured_c2: dict[float, np.ndarray] = {}

    def measure(t, Xcur):
        fr = sol.frame_at(t)
        u = fr.eval_phi_x(Xcur)
        c = fr.eval_phi_xx(Xcur)
        measured_u2[PDESolution._key(t)] = u * u
        measured_c2[PDESolution._key(t)] = c * c

    if PDESolution._key(grid[0]) in times_set:
        measure(float(grid[0]), X)
    xlim = float(sol.x_grid[-1]) - 0.5
    x0g, dxg = float(sol.x_grid[0]), sol.config.dx
    for k in range(len(grid) - 1):
        t, t_next = float(grid[k]), float(grid[k + 1])
        dt = t_next - t
        if dt <= 0:
            continue
        slope = linear_eval(x0g, dxg, sol.phi_x_table(t), X)
        drift = sol.spp(t) * sol._level_at(t) * slope
        sig = math.sqrt(max(sol.sp(t_next) - sol.sp(t), 0.0))
        z = rng.standard_normal(half)
        z = np.concatenate([z, -z]) if antithetic else z
        X = X + drift * dt + sig * z
        if np.any(np.abs(X) > xlim):
            raise RuntimeError("SDE path escaped the solver grid; enlarge x_max")
        if PDESolution._key(t_next) in times_set:
            measure(t_next, X)

    def pair_stats(vals):
        v = 0.5 * (vals[:half] + vals[half:]) if antithetic else vals
        mean = float(np.mean(v))
        se = float(np.std(v, ddof=1) / math.sqrt(v.size)) if v.size > 1 else 0.0
        return mean, se

    out = {"times": [], "u2_mean": [], "u2_se": [], "cxx2_mean": [],
           "cxx2_se": [], "samples_u2": measured_u2, "n_paths": n_all,
           "half": half, "antithetic": antithetic}
    for key in sorted(times_set):
        if key not in measured_u2:
            continue
        m, s = pair_stats(measured_u2[key])
        mc, sc = pair_stats(measured_c2[key])
        out["times"].append(key)
        out["u2_mean"].append(m)
        out["u2_se"].append(s)
        out["cxx2_mean"].append(mc)
        out["cxx2_se"].append(sc)
    return out


def second_derivative_identity(sol: PDESolution, x0: float,
                               n_paths: int = 100_000, seed: int = 0,
                               n_steps: int | None = None) -> dict:
    """Monte-Carlo check of Phi_xx(t0, x0) = 1 - int E[u(l)^2] dzeta(l).

    The measure integral runs over the atoms of zeta (an atom at the right
    endpoint contributes through the boundary derivative). Returns both
    sides, the discrepancy, and its standard error.
    """
    if sol.zeta is None:
        raise ValueError("solution was built without a measure-form zeta")
    atoms = sol.zeta.measure.atoms
    times = [loc for loc, _ in atoms]
    mc = simulate_control(sol, x0, n_paths, n_steps=n_steps, seed=seed,
                          times=times)
    half = mc["half"]
    total = None
    for loc, wt in atoms:
        vals = mc["samples_u2"][PDESolution._key(loc)]
        if mc["antithetic"]:
            vals = 0.5 * (vals[:half] + vals[half:])
        total = wt * vals if total is None else total + wt * vals
    rhs = 1.0 - float(np.mean(total))
    se = float(np.std(total, ddof=1) / math.sqrt(total.size))
    lhs = float(sol.phi_xx(sol.t0, x0))
    err = abs(lhs - rhs)
    if se > 0.0:
        n_sigma = err / se
    else:
        n_sigma = 0.0 if err <= 1e-9 else math.inf   # deterministic corner
    return {"lhs": lhs, "rhs": rhs, "se": se, "abs_err": err,
            "n_sigma": n_sigma}


def parisi_functional(model: MixedModel, zeta: OrderParameter,
                      config: SolverConfig = DEFAULT_CONFIG) -> float:
    """P(zeta) = Phi_zeta(0, 0) - (1/2) int_0^1 s xi''(s) zeta(s) ds."""
    t0, t1 = zeta.interval
    if abs(t0) > 1e-12 or abs(t1 - 1.0) > 1e-12:
        raise ValueError("the Parisi functional needs zeta on [0, 1]")
    sol = solve(model, zeta, config)
    return float(sol.phi(0.0, 0.0)) - 0.5 * sol.int_s_xi_pp_zeta()


def parisi_measure(model: MixedModel, r_atoms: int = 3,
                   config: SolverConfig = DEFAULT_CONFIG,
                   seed: int | None = None):
    """Minimize the Parisi functional over r-atom order parameters on [0, 1].

    Delegates to the TAP variational machinery at mu = delta_0, for which
    the two functionals coincide. Returns (zeta_star, info).
    """
    from .measures import DiscreteMeasure
    from .tap import tap_correction

    mu0 = DiscreteMeasure.delta(0.0, interval=(0.0, 1.0))
    res = tap_correction(model, mu0, r_atoms=r_atoms, config=config, seed=seed)
    info = {"value": res.value, "diagnostics": res.diagnostics}
    return res.minimizer_zeta, info
