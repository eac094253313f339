"""Effective Hamiltonians for the kinetic eikonal problem.

The central object is the scalar H(p) solving the dispersion relation

    integral M(v) / (1 + H - v.p) dv = 1,

with H(0) = 0, H convex, even, and |H'| <= v_max.  Alongside the implicit
solver there are closed-form sources (the coth profile of the uniform
measure, the two-speed relativistic form, the classical quadratic) behind
one interface, plus the dual profile L = H*, the cell eigenfunction
Q(v) = 1/(1 + H - v.p) and the phase corrector eta(v).

The integrand of the dispersion relation develops a pole just outside the
velocity interval when v_max |p| is large (the gap 1 + H - v_max |p| decays
exponentially for the uniform measure), so the implicit solver re-solves on
panel-refined quadratures until the smallest panel resolves the pole
distance.  Eigenfunction and corrector live on the model's own node set:
their identities are exact for the discrete rule, whatever its fidelity to
the continuum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .velocity import VelocityModel, build_uniform_maxwellian, parse_velocity_spec, refine_near

MAX_REFINE_LEVELS = 40    # beyond ~44 the innermost panel node rounds onto v_max
_REFINE_THRESHOLD = 0.15  # pole distance below this fraction of v_max wants panels
_UNDERRESOLVED = 1e-6     # residual this far below zero at the lower bracket = bad quadrature


class NumericalError(RuntimeError):
    """A solver failed to reach its tolerance (as opposed to bad input)."""


class _PoleUnresolved(Exception):
    pass


def _dispersion_terms(weights, vp, h):
    """Residual F(h) = sum w/(1+h-v.p) - 1 and its h-derivative, batched."""
    d = 1.0 + h[:, None] - vp
    inv = weights / d
    f = inv.sum(axis=1) - 1.0
    fp = -(inv / d).sum(axis=1)
    return f, fp


def _velocity_dot(nodes, p_batch):
    if nodes.ndim == 1:
        return np.outer(p_batch, nodes)
    return p_batch @ nodes.T


def _solve_dispersion(nodes, weights, p_batch, tol):
    """Root of the dispersion relation for each covector in the batch.

    Bracketed bisection to a safe width, then Newton with the analytic
    derivative; the bracket is kept so Newton can never escape.
    """
    vp = _velocity_dot(nodes, p_batch)
    m = vp.shape[0]
    lb = np.maximum(0.0, vp.max(axis=1) - 1.0)  # H >= max(0, max v.p - 1) always
    # the bound itself can be the root (p = 0 gives F(0) = sum w - 1); keep it
    # exact instead of letting the probe offset leak in
    with np.errstate(divide="ignore", invalid="ignore"):
        f_lb, _ = _dispersion_terms(weights, vp, lb)
    lb_exact = np.isfinite(f_lb) & (np.abs(f_lb) <= 0.25 * tol)
    delta = 1e-13 * np.maximum(1.0, lb)
    probe = lb + delta
    f_probe, _ = _dispersion_terms(weights, vp, probe)

    pinched = f_probe <= 0.0
    bad = f_probe < -_UNDERRESOLVED
    if np.any(bad):
        offender = np.asarray(p_batch)[int(np.argmax(bad))]
        raise _PoleUnresolved(float(np.linalg.norm(np.atleast_1d(offender))))

    lo = lb.copy()
    hi = np.where(pinched, probe, lb + 1.0)
    # grow the upper end until the residual goes negative; H <= v_max |p| keeps this short
    offset = np.ones(m)
    for _ in range(64):
        f_hi, _ = _dispersion_terms(weights, vp, hi)
        open_up = (f_hi >= 0.0) & ~pinched
        if not np.any(open_up):
            break
        offset = np.where(open_up, offset * 2.0, offset)
        hi = np.where(open_up, lb + offset, hi)
    else:
        raise NumericalError("dispersion residual never went negative while doubling "
                             "the upper bracket; the velocity model looks invalid")

    # bisect to a width Newton can polish from
    for _ in range(90):
        width = hi - lo
        if np.all(width <= 1e-6 * np.maximum(1.0, np.abs(hi))):
            break
        mid = 0.5 * (lo + hi)
        f_mid, _ = _dispersion_terms(weights, vp, mid)
        go_up = f_mid >= 0.0
        lo = np.where(go_up, mid, lo)
        hi = np.where(go_up, hi, mid)

    h = 0.5 * (lo + hi)
    for _ in range(60):
        f, fp = _dispersion_terms(weights, vp, h)
        # done when the residual is small, or the bracket has collapsed to
        # machine width: near a hard pole F' ~ 1/gap makes the residual floor
        # unreachable even though h itself is exact to rounding
        if np.all((np.abs(f) <= 0.25 * tol) |
                  (hi - lo <= 8.0 * np.finfo(float).eps * np.maximum(1.0, np.abs(h)))):
            return np.where(lb_exact, lb, h)
        lo = np.where(f >= 0.0, np.maximum(lo, h), lo)
        hi = np.where(f < 0.0, np.minimum(hi, h), hi)
        step = np.where(fp < 0.0, f / fp, 0.0)
        nxt = h - step
        inside = (nxt > lo) & (nxt < hi)
        h = np.where(inside, nxt, 0.5 * (lo + hi))
    # a stall means the residual floor of this quadrature sits above the
    # tolerance: same disease as a pinched probe, so report it the same way
    # and let the caller refine or give up
    offender = np.asarray(p_batch)[int(np.argmax(np.abs(f)))]
    raise _PoleUnresolved(float(np.linalg.norm(np.atleast_1d(offender))))


def _levels_for_pole(v_max: float, pole_dist: float) -> int:
    """Panel levels so the smallest panel is comparable to the pole distance."""
    if not (pole_dist < _REFINE_THRESHOLD * v_max):
        return 0
    ratio = v_max / max(pole_dist, 1e-300)
    return min(MAX_REFINE_LEVELS, int(math.ceil(math.log2(ratio))) + 1)


def _coth_pole_guess(v_max: float, p_abs: float) -> float:
    """Pole distance of the uniform measure, used as an a-priori guess."""
    P = v_max * p_abs
    if P < 1e-8:
        return float("inf")
    t = math.tanh(P)
    return v_max * (1.0 - t) / t


@dataclass(frozen=True)
class LegendreTable:
    """Sampled convex dual L(q) = sup_p (p q - H(p)), +inf beyond the grid."""

    q: np.ndarray
    values: np.ndarray

    @property
    def q_max(self) -> float:
        return float(self.q[-1])

    def __call__(self, q):
        arr = np.asarray(q, dtype=float)
        out = np.interp(arr, self.q, self.values)
        out = np.where(np.abs(arr) > self.q[-1], np.inf, out)
        return float(out) if arr.ndim == 0 else out


@dataclass(frozen=True)
class CorrectorResult:
    """Velocity corrector eta with e^eta(v) = mu0 + (v0 - v).p on the nodes."""

    p: float | np.ndarray
    anchor_index: int
    mu0: float
    eta: np.ndarray


class Hamiltonian:
    """Convex effective Hamiltonian with interchangeable sources.

    Sources: "implicit" (dispersion solve on a VelocityModel), "coth"
    (uniform measure closed form), "relativistic" (two symmetric unit
    atoms), "classical" (theta2 p^2, unbounded speed).
    """

    def __init__(self, source, velocity=None, v_max=None, theta2=None,
                 root_tolerance=1e-12):
        if source not in ("implicit", "coth", "relativistic", "classical"):
            raise ValueError(f"unknown Hamiltonian source {source!r}")
        if source == "implicit":
            if velocity is None:
                raise ValueError("implicit source needs a VelocityModel")
            v_max = velocity.v_max
            theta2 = velocity.theta2 if velocity.nodes.ndim == 1 else None
        elif source == "coth":
            if not (v_max and v_max > 0):
                raise ValueError("coth source needs v_max > 0")
            theta2 = v_max * v_max / 3.0
        elif source == "relativistic":
            v_max = 1.0
            theta2 = 1.0
        else:  # classical
            if theta2 is None or theta2 <= 0:
                raise ValueError("classical source needs theta2 > 0")
            v_max = None
        if root_tolerance <= 0:
            raise ValueError("root_tolerance must be positive")
        self.source = source
        self.velocity = velocity
        self.v_max = v_max
        self.theta2 = theta2
        self.root_tolerance = root_tolerance
        self._quads: dict[int, VelocityModel] = {}

    # -- factories ---------------------------------------------------------
    @classmethod
    def implicit(cls, velocity: VelocityModel, root_tolerance=1e-12):
        return cls("implicit", velocity=velocity, root_tolerance=root_tolerance)

    @classmethod
    def closed_coth(cls, v_max: float = 1.0):
        return cls("coth", v_max=v_max)

    @classmethod
    def closed_relativistic(cls):
        return cls("relativistic")

    @classmethod
    def classical_eikonal(cls, theta2: float):
        return cls("classical", theta2=theta2)

    @property
    def speed_cap(self):
        """Global bound on |H'|, None for the classical source."""
        return self.v_max

    # -- evaluation --------------------------------------------------------
    def _batch(self, p):
        arr = np.asarray(p, dtype=float)
        if self.source == "implicit" and self.velocity.nodes.ndim == 2:
            d = self.velocity.nodes.shape[1]
            if arr.shape == (d,):
                return arr[None, :], True
            if arr.ndim == 2 and arr.shape[1] == d:
                return arr, False
            raise ValueError(f"p must be a covector of dimension {d} or a batch of them")
        if arr.ndim == 0:
            return arr.reshape(1), True
        if arr.ndim == 1:
            return arr, False
        raise ValueError("p must be a scalar or a 1-D batch of scalars")

    def value(self, p):
        """H(p); accepts a scalar (or covector) or a batch."""
        batch, single = self._batch(p)
        if self.source == "implicit":
            h = self._solve_implicit(batch)[0]
        elif self.source == "coth":
            h = _coth_value(self.v_max, batch)
        elif self.source == "relativistic":
            h = 2.0 * batch * batch / (1.0 + np.sqrt(1.0 + 4.0 * batch * batch))
        else:
            h = self.theta2 * batch * batch
        return float(h[0]) if single else h

    def grad(self, p):
        """dH/dp, same batching rules as value()."""
        return self.derivatives(p)[1]

    def derivatives(self, p):
        """(H, dH, d2H) from the moment identities or closed forms."""
        batch, single = self._batch(p)
        if self.source == "implicit":
            h, quad = self._solve_implicit(batch)
            vp = _velocity_dot(quad.nodes, batch)
            d = 1.0 + h[:, None] - vp
            w2 = quad.weights / (d * d)
            w3 = w2 / d
            i2 = w2.sum(axis=1)
            if quad.nodes.ndim == 1:
                grad = (w2 * quad.nodes).sum(axis=1) / i2
                diff = grad[:, None] - quad.nodes[None, :]
                hess = 2.0 * (w3 * diff * diff).sum(axis=1) / i2
            else:
                grad = (w2[:, :, None] * quad.nodes[None, :, :]).sum(axis=1) / i2[:, None]
                diff = grad[:, None, :] - quad.nodes[None, :, :]
                hess = 2.0 * np.einsum("mn,mni,mnj->mij", w3, diff, diff) / i2[:, None, None]
        elif self.source == "coth":
            h, grad, hess = _coth_derivatives(self.v_max, batch)
        elif self.source == "relativistic":
            root = np.sqrt(1.0 + 4.0 * batch * batch)
            h = 2.0 * batch * batch / (1.0 + root)
            grad = 2.0 * batch / root
            hess = 2.0 / root ** 3
        else:
            h = self.theta2 * batch * batch
            grad = 2.0 * self.theta2 * batch
            hess = np.full_like(batch, 2.0 * self.theta2)
        if single:
            return float(h[0]), (grad[0] if np.ndim(grad) > 1 else float(grad[0])), \
                (hess[0] if np.ndim(hess) > 2 else float(hess[0]))
        return h, grad, hess

    # -- implicit machinery --------------------------------------------------
    def _refined(self, levels: int) -> VelocityModel:
        if levels == 0:
            return self.velocity
        quad = self._quads.get(levels)
        if quad is None:
            quad = refine_near(self.velocity, self.velocity.v_max, levels)
            self._quads[levels] = quad
        return quad

    def _solve_implicit(self, batch):
        vm = self.velocity
        tol = self.root_tolerance
        if vm.kind == "discrete" or vm.nodes.ndim == 2:
            try:
                return _solve_dispersion(vm.nodes, vm.weights, batch, tol), vm
            except _PoleUnresolved as exc:
                raise NumericalError(
                    f"dispersion root pinched against the speed line near |p|={exc.args[0]:g}; "
                    "the root is not resolvable in double precision") from None
        speeds = np.abs(batch) if batch.ndim == 1 else np.linalg.norm(batch, axis=1)
        p_top = float(speeds.max(initial=0.0))
        levels = _levels_for_pole(vm.v_max, _coth_pole_guess(vm.v_max, p_top))
        for _ in range(8):
            quad = self._refined(levels)
            try:
                h = _solve_dispersion(quad.nodes, quad.weights, batch, tol)
            except _PoleUnresolved as exc:
                if levels >= MAX_REFINE_LEVELS:
                    raise NumericalError(
                        f"quadrature cannot resolve the dispersion pole near |p|={exc.args[0]:g} "
                        "even at maximum panel refinement; reduce |p|") from None
                levels = min(MAX_REFINE_LEVELS, levels + 8)
                continue
            # re-solve if the actual pole distance asks for deeper panels
            gap = 1.0 + h - vm.v_max * speeds
            with np.errstate(divide="ignore", invalid="ignore"):
                dist = np.where(speeds > 0, gap / speeds, np.inf)
            need = _levels_for_pole(vm.v_max, float(dist.min(initial=np.inf)))
            if need <= levels:
                return h, quad
            levels = need
        raise NumericalError("panel refinement for the dispersion solve did not stabilize")

    # -- dual profile --------------------------------------------------------
    def legendre_table(self, q_count: int = 201, p_span: float = 20.0,
                       p_count: int = 4001) -> LegendreTable:
        """Tabulate L(q) = sup_p (p q - H(p)) by dense maximization.

        Counts must be odd so both grids contain 0 and are symmetric; the
        q range stays strictly inside the reachable speeds so the sup is
        attained at interior p (checked; failure asks for a larger span).
        """
        if not (p_span > 0):
            raise ValueError("p_span must be positive")
        for name, count in (("q_count", q_count), ("p_count", p_count)):
            if count < 3 or count % 2 == 0:
                raise ValueError(f"{name} must be an odd integer >= 3")
        if self.source == "classical":
            q_max = 0.999 * 2.0 * self.theta2 * p_span
        else:
            q_max = 0.999 * self.v_max
        # integer multiples of the step keep 0 exact and the grid bitwise odd
        q_grid = (q_max / (q_count // 2)) * np.arange(-(q_count // 2), q_count // 2 + 1)
        p_grid = (p_span / (p_count // 2)) * np.arange(-(p_count // 2), p_count // 2 + 1)
        h_vals = self.value(p_grid)
        vals = np.empty(q_count)
        hit_edge = False
        for start in range(0, q_count, 256):
            block = q_grid[start:start + 256]
            scores = block[:, None] * p_grid[None, :] - h_vals[None, :]
            idx = scores.argmax(axis=1)
            vals[start:start + len(block)] = scores[np.arange(len(block)), idx]
            hit_edge = hit_edge or bool(np.any((idx == 0) | (idx == len(p_grid) - 1)))
        if hit_edge:
            raise NumericalError("Legendre maximization reached the p-grid boundary; "
                                 "increase p_span")
        mid = q_count // 2
        if abs(vals[mid]) > 1e-10:
            raise NumericalError(f"L(0) = {vals[mid]!r} should vanish; Hamiltonian "
                                 "values look off at p=0")
        if np.max(np.abs(vals - vals[::-1])) > 1e-10:
            raise NumericalError("dual profile lost its symmetry")
        if q_count >= 3 and np.min(vals[:-2] - 2.0 * vals[1:-1] + vals[2:]) < -1e-10:
            raise NumericalError("dual profile lost convexity")
        return LegendreTable(q_grid, vals)


def _coth_value(v_max, batch):
    P = v_max * np.asarray(batch, dtype=float)
    aP = np.abs(P)
    P2 = P * P
    series = P2 / 3.0 - P2 * P2 / 45.0
    big = aP - 1.0  # coth saturates, exact to below eps for |P| > 30
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.tanh(P)
        full = (P - t) / t  # cancellation-free form of P coth P - 1
    return np.where(aP < 1e-3, series, np.where(aP > 30.0, big, full))


def _coth_derivatives(v_max, batch):
    P = v_max * np.asarray(batch, dtype=float)
    aP = np.abs(P)
    h = _coth_value(v_max, batch)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        sh2 = np.sinh(P) ** 2
        g_full = 1.0 / np.tanh(P) - P / sh2
        k_full = 2.0 * (h) / sh2
    g_series = 2.0 * P / 3.0 - 4.0 * P ** 3 / 45.0
    k_series = 2.0 / 3.0 - 4.0 * P * P / 15.0
    grad = np.where(aP < 1e-3, g_series, np.where(aP > 30.0, np.sign(P), g_full))
    hess = np.where(aP < 1e-3, k_series, np.where(aP > 30.0, 0.0, k_full))
    return h, v_max * grad, v_max * v_max * hess


# -- operations on the raw node set -----------------------------------------

def bracket(velocity: VelocityModel, p) -> tuple[float, float]:
    """Initial root bracket for the dispersion relation on this node set.

    Lower end sits a machine nudge above max(0, max v.p - 1); the upper end
    doubles away from it until the residual turns negative.
    """
    arr = np.asarray(p, dtype=float)
    vp = velocity.nodes @ arr if velocity.nodes.ndim == 2 else velocity.nodes * float(arr)
    lb = max(0.0, float(vp.max()) - 1.0)
    lo = lb + 64.0 * np.finfo(float).eps * max(1.0, abs(lb))
    offset = 1.0
    w = velocity.weights
    for _ in range(64):
        hi = lo + offset
        f = float(np.sum(w / (1.0 + hi - vp))) - 1.0
        if f < 0.0:
            return lo, hi
        offset *= 2.0
    raise NumericalError("no upper bracket for the dispersion root; model invalid")


def eigenfunction_q(velocity: VelocityModel, p, root_tolerance: float = 1e-12) -> np.ndarray:
    """Cell eigenfunction Q(v) = 1/(1 + H - v.p), normalized so integral M Q = 1.

    Solved on the model's own node set, so the eigenrelation
    (1 + H - v.p) Q = integral M Q holds there to the root tolerance.
    """
    arr = np.asarray(p, dtype=float)
    batch = arr.reshape(1, -1) if velocity.nodes.ndim == 2 else arr.reshape(1)
    try:
        h = _solve_dispersion(velocity.nodes, velocity.weights, batch, root_tolerance)
    except _PoleUnresolved:
        raise NumericalError("dispersion root not resolvable on this node set") from None
    vp = _velocity_dot(velocity.nodes, batch)
    return 1.0 / (1.0 + float(h[0]) - vp[0])


def solve_corrector(velocity: VelocityModel, p, anchor_index: int = 0,
                    root_tolerance: float = 1e-12) -> CorrectorResult:
    """Corrector eta on the nodes: e^eta(v) = mu0 + (v0 - v).p.

    mu0 is fixed by the renormalization integral M e^-eta dv = 1, found by
    the same bracketed bisection plus Newton used for the dispersion root;
    the pairwise differences e^eta(v) - e^eta(v') = (v' - v).p then hold by
    construction.
    """
    n = len(velocity.nodes)
    if not (0 <= anchor_index < n):
        raise ValueError(f"anchor_index {anchor_index} outside 0..{n - 1}")
    arr = np.asarray(p, dtype=float)
    nodes, w = velocity.nodes, velocity.weights
    if nodes.ndim == 2:
        shift = (nodes[anchor_index] - nodes) @ arr
    else:
        shift = (nodes[anchor_index] - nodes) * float(arr)
    lb = float(np.max(-shift))  # mu must keep every e^eta positive
    lo = lb + 1e-13 * max(1.0, abs(lb))

    def resid(mu):
        den = mu + shift
        f = float(np.sum(w / den)) - 1.0
        fp = -float(np.sum(w / (den * den)))
        return f, fp

    f_lo, _ = resid(lo)
    hi = lo
    if f_lo > 0.0:
        offset = 1.0
        for _ in range(64):
            hi = lo + offset
            f_hi, _ = resid(hi)
            if f_hi < 0.0:
                break
            offset *= 2.0
        else:
            raise NumericalError("no upper bracket for the corrector normalization")
    for _ in range(90):
        if hi - lo <= 1e-6 * max(1.0, abs(hi)):
            break
        mid = 0.5 * (lo + hi)
        if resid(mid)[0] >= 0.0:
            lo = mid
        else:
            hi = mid
    mu = 0.5 * (lo + hi)
    for _ in range(60):
        f, fp = resid(mu)
        if abs(f) <= 0.25 * root_tolerance:
            break
        if f >= 0.0:
            lo = max(lo, mu)
        else:
            hi = min(hi, mu)
        nxt = mu - f / fp if fp < 0.0 else 0.5 * (lo + hi)
        mu = nxt if lo < nxt < hi else 0.5 * (lo + hi)
    else:
        raise NumericalError("corrector normalization solve stalled above tolerance")
    eta = np.log(mu + shift)
    return CorrectorResult(p=arr if arr.ndim else float(arr), anchor_index=anchor_index,
                           mu0=mu, eta=eta)


def hamiltonian_from_spec(text: str) -> Hamiltonian:
    """CLI model strings: velocity specs plus closed-form shorthands.

    ``uniform:...`` and ``atoms:...`` build implicit models; ``coth:vmax=1``,
    ``relativistic`` and ``classical:theta2=0.25`` select closed forms.
    """
    text = text.strip()
    if text.startswith(("uniform:", "atoms:")):
        return Hamiltonian.implicit(parse_velocity_spec(text))
    if text.startswith("coth:"):
        key, _, val = text[len("coth:"):].partition("=")
        if key.strip() != "vmax":
            raise ValueError(f"coth spec needs vmax=<float>, got {text!r}")
        return Hamiltonian.closed_coth(float(val))
    if text == "relativistic":
        return Hamiltonian.closed_relativistic()
    if text.startswith("classical:"):
        key, _, val = text[len("classical:"):].partition("=")
        if key.strip() != "theta2":
            raise ValueError(f"classical spec needs theta2=<float>, got {text!r}")
        return Hamiltonian.classical_eikonal(float(val))
    raise ValueError(f"unknown model spec {text!r}")
