"""Velocity measures for BGK-type transport.

A velocity model is a symmetric probability measure on [-v_max, v_max]:
either a Gauss-Legendre discretization of the uniform density 1/(2 v_max)
("continuous") or a finite family of symmetric atoms ("discrete").  Every
velocity integral downstream goes through ``VelocityModel.integrate`` so
the reduction order is part of the contract.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, replace

import numpy as np

MASS_TOL = 1e-12  # weights must sum to 1 within this
PANEL_ORDER = 16  # Gauss-Legendre points per refined panel


def _leggauss(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    return x, w


@dataclass(frozen=True)
class VelocityModel:
    """Quadrature view of a symmetric velocity measure.

    nodes are ascending for scalar velocities, shape (n, d) for vector
    ones; weights are strictly positive and sum to one.  The node set is
    closed under v -> -v with equal weights (checked bitwise: builders
    construct by mirroring).
    """

    kind: str  # "continuous" or "discrete"
    nodes: np.ndarray
    weights: np.ndarray
    v_max: float

    def __post_init__(self):
        nodes = np.atleast_1d(np.asarray(self.nodes, dtype=float))
        weights = np.atleast_1d(np.asarray(self.weights, dtype=float))
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)
        if self.kind not in ("continuous", "discrete"):
            raise ValueError(f"unknown velocity model kind {self.kind!r}")
        if nodes.ndim not in (1, 2):
            raise ValueError("nodes must be scalars or vectors")
        if len(nodes) != len(weights) or weights.ndim != 1:
            raise ValueError("nodes and weights must align one to one")
        if len(nodes) < 2:
            raise ValueError("need at least two velocity nodes")
        if not (np.all(np.isfinite(nodes)) and np.all(np.isfinite(weights))):
            raise ValueError("nodes and weights must be finite")
        if np.any(weights <= 0.0):
            raise ValueError("weights must be strictly positive")
        total = float(weights.sum())
        if abs(total - 1.0) > MASS_TOL:
            raise ValueError(f"weights sum to {total!r}, expected 1 within {MASS_TOL}")
        if not (math.isfinite(self.v_max) and self.v_max > 0.0):
            raise ValueError("v_max must be positive and finite")
        speeds = np.abs(nodes) if nodes.ndim == 1 else np.linalg.norm(nodes, axis=1)
        top = float(speeds.max())
        if self.kind == "discrete":
            # atoms sit on the sphere boundary or inside it; the fastest one defines v_max
            if abs(top - self.v_max) > 1e-13 * max(1.0, self.v_max):
                raise ValueError("v_max must equal the largest atom speed")
        else:
            # Gauss nodes are interior points of (-v_max, v_max)
            if top >= self.v_max:
                raise ValueError("continuous nodes must lie strictly inside (-v_max, v_max)")
        self._check_symmetry(nodes, weights)

    @staticmethod
    def _check_symmetry(nodes, weights):
        # mirrored construction makes the reflected model equal bitwise
        if nodes.ndim == 1:
            order = np.argsort(nodes, kind="stable")
            mirror = np.argsort(-nodes, kind="stable")
        else:
            order = np.lexsort(nodes.T[::-1])
            mirror = np.lexsort((-nodes).T[::-1])
        if not (np.array_equal(nodes[order], -nodes[mirror])
                and np.array_equal(weights[order], weights[mirror])):
            raise ValueError("velocity measure must be symmetric: every node needs "
                             "a mirror node -v with equal weight")

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def theta2(self) -> float:
        """Second moment of the measure (scalar velocities only)."""
        if self.nodes.ndim != 1:
            raise ValueError("theta2 is defined for scalar velocity models")
        return self.integrate(self.nodes * self.nodes)

    def integrate(self, values) -> float:
        """Integrate node values against the measure.

        Accepts per-node values or a callable evaluated node by node.
        Accumulation runs in ascending node-index order; that order is a
        contract, results are bitwise stable across calls.
        """
        if callable(values):
            values = [values(v) for v in self.nodes]
        vals = np.asarray(values, dtype=float)
        if vals.shape != (len(self.nodes),):
            raise ValueError(f"expected {len(self.nodes)} node values, got shape {vals.shape}")
        total = 0.0
        for i in range(len(vals)):
            x = float(vals[i])
            if not math.isfinite(x):
                raise ValueError(f"integrand is not finite at node {i} (v={self.nodes[i]!r})")
            total += float(self.weights[i]) * x
        return total


def build_uniform_maxwellian(v_max: float, n_nodes: int) -> VelocityModel:
    """Gauss-Legendre rule for the uniform density 1/(2 v_max) on (-v_max, v_max).

    n_nodes must be even so nodes come in exact mirror pairs.
    """
    if not (math.isfinite(v_max) and v_max > 0.0):
        raise ValueError("v_max must be positive")
    if n_nodes < 2 or n_nodes % 2 != 0:
        raise ValueError("n_nodes must be an even integer >= 2")
    x, w = _leggauss(n_nodes)
    half = n_nodes // 2
    pos = x[half:] * v_max
    wpos = w[half:] * 0.5  # leggauss weights sum to 2; density folds in as 1/2
    nodes = np.concatenate([-pos[::-1], pos])
    weights = np.concatenate([wpos[::-1], wpos])
    return VelocityModel("continuous", nodes, weights, float(v_max))


def build_discrete_maxwellian(atoms) -> VelocityModel:
    """Velocity measure from (velocity, mass) pairs; must be symmetric."""
    atoms = list(atoms)
    if len(atoms) < 2:
        raise ValueError("need at least two atoms")
    vel = np.asarray([a[0] for a in atoms], dtype=float)
    mass = np.asarray([a[1] for a in atoms], dtype=float)
    if vel.ndim == 1:
        order = np.argsort(vel, kind="stable")
    else:
        order = np.lexsort(vel.T[::-1])
    vel, mass = vel[order], mass[order]
    speeds = np.abs(vel) if vel.ndim == 1 else np.linalg.norm(vel, axis=1)
    return VelocityModel("discrete", vel, mass, float(speeds.max()))


def _dyadic_breakpoints(a: float, b: float, toward_b: bool, levels: int):
    """Breakpoints of [a, b] with panel widths halving toward one end."""
    if toward_b:
        inner = [b - (b - a) * 0.5 ** k for k in range(1, levels + 1)]
        return [a] + inner + [b]
    inner = [a + (b - a) * 0.5 ** k for k in range(levels, 0, -1)]
    return [a] + inner + [b]


def refine_near(model: VelocityModel, v_star: float, levels: int) -> VelocityModel:
    """Rebuild a continuous model with panels accumulating toward +-|v_star|.

    levels=0 returns the model unchanged (identical node set).  Each panel
    carries a fixed-order Gauss rule; the panel set is mirror symmetric so
    all model invariants survive.  Discrete models have nothing to refine.
    """
    if model.kind != "discrete" and model.nodes.ndim != 1:
        raise ValueError("refinement is defined for scalar velocity models")
    if model.kind == "discrete":
        raise ValueError("refine_near applies to continuous models only")
    if levels < 0:
        raise ValueError("levels must be >= 0")
    if not math.isfinite(v_star) or abs(v_star) > model.v_max:
        raise ValueError("v_star must lie in [-v_max, v_max]")
    if levels == 0:
        return replace(model)

    V = model.v_max
    s = abs(float(v_star))
    # positive-half panels; the negative half is mirrored afterwards
    if s <= 1e-12 * V:
        pts = _dyadic_breakpoints(0.0, V, toward_b=False, levels=levels)
    elif s >= V * (1.0 - 1e-12):
        pts = _dyadic_breakpoints(0.0, V, toward_b=True, levels=levels)
    else:
        left = _dyadic_breakpoints(0.0, s, toward_b=True, levels=levels)
        right = _dyadic_breakpoints(s, V, toward_b=False, levels=levels)
        pts = left + right[1:]

    gx, gw = _leggauss(PANEL_ORDER)
    pos_nodes, pos_weights = [], []
    for a, b in zip(pts[:-1], pts[1:]):
        mid, half = 0.5 * (a + b), 0.5 * (b - a)
        pos_nodes.append(mid + half * gx)
        pos_weights.append(gw * half / (2.0 * V))
    pos_nodes = np.concatenate(pos_nodes)
    pos_weights = np.concatenate(pos_weights)
    nodes = np.concatenate([-pos_nodes[::-1], pos_nodes])
    weights = np.concatenate([pos_weights[::-1], pos_weights])
    return VelocityModel("continuous", nodes, weights, V)


_UNIFORM_RE = re.compile(r"^uniform:(.+)$")
_ATOMS_RE = re.compile(r"^atoms:(.+)$")
_PAIR_RE = re.compile(r"^\(([^()]*)\)$")


def parse_velocity_spec(text: str) -> VelocityModel:
    """Build a model from a spec string.

    Forms: ``uniform:vmax=1,n=64`` and ``atoms:(1,0.5);(-1,0.5)``.
    """
    text = text.strip()
    m = _UNIFORM_RE.match(text)
    if m:
        fields = {}
        for part in m.group(1).split(","):
            if "=" not in part:
                raise ValueError(f"bad uniform parameter {part!r}, expected key=value")
            key, _, val = part.partition("=")
            fields[key.strip()] = val.strip()
        extra = set(fields) - {"vmax", "n"}
        if extra or set(fields) != {"vmax", "n"}:
            raise ValueError("uniform spec needs exactly vmax=<float>,n=<even int>")
        try:
            v_max = float(fields["vmax"])
            n = int(fields["n"])
        except ValueError as exc:
            raise ValueError(f"bad uniform spec {text!r}: {exc}") from None
        return build_uniform_maxwellian(v_max, n)
    m = _ATOMS_RE.match(text)
    if m:
        pairs = []
        for chunk in m.group(1).split(";"):
            pm = _PAIR_RE.match(chunk.strip())
            if pm is None:
                raise ValueError(f"bad atom {chunk!r}, expected (velocity,mass)")
            try:
                v_str, w_str = pm.group(1).split(",")
                pairs.append((float(v_str), float(w_str)))
            except ValueError:
                raise ValueError(f"bad atom {chunk!r}, expected (velocity,mass)") from None
        return build_discrete_maxwellian(pairs)
    raise ValueError(f"unknown velocity model spec {text!r} "
                     "(expected uniform:vmax=...,n=... or atoms:(v,m);...)")
