"""Nonlocal kernel families h(x, y, s) and the derived weights g and kappa.

s is the magnitude of the pairwise field difference |f(x) - f(y)|; every
built-in family depends on x, y only through the separation |x - y|, which
makes the pair weight symmetric by construction. The derived weights are

    g     = h + s * dh/ds      (variation weight)
    kappa = h + (s/2) * dh/ds  (motion-equation weight)

and coincide with h whenever the family has no s dependence.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

FAMILIES = ("constant", "exponential", "exponential_modulated", "gaussian")


@dataclass(frozen=True)
class KernelSpec:
    """Parameters of a built-in kernel family.

    amplitude scales the whole kernel (and carries all dimensional
    bookkeeping; the solver treats everything as nondimensional reals).
    horizon is the attenuation length, unused by the constant family.
    modulation is the quadratic s-coefficient of exponential_modulated.
    central switches the long-range force to a central pair potential:
    the motion-equation weight acts on the coordinate field instead of
    the displacement (the kernel's s still comes from displacements).
    """

    family: str
    amplitude: float = 1.0
    horizon: float = 1.0
    modulation: float = 0.0
    central: bool = False

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown kernel family {self.family!r}; choose from {FAMILIES}")
        if self.amplitude < 0:
            raise ValueError("kernel amplitude must be >= 0")
        if self.horizon <= 0:
            raise ValueError("kernel horizon must be > 0")
        if self.modulation < 0:
            raise ValueError("kernel modulation must be >= 0")

    @property
    def s_independent(self) -> bool:
        return self.family != "exponential_modulated" or self.modulation == 0.0


def _separation(x, y):
    diff = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
    if diff.ndim == 0:
        return np.abs(diff)
    return np.sqrt(np.sum(diff * diff, axis=-1))


def _check_s(s):
    s = np.asarray(s, dtype=float)
    if np.any(s < 0):
        raise ValueError("kernel argument s must be >= 0")
    return s


def geometry_factor(spec: KernelSpec, dist):
    """The x,y-only part of the kernel, evaluated on separations."""
    dist = np.asarray(dist, dtype=float)
    if spec.family == "constant":
        return np.full_like(dist, spec.amplitude)
    if spec.family == "gaussian":
        return spec.amplitude * np.exp(-((dist / spec.horizon) ** 2))
    return spec.amplitude * np.exp(-dist / spec.horizon)


def h_from_parts(spec: KernelSpec, geo, s):
    if spec.family == "exponential_modulated":
        return geo * (1.0 + spec.modulation * np.asarray(s) ** 2)
    shape = np.broadcast_shapes(np.shape(geo), np.shape(s))
    return np.broadcast_to(np.asarray(geo, dtype=float), shape).copy()


def dh_ds_from_parts(spec: KernelSpec, geo, s):
    if spec.family == "exponential_modulated":
        return 2.0 * spec.modulation * np.asarray(s) * geo
    return np.zeros(np.broadcast_shapes(np.shape(geo), np.shape(s)))


def eval_h(spec: KernelSpec, x, y, s):
    """Kernel value h(x, y, s); accepts scalars or arrays."""
    s = _check_s(s)
    return h_from_parts(spec, geometry_factor(spec, _separation(x, y)), s)


def eval_dh_ds(spec: KernelSpec, x, y, s):
    """Closed-form s-derivative of the kernel."""
    s = _check_s(s)
    return dh_ds_from_parts(spec, geometry_factor(spec, _separation(x, y)), s)


def eval_g(spec: KernelSpec, x, y, s):
    """Variation weight g = h + s * dh/ds."""
    s = _check_s(s)
    geo = geometry_factor(spec, _separation(x, y))
    return h_from_parts(spec, geo, s) + s * dh_ds_from_parts(spec, geo, s)


def eval_kappa(spec: KernelSpec, x, y, s):
    """Motion-equation weight kappa = h + (s/2) * dh/ds."""
    s = _check_s(s)
    geo = geometry_factor(spec, _separation(x, y))
    return h_from_parts(spec, geo, s) + 0.5 * s * dh_ds_from_parts(spec, geo, s)


WEIGHT_FNS = {"h": eval_h, "g": eval_g, "kappa": eval_kappa}


def weight_matrix(spec: KernelSpec, geo: np.ndarray, s: np.ndarray | None, which: str) -> np.ndarray:
    """Pairwise weight matrix for a precomputed geometry factor.

    geo is geometry_factor on the pairwise separation matrix; s is the
    pairwise field-difference magnitude matrix (may be None for
    s-independent kernels).
    """
    if which not in ("h", "g", "kappa"):
        raise ValueError(f"unknown weight {which!r}")
    if spec.s_independent:
        return geo
    if s is None:
        raise ValueError("s matrix required for an s-dependent kernel")
    h = h_from_parts(spec, geo, s)
    if which == "h":
        return h
    dh = dh_ds_from_parts(spec, geo, s)
    fac = 1.0 if which == "g" else 0.5
    return h + fac * s * dh


def check_symmetry(kernel, grid, probe) -> float:
    """Max over point pairs of |h(p,q,s_pq) - h(q,p,s_pq)|.

    kernel is a KernelSpec or any callable h(x, y, s); s_pq comes from the
    probe field. Built-in families depend on |x - y| only, so the result is
    zero to rounding for them; the operation exists to vet custom kernels.
    """
    pts = grid.points
    vals = probe.values if hasattr(probe, "values") else np.asarray(probe, dtype=float)
    if vals.ndim == 1:
        vals = vals[:, None]
    s = np.sqrt(np.sum((vals[:, None, :] - vals[None, :, :]) ** 2, axis=-1))
    if isinstance(kernel, KernelSpec):
        dist = np.sqrt(np.sum((pts[:, None, :] - pts[None, :, :]) ** 2, axis=-1))
        W = weight_matrix(kernel, geometry_factor(kernel, dist), s, "h")
        return float(np.max(np.abs(W - W.T)))
    worst = 0.0
    n = pts.shape[0]
    for p in range(n):
        for q in range(n):
            worst = max(worst, abs(kernel(pts[p], pts[q], s[p, q]) - kernel(pts[q], pts[p], s[q, p])))
    return worst
