"""Whole-domain balances and the pointwise residual fields of their localization.

Four global balances are monitored: energy against the boundary working
rate, linear momentum against the boundary traction, angular momentum
against the boundary moment, and the configurational (Eshelby) momentum
against the flux of T_jk = L delta_jk + sigma_ij u_i,k.

Localizing each balance leaves a pointwise source term from the long-range
interaction. The energy and linear-momentum sources integrate to zero over
the body for every symmetric kernel (they are genuine nonlocal residuals);
the angular one does so only for a central pair potential; the Eshelby one
does not in general, which is exactly what the residual diagnostics here
quantify.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import MaterialModel, State, coordinate_field, lagrangian_density, stress
from .mesh import DomainGrid, Field, face_trace, gradient, integrate
from .operators import NonlocalContext, nonlocal_argument

ZERO_GUARD = 1e-30


def _cross(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Cross product rows; z-component only in 2D, full vector in 3D."""
    if a.shape[1] == 2:
        return (a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0])[:, None]
    return np.cross(a, b)


@dataclass(frozen=True)
class ConservedQuantities:
    energy: float
    linear_momentum: np.ndarray
    angular_momentum: np.ndarray | None
    pseudo_momentum: np.ndarray


@dataclass(frozen=True)
class BoundaryFluxes:
    power: float
    traction: np.ndarray
    moment: np.ndarray | None
    eshelby_flux: np.ndarray


@dataclass(frozen=True)
class ResidualFields:
    E_hat: Field
    P_hat: Field
    M_hat: Field | None
    J_hat: Field


def conserved_quantities(state: State, ctx: NonlocalContext, material: MaterialModel) -> ConservedQuantities:
    grid = ctx.grid
    u, v = state.u, state.v
    w = grid.weights
    kin = 0.5 * material.rho * np.sum(v.values**2, axis=1)
    sig = stress(u, grid, material)
    gu = gradient(u, grid)
    elast = 0.5 * np.sum(sig.values * gu.values, axis=1)
    nl = 0.5 * np.sum(nonlocal_argument(ctx, u, "h").values * u.values, axis=1)
    energy = float(w @ (kin + elast + nl))
    lin = material.rho * (w @ v.values)
    ang = None
    if grid.dim >= 2:
        ang = material.rho * (w @ _cross(grid.points, v.values))
    d = grid.dim
    guk = gu.values.reshape(grid.npts, d, d)
    pseudo = material.rho * (w @ np.einsum("pi,pik->pk", v.values, guk))
    return ConservedQuantities(energy, lin, ang, pseudo)


def boundary_fluxes(state: State, ctx: NonlocalContext, material: MaterialModel) -> BoundaryFluxes:
    """Boundary integrals of the four balance fluxes.

    The stress trace is extrapolated to the faces (second order); velocity,
    Lagrangian density and displacement gradient use the boundary-cell
    value. Geometric factors use the face midpoints.
    """
    grid = ctx.grid
    d = grid.dim
    areas = grid.boundary_areas
    normals = grid.boundary_normals
    sig_f = face_trace(stress(state.u, grid, material), grid, extrapolate=True).reshape(-1, d, d)
    tract = np.einsum("fij,fj->fi", sig_f, normals)
    v_f = state.v.values[grid.boundary_cells]
    power = float(areas @ np.sum(tract * v_f, axis=1))
    traction = areas @ tract
    moment = None
    if d >= 2:
        moment = areas @ _cross(grid.boundary_centers, tract)
    lag_f = lagrangian_density(state, ctx, material).values[grid.boundary_cells][:, 0]
    gu_f = gradient(state.u, grid).values[grid.boundary_cells].reshape(-1, d, d)
    sig_cell = stress(state.u, grid, material).values[grid.boundary_cells].reshape(-1, d, d)
    esh = lag_f[:, None] * normals + np.einsum("fik,fij,fj->fk", gu_f, sig_cell, normals)
    eshelby = areas @ esh
    return BoundaryFluxes(power, np.asarray(traction), moment, np.asarray(eshelby))


def residual_energy_field(state: State, ctx: NonlocalContext) -> Field:
    """Pointwise energy source of localization.

    E_hat = (1/2) sum_i [ u_i * Sg[v_i] - v_i * Sg[u_i] ] with
    Sg[f](x) = integral of g(x,y) f(y); its volume integral vanishes to
    rounding by the symmetry of g.
    """
    grid = ctx.grid
    G = ctx.weights("g")
    w = grid.weights
    Su = G @ (w[:, None] * state.u.values)
    Sv = G @ (w[:, None] * state.v.values)
    vals = 0.5 * np.sum(state.u.values * Sv - state.v.values * Su, axis=1)
    return Field(vals, grid)


def residual_momentum_field(state: State, ctx: NonlocalContext) -> Field:
    """P_hat = -<kappa|u> (operand is the coordinate field in central mode)."""
    operand = coordinate_field(ctx.grid) if ctx.kernel.central else state.u
    return Field(-nonlocal_argument(ctx, operand, "kappa").values, ctx.grid)


def residual_angular_field(state: State, ctx: NonlocalContext) -> Field:
    """M_hat = x cross P_hat; needs dim >= 2."""
    if ctx.grid.dim < 2:
        raise ValueError("angular residual needs dim >= 2")
    P = residual_momentum_field(state, ctx)
    return Field(_cross(ctx.grid.points, P.values), ctx.grid)


def residual_eshelby_field(state: State, ctx: NonlocalContext) -> Field:
    """Configurational source of localization.

    J_hat_k = (1/2) sum_i [ u_i * d_k <h|u_i> - <g|u_i> * d_k u_i ]. This
    one has no zero-mean property in general: the Eshelby balance holds
    globally but does not localize.
    """
    grid = ctx.grid
    d = grid.dim
    u = state.u
    harg = nonlocal_argument(ctx, u, "h")
    garg = nonlocal_argument(ctx, u, "g")
    gh = gradient(harg, grid).values.reshape(grid.npts, d, d)
    gu = gradient(u, grid).values.reshape(grid.npts, d, d)
    vals = 0.5 * (np.einsum("pi,pik->pk", u.values, gh) - np.einsum("pi,pik->pk", garg.values, gu))
    return Field(vals, grid)


def residual_fields(state: State, ctx: NonlocalContext) -> ResidualFields:
    M = residual_angular_field(state, ctx) if ctx.grid.dim >= 2 else None
    return ResidualFields(
        E_hat=residual_energy_field(state, ctx),
        P_hat=residual_momentum_field(state, ctx),
        M_hat=M,
        J_hat=residual_eshelby_field(state, ctx),
    )


def _gap(f: Field, grid: DomainGrid) -> float:
    num = np.abs(integrate(f, grid))
    den = ZERO_GUARD + grid.weights @ np.abs(f.values)
    return float(np.max(num / den))


def zero_mean_verdicts(fields: ResidualFields, grid: DomainGrid) -> dict:
    """Normalized zero-mean gaps of the four residual fields."""
    out = {
        "gap_E": _gap(fields.E_hat, grid),
        "gap_P": _gap(fields.P_hat, grid),
        "gap_J": _gap(fields.J_hat, grid),
    }
    if fields.M_hat is not None:
        out["gap_M"] = _gap(fields.M_hat, grid)
    return out


def residual_constituent_scales(state: State, ctx: NonlocalContext) -> dict:
    """Magnitude of the terms each residual field is a difference of.

    The normalized gap is meaningless when a residual cancels identically
    (a standing wave has v proportional to u, so the energy residual is
    zero up to rounding of its constituents). Pass rules compare the
    residual's size against these scales to recognize that case.
    """
    grid = ctx.grid
    w = grid.weights
    G = ctx.weights("g")
    Su = np.abs(G) @ (w[:, None] * np.abs(state.u.values))
    Sv = np.abs(G) @ (w[:, None] * np.abs(state.v.values))
    scale_E = 0.5 * float(w @ np.sum(np.abs(state.u.values) * Sv + np.abs(state.v.values) * Su, axis=1))
    Wk = ctx.weights("kappa")
    operand = coordinate_field(grid) if ctx.kernel.central else state.u
    rowsum = Wk @ w
    term = np.abs(operand.values) * rowsum[:, None] + Wk @ (w[:, None] * np.abs(operand.values))
    scale_P = float(np.max(w @ term))
    scale_M = float(np.max(np.abs(grid.points))) * scale_P
    harg = nonlocal_argument(ctx, state.u, "h")
    garg = nonlocal_argument(ctx, state.u, "g")
    gh = np.abs(gradient(harg, grid).values).reshape(grid.npts, grid.dim, grid.dim)
    gu = np.abs(gradient(state.u, grid).values).reshape(grid.npts, grid.dim, grid.dim)
    tJ = 0.5 * (np.einsum("pi,pik->pk", np.abs(state.u.values), gh)
                + np.einsum("pi,pik->pk", np.abs(garg.values), gu))
    scale_J = float(np.max(w @ tJ))
    return {"gap_E": scale_E, "gap_P": scale_P, "gap_M": scale_M, "gap_J": scale_J}


# ---------------------------------------------------------------------------
# sampled time series and balance residuals
# ---------------------------------------------------------------------------

def _time_derivative(series: np.ndarray, dt: float) -> np.ndarray:
    """Centered differences inside, second-order one-sided at the ends."""
    q = np.asarray(series, dtype=float)
    out = np.empty_like(q)
    out[1:-1] = (q[2:] - q[:-2]) / (2 * dt)
    out[0] = (-3 * q[0] + 4 * q[1] - q[2]) / (2 * dt)
    out[-1] = (3 * q[-1] - 4 * q[-2] + q[-3]) / (2 * dt)
    return out


def balance_residuals(bulks: dict, fluxes: dict, dt_sample: float) -> dict:
    """Per-law residual time series d/dt(bulk) - flux.

    bulks and fluxes map law name -> array (nsamples,) or (nsamples, m);
    laws are paired by key: energy/power, momentum/traction,
    angular/moment, eshelby/eshelby_flux. Needs at least 3 samples.
    """
    pairs = (("energy", "power"), ("momentum", "traction"),
             ("angular", "moment"), ("eshelby", "eshelby_flux"))
    out = {}
    for bk, fk in pairs:
        if bk not in bulks:
            continue
        q = np.asarray(bulks[bk], dtype=float)
        if q.shape[0] < 3:
            raise ValueError("balance residuals need at least 3 samples")
        out[bk] = _time_derivative(q, dt_sample) - np.asarray(fluxes[fk], dtype=float)
    return out


class DiagnosticsSeries:
    """Sampled conserved quantities, fluxes, residual gaps and balances.

    Column layout is fixed per dimension: time, bulk quantities, boundary
    fluxes, the four zero-mean gaps, then one balance column per bulk
    quantity. Balance columns need three samples; with fewer they hold nan.
    """

    def __init__(self, dim: int):
        self.dim = dim
        self.times: list[float] = []
        self.data: dict[str, list] = {name: [] for name in self.column_names(dim)[1:]}

    @staticmethod
    def column_names(dim: int) -> list[str]:
        ax = "xyz"[:dim]
        ang = [] if dim == 1 else (["z"] if dim == 2 else list("xyz"))
        cols = ["t", "energy"]
        cols += [f"p_{a}" for a in ax]
        cols += [f"l_{a}" for a in ang]
        cols += [f"pm_{a}" for a in ax]
        cols += ["power"]
        cols += [f"trac_{a}" for a in ax]
        cols += [f"mom_{a}" for a in ang]
        cols += [f"eflux_{a}" for a in ax]
        cols += ["gap_E", "gap_P"] + (["gap_M"] if dim >= 2 else []) + ["gap_J"]
        cols += ["bal_energy"]
        cols += [f"bal_p_{a}" for a in ax]
        cols += [f"bal_l_{a}" for a in ang]
        cols += [f"bal_pm_{a}" for a in ax]
        return cols

    def append(self, t: float, cq: ConservedQuantities, bf: BoundaryFluxes, gaps: dict):
        ax = "xyz"[: self.dim]
        ang = [] if self.dim == 1 else (["z"] if self.dim == 2 else list("xyz"))
        self.times.append(t)
        row = {"energy": cq.energy, "power": bf.power}
        for i, a in enumerate(ax):
            row[f"p_{a}"] = cq.linear_momentum[i]
            row[f"pm_{a}"] = cq.pseudo_momentum[i]
            row[f"trac_{a}"] = bf.traction[i]
            row[f"eflux_{a}"] = bf.eshelby_flux[i]
        for i, a in enumerate(ang):
            row[f"l_{a}"] = cq.angular_momentum[i]
            row[f"mom_{a}"] = bf.moment[i]
        row["gap_E"] = gaps["gap_E"]
        row["gap_P"] = gaps["gap_P"]
        if self.dim >= 2:
            row["gap_M"] = gaps["gap_M"]
        row["gap_J"] = gaps["gap_J"]
        for name, val in row.items():
            self.data[name].append(float(val))
        for name in self.data:
            if name.startswith("bal_"):
                self.data[name].append(float("nan"))

    def finalize_balances(self):
        """Fill the balance columns from the sampled series."""
        n = len(self.times)
        if n < 3:
            return
        dt_s = self.times[1] - self.times[0]
        ax = "xyz"[: self.dim]
        ang = [] if self.dim == 1 else (["z"] if self.dim == 2 else list("xyz"))
        bulks = {"energy": np.array(self.data["energy"])}
        fluxes = {"power": np.array(self.data["power"])}
        bulks["momentum"] = np.stack([self.data[f"p_{a}"] for a in ax], axis=1)
        fluxes["traction"] = np.stack([self.data[f"trac_{a}"] for a in ax], axis=1)
        if ang:
            bulks["angular"] = np.stack([self.data[f"l_{a}"] for a in ang], axis=1)
            fluxes["moment"] = np.stack([self.data[f"mom_{a}"] for a in ang], axis=1)
        bulks["eshelby"] = np.stack([self.data[f"pm_{a}"] for a in ax], axis=1)
        fluxes["eshelby_flux"] = np.stack([self.data[f"eflux_{a}"] for a in ax], axis=1)
        res = balance_residuals(bulks, fluxes, dt_s)
        self.data["bal_energy"] = list(res["energy"])
        for i, a in enumerate(ax):
            self.data[f"bal_p_{a}"] = list(res["momentum"][:, i])
            self.data[f"bal_pm_{a}"] = list(res["eshelby"][:, i])
        for i, a in enumerate(ang):
            self.data[f"bal_l_{a}"] = list(res["angular"][:, i])

    def rows(self):
        cols = self.column_names(self.dim)
        for i, t in enumerate(self.times):
            yield [t] + [self.data[c][i] for c in cols[1:]]

    def column(self, name: str) -> np.ndarray:
        if name == "t":
            return np.asarray(self.times)
        return np.asarray(self.data[name])


def sample_diagnostics(state: State, ctx: NonlocalContext, material: MaterialModel, series: DiagnosticsSeries):
    cq = conserved_quantities(state, ctx, material)
    bf = boundary_fluxes(state, ctx, material)
    gaps = zero_mean_verdicts(residual_fields(state, ctx), ctx.grid)
    series.append(state.t, cq, bf, gaps)
