"""Finite-volume solver for the 1D Euler system with the quantum closure.

Conservation form on the periodic unit torus,

    d/dT (rho, q1, q4) + d/dX (A0, A1, A4) = 0,
    A0 = q1,  A1 = P + q1^2/rho,  A4 = q1 (q4 + P) / rho,

with P = P(rho, e_int) supplied by the free-Fermi-gas closure (tabulated by
default, direct Newton evaluation behind a flag).  First-order Rusanov
(local Lax-Friedrichs) interface fluxes with the wave-speed bound taken from
the spectral radius of a finite-difference flux Jacobian, two-stage Heun
time update: the simplest provably conservative pairing, adequate because
all claims concern smooth solutions.

The solver guards the one-phase region every stage (rho > 0 and internal
energy above the zero-temperature floor) and halts rather than extrapolating
the EOS.  Past the smooth-solution horizon it reports a shock indicator and
stops claiming validity.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import eos
from .errors import CflViolation, LeftOnePhaseRegion, OutOfDomain, VacuumCell

DEFAULT_CFL = 0.4


@dataclass(frozen=True)
class MacroGrid:
    """Periodic macroscopic grid: n_cells cells of width 1/n_cells."""

    n_cells: int

    def __post_init__(self):
        if self.n_cells < 8:
            raise ValueError("need at least 8 cells")

    @property
    def dx(self) -> float:
        return 1.0 / self.n_cells

    @property
    def centers(self) -> np.ndarray:
        return (np.arange(self.n_cells) + 0.5) * self.dx


@dataclass(frozen=True)
class ConservedField:
    """Cellwise conserved densities (rho, mom, e) on a MacroGrid."""

    rho: np.ndarray
    mom: np.ndarray
    e: np.ndarray

    def __post_init__(self):
        for name in ("rho", "mom", "e"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))

    @property
    def n_cells(self) -> int:
        return self.rho.size

    @property
    def e_internal(self) -> np.ndarray:
        return self.e - 0.5 * self.mom**2 / self.rho

    def stack(self) -> np.ndarray:
        return np.stack([self.rho, self.mom, self.e])

    @classmethod
    def from_stack(cls, arr: np.ndarray) -> "ConservedField":
        return cls(rho=arr[0], mom=arr[1], e=arr[2])

    def totals(self) -> np.ndarray:
        return np.array([self.rho.sum(), self.mom.sum(), self.e.sum()])

    def boosted(self, s: float) -> "ConservedField":
        """Galilean value boost to a frame moving at -s."""
        return ConservedField(
            rho=self.rho,
            mom=self.mom + s * self.rho,
            e=self.e + s * self.mom + 0.5 * s * s * self.rho,
        )


@dataclass(frozen=True)
class EulerSolution:
    """Solver state: conserved field, time, CFL number, and the EOS handle."""

    grid: MacroGrid
    q: ConservedField
    time: float
    closure: "eos.PressureClosure"
    cfl: float = DEFAULT_CFL


@dataclass(frozen=True)
class EulerTrajectory:
    times: list
    snapshots: list
    shock_indicator: list

    def at(self, t: float) -> ConservedField:
        idx = int(np.argmin(np.abs(np.asarray(self.times) - t)))
        if abs(self.times[idx] - t) > 1e-12:
            raise KeyError(f"no snapshot at T = {t}")
        return self.snapshots[idx]


def flux_A(q: ConservedField, pressure: np.ndarray) -> np.ndarray:
    """Algebraic flux (A0, A1, A4) given the cellwise pressure."""
    if np.any(q.rho <= 0.0):
        raise VacuumCell(f"nonpositive density in cell {int(np.argmin(q.rho))}")
    p = np.asarray(pressure, dtype=float)
    a0 = q.mom
    a1 = p + q.mom**2 / q.rho
    a4 = q.mom * (q.e + p) / q.rho
    return np.stack([a0, a1, a4])


def _check_one_phase(q: ConservedField, model: eos.EosModel):
    if np.any(q.rho <= 0.0):
        raise LeftOnePhaseRegion(f"vacuum cell {int(np.argmin(q.rho))}")
    floor = eos.energy_floor(model, q.rho)
    gap = q.e_internal - floor
    if np.any(gap <= 0.0):
        raise LeftOnePhaseRegion(
            f"internal energy at the T=0 floor in cell {int(np.argmin(gap))}"
        )


def wave_speed_bound(q: ConservedField, closure: "eos.PressureClosure") -> np.ndarray:
    """Cellwise bound on |characteristic speeds|: spectral radius of the
    finite-difference flux Jacobian (avoids analytic EOS derivatives).

    Evaluated at |mom|: the spectral radius is even in the momentum sign, and
    this keeps the scheme bitwise equivariant under mirror reflection."""
    n = q.n_cells
    q = ConservedField(rho=q.rho, mom=np.abs(q.mom), e=q.e)
    base = q.stack()
    scale = np.maximum(np.abs(base), 1e-3)
    jac = np.empty((n, 3, 3))
    for i in range(3):
        h = 1e-6 * scale[i]
        up = base.copy()
        dn = base.copy()
        up[i] += h
        dn[i] -= h
        qu, qd = ConservedField.from_stack(up), ConservedField.from_stack(dn)
        fu = flux_A(qu, closure(qu.rho, qu.e_internal))
        fd = flux_A(qd, closure(qd.rho, qd.e_internal))
        jac[:, :, i] = ((fu - fd) / (2.0 * h)).T
    return np.abs(np.linalg.eigvals(jac)).max(axis=1)


def _rhs(q: ConservedField, grid: MacroGrid, closure) -> tuple[np.ndarray, np.ndarray]:
    """Conservative Rusanov update term -(F_{i+1/2} - F_{i-1/2})/dx and the
    cellwise wave-speed bound used for it."""
    pressure = closure(q.rho, q.e_internal)
    flux = flux_A(q, pressure)
    speeds = wave_speed_bound(q, closure)
    s_iface = np.maximum(speeds, np.roll(speeds, -1))
    q_arr = q.stack()
    dq = np.roll(q_arr, -1, axis=1) - q_arr
    f_iface = 0.5 * (flux + np.roll(flux, -1, axis=1)) - 0.5 * s_iface * dq
    return -(f_iface - np.roll(f_iface, 1, axis=1)) / grid.dx, speeds


def step(sol: EulerSolution, dt: float) -> EulerSolution:
    """One Heun (two-stage) step; conserves cell totals to round-off and
    re-checks the one-phase guard after each stage."""
    model = sol.closure.model
    _check_one_phase(sol.q, model)
    rhs1, speeds = _rhs(sol.q, sol.grid, sol.closure)
    dt_max = sol.cfl * sol.grid.dx / max(speeds.max(), 1e-300)
    if dt > dt_max * (1.0 + 1e-12):
        raise CflViolation(f"dt = {dt:.3e} exceeds CFL bound {dt_max:.3e}")
    q_star = ConservedField.from_stack(sol.q.stack() + dt * rhs1)
    _check_one_phase(q_star, model)
    rhs2, _ = _rhs(q_star, sol.grid, sol.closure)
    q_new = ConservedField.from_stack(sol.q.stack() + 0.5 * dt * (rhs1 + rhs2))
    _check_one_phase(q_new, model)
    return replace(sol, q=q_new, time=sol.time + dt)


def shock_indicator(q: ConservedField) -> float:
    """Gradient blow-up heuristic: largest cell-to-cell relative density jump."""
    jumps = np.abs(np.diff(np.concatenate([q.rho, q.rho[:1]])))
    return float(jumps.max() / max(q.rho.max() - q.rho.min(), 1e-300))


def run(
    initial: ConservedField,
    t_final: float,
    grid: MacroGrid,
    closure: "eos.PressureClosure",
    cfl: float = DEFAULT_CFL,
    snapshot_times: list | None = None,
) -> EulerTrajectory:
    """Integrate to t_final, storing snapshots at the requested times
    (always including 0 and t_final)."""
    if initial.n_cells != grid.n_cells:
        raise ValueError("initial data does not match the grid")
    wanted = sorted(set([0.0, t_final] + list(snapshot_times or [])))
    if wanted[0] < 0.0 or wanted[-1] > t_final + 1e-15:
        raise ValueError("snapshot times must lie in [0, t_final]")
    sol = EulerSolution(grid=grid, q=initial, time=0.0, closure=closure, cfl=cfl)
    times, snaps, shocks = [], [], []

    def record(s):
        times.append(s.time)
        snaps.append(s.q)
        shocks.append(shock_indicator(s.q))

    record(sol)
    for target in wanted[1:]:
        while sol.time < target - 1e-14:
            speeds = wave_speed_bound(sol.q, closure)
            dt = min(cfl * grid.dx / max(speeds.max(), 1e-300), target - sol.time)
            sol = step(sol, dt)
        record(sol)
    return EulerTrajectory(times=times, snapshots=snaps, shock_indicator=shocks)


def lambda_field_of(
    qfield: ConservedField, model: eos.EosModel
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Cellwise dual inversion: multiplier fields (lam0, lam1, lam4) with
    dual_q(lam(X)) = q(X); raises OutOfDomain naming the offending cell."""
    n = qfield.n_cells
    lam0 = np.empty(n)
    lam1 = np.empty(n)
    lam4 = np.empty(n)
    guess = None
    for j in range(n):
        q = eos.ConservedVector(rho=qfield.rho[j], mom=[qfield.mom[j]], e=qfield.e[j])
        try:
            lam = eos.invert_to_multipliers(model, q, guess)
        except OutOfDomain as err:
            raise OutOfDomain(f"cell {j}: {err}") from err
        lam0[j], lam1[j], lam4[j] = lam.lam0, lam.lam_mom[0], lam.lam4
        guess = lam
    return lam0, lam1, lam4


# ---------------------------------------------------------------------------
# named analytic initial profiles
# ---------------------------------------------------------------------------


def profile_callables(kind: str, params: dict):
    """Named analytic profiles for initial data.

    "lambda-cos": multiplier fields lam_mu(X) = base + amp*cos(2 pi X + phase)
    (keys lam0/lam1/lam4 + *_amp, *_phase); the corresponding q(X) follows by
    dualization.  "q-cos": direct (rho, mom, e) cosines (keys rho/mom/e + ...).
    Returns a dict of callables X -> value.
    """

    def cos_profile(base, amp, phase):
        return lambda X: base + amp * np.cos(2.0 * np.pi * np.asarray(X, dtype=float) + phase)

    if kind == "lambda-cos":
        return {
            name: cos_profile(
                params.get(name, 0.0),
                params.get(f"{name}_amp", 0.0),
                params.get(f"{name}_phase", 0.0),
            )
            for name in ("lam0", "lam1", "lam4")
        }
    if kind == "q-cos":
        return {
            name: cos_profile(
                params.get(name, 0.0),
                params.get(f"{name}_amp", 0.0),
                params.get(f"{name}_phase", 0.0),
            )
            for name in ("rho", "mom", "e")
        }
    raise ValueError(f"unknown profile kind {kind!r}")


def initial_q_field(kind: str, params: dict, grid: MacroGrid, model: eos.EosModel) -> ConservedField:
    """Evaluate a named profile as cellwise conserved data (dualizing
    multiplier profiles pointwise)."""
    calls = profile_callables(kind, params)
    x = grid.centers
    if kind == "q-cos":
        return ConservedField(rho=calls["rho"](x), mom=calls["mom"](x), e=calls["e"](x))
    lam0, lam1, lam4 = calls["lam0"](x), calls["lam1"](x), calls["lam4"](x)
    rho = np.empty(grid.n_cells)
    mom = np.empty(grid.n_cells)
    e = np.empty(grid.n_cells)
    for j in range(grid.n_cells):
        q = eos.dual_q(
            model, eos.MultiplierVector(lam0=lam0[j], lam_mom=[lam1[j]], lam4=lam4[j])
        )
        rho[j], mom[j], e[j] = q.rho, q.mom[0], q.e
    return ConservedField(rho=rho, mom=mom, e=e)
