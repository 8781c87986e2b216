"""Executable forms of the stability theorems.

check_eigenstate certifies a single state; classify_hamiltonian gives the
static preserving/non-preserving verdict together with a dynamic witness;
reconstruct_forcing inverts a prescribed eigenvalue path into Hamiltonian
parameters; verify_trajectory compares an evolved trajectory against the
independently integrated classical law.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .boson import BosonState, eigenvalue_lsq
from .coeffs import CoefficientFn
from .dynamics import (
    HamiltonianSpec,
    IntegrationConfig,
    Trajectory,
    build_ladder_invariant,
    cumulative_simpson,
    evolve_classical_boson,
    evolve_grassmann_classical,
    evolve_schrodinger_fermion,
)
from .errors import (
    MissingEigenvalues,
    NotDegreeOne,
    ValidationError,
    VacuumAmplitudeZero,
)
from .fermion import FermionState, extract_eigenvalue, make_coherent
from .grassmann import GeneratorSet, Multivector

#: Residual below which a fermion-sector state counts as coherent (exact sector).
FERMION_COHERENT_TOL = 1e-8

#: Residual below which a truncated boson state counts as coherent.
BOSON_COHERENT_TOL = 1e-6

#: Forcing amplitudes below this are "statically zero".
STATIC_ZERO_TOL = 1e-12

#: Residual above which a trajectory is visibly non-coherent.
DYNAMIC_RESIDUAL_TOL = 1e-3

#: verify_trajectory pass threshold for deviations and residuals.
VERIFY_TOL = 1e-6


@dataclass(frozen=True)
class CoherenceReport:
    eigenvalue: object
    residual: float
    is_coherent: bool
    reason: str | None = None


def check_eigenstate(s) -> CoherenceReport:
    """Annihilation-eigenstate check for a fermion or boson state."""
    if isinstance(s, FermionState):
        try:
            lam, res = extract_eigenvalue(s)
        except VacuumAmplitudeZero as exc:
            return CoherenceReport(None, np.inf, False, reason=str(exc))
        return CoherenceReport(lam, res, res <= FERMION_COHERENT_TOL)
    if isinstance(s, BosonState):
        if s.norm() == 0.0:
            return CoherenceReport(None, np.inf, False, reason="zero state")
        lam, res = eigenvalue_lsq(s)
        return CoherenceReport(lam, res, res <= BOSON_COHERENT_TOL)
    raise TypeError(f"expected FermionState or BosonState, got {type(s).__name__}")


# -- classification ------------------------------------------------------------


@dataclass(frozen=True)
class Classification:
    verdict: str  # "preserving" | "non_preserving"
    kind: str
    max_forcing: float
    witness_time: float | None = None
    dynamic_max_residual: float | None = None
    agrees: bool | None = None
    law: object | None = None


def _default_config() -> IntegrationConfig:
    return IntegrationConfig(t_end=2.0, dt=1e-3, stride=10)


def classify_hamiltonian(spec: HamiltonianSpec,
                         config: IntegrationConfig | None = None,
                         trajectory: Trajectory | None = None,
                         dynamic: bool = True) -> Classification:
    """Preserving/non-preserving verdict with a dynamic cross-check.

    Boson and grassmann kinds always preserve (their witness is the closed
    classical law). A fermion kind preserves iff the linear forcing vanishes
    on the grid; a non-preserving verdict is accompanied by an evolved
    trajectory whose residual exceeds DYNAMIC_RESIDUAL_TOL somewhere.
    """
    config = config or _default_config()
    times = config.times()
    if spec.kind == "boson":
        law = build_ladder_invariant(spec, config)
        return Classification("preserving", "boson", spec.forcing.max_abs_on(times),
                              law=law)
    if spec.kind == "grassmann":
        zeta0 = _canonical_zeta(spec.gens, spec.eta_generator)
        law = evolve_grassmann_classical(spec, zeta0, config)
        return Classification("preserving", "grassmann",
                              spec.forcing.max_abs_on(times), law=law)

    forcing = np.abs(np.asarray(spec.forcing(times), dtype=complex))
    max_forcing = float(np.max(forcing)) if forcing.size else 0.0
    static_preserving = max_forcing <= STATIC_ZERO_TOL
    witness_time = None
    if not static_preserving:
        witness_time = float(times[int(np.argmax(forcing > STATIC_ZERO_TOL))])

    dynamic_max = None
    agrees = None
    if dynamic:
        if trajectory is None:
            gens = spec.gens or GeneratorSet.from_pairs(("zeta",))
            s0 = make_coherent(gens.gen(0))
            trajectory = evolve_schrodinger_fermion(spec, s0, config)
        dynamic_max = trajectory.max_residual
        dynamic_preserving = dynamic_max <= DYNAMIC_RESIDUAL_TOL
        agrees = dynamic_preserving == static_preserving

    verdict = "preserving" if static_preserving else "non_preserving"
    return Classification(verdict, "fermion", max_forcing, witness_time,
                          dynamic_max, agrees)


def _canonical_zeta(gens: GeneratorSet, eta_generator: str) -> Multivector:
    eta_idx = gens.index(eta_generator)
    for i in range(0, gens.n_generators, 2):
        if i != (eta_idx & ~1):
            return gens.gen(i)
    raise ValidationError("no generator pair left for the initial eigenvalue")


# -- forcing reconstruction ------------------------------------------------------


@dataclass(frozen=True)
class MultivectorPath:
    """Odd degree-one path with analytically differentiable components."""

    gens: GeneratorSet
    components: tuple[tuple[int, CoefficientFn], ...]

    def __post_init__(self):
        for mask, _ in self.components:
            if mask == 0 or mask & (mask - 1):
                raise NotDegreeOne(f"mask {mask} is not a single generator")
            if mask >= self.gens.dim:
                raise NotDegreeOne(f"mask {mask} outside the algebra")

    @classmethod
    def from_components(cls, gens: GeneratorSet,
                        components: Mapping[int | str, CoefficientFn]):
        # String keys name generators; integer keys are monomial masks already.
        items = []
        for key, fn in components.items():
            mask = (1 << gens.index(key)) if isinstance(key, str) else int(key)
            items.append((mask, fn))
        return cls(gens, tuple(sorted(items, key=lambda kv: kv[0])))

    def __call__(self, t: float) -> Multivector:
        coeffs = np.zeros(self.gens.dim, dtype=np.complex128)
        for mask, fn in self.components:
            coeffs[mask] = fn(t)
        return Multivector(self.gens, coeffs, _copy=False)

    def derivative(self) -> "MultivectorPath":
        return MultivectorPath(
            self.gens,
            tuple((mask, fn.derivative()) for mask, fn in self.components),
        )


def reconstruct_forcing(zeta_path: MultivectorPath, omega: CoefficientFn,
                        beta: CoefficientFn):
    """Hamiltonian parameters (eta, delta) that drive the prescribed path.

    eta(t) = omega*zeta - i*zeta';  delta(t) = beta + omega*zeta*conj-pairing
    - (i/2)(zeta* zeta' - zeta'* zeta). Returned as callables t -> Multivector.
    Feeding them back into the classical integrator reproduces the path.
    """
    zdot = zeta_path.derivative()

    def eta(t: float) -> Multivector:
        return omega(t) * zeta_path(t) - 1j * zdot(t)

    def delta(t: float) -> Multivector:
        z = zeta_path(t)
        zd = zdot(t)
        zc = z.conjugate()
        zdc = zd.conjugate()
        out = omega(t) * (zc * z) - 0.5j * (zc * zd - zdc * z)
        return out + complex(beta(t))

    return eta, delta


# -- trajectory verification ------------------------------------------------------


@dataclass(frozen=True)
class VerificationReport:
    law: str
    passed: bool
    max_eigenvalue_deviation: float
    max_residual: float
    max_state_deviation: float | None = None


def verify_trajectory(traj: Trajectory, expected_law: str) -> VerificationReport:
    """Compare recorded eigenvalues (and, for grassmann, states) with the law.

    expected_law: "fermion_free" (phase-rotated initial eigenvalue),
    "grassmann" (classical forced law plus phase), or "boson" (closed-form
    classical eigenvalue). Passes iff deviations and residuals are <= 1e-6.
    """
    if not traj.eigenvalues or all(ev is None for ev in traj.eigenvalues):
        raise MissingEigenvalues("trajectory has no eigenvalue records")
    if traj.spec is None:
        raise ValidationError("trajectory carries no HamiltonianSpec to verify against")

    max_res = traj.max_residual
    state_dev = None

    if expected_law == "fermion_free":
        lam0 = traj.eigenvalues[0]
        dt = traj.full_times[1] - traj.full_times[0]
        phase = cumulative_simpson(np.real(traj.spec.omega(traj.full_times)), dt)
        devs = []
        for k, idx in enumerate(traj.record_indices):
            law_val = complex(np.exp(-1j * phase[int(idx)])) * lam0
            devs.append((traj.eigenvalues[k] - law_val).sup_norm())
        max_dev = float(np.max(devs))
    elif expected_law == "grassmann":
        lam0 = traj.eigenvalues[0]
        path = evolve_grassmann_classical(traj.spec, lam0, traj.config)
        devs = []
        sdevs = []
        for k, idx in enumerate(traj.record_indices):
            i = int(idx)
            devs.append((traj.eigenvalues[k] - path.zeta_at(i)).sup_norm())
            reference = path.phase_factor_at(i) * make_coherent(path.zeta_at(i))
            sdevs.append((traj.states[k] - reference).sup_norm())
        max_dev = float(np.max(devs))
        state_dev = float(np.max(sdevs))
    elif expected_law == "boson":
        classical = evolve_classical_boson(
            traj.spec, complex(traj.eigenvalues[0]), traj.config
        )
        law_vals = classical.z_closed[traj.record_indices]
        max_dev = float(np.max(np.abs(np.asarray(traj.eigenvalues) - law_vals)))
    else:
        raise ValidationError(f"unknown law {expected_law!r}")

    passed = max_dev <= VERIFY_TOL and max_res <= VERIFY_TOL
    if state_dev is not None:
        passed = passed and state_dev <= VERIFY_TOL
    return VerificationReport(expected_law, passed, max_dev, max_res, state_dev)
