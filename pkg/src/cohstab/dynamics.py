"""Time propagation and invariant construction.

Everything integrates with fixed-step classical RK4 on a uniform grid, with
a mandatory dt vs dt/2 endpoint comparison (StepTooLarge on disagreement).
Phase integrals use cumulative Simpson on the same grid so closed forms and
RK4 cross-validate at matching order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernel
from .boson import BosonState, eigenvalue_lsq
from .coeffs import CoefficientFn, zero_fn
from .errors import (
    GeneratorCollision,
    GridTooCoarse,
    MismatchedGenerators,
    NotHermitian,
    StepTooLarge,
    TruncationBreach,
    VacuumAmplitudeZero,
    ValidationError,
)
from .fermion import (
    FermionOperator,
    FermionState,
    _compose_coeff_arrays,
    extract_eigenvalue,
    inner_product,
    make_coherent,
)
from .grassmann import GeneratorSet, Multivector, invert, require_odd_degree_one

#: Endpoint tolerance for the dt vs dt/2 self-check.
STEP_TOL = 1e-8

#: Tail-mass threshold for truncated boson evolution.
BREACH_TOL = 1e-6

#: Hermiticity tolerance for Hamiltonian builders.
HERMITIAN_TOL = 1e-12

VALID_KINDS = ("boson", "fermion", "grassmann")


# -- grids -----------------------------------------------------------------


@dataclass(frozen=True)
class IntegrationConfig:
    """Uniform grid on [0, t_end]; dt is nudged so it divides t_end exactly."""

    t_end: float
    dt: float = 1e-3
    stride: int = 10

    def __post_init__(self):
        if not self.t_end > 0:
            raise ValidationError("t_end must be positive")
        if not self.dt > 0:
            raise ValidationError("dt must be positive")
        if self.stride < 1:
            raise ValidationError("stride must be at least 1")

    @property
    def n_steps(self) -> int:
        return max(1, int(round(self.t_end / self.dt)))

    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.t_end, self.n_steps + 1)

    def refined_times(self) -> np.ndarray:
        return np.linspace(0.0, self.t_end, 2 * self.n_steps + 1)

    def record_indices(self) -> np.ndarray:
        idx = list(range(0, self.n_steps + 1, self.stride))
        if idx[-1] != self.n_steps:
            idx.append(self.n_steps)
        return np.asarray(idx, dtype=np.int64)


def cumulative_simpson(y: np.ndarray, dt: float) -> np.ndarray:
    """Cumulative Simpson integral from the grid start, O(dt^4).

    Even points accumulate full Simpson panels; odd points integrate half of
    the quadratic through the local point triple.
    """
    y = np.asarray(y)
    n = y.size
    out = np.zeros(n, dtype=np.result_type(y.dtype, np.float64))
    if n == 1:
        return out
    if n == 2:
        out[1] = 0.5 * dt * (y[0] + y[1])
        return out
    panels = dt / 3.0 * (y[0:-2:2] + 4.0 * y[1:-1:2] + y[2::2])
    out[2::2] = np.cumsum(panels)
    odd = np.arange(1, n, 2)
    inner = odd[odd + 1 <= n - 1]
    out[inner] = out[inner - 1] + dt / 12.0 * (
        5.0 * y[inner - 1] + 8.0 * y[inner] - y[inner + 1]
    )
    if n % 2 == 0:
        i = n - 1
        out[i] = out[i - 1] + dt / 12.0 * (-y[i - 2] + 8.0 * y[i - 1] + 5.0 * y[i])
    return out


# -- Hamiltonian data --------------------------------------------------------


@dataclass(frozen=True)
class HamiltonianSpec:
    """Coefficient functions of one time-dependent Hamiltonian family.

    kind "boson":     omega*a†a + forcing*a† + conj(forcing)*a + scalar
    kind "fermion":   omega*b†b + forcing*b† + conj(forcing)*b + scalar
    kind "grassmann": omega*b†b + eta*b† - conj(eta)*b + scalar,
                      eta(t) = forcing(t) * (the named odd generator)
    """

    kind: str
    omega: CoefficientFn
    forcing: CoefficientFn = zero_fn()
    scalar: CoefficientFn = zero_fn()
    gens: GeneratorSet | None = None
    eta_generator: str | None = None

    def __post_init__(self):
        if self.kind not in VALID_KINDS:
            raise ValidationError(f"unknown Hamiltonian kind {self.kind!r}")
        if self.kind == "grassmann":
            if self.gens is None or self.eta_generator is None:
                raise ValidationError(
                    "grassmann kind needs a generator set and an eta generator"
                )
            self.gens.index(self.eta_generator)  # raises KeyError if undeclared

    def validate_real_coefficients(self, times: np.ndarray) -> None:
        if self.omega.max_imag_on(times) > HERMITIAN_TOL:
            raise NotHermitian("omega must be real-valued")
        if self.scalar.max_imag_on(times) > HERMITIAN_TOL:
            raise NotHermitian("the scalar term must be real-valued")


def hamiltonian_operator(spec: HamiltonianSpec, t: float,
                         gens: GeneratorSet) -> FermionOperator:
    """Build the family's fermion-sector operator at one time."""
    source = _spec_coeff_source(spec, gens)
    ci, cm, cp, cn = source(t)
    return FermionOperator(
        gens,
        Multivector(gens, ci),
        Multivector(gens, cm),
        Multivector(gens, cp),
        Multivector(gens, cn),
    )


def _spec_coeff_source(spec: HamiltonianSpec, gens: GeneratorSet):
    dim = gens.dim
    if spec.kind == "fermion":
        def build(t):
            ci = np.zeros(dim, dtype=np.complex128)
            cm = np.zeros(dim, dtype=np.complex128)
            cp = np.zeros(dim, dtype=np.complex128)
            cn = np.zeros(dim, dtype=np.complex128)
            f = complex(spec.forcing(t))
            ci[0] = spec.scalar(t)
            cm[0] = np.conj(f)
            cp[0] = f
            cn[0] = spec.omega(t)
            return ci, cm, cp, cn

        return build
    if spec.kind == "grassmann":
        idx = gens.index(spec.eta_generator)
        bit, bit_star = 1 << idx, 1 << (idx ^ 1)

        def build(t):
            ci = np.zeros(dim, dtype=np.complex128)
            cm = np.zeros(dim, dtype=np.complex128)
            cp = np.zeros(dim, dtype=np.complex128)
            cn = np.zeros(dim, dtype=np.complex128)
            h = complex(spec.forcing(t))
            ci[0] = spec.scalar(t)
            cp[bit] = h
            cm[bit_star] = -np.conj(h)
            cn[0] = spec.omega(t)
            return ci, cm, cp, cn

        return build
    raise ValidationError(f"no fermion-sector operator for kind {spec.kind!r}")


# -- invariants and auxiliary systems ----------------------------------------


@dataclass(frozen=True)
class NuState:
    """Coefficients of the invariant B = nu_minus*b + nu_plus*b† + nu_3*(b†b - 1/2)."""

    nu_minus: complex
    nu_plus: complex
    nu_3: complex

    @property
    def conservation(self) -> float:
        return abs(self.nu_minus) ** 2 + abs(self.nu_plus) ** 2 \
            + 0.5 * abs(self.nu_3) ** 2


@dataclass(frozen=True)
class FermionInvariantPath:
    """Invariant ladder coefficients sampled on a grid."""

    times: np.ndarray
    nu: np.ndarray  # shape (n_times, 3): nu_minus, nu_plus, nu_3

    @property
    def states(self) -> list[NuState]:
        return [NuState(*(complex(v) for v in row)) for row in self.nu]

    def nu_state(self, i: int) -> NuState:
        return NuState(*(complex(v) for v in self.nu[i]))

    def conservation(self) -> np.ndarray:
        return (np.abs(self.nu[:, 0]) ** 2 + np.abs(self.nu[:, 1]) ** 2
                + 0.5 * np.abs(self.nu[:, 2]) ** 2)

    def operator_at(self, i: int, gens: GeneratorSet) -> FermionOperator:
        nm, npl, n3 = (complex(v) for v in self.nu[i])
        return FermionOperator(
            gens,
            gens.scalar(-0.5 * n3),
            gens.scalar(nm),
            gens.scalar(npl),
            gens.scalar(n3),
        )


@dataclass(frozen=True)
class BosonInvariantPath:
    """Invariant ladder pair (beta, gamma) sampled on a grid."""

    times: np.ndarray
    beta: np.ndarray
    gamma: np.ndarray

    def at(self, i: int):
        from .boson import BosonLadderInvariant

        return BosonLadderInvariant(complex(self.beta[i]), complex(self.gamma[i]))


@dataclass(frozen=True)
class ClassicalBosonPath:
    """RK4 and closed-form solutions of the classical eigenvalue equation."""

    times: np.ndarray
    z: np.ndarray
    z_closed: np.ndarray

    @property
    def max_disagreement(self) -> float:
        return float(np.max(np.abs(self.z - self.z_closed)))


@dataclass(frozen=True)
class GrassmannPath:
    """Classical eigenvalue and phase of the Grassmann-forced oscillator."""

    gens: GeneratorSet
    times: np.ndarray
    zeta: np.ndarray  # (n_times, dim)
    phi: np.ndarray   # (n_times, dim)

    def zeta_at(self, i: int) -> Multivector:
        return Multivector(self.gens, self.zeta[i])

    def phi_at(self, i: int) -> Multivector:
        return Multivector(self.gens, self.phi[i])

    def phase_factor_at(self, i: int) -> Multivector:
        from .grassmann import exponential

        return exponential(1j * self.phi_at(i))


# -- trajectories ------------------------------------------------------------


@dataclass
class Trajectory:
    """Stride-sampled records of one Schrödinger evolution."""

    kind: str
    config: IntegrationConfig
    full_times: np.ndarray
    record_indices: np.ndarray
    times: np.ndarray
    states: list
    eigenvalues: list
    residuals: np.ndarray
    norm_dev: np.ndarray
    phase_factors: list | None = None
    spec: HamiltonianSpec | None = None
    gens: GeneratorSet | None = None
    max_tail: float = 0.0

    @property
    def max_residual(self) -> float:
        return float(np.max(self.residuals))

    @property
    def max_norm_dev(self) -> float:
        return float(np.max(self.norm_dev))


# -- RK4 core ----------------------------------------------------------------


def _rk4(rhs, y0: np.ndarray, times: np.ndarray, observer=None) -> np.ndarray:
    y = np.array(y0, dtype=np.complex128)
    if observer is not None:
        observer(0, times[0], y)
    for i in range(times.size - 1):
        t = times[i]
        dt = times[i + 1] - t
        k1 = rhs(t, y)
        k2 = rhs(t + 0.5 * dt, y + (0.5 * dt) * k1)
        k3 = rhs(t + 0.5 * dt, y + (0.5 * dt) * k2)
        k4 = rhs(times[i + 1], y + dt * k3)
        y = y + (dt / 6.0) * (k1 + 2.0 * (k2 + k3) + k4)
        if observer is not None:
            observer(i + 1, times[i + 1], y)
    return y


def _check_step(rhs, y0, config: IntegrationConfig, endpoint: np.ndarray,
                label: str) -> None:
    refined = _rk4(rhs, y0, config.refined_times())
    diff = float(np.max(np.abs(refined - endpoint)))
    if diff > STEP_TOL:
        raise StepTooLarge(
            f"{label}: halving dt changes endpoint by {diff:.3e} (> {STEP_TOL})"
        )


def _memo1(fn):
    last_t = [None]
    last_v = [None]

    def get(t):
        if last_t[0] != t:
            last_v[0] = fn(t)
            last_t[0] = t
        return last_v[0]

    return get


# -- classical boson sector ---------------------------------------------------


def evolve_classical_boson(spec: HamiltonianSpec, z0: complex,
                           config: IntegrationConfig) -> ClassicalBosonPath:
    """Integrate i z' = omega z + f and cross-validate with the closed form."""
    if spec.kind != "boson":
        raise ValidationError("classical boson evolution needs a boson spec")
    times = config.times()
    spec.validate_real_coefficients(times)

    def rhs(t, y):
        return -1j * (spec.omega(t) * y + spec.forcing(t))

    y0 = np.array([z0], dtype=np.complex128)
    series = np.zeros(times.size, dtype=np.complex128)

    def observer(i, t, y):
        series[i] = y[0]

    end = _rk4(rhs, y0, times, observer)
    _check_step(rhs, y0, config, end, "classical boson")

    dt = times[1] - times[0]
    phase = cumulative_simpson(np.real(spec.omega(times)), dt)
    beta_tilde = np.exp(-1j * phase)
    drive = cumulative_simpson(spec.forcing(times) * np.exp(1j * phase), dt)
    z_closed = beta_tilde * (z0 - 1j * drive)
    return ClassicalBosonPath(times, series, z_closed)


def build_ladder_invariant(spec: HamiltonianSpec, config: IntegrationConfig):
    """Invariant ladder series: (beta, gamma) for bosons, nu system for fermions."""
    if spec.kind == "boson":
        times = config.times()
        spec.validate_real_coefficients(times)
        dt = times[1] - times[0]
        phase = cumulative_simpson(np.real(spec.omega(times)), dt)
        beta = np.exp(1j * phase)
        gamma = 1j * cumulative_simpson(spec.forcing(times) * np.exp(1j * phase), dt)
        return BosonInvariantPath(times, beta, gamma)
    if spec.kind == "fermion":
        return evolve_nu_system(spec, config)
    raise ValidationError("ladder invariants exist for boson and fermion kinds")


def evolve_nu_system(spec: HamiltonianSpec,
                     config: IntegrationConfig) -> FermionInvariantPath:
    """Auxiliary system for the forced-fermion invariant, from (1, 0, 0)."""
    if spec.kind != "fermion":
        raise ValidationError("the nu system belongs to the fermion kind")
    times = config.times()
    spec.validate_real_coefficients(times)

    def rhs(t, y):
        w = spec.omega(t)
        f = complex(spec.forcing(t))
        nm, npl, n3 = y
        return np.array(
            [
                1j * (nm * w - n3 * np.conj(f)),
                1j * (n3 * f - npl * w),
                2j * (npl * np.conj(f) - nm * f),
            ],
            dtype=np.complex128,
        )

    y0 = np.array([1.0, 0.0, 0.0], dtype=np.complex128)
    data = np.zeros((times.size, 3), dtype=np.complex128)

    def observer(i, t, y):
        data[i] = y

    end = _rk4(rhs, y0, times, observer)
    _check_step(rhs, y0, config, end, "nu system")
    return FermionInvariantPath(times, data)


# -- fermion / grassmann Schrödinger evolution --------------------------------


def _fermion_coeff_source(h, gens: GeneratorSet, times: np.ndarray):
    """Normalize a HamiltonianSpec or operator builder into an array source."""
    if isinstance(h, HamiltonianSpec):
        if h.kind not in ("fermion", "grassmann"):
            raise ValidationError("fermion-sector evolution needs a fermion or "
                                  "grassmann spec")
        if h.gens is not None and h.gens != gens:
            raise MismatchedGenerators("spec and state generator sets differ")
        h.validate_real_coefficients(times)
        return _memo1(_spec_coeff_source(h, gens)), h.kind
    if callable(h):
        def build(t):
            op = h(t)
            if op.gens != gens:
                raise MismatchedGenerators("operator builder uses a foreign set")
            if not op.is_selfadjoint(HERMITIAN_TOL):
                raise NotHermitian(f"H(t) is not self-adjoint at t={t:.6g}")
            return tuple(c.coeffs for c in op.coefficients())

        return _memo1(build), "fermion"
    raise ValidationError("h must be a HamiltonianSpec or a callable t -> operator")


def evolve_schrodinger_fermion(h, s0: FermionState,
                               config: IntegrationConfig) -> Trajectory:
    """RK4 on the amplitude coefficients of i d/dt psi = H(t) psi."""
    gens = s0.gens
    n_gen = gens.n_generators
    times = config.times()
    source, kind = _fermion_coeff_source(h, gens, times)
    gsigns = kernel.grade_signs(n_gen)

    def rhs(t, y):
        ci, cm, cp, cn = source(t)
        p0, p1 = y
        out0 = kernel.multiply(ci, p0, n_gen) \
            + kernel.multiply(cm, gsigns * p1, n_gen)
        out1 = kernel.multiply(ci, p1, n_gen) \
            + kernel.multiply(cn, p1, n_gen) \
            + kernel.multiply(cp, gsigns * p0, n_gen)
        return -1j * np.stack((out0, out1))

    y0 = np.stack((s0.psi0.coeffs, s0.psi1.coeffs))
    rec_idx = config.record_indices()
    rec_set = {int(i) for i in rec_idx}
    states: list[FermionState] = []
    eigenvalues: list = []
    phase_factors: list = []
    residuals: list[float] = []
    norm_dev: list[float] = []
    ip0 = inner_product(s0, s0)

    def observer(i, t, y):
        if i not in rec_set:
            return
        state = FermionState(gens, Multivector(gens, y[0]), Multivector(gens, y[1]))
        states.append(state)
        # physical norm^2 = body of <psi|psi>; the soul components are only
        # conserved for parity-even Hamiltonians
        norm_dev.append(abs(inner_product(state, state).body - ip0.body))
        try:
            lam, res = extract_eigenvalue(state)
        except VacuumAmplitudeZero:
            eigenvalues.append(None)
            residuals.append(np.inf)
            phase_factors.append(None)
            return
        eigenvalues.append(lam)
        residuals.append(res)
        if lam.is_odd_degree_one():
            ref = make_coherent(lam)
            phase_factors.append(state.psi0 * invert(ref.psi0))
        else:
            phase_factors.append(None)

    end = _rk4(rhs, y0, times, observer)
    _check_step(rhs, y0, config, end, "fermion Schrödinger")

    spec = h if isinstance(h, HamiltonianSpec) else None
    return Trajectory(
        kind=kind,
        config=config,
        full_times=times,
        record_indices=rec_idx,
        times=times[rec_idx],
        states=states,
        eigenvalues=eigenvalues,
        residuals=np.asarray(residuals),
        norm_dev=np.asarray(norm_dev),
        phase_factors=phase_factors,
        spec=spec,
        gens=gens,
    )


# -- boson Schrödinger evolution ----------------------------------------------


def evolve_schrodinger_boson(spec: HamiltonianSpec, s0: BosonState,
                             config: IntegrationConfig) -> Trajectory:
    """RK4 on truncated amplitudes under omega*a†a + f*a† + conj(f)*a + g."""
    if spec.kind != "boson":
        raise ValidationError("boson evolution needs a boson spec")
    times = config.times()
    spec.validate_real_coefficients(times)
    nlev = np.arange(s0.amps.size)
    sq = np.sqrt(np.arange(1, s0.amps.size))

    def rhs(t, y):
        up = np.zeros_like(y)
        up[1:] = sq * y[:-1]
        down = np.zeros_like(y)
        down[:-1] = sq * y[1:]
        f = complex(spec.forcing(t))
        return -1j * (spec.omega(t) * (nlev * y) + f * up + np.conj(f) * down
                      + spec.scalar(t) * y)

    y0 = s0.amps.copy()
    norm0 = s0.norm_sq()
    rec_idx = config.record_indices()
    rec_set = {int(i) for i in rec_idx}
    states: list[BosonState] = []
    eigenvalues: list[complex] = []
    residuals: list[float] = []
    norm_dev: list[float] = []
    max_tail = [0.0]

    def observer(i, t, y):
        nsq = float(np.sum(np.abs(y) ** 2))
        tail = float((np.abs(y[-1]) ** 2 + np.abs(y[-2]) ** 2) / nsq)
        if tail > max_tail[0]:
            max_tail[0] = tail
        if tail > BREACH_TOL:
            raise TruncationBreach(
                f"tail mass {tail:.3e} at t={t:.6g} exceeds {BREACH_TOL}"
            )
        if i not in rec_set:
            return
        state = BosonState(y)
        states.append(state)
        lam, res = eigenvalue_lsq(state)
        eigenvalues.append(lam)
        residuals.append(res)
        norm_dev.append(abs(nsq - norm0))

    end = _rk4(rhs, y0, times, observer)
    _check_step(rhs, y0, config, end, "boson Schrödinger")

    return Trajectory(
        kind="boson",
        config=config,
        full_times=times,
        record_indices=rec_idx,
        times=times[rec_idx],
        states=states,
        eigenvalues=eigenvalues,
        residuals=np.asarray(residuals),
        norm_dev=np.asarray(norm_dev),
        spec=spec,
        max_tail=max_tail[0],
    )


# -- grassmann classical sector -----------------------------------------------


def _as_coeff_array(value, gens: GeneratorSet) -> np.ndarray:
    if isinstance(value, Multivector):
        if value.gens != gens:
            raise MismatchedGenerators("forcing over a foreign generator set")
        return value.coeffs
    arr = np.zeros(gens.dim, dtype=np.complex128)
    arr[0] = value
    return arr


def evolve_grassmann_classical(spec, zeta0: Multivector,
                               config: IntegrationConfig) -> GrassmannPath:
    """Integrate i zeta' = omega zeta - eta and the phase equation.

    `spec` is either a grassmann HamiltonianSpec or a triple
    (omega_fn, eta_fn, delta_fn) with eta_fn/delta_fn mapping t to
    Multivectors (odd degree-one and even self-conjugate respectively).

    Note the implemented phase law is phi' = -delta + (zeta* eta + eta* zeta)/2,
    which is what makes exp(i phi(t)) |zeta(t)> solve the Schrödinger equation
    with the i d/dt psi = H psi sign convention.
    """
    gens = zeta0.gens
    require_odd_degree_one(zeta0, "initial eigenvalue")
    n_gen = gens.n_generators
    times = config.times()

    if isinstance(spec, HamiltonianSpec):
        if spec.kind != "grassmann":
            raise ValidationError("grassmann classical evolution needs a "
                                  "grassmann spec")
        if spec.gens != gens:
            raise MismatchedGenerators("spec and initial value generator sets differ")
        spec.validate_real_coefficients(times)
        idx = gens.index(spec.eta_generator)
        used_bits = {mask for mask in zeta0.terms}
        if any(mask >> idx & 1 for mask in used_bits):
            raise GeneratorCollision(
                f"eta generator {spec.eta_generator!r} appears in the initial value"
            )
        bit = 1 << idx
        omega_fn = spec.omega

        def eta_arr(t):
            arr = np.zeros(gens.dim, dtype=np.complex128)
            arr[bit] = spec.forcing(t)
            return arr

        def delta_arr(t):
            arr = np.zeros(gens.dim, dtype=np.complex128)
            arr[0] = spec.scalar(t)
            return arr
    else:
        omega_fn, eta_fn, delta_fn = spec
        eta_arr = _memo1(lambda t: _as_coeff_array(eta_fn(t), gens))
        delta_arr = _memo1(lambda t: _as_coeff_array(delta_fn(t), gens))

    def rhs(t, y):
        zeta, _ = y
        eta = eta_arr(t)
        zdot = -1j * (omega_fn(t) * zeta - eta)
        zc = kernel.conjugate(zeta, n_gen)
        ec = kernel.conjugate(eta, n_gen)
        phidot = -delta_arr(t) + 0.5 * (
            kernel.multiply(zc, eta, n_gen) + kernel.multiply(ec, zeta, n_gen)
        )
        return np.stack((zdot, phidot))

    y0 = np.stack((zeta0.coeffs, np.zeros(gens.dim, dtype=np.complex128)))
    zeta_series = np.zeros((times.size, gens.dim), dtype=np.complex128)
    phi_series = np.zeros((times.size, gens.dim), dtype=np.complex128)

    def observer(i, t, y):
        zeta_series[i] = y[0]
        phi_series[i] = y[1]

    end = _rk4(rhs, y0, times, observer)
    _check_step(rhs, y0, config, end, "grassmann classical")
    return GrassmannPath(gens, times, zeta_series, phi_series)


# -- operator transport ---------------------------------------------------------


def evolve_operator_transport(h, op0: FermionOperator,
                              config: IntegrationConfig) -> list[FermionOperator]:
    """Transport an operator along the evolution: dX/dt = i [X, H(t)].

    The solution is X(t) = U(t) X(0) U(t)†, i.e. the invariant whose initial
    value is X(0). Sampled at every grid time.
    """
    gens = op0.gens
    times = config.times()
    source, _ = _fermion_coeff_source(h, gens, times)
    n_gen = gens.n_generators

    def rhs(t, y):
        hc = source(t)
        xh = _compose_coeff_arrays(y, hc, n_gen)
        hx = _compose_coeff_arrays(hc, y, n_gen)
        return 1j * (np.stack(xh) - np.stack(hx))

    y0 = np.stack([c.coeffs for c in op0.coefficients()])
    series: list[FermionOperator] = []

    def observer(i, t, y):
        series.append(
            FermionOperator(gens, *(Multivector(gens, row) for row in y))
        )

    end = _rk4(rhs, y0, times, observer)
    _check_step(rhs, y0, config, end, "operator transport")
    return series


# -- invariance condition -------------------------------------------------------


def _fd_derivative(series: np.ndarray, dt: float) -> np.ndarray:
    """Centered differences, second-order one-sided at the endpoints."""
    out = np.empty_like(series)
    out[1:-1] = (series[2:] - series[:-2]) / (2.0 * dt)
    out[0] = (-3.0 * series[0] + 4.0 * series[1] - series[2]) / (2.0 * dt)
    out[-1] = (3.0 * series[-1] - 4.0 * series[-2] + series[-3]) / (2.0 * dt)
    return out


def _operator_series(b_series, gens: GeneratorSet, n_times: int):
    if isinstance(b_series, FermionInvariantPath):
        return [b_series.operator_at(i, gens) for i in range(n_times)]
    ops = list(b_series)
    if len(ops) != n_times:
        raise ValidationError("operator series and grid lengths differ")
    return ops


def invariant_residual(b_series, h, config: IntegrationConfig,
                       gens: GeneratorSet | None = None,
                       calibrate: bool = True) -> np.ndarray:
    """Per-time sup-norm of dB/dt - i[B, H] over the basis coefficients."""
    times = config.times()
    dt = times[1] - times[0]
    if calibrate:
        _fd_order_check(dt)
    if gens is None:
        if isinstance(b_series, FermionInvariantPath):
            gens = h.gens if isinstance(h, HamiltonianSpec) and h.gens is not None \
                else GeneratorSet(())
        else:
            gens = b_series[0].gens
    ops = _operator_series(b_series, gens, times.size)
    if isinstance(h, HamiltonianSpec):
        h_at = lambda t: hamiltonian_operator(h, t, gens)  # noqa: E731
        h.validate_real_coefficients(times)
    else:
        h_at = h

    coeff_stack = np.stack(
        [np.stack([c.coeffs for c in op.coefficients()]) for op in ops]
    )  # (n_times, 4, dim)
    dcoeff = _fd_derivative(coeff_stack, dt)

    residuals = np.zeros(times.size)
    for i, t in enumerate(times):
        b_op = ops[i]
        h_op = h_at(t)
        comm = b_op * h_op - h_op * b_op
        diff = [
            dcoeff[i, k] - 1j * c.coeffs
            for k, c in enumerate(comm.coefficients())
        ]
        residuals[i] = max(float(np.max(np.abs(d))) for d in diff)
    return residuals


def _fd_order_check(dt: float, span_steps: int = 16) -> None:
    """Verify O(dt^2) behaviour of the differencing on a known-exact case."""
    ratios = []
    ref = None
    for scale in (1.0, 0.5):
        step = dt * scale
        n = int(span_steps / scale)
        ts = step * np.arange(n + 1)
        series = np.exp(1j * ts)
        approx = _fd_derivative(series, step)
        err = float(np.max(np.abs(approx - 1j * series)))
        ratios.append(err)
    ratio = ratios[0] / ratios[1] if ratios[1] > 0 else np.inf
    if not 2.5 <= ratio <= 7.0:
        raise GridTooCoarse(
            f"finite-difference refinement ratio {ratio:.2f} is not O(dt^2) at dt={dt:.3e}"
        )
