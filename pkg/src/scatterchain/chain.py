"""Chain algebra for equally spaced identical cells.

Two independent routes to the N-cell amplitudes: iterated recurrence
relations (exact scattering composition with explicit position phases) and
the Chebyshev closed form for the transmission probability.  Agreement of
the two is the standing cross-check for everything downstream.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .cells import Lattice, cell_smatrix
from .core import MODULUS_FLOOR, ScatteringMatrix, WaveNumber, principal_phase
from .errors import ResonanceDivergenceError, UndefinedAmplitudeError

_LOG_HUGE = 700.0  # exp beyond this overflows a double


def displace(s: ScatteringMatrix, a: float) -> ScatteringMatrix:
    """Amplitudes of the same scatterer rigidly shifted right by a.

    t is untouched; l picks up e^{2ika}, r picks up e^{-2ika}.  Negative a
    shifts left.  Moduli, hence unitarity, are preserved exactly.
    """
    phase = cmath.exp(2.0j * s.k.k * a)
    return ScatteringMatrix(t=s.t, l=s.l * phase, r=s.r * phase.conjugate(), k=s.k)


def compose(sA: ScatteringMatrix, sB: ScatteringMatrix) -> ScatteringMatrix:
    """Scattering matrix of two scatterers in series, sA entirely left of sB.

    Both inputs must already be expressed in the same global coordinates and
    share one wave number.  Summing all back-and-forth bounces between the
    two gives the geometric-series closed form

        t = tA tB / (1 - lB rA)
        l = lA + tA^2 lB / (1 - lB rA)
        r = rB + tB^2 rA / (1 - lB rA)

    which is unitary and associative.
    """
    if sA.k.k != sB.k.k:
        raise ValueError("cannot compose scattering matrices at different wave numbers")
    den = 1.0 - sB.l * sA.r
    if abs(den) < 1e-14:
        raise ResonanceDivergenceError(
            "composition denominator 1 - lB*rA vanished; inputs are not a "
            "valid unitary pair"
        )
    return ScatteringMatrix(
        t=sA.t * sB.t / den,
        l=sA.l + sA.t * sA.t * sB.l / den,
        r=sB.r + sB.t * sB.t * sA.r / den,
        k=sA.k,
    )


@dataclass(frozen=True)
class ChainState:
    """Per-N scattering matrices s^(1)..s^(N) of a growing chain at fixed k.

    t_log_moduli and t_phases track ln|t^(n)| and the continuously
    accumulated arg t^(n) from the recurrence itself, so transmission phases
    stay meaningful deep in a gap where the complex t underflows, and carry
    no mod-2pi ambiguity between successive n.
    """

    lattice: Lattice
    k: WaveNumber
    matrices: tuple[ScatteringMatrix, ...]
    t_log_moduli: np.ndarray
    t_phases: np.ndarray

    def __post_init__(self) -> None:
        for name in ("t_log_moduli", "t_phases"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    def __len__(self) -> int:
        return len(self.matrices)

    @property
    def transmissions(self) -> np.ndarray:
        """|t^(n)|^2 for n = 1..N, via the log moduli (graceful underflow)."""
        return np.exp(2.0 * self.t_log_moduli)


def _cell_polar(s_cell: ScatteringMatrix) -> tuple[float, float]:
    mod = abs(s_cell.t)
    if mod < MODULUS_FLOOR:
        raise UndefinedAmplitudeError("cell transmission amplitude is below floor")
    return math.log(mod), principal_phase(s_cell.t)


def _safe_exp(log_mod: float, phase: float) -> complex:
    # Underflows to 0 for very negative log moduli instead of raising.
    if log_mod < -_LOG_HUGE:
        return 0.0 + 0.0j
    return cmath.exp(complex(log_mod, phase))


def chain_amplitudes(lattice: Lattice, k: WaveNumber) -> ChainState:
    """Grow the chain by appending cells on the right.

    With the single cell's (t, l, r) at the origin and n cells already in
    place, the cell added at x = n*a gives

        t^(n+1) = t^(n) t / D_n
        l^(n+1) = l^(n) + (t^(n))^2 l e^{2ikna} / D_n
        r^(n+1) = r e^{-2ikna} + t^2 r^(n) / D_n,   D_n = 1 - l r^(n) e^{2ikna}.

    Every s^(n) is unitary; t^(n) is tracked in log-polar form.
    """
    s_cell = cell_smatrix(lattice.cell, k)
    lt_c, pt_c = _cell_polar(s_cell)
    tc, lc, rc = s_cell.t, s_cell.l, s_cell.r
    kk = k.k
    a = lattice.a

    lt, pt = lt_c, pt_c
    l, r = lc, rc
    matrices = [s_cell]
    log_moduli = [lt]
    phases = [pt]
    for n in range(1, lattice.N):
        pos_phase = cmath.exp(2.0j * kk * n * a)
        den = 1.0 - lc * r * pos_phase
        if abs(den) < 1e-14:
            raise ResonanceDivergenceError(
                f"recurrence denominator vanished at n={n}; inputs corrupted"
            )
        t_sq = _safe_exp(2.0 * lt, 2.0 * pt)
        l, r = (
            l + t_sq * lc * pos_phase / den,
            rc * pos_phase.conjugate() + tc * tc * r / den,
        )
        lt += lt_c - math.log(abs(den))
        pt += pt_c - cmath.phase(den)
        matrices.append(ScatteringMatrix(t=_safe_exp(lt, pt), l=l, r=r, k=k))
        log_moduli.append(lt)
        phases.append(pt)
    return ChainState(
        lattice=lattice,
        k=k,
        matrices=tuple(matrices),
        t_log_moduli=np.array(log_moduli),
        t_phases=np.array(phases),
    )


def chain_amplitudes_addleft(lattice: Lattice, k: WaveNumber) -> ChainState:
    """Grow the chain by shifting it right by a and prepending a cell at the origin.

    Independent recursion path, in particular for the right reflection:

        r^(n+1) = r^(n) e^{-2ika} + (t^(n))^2 r / (1 - l^(n) r e^{2ika}).

    Must reproduce chain_amplitudes exactly up to rounding.
    """
    s_cell = cell_smatrix(lattice.cell, k)
    lt_c, pt_c = _cell_polar(s_cell)
    tc, lc, rc = s_cell.t, s_cell.l, s_cell.r
    shift = cmath.exp(2.0j * k.k * lattice.a)

    lt, pt = lt_c, pt_c
    l, r = lc, rc
    matrices = [s_cell]
    log_moduli = [lt]
    phases = [pt]
    for n in range(1, lattice.N):
        den = 1.0 - l * shift * rc
        if abs(den) < 1e-14:
            raise ResonanceDivergenceError(
                f"recurrence denominator vanished at n={n}; inputs corrupted"
            )
        t_sq = _safe_exp(2.0 * lt, 2.0 * pt)
        l, r = (
            lc + tc * tc * l * shift / den,
            r * shift.conjugate() + t_sq * rc / den,
        )
        lt += lt_c - math.log(abs(den))
        pt += pt_c - cmath.phase(den)
        matrices.append(ScatteringMatrix(t=_safe_exp(lt, pt), l=l, r=r, k=k))
        log_moduli.append(lt)
        phases.append(pt)
    return ChainState(
        lattice=lattice,
        k=k,
        matrices=tuple(matrices),
        t_log_moduli=np.array(log_moduli),
        t_phases=np.array(phases),
    )


def bloch_parameter(s_cell: ScatteringMatrix, a: float) -> float:
    """z = cos(alpha_t + k a) / |t| of a single cell.

    |z| <= 1 marks a band of the infinite chain, |z| > 1 a gap with total
    reflection; for the delta comb z reduces to the Kronig-Penney dispersion
    cos(ka) + (g/k) sin(ka).
    """
    mod = abs(s_cell.t)
    if mod < MODULUS_FLOOR:
        raise UndefinedAmplitudeError("transmission amplitude below floor: z undefined")
    alpha_t = principal_phase(s_cell.t)
    return math.cos(alpha_t + s_cell.k.k * a) / mod


# Half-width of the |z| = 1 window where the trig/hyperbolic forms are 0/0
# and the polynomial limit U_{n}(+-1) = (n+1)(+-1)^n takes over.
CHEBYSHEV_EDGE_WINDOW = 1e-8


def _chebyshev_recurrence(n: int, z: float) -> float:
    u_prev, u = 1.0, 2.0 * z
    if n == 0:
        return u_prev
    for _ in range(n - 1):
        u_prev, u = u, 2.0 * z * u - u_prev
    return u


def chebyshev_U(n: int, z: float) -> float:
    """Chebyshev polynomial of the second kind U_n(z) on the whole real line.

    sin((n+1)g)/sin(g) with g = arccos z inside (-1, 1); the hyperbolic
    analogue sinh((n+1)h)/sinh(h), sign-adjusted for z < -1, outside; the
    three-term recurrence within CHEBYSHEV_EDGE_WINDOW of z = +-1 where both
    closed forms degenerate to 0/0.  Overflows saturate to +-inf.
    """
    if n < 0:
        raise ValueError(f"polynomial order must be >= 0, got {n}")
    z = float(z)
    if abs(z - 1.0) < CHEBYSHEV_EDGE_WINDOW or abs(z + 1.0) < CHEBYSHEV_EDGE_WINDOW:
        return _chebyshev_recurrence(n, z)
    if abs(z) < 1.0:
        gamma = math.acos(z)
        return math.sin((n + 1) * gamma) / math.sin(gamma)
    eta = math.acosh(abs(z))
    sign = 1.0 if z > 0.0 else (-1.0) ** (n % 2)
    x = (n + 1) * eta
    if x > _LOG_HUGE:
        return math.inf * sign
    return sign * math.sinh(x) / math.sinh(eta)


def chebyshev_transmission(s_cell: ScatteringMatrix, a: float, N: int) -> float:
    """Closed-form N-cell transmission probability

        |t^(N)|^2 = 1 / (1 + U_{N-1}(z)^2 (1 - |t|^2)/|t|^2),

    z = cos(alpha_t + ka)/|t| from the single cell.  Returns a value in
    (0, 1]; deep in a gap the hyperbolic branch is evaluated in the log
    domain, so the result stays exact down to the double-precision underflow
    threshold and then degrades gracefully to 0.0.
    """
    if N < 1:
        raise ValueError(f"cell count must be >= 1, got {N}")
    mod2 = abs(s_cell.t) ** 2
    if mod2 == 0.0:
        raise UndefinedAmplitudeError("transmission amplitude below floor")
    rho = (1.0 - mod2) / mod2
    if rho == 0.0:
        return 1.0
    z = bloch_parameter(s_cell, a)
    if abs(abs(z) - 1.0) > CHEBYSHEV_EDGE_WINDOW and abs(z) > 1.0:
        eta = math.acosh(abs(z))
        ne = N * eta
        log_sinh_n = ne - math.log(2.0) if ne > 20.0 else math.log(math.sinh(ne))
        log_x = math.log(rho) + 2.0 * (log_sinh_n - math.log(math.sinh(eta)))
        if log_x > _LOG_HUGE:
            return math.exp(-log_x)  # underflows to 0.0 past the double range
        return 1.0 / (1.0 + math.exp(log_x))
    u = chebyshev_U(N - 1, z)
    return 1.0 / (1.0 + rho * u * u)


def transmission_profile(
    cell, a: float, n_values: np.ndarray, k_values: np.ndarray
) -> np.ndarray:
    """|t^(N)|^2 on a (N, k) grid via the closed form, vectorized over k.

    Returns an array of shape (len(n_values), len(k_values)).  Log-domain
    evaluation keeps deep-gap entries finite (underflow to 0.0) for chain
    lengths far beyond what the direct sinh form tolerates.
    """
    n_values = np.asarray(n_values, dtype=int)
    k_values = np.asarray(k_values, dtype=float)
    if np.any(n_values < 1):
        raise ValueError("cell counts must be >= 1")

    nk = k_values.size
    z = np.empty(nk)
    rho = np.empty(nk)
    for i, kv in enumerate(k_values):
        s = cell_smatrix(cell, WaveNumber(kv))
        mod2 = abs(s.t) ** 2
        z[i] = bloch_parameter(s, a)
        rho[i] = (1.0 - mod2) / mod2

    band = np.abs(z) < 1.0 - CHEBYSHEV_EDGE_WINDOW
    gap = np.abs(z) > 1.0 + CHEBYSHEV_EDGE_WINDOW
    edge = ~(band | gap)

    gamma = np.arccos(np.clip(z, -1.0, 1.0))
    sin_gamma = np.sin(gamma)
    eta = np.arccosh(np.clip(np.abs(z), 1.0, None))
    sinh_eta = np.sinh(eta)

    out = np.empty((n_values.size, nk))
    for row, n in enumerate(n_values):
        t_row = np.empty(nk)
        if np.any(band):
            u_sq = (np.sin(n * gamma[band]) / sin_gamma[band]) ** 2
            t_row[band] = 1.0 / (1.0 + rho[band] * u_sq)
        if np.any(gap):
            # 1/(1 + rho U^2) in the log domain: U = sinh(n eta)/sinh(eta).
            ne = n * eta[gap]
            log_sinh_n = np.where(
                ne > 20.0, ne - math.log(2.0), np.log(np.sinh(np.minimum(ne, 25.0)))
            )
            log_x = np.log(rho[gap]) + 2.0 * (log_sinh_n - np.log(sinh_eta[gap]))
            t_row[gap] = np.exp(-np.logaddexp(0.0, log_x))
        for i in np.nonzero(edge)[0]:
            u = _chebyshev_recurrence(int(n) - 1, z[i])
            t_row[i] = 1.0 / (1.0 + rho[i] * u * u)
        out[row] = t_row
    return out
