"""Domain types shared by every module.

Initial data are finite sums of Gaussian wave packets

    f(x) = sum_i A_i exp(-a_i |x - x0_i|^2 + 2 pi i v_i . x),

with a_i > 0.  They are Schwartz class, evolve in closed form under the
free Schrodinger flow, and have closed-form pairwise L2 overlaps, so every
space-time functional computed by quadrature has an analytic cross-check.
Momenta are stored so that the Fourier transform of a packet (kernel
exp(-2 pi i x.xi)) is centered exactly at v -- no stray 2 pi factors.

The other residents: grid snapshots for the spectral propagator, radial
multiplier weights as analytic derivative stacks, quadrature plans, and the
per-experiment verification report.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import InvalidParameterError


# ---------------------------------------------------------------------------
# wave packets
# ---------------------------------------------------------------------------

def _as_vector(x, n_hint=None) -> np.ndarray:
    v = np.atleast_1d(np.asarray(x, dtype=float))
    if v.ndim != 1:
        raise InvalidParameterError("packet vectors must be one-dimensional")
    if n_hint is not None and v.size != n_hint:
        raise InvalidParameterError(
            f"vector length {v.size} does not match dimension {n_hint}"
        )
    if not np.all(np.isfinite(v)):
        raise InvalidParameterError("packet vectors must be finite")
    v.setflags(write=False)
    return v


@dataclass(frozen=True, eq=False)
class WavePacket:
    """One Gaussian packet A exp(-a|x-x0|^2 + 2 pi i v.x)."""

    amplitude: complex
    width: float
    center: np.ndarray
    momentum: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "amplitude", complex(self.amplitude))
        object.__setattr__(self, "width", float(self.width))
        if not np.isfinite(self.width) or self.width <= 0.0:
            raise InvalidParameterError(f"packet width must be positive, got {self.width}")
        if not np.isfinite(self.amplitude):
            raise InvalidParameterError("packet amplitude must be finite")
        center = _as_vector(self.center)
        momentum = _as_vector(self.momentum, n_hint=center.size)
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "momentum", momentum)

    @property
    def n(self) -> int:
        return self.center.size


@dataclass(frozen=True, eq=False)
class WavePacketSum:
    """Datum f as an ordered superposition of packets in dimension n."""

    n: int
    packets: tuple

    def __post_init__(self):
        n = int(self.n)
        if n < 1:
            raise InvalidParameterError(f"dimension must be >= 1, got {n}")
        object.__setattr__(self, "n", n)
        pk = tuple(self.packets)
        for p in pk:
            if not isinstance(p, WavePacket):
                raise InvalidParameterError("packets must be WavePacket instances")
            if p.n != n:
                raise InvalidParameterError(
                    f"packet dimension {p.n} does not match datum dimension {n}"
                )
        object.__setattr__(self, "packets", pk)

    def __len__(self) -> int:
        return len(self.packets)

    # parameter arrays, the form every numeric kernel consumes
    def parameter_arrays(self):
        m = len(self.packets)
        B = np.array([p.amplitude for p in self.packets], dtype=complex)
        a = np.array([p.width for p in self.packets], dtype=float)
        c = (
            np.array([p.center for p in self.packets], dtype=float)
            if m
            else np.zeros((0, self.n))
        )
        v = (
            np.array([p.momentum for p in self.packets], dtype=float)
            if m
            else np.zeros((0, self.n))
        )
        return B, a, c, v


def packet(amplitude, width, center, momentum=None) -> WavePacket:
    center = np.atleast_1d(np.asarray(center, dtype=float))
    if momentum is None:
        momentum = np.zeros_like(center)
    return WavePacket(amplitude, width, center, momentum)


def packet_sum(packets: Sequence[WavePacket], n: int | None = None) -> WavePacketSum:
    packets = tuple(packets)
    if n is None:
        if not packets:
            raise InvalidParameterError("empty packet list needs an explicit dimension")
        n = packets[0].n
    return WavePacketSum(n, packets)


def translate(f: WavePacketSum, shift) -> WavePacketSum:
    """The datum x -> f(x - shift).

    Centers move by the shift and each amplitude picks up the phase
    exp(-2 pi i v.shift); moduli are unchanged.
    """
    h = _as_vector(shift, n_hint=f.n)
    return WavePacketSum(
        f.n,
        tuple(
            WavePacket(
                p.amplitude * np.exp(-2j * np.pi * float(p.momentum @ h)),
                p.width,
                p.center + h,
                p.momentum,
            )
            for p in f.packets
        ),
    )


def boost(f: WavePacketSum, velocity) -> WavePacketSum:
    """The datum x -> exp(2 pi i velocity.x) f(x)."""
    V = _as_vector(velocity, n_hint=f.n)
    return WavePacketSum(
        f.n,
        tuple(
            WavePacket(p.amplitude, p.width, p.center, p.momentum + V)
            for p in f.packets
        ),
    )


def dilate(f: WavePacketSum, lam: float) -> WavePacketSum:
    """The datum x -> f(lam * x)."""
    lam = float(lam)
    if lam <= 0:
        raise InvalidParameterError(f"dilation factor must be positive, got {lam}")
    return WavePacketSum(
        f.n,
        tuple(
            WavePacket(p.amplitude, p.width * lam**2, p.center / lam, p.momentum * lam)
            for p in f.packets
        ),
    )


# ---------------------------------------------------------------------------
# closed-form L2 pairing of complex-width Gaussian families
# ---------------------------------------------------------------------------

def gaussian_inner(B1, alpha1, c1, v1, B2, alpha2, c2, v2) -> complex:
    """<p, q> = int conj(p) q dx for two families of Gaussian packets.

    Each family is sum_i B_i exp(-alpha_i |x-c_i|^2 + 2 pi i v_i.x) with
    Re alpha_i > 0, real centers and momenta.  Completing the square in the
    pair product gives, with S = conj(alpha1_i) + alpha2_j,
    b = conj(alpha1_i) c1_i + alpha2_j c2_j and w = v2_j - v1_i,

        (pi/S)^(n/2) exp[ (b.b + 2 pi i w.b - pi^2 w.w)/S
                          - conj(alpha1_i)|c1_i|^2 - alpha2_j|c2_j|^2 ].

    The half-integer power uses the principal branch, which is safe because
    Re S > 0 keeps S off the cut.
    """
    B1 = np.asarray(B1, dtype=complex)
    B2 = np.asarray(B2, dtype=complex)
    alpha1 = np.asarray(alpha1, dtype=complex)
    alpha2 = np.asarray(alpha2, dtype=complex)
    c1 = np.asarray(c1, dtype=float)
    c2 = np.asarray(c2, dtype=float)
    v1 = np.asarray(v1, dtype=float)
    v2 = np.asarray(v2, dtype=float)
    if B1.size == 0 or B2.size == 0:
        return 0.0 + 0.0j
    n = c1.shape[1]

    a1c = np.conj(alpha1)
    S = a1c[:, None] + alpha2[None, :]
    b = a1c[:, None, None] * c1[:, None, :] + alpha2[None, :, None] * c2[None, :, :]
    w = v2[None, :, :] - v1[:, None, :]
    bb = (b * b).sum(axis=-1)
    wb = (w * b).sum(axis=-1)
    ww = (w * w).sum(axis=-1)
    expo = (
        (bb + 2j * np.pi * wb - np.pi**2 * ww) / S
        - a1c[:, None] * (c1 * c1).sum(axis=-1)[:, None]
        - alpha2[None, :] * (c2 * c2).sum(axis=-1)[None, :]
    )
    pref = np.conj(B1)[:, None] * B2[None, :] * np.exp(
        0.5 * n * (np.log(np.pi) - np.log(S))
    )
    return complex((pref * np.exp(expo)).sum())


def l2_norm_sq(f: WavePacketSum) -> float:
    """int |f|^2 dx in closed form via pairwise Gaussian overlaps."""
    B, a, c, v = f.parameter_arrays()
    alpha = a.astype(complex)
    value = gaussian_inner(B, alpha, c, v, B, alpha, c, v)
    # the Gram sum is real and nonnegative up to roundoff
    return max(value.real, 0.0)


def relative_residual(lhs, rhs, floor: float):
    """|lhs - rhs| / max(|lhs|, |rhs|, floor); floor keeps 0 = 0 well posed."""
    lhs = np.asarray(lhs, dtype=float)
    rhs = np.asarray(rhs, dtype=float)
    denom = np.maximum(np.maximum(np.abs(lhs), np.abs(rhs)), floor)
    denom = np.where(denom > 0, denom, 1.0)
    return np.abs(lhs - rhs) / denom


# ---------------------------------------------------------------------------
# randomized packet suites
# ---------------------------------------------------------------------------

def random_packet_suite(
    n: int,
    count: int = 5,
    packets_per_datum: int = 2,
    seed: int = 0,
    width_range=(0.6, 1.8),
    center_scale: float = 1.0,
    momentum_scale: float = 0.5,
    amplitude_range=(0.5, 1.2),
) -> list[WavePacketSum]:
    """Deterministic suite of packet sums for randomized experiments."""
    rng = np.random.default_rng(seed)
    suite = []
    for _ in range(count):
        pk = []
        for _ in range(packets_per_datum):
            mod = rng.uniform(*amplitude_range)
            phase = rng.uniform(0.0, 2.0 * np.pi)
            a = rng.uniform(*width_range)
            x0 = rng.uniform(-center_scale, center_scale, size=n)
            v = rng.uniform(-momentum_scale, momentum_scale, size=n)
            pk.append(WavePacket(mod * np.exp(1j * phase), a, x0, v))
        suite.append(WavePacketSum(n, tuple(pk)))
    return suite


# ---------------------------------------------------------------------------
# grid snapshots
# ---------------------------------------------------------------------------

def grid_axis(L: float, N: int) -> np.ndarray:
    """Sample points -L + j*(2L/N), j = 0..N-1, over the box [-L, L)."""
    return -L + (2.0 * L / N) * np.arange(N)


@dataclass(frozen=True, eq=False)
class GridField:
    """Uniform tensor-grid samples of a complex field on [-L, L)^n."""

    n: int
    L: float
    N: int
    samples: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        n = int(self.n)
        N = int(self.N)
        L = float(self.L)
        if n not in (1, 2, 3):
            raise InvalidParameterError(f"grid dimension must be 1, 2 or 3, got {n}")
        if L <= 0:
            raise InvalidParameterError(f"half-width must be positive, got {L}")
        if N <= 0 or N % 2:
            raise InvalidParameterError(f"points per axis must be positive even, got {N}")
        samples = np.asarray(self.samples, dtype=complex)
        if samples.shape != (N,) * n:
            raise InvalidParameterError(
                f"sample shape {samples.shape} does not match {(N,) * n}"
            )
        samples.setflags(write=False)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "N", N)
        object.__setattr__(self, "L", L)
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "t", float(self.t))

    @property
    def dx(self) -> float:
        return 2.0 * self.L / self.N

    def axis(self) -> np.ndarray:
        return grid_axis(self.L, self.N)


def boundary_mass_fraction(g: GridField) -> float:
    """Fraction of |samples|^2 within L/2 of the box boundary.

    The aliasing sentinel: a large fraction means the field has spread to
    where the periodic wrap-around is about to matter.
    """
    x = np.abs(g.axis()) >= g.L / 2.0
    mask = np.zeros((g.N,) * g.n, dtype=bool)
    for ax in range(g.n):
        shape = [1] * g.n
        shape[ax] = g.N
        mask |= x.reshape(shape)
    dens = np.abs(g.samples) ** 2
    total = dens.sum()
    if total == 0.0:
        return 0.0
    return float(dens[mask].sum() / total)


# ---------------------------------------------------------------------------
# radial weights
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class RadialWeight:
    """A radial multiplier as an analytic derivative stack.

    d0..d4 map radii r >= 0 to psi, psi', psi'', psi''', psi''''.  slope_inf
    is lim_{r->inf} psi'(r).  knots lists radii where the definition changes
    piece (quadrature aligns panel edges there).
    """

    d0: Callable[[np.ndarray], np.ndarray]
    d1: Callable[[np.ndarray], np.ndarray]
    d2: Callable[[np.ndarray], np.ndarray]
    d3: Callable[[np.ndarray], np.ndarray]
    d4: Callable[[np.ndarray], np.ndarray]
    slope_inf: float
    label: str
    knots: tuple = ()

    def derivative(self, order: int):
        return (self.d0, self.d1, self.d2, self.d3, self.d4)[order]

    def stack(self, r):
        r = np.asarray(r, dtype=float)
        return np.stack([self.d0(r), self.d1(r), self.d2(r), self.d3(r), self.d4(r)])


# ---------------------------------------------------------------------------
# quadrature plan
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class QuadraturePlan:
    """Knobs for every space-time integral.

    tau_space: relative tail mass allowed past the spatial truncation radius.
    fixed_radius: optional hard truncation override (None = adaptive).
    time_horizon: default finite horizon for experiments that take none.
    time_panels: initial panel count per time interval before adaptivity.
    time_nodes: Gauss-Legendre nodes per time panel.
    rel_tol: relative tolerance per functional evaluation.
    decay_guess: initial tail exponent for limit extrapolation.
    aliasing_threshold: boundary-mass fraction tolerated on grids.
    summation: 'compensated' (math.fsum) or 'ordered' plain reduction.
    """

    tau_space: float = 1e-10
    fixed_radius: float | None = None
    time_horizon: float = 2.0
    time_panels: int = 2
    time_nodes: int = 16
    rel_tol: float = 1e-8
    decay_guess: float = 1.0
    aliasing_threshold: float = 1e-8
    summation: str = "compensated"
    max_panels: int = 4000

    def __post_init__(self):
        for name in ("tau_space", "time_horizon", "rel_tol", "decay_guess",
                     "aliasing_threshold"):
            if not getattr(self, name) > 0:
                raise InvalidParameterError(f"{name} must be strictly positive")
        if self.fixed_radius is not None and not self.fixed_radius > 0:
            raise InvalidParameterError("fixed_radius must be positive when set")
        if self.time_panels < 1 or self.time_nodes < 2:
            raise InvalidParameterError("need >= 1 time panel and >= 2 nodes")
        if self.summation not in ("compensated", "ordered"):
            raise InvalidParameterError(f"unknown summation mode {self.summation!r}")
        if self.max_panels < 8:
            raise InvalidParameterError("max_panels too small to be useful")


# ---------------------------------------------------------------------------
# verification report
# ---------------------------------------------------------------------------

@dataclass(eq=False)
class VerificationReport:
    """Per-experiment record: schedule, two sides, residuals, limit, verdict."""

    experiment: str
    n: int
    datum_id: str
    weight_id: str
    params: np.ndarray
    lhs: np.ndarray
    rhs: np.ndarray
    tolerance: float
    floor: float
    extrapolated_limit: float = float("nan")
    limit_error: float = float("nan")
    passed: bool = False
    notes: str = ""
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        self.params = np.asarray(self.params, dtype=float)
        self.lhs = np.asarray(self.lhs, dtype=float)
        self.rhs = np.asarray(self.rhs, dtype=float)
        if not (self.params.shape == self.lhs.shape == self.rhs.shape):
            raise InvalidParameterError("schedule, lhs and rhs must align")

    @property
    def abs_residual(self) -> np.ndarray:
        return np.abs(self.lhs - self.rhs)

    @property
    def rel_residual(self) -> np.ndarray:
        return relative_residual(self.lhs, self.rhs, self.floor)
