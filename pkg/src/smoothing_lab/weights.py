"""Radial multiplier weights with analytic derivative stacks through order 4.

Two families ship:

* soft-abs: psi(r) = sqrt(eps^2 + r^2), the smoothed |x| multiplier.
* bump-weight: psi''(r) = h_k(r) where h_k = 1 on [0, 1], drops to 0 across
  the band [1, 1+1/k] through a fixed smooth transition, and psi is the
  second antiderivative with psi(0) = psi'(0) = 0.  The weight is exactly
  r^2/2 in the core and exactly affine past the band, so its slope at
  infinity is 1 + (1/k) int_0^1 q.

The transition profile is q(s) = B(1-s)/(B(s)+B(1-s)) with B(s)=exp(-1/s)
for s > 0 and 0 otherwise: all derivatives vanish at both band endpoints,
making h_k genuinely smooth.  Antiderivatives of q over the band are
precomputed on a 2048-node composite Gauss-Legendre rule and cached.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import roots_legendre

from .errors import InvalidParameterError, OriginError
from .model import RadialWeight


# ---------------------------------------------------------------------------
# the transition bump q and its derivatives
# ---------------------------------------------------------------------------

def _B(s):
    """exp(-1/s) for s > 0, else 0; the one-sided flat mollifier."""
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    pos = s > 0
    with np.errstate(divide="ignore", over="ignore", under="ignore"):
        out[pos] = np.exp(-1.0 / s[pos])
    return out


def _B1(s):
    """B'(s) = B(s)/s^2 on s > 0."""
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    pos = s > 0
    with np.errstate(divide="ignore", over="ignore", under="ignore"):
        out[pos] = np.exp(-1.0 / s[pos]) / s[pos] ** 2
    return out


def _B2(s):
    """B''(s) = B(s)(1 - 2s)/s^4 on s > 0."""
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    pos = s > 0
    with np.errstate(divide="ignore", over="ignore", under="ignore"):
        out[pos] = np.exp(-1.0 / s[pos]) * (1.0 - 2.0 * s[pos]) / s[pos] ** 4
    return out


def bump_transition(s):
    """q(s) = B(1-s)/(B(s)+B(1-s)): 1 for s <= 0, 0 for s >= 1, smooth."""
    s = np.asarray(s, dtype=float)
    sv = np.atleast_1d(s)
    q = np.empty_like(sv)
    q[sv <= 0.0] = 1.0
    q[sv >= 1.0] = 0.0
    mid = (sv > 0.0) & (sv < 1.0)
    sm = sv[mid]
    Bs, Bu = _B(sm), _B(1.0 - sm)
    q[mid] = Bu / (Bs + Bu)  # denominator >= 2 e^{-2} on (0, 1)
    return q.reshape(s.shape)


def bump_transition_d1(s):
    """q'(s) = -(B'(1-s)B(s) + B(1-s)B'(s)) / (B(s)+B(1-s))^2."""
    s = np.asarray(s, dtype=float)
    sv = np.atleast_1d(s)
    out = np.zeros_like(sv)
    mid = (sv > 0.0) & (sv < 1.0)
    sm = sv[mid]
    Bs, Bu = _B(sm), _B(1.0 - sm)
    B1s, B1u = _B1(sm), _B1(1.0 - sm)
    D = Bs + Bu
    out[mid] = -(B1u * Bs + Bu * B1s) / D**2
    return out.reshape(s.shape)


def bump_transition_d2(s):
    """q''(s) = (B''(1-s)B(s) - B(1-s)B''(s))/D^2 + 2 P D'/D^3,

    with P = B'(1-s)B(s) + B(1-s)B'(s) and D' = B'(s) - B'(1-s)."""
    s = np.asarray(s, dtype=float)
    sv = np.atleast_1d(s)
    out = np.zeros_like(sv)
    mid = (sv > 0.0) & (sv < 1.0)
    sm = sv[mid]
    Bs, Bu = _B(sm), _B(1.0 - sm)
    B1s, B1u = _B1(sm), _B1(1.0 - sm)
    B2s, B2u = _B2(sm), _B2(1.0 - sm)
    D = Bs + Bu
    P = B1u * Bs + Bu * B1s
    Dp = B1s - B1u
    out[mid] = (B2u * Bs - Bu * B2s) / D**2 + 2.0 * P * Dp / D**3
    return out.reshape(s.shape)


# ---------------------------------------------------------------------------
# cached antiderivatives of q over [0, 1]
# ---------------------------------------------------------------------------

_PANELS = 32
_NODES = 64  # 32 * 64 = 2048 nodes across the band


@dataclass(frozen=True, eq=False)
class BumpAntiderivatives:
    """Q(s) = int_0^s q and Q2(s) = int_0^s Q on the composite rule.

    Both extend naturally outside [0, 1]: q = 1 to the left and 0 to the
    right, so Q(s) = s for s <= 0, Q(s) = Q(1) for s >= 1, and Q2 follows.
    With that extension the band formulas for the weight are valid on all
    of [0, inf) and match the exact core/tail closed forms.
    """

    edges: np.ndarray = field(default=None)
    cum_q: np.ndarray = field(default=None)
    cum_Q: np.ndarray = field(default=None)
    q_total: float = 0.0
    sq_total: float = 0.0

    @staticmethod
    def build() -> "BumpAntiderivatives":
        x, w = roots_legendre(_NODES)
        edges = np.linspace(0.0, 1.0, _PANELS + 1)
        half = 0.5 / _PANELS
        panel_q = np.empty(_PANELS)
        panel_sq = np.empty(_PANELS)
        for p in range(_PANELS):
            mid = 0.5 * (edges[p] + edges[p + 1])
            s = mid + half * x
            qs = bump_transition(s)
            panel_q[p] = half * (w * qs).sum()
            panel_sq[p] = half * (w * s * qs).sum()
        cum_q = np.concatenate([[0.0], np.cumsum(panel_q)])
        obj = BumpAntiderivatives(edges, cum_q, None, float(cum_q[-1]),
                                  float(panel_sq.sum()))
        # second pass: cumulative of Q needs Q itself
        panel_Q = np.empty(_PANELS)
        for p in range(_PANELS):
            mid = 0.5 * (edges[p] + edges[p + 1])
            s = mid + half * x
            panel_Q[p] = half * (w * obj.Q(s)).sum()
        cum_Q = np.concatenate([[0.0], np.cumsum(panel_Q)])
        object.__setattr__(obj, "cum_Q", cum_Q)
        return obj

    def _partial(self, flat, integrand, cum):
        """cum[p] + int_{edges[p]}^{s} integrand for flat s clipped to [0, 1]."""
        inside = np.clip(flat, 0.0, 1.0)
        idx = np.minimum((inside * _PANELS).astype(int), _PANELS - 1)
        lo = self.edges[idx]
        x, w = roots_legendre(_NODES)
        half = 0.5 * (inside - lo)
        nodes = (lo + half)[:, None] + half[:, None] * x[None, :]
        vals = integrand(nodes)
        return cum[idx] + (half[:, None] * w[None, :] * vals).sum(axis=1)

    def Q(self, s):
        """int_0^s q with the natural extension outside [0, 1]."""
        s = np.asarray(s, dtype=float)
        flat = np.atleast_1d(s).reshape(-1).astype(float)
        out = self._partial(flat, bump_transition, self.cum_q)
        out[flat <= 0.0] = flat[flat <= 0.0]
        out[flat >= 1.0] = self.q_total
        return out.reshape(s.shape)

    def Q2(self, s):
        """int_0^s Q with the natural extension outside [0, 1]."""
        s = np.asarray(s, dtype=float)
        flat = np.atleast_1d(s).reshape(-1).astype(float)
        out = self._partial(flat, self.Q, self.cum_Q)
        neg = flat <= 0.0
        out[neg] = 0.5 * flat[neg] ** 2
        high = flat >= 1.0
        out[high] = self.cum_Q[-1] + self.q_total * (flat[high] - 1.0)
        return out.reshape(s.shape)


_ANTIDERIVATIVES: BumpAntiderivatives | None = None


def _bump_tables() -> BumpAntiderivatives:
    global _ANTIDERIVATIVES
    if _ANTIDERIVATIVES is None:
        _ANTIDERIVATIVES = BumpAntiderivatives.build()
    return _ANTIDERIVATIVES


# ---------------------------------------------------------------------------
# bump profile h_k
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class BumpProfile:
    """h_k: 1 on [0, 1], smooth drop across [1, 1+1/k], 0 beyond.

    Evaluations accept any real r and use |r| (the profile is even).
    """

    k: int

    def __post_init__(self):
        if int(self.k) < 1:
            raise InvalidParameterError(f"bump steepness k must be >= 1, got {self.k}")
        object.__setattr__(self, "k", int(self.k))

    @property
    def outer_edge(self) -> float:
        return (self.k + 1.0) / self.k

    def __call__(self, r):
        return bump_transition(self.k * (np.abs(np.asarray(r, dtype=float)) - 1.0))

    def d1(self, r):
        r = np.asarray(r, dtype=float)
        return self.k * bump_transition_d1(self.k * (np.abs(r) - 1.0)) * np.sign(r)

    def d2(self, r):
        r = np.asarray(r, dtype=float)
        return self.k**2 * bump_transition_d2(self.k * (np.abs(r) - 1.0))


# ---------------------------------------------------------------------------
# shipped weight families
# ---------------------------------------------------------------------------

def make_psi_eps(eps: float) -> RadialWeight:
    """psi(r) = sqrt(eps^2 + r^2): smooth |x| with curvature scale eps."""
    eps = float(eps)
    if not eps > 0:
        raise InvalidParameterError(f"eps must be positive, got {eps}")
    e2 = eps * eps

    def d0(r):
        r = np.asarray(r, dtype=float)
        return np.sqrt(e2 + r * r)

    def d1(r):
        r = np.asarray(r, dtype=float)
        return r / np.sqrt(e2 + r * r)

    def d2(r):
        r = np.asarray(r, dtype=float)
        return e2 / (e2 + r * r) ** 1.5

    def d3(r):
        r = np.asarray(r, dtype=float)
        return -3.0 * e2 * r / (e2 + r * r) ** 2.5

    def d4(r):
        r = np.asarray(r, dtype=float)
        return 3.0 * e2 * (4.0 * r * r - e2) / (e2 + r * r) ** 3.5

    return RadialWeight(d0, d1, d2, d3, d4, slope_inf=1.0,
                        label=f"soft-abs-eps{eps:g}", knots=(eps, 3.0 * eps))


def make_psi_k(k: int) -> RadialWeight:
    """Second antiderivative of the bump h_k, quadratic core, affine tail."""
    bump = BumpProfile(k)
    tab = _bump_tables()
    kk = float(bump.k)
    outer = bump.outer_edge
    slope = 1.0 + tab.q_total / kk
    # psi(r >= outer) = slope*r - offset; offset from r*H(r) - int_0^r s h(s) ds
    offset = 0.5 + tab.q_total / kk + tab.sq_total / kk**2

    def d0(r):
        r = np.asarray(r, dtype=float)
        a = np.atleast_1d(np.abs(r))
        out = np.empty_like(a)
        core = a <= 1.0
        tail = a >= outer
        band = ~core & ~tail
        out[core] = 0.5 * a[core] ** 2
        out[tail] = slope * a[tail] - offset
        ab = a[band]
        out[band] = 0.5 + (ab - 1.0) + tab.Q2(kk * (ab - 1.0)) / kk**2
        return out.reshape(r.shape)

    def d1(r):
        r = np.asarray(r, dtype=float)
        a = np.atleast_1d(np.abs(r))
        out = np.empty_like(a)
        core = a <= 1.0
        tail = a >= outer
        band = ~core & ~tail
        out[core] = a[core]
        out[tail] = slope
        out[band] = 1.0 + tab.Q(kk * (a[band] - 1.0)) / kk
        # psi' is odd; sign(0) = 0 gives the correct psi'(0) = 0
        return (out * np.sign(np.atleast_1d(r))).reshape(r.shape)

    return RadialWeight(d0, d1, bump, bump.d1, bump.d2, slope_inf=slope,
                        label=f"bump-k{bump.k}", knots=(1.0, outer))


def constant_weight(value: float = 1.0) -> RadialWeight:
    """psi = const: every derivative term vanishes; slope at infinity 0."""
    value = float(value)

    def d0(r):
        return np.full_like(np.asarray(r, dtype=float), value)

    def zero(r):
        return np.zeros_like(np.asarray(r, dtype=float))

    return RadialWeight(d0, zero, zero, zero, zero, slope_inf=0.0,
                        label=f"constant{value:g}")


def rescale(w: RadialWeight, R: float) -> RadialWeight:
    """psi_R(r) = R psi(r/R): derivative orders j scale by R^(1-j)."""
    R = float(R)
    if not R > 0:
        raise InvalidParameterError(f"rescale factor must be positive, got {R}")

    def make(j, base):
        scale = R ** (1 - j)

        def dj(r):
            return scale * base(np.asarray(r, dtype=float) / R)

        return dj

    return RadialWeight(
        make(0, w.d0), make(1, w.d1), make(2, w.d2), make(3, w.d3), make(4, w.d4),
        slope_inf=w.slope_inf,
        label=f"{w.label}-R{R:g}",
        knots=tuple(R * kn for kn in w.knots),
    )


# ---------------------------------------------------------------------------
# radial Laplacians
# ---------------------------------------------------------------------------

def radial_laplacians(w: RadialWeight, r, n: int):
    """(Lap psi, Lap^2 psi) at radii r > 0 in dimension n.

    Lap psi = psi'' + (n-1) psi'/r and

    Lap^2 psi = psi'''' + 2(n-1) psi'''/r + (n-1)(n-3)(psi'' - psi'/r)/r^2.

    The grouped difference (psi'' - psi'/r) is O(r^2) near the origin, so
    this form avoids the cancellation the split 1/r^2, 1/r^3 terms suffer.
    An affine tail (psi'' = 0, psi' = slope) gives Lap^2 =
    -(n-1)(n-3) slope/r^3: zero for n = 1 and 3, slope/r^3 for n = 2.
    """
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0.0):
        raise OriginError("radial Laplacians are singular at r = 0")
    d1, d2, d3, d4 = w.d1(r), w.d2(r), w.d3(r), w.d4(r)
    lap = d2 + (n - 1) * d1 / r
    bilap = d4 + 2.0 * (n - 1) * d3 / r + (n - 1) * (n - 3) * (d2 - d1 / r) / r**2
    return lap, bilap


def derivative_stack_check(w: RadialWeight, radii=None, h: float = 1e-4) -> dict:
    """Scale-relative central-difference error of d^j vs d^(j-1), j = 1..4.

    Error for order j is max_r |fd - d^j(r)| / max_r |d^j(r)|: relative to
    the lattice-wide scale of that derivative order, since pointwise
    relative error is ill-posed where d^j vanishes identically (weight
    tails) or underflows at flat transition endpoints.
    """
    if radii is None:
        radii = np.geomspace(0.01, 50.0, 200)
    radii = np.asarray(radii, dtype=float)
    errs = {}
    stack = [w.d0, w.d1, w.d2, w.d3, w.d4]
    for j in range(1, 5):
        fd = (stack[j - 1](radii + h) - stack[j - 1](radii - h)) / (2.0 * h)
        exact = stack[j](radii)
        scale = np.max(np.abs(exact))
        if scale == 0.0:
            scale = max(np.max(np.abs(fd)), 1.0)
        errs[j] = float(np.max(np.abs(fd - exact)) / scale)
    return errs
