"""Finite-alphabet compound wiretap channels.

Channels are row-stochastic matrices ``P(out | in)``. Everything is in nats,
including the binary entropy inside the leakage bounds; the error-probability
bounds are dimensionless.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

ROW_TOL = 1e-12
MAX_GRID_POINTS = 20_000_000


@dataclass(frozen=True)
class FiniteChannel:
    """Row-stochastic transition matrix; row ``x`` is the output law given input ``x``."""

    matrix: np.ndarray

    def __post_init__(self):
        M = np.array(self.matrix, dtype=float)
        if M.ndim != 2 or M.shape[0] < 1 or M.shape[1] < 1:
            raise ValidationError(f"channel must be a non-empty 2-D matrix, got shape {M.shape}")
        if not np.all(np.isfinite(M)):
            raise ValidationError("channel has non-finite entries")
        neg = np.argwhere(M < 0)
        if neg.size:
            r, c = neg[0]
            raise ValidationError(f"channel entry ({r}, {c}) is negative: {M[r, c]}")
        sums = M.sum(axis=1)
        bad = np.flatnonzero(np.abs(sums - 1.0) > ROW_TOL)
        if bad.size:
            raise ValidationError(f"channel row {int(bad[0])} sums to {sums[bad[0]]!r}, not 1")
        M.setflags(write=False)
        object.__setattr__(self, "matrix", M)

    @property
    def in_size(self) -> int:
        return self.matrix.shape[0]

    @property
    def out_size(self) -> int:
        return self.matrix.shape[1]


def bsc(p: float) -> FiniteChannel:
    """Binary symmetric channel with crossover probability ``p``."""
    return FiniteChannel(np.array([[1.0 - p, p], [p, 1.0 - p]]))


@dataclass(frozen=True)
class CompoundDMCFamily:
    """States ``s`` with legitimate channel ``W_s`` and eavesdropper channel ``V_s``."""

    states: tuple

    def __post_init__(self):
        if len(self.states) == 0:
            raise ValidationError("a compound family needs at least one state")
        states = tuple(
            (l if isinstance(l, FiniteChannel) else FiniteChannel(l), e if isinstance(e, FiniteChannel) else FiniteChannel(e))
            for l, e in self.states
        )
        x, y, z = states[0][0].in_size, states[0][0].out_size, states[0][1].out_size
        for s, (l, e) in enumerate(states):
            if l.in_size != x or e.in_size != x:
                raise ValidationError(f"state {s}: input alphabet size differs from state 0 ({x})")
            if l.out_size != y:
                raise ValidationError(f"state {s}: legitimate output size {l.out_size} != {y}")
            if e.out_size != z:
                raise ValidationError(f"state {s}: eavesdropper output size {e.out_size} != {z}")
        object.__setattr__(self, "states", states)

    @property
    def sizes(self) -> tuple[int, int, int]:
        l, e = self.states[0]
        return l.in_size, l.out_size, e.out_size


def _entropy_rows(P: np.ndarray) -> np.ndarray:
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(P > 0, -P * np.log(P), 0.0)
    return t.sum(axis=-1)


def _mi_batch(P: np.ndarray, W: np.ndarray) -> np.ndarray:
    # P: (k, |X|) input laws -> I(X;Y) for each row, in nats
    return _entropy_rows(P @ W) - P @ _entropy_rows(W)


def _as_dist(p, size: int) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if p.shape != (size,):
        raise ValidationError(f"input distribution has shape {p.shape}, channel expects ({size},)")
    if np.any(p < 0) or abs(p.sum() - 1.0) > ROW_TOL:
        raise ValidationError(f"not a probability vector: {p}")
    return p


def mutual_information(p, ch: FiniteChannel) -> float:
    """``I(X;Y)`` in nats for input law ``p``; ``0 ln 0`` is taken as 0."""
    p = _as_dist(p, ch.in_size)
    return max(float(_mi_batch(p[None, :], ch.matrix)[0]), 0.0)


def binary_entropy(x: float) -> float:
    """``H_2(x)`` in nats."""
    if not 0.0 <= x <= 1.0:
        raise ValidationError(f"binary entropy argument must lie in [0, 1], got {x}")
    if x in (0.0, 1.0):
        return 0.0
    return -x * math.log(x) - (1.0 - x) * math.log1p(-x)


# ---------------------------------------------------------------- achievable rate


def _simplex_lattice(size: int, N: int):
    """Yield chunks of lattice points ``k / N`` on the probability simplex."""
    if size == 1:
        yield np.ones((1, 1))
        return
    if size == 2:
        k = np.arange(N + 1)
        yield np.stack([k, N - k], axis=1) / N
        return
    for head in itertools.product(range(N + 1), repeat=size - 2):
        used = sum(head)
        if used > N:
            continue
        k = np.arange(N - used + 1)
        block = np.empty((k.size, size))
        block[:, : size - 2] = head
        block[:, size - 2] = k
        block[:, size - 1] = N - used - k
        yield block / N


def _objective(P: np.ndarray, fam: CompoundDMCFamily) -> np.ndarray:
    legit = np.min([_mi_batch(P, l.matrix) for l, _ in fam.states], axis=0)
    eaves = np.max([_mi_batch(P, e.matrix) for _, e in fam.states], axis=0)
    return legit - eaves


def _refine(p: np.ndarray, value: float, fam: CompoundDMCFamily, step: float) -> tuple[np.ndarray, float]:
    # one pass of pairwise mass transfers with a shrinking move size
    size = p.size
    delta = step
    while delta > step * 1e-4:
        improved = True
        while improved:
            improved = False
            for i in range(size):
                for j in range(size):
                    if i == j or p[j] <= 0:
                        continue
                    q = p.copy()
                    move = min(delta, q[j])
                    q[i] += move
                    q[j] -= move
                    v = float(_objective(q[None, :], fam)[0])
                    if v > value + 1e-15:
                        p, value, improved = q, v, True
        delta *= 0.5
    return p, value


def compound_rate_lower_bound(family: CompoundDMCFamily, grid_step: float = 1e-3) -> tuple[float, np.ndarray]:
    """``max_P min_s I(X;Y_s) - max_s I(X;Z_s)`` over a simplex grid, clamped at zero.

    The grid winner is polished by one coordinate-ascent pass. Ties between grid
    points keep the lexicographically first one.
    """
    if grid_step <= 0 or grid_step > 1:
        raise ValidationError(f"grid_step must lie in (0, 1], got {grid_step}")
    size = family.sizes[0]
    if size > 4:
        raise ValidationError(f"grid search supports |X| <= 4, got {size}")
    N = int(round(1.0 / grid_step))
    points = math.comb(N + size - 1, size - 1)
    if points > MAX_GRID_POINTS:
        raise ValidationError(
            f"grid with step {grid_step} has {points} points on a {size}-letter simplex; use a coarser step"
        )
    best_v, best_p = -math.inf, None
    for block in _simplex_lattice(size, N):
        vals = _objective(block, family)
        k = int(np.argmax(vals))
        if vals[k] > best_v:
            best_v, best_p = float(vals[k]), block[k].copy()
    best_p, best_v = _refine(best_p, best_v, family, 1.0 / N)
    return max(best_v, 0.0), best_p


# ---------------------------------------------------------------- quantization


def quantize_channel(ch: FiniteChannel, L: int, other_out_size: int | None = None) -> FiniteChannel:
    """Round every entry to a multiple of ``1/L`` and repair each row sum on its largest entry.

    ``other_out_size`` is the output alphabet size of the partner channel of the
    wiretap pair (defaults to this channel's own); ``L`` must be at least
    ``2 |Y|^2 |Z|^2``.
    """
    y = ch.out_size
    z = y if other_out_size is None else int(other_out_size)
    if L < 2 * y * y * z * z:
        raise ValidationError(f"L={L} is below the required 2|Y|^2|Z|^2 = {2 * y * y * z * z}")
    counts = np.rint(ch.matrix * L).astype(np.int64)
    for row, orig in zip(counts, ch.matrix):
        row[int(np.argmax(orig))] += L - int(row.sum())
    if np.any(counts < 0):
        raise ValidationError("row-sum repair produced a negative entry")
    return FiniteChannel(counts / L)


@dataclass(frozen=True)
class BoundCheck:
    name: str
    holds: bool
    worst_margin: float
    violations: tuple = ()


@dataclass(frozen=True)
class QuantizationReport:
    L: int
    checks: tuple

    @property
    def all_hold(self) -> bool:
        return all(c.holds for c in self.checks)

    def get(self, name: str) -> BoundCheck:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)


def quantization_check(
    original: tuple[FiniteChannel, FiniteChannel],
    quantized: tuple[FiniteChannel, FiniteChannel],
    L: int,
    p_samples: int = 100,
    seed: int = 0,
) -> QuantizationReport:
    """Evaluate the additive, multiplicative and mutual-information approximation bounds.

    Margins are ``bound - observed`` (negative means violated). Multiplicative
    violations list every ``(channel, x, out)`` entry that breaks the bound.
    """
    (W, V), (Wq, Vq) = original, quantized
    if W.matrix.shape != Wq.matrix.shape or V.matrix.shape != Vq.matrix.shape:
        raise ValidationError("original and quantized channels differ in shape")
    y, z = W.out_size, V.out_size
    add_bound = y * z / L
    mult = 2.0 ** (2.0 * y * y * z * z / L)
    mi_bound = 2.0 * (y * z) ** 1.5 / math.sqrt(L)
    checks = []
    for label, a, b in (("legit", W, Wq), ("eaves", V, Vq)):
        dev = np.abs(a.matrix - b.matrix)
        checks.append(BoundCheck(f"additive_{label}", bool(dev.max() <= add_bound), float(add_bound - dev.max())))
    for label, a, b in (("legit", W, Wq), ("eaves", V, Vq)):
        slack = mult * b.matrix - a.matrix
        bad = tuple((label, int(i), int(j)) for i, j in np.argwhere(slack < 0))
        checks.append(BoundCheck(f"multiplicative_{label}", not bad, float(slack.min()), bad))
    rng = np.random.default_rng(seed)
    P = rng.dirichlet(np.ones(W.in_size), size=p_samples) if p_samples > 0 else np.empty((0, W.in_size))
    for label, a, b in (("legit", W, Wq), ("eaves", V, Vq)):
        if P.shape[0]:
            dev = float(np.max(np.abs(_mi_batch(P, a.matrix) - _mi_batch(P, b.matrix))))
        else:
            dev = 0.0
        checks.append(BoundCheck(f"mutual_information_{label}", dev <= mi_bound, mi_bound - dev))
    return QuantizationReport(L, tuple(checks))


# ---------------------------------------------------------------- bound evaluators


@dataclass(frozen=True)
class BoundParams:
    n: int
    L: float
    x_size: int
    y_size: int
    z_size: int
    alpha: float
    beta: float
    a: float

    def __post_init__(self):
        for name in ("n", "L", "x_size", "y_size", "z_size", "alpha", "beta", "a"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValidationError(f"{name} must be positive and finite, got {v}")
        floor = 2.0 * self.y_size**2 * self.z_size**2 * max(1.0, 1.0 / self.alpha)
        if self.a <= floor:
            raise ValidationError(f"a={self.a} must exceed 2|Y|^2|Z|^2 max(1, 1/alpha) = {floor}")

    @classmethod
    def minimal_a(cls, y_size: int, z_size: int, alpha: float) -> float:
        return 2.0 * y_size**2 * z_size**2 * max(1.0, 1.0 / alpha)


@dataclass(frozen=True)
class LeakageBounds:
    error_bound: float
    leakage_bound: float
    approx_error_bound: float
    approx_leakage_bound: float


def _pow2(x: float) -> float:
    return math.inf if x > 1023 else 2.0**x


def leakage_transfer(n: int, L: float, y_size: int, z_size: int) -> float:
    """Extra leakage when a code for the quantized channel runs on the original one (nats)."""
    arg = y_size * z_size**2 / L
    if arg >= 1.0:
        raise ValidationError(
            f"binary entropy argument |Y||Z|^2/L = {arg:g} must be below 1; increase L"
        )
    return 4.0 * n * (y_size * z_size**2 * math.log(z_size) / L + binary_entropy(arg))


def leakage_bound(params: BoundParams) -> LeakageBounds:
    """Evaluate the four closed-form reliability and leakage bounds.

    ``error_bound`` and ``leakage_bound`` use ``params.L``; the two ``approx_``
    bounds use the blocklength-dependent choice ``L = a n^2``.
    """
    p = params
    xyz = p.x_size * p.y_size * p.z_size
    err = _pow2(xyz / 4.0 * math.log2(p.L + 1.0) - p.n * p.alpha)
    leak = leakage_transfer(p.n, p.L, p.y_size, p.z_size)
    Ln = p.a * p.n**2
    yz2 = 2.0 * p.y_size**2 * p.z_size**2
    approx_err = _pow2(xyz / 4.0 * math.log2(Ln + 1.0) - p.n * (p.alpha - yz2 / Ln))
    approx_leak = 2.0 ** (-p.n * p.beta) + leakage_transfer(p.n, Ln, p.y_size, p.z_size)
    return LeakageBounds(err, leak, approx_err, approx_leak)


def n_binary_entropy_decay(c: float, ns) -> np.ndarray:
    """``n H_2(c / n^2)`` along a schedule of blocklengths (requires ``c / n^2 < 1``)."""
    return np.array([n * binary_entropy(c / n**2) for n in ns])


# ---------------------------------------------------------------- orderings


@dataclass(frozen=True)
class OrderingCertificate:
    """Outcome of an ordering test; ``sampled`` marks a certificate that is not a proof."""

    holds: bool
    sampled: bool
    witness: tuple | None = None
    residual: float | None = None

    def __bool__(self) -> bool:
        return self.holds


def project_simplex_rows(D: np.ndarray) -> np.ndarray:
    """Euclidean projection of every row onto the probability simplex (sort-based)."""
    n = D.shape[1]
    u = -np.sort(-D, axis=1)
    css = np.cumsum(u, axis=1) - 1.0
    idx = np.arange(1, n + 1)
    cond = u - css / idx > 0
    rho = n - 1 - np.argmax(cond[:, ::-1], axis=1)
    theta = css[np.arange(D.shape[0]), rho] / (rho + 1)
    return np.maximum(D - theta[:, None], 0.0)


def is_degraded(
    legit: FiniteChannel,
    eaves: FiniteChannel,
    tol: float = 1e-9,
    max_iter: int = 100_000,
    window: int = 1000,
) -> OrderingCertificate:
    """Search for a row-stochastic ``D`` with ``V = W D`` by alternating projections.

    Alternates between the affine set ``{D : W D = V}`` and row-wise simplex
    projection. Declared infeasible when the residual ``max|V - W D|`` fails to
    improve by a relative ``1e-12`` over ``window`` iterations.
    """
    W, V = legit.matrix, eaves.matrix
    if W.shape[0] != V.shape[0]:
        raise ValidationError("channels must share the input alphabet")
    Wp = np.linalg.pinv(W)
    D = np.full((W.shape[1], V.shape[1]), 1.0 / V.shape[1])
    best = math.inf
    last_mark = math.inf
    for it in range(max_iter):
        D = D - Wp @ (W @ D - V)
        D = project_simplex_rows(D)
        res = float(np.abs(V - W @ D).max())
        best = min(best, res)
        if best <= tol:
            return OrderingCertificate(True, False, None, best)
        if (it + 1) % window == 0:
            if last_mark - best <= 1e-12 * max(last_mark, 1e-300) or not math.isfinite(last_mark) and best == last_mark:
                return OrderingCertificate(False, False, None, best)
            last_mark = best
    return OrderingCertificate(False, False, None, best)


def _as_tuple(p: np.ndarray) -> tuple:
    return tuple(float(v) for v in p)


def _test_distributions(size: int, samples: int, rng: np.random.Generator) -> np.ndarray:
    parts = [np.eye(size), np.full((1, size), 1.0 / size)]
    if samples > 0:
        parts.append(rng.dirichlet(np.ones(size), size=samples))
    return np.vstack(parts)


def is_less_capable(
    legit: FiniteChannel, eaves: FiniteChannel, p_samples: int = 1000, seed: int = 0
) -> OrderingCertificate:
    """Sampled check of ``I(X;Y) >= I(X;Z)`` at vertices, the uniform law and random laws."""
    if legit.in_size != eaves.in_size:
        raise ValidationError("channels must share the input alphabet")
    P = _test_distributions(legit.in_size, p_samples, np.random.default_rng(seed))
    diff = _mi_batch(P, legit.matrix) - _mi_batch(P, eaves.matrix)
    k = int(np.argmin(diff))
    if diff[k] < -1e-10:
        return OrderingCertificate(False, True, (_as_tuple(P[k]),), float(diff[k]))
    return OrderingCertificate(True, True, None, float(diff[k]))


def is_noisier_concavity(
    legit: FiniteChannel, eaves: FiniteChannel, pair_samples: int = 1000, seed: int = 0
) -> OrderingCertificate:
    """Sampled midpoint-concavity test of ``I(X;Y) - I(X;Z)`` in the input law."""
    if legit.in_size != eaves.in_size:
        raise ValidationError("channels must share the input alphabet")
    rng = np.random.default_rng(seed)
    size = legit.in_size
    A = _test_distributions(size, pair_samples, rng)
    B = _test_distributions(size, pair_samples, rng)[rng.permutation(A.shape[0])]

    def f(P):
        return _mi_batch(P, legit.matrix) - _mi_batch(P, eaves.matrix)

    gap = f(0.5 * (A + B)) - 0.5 * (f(A) + f(B))
    k = int(np.argmin(gap))
    if gap[k] < -1e-10:
        return OrderingCertificate(False, True, (_as_tuple(A[k]), _as_tuple(B[k])), float(gap[k]))
    return OrderingCertificate(True, True, None, float(gap[k]))
