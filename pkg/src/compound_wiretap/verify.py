"""Independent numerical checks of the closed-form results.

Nothing here is used to *compute* a capacity. The saddle-point routines draw
feasible covariances and channels and measure how far either side of the
sandwich ``C(R, W2w) <= C_c <= C(R*, W2)`` is violated; the grid oracle
searches the power simplex directly; the order-theoretic helpers work on
finite families of PSD matrices.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import matops
from .errors import ValidationError
from .secrecy import CapacityReport, capacity_isotropic
from .uncertainty import (
    EavesdropperUncertainty,
    LegitimateUncertainty,
    capacity_double_rank,
    capacity_double_sided,
    capacity_rank_constrained,
    equality_perturbation,
)

SADDLE_TOL = 1e-9
SCENARIOS = ("isotropic", "rank_constrained", "double_sided", "double_rank")


# ---------------------------------------------------------------- samplers


def sample_covariance(
    n: int, P_T: float, rng: np.random.Generator, optimum: np.ndarray | None = None
) -> np.ndarray:
    """Random feasible covariance (PSD, trace <= ``P_T``).

    Draws from a mixture: full-power random matrices, random trace, rank-deficient
    matrices, the optimum itself and small perturbations of the optimum.
    """
    if P_T < 0:
        raise ValidationError(f"P_T must be >= 0, got {P_T}")
    if P_T == 0:
        return np.zeros((n, n), dtype=complex)
    u = rng.random()
    if optimum is not None and u < 0.10:
        return np.array(optimum, dtype=complex)
    if optimum is not None and u < 0.30:
        return _perturb_covariance(optimum, P_T, rng)
    rank = n
    if u > 0.75 and n > 1:
        rank = int(rng.integers(1, n))
    weights = np.zeros(n)
    weights[:rank] = rng.dirichlet(np.ones(rank))
    trace = P_T if u < 0.55 else P_T * (1.0 - rng.random())
    U = matops.random_unitary(n, rng)
    R = (U * (trace * weights)) @ U.conj().T
    return 0.5 * (R + R.conj().T)


def _perturb_covariance(R0: np.ndarray, P_T: float, rng: np.random.Generator) -> np.ndarray:
    n = R0.shape[0]
    G = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    D = 0.5 * (G + G.conj().T)
    D *= 10.0 ** rng.uniform(-6, -1) * P_T / max(np.linalg.norm(D), 1e-300)
    dec = matops.eigh(R0 + D)
    vals = np.maximum(dec.values, 0.0)
    if vals.sum() > P_T:
        vals *= P_T / vals.sum()
    R = (dec.vectors * vals) @ dec.vectors.conj().T
    return 0.5 * (R + R.conj().T)


def sample_eaves(
    n: int,
    eps_power: float,
    rank_bound: int | None,
    rng: np.random.Generator,
) -> np.ndarray:
    """Random eavesdropper Gram matrix with ``lambda_1 <= eps_power`` and rank at most ``rank_bound``.

    Half the draws sit on the gain boundary (all nonzero eigenvalues equal to
    ``eps_power`` on a random subspace); the rest have eigenvalues uniform in
    ``(0, eps_power]``.
    """
    if eps_power < 0:
        raise ValidationError(f"eps_power must be >= 0, got {eps_power}")
    if eps_power == 0:
        return np.zeros((n, n), dtype=complex)
    r = n if rank_bound is None else min(rank_bound, n)
    if rng.random() < 0.5:
        vals = np.full(r, float(eps_power))
    else:
        vals = eps_power * (1.0 - rng.random(r))
    lam = np.zeros(n)
    lam[:r] = vals
    U = matops.random_unitary(n, rng)
    W = (U * lam) @ U.conj().T
    return 0.5 * (W + W.conj().T)


def sample_delta_h(
    shape: tuple[int, int],
    epsilon1: float,
    rng: np.random.Generator,
    nominal_svd: matops.SVDResult | None = None,
    equality_prob: float = 0.05,
) -> tuple[np.ndarray, bool]:
    """Random legitimate-channel perturbation with spectral norm at most ``epsilon1``.

    Returns ``(dH, is_equality)``; ``is_equality`` flags the singular-value
    shrinking perturbation of the nominal channel, drawn with ``equality_prob``.
    Another quarter of the draws are aligned with the nominal singular vectors.
    """
    if epsilon1 < 0:
        raise ValidationError(f"epsilon1 must be >= 0, got {epsilon1}")
    rows, cols = shape
    if epsilon1 == 0:
        return np.zeros(shape, dtype=complex), False
    u = rng.random()
    if nominal_svd is not None and u < equality_prob:
        return equality_perturbation(nominal_svd, epsilon1), True
    if nominal_svd is not None and u < equality_prob + 0.25:
        k = nominal_svd.singulars.size
        shrink = epsilon1 * rng.random(k)
        D = matops.SVDResult(nominal_svd.left, shrink, nominal_svd.right).reconstruct()
        return -D, False
    G = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    top = matops.spectral_norm(G)
    return G * (rng.random() * epsilon1 / top), False


# ---------------------------------------------------------------- saddle point


@dataclass(frozen=True)
class SaddleScenario:
    """Uncertainty model whose saddle point is to be checked."""

    kind: str
    eaves: EavesdropperUncertainty
    W1: np.ndarray | None = None
    legit: LegitimateUncertainty | None = None

    def __post_init__(self):
        if self.kind not in SCENARIOS:
            raise ValidationError(f"unknown scenario {self.kind!r}; expected one of {SCENARIOS}")
        if self.kind in ("isotropic", "rank_constrained") and self.W1 is None:
            raise ValidationError(f"{self.kind} scenario needs W1")
        if self.kind in ("double_sided", "double_rank") and self.legit is None:
            raise ValidationError(f"{self.kind} scenario needs a legitimate uncertainty model")
        if self.kind in ("rank_constrained", "double_rank") and self.eaves.rank_bound is None:
            raise ValidationError(f"{self.kind} scenario needs a rank bound")

    def closed_form(self, P_T: float) -> CapacityReport:
        if self.kind == "isotropic":
            return capacity_isotropic(self.W1, self.eaves.eps_power, P_T)
        if self.kind == "rank_constrained":
            return capacity_rank_constrained(self.W1, self.eaves, P_T)
        if self.kind == "double_sided":
            return capacity_double_sided(self.legit, self.eaves, P_T)
        return capacity_double_rank(self.legit, self.eaves, P_T, rng=np.random.default_rng(0))


@dataclass(frozen=True)
class SaddleReport:
    """Largest signed slacks of the two saddle inequalities (a pass is both <= 1e-9)."""

    scenario: str
    samples: int
    seed: int
    capacity: float
    max_left_violation: float
    max_right_violation: float
    corner_cases: int = 0
    equality_draws: int = 0
    equality_gap: float | None = None
    workers: int = 1
    tolerance: float = SADDLE_TOL

    @property
    def passed(self) -> bool:
        return self.max_left_violation <= self.tolerance and self.max_right_violation <= self.tolerance

    @property
    def weak_equals_strong(self) -> bool:
        """Weak and strong compound secrecy capacities coincide whenever the saddle point holds."""
        return self.passed


@dataclass
class _Problem:
    kind: str
    capacity: float
    R_star: np.ndarray
    S_star: np.ndarray
    W1w: np.ndarray
    W2w: np.ndarray
    eps_power: float
    rank_bound: int | None
    H0: np.ndarray | None = None
    epsilon1: float = 0.0
    H0_svd: matops.SVDResult | None = None
    P_T: float = 0.0
    extra: dict = field(default_factory=dict)


def _rate(W1: np.ndarray, W2: np.ndarray, R: np.ndarray) -> float:
    S = matops.psd_sqrt(R)
    return matops._logdet_ipwr_sqrt(W1, S) - matops._logdet_ipwr_sqrt(W2, S)


def _rate_at(W1: np.ndarray, W2: np.ndarray, S: np.ndarray) -> float:
    return matops._logdet_ipwr_sqrt(W1, S) - matops._logdet_ipwr_sqrt(W2, S)


def _build_problem(scenario: SaddleScenario, P_T: float) -> _Problem:
    rep = scenario.closed_form(P_T)
    R_star = rep.optimal_covariance
    if scenario.kind in ("isotropic", "rank_constrained"):
        W1w = matops.as_psd(scenario.W1, "W1")
        H0 = None
        H0_svd = None
        eps1 = 0.0
    else:
        W1w = rep.worst_legit
        H0 = scenario.legit.nominal
        H0_svd = matops.svd(H0)
        eps1 = scenario.legit.epsilon1
    return _Problem(
        kind=scenario.kind,
        capacity=rep.capacity,
        R_star=R_star,
        S_star=matops.psd_sqrt(R_star),
        W1w=W1w,
        W2w=rep.worst_eaves,
        eps_power=scenario.eaves.eps_power,
        rank_bound=scenario.eaves.rank_bound,
        H0=H0,
        epsilon1=eps1,
        H0_svd=H0_svd,
        P_T=float(P_T),
    )


def _corner_covariances(prob: _Problem) -> list[np.ndarray]:
    n = prob.R_star.shape[0]
    dec = matops.hermitian_eig(prob.W1w)
    out = [prob.R_star, np.zeros((n, n), dtype=complex), prob.P_T / n * np.eye(n, dtype=complex)]
    for i in range(n):
        v = dec.vectors[:, i : i + 1]
        out.append(prob.P_T * (v @ v.conj().T))
    return out


def _corner_eaves(prob: _Problem) -> list[np.ndarray]:
    n = prob.R_star.shape[0]
    return [prob.W2w, np.zeros((n, n), dtype=complex)]


def _legit_gram(prob: _Problem, dH: np.ndarray) -> np.ndarray:
    if prob.H0 is None:
        return prob.W1w
    return matops.gram(prob.H0 + dH)


def _saddle_chunk(args) -> tuple[float, float, int]:
    prob, count, seed, worker = args
    rng = np.random.default_rng([seed, worker])
    n = prob.R_star.shape[0]
    left = -math.inf
    right = -math.inf
    equality = 0
    for _ in range(count):
        R = sample_covariance(n, prob.P_T, rng, optimum=prob.R_star)
        left = max(left, _rate(prob.W1w, prob.W2w, R) - prob.capacity)
        W2 = sample_eaves(n, prob.eps_power, prob.rank_bound, rng)
        W1 = prob.W1w
        if prob.H0 is not None:
            dH, is_eq = sample_delta_h(prob.H0.shape, prob.epsilon1, rng, prob.H0_svd)
            equality += int(is_eq)
            W1 = _legit_gram(prob, dH)
        right = max(right, prob.capacity - _rate_at(W1, W2, prob.S_star))
    return left, right, equality


def verify_saddle(
    scenario: SaddleScenario, P_T: float, samples: int, seed: int, workers: int = 1
) -> SaddleReport:
    """Monte-Carlo check of both saddle-point inequalities for ``scenario``.

    The closed-form optimum is computed first; every draw then measures
    ``C(R, W1w, W2w) - C_c`` (left) and ``C_c - C(R*, W1, W2)`` (right), where
    ``W1`` comes from a random legitimate perturbation in the double-sided
    scenarios. Corner cases (the saddle point itself, zero, single-mode
    covariances, the singular-value shrinking perturbation) are checked
    deterministically whenever ``samples > 0``. Work is split into ``workers``
    independent streams seeded by ``(seed, worker_index)``.
    """
    if samples < 0:
        raise ValidationError(f"samples must be >= 0, got {samples}")
    if workers < 1:
        raise ValidationError(f"workers must be >= 1, got {workers}")
    prob = _build_problem(scenario, P_T)
    left = right = -math.inf
    corners = 0
    eq_gap = None
    eq_draws = 0
    if prob.H0 is not None:
        dH = equality_perturbation(prob.H0_svd, prob.epsilon1)
        W1 = _legit_gram(prob, dH)
        eq_gap = abs(_rate_at(W1, prob.W2w, prob.S_star) - prob.capacity)
    if samples > 0:
        for R in _corner_covariances(prob):
            left = max(left, _rate(prob.W1w, prob.W2w, R) - prob.capacity)
            corners += 1
        legit_corners = [prob.W1w]
        if prob.H0 is not None:
            legit_corners.append(_legit_gram(prob, np.zeros_like(prob.H0)))
            legit_corners.append(_legit_gram(prob, equality_perturbation(prob.H0_svd, prob.epsilon1)))
            eq_draws += 1
        for W2 in _corner_eaves(prob):
            for W1 in legit_corners:
                right = max(right, prob.capacity - _rate_at(W1, W2, prob.S_star))
                corners += 1
        counts = [samples // workers + (1 if w < samples % workers else 0) for w in range(workers)]
        jobs = [(prob, c, seed, w) for w, c in enumerate(counts)]
        if workers == 1:
            results = [_saddle_chunk(jobs[0])]
        else:
            with ProcessPoolExecutor(max_workers=workers) as ex:
                results = list(ex.map(_saddle_chunk, jobs))
        for lv, rv, eq in results:
            left = max(left, lv)
            right = max(right, rv)
            eq_draws += eq
    return SaddleReport(
        scenario=scenario.kind,
        samples=int(samples),
        seed=int(seed),
        capacity=prob.capacity,
        max_left_violation=left,
        max_right_violation=right,
        corner_cases=corners,
        equality_draws=eq_draws,
        equality_gap=eq_gap,
        workers=workers,
    )


# ---------------------------------------------------------------- grid oracle


def brute_force_capacity(gains, eps_power: float, P_T: float, step: float = 1e-4) -> float:
    """Grid search of the mode-power simplex for at most three modes.

    ``step`` is the grid spacing as a fraction of ``P_T``. The all-zero
    allocation is always feasible, so the result is clamped at zero.
    """
    g = np.asarray(gains, dtype=float)
    if g.ndim != 1 or not 1 <= g.size <= 3:
        raise ValidationError(f"brute force supports 1 to 3 modes, got {g.size}")
    if step <= 0 or step > 1:
        raise ValidationError(f"step must lie in (0, 1], got {step}")
    if P_T < 0 or eps_power < 0:
        raise ValidationError("P_T and eps_power must be nonnegative")
    N = int(round(1.0 / step))
    lam = P_T * np.arange(N + 1) / N
    f = [np.log1p(gi * lam) - np.log1p(eps_power * lam) for gi in g]
    if g.size == 1:
        best = f[0][N]
    elif g.size == 2:
        best = np.max(f[0] + f[1][::-1])
    else:
        best = -math.inf
        for k in range(N + 1):
            rest = N - k
            tail = f[1][: rest + 1] + f[2][rest::-1]
            best = max(best, f[0][k] + float(tail.max()))
    return max(float(best), 0.0)


# ---------------------------------------------------------------- PSD families


@dataclass(frozen=True)
class PSDFamily:
    members: tuple

    def __post_init__(self):
        if len(self.members) == 0:
            raise ValidationError("a PSD family needs at least one member")
        ms = tuple(matops.as_psd(M, f"member {i}") for i, M in enumerate(self.members))
        if len({M.shape for M in ms}) != 1:
            raise ValidationError("family members must share one dimension")
        object.__setattr__(self, "members", ms)

    def __len__(self) -> int:
        return len(self.members)

    @property
    def dim(self) -> int:
        return self.members[0].shape[0]


def _as_family(family) -> PSDFamily:
    return family if isinstance(family, PSDFamily) else PSDFamily(tuple(family))


def _order_matrix(fam: PSDFamily) -> np.ndarray:
    # geq[i, j] is True when member i >= member j
    k = len(fam)
    geq = np.eye(k, dtype=bool)
    for i in range(k):
        for j in range(k):
            if i != j:
                geq[i, j] = matops.psd_geq(fam.members[i], fam.members[j])
    return geq


def maximum_element(family) -> int | None:
    """Index of a member that dominates every other member, if one exists."""
    fam = _as_family(family)
    geq = _order_matrix(fam)
    for i in range(len(fam)):
        if geq[i].all():
            return i
    return None


def maximal_elements(family) -> list[int]:
    """Indices of members not dominated by any *different* member."""
    fam = _as_family(family)
    geq = _order_matrix(fam)
    out = []
    for j in range(len(fam)):
        dominated = any(
            geq[i, j] and np.abs(fam.members[i] - fam.members[j]).max() > matops.PSD_TOL
            for i in range(len(fam))
            if i != j
        )
        if not dominated:
            out.append(j)
    return out


@dataclass(frozen=True)
class MaximalReport:
    draws: int
    agreements: int
    max_gap: float
    maximal: tuple[int, ...]
    maximum: int | None
    maximum_agreements: int

    @property
    def all_agree(self) -> bool:
        return self.agreements == self.draws


def check_min_over_maximal(
    family, W1, R_samples: int, seed: int, P_T: float = 1.0, tol: float = 1e-12
) -> MaximalReport:
    """Compare the worst member over the whole family with the worst maximal member, per sampled ``R``."""
    fam = _as_family(family)
    W1 = matops.as_psd(W1, "W1")
    if W1.shape[0] != fam.dim:
        raise ValidationError("W1 and family members differ in dimension")
    maximal = maximal_elements(fam)
    top = maximum_element(fam)
    rng = np.random.default_rng(seed)
    agree = 0
    top_agree = 0
    gap = 0.0
    for _ in range(R_samples):
        R = sample_covariance(fam.dim, P_T, rng)
        S = matops.psd_sqrt(R)
        rates = np.array([_rate_at(W1, M, S) for M in fam.members])
        full = rates.min()
        reduced = rates[maximal].min()
        gap = max(gap, abs(full - reduced))
        agree += int(abs(full - reduced) <= tol)
        if top is not None:
            top_agree += int(abs(full - rates[top]) <= tol)
    return MaximalReport(R_samples, agree, gap, tuple(maximal), top, top_agree)


@dataclass(frozen=True)
class ChainReport:
    steps: int
    increasing: bool
    bounded: bool
    tail_diameter: float
    converged: bool


def check_increasing_chain(
    n: int, steps: int, rng: np.random.Generator, bound: float = 1.0, burn_in: int | None = None, tol: float = 1e-8
) -> ChainReport:
    """Build an increasing PSD chain below ``bound * I`` and measure its Cauchy tail.

    Increments shrink geometrically so the chain stays below the bound; the
    tail diameter is the largest Frobenius distance between members after
    ``burn_in`` steps (default: the last fifth of the chain).
    """
    if steps < 2:
        raise ValidationError("need at least two steps")
    burn = steps - max(2, steps // 5) if burn_in is None else burn_in
    W = np.zeros((n, n), dtype=complex)
    chain = [W]
    for k in range(steps):
        P = matops.random_psd(n, rng, rank=int(rng.integers(1, n + 1)))
        P /= matops.spectral_norm(P)
        W = W + bound * 2.0 ** -(k + 1) * P
        chain.append(0.5 * (W + W.conj().T))
    increasing = all(matops.psd_geq(chain[k + 1], chain[k]) for k in range(steps))
    bounded = matops.psd_geq(bound * np.eye(n), chain[-1])
    tail = chain[burn:]
    diam = max(
        (float(np.linalg.norm(a - b)) for i, a in enumerate(tail) for b in tail[i + 1 :]),
        default=0.0,
    )
    return ChainReport(steps, increasing, bounded, diam, diam < tol)
