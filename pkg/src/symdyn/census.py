"""Periodic-orbit counts and spectral data of irreducible finite graphs.

Counts are exact integers.  Floating point appears only in the Perron data
and in the normalized ratios, which carry their tolerances with them.

First-passage series follow the usual conventions: ``l_ab(n)`` counts paths
``a = x_0, ..., x_n = b`` avoiding ``a`` at times ``1..n-1``, and ``r_ab(n)``
counts such paths avoiding ``b`` at times ``1..n-1``.  With ``z = 1/lambda``
the vectors ``(L_aj(z))_j`` and ``(R_ja(z))_j`` are left and right Perron
vectors normalized to 1 at ``a``, ``L_aa(z) = 1``, and ``mu(a) = z L_aa'(z)``
is the mean return time to ``a``, so ``nu([a]) = 1 / mu(a)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .shiftcore import InputError, ShiftGraph, is_irreducible, iter_cycle_words, scc_decompose

DEFAULT_SERIES_LENGTH = 40


@dataclass
class PerronData:
    eigenvalue: float
    left: np.ndarray
    right: np.ndarray
    period: int
    iterations: int
    residual: float

    @property
    def entropy(self) -> float:
        return math.log(self.eigenvalue)

    def measure(self) -> np.ndarray:
        """Cylinder weights ``nu([a])`` of the measure of maximal entropy."""
        w = self.left * self.right
        return w / w.sum()


def _matrix(G: ShiftGraph) -> np.ndarray:
    return np.array(G.adjacency(), dtype=float)


def perron(G: ShiftGraph, tol: float = 1e-13, max_iter: int = 1_000_000) -> PerronData:
    """Perron value, positive eigenvectors (sum 1) and period.

    Power iteration runs on ``A + I``, which is primitive with the same
    Perron vectors, so periodic graphs need no special handling.
    """
    if G.size == 0 or not is_irreducible(G):
        raise InputError("graph is not irreducible; split it with scc_decompose first")
    A = _matrix(G)
    M = A + np.eye(G.size)

    def iterate(B):
        v = np.full(G.size, 1.0 / G.size)
        for k in range(1, max_iter + 1):
            w = B @ v
            w /= w.sum()
            if np.abs(w - v).max() < tol:
                return w, k
            v = w
        return v, max_iter

    right, k1 = iterate(M)
    left, k2 = iterate(M.T)
    lam = float((A @ right).sum() / right.sum())
    residual = float(np.abs(A @ right - lam * right).max())
    period = scc_decompose(G).periods[0]
    return PerronData(lam, left, right, period, max(k1, k2), residual)


# ---------------------------------------------------------------------------
# exact periodic counts


def _int_matmul(X: list[list[int]], Y: list[list[int]]) -> list[list[int]]:
    cols = list(zip(*Y))
    return [[sum(a * b for a, b in zip(row, col)) for col in cols] for row in X]


def mobius(n: int) -> int:
    result, m, p = 1, n, 2
    while p * p <= m:
        if m % p == 0:
            m //= p
            if m % p == 0:
                return 0
            result = -result
        p += 1
    return -result if m > 1 else result


def divisors(n: int) -> list[int]:
    return [d for d in range(1, n + 1) if n % d == 0]


def matrix_powers(G: ShiftGraph, Nmax: int) -> list[list[list[int]]]:
    """Exact ``A^n`` for ``n = 0..Nmax`` (Python integers)."""
    A = G.adjacency()
    out = [[[int(i == j) for j in range(G.size)] for i in range(G.size)]]
    for _ in range(Nmax):
        out.append(_int_matmul(out[-1], A))
    return out


@dataclass
class PeriodicCounts:
    fix: dict[int, int]
    per_min: dict[int, int]
    diagonal: dict[int, list[int]]  # n -> (A^n)_aa


def periodic_counts(G: ShiftGraph, Nmax: int) -> PeriodicCounts:
    """``fix(n) = tr A^n`` and the number of points of least period ``n``."""
    powers = matrix_powers(G, Nmax)
    fix = {n: sum(powers[n][a][a] for a in range(G.size)) for n in range(1, Nmax + 1)}
    per_min = {n: sum(mobius(n // d) * fix[d] for d in divisors(n)) for n in fix}
    diag = {n: [powers[n][a][a] for a in range(G.size)] for n in fix}
    return PeriodicCounts(fix, per_min, diag)


def enumerated_counts(G: ShiftGraph, Nmax: int) -> dict[int, int]:
    """``fix(n)`` by walking every closed path of length ``n`` (oracle)."""
    return {n: sum(1 for _ in iter_cycle_words(G, n)) for n in range(1, Nmax + 1)}


# ---------------------------------------------------------------------------
# first-passage series


def _passage(A: list[list[int]], a: int, b: int, avoid: int, L: int) -> list[int]:
    n_sym = len(A)
    coeffs = [0] * (L + 1)
    v = list(A[a])
    for n in range(1, L + 1):
        coeffs[n] = v[b]
        v = [sum(v[j] * A[j][k] for j in range(n_sym) if j != avoid) for k in range(n_sym)]
    return coeffs


def _evaluate(coeffs: list[int], z: float) -> tuple[float, float]:
    val = sum(c * z ** n for n, c in enumerate(coeffs))
    der = sum(n * c * z ** (n - 1) for n, c in enumerate(coeffs) if n)
    return val, der


@dataclass
class FirstReturnSeries:
    a: int
    b: int
    L: list[int]
    R: list[int]
    z: float
    L_value: float
    R_value: float
    L_derivative: float
    tail_bound: float

    @property
    def mean_return(self) -> float:
        """``z L'(z)``: the mean return time when ``a == b``."""
        return self.z * self.L_derivative


def _tail_bound(A: list[list[int]], avoid: int, coeffs: list[int], lam: float) -> float:
    """Geometric estimate of the omitted terms of a series at ``1/lam``.

    Coefficients grow like ``theta^n`` with ``theta`` the spectral radius of
    the graph with ``avoid`` removed; the estimate extends the last
    coefficient at that rate.
    """
    keep = [i for i in range(len(A)) if i != avoid]
    sub = np.array([[A[i][j] for j in keep] for i in keep], dtype=float)
    theta = float(max(abs(np.linalg.eigvals(sub)))) if keep else 0.0
    if theta < 1e-12:
        return 0.0  # nilpotent: the series is a polynomial of degree < |A|
    ratio = theta / lam
    if ratio >= 1:
        return math.inf
    L = len(coeffs) - 1
    last = max(coeffs[L], coeffs[L - 1] * theta if L > 1 else 0)
    return float(last / lam ** L * ratio / (1 - ratio))


def first_return_series(G: ShiftGraph, a: int, b: int, L: int = DEFAULT_SERIES_LENGTH,
                        lam: float | None = None) -> FirstReturnSeries:
    A = G.adjacency()
    lam = perron(G).eigenvalue if lam is None else lam
    z = 1.0 / lam
    Lc = _passage(A, a, b, a, L)
    Rc = _passage(A, a, b, b, L)
    Lv, Ld = _evaluate(Lc, z)
    Rv, _ = _evaluate(Rc, z)
    return FirstReturnSeries(a, b, Lc, Rc, z, Lv, Rv, Ld, _tail_bound(A, a, Lc, lam))


def kac_vectors(G: ShiftGraph, a: int, L: int = DEFAULT_SERIES_LENGTH, lam: float | None = None):
    """``l^(a) = (L_aj(1/lambda))_j`` and ``r^(a) = (R_ja(1/lambda))_j``."""
    lam = perron(G).eigenvalue if lam is None else lam
    left = [first_return_series(G, a, j, L, lam).L_value for j in range(G.size)]
    right = [first_return_series(G, j, a, L, lam).R_value for j in range(G.size)]
    return left, right


# ---------------------------------------------------------------------------
# convergence of normalized counts


@dataclass
class NormalizedCountReport:
    eigenvalue: float
    period: int
    ratios: dict[int, float]  # n -> lambda^-n per_min(n), n multiple of the period
    symbol_ratios: dict[int, list[float]]  # n -> lambda^-n (A^n)_aa
    measure: list[float]
    tolerance: float
    last: float = field(init=False)
    liminf_surrogate: float = field(init=False)
    symbol_error: float = field(init=False)

    def __post_init__(self):
        ns = sorted(self.ratios)
        self.last = self.ratios[ns[-1]] if ns else math.nan
        self.liminf_surrogate = min((self.ratios[n] for n in ns[-5:]), default=math.nan)
        if ns:
            p = self.period
            row = self.symbol_ratios[ns[-1]]
            self.symbol_error = max(abs(r - p * m) for r, m in zip(row, self.measure))
        else:
            self.symbol_error = math.nan

    @property
    def passed(self) -> bool:
        return (abs(self.last - self.period) <= self.tolerance
                and self.liminf_surrogate >= self.period - 0.05
                and self.symbol_error <= self.tolerance)


def lemma62_diagnostic(G: ShiftGraph, Nmax: int, tol: float = 0.02) -> NormalizedCountReport:
    """Normalized counts of least-period points along multiples of the period."""
    pd = perron(G)
    counts = periodic_counts(G, Nmax)
    lam, p = pd.eigenvalue, pd.period
    ratios = {}
    symbol = {}
    for n in range(p, Nmax + 1, p):
        ratios[n] = counts.per_min[n] / lam ** n
        symbol[n] = [c / lam ** n for c in counts.diagonal[n]]
    return NormalizedCountReport(lam, p, ratios, symbol, [float(m) for m in pd.measure()], tol)
