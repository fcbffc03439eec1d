"""Matrix and vector substrate.

Orthonormal bases, l_p norms under both measures, Schatten norms, and
operator norms between l_q spaces: exact by sign enumeration where that is
feasible, otherwise certified lower bounds from (mixed-norm) power iteration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from dataclasses import field as dc_field
from typing import Optional

import numpy as np

from .types import (
    CapExceededError,
    DomainError,
    Field,
    Kind,
    Measure,
    RankDeficiencyError,
    as_field,
    as_measure,
)

ENUMERATION_CAP = 20
ORTHONORMAL_TOL = 1e-10
_CHUNK_BITS = 16


@dataclass
class Subspace:
    """A d-dimensional subspace of R^N or C^N given by an orthonormal basis.

    ``basis`` is N x d with orthonormal columns. ``provenance`` records the
    generator name, its parameters and the seed, enough to rebuild it.
    """

    basis: np.ndarray
    field: Field = Field.REAL
    provenance: dict = dc_field(default_factory=dict)

    def __post_init__(self):
        self.field = as_field(self.field)
        b = np.asarray(self.basis)
        if b.ndim != 2:
            raise ValueError("basis must be a 2-d array")
        N, d = b.shape
        if not 1 <= d <= N:
            raise DomainError(f"need 1 <= d <= N, got basis of shape {b.shape}")
        if not np.all(np.isfinite(b)):
            raise ValueError("basis has non-finite entries")
        if self.field is Field.REAL and np.iscomplexobj(b):
            raise ValueError("real subspace with complex basis")
        self.basis = b.astype(np.complex128 if self.field is Field.COMPLEX else np.float64)
        dev = orthonormality_residual(self.basis)
        if dev > ORTHONORMAL_TOL:
            raise ValueError(f"basis columns not orthonormal (max deviation {dev:.2e})")

    @property
    def N(self) -> int:
        return self.basis.shape[0]

    @property
    def d(self) -> int:
        return self.basis.shape[1]

    def contains(self, x: np.ndarray, tol: float = 1e-9) -> bool:
        x = np.asarray(x)
        resid = x - self.basis @ (self.basis.conj().T @ x)
        return float(np.linalg.norm(resid)) <= tol * max(1.0, float(np.linalg.norm(x)))

    def projector(self) -> np.ndarray:
        return self.basis @ self.basis.conj().T


def orthonormality_residual(basis: np.ndarray) -> float:
    d = basis.shape[1]
    return float(np.max(np.abs(basis.conj().T @ basis - np.eye(d))))


def orthonormalize(raw, provenance: Optional[dict] = None, field=None) -> Subspace:
    """Orthonormal basis of the column span of ``raw`` (Householder QR).

    Each column is then rotated by a unit scalar so that its largest-modulus
    entry (first one on ties) is real and positive, which makes the result
    independent of the LAPACK sign convention.
    """
    a = np.asarray(raw)
    if a.ndim != 2:
        raise ValueError("raw must be a 2-d array")
    N, d = a.shape
    if not 1 <= d <= N:
        raise DomainError(f"need N >= cols >= 1, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("raw has non-finite entries")
    if field is None:
        field = Field.COMPLEX if np.iscomplexobj(a) else Field.REAL
    field = as_field(field)
    a = a.astype(np.complex128 if field is Field.COMPLEX else np.float64)

    q, r = np.linalg.qr(a, mode="reduced")
    scale = float(np.max(np.linalg.norm(a, axis=0)))
    diag = np.abs(np.diag(r))
    bad = np.flatnonzero(diag < 1e-8 * scale)
    if scale == 0.0 or bad.size:
        col = int(bad[0]) if bad.size else 0
        raise RankDeficiencyError(f"column {col} is (numerically) in the span of the previous ones")

    idx = np.argmax(np.abs(q), axis=0)
    lead = q[idx, np.arange(d)]
    q = q * (np.abs(lead) / lead)[None, :]
    if field is Field.REAL:
        q = q.real
    return Subspace(q, field, dict(provenance or {}))


# ---------------------------------------------------------------- vector norms

def lp_norm(x, p: float = 1.0, measure=Measure.COUNTING, axis=None):
    """l_p norm of ``x`` (moduli for complex input).

    ``measure="normalized"`` averages instead of summing before the 1/p
    power; p = inf is the max modulus under both measures.
    """
    a = np.abs(np.asarray(x))
    measure = as_measure(measure)
    if not p > 0:
        raise DomainError(f"p must be positive, got {p!r}")
    if axis is None:
        a = a.ravel()
        axis = 0
    n = a.shape[axis]
    if math.isinf(p):
        return np.max(a, axis=axis)
    if p == 1:
        s = np.sum(a, axis=axis)
        return s / n if measure is Measure.NORMALIZED else s
    # scale by the max modulus so |x|^p neither underflows nor overflows
    m = np.max(a, axis=axis, keepdims=True)
    u = a / np.where(m > 0, m, 1.0)
    s = np.sum(u * u if p == 2 else u ** p, axis=axis)
    if measure is Measure.NORMALIZED:
        s = s / n
    r = np.sqrt(s) if p == 2 else s ** (1.0 / p)
    return np.squeeze(m, axis=axis) * r


def duality_map(v: np.ndarray, p: float) -> np.ndarray:
    """Unnormalized l_p duality map: ``sign(v) |v|^(p-1)`` entrywise.

    Zero entries map to zero (the chosen subgradient at p = 1).
    """
    a = np.abs(v)
    if np.iscomplexobj(v):
        ph = np.divide(v, a, out=np.zeros_like(v), where=a > 0)
    else:
        ph = np.sign(v)
    if p == 1:
        return ph
    if p == 2:
        return v.copy()
    return ph * a ** (p - 1.0)


def dual_exponent(p: float) -> float:
    if p == 1:
        return math.inf
    if math.isinf(p):
        return 1.0
    return p / (p - 1.0)


# --------------------------------------------------------------- matrix norms

def schatten_norm(A, r: float = 2.0, normalized: bool = False) -> float:
    """Schatten r-norm: the r-norm of the singular values of ``A``.

    With ``normalized=True`` the trace is divided by the dimension of the
    space ``A^*A`` acts on.
    """
    a = np.asarray(A)
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    s = np.linalg.svd(a, compute_uv=False)
    if math.isinf(r):
        return float(s.max(initial=0.0))
    measure = Measure.NORMALIZED if normalized else Measure.COUNTING
    total = np.concatenate([s, np.zeros(a.shape[1] - s.size)]) if normalized else s
    return float(lp_norm(total, r, measure))


@dataclass
class SignNorm:
    """Exact inf->1 norm with a maximizing pair of sign vectors."""

    value: float
    eps: np.ndarray
    eps_prime: np.ndarray
    kind: Kind = Kind.EXACT


@dataclass
class OpNorm:
    """Value of an operator norm together with a vector attaining it."""

    value: float
    witness: np.ndarray
    kind: Kind
    converged: bool = True
    iterations: int = 0


def _lex_smallest(rows: np.ndarray) -> np.ndarray:
    order = np.lexsort(rows.T[::-1])
    return rows[order[0]]


def _sign_search(M: np.ndarray, score, cap: int):
    """max over eps in {-1,+1}^n with eps[0] = +1 of score(eps @ M).

    Ties are broken towards the lexicographically smallest eps (-1 < +1),
    so the answer does not depend on the enumeration order.
    """
    n = M.shape[0]
    if n > cap:
        raise CapExceededError(
            f"sign enumeration over {n} coordinates exceeds cap {cap}; use a heuristic mode")
    total = 1 << (n - 1)
    chunk = 1 << min(n - 1, _CHUNK_BITS)
    shifts = np.arange(n - 1, dtype=np.int64)
    best_val = -np.inf
    best_eps = None
    for start in range(0, total, chunk):
        idx = np.arange(start, min(start + chunk, total), dtype=np.int64)
        E = np.ones((idx.size, n))
        E[:, 1:] = 1.0 - 2.0 * ((idx[:, None] >> shifts) & 1)
        vals = score(E @ M)
        m = vals.max()
        if m < best_val:
            continue
        cand = _lex_smallest(E[vals == m])
        if m > best_val or tuple(cand) < tuple(best_eps):
            best_val, best_eps = m, cand
    return float(best_val), best_eps


def opnorm_inf_to_1(A, cap: int = ENUMERATION_CAP) -> SignNorm:
    """Exact ``|A : l_inf -> l_1|`` = max over signs of ``sum_ij a_ij eps_i eps'_j``.

    The inner maximum over eps' is ``|A eps|_1``, so only 2^(N-1) outer sign
    vectors are enumerated (eps and -eps give the same value).
    """
    a = np.asarray(A)
    if np.iscomplexobj(a):
        raise DomainError("opnorm_inf_to_1 is implemented for real matrices only")
    a = a.astype(np.float64)
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    # eps runs over the columns; score rows are (A eps)^T
    val, eps = _sign_search(a.T, lambda V: np.abs(V).sum(axis=1), cap)
    img = a @ eps
    eps_prime = np.where(img >= 0, 1.0, -1.0)
    return SignNorm(val, eps, eps_prime)


def _normalize_columns(X: np.ndarray) -> np.ndarray:
    n = np.linalg.norm(X, axis=0)
    n[n == 0] = 1.0
    return X / n


def _random_starts(n: int, count: int, seed, complex_: bool) -> np.ndarray:
    rng = np.random.default_rng(seed)
    if count <= 0:
        return np.zeros((n, 0), dtype=np.complex128 if complex_ else np.float64)
    X = rng.standard_normal((count, n))
    if complex_:
        X = X + 1j * rng.standard_normal((count, n))
    return X.T


def _structured_starts_2(B: np.ndarray, limit: int = 32) -> np.ndarray:
    """Top right singular vectors and the images of the heaviest coordinates."""
    _, s, vh = np.linalg.svd(B, full_matrices=False)
    sv = vh[: min(3, vh.shape[0])].conj().T
    rn = np.linalg.norm(B, axis=1)
    rows = np.argsort(-rn, kind="stable")[:limit]
    rows = rows[rn[rows] > 0]
    co = B[rows].conj().T
    return np.concatenate([sv, co], axis=1)


def _flip_polish(B: np.ndarray, X: np.ndarray, max_rounds: int = 10_000) -> np.ndarray:
    """Sign-vector ascent for max_eps |B^T eps|_2 started from sign(B X).

    Each round takes the power step eps <- sign(B B^T eps), which never
    decreases |B^T eps|_2; columns where that step is stuck instead flip the
    single most profitable sign, if any flip helps.
    """
    E = np.where((B @ X) >= 0, 1.0, -1.0)
    row_sq = np.sum(B * B, axis=1)[:, None]
    for _ in range(max_rounds):
        V = B.T @ E
        BV = B @ V
        En = np.where(BV > 0, 1.0, np.where(BV < 0, -1.0, E))
        moved = np.any(En != E, axis=0)
        E = En
        stuck = np.flatnonzero(~moved)
        if stuck.size:
            gain = 4.0 * row_sq - 4.0 * E[:, stuck] * BV[:, stuck]
            k = np.argmax(gain, axis=0)
            g = gain[k, np.arange(stuck.size)]
            ok = g > 1e-12 * (1.0 + np.sum(V[:, stuck] ** 2, axis=0))
            E[k[ok], stuck[ok]] *= -1.0
            moved[stuck[ok]] = True
        if not moved.any():
            break
    return _normalize_columns(B.T @ E)


def maximize_2_to_p(B: np.ndarray, p: float, X0: np.ndarray, max_iter: int = 1000,
                    tol: float = 1e-15):
    """Power iteration ``x <- B^H psi_p(B x) / |.|_2`` on all columns of X0 at once.

    Returns (values, X, iterations, converged). The value of each column is
    nondecreasing along the iteration (a step that would decrease it is
    rejected), so every returned value is attained by its column.
    """
    X = _normalize_columns(X0)
    f = lp_norm(B @ X, p, axis=0)
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        G = B.conj().T @ duality_map(B @ X, p)
        Xn = _normalize_columns(G)
        fn = lp_norm(B @ Xn, p, axis=0)
        up = fn > f
        X = np.where(up[None, :], Xn, X)
        gain = np.max(np.where(up, fn - f, 0.0), initial=0.0)
        f = np.where(up, fn, f)
        if gain <= tol * max(1.0, float(f.max())):
            converged = True
            break
    if p == 1 and not np.iscomplexobj(B):
        Xp = _flip_polish(B, X)
        fp = lp_norm(B @ Xp, 1, axis=0)
        up = fp > f
        X = np.where(up[None, :], Xp, X)
        f = np.where(up, fp, f)
    return f, X, it, converged


def opnorm_2_to_p(B, p: float = 1.0, mode: str = "heuristic", restarts: int = 50,
                  seed=0, cap: int = ENUMERATION_CAP, max_iter: int = 1000) -> OpNorm:
    """``|B : l_2 -> l_p|`` for p in [1, 2].

    ``mode="exact"`` is available for p = 2 (largest singular value) and p = 1
    (``max_eps |B^T eps|_2``, needs rows <= cap). ``mode="heuristic"`` returns
    a lower bound attained by the returned witness.
    """
    b = np.asarray(B)
    if not np.all(np.isfinite(b)):
        raise ValueError("matrix has non-finite entries")
    if not 1.0 <= p <= 2.0:
        raise DomainError(f"p must lie in [1, 2], got {p!r}")
    b = b.astype(np.complex128 if np.iscomplexobj(b) else np.float64)
    if mode == "exact":
        if p == 2:
            _, s, vh = np.linalg.svd(b, full_matrices=False)
            return OpNorm(float(s[0]), vh[0].conj(), Kind.EXACT)
        if p != 1:
            raise DomainError("exact mode needs p in {1, 2}")
        if np.iscomplexobj(b):
            raise DomainError("exact 2->1 norm is implemented for real matrices only")
        val, eps = _sign_search(b, lambda V: np.linalg.norm(V, axis=1), cap)
        w = b.T @ eps
        nw = np.linalg.norm(w)
        w = w / nw if nw > 0 else np.eye(b.shape[1])[0]
        return OpNorm(val, w, Kind.EXACT)
    if mode != "heuristic":
        raise ValueError(f"unknown mode {mode!r}")
    X0 = np.concatenate(
        [_structured_starts_2(b), _random_starts(b.shape[1], restarts, seed, np.iscomplexobj(b))],
        axis=1)
    f, X, it, conv = maximize_2_to_p(b, p, X0, max_iter=max_iter)
    k = int(np.argmax(f))
    w = X[:, k] / np.linalg.norm(X[:, k])
    return OpNorm(float(lp_norm(b @ w, p)), w, Kind.LOWER_BOUND, conv, it)


def _to_sphere(G: np.ndarray, q: float) -> np.ndarray:
    """Columns of G scaled to unit l_q norm."""
    n = lp_norm(G, q, axis=0)
    n = np.where(n == 0, 1.0, n)
    return G / n


def maximize_pprime_to_p(A: np.ndarray, p: float, X0: np.ndarray, max_iter: int = 5000,
                         tol: float = 1e-15):
    """Boyd-style ascent for ``max |A x|_p`` over the unit l_{p'} sphere.

    Each step maximizes the linearization of the (convex) objective over the
    l_{p'} ball, so the objective never decreases.
    """
    pd = dual_exponent(p)
    X = _to_sphere(X0, pd)
    f = lp_norm(A @ X, p, axis=0)
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        G = A.conj().T @ duality_map(A @ X, p)
        # argmax of Re<G, x> on the l_{p'} ball is psi_p(G) rescaled
        Xn = _to_sphere(duality_map(G, p), pd)
        fn = lp_norm(A @ Xn, p, axis=0)
        up = fn > f
        X = np.where(up[None, :], Xn, X)
        gain = np.max(np.where(up, fn - f, 0.0), initial=0.0)
        f = np.where(up, fn, f)
        if gain <= tol * max(1.0, float(f.max())):
            converged = True
            break
    return f, X, it, converged


def opnorm_pprime_to_p(A, p: float, restarts: int = 50, seed=0, max_iter: int = 5000,
                       starts: Optional[np.ndarray] = None) -> OpNorm:
    """Lower bound for ``|A : l_{p'} -> l_p|`` with p in (1, 2), p' = p/(p-1)."""
    a = np.asarray(A)
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    if not 1.0 < p < 2.0:
        raise DomainError(f"p must lie strictly inside (1, 2), got {p!r}")
    a = a.astype(np.complex128 if np.iscomplexobj(a) else np.float64)
    n = a.shape[1]
    _, s, vh = np.linalg.svd(a, full_matrices=False)
    cols = [np.ones((n, 1)), vh[: min(3, vh.shape[0])].conj().T, np.eye(n)[:, : min(n, 32)],
            _random_starts(n, restarts, seed, np.iscomplexobj(a))]
    if starts is not None:
        cols.insert(0, np.asarray(starts).reshape(n, -1))
    X0 = np.concatenate(cols, axis=1)
    f, X, it, conv = maximize_pprime_to_p(a, p, X0, max_iter=max_iter)
    k = int(np.argmax(f))
    pd = dual_exponent(p)
    w = X[:, k] / lp_norm(X[:, k], pd)
    return OpNorm(float(lp_norm(a @ w, p)), w, Kind.LOWER_BOUND, conv, it)
