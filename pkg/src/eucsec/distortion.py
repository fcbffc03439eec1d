"""Distortion constants of a subspace E of l_p^N.

    lambda_min(E, p) = min { |x|_p : x in E, |x|_2 = 1 }
    lambda_max(E, p) = max { |x|_p : x in E, |x|_2 = 1 }

For real E and p = 1 both are computed exactly: lambda_max by enumerating
sign vectors (it is the 2 -> 1 norm of the basis), lambda_min from the
vertices of the polytope {y : |B y|_1 <= 1}. Everything else is a
certified one-sided bound from optimization on the unit sphere of E.
"""

from __future__ import annotations

import enum
import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .bounds import measure_scale, thm2_upper
from .linalg import (
    ENUMERATION_CAP,
    Subspace,
    _sign_search,
    lp_norm,
    maximize_2_to_p,
)
from .types import (
    CapExceededError,
    DomainError,
    Field,
    Kind,
    Measure,
    TheoremViolation,
    as_measure,
)

log = logging.getLogger(__name__)

SCHEMA = "eucsec.distortion/1"
SUPPORT_CAP = 200_000
MU1 = math.sqrt(2.0 / math.pi)


class Target(str, enum.Enum):
    MIN = "min"
    MAX = "max"


@dataclass
class LambdaValue:
    value: float
    kind: Kind
    witness: np.ndarray
    info: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        w = self.witness
        if np.iscomplexobj(w):
            wj = {"re": w.real.tolist(), "im": w.imag.tolist()}
        else:
            wj = w.tolist()
        return {"value": self.value, "kind": self.kind.value, "witness": wj}


def _finish(E: Subspace, y: np.ndarray, p: float, kind: Kind, measure, info=None) -> LambdaValue:
    x = E.basis @ (y / np.linalg.norm(y))
    # value is re-derived from the witness so that it reproduces exactly
    val = float(lp_norm(x, p)) * measure_scale(E.N, p, measure)
    return LambdaValue(val, kind, x, dict(info or {}))


def _require_exact_ok(E: Subspace):
    if E.field is not Field.REAL:
        raise DomainError("exact distortion is only implemented for real subspaces; "
                          "use lambda_heuristic")


# ------------------------------------------------------------------ exact p = 1

def lambda_max_exact(E: Subspace, measure=Measure.COUNTING, cap: int = ENUMERATION_CAP) -> LambdaValue:
    """max_eps |B^T eps|_2 over sign vectors, with witness B B^T eps / |B^T eps|_2."""
    _require_exact_ok(E)
    B = E.basis
    _, eps = _sign_search(B, lambda V: np.linalg.norm(V, axis=1), cap)
    y = B.T @ eps
    return _finish(E, y, 1.0, Kind.EXACT, as_measure(measure), {"eps": eps.tolist()})


def support_count(N: int, d: int) -> int:
    """Number of (d-1)-row subsets the exact lambda_min enumeration visits."""
    return math.comb(N, d - 1)


def _null_vectors(B: np.ndarray, subsets: np.ndarray, rank_tol: float):
    """Unit null vector of B[Z] for each (d-1)-subset Z; mask of full-rank Z."""
    sub = B[subsets]                      # (C, d-1, d)
    _, s, vh = np.linalg.svd(sub, full_matrices=True)
    ok = s[:, -1] > rank_tol
    return vh[:, -1, :], ok


def lambda_min_exact(E: Subspace, measure=Measure.COUNTING,
                     max_supports: int = SUPPORT_CAP) -> LambdaValue:
    """Exact min of |x|_1 on the unit sphere of E.

    The minimum is attained at a vertex direction of the section
    B_1^N cap E, i.e. at x = B y where d-1 linearly independent coordinates
    of x vanish. We visit every (d-1)-subset Z of coordinates, take the
    null direction of the rows B[Z] (skipping rank-deficient Z; every vertex
    is still reached through some independent subset) and keep the
    smallest |B y|_1.
    """
    _require_exact_ok(E)
    B = E.basis
    N, d = B.shape
    if d == 1:
        return _finish(E, np.ones(1), 1.0, Kind.EXACT, as_measure(measure))
    total = support_count(N, d)
    if total > max_supports:
        raise CapExceededError(
            f"C({N},{d - 1}) = {total} supports exceeds cap {max_supports}; use lambda_heuristic")
    best_val = math.inf
    best_y = None
    skipped = 0
    combos = itertools.combinations(range(N), d - 1)
    chunk = max(1, 400_000 // (d * d))
    while True:
        block = np.fromiter(itertools.chain.from_iterable(itertools.islice(combos, chunk)),
                            dtype=np.int64)
        if block.size == 0:
            break
        subsets = block.reshape(-1, d - 1)
        Y, ok = _null_vectors(B, subsets, 1e-10)
        skipped += int((~ok).sum())
        if not ok.any():
            continue
        Y = Y[ok]
        vals = np.abs(Y @ B.T).sum(axis=1)
        k = int(np.argmin(vals))
        if vals[k] < best_val:
            best_val, best_y = float(vals[k]), Y[k]
    if best_y is None:
        raise RuntimeError("no vertex found: basis rows are degenerate")
    if skipped:
        log.debug("lambda_min_exact: %d rank-deficient supports skipped", skipped)
    # sign-normalize the witness: largest-modulus entry positive
    x = B @ best_y
    if x[np.argmax(np.abs(x))] < 0:
        best_y = -best_y
    return _finish(E, best_y, 1.0, Kind.EXACT, as_measure(measure),
                   {"degenerate_supports": skipped, "supports": total})


# ------------------------------------------------------------------- heuristics

def _random_starts(d: int, count: int, seed, complex_: bool) -> np.ndarray:
    # drawn row-wise so that the first k starts do not depend on count
    rng = np.random.default_rng(seed)
    Y = rng.standard_normal((count, d))
    if complex_:
        Y = Y + 1j * rng.standard_normal((count, d))
    return Y.T


def _starts(B: np.ndarray, restarts: int, seed, limit: int = 64) -> np.ndarray:
    """Coordinate images B^H e_k for the heaviest rows, then random starts."""
    rn = np.linalg.norm(B, axis=1)
    rows = np.argsort(-rn, kind="stable")[:limit]
    rows = rows[rn[rows] > 1e-12]
    Y = np.concatenate([B[rows].conj().T, _random_starts(B.shape[1], restarts, seed,
                                                          np.iscomplexobj(B))], axis=1)
    return Y / np.linalg.norm(Y, axis=0)


def _sphere_descent(fun, grad, Y: np.ndarray, max_iter: int = 300, gtol: float = 1e-12):
    """Riemannian gradient descent with Armijo backtracking, one column per start."""
    F = fun(Y)
    R = Y.shape[1]
    step = np.ones(R)
    live = np.ones(R, dtype=bool)
    for _ in range(max_iter):
        G = grad(Y[:, live])
        Yl = Y[:, live]
        T = G - Yl * np.real(np.sum(Yl.conj() * G, axis=0))
        gn2 = np.sum(np.abs(T) ** 2, axis=0)
        idx = np.flatnonzero(live)
        small = gn2 <= gtol
        live[idx[small]] = False
        idx, T, gn2 = idx[~small], T[:, ~small], gn2[~small]
        if idx.size == 0:
            break
        st = step[idx] * 2.0
        done = np.zeros(idx.size, dtype=bool)
        for _ in range(60):
            todo = ~done
            C = Y[:, idx[todo]] - st[todo] * T[:, todo]
            C /= np.linalg.norm(C, axis=0)
            Fc = fun(C)
            ok = Fc <= F[idx[todo]] - 1e-4 * st[todo] * gn2[todo]
            cols = idx[todo][ok]
            Y[:, cols] = C[:, ok]
            F[cols] = Fc[ok]
            sub = np.flatnonzero(todo)
            done[sub[ok]] = True
            st[sub[~ok]] *= 0.5
            if done.all():
                break
        step[idx] = st
        # columns whose line search failed are at a (numerical) stationary point
        live[idx[~done]] = False
        if not live.any():
            break
    return Y, F


def _vertex_values(B: np.ndarray, subsets: np.ndarray):
    Y, ok = _null_vectors(B, subsets, 1e-10)
    vals = np.where(ok, np.abs(Y @ B.T).sum(axis=1), np.inf)
    return vals, Y


def _vertex_local_search(B: np.ndarray, Z: tuple, max_steps: int = 200):
    """Best-improvement walk over adjacent vertices (swap one zero coordinate).

    With M = B[Z], null vector y and W = pinv(M), dropping row a of Z leaves
    the null space span{y, w_a}; adding row j then gives the direction
    v = w_a (b_j . y) - y (b_j . w_a). Since w_a is orthogonal to y, the
    whole neighbourhood is scored from one SVD per step.
    """
    N, d = B.shape
    cur = sorted(Z)
    for step in range(max_steps + 1):
        u, s, vh = np.linalg.svd(B[cur], full_matrices=True)
        y = vh[-1]
        W = (vh[: d - 1].T / s) @ u.T
        By, BW = B @ y, B @ W
        cur_val = float(np.abs(By).sum())
        out = np.setdiff1d(np.arange(N), cur)
        if out.size == 0 or step == max_steps:
            break
        wn = np.linalg.norm(W, axis=0)
        img = BW[:, None, :] * By[None, out, None] - By[:, None, None] * BW[None, out, :]
        nrm = np.sqrt((wn[None, :] * By[out, None]) ** 2 + BW[out, :] ** 2)
        good = nrm > 1e-10 * wn[None, :]
        vals = np.where(good, np.abs(img).sum(axis=0) / np.where(good, nrm, 1.0), np.inf)
        j, a = np.unravel_index(int(np.argmin(vals)), vals.shape)
        if not vals[j, a] < cur_val * (1.0 - 1e-14):
            break
        cur = sorted(cur[:a] + cur[a + 1:] + [int(out[j])])
    return cur_val, y, tuple(cur)


def _polish_l1_min(B: np.ndarray, Y: np.ndarray, pivot_limit: int):
    """Snap each column to the vertex spanned by its d-1 smallest coordinates,
    then walk the vertex graph when the neighbourhood is small enough."""
    N, d = B.shape
    if d == 1:
        return Y, np.abs(B @ Y).sum(axis=0)
    X = np.abs(B @ Y)
    Z = np.sort(np.argsort(X, axis=0, kind="stable")[: d - 1].T, axis=1)
    vals, Yv = _vertex_values(B, Z)
    Yv = Yv.T
    base = X.sum(axis=0)
    better = vals < base
    Y = np.where(better[None, :], Yv, Y)
    vals = np.where(better, vals, base)
    if (d - 1) * (N - d + 1) > pivot_limit:
        return Y, vals
    seen = {}
    for c in range(Y.shape[1]):
        if not better[c]:
            continue
        key = tuple(Z[c])
        if key not in seen:
            seen[key] = _vertex_local_search(B, key)
        v, y, _ = seen[key]
        if v < vals[c]:
            vals[c], Y[:, c] = v, y
    return Y, vals


def lambda_heuristic(E: Subspace, p: float = 1.0, target=Target.MIN, restarts: int = 50,
                     seed=0, measure=Measure.COUNTING, max_iter: int = 300,
                     pivot_limit: int = 4000) -> LambdaValue:
    """One-sided estimate of lambda_min (an upper bound) or lambda_max (a lower bound).

    Max: power iteration y <- B^H psi_p(B y) (monotone since |.|_p is convex).
    Min: Riemannian gradient descent on the unit sphere of C^d / R^d, on a
    smoothed |.|_1 with a shrinking smoothing radius when p = 1; for real
    p = 1 the result is snapped to section vertices and improved by a walk
    over adjacent vertices. The start set is deterministic given ``seed`` and
    the first k random starts do not depend on ``restarts``.
    """
    target = Target(target)
    measure = as_measure(measure)
    if not p >= 1.0:
        raise DomainError(f"p must be >= 1, got {p!r}")
    B = E.basis
    N, d = B.shape
    Y0 = _starts(B, restarts, seed)
    if target is Target.MAX:
        f, Y, it, conv = maximize_2_to_p(B, p, Y0, max_iter=max(max_iter, 1000))
        k = int(np.argmax(f))
        return _finish(E, Y[:, k], p, Kind.LOWER_BOUND, measure,
                       {"restarts": restarts, "iterations": it, "converged": conv})

    BH = B.conj().T
    Y = Y0.astype(np.complex128 if np.iscomplexobj(B) else np.float64)
    if p == 1.0:
        scale = 1.0 / math.sqrt(N)
        schedule = (1e-1, 1e-2, 1e-3, 1e-4, 1e-6)
        for stage, delta in enumerate(schedule):
            dl = delta * scale
            iters = max_iter if stage == len(schedule) - 1 else max(1, max_iter // 5)

            def fun(C, dl=dl):
                return np.sqrt(np.abs(B @ C) ** 2 + dl * dl).sum(axis=0)

            def grad(C, dl=dl):
                Z = B @ C
                return BH @ (Z / np.sqrt(np.abs(Z) ** 2 + dl * dl))

            Y, _ = _sphere_descent(fun, grad, Y, max_iter=iters)
    else:
        def fun(C):
            return (np.abs(B @ C) ** p).sum(axis=0)

        def grad(C):
            Z = B @ C
            return p * (BH @ (np.abs(Z) ** (p - 2.0 if p >= 2 else 0.0) * _pow_map(Z, p)))

        Y, _ = _sphere_descent(fun, grad, Y, max_iter=max_iter)
    vals = lp_norm(B @ Y, p, axis=0)
    if p == 1.0 and not np.iscomplexobj(B):
        Y, vals = _polish_l1_min(B, Y, pivot_limit)
    # compare from the starting points too; the descent never increases f
    k = int(np.argmin(vals))
    return _finish(E, Y[:, k], p, Kind.UPPER_BOUND, measure, {"restarts": restarts})


def _pow_map(Z: np.ndarray, p: float) -> np.ndarray:
    """Gradient kernel |z|^(p-2) z, written to stay finite at z = 0 for p < 2."""
    if p >= 2:
        return Z
    a = np.abs(Z)
    ph = np.divide(Z, a, out=np.zeros_like(Z), where=a > 0)
    return ph * a ** (p - 1.0)


# -------------------------------------------------------------- Gaussian moment

def gaussian_l1_mean(E: Subspace) -> float:
    """E |X|_1 for the standard Gaussian vector X = sum_j x_j g_j on E.

    Each coordinate of X is Gaussian with standard deviation equal to the
    Euclidean norm of the corresponding basis row, so the mean is
    E|g| * (sum of row norms); E|g| = sqrt(2/pi) for real and sqrt(pi)/2 for
    standard complex g.
    """
    rows = np.linalg.norm(E.basis, axis=1).sum()
    c = MU1 if E.field is Field.REAL else math.sqrt(math.pi) / 2.0
    return float(c * rows)


# -------------------------------------------------------------------- dispatcher

@dataclass
class DistortionEstimate:
    lambda_min: LambdaValue
    lambda_max: LambdaValue
    p: float
    measure: Measure
    N: int
    d: int
    field: Field
    bound_check: dict

    @property
    def distortion(self) -> float:
        return self.lambda_max.value / self.lambda_min.value

    def to_dict(self) -> dict:
        return {
            "schema": SCHEMA,
            "N": self.N, "d": self.d, "p": self.p,
            "field": self.field.value, "measure": self.measure.value,
            "lambda_min": self.lambda_min.to_dict(),
            "lambda_max": self.lambda_max.to_dict(),
            "distortion": self.distortion,
            "bound_check": self.bound_check,
        }


def check_bounds(E: Subspace, lam_min: LambdaValue, lam_max: LambdaValue, p: float,
                 measure, tol: float = 1e-9) -> dict:
    """Compare the estimates with the theorem bounds.

    An exact value on the wrong side of a proven bound raises
    TheoremViolation. A heuristic value there is only recorded: an upper
    bound for lambda_min above the theorem's ceiling falsifies nothing.
    """
    N, d = E.N, E.d
    s = measure_scale(N, p, measure)
    out = {"upper_bound": None, "min_le_upper": None, "prime_lower": None,
           "max_ge_prime": None, "sandwich_ok": None, "inconclusive": []}
    violations = []
    if 1.0 <= p <= 2.0:
        ub = thm2_upper(N, d, p, E.field) * s
        out["upper_bound"] = ub
        ok = lam_min.value <= ub + tol * max(1.0, ub)
        out["min_le_upper"] = bool(ok)
        if not ok:
            (violations if lam_min.kind is Kind.EXACT else out["inconclusive"]).append(
                f"lambda_min {lam_min.value!r} > upper bound {ub!r}")
    if p == 1.0:
        lb = math.sqrt(d) * s
        out["prime_lower"] = lb
        ok = lam_max.value >= lb - tol * max(1.0, lb)
        out["max_ge_prime"] = bool(ok)
        if not ok:
            (violations if lam_max.kind is Kind.EXACT else out["inconclusive"]).append(
                f"lambda_max {lam_max.value!r} < sqrt(d) bound {lb!r}")
    # |x|_2 <= |x|_p <= N^(1/p-1/2) |x|_2 for p <= 2, reversed for p >= 2
    lo, hi = sorted((1.0, N ** (1.0 / p - 0.5)))
    lo, hi = lo * s, hi * s
    sand = (lam_min.value >= lo * (1 - tol) and lam_max.value <= hi * (1 + tol)
            and lam_min.value <= lam_max.value * (1 + tol))
    out["sandwich_ok"] = bool(sand)
    if not sand:
        violations.append("norm sandwich violated")
    out["violations"] = violations
    if violations:
        raise TheoremViolation("; ".join(violations))
    return out


def evaluate(E: Subspace, p: float = 1.0, measure=Measure.COUNTING, restarts_max: int = 50,
             restarts_min: int = 200, seed=0, cap: int = ENUMERATION_CAP,
             max_supports: int = SUPPORT_CAP) -> DistortionEstimate:
    """lambda_min and lambda_max of E, exact when eligible, plus bound checks."""
    measure = as_measure(measure)
    exact_ok = E.field is Field.REAL and p == 1.0
    if exact_ok and E.N <= cap:
        lmax = lambda_max_exact(E, measure, cap)
    else:
        lmax = lambda_heuristic(E, p, Target.MAX, restarts_max, seed, measure)
    if exact_ok and support_count(E.N, E.d) <= max_supports:
        lmin = lambda_min_exact(E, measure, max_supports)
    else:
        lmin = lambda_heuristic(E, p, Target.MIN, restarts_min, seed, measure)
    # each witness is a point of E, so it also bounds the other extremum
    if lmax.kind is not Kind.EXACT and lmin.value > lmax.value:
        lmax = LambdaValue(lmin.value, lmax.kind, lmin.witness, lmax.info)
    if lmin.kind is not Kind.EXACT and lmax.value < lmin.value:
        lmin = LambdaValue(lmax.value, lmin.kind, lmax.witness, lmin.info)
    checks = check_bounds(E, lmin, lmax, p, measure)
    return DistortionEstimate(lmin, lmax, p, measure, E.N, E.d, E.field, checks)
