"""Lemma checks and counterexample search for the l_2 -> l_p Schatten inequalities.

Two families of inequalities are probed, for p in [1, 2):

    variant B:  |B : l_2 -> l_p|      >= |B|_{S_r},  r = 2p / (2 - p)
    variant C:  |A : l_p' -> l_p|     >= |A|_{S_r},  r = p / (2 - p),  A PSD

At p = 1 both are theorems (B: |T|_HS <= |T : l_2 -> l_1|; C: tr A <= |A :
l_inf -> l_1|) and the left side is computed exactly. For p > 1 the left side
is a heuristic lower bound, so a negative slack is only evidence.
"""

from __future__ import annotations

import csv
import enum
import hashlib
import io
import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .linalg import (
    ENUMERATION_CAP,
    opnorm_2_to_p,
    opnorm_inf_to_1,
    opnorm_pprime_to_p,
    schatten_norm,
)
from .types import DomainError, Kind, TheoremViolation

TOL = 1e-9
PSD_FLOOR = -1e-10
FAMILIES = ("gaussian", "psd-wishart", "orthogonal-projection", "circulant", "sparse-pm1",
            "diagonal")
LEADERBOARD_COLUMNS = ("variant", "p", "r", "family", "seed", "instance_id", "lhs", "lhs_kind",
                       "rhs", "slack", "status")


class Status(str, enum.Enum):
    CONFIRMED = "confirmed"
    UNDECIDED = "undecided"
    CANDIDATE = "candidate_counterexample"


# ------------------------------------------------------------------ p = 1 lemmas

@dataclass
class TraceCheck:
    trace: float
    norm: float
    holds: bool
    witness: tuple


def trace_lemma_check(T, cap: int = ENUMERATION_CAP) -> TraceCheck:
    """tr(T T^T) <= |T T^T : l_inf -> l_1|, computed exactly."""
    t = np.asarray(T, dtype=np.float64)
    if t.ndim != 2:
        raise ValueError("T must be a matrix")
    A = t @ t.T
    sn = opnorm_inf_to_1(A, cap)
    tr = float(np.trace(A))
    holds = tr <= sn.value + TOL * max(1.0, sn.value)
    if not holds:
        raise TheoremViolation(f"trace {tr!r} exceeds inf->1 norm {sn.value!r}")
    return TraceCheck(tr, sn.value, holds, (sn.eps, sn.eps_prime))


@dataclass
class HSCheck:
    hs: float
    norm21: float
    holds: bool
    witness: Optional[np.ndarray] = None


def hs_vs_21_check(T, cap: int = ENUMERATION_CAP) -> HSCheck:
    """|T|_HS <= |T : l_2 -> l_1|, computed exactly."""
    t = np.asarray(T, dtype=np.float64)
    hs = schatten_norm(t, 2.0)
    nrm = opnorm_2_to_p(t, 1.0, mode="exact", cap=cap)
    holds = hs <= nrm.value + TOL * max(1.0, nrm.value)
    if not holds:
        raise TheoremViolation(f"HS norm {hs!r} exceeds 2->1 norm {nrm.value!r}")
    return HSCheck(hs, nrm.value, holds, nrm.witness)


# ------------------------------------------------------------------- instances

def schatten_index(variant: str, p: float) -> float:
    if variant == "B":
        return 2.0 * p / (2.0 - p)
    if variant == "C":
        return p / (2.0 - p)
    raise DomainError(f"unknown variant {variant!r}")


@dataclass
class ConjectureInstance:
    variant: str
    p: float
    r: float
    matrix: np.ndarray
    lhs: float
    lhs_kind: Kind
    rhs: float
    status: Status
    witness: Optional[np.ndarray] = None
    escalated: bool = False
    diagnostics: dict = field(default_factory=dict)

    @property
    def slack(self) -> float:
        return self.lhs - self.rhs

    def recompute_lhs(self) -> float:
        """Value of the ratio at the stored witness (p = 1 uses the sign witness)."""
        w = self.witness
        if self.variant == "B" or (self.variant == "C" and self.p == 1.0):
            if self.variant == "C":
                eps, eps_p = w
                return float(eps_p @ self.matrix @ eps)
            x = w / np.linalg.norm(w)
            return float(np.sum(np.abs(self.matrix @ x) ** self.p) ** (1.0 / self.p))
        pd = self.p / (self.p - 1.0)
        x = w / np.sum(np.abs(w) ** pd) ** (1.0 / pd)
        return float(np.sum(np.abs(self.matrix @ x) ** self.p) ** (1.0 / self.p))


def _classify(lhs: float, kind: Kind, rhs: float, escalated: bool) -> Status:
    slack = lhs - rhs
    if kind is Kind.EXACT:
        return Status.CONFIRMED if slack >= -TOL * max(1.0, rhs) else Status.CANDIDATE
    if slack >= 0:
        return Status.CONFIRMED
    if escalated and slack < -TOL * max(1.0, rhs):
        return Status.CANDIDATE
    return Status.UNDECIDED


def _psd_clip(A: np.ndarray) -> np.ndarray:
    A = 0.5 * (A + A.conj().T)
    w, V = np.linalg.eigh(A)
    if w.min(initial=0.0) < PSD_FLOOR * max(1.0, float(np.abs(w).max(initial=0.0))):
        raise DomainError(f"matrix is not PSD (smallest eigenvalue {w.min():.3e})")
    if w.min(initial=0.0) < 0:
        A = (V * np.clip(w, 0.0, None)) @ V.conj().T
        A = 0.5 * (A + A.conj().T)
    return A


def _lhs(variant: str, p: float, M: np.ndarray, restarts: int, seed, starts=None):
    if variant == "B":
        o = opnorm_2_to_p(M, p, mode="heuristic", restarts=restarts, seed=seed)
    else:
        o = opnorm_pprime_to_p(M, p, restarts=restarts, seed=seed, starts=starts)
    return o.value, o.witness, o.converged


def evaluate_instance(variant: str, p: float, matrix, budget: int = 20, seed=0,
                      escalation: int = 100, cap: int = ENUMERATION_CAP) -> ConjectureInstance:
    """One inequality instance with exact right side and best-effort left side.

    At p = 1 the left side is exact. For p in (1, 2) it comes from ``budget``
    random restarts; a negative slack triggers one escalation round with
    ``budget * escalation`` restarts plus perturbed restarts around the best
    witness before the instance may be labelled a candidate counterexample.
    """
    if variant not in ("B", "C"):
        raise DomainError(f"unknown variant {variant!r}")
    if not 1.0 <= p < 2.0:
        raise DomainError(f"p must lie in [1, 2), got {p!r}")
    M = np.asarray(matrix, dtype=np.float64)
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix has non-finite entries")
    if variant == "C":
        if M.shape[0] != M.shape[1]:
            raise DomainError("variant C needs a square PSD matrix")
        M = _psd_clip(M)
    r = schatten_index(variant, p)
    rhs = schatten_norm(M, r)

    if p == 1.0:
        if variant == "B":
            chk = hs_vs_21_check(M, cap)
            lhs, wit = chk.norm21, chk.witness
        else:
            chk = trace_lemma_check_psd(M, cap)
            lhs, wit = chk.norm, chk.witness
        status = _classify(lhs, Kind.EXACT, rhs, False)
        if status is not Status.CONFIRMED:
            raise TheoremViolation(f"p = 1 variant {variant}: lhs {lhs!r} < rhs {rhs!r}")
        return ConjectureInstance(variant, p, r, M, lhs, Kind.EXACT, rhs, status, wit)

    lhs, wit, conv = _lhs(variant, p, M, budget, seed)
    diag = {"budget": budget, "converged": conv}
    escalated = False
    if lhs < rhs:
        escalated = True
        l2, w2, c2 = _lhs(variant, p, M, budget * escalation, [seed, 1])
        if l2 > lhs:
            lhs, wit = l2, w2
        # perturbation polish around the incumbent
        rng = np.random.default_rng([*np.atleast_1d(seed).tolist(), 2])
        n = M.shape[1]
        jit = wit[:, None] + 0.05 * np.linalg.norm(wit) / math.sqrt(n) * rng.standard_normal((n, 64))
        l3, w3, _ = _lhs(variant, p, M, 0, [seed, 3], starts=jit) if variant == "C" \
            else _polish_b(M, p, jit)
        if l3 > lhs:
            lhs, wit = l3, w3
        diag.update({"escalation_restarts": budget * escalation})
    status = _classify(lhs, Kind.LOWER_BOUND, rhs, escalated)
    if status is Status.UNDECIDED:
        diag["reason"] = "budget exhausted within numerical tolerance of the bound"
    return ConjectureInstance(variant, p, r, M, lhs, Kind.LOWER_BOUND, rhs, status, wit,
                              escalated, diag)


def _polish_b(M, p, starts):
    from .linalg import maximize_2_to_p

    f, X, _, conv = maximize_2_to_p(M, p, starts)
    k = int(np.argmax(f))
    w = X[:, k] / np.linalg.norm(X[:, k])
    return float(np.sum(np.abs(M @ w) ** p) ** (1.0 / p)), w, conv


def trace_lemma_check_psd(A, cap: int = ENUMERATION_CAP) -> TraceCheck:
    """tr A <= |A : l_inf -> l_1| for a PSD matrix given directly."""
    a = np.asarray(A, dtype=np.float64)
    sn = opnorm_inf_to_1(a, cap)
    tr = float(np.trace(a))
    holds = tr <= sn.value + TOL * max(1.0, sn.value)
    if not holds:
        raise TheoremViolation(f"trace {tr!r} exceeds inf->1 norm {sn.value!r}")
    return TraceCheck(tr, sn.value, holds, (sn.eps, sn.eps_prime))


# ---------------------------------------------------------------------- search

def instance_seed(*parts) -> int:
    """Stable 63-bit seed from arbitrary JSON-serializable coordinates."""
    blob = json.dumps(parts, sort_keys=True, separators=(",", ":")).encode()
    return int.from_bytes(hashlib.blake2b(blob, digest_size=8).digest(), "little") >> 1


def family_matrix(family: str, variant: str, rng: np.random.Generator,
                  n_range: tuple = (2, 8)) -> np.ndarray:
    """Random test matrix from a named family; PSD-ified (M M^T) for variant C."""
    n = int(rng.integers(n_range[0], n_range[1] + 1))
    m = n if variant == "C" else int(rng.integers(n_range[0], n_range[1] + 1))
    if family == "gaussian":
        M = rng.standard_normal((n, m))
    elif family == "psd-wishart":
        k = int(rng.integers(1, n + 1))
        G = rng.standard_normal((n, k))
        return G @ G.T
    elif family == "orthogonal-projection":
        k = int(rng.integers(1, n + 1))
        Q, _ = np.linalg.qr(rng.standard_normal((n, k)))
        return Q @ Q.T
    elif family == "circulant":
        c = rng.standard_normal(n)
        M = np.stack([np.roll(c, i) for i in range(n)])
    elif family == "sparse-pm1":
        mask = rng.random((n, m)) < 0.35
        M = np.where(mask, rng.choice([-1.0, 1.0], size=(n, m)), 0.0)
        if not mask.any():
            M[0, 0] = 1.0
    elif family == "diagonal":
        s = rng.standard_normal(n)
        return np.diag(np.abs(s) if variant == "C" else s)
    else:
        raise DomainError(f"unknown family {family!r}")
    if variant == "C":
        M = M @ M.T
    return M


@dataclass
class LeaderRow:
    variant: str
    p: float
    r: float
    family: str
    seed: int
    instance_id: str
    lhs: float
    lhs_kind: str
    rhs: float
    slack: float
    status: str

    def as_list(self) -> list:
        return [getattr(self, c) for c in LEADERBOARD_COLUMNS]


def search(variant: str, p_grid: Sequence[float], family_list: Iterable[str] = FAMILIES,
           instances_per_cell: int = 100, seed: int = 0, escalation_budget: int = 100,
           budget: int = 10, n_range: tuple = (2, 8), cap: int = ENUMERATION_CAP,
           threads: int = 1) -> list:
    """Random search over (p, family) cells; rows sorted by slack then instance id."""
    cells = [(float(p), fam) for p in p_grid for fam in family_list]

    def run_cell(cell):
        p, fam = cell
        rows = []
        for i in range(instances_per_cell):
            s = instance_seed(seed, variant, p, fam, i)
            M = family_matrix(fam, variant, np.random.default_rng(s), n_range)
            inst = evaluate_instance(variant, p, M, budget, s, escalation_budget, cap)
            iid = f"{variant}-{p:g}-{fam}-{i:05d}"
            rows.append(LeaderRow(variant, p, inst.r, fam, s, iid, inst.lhs,
                                  inst.lhs_kind.value, inst.rhs, inst.slack, inst.status.value))
        return rows

    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(threads) as ex:
            chunks = list(ex.map(run_cell, cells))
    else:
        chunks = [run_cell(c) for c in cells]
    rows = [r for ch in chunks for r in ch]
    rows.sort(key=lambda r: (r.slack, r.instance_id))
    return rows


def leaderboard_csv(rows: Sequence[LeaderRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(LEADERBOARD_COLUMNS)
    for row in rows:
        w.writerow([repr(v) if isinstance(v, float) else v for v in row.as_list()])
    return buf.getvalue()
