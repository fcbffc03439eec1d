"""Subspace families: random, coordinate, trigonometric, spherical, character.

All randomness comes from ``numpy.random.default_rng(seed)`` (PCG64 bit
generator, ziggurat normals), so a (generator, parameters, seed) triple pins
the basis down bit for bit on a given numpy version.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .bounds import thm1_upper
from .linalg import Subspace, orthonormalize
from .types import DomainError, Field, as_field


def gaussian_subspace(N: int, d: int, seed: int = 0, field=Field.REAL) -> Subspace:
    """Span of an N x d standard Gaussian matrix (complex: (G + iH)/sqrt 2)."""
    if not 1 <= d <= N:
        raise DomainError(f"need 1 <= d <= N, got N={N}, d={d}")
    field = as_field(field)
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((N, d))
    if field is Field.COMPLEX:
        g = (g + 1j * rng.standard_normal((N, d))) / math.sqrt(2.0)
    prov = {"generator": "gaussian", "N": N, "d": d, "seed": seed, "field": field.value}
    return orthonormalize(g, prov, field)


def coordinate_subspace(N: int, d: int) -> Subspace:
    if not 1 <= d <= N:
        raise DomainError(f"need 1 <= d <= N, got N={N}, d={d}")
    return Subspace(np.eye(N, d), Field.REAL, {"generator": "coordinate", "N": N, "d": d})


def trig_subspace(N: int) -> Subspace:
    """Discretized span of sin(2 pi t), cos(2 pi t) on the grid t = k/N."""
    if N < 3:
        raise DomainError(f"trig subspace needs N >= 3, got {N}")
    t = 2.0 * np.pi * np.arange(N) / N
    raw = np.column_stack([np.sin(t), np.cos(t)])
    return orthonormalize(raw, {"generator": "trig", "N": N})


def spherical_linear_subspace(d: int, M: int, seed: int = 0) -> Subspace:
    """Linear functionals u -> <u, e_j> sampled at M uniform points of S^{d-1}."""
    if d < 1 or M < d:
        raise DomainError(f"need d >= 1 and M >= d, got d={d}, M={M}")
    rng = np.random.default_rng(seed)
    pts = rng.standard_normal((M, d))
    pts /= np.linalg.norm(pts, axis=1, keepdims=True)
    return orthonormalize(pts, {"generator": "spherical", "d": d, "M": M, "seed": seed})


# ---------------------------------------------------------------- frequencies

@dataclass(frozen=True)
class FrequencySet:
    N: int
    S: tuple
    construction: str = "explicit"

    def __post_init__(self):
        s = tuple(int(k) for k in self.S)
        if not s:
            raise DomainError("frequency set must be nonempty")
        if any(b <= a for a, b in zip(s, s[1:])):
            raise DomainError("frequencies must be strictly increasing")
        if s[0] < 0 or s[-1] >= self.N:
            raise DomainError(f"frequencies must lie in [0, {self.N})")
        object.__setattr__(self, "S", s)

    def is_sidon(self) -> bool:
        """All sums a + b (a <= b) distinct."""
        seen = set()
        for i, a in enumerate(self.S):
            for b in self.S[i:]:
                if a + b in seen:
                    return False
                seen.add(a + b)
        return True

    def to_json(self) -> str:
        return json.dumps(list(self.S))

    @classmethod
    def from_json(cls, N: int, text: str, construction: str = "explicit") -> "FrequencySet":
        return cls(N, tuple(json.loads(text)), construction)


def _largest_prime_at_most(x: float) -> int:
    n = int(math.floor(x))
    while n >= 2:
        if all(n % k for k in range(2, int(math.isqrt(n)) + 1)):
            return n
        n -= 1
    raise DomainError(f"no prime <= {x}")


def sidon_frequencies(N: int) -> FrequencySet:
    """Erdos-Turan Sidon set {2qk + (k^2 mod q) : 0 <= k < q}, q the largest prime <= sqrt(N/2)."""
    if N < 8:
        raise DomainError(f"need N >= 8, got {N}")
    q = _largest_prime_at_most(math.sqrt(N / 2.0))
    S = sorted(x for x in (2 * q * k + (k * k) % q for k in range(q)) if x < N)
    return FrequencySet(N, tuple(S), "sidon")


def random_frequencies(N: int, size: int, seed: int = 0, exclude_zero: bool = True) -> FrequencySet:
    """Uniform random size-subset of 1..N/2 (or 0..N/2), usable for real characters."""
    lo = 1 if exclude_zero else 0
    pool = list(range(lo, N // 2 + 1))
    if size > len(pool):
        raise DomainError(f"cannot draw {size} distinct frequencies from {len(pool)}")
    S = sorted(random.Random(seed).sample(pool, size))
    return FrequencySet(N, tuple(S), "random")


def character_subspace(freqs: FrequencySet, field=Field.COMPLEX) -> Subspace:
    """Span of the characters j -> exp(2 pi i k j / N), k in S, on Z_N.

    The real version uses the pair (sin, cos) per frequency; k = 0 and
    k = N/2 only contribute the cosine.
    """
    field = as_field(field)
    N = freqs.N
    j = np.arange(N)
    if field is Field.COMPLEX:
        raw = np.exp(2j * np.pi * np.outer(j, freqs.S) / N) / math.sqrt(N)
    else:
        cols = []
        for k in freqs.S:
            t = 2.0 * np.pi * k * j / N
            if k == 0 or 2 * k == N:
                cols.append(np.cos(t))
            else:
                cols.extend([np.sin(t), np.cos(t)])
        raw = np.column_stack(cols)
    prov = {"generator": "character", "N": N, "S": list(freqs.S),
            "construction": freqs.construction, "field": field.value}
    return orthonormalize(raw, prov, field)


# ---------------------------------------------------------------- Kashin regime

@dataclass
class KashinSample:
    eta: float
    N: int
    d: int
    subspace: Subspace
    lambda_min: float
    measured_c: float
    seed: int

    def row(self) -> dict:
        return {"N": self.N, "eta": self.eta, "d": self.d, "seed": self.seed,
                "lambda_min": self.lambda_min, "lambda_min_kind": "heuristic_upper_bound",
                "measured_c": self.measured_c,
                "c_upper": thm1_upper(self.N, self.d) / math.sqrt(self.N)}


def kashin_dimension(N: int, eta: float) -> int:
    # round before ceil so that e.g. eta = 1/3, N = 9 gives codimension 3
    return N - math.ceil(round(eta * N, 9))


def kashin_sample(N: int, eta: float, seed: int = 0, restarts: int = 8) -> KashinSample:
    """Gaussian subspace of codimension ceil(eta N) with c = lambda_min / sqrt(N)."""
    from .distortion import Target, lambda_heuristic

    if not 0.0 < eta < 1.0 or N * eta < 1:
        raise DomainError(f"need 0 < eta < 1 and N*eta >= 1, got N={N}, eta={eta}")
    d = kashin_dimension(N, eta)
    if d < 1:
        raise DomainError(f"codimension ceil({eta}*{N}) leaves no subspace")
    E = gaussian_subspace(N, d, seed)
    est = lambda_heuristic(E, 1.0, Target.MIN, restarts=restarts, seed=seed)
    return KashinSample(eta, N, d, E, est.value, est.value / math.sqrt(N), seed)


# ---------------------------------------------------------------- registry

def _freqs_from_params(params: dict) -> FrequencySet:
    N = int(params["N"])
    if "S" in params:
        S = params["S"]
        if isinstance(S, str):
            S = json.loads(S)
        return FrequencySet(N, tuple(sorted(int(k) for k in S)), "explicit")
    construction = params.get("construction", "sidon")
    if construction == "sidon":
        return sidon_frequencies(N)
    if construction == "random":
        size = int(params.get("size", len(sidon_frequencies(N).S)))
        return random_frequencies(N, size, int(params.get("seed", 0)))
    raise DomainError(f"unknown frequency construction {construction!r}")


def make_subspace(name: str, params: dict, seed: Optional[int] = None) -> Subspace:
    """Build a subspace from a generator name and a parameter mapping."""
    p = dict(params)
    if seed is not None:
        p.setdefault("seed", seed)
    s = int(p.get("seed", 0))
    if name == "gaussian":
        return gaussian_subspace(int(p["N"]), int(p["d"]), s, p.get("field", "real"))
    if name == "coordinate":
        return coordinate_subspace(int(p["N"]), int(p["d"]))
    if name == "trig":
        return trig_subspace(int(p["N"]))
    if name == "spherical":
        return spherical_linear_subspace(int(p["d"]), int(p["M"]), s)
    if name in ("character", "sidon"):
        if name == "sidon":
            p.setdefault("construction", "sidon")
        return character_subspace(_freqs_from_params(p), p.get("field", "complex"))
    if name == "kashin":
        N = int(p["N"])
        return gaussian_subspace(N, kashin_dimension(N, float(p["eta"])), s)
    raise KeyError(f"unknown generator {name!r}; known: {', '.join(GENERATORS)}")


GENERATORS = ("gaussian", "coordinate", "trig", "spherical", "character", "sidon", "kashin")
