"""Pairwise user-user similarity measures.

Each measure comes in two layers: a scalar layer that applies the adjustment
formula to an already-computed correlation (``apply_*`` / ``plus_adjust``),
and a matrix layer that computes the base correlation from a
:class:`~cflevels.ratings.RatingsMatrix` first. The scalar layer exists so
the formulas can be tested and reused without a matrix in hand.

The base correlation is Pearson over the co-rated item set, with both means
taken over that same set. Degenerate pairs (fewer than 2 co-rated items, or
zero rating variance on the overlap for either user) score 0, which keeps
them out of positive-similarity neighborhoods without special-casing
downstream.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from .ratings import RatingsMatrix


@dataclass(frozen=True)
class StaticParams:
    """Thresholds for the statically adjusted measure (and the WPCC cutoff).

    t: minimum co-rated items for a positive adjustment.
    y: minimum correlation for a positive adjustment.
    t_wpcc: WPCC significance-weighting cutoff, kept alongside because the
        two measures are configured together per dataset.
    """

    t: int = 10
    y: float = 0.20
    t_wpcc: int = 50

    def __post_init__(self) -> None:
        if self.t < 1:
            raise ValueError(f"co-rated threshold t must be >= 1, got {self.t}")
        if self.t_wpcc < 1:
            raise ValueError(f"WPCC threshold must be >= 1, got {self.t_wpcc}")


@dataclass(frozen=True)
class PlusParams:
    """Power-law rescaling parameters, f(x) = alpha * x^beta."""

    alpha: float = 100.0
    beta: float = 2.0

    def __post_init__(self) -> None:
        if self.alpha <= 0 or self.beta <= 0:
            raise ValueError(f"power-law parameters must be positive, got alpha={self.alpha} beta={self.beta}")


# ---------------------------------------------------------------------------
# base correlation
# ---------------------------------------------------------------------------

def _pcc_and_overlap(a: str, b: str, m: RatingsMatrix) -> tuple[float, int]:
    """(Pearson over the overlap, co-rated count) for a user pair."""
    ai = m._require_user(a)
    bi = m._require_user(b)
    co = m._co_rated_idx(ai, bi)
    n = len(co)
    if n < 2:
        return 0.0, n
    ra = m._row(ai)
    rb = m._row(bi)
    xs = [ra[ii] for ii in co]
    ys = [rb[ii] for ii in co]
    mx = math.fsum(xs) / n
    my = math.fsum(ys) / n
    num = math.fsum((x - mx) * (y - my) for x, y in zip(xs, ys))
    dx = math.fsum((x - mx) ** 2 for x in xs)
    dy = math.fsum((y - my) ** 2 for y in ys)
    if dx == 0.0 or dy == 0.0:
        return 0.0, n
    # clamp: floating error can push |r| a hair past 1
    return min(1.0, max(-1.0, num / math.sqrt(dx * dy))), n


def pcc(a: str, b: str, m: RatingsMatrix) -> float:
    """Pearson correlation of two users over their co-rated items, in [-1, 1]."""
    return _pcc_and_overlap(a, b, m)[0]


# ---------------------------------------------------------------------------
# scalar adjustment layer
# ---------------------------------------------------------------------------

def apply_wpcc(score: float, co_rated: int, threshold: int) -> float:
    """Damp ``score`` linearly when the pair has fewer than ``threshold`` co-rated items."""
    if threshold < 1:
        raise ValueError(f"WPCC threshold must be >= 1, got {threshold}")
    if co_rated < threshold:
        return (co_rated / threshold) * score
    return score


def apply_spcc(score: float, co_rated: int) -> float:
    """Damp ``score`` by a sigmoid of the co-rated count (factor in (0.5, 1))."""
    return score * (1.0 / (1.0 + math.exp(-co_rated / 2.0)))


def plus_adjust(score: float, params: PlusParams) -> float:
    """Sign-preserving power law: alpha * sign(s) * |s|^beta.

    Preserves the ordering of any score list for positive alpha and beta, so
    neighborhood membership and ranking are unchanged versus the raw scores.
    """
    if score == 0.0:
        return 0.0
    sign = 1.0 if score > 0.0 else -1.0
    return params.alpha * sign * abs(score) ** params.beta


def apply_static(score: float, co_rated: int, params: StaticParams) -> float:
    """Double the score when both thresholds clear; otherwise shrink it.

    Positive branch: co_rated >= t and score >= y -> 2 * score.
    Negative branch: score / (1 + score^2), which shrinks magnitude and
    preserves sign.
    """
    if co_rated >= params.t and score >= params.y:
        return score + score
    return score * (1.0 / (1.0 + score * score))


# ---------------------------------------------------------------------------
# matrix layer
# ---------------------------------------------------------------------------

def wpcc(a: str, b: str, m: RatingsMatrix, threshold: int) -> float:
    score, co = _pcc_and_overlap(a, b, m)
    return apply_wpcc(score, co, threshold)


def spcc(a: str, b: str, m: RatingsMatrix) -> float:
    score, co = _pcc_and_overlap(a, b, m)
    return apply_spcc(score, co)


def static_proposed(a: str, b: str, m: RatingsMatrix, params: StaticParams) -> float:
    score, co = _pcc_and_overlap(a, b, m)
    return apply_static(score, co, params)


# ---------------------------------------------------------------------------
# configured methods
# ---------------------------------------------------------------------------

METHOD_NAMES = ("pcc", "wpcc", "spcc", "plus", "static", "dynamic")


class SimilarityMethod:
    """A named similarity function with its parameters pinned.

    ``score(a, b, m)`` is a pure function of the pair and the matrix, so a
    method instance can be shared freely across threads. The ``key`` string
    identifies the method + parameters for cache fingerprinting.
    """

    def __init__(self, name: str, fn: Callable[[str, str, RatingsMatrix], float],
                 params: dict[str, object] | None = None) -> None:
        self.name = name
        self.params = dict(params or {})
        self._fn = fn

    def score(self, a: str, b: str, m: RatingsMatrix) -> float:
        return self._fn(a, b, m)

    @property
    def key(self) -> str:
        inner = ",".join(f"{k}={self.params[k]!r}" for k in sorted(self.params))
        return f"{self.name}({inner})"

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"SimilarityMethod({self.key})"


def make_method(name: str, *, t: int = 10, y: float = 0.20, big_t: int = 50,
                alpha: float = 100.0, beta: float = 2.0,
                negative_form: str = "eq4") -> SimilarityMethod:
    """Build a configured similarity method by name.

    Names: pcc, wpcc (uses ``big_t``), spcc, plus (power law over pcc, uses
    ``alpha``/``beta``), static (uses ``t``/``y``), dynamic (multi-level
    bands derived from the matrix shape; ``negative_form`` picks the
    below-threshold formula).
    """
    if name == "pcc":
        return SimilarityMethod("pcc", pcc)
    if name == "wpcc":
        return SimilarityMethod("wpcc", lambda a, b, m: wpcc(a, b, m, big_t), {"T": big_t})
    if name == "spcc":
        return SimilarityMethod("spcc", spcc)
    if name == "plus":
        params = PlusParams(alpha=alpha, beta=beta)
        return SimilarityMethod(
            "plus",
            lambda a, b, m: plus_adjust(pcc(a, b, m), params),
            {"alpha": alpha, "beta": beta},
        )
    if name == "static":
        params = StaticParams(t=t, y=y)
        return SimilarityMethod(
            "static",
            lambda a, b, m: static_proposed(a, b, m, params),
            {"t": t, "y": y},
        )
    if name == "dynamic":
        from .levels import dynamic_method  # local import to avoid a cycle

        return dynamic_method(negative_form=negative_form)
    raise ValueError(f"unknown similarity method {name!r}; expected one of {', '.join(METHOD_NAMES)}")
