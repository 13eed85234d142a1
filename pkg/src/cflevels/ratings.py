"""Sparse rating storage with forward and inverted indexes.

The matrix is immutable once built. User and item identifiers are opaque
strings at the boundary and are mapped to dense integer indexes internally;
every internal iteration runs in sorted index order so that floating-point
accumulations are identical from run to run regardless of hash seeding.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple

from .errors import EmptySetError, OutOfScaleRatingError, UnknownItemError, UnknownUserError


@dataclass(frozen=True)
class RatingScale:
    """Inclusive bounds of the rating range, e.g. 1-5 or 0-10."""

    rmin: float
    rmax: float

    def __post_init__(self) -> None:
        if not self.rmin < self.rmax:
            raise ValueError(f"rating scale requires rmin < rmax, got [{self.rmin}, {self.rmax}]")

    @property
    def span(self) -> float:
        return self.rmax - self.rmin

    def contains(self, value: float) -> bool:
        return self.rmin <= value <= self.rmax

    def clamp(self, value: float) -> float:
        return min(self.rmax, max(self.rmin, value))


class RatingRecord(NamedTuple):
    """One (user, item, rating) triple."""

    user: str
    item: str
    value: float


class RatingsMatrix:
    """Immutable user x item rating store.

    Construction deduplicates (user, item) pairs with last-write-wins and
    builds both the forward (user -> {item: rating}) and inverted
    (item -> {users}) indexes. Use :func:`build_matrix` rather than calling
    the constructor with raw records from several places.
    """

    def __init__(self, records: Iterable[RatingRecord], scale: RatingScale) -> None:
        dedup: dict[tuple[str, str], float] = {}
        for user, item, raw in records:
            value = float(raw)
            if not scale.contains(value):
                raise OutOfScaleRatingError(
                    f"rating {value} for ({user!r}, {item!r}) outside "
                    f"scale [{scale.rmin}, {scale.rmax}]"
                )
            dedup[(str(user), str(item))] = value

        self._scale = scale
        self._users: tuple[str, ...] = tuple(sorted({u for u, _ in dedup}))
        self._items: tuple[str, ...] = tuple(sorted({i for _, i in dedup}))
        self._user_index = {u: n for n, u in enumerate(self._users)}
        self._item_index = {i: n for n, i in enumerate(self._items)}

        by_user: list[dict[int, float]] = [{} for _ in self._users]
        by_item: list[set[int]] = [set() for _ in self._items]
        for (u, i), v in sorted(dedup.items()):
            ui = self._user_index[u]
            ii = self._item_index[i]
            by_user[ui][ii] = v
            by_item[ii].add(ui)
        self._by_user = tuple(by_user)
        self._by_item = tuple(frozenset(s) for s in by_item)
        self._user_means = tuple(
            math.fsum(row.values()) / len(row) for row in self._by_user
        )
        self._content_hash: str | None = None

    # -- basic shape ---------------------------------------------------

    @property
    def scale(self) -> RatingScale:
        return self._scale

    @property
    def user_count(self) -> int:
        return len(self._users)

    @property
    def item_count(self) -> int:
        return len(self._items)

    def users(self) -> tuple[str, ...]:
        return self._users

    def items(self) -> tuple[str, ...]:
        return self._items

    def has_user(self, user: str) -> bool:
        return user in self._user_index

    def has_item(self, item: str) -> bool:
        return item in self._item_index

    # -- lookups -------------------------------------------------------

    def rating(self, user: str, item: str) -> float | None:
        ui = self._user_index.get(user)
        ii = self._item_index.get(item)
        if ui is None or ii is None:
            return None
        return self._by_user[ui].get(ii)

    def items_of(self, user: str) -> set[str]:
        """Item ids rated by ``user``."""
        ui = self._require_user(user)
        return {self._items[ii] for ii in self._by_user[ui]}

    def mean_of(self, user: str) -> float:
        """Mean of the user's ratings over everything they rated."""
        return self._user_means[self._require_user(user)]

    def records(self) -> list[RatingRecord]:
        """All ratings in canonical (user, item) order."""
        out = []
        for ui, u in enumerate(self._users):
            row = self._by_user[ui]
            for ii in sorted(row):
                out.append(RatingRecord(u, self._items[ii], row[ii]))
        return out

    def content_hash(self) -> str:
        """SHA-256 over the canonical record listing; keys similarity caches."""
        if self._content_hash is None:
            h = hashlib.sha256()
            for rec in self.records():
                h.update(f"{rec.user}\t{rec.item}\t{rec.value!r}\n".encode())
            self._content_hash = h.hexdigest()
        return self._content_hash

    # -- index-level access for in-package hot paths --------------------

    def _require_user(self, user: str) -> int:
        ui = self._user_index.get(user)
        if ui is None:
            raise UnknownUserError(f"unknown user {user!r}")
        return ui

    def _require_item(self, item: str) -> int:
        ii = self._item_index.get(item)
        if ii is None:
            raise UnknownItemError(f"unknown item {item!r}")
        return ii

    def _row(self, user_idx: int) -> dict[int, float]:
        return self._by_user[user_idx]

    def _co_rated_idx(self, a_idx: int, b_idx: int) -> list[int]:
        """Sorted item indexes rated by both users."""
        ra, rb = self._by_user[a_idx], self._by_user[b_idx]
        if len(rb) < len(ra):
            ra, rb = rb, ra
        return sorted(ii for ii in ra if ii in rb)


def build_matrix(records: Iterable[RatingRecord], scale: RatingScale) -> RatingsMatrix:
    """Build an immutable matrix; duplicate (user, item) pairs keep the last record."""
    return RatingsMatrix(records, scale)


def co_rated_items(a: str, b: str, m: RatingsMatrix) -> set[str]:
    """Items rated by both users. Symmetric; requires two distinct known users."""
    if a == b:
        raise ValueError(f"co-rated set requires two distinct users, got {a!r} twice")
    ai = m._require_user(a)
    bi = m._require_user(b)
    return {m.items()[ii] for ii in m._co_rated_idx(ai, bi)}


def user_mean_over(a: str, items: Iterable[str], m: RatingsMatrix) -> float:
    """Mean of ``a``'s ratings restricted to ``items`` (must all be rated by ``a``)."""
    ui = m._require_user(a)
    row = m._row(ui)
    idx = sorted(m._require_item(i) for i in set(items))
    if not idx:
        raise EmptySetError(f"mean over empty item set requested for user {a!r}")
    try:
        return math.fsum(row[ii] for ii in idx) / len(idx)
    except KeyError as exc:
        raise ValueError(f"user {a!r} has not rated item index {exc}") from exc


def raters_of(item: str, m: RatingsMatrix) -> set[str]:
    """Users who rated ``item``; empty set for an unknown item."""
    ii = m._item_index.get(item)
    if ii is None:
        return set()
    return {m.users()[ui] for ui in m._by_item[ii]}
