"""Filter-then-certify minimisation over integer boxes.

A float pass over the half box ``{a : |a_j| <= W_j, first nonzero a_j > 0}``
finds every point whose value could be minimal given a rigorous uniform
error bound; only those candidates are evaluated exactly.  Points are visited
in lexicographic order, so ties resolve to the lexicographically smallest
point regardless of chunking.
"""

from __future__ import annotations

import contextlib
import contextvars
from collections.abc import Callable, Iterator, Sequence
from math import prod

import numpy as np

__all__ = [
    "WorkLimitError",
    "DEFAULT_WORK_LIMIT",
    "work_limit",
    "get_work_limit",
    "check_work",
    "half_box_chunks",
    "full_box_chunks",
    "certified_argmin",
    "form_error_bound",
    "nearest_int_distance",
]

DEFAULT_WORK_LIMIT = 10**8
_CHUNK = 1 << 18
_U = 2.0**-53

_limit_var: contextvars.ContextVar[int] = contextvars.ContextVar("work_limit", default=DEFAULT_WORK_LIMIT)


class WorkLimitError(RuntimeError):
    """A search box exceeds the configured work limit."""


def get_work_limit() -> int:
    return _limit_var.get()


@contextlib.contextmanager
def work_limit(points: int):
    """Temporarily set the maximum number of box points a search may visit."""
    token = _limit_var.set(int(points))
    try:
        yield
    finally:
        _limit_var.reset(token)


def check_work(points: int, what: str = "search box") -> None:
    if points > _limit_var.get():
        raise WorkLimitError(f"{what} has {points} points, work limit is {_limit_var.get()}")


def _digits(idx: np.ndarray, radices: Sequence[int]) -> np.ndarray:
    out = np.empty((idx.size, len(radices)), dtype=np.int64)
    rem = idx.copy()
    for j in range(len(radices) - 1, -1, -1):
        rem, out[:, j] = np.divmod(rem, radices[j])
    return out


def half_box_chunks(widths: Sequence[int], chunk: int = _CHUNK) -> Iterator[np.ndarray]:
    """Points of the half box in lexicographic order, as int64 arrays."""
    radices = [2 * w + 1 for w in widths]
    total = prod(radices)
    check_work(total)
    offset = np.asarray(widths, dtype=np.int64)
    centre = total // 2
    for start in range(centre + 1, total, chunk):
        idx = np.arange(start, min(start + chunk, total), dtype=np.int64)
        yield _digits(idx, radices) - offset


def full_box_chunks(widths: Sequence[int], chunk: int = _CHUNK) -> Iterator[np.ndarray]:
    """All points of ``prod [0, W_j]`` in lexicographic order."""
    radices = [w + 1 for w in widths]
    total = prod(radices)
    check_work(total)
    for start in range(0, total, chunk):
        idx = np.arange(start, min(start + chunk, total), dtype=np.int64)
        yield _digits(idx, radices)


def form_error_bound(coef: Sequence[float], coef_err: Sequence[float], widths: Sequence[int]) -> float:
    """Uniform bound on |float(sum a_j c_j) - sum a_j c_j| over the box."""
    k = len(coef) + 2
    gamma = k * _U / (1 - k * _U)
    mag = sum(w * abs(c) for w, c in zip(widths, coef))
    return 2.0 * (gamma * mag + sum(w * e for w, e in zip(widths, coef_err))) + 1e-300


def nearest_int_distance(f: np.ndarray) -> np.ndarray:
    # f - rint(f) is exact in binary floating point
    return np.abs(f - np.rint(f))


def certified_argmin(
    widths: Sequence[int],
    approx: Callable[[np.ndarray], np.ndarray],
    err: float,
    exact: Callable[[tuple[int, ...]], tuple],
    *,
    points: Iterator[np.ndarray] | None = None,
):
    """Minimise ``exact(a)[0]`` over the half box.

    ``approx(points)`` must be within ``err`` of the exact value at every
    point.  ``exact`` returns a tuple whose first entry supports certified
    ``<`` and ``is_zero()``; the remaining entries are passed through.
    Returns ``(point, exact_tuple)``.
    """
    best_f = np.inf
    kept_pts: list[np.ndarray] = []
    kept_val: list[np.ndarray] = []
    for pts in points if points is not None else half_box_chunks(widths):
        v = approx(pts)
        if v.size == 0:
            continue
        best_f = min(best_f, float(v.min()))
        keep = v <= best_f + 2 * err
        kept_pts.append(pts[keep])
        kept_val.append(v[keep])
    if not kept_pts:
        raise ValueError("empty search box")
    pts = np.concatenate(kept_pts)
    vals = np.concatenate(kept_val)
    sel = vals <= best_f + 2 * err
    pts, vals = pts[sel], vals[sel]

    best_pt = None
    best = None
    best_approx = np.inf
    for row, fv in zip(pts, vals):
        if fv - err > best_approx + err:
            continue
        cand = exact(tuple(int(x) for x in row))
        if best is None or cand[0] < best[0]:
            best_pt, best, best_approx = tuple(int(x) for x in row), cand, float(fv)
            if best[0].is_zero():
                break
    return best_pt, best
