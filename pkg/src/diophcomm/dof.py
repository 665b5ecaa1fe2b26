"""Degrees-of-freedom arithmetic for the X-channel and the three-user GIC."""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .channels import XCHANNEL, ChannelModel, constellation

__all__ = ["DofReport", "ReliabilitySeries", "xchannel_dof_sweep", "gic_dof_formula", "reliability_report", "as_fraction"]


def as_fraction(x) -> Fraction:
    if isinstance(x, float):
        return Fraction(repr(x))
    return Fraction(x)


@dataclass(frozen=True)
class DofReport:
    scheme: str
    eps: float | Fraction
    sweep_name: str
    sweep: tuple[int, ...]
    rows: tuple[dict, ...]
    limit: float | Fraction
    power_constant: float = 1.0
    reliability: tuple[float, ...] | None = None
    decaying: bool | None = None
    supremum: Fraction | None = None


def _half_log2_one_plus(log2_p: float) -> float:
    # 0.5 * log2(1 + 2**log2_p) without overflow
    return 0.5 * float(np.logaddexp2(0.0, log2_p))


def _measured_dmin(model: ChannelModel, Q: int):
    m = model.rebuild(Q=Q, lam=1)
    d1 = constellation(m, 1, "difference").d_min
    d2 = constellation(m, 2, "difference").d_min
    return d1 if d1 < d2 else d2


def xchannel_dof_sweep(eps: float, Qs: Sequence[int], model: ChannelModel | None = None,
                       power_constant: float = 1.0) -> DofReport:
    """Rate ratio ``4 log2 Q / (1/2 log2(1+P))`` with ``P = c (lam Q)**2``, ``lam = Q**(2+2eps)``.

    With a model, the unscaled minimum distance ``d`` (the smaller of the
    two receivers) is measured per Q and ``exp(-(lam d)**2 / 8)`` reported.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    if list(Qs) != sorted(Qs) or any(Q < 2 for Q in Qs):
        raise ValueError("Q list must be ascending with Q >= 2")
    rows, rel = [], []
    for Q in Qs:
        lq = math.log2(Q)
        log2_lam = (2 + 2 * eps) * lq
        log2_p = math.log2(power_constant) + 2 * (log2_lam + lq)
        bits = 4 * lq
        bench = _half_log2_one_plus(log2_p)
        row = {"Q": Q, "log2_lambda": log2_lam, "log2_P": log2_p, "bits": bits,
               "benchmark": bench, "ratio": bits / bench}
        if model is not None:
            d = _measured_dmin(model, Q)
            x = 2.0 ** log2_lam * float(d)
            row["d_min"] = d
            row["reliability"] = math.exp(-x * x / 8)
            rel.append(row["reliability"])
        rows.append(row)
    reliability = tuple(rel) if model is not None else None
    return DofReport("XCHANNEL", eps, "Q", tuple(Qs), tuple(rows), 4 / (3 + 2 * eps),
                     power_constant, reliability, _decaying(reliability))


def gic_dof_formula(ks: Sequence[int], m_g: int = 6, eps=0) -> DofReport:
    """Per k: ``3M / (n + 1 + 2 eps)`` with ``M = k**m_g``, ``n + 1 = k**m_g + (k+1)**m_g``.

    Values are exact fractions; ``limit`` is the ceiling 3/2.
    """
    e = as_fraction(eps)
    if e < 0:
        raise ValueError("eps must be nonnegative")
    rows = []
    for k in ks:
        if k < 1:
            raise ValueError("k must be >= 1")
        M = k ** m_g
        n1 = k ** m_g + (k + 1) ** m_g
        rows.append({"k": k, "M": M, "n": n1 - 1, "value": Fraction(3 * M) / (n1 + 2 * e)})
    sup = max((r["value"] for r in rows), default=None)
    return DofReport("GIC", e, "k", tuple(ks), tuple(rows), Fraction(3, 2), supremum=sup)


def _decaying(series) -> bool | None:
    if series is None or len(series) < 2:
        return None
    return all(b < a for a, b in zip(series, series[1:]))


@dataclass(frozen=True)
class ReliabilitySeries:
    eps: float
    sweep: tuple[int, ...]
    d_min: tuple
    lam: tuple[float, ...]
    values: tuple[float, ...]
    decaying: bool


def reliability_report(model: ChannelModel, receiver: int, eps: float, sweep: Sequence[int],
                       lam_factor: float = 1.0) -> ReliabilitySeries:
    """``exp(-(d * lam)**2 / 8)`` along a Q sweep with ``lam = lam_factor * Q**(2+2eps)``.

    ``d`` is the exact unscaled minimum distance at ``receiver``.  The series
    is flagged decaying only if it strictly decreases.
    """
    if model.kind != XCHANNEL:
        raise ValueError("reliability series needs an X-channel model")
    ds, lams, vals = [], [], []
    for Q in sweep:
        d = constellation(model.rebuild(Q=Q, lam=1), receiver, "difference").d_min
        lam = lam_factor * Q ** (2 + 2 * eps)
        x = lam * float(d)
        ds.append(d)
        lams.append(lam)
        vals.append(math.exp(-x * x / 8))
    return ReliabilitySeries(eps, tuple(sweep), tuple(ds), tuple(lams), tuple(vals),
                             bool(_decaying(vals)))
