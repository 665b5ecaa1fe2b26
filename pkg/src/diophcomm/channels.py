"""Channel models with integer-message constellations.

Every receiver sees ``y = lam * sum_j c_j d_j`` where each digit ``d_j`` is a
sum of raw messages and ranges over ``0..W_j``.  MAC, aligned X-channel and
block-aligned GIC models all reduce to that shape, so constellations,
minimum distances and decoding share one implementation.
"""

from __future__ import annotations

import functools
import itertools
import math
from collections.abc import Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from math import prod

import numpy as np

from ._rng import box_muller, lanes, sample_keys, unit_interval
from .exactnum import ExactReal, as_real
from .exactnum.search import certified_argmin, check_work, form_error_bound, full_box_chunks
from .linforms import LinearFormMatrix
from .measures import MCEstimate

__all__ = [
    "ChannelError",
    "SingularMatrixError",
    "GeneratorMapError",
    "MAC",
    "XCHANNEL",
    "GIC",
    "MULTIANT",
    "Receiver",
    "ChannelModel",
    "Constellation",
    "Bounds",
    "DerivedPoint",
    "F_MAPS",
    "FULL_GIC_PAIRS",
    "build_mac",
    "build_xchannel",
    "build_gic",
    "build_multiantenna_xi",
    "constellation",
    "theoretical_bounds",
    "derived_points",
    "check_f_maps",
    "analytic_error_prob",
    "mc_symbol_error_rate",
    "KGReport",
    "kg_separation_check",
]

MAC = "MAC"
XCHANNEL = "XCHANNEL"
GIC = "GIC"
MULTIANT = "MULTIANT"

# interferer pairs (receiver, transmitter), 1-based, in generator order
FULL_GIC_PAIRS = ((1, 2), (1, 3), (2, 1), (2, 3), (3, 1), (3, 2))


class ChannelError(ValueError):
    pass


class SingularMatrixError(ChannelError):
    pass


class GeneratorMapError(ChannelError):
    pass


def _zero() -> ExactReal:
    return ExactReal.from_fraction(0)


def _positive(name: str, x) -> ExactReal:
    v = as_real(x)
    if v.sign() <= 0:
        raise ChannelError(f"{name} must be positive")
    return v


def _scale(lam) -> ExactReal:
    v = as_real(lam)
    if v < 1:
        raise ChannelError("scaling factor lambda must be >= 1")
    return v


def _lincomb(coefs: Sequence[ExactReal], digits: Sequence[int]) -> ExactReal:
    s = _zero()
    for c, a in zip(coefs, digits):
        if a:
            s = s + c * int(a)
    return s


@dataclass(frozen=True)
class Receiver:
    """Linear form seen at one receiver.

    ``sources[j]`` lists the raw message indices summed into digit ``j``.
    """

    index: int
    coefficients: tuple[ExactReal, ...]
    ranges: tuple[int, ...]
    sources: tuple[tuple[int, ...], ...]
    labels: tuple[str, ...]
    multiplicities: tuple[int, ...] = ()


@dataclass(frozen=True, eq=False)
class ChannelModel:
    kind: str
    coefficients: dict
    scale: ExactReal
    encoder: dict
    raw_ranges: tuple[int, ...]
    raw_labels: tuple[str, ...]
    receivers: tuple[Receiver, ...]
    Q: int | None = None
    B: int | None = None
    k: int | None = None
    info: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)

    def receiver(self, i: int) -> Receiver:
        if not 1 <= i <= len(self.receivers):
            raise ChannelError(f"receiver must be in 1..{len(self.receivers)}")
        return self.receivers[i - 1]

    def rebuild(self, **changes) -> "ChannelModel":
        """Same channel with some builder parameters replaced (e.g. ``Q``, ``lam``)."""
        builder = {MAC: build_mac, XCHANNEL: build_xchannel, GIC: build_gic}[self.kind]
        return builder(**{**self.params, **changes})


# builders

def build_mac(h1, h2, alpha=1, beta=1, Q: int = 1, lam=1, normalized: bool = False) -> ChannelModel:
    """Two transmitters, one receiver: ``y = lam (h1 alpha u1 + h2 beta u2)``."""
    h1, h2 = _positive("h1", h1), _positive("h2", h2)
    alpha, beta = _positive("alpha", alpha), _positive("beta", beta)
    if normalized and h1 + h2 != 1:
        raise ChannelError("normalized MAC needs h1 + h2 = 1")
    if Q < 1:
        raise ChannelError("Q must be >= 1")
    scale = _scale(lam)
    c1, c2 = h1 * alpha, h2 * beta
    xi = c1 / c2
    if xi > 1:
        xi = c2 / c1
    rx = Receiver(1, (c1, c2), (Q, Q), ((0,), (1,)), ("h1*alpha", "h2*beta"))
    return ChannelModel(
        MAC, {"h1": h1, "h2": h2}, scale, {"alpha": alpha, "beta": beta},
        (Q, Q), ("u1", "u2"), (rx,), Q=Q,
        info={"xi": xi, "C1": c1 if c1 > c2 else c2},
        params=dict(h1=h1, h2=h2, alpha=alpha, beta=beta, Q=Q, lam=scale, normalized=normalized),
    )


def build_xchannel(h11, h12, h21, h22, Q: int = 1, lam=1, gains=None) -> ChannelModel:
    """Two-user X-channel.

    Without ``gains`` the aligned encoding ``x1 = lam(h22 u1 + h12 v1)``,
    ``x2 = lam(h21 u2 + h11 v2)`` is used, so the unwanted pair arrives as a
    single digit ``v1 + v2`` (resp. ``u1 + u2``).  With ``gains =
    (alpha1, beta1, alpha2, beta2)`` every raw message keeps its own digit.
    Raw messages are ordered ``(u1, u2, v1, v2)``.
    """
    h = {name: _positive(name, x) for name, x in
         (("h11", h11), ("h12", h12), ("h21", h21), ("h22", h22))}
    if Q < 1:
        raise ChannelError("Q must be >= 1")
    scale = _scale(lam)
    H11, H12, H21, H22 = h["h11"], h["h12"], h["h21"], h["h22"]
    if gains is None:
        enc = {"alpha1": H22, "beta1": H12, "alpha2": H21, "beta2": H11}
        rx1 = Receiver(1, (H11 * H22, H21 * H12, H11 * H12), (Q, Q, 2 * Q),
                       ((0,), (1,), (2, 3)), ("u1", "u2", "v1+v2"))
        rx2 = Receiver(2, (H21 * H12, H11 * H22, H21 * H22), (Q, Q, 2 * Q),
                       ((2,), (3,), (0, 1)), ("v1", "v2", "u1+u2"))
        aligned = True
    else:
        a1, b1, a2, b2 = (_positive(n, g) for n, g in zip(("alpha1", "beta1", "alpha2", "beta2"), gains))
        enc = {"alpha1": a1, "beta1": b1, "alpha2": a2, "beta2": b2}
        srcs = ((0,), (1,), (2,), (3,))
        labels = ("u1", "u2", "v1", "v2")
        rx1 = Receiver(1, (H11 * a1, H12 * a2, H11 * b1, H12 * b2), (Q,) * 4, srcs, labels)
        rx2 = Receiver(2, (H21 * a1, H22 * a2, H21 * b1, H22 * b2), (Q,) * 4, srcs, labels)
        aligned = False
    return ChannelModel(
        XCHANNEL, h, scale, enc, (Q,) * 4, ("u1", "u2", "v1", "v2"), (rx1, rx2), Q=Q,
        info={"aligned": aligned},
        params=dict(h11=H11, h12=H12, h21=H21, h22=H22, Q=Q, lam=scale, gains=gains),
    )


def _monomial(gens: Sequence[ExactReal], exps: Sequence[int]) -> ExactReal:
    out = ExactReal.from_fraction(1)
    for g, e in zip(gens, exps):
        if e:
            out = out * g ** e
    return out


def build_gic(h, k: int = 1, B: int = 2, lam=1, generators=None, assignment=None) -> ChannelModel:
    """Three-user interference channel with block alignment.

    ``h`` is 3x3 (``h[i-1][j-1]`` from transmitter j to receiver i).  Full
    mode uses the six cross gains as generators.  Reduced mode takes an
    explicit generator list and ``assignment`` mapping each interferer pair
    ``(i, j)`` to a generator index; cross gains given as ``None`` are filled
    from their generator, any others must equal it exactly.
    """
    if k < 1 or B < 2:
        raise ChannelError("need k >= 1 and B >= 2")
    if len(h) != 3 or any(len(r) != 3 for r in h):
        raise ChannelError("h must be 3x3")
    scale = _scale(lam)
    H = [[None if x is None else as_real(x) for x in row] for row in h]
    if generators is None:
        if assignment is not None:
            raise GeneratorMapError("assignment given without generators")
        gens = [_positive(f"h{i}{j}", H[i - 1][j - 1]) for i, j in FULL_GIC_PAIRS]
        amap = {pair: g for g, pair in enumerate(FULL_GIC_PAIRS)}
        mode = "full"
    else:
        gens = [_positive(f"T{g}", x) for g, x in enumerate(generators)]
        if assignment is None:
            raise GeneratorMapError("reduced mode needs an assignment map")
        amap = {tuple(p): int(g) for p, g in dict(assignment).items()}
        if set(amap) != set(FULL_GIC_PAIRS):
            raise GeneratorMapError("assignment must cover exactly the six interferer pairs")
        if any(not 0 <= g < len(gens) for g in amap.values()):
            raise GeneratorMapError("assignment refers to a missing generator")
        for (i, j), g in amap.items():
            if H[i - 1][j - 1] is None:
                H[i - 1][j - 1] = gens[g]
            elif H[i - 1][j - 1] != gens[g]:
                raise GeneratorMapError(f"h{i}{j} differs from its generator T{g}")
        mode = "reduced"
    for i in range(3):
        for j in range(3):
            H[i][j] = _positive(f"h{i + 1}{j + 1}", H[i][j])
    m = len(gens)

    wanted_exps = list(itertools.product(range(k), repeat=m))
    unwanted_exps = list(itertools.product(range(k + 1), repeat=m))
    rank = {s: r for r, s in enumerate(wanted_exps)}
    per_tx = len(wanted_exps)
    raw_labels = tuple(f"u{j + 1}_{''.join(map(str, s))}" for j in range(3) for s in wanted_exps)
    mono = {s: _monomial(gens, s) for s in unwanted_exps}

    receivers = []
    for i in range(1, 4):
        coefs, ranges, sources, labels, mults = [], [], [], [], []
        for s2 in unwanted_exps:
            src = []
            for j in range(1, 4):
                if j == i:
                    continue
                g = amap[(i, j)]
                if s2[g] == 0:
                    continue
                s = s2[:g] + (s2[g] - 1,) + s2[g + 1:]
                if s in rank:
                    src.append((j - 1) * per_tx + rank[s])
            coefs.append(mono[s2])
            ranges.append(len(src) * (B - 1))
            sources.append(tuple(src))
            labels.append("v_" + "".join(map(str, s2)))
            mults.append(len(src))
        for s in wanted_exps:
            coefs.append(H[i - 1][i - 1] * mono[s])
            ranges.append(B - 1)
            sources.append(((i - 1) * per_tx + rank[s],))
            labels.append("u_" + "".join(map(str, s)))
            mults.append(1)
        receivers.append(Receiver(i, tuple(coefs), tuple(ranges), tuple(sources), tuple(labels), tuple(mults)))

    M = k ** m
    M_prime = k ** m + (k + 1) ** m
    support = [sum(1 for r in rx.ranges if r > 0) for rx in receivers]
    unwanted_support = [sum(1 for mu in rx.multiplicities[:len(unwanted_exps)] if mu > 0) for rx in receivers]
    return ChannelModel(
        GIC, {f"h{i + 1}{j + 1}": H[i][j] for i in range(3) for j in range(3)}, scale,
        {"generators": tuple(gens), "assignment": dict(amap), "mode": mode},
        (B - 1,) * (3 * per_tx), raw_labels, tuple(receivers), B=B, k=k,
        info={"m_g": m, "M": M, "M_prime": M_prime, "n": M_prime - 1,
              "support": support, "unwanted_support": unwanted_support},
        params=dict(h=h, k=k, B=B, lam=scale, generators=generators, assignment=assignment),
    )


def build_multiantenna_xi(h, alpha) -> LinearFormMatrix:
    """``(L^-1 R)^t`` for a two-antenna receiver and n transmitters.

    ``L`` holds the first two gain-weighted columns, ``R`` the remaining
    ``n - 2``.  The result has ``n - 2`` rows and two columns.
    """
    if len(h) != 2:
        raise ChannelError("h must have two rows")
    n = len(alpha)
    if n < 3 or any(len(r) != n for r in h):
        raise ChannelError("need n >= 3 transmitters with matching h rows")
    a = [as_real(x) for x in alpha]
    w = [[as_real(h[r][j]) * a[j] for j in range(n)] for r in range(2)]
    det = w[0][0] * w[1][1] - w[0][1] * w[1][0]
    if det.is_zero():
        raise SingularMatrixError("L is singular")
    inv = [[w[1][1] / det, -w[0][1] / det], [-w[1][0] / det, w[0][0] / det]]
    rows = []
    for j in range(2, n):
        rows.append(tuple(inv[r][0] * w[0][j] + inv[r][1] * w[1][j] for r in range(2)))
    return LinearFormMatrix(tuple(rows))


# constellations

@dataclass(frozen=True, eq=False)
class Constellation:
    """Outcomes at one receiver.

    ``d_min`` includes the scale.  In full-enumeration mode the digit tuples
    are grouped into value classes: ``class_index`` maps the mixed-radix
    index of a tuple (last digit fastest) to its class, classes are numbered
    in increasing value and ``representatives`` holds the lexicographically
    smallest tuple of each class.
    """

    receiver: int
    coefficients: tuple[ExactReal, ...]
    ranges: tuple[int, ...]
    scale: ExactReal
    d_min: ExactReal
    witness: tuple[int, ...]
    provenance: str
    collisions: int | None = None
    representatives: tuple[tuple[int, ...], ...] | None = None
    class_index: np.ndarray | None = None

    @property
    def outcome_count(self) -> int | None:
        return None if self.representatives is None else len(self.representatives)

    @property
    def has_collision(self) -> bool:
        return self.d_min.is_zero()

    def values(self) -> list[ExactReal]:
        if self.representatives is None:
            raise ChannelError("values need a full enumeration")
        return [self.scale * _lincomb(self.coefficients, rep) for rep in self.representatives]


def _approx_coefs(coefs):
    pairs = [c.approx() for c in coefs]
    return np.array([f for f, _ in pairs]), [e for _, e in pairs]


def _difference_dmin(coefs, ranges):
    cf, ce = _approx_coefs(coefs)
    err = form_error_bound(list(cf), ce, ranges)
    if not any(ranges):
        raise ChannelError("constellation has a single outcome")
    point, (value,) = certified_argmin(
        ranges,
        lambda pts: np.abs(pts.astype(np.float64) @ cf),
        err,
        lambda a: (abs(_lincomb(coefs, a)),),
    )
    return value, point


def _half_box_normal(a: Sequence[int]) -> tuple[int, ...]:
    for x in a:
        if x:
            return tuple(a) if x > 0 else tuple(-y for y in a)
    return tuple(a)


def _full_enumeration(coefs, ranges):
    if not any(ranges):
        raise ChannelError("constellation has a single outcome")
    pts = np.concatenate(list(full_box_chunks(ranges)))
    cf, ce = _approx_coefs(coefs)
    err = form_error_bound(list(cf), ce, ranges)
    f = pts.astype(np.float64) @ cf
    order = np.argsort(f, kind="stable")
    fs = f[order]
    breaks = np.diff(fs) > 2 * err
    cluster_of = np.concatenate(([0], np.cumsum(breaks)))
    n_clusters = int(cluster_of[-1]) + 1
    starts = np.concatenate(([0], np.flatnonzero(breaks) + 1, [len(fs)]))
    exact = all(c.is_exact for c in coefs)
    quads = [c.as_quad() for c in coefs] if exact else None

    def cmp(a, b):
        return _lincomb(coefs, np.subtract(a, b)).sign()

    # multi-member clusters are split into exact value classes
    split: dict[int, list[list[int]]] = {}
    for cid in np.flatnonzero(np.diff(starts) > 1):
        members = sorted(order[starts[cid]:starts[cid + 1]].tolist())
        groups: dict = {}
        classes: list[list[int]] = []
        for idx in members:
            a = pts[idx]
            if exact:
                key = functools.reduce(lambda s, t: s + t,
                                       (q.scale(int(x)) for q, x in zip(quads, a) if x),
                                       quads[0].scale(0))
                if key not in groups:
                    groups[key] = len(classes)
                    classes.append([])
                classes[groups[key]].append(idx)
                continue
            for cls in classes:
                if _lincomb(coefs, a - pts[cls[0]]).is_zero():
                    cls.append(idx)
                    break
            else:
                classes.append([idx])
        classes.sort(key=functools.cmp_to_key(lambda x, y: cmp(pts[x[0]], pts[y[0]])))
        split[int(cid)] = classes

    per_cluster = np.ones(n_clusters, dtype=np.int64)
    for cid, classes in split.items():
        per_cluster[cid] = len(classes)
    offset = np.concatenate(([0], np.cumsum(per_cluster)[:-1]))
    class_index = np.empty(len(pts), dtype=np.int64)
    class_index[order] = offset[cluster_of]
    rep_rows = np.empty(int(per_cluster.sum()), dtype=np.int64)
    rep_rows[offset] = order[starts[:-1]]
    for cid, classes in split.items():
        for sub, cls in enumerate(classes):
            class_index[cls] = offset[cid] + sub
            rep_rows[offset[cid] + sub] = min(cls)
    n_classes = len(rep_rows)
    collisions = len(pts) - n_classes
    reps = tuple(tuple(int(x) for x in pts[r]) for r in rep_rows)

    if collisions:
        # lexicographically smallest colliding difference
        best = None
        for classes in split.values():
            for cls in classes:
                if len(cls) > 1:
                    for x, y in itertools.combinations(cls, 2):
                        d = _half_box_normal((pts[x] - pts[y]).tolist())
                        if best is None or d < best:
                            best = d
        return _zero(), best, collisions, reps, class_index

    rep_f = f[rep_rows]
    srt = np.argsort(rep_f, kind="stable")
    sf = rep_f[srt]
    thresh = float(np.min(np.diff(sf))) + 4 * err
    best_val, best_pt = None, None
    for i in range(len(sf) - 1):
        j = i + 1
        while j < len(sf) and sf[j] - sf[i] <= thresh:
            d = _half_box_normal((pts[rep_rows[srt[j]]] - pts[rep_rows[srt[i]]]).tolist())
            v = abs(_lincomb(coefs, d))
            if best_val is None or v < best_val or (not v > best_val and d < best_pt):
                best_val, best_pt = v, d
            j += 1
    return best_val, best_pt, 0, reps, class_index


def constellation(model: ChannelModel, receiver: int = 1, method: str = "full") -> Constellation:
    """Outcomes and exact minimum distance at one receiver.

    ``method="full"`` enumerates all ``prod(W_j + 1)`` digit tuples;
    ``method="difference"`` minimises ``|sum c_j a_j|`` over nonzero ``a``
    with ``|a_j| <= W_j``.  Each such ``a`` is the difference of two valid
    digit tuples, so both give the same ``d_min``.
    """
    rx = model.receiver(receiver)
    if method == "full":
        check_work(prod(w + 1 for w in rx.ranges), "constellation")
        value, wit, coll, reps, cidx = _full_enumeration(rx.coefficients, rx.ranges)
        return Constellation(receiver, rx.coefficients, rx.ranges, model.scale, model.scale * value,
                             wit, "full-enumeration", coll, reps, cidx)
    if method == "difference":
        value, wit = _difference_dmin(rx.coefficients, rx.ranges)
        return Constellation(receiver, rx.coefficients, rx.ranges, model.scale, model.scale * value,
                             wit, "difference-form")
    raise ValueError(f"unknown method {method!r}")


# bounds

@dataclass(frozen=True)
class Bounds:
    perfect_separation: ExactReal
    upper_bound: ExactReal | None
    constant: ExactReal | None
    note: str = ""


def theoretical_bounds(model: ChannelModel, receiver: int = 1) -> Bounds:
    """Equal-spacing separation, the Dirichlet/Minkowski upper bound and its constant."""
    rx = model.receiver(receiver)
    lam = model.scale
    span = lam * _lincomb(rx.coefficients, rx.ranges)
    if model.kind == MAC:
        Q = model.Q
        C1 = model.info["C1"] * lam
        return Bounds(span / ((Q + 1) ** 2 - 1), C1 / Q, C1, "C1/Q")
    if model.kind == XCHANNEL:
        Q = model.Q
        if not model.info["aligned"]:
            return Bounds(span / ((Q + 1) ** 4 - 1), None, None, "unaligned: no bound")
        c = rx.coefficients
        C2 = c[0]
        for x in c[1:]:
            if x > C2:
                C2 = x
        return Bounds(span / ((2 * Q + 1) * (Q + 1) ** 2), C2 * lam / Q ** 2, C2 * lam, "C2*lam/Q^2")
    if model.kind == GIC:
        count = prod(w + 1 for w in rx.ranges)
        n = model.info["n"]
        one = ExactReal.from_fraction(1)
        return Bounds(span / (count - 1), lam / ExactReal.from_fraction(model.B) ** n, one,
                      "lam/B^n, implied constant taken as 1")
    raise ChannelError(f"no bounds for {model.kind}")


# derived points

@dataclass(frozen=True)
class DerivedPoint:
    which: str
    point: tuple[ExactReal, ExactReal]


F_MAPS = {
    "inverse": lambda x, y: (1 / x, 1 / y),
    "x,x/y": lambda x, y: (x, x / y),
    "x/y,x": lambda x, y: (x / y, x),
    "y,y/x": lambda x, y: (y, y / x),
    "y/x,y": lambda x, y: (y / x, y),
}

# one matching (source, target) pairing per map
F_PAIRINGS = (
    ("inverse", "xi-44", "xi'-48"),
    ("x,x/y", "xi-46a", "xi'-49b"),
    ("x/y,x", "xi-44", "xi'-49a"),
    ("y,y/x", "xi-46a", "xi'-48"),
    ("y/x,y", "xi-46b", "xi'-48"),
)


def derived_points(model: ChannelModel, validate: bool = True) -> list[DerivedPoint]:
    """The six points in R^2 governing the two X-channel receivers."""
    if model.kind != XCHANNEL:
        raise ChannelError("derived points need an X-channel model")
    h = model.coefficients
    h11, h12, h21, h22 = h["h11"], h["h12"], h["h21"], h["h22"]
    pts = [
        DerivedPoint("xi-44", (h22 / h12, h21 / h11)),
        DerivedPoint("xi-46a", ((h21 * h12) / (h11 * h22), h12 / h22)),
        DerivedPoint("xi-46b", ((h11 * h22) / (h21 * h12), h11 / h21)),
        DerivedPoint("xi'-48", (h12 / h22, h11 / h21)),
        DerivedPoint("xi'-49a", ((h11 * h22) / (h21 * h12), h22 / h12)),
        DerivedPoint("xi'-49b", ((h21 * h12) / (h11 * h22), h21 / h11)),
    ]
    if validate:
        bad = [name for name, ok in check_f_maps(pts).items() if not ok]
        if bad:
            raise ChannelError(f"f-map relation failed for {bad}")
    return pts


def check_f_maps(points: Sequence[DerivedPoint]) -> dict[str, bool]:
    """For each map, whether ``target == f(source)`` holds exactly."""
    by_name = {p.which: p.point for p in points}
    out = {}
    for name, src, dst in F_PAIRINGS:
        img = F_MAPS[name](*by_name[src])
        out[name] = all(a == b for a, b in zip(img, by_name[dst]))
    return out


# noise and decoding

def analytic_error_prob(d_min) -> float:
    """``P(|z| >= d/2)`` for standard normal ``z``, i.e. ``erfc(d / (2 sqrt 2))``."""
    d = float(d_min)
    if d < 0 or math.isnan(d):
        raise ValueError("d_min must be nonnegative")
    return math.erfc(d / (2.0 * math.sqrt(2.0)))


_TIE_SLACK = 1e-9


def mc_symbol_error_rate(model: ChannelModel, receiver: int, N: int, seed: int, *,
                         noise_scale: float = 1.0, subthreshold_only: bool = False,
                         chunk: int = 1 << 16) -> MCEstimate:
    """Empirical symbol error rate of nearest-outcome decoding.

    Raw messages are uniform, noise is ``noise_scale * N(0,1)``.  Sample
    ``i`` depends only on ``(seed, i)``.  A decode is correct when the
    nearest outcome is the transmitted value class; an exact tie goes to the
    lower value and is counted in ``notes["ties"]``.  With
    ``subthreshold_only`` only samples with ``|z| < d_min/2`` are kept.
    """
    if N < 1:
        raise ValueError("N must be positive")
    const = constellation(model, receiver, "full")
    rx = model.receiver(receiver)
    exact_vals = const.values()
    vals = np.array([float(v) for v in exact_vals])
    radices = np.array([w + 1 for w in rx.ranges], dtype=np.int64)
    place = np.concatenate((np.cumprod(radices[::-1])[::-1][1:], [1]))
    n_raw = len(model.raw_ranges)
    raw_sizes = np.array(model.raw_ranges, dtype=np.float64) + 1
    half_d = float(const.d_min) / 2
    errors = kept = ties = 0
    for start in range(0, N, chunk):
        count = min(chunk, N - start)
        u = unit_interval(lanes(sample_keys(seed, start, count), n_raw + 2))
        raw = np.floor(u[:, :n_raw] * raw_sizes).astype(np.int64)
        digits = np.stack([raw[:, list(src)].sum(axis=1) if src else np.zeros(count, np.int64)
                           for src in rx.sources], axis=1)
        sent = const.class_index[digits @ place]
        z = noise_scale * box_muller(u[:, n_raw], u[:, n_raw + 1])
        if subthreshold_only:
            keep = np.abs(z) < half_d
            near = np.flatnonzero(np.abs(np.abs(z) - half_d) <= _TIE_SLACK * (1 + half_d))
            for r in near:
                keep[r] = Fraction(abs(float(z[r]))) * 2 < const.d_min
            sent, z = sent[keep], z[keep]
        kept += sent.size
        y = vals[sent] + z
        hi = np.clip(np.searchsorted(vals, y), 1, len(vals) - 1)
        lo = hi - 1
        d_lo, d_hi = np.abs(y - vals[lo]), np.abs(vals[hi] - y)
        decoded = np.where(d_hi < d_lo, hi, lo)
        decoded = np.where(y <= vals[0], 0, decoded)
        decoded = np.where(y >= vals[-1], len(vals) - 1, decoded)
        near = np.flatnonzero((np.abs(d_lo - d_hi) <= _TIE_SLACK * (1 + np.abs(y)))
                              & (y > vals[0]) & (y < vals[-1]))
        for r in near:
            # exact midpoint comparison: 2y vs v_lo + v_hi
            y_exact = exact_vals[sent[r]] + Fraction(float(z[r]))
            s = (y_exact * 2 - exact_vals[lo[r]] - exact_vals[hi[r]]).sign()
            decoded[r] = hi[r] if s > 0 else lo[r]
            ties += s == 0
        errors += int(np.count_nonzero(decoded != sent))
    notes = {"ties": ties, "noise_scale": noise_scale, "subthreshold_only": subthreshold_only}
    if kept == 0:
        return MCEstimate(0.0, 0, 0, 0.0, seed, 0, notes)
    return MCEstimate.from_counts(errors, kept, seed, **notes)


# separation against the Khintchine-Groshev scale

@dataclass(frozen=True)
class KGReport:
    eps: float
    rows: tuple[dict, ...]
    kappa_empirical: float
    kappa: float | None
    passed: bool | None


def kg_separation_check(model: ChannelModel, receiver: int, Qs: Sequence[int], eps: float,
                        kappa: float | None = None) -> KGReport:
    """Check ``d_min >= kappa C2 lam / Q**(2+eps)`` for each Q.

    ``kappa_empirical`` is the largest kappa passing at every Q (rounded
    down); it is 0 as soon as some Q has a collision.
    """
    if model.kind != XCHANNEL or not model.info["aligned"]:
        raise ChannelError("separation check needs an aligned X-channel")
    rows = []
    kemp = math.inf
    for Q in Qs:
        m = model.rebuild(Q=Q)
        const = constellation(m, receiver, "difference")
        C2lam = theoretical_bounds(m, receiver).constant
        ratio = const.d_min / C2lam
        lo = float(ratio.interval(64).lower()) if not ratio.is_zero() else 0.0
        normalized = math.nextafter(math.nextafter(lo * Q ** (2 + eps), 0.0), 0.0)
        kemp = min(kemp, normalized)
        rows.append({"Q": Q, "d_min": const.d_min, "C2lam": C2lam, "normalized": normalized,
                     "passes": None if kappa is None else normalized >= kappa})
    passed = None if kappa is None else all(r["passes"] for r in rows)
    return KGReport(eps, tuple(rows), kemp, kappa, passed)
