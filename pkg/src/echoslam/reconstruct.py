"""Room reconstruction from three unlabeled echo sets and two path lengths.

Given echo half-distance sets collected at O1, O2, O3 and the step lengths
d12 = |O1O2|, d23 = |O2O3|, the wall-normal angle theta_i of a correctly
labeled wall satisfies

    (r2_i - r1_i) + d12 * cos(theta_i) = 0
    d23 * cos(theta_i - phi) + (r3_i - r2_i) = 0

with phi the turn angle at O2.  The search enumerates echo assignments and
per-wall arccos sign choices, scoring each by the sample variance of the
per-wall phi estimates: the correct labeling makes them agree.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from itertools import product

import numpy as np

from .geometry import (
    ConvexRoom,
    RoomError,
    Wall,
    room_contains,
    room_from_walls,
    wrap_angle,
)

TWO_PI = 2.0 * math.pi

# The four (sigma, rho) arccos sign pairs, in lexicographic order (+ before -).
SIGN_PAIRS = ((1, 1), (1, -1), (-1, 1), (-1, -1))


class InfeasibleCombinationError(ValueError):
    """An echo combination produced a cosine outside the tolerance band."""


class NoFeasibleSignsError(ValueError):
    """No sign assignment could be resolved for the given cosines."""


class InvalidRoomError(ValueError):
    """The resolved wall set does not form a valid convex room."""


class AngleConstraintError(ValueError):
    """A candidate violates the adjacent-wall angle constraint."""


class NoSolutionError(ValueError):
    """No wall count admits a candidate below the variance threshold."""


class BudgetExceededError(ValueError):
    """The assignment enumeration exceeds the configured budget."""

    def __init__(self, message: str, counts: dict[int, int]):
        super().__init__(message)
        self.counts = counts


@dataclass(frozen=True)
class SlamConfig:
    """Search parameters.

    The defaults suit exact (noiseless) echo sets.  Under measurement noise,
    widen ``eps`` and ``angular_tol`` and raise ``v_th`` together: a candidate
    whose per-wall phi estimates spread wider than ``2 * angular_tol`` is
    pruned before its variance is ever compared against ``v_th``.
    """

    eps: float = 0.05
    v_th: float = 1e-3
    k_min: int = 3
    k_max: int = 6
    angular_tol: float = 0.02
    exhaustive_signs: bool = False
    budget: int | None = None
    angle_constraint: tuple[float, float] | None = None  # degrees on adjacent walls
    allow_reflection: bool = False
    var_tie_tol: float = 1e-10
    jobs: int = 1


@dataclass(frozen=True)
class MeasurementGeometry:
    """Step lengths and turn angle of the three measurement points.

    Frame convention: O1 at the origin, O2 on the +x axis, and
    phi = pi - angle(O1 O2 O3), so O3 = O2 + d23 * (cos phi, sin phi).
    The points are non-collinear iff sin(phi) != 0.
    """

    d12: float
    d23: float
    phi: float

    def __post_init__(self) -> None:
        if self.d12 <= 0 or self.d23 <= 0:
            raise ValueError("path lengths must be positive")

    @property
    def o1(self) -> np.ndarray:
        return np.zeros(2)

    @property
    def o2(self) -> np.ndarray:
        return np.array([self.d12, 0.0])

    @property
    def o3(self) -> np.ndarray:
        return np.array(
            [self.d12 + self.d23 * math.cos(self.phi), self.d23 * math.sin(self.phi)]
        )

    @property
    def collinear(self) -> bool:
        return math.sin(self.phi) == 0.0


@dataclass(frozen=True)
class EchoAssignment:
    """Selected echo indices per measurement point, aligned by wall slot.

    Slot s pairs ``point1[s]``, ``point2[s]`` and ``point3[s]``; slots are
    ordered by ascending point-1 index, which fixes the slot labeling.
    """

    point1: tuple[int, ...]
    point2: tuple[int, ...]
    point3: tuple[int, ...]

    def __post_init__(self) -> None:
        k = len(self.point1)
        if not (len(self.point2) == len(self.point3) == k):
            raise ValueError("assignment index tuples must have equal length")
        for idx in (self.point1, self.point2, self.point3):
            if len(set(idx)) != k:
                raise ValueError("echo indices must be distinct within a point")

    @property
    def k(self) -> int:
        return len(self.point1)


@dataclass
class CandidateSolution:
    """One scored reconstruction: room, per-wall angles and turn-angle fit.

    Slot-ordered arrays (thetas, offsets, alphas, betas, phi_estimates, signs)
    follow the assignment's slot order; ``room`` holds the same walls sorted
    by normal angle.
    """

    room: ConvexRoom
    thetas: np.ndarray
    offsets: np.ndarray
    alphas: np.ndarray
    betas: np.ndarray
    phi_estimates: np.ndarray
    phi: float
    var_phi: float
    geometry: MeasurementGeometry
    assignment: EchoAssignment
    signs: tuple[tuple[int, int], ...]
    diagnostics: dict = field(default_factory=dict)

    @property
    def k(self) -> int:
        return len(self.thetas)


def _distances(echoes) -> np.ndarray:
    d = getattr(echoes, "distances", echoes)
    return np.asarray(d, dtype=float)


def alpha_beta(r1: float, r2: float, r3: float, d12: float, d23: float):
    """Cosine observables of one wall slot: alpha = -(r2-r1)/d12, beta = -(r3-r2)/d23."""
    if d12 <= 0 or d23 <= 0:
        raise ValueError("path lengths must be positive")
    return -(r2 - r1) / d12, -(r3 - r2) / d23


def feasible_cosine(x: float, eps: float) -> float:
    """Clamp a noisy cosine into [-1, 1], allowing overshoot up to eps.

    Values beyond 1 + eps in magnitude mean the echo combination cannot
    correspond to a wall and are rejected.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    if -1.0 < x < 1.0:
        return x
    if 1.0 <= x < 1.0 + eps:
        return 1.0
    if -1.0 - eps < x <= -1.0:
        return -1.0
    raise InfeasibleCombinationError(f"cosine {x} outside [-1-eps, 1+eps]")


def phi_from_signs(alpha: float, beta: float, signs: tuple[int, int]):
    """Wall angle and turn angle for one sign pair.

    theta = sigma * arccos(alpha) normalized to [0, 2*pi);
    phi = theta - rho * arccos(beta) wrapped to (-pi, pi].
    """
    sigma, rho = signs
    a = math.acos(min(1.0, max(-1.0, alpha)))
    b = math.acos(min(1.0, max(-1.0, beta)))
    theta = sigma * a
    phi = wrap_angle(theta - rho * b)
    return theta % TWO_PI, phi


def _circular_mean(phis: np.ndarray) -> float:
    return math.atan2(float(np.sin(phis).sum()), float(np.cos(phis).sum()))


def _circular_var(phis: np.ndarray, mean: float) -> float:
    dev = np.mod(phis - mean + math.pi, TWO_PI) - math.pi
    return float(np.mean(dev * dev))


def _phi_options(a: float, b: float):
    """The four (phi, sign pair) options of one wall, given arccos values a, b."""
    return (
        (wrap_angle(a - b), (1, 1)),
        (wrap_angle(a + b), (1, -1)),
        (wrap_angle(-a - b), (-1, 1)),
        (wrap_angle(-a + b), (-1, -1)),
    )


def _sign_key(signs) -> tuple:
    # Lexicographic order with + before -.
    return tuple(0 if s > 0 else 1 for pair in signs for s in pair)


def _better_family(cand, best, tie_tol=1e-15):
    """Compare (signs, mean, var) sign families: variance, then phi in (0, pi), then lex signs."""
    if best is None:
        return True
    dv = cand[2] - best[2]
    scale = max(abs(cand[2]), abs(best[2]), 1.0)
    if dv < -tie_tol * scale - 1e-30:
        return True
    if dv > tie_tol * scale + 1e-30:
        return False
    cand_pos = 0.0 < cand[1] < math.pi
    best_pos = 0.0 < best[1] < math.pi
    if cand_pos != best_pos:
        return cand_pos
    return _sign_key(cand[0]) < _sign_key(best[0])


def resolve_signs(
    alphas,
    betas,
    angular_tol: float = 0.02,
    exhaustive: bool = False,
):
    """Pick the per-wall sign pairs minimizing the variance of the phi estimates.

    Returns ``(signs, phi_mean, var_phi, thetas, phi_estimates)``.  Ties are
    broken toward a mean turn angle in (0, pi), then toward the
    lexicographically smallest sign vector.

    The default path clusters the <= 4K candidate phi values and refines the
    per-wall choice around each cluster seed; ``exhaustive=True`` enumerates
    all 4^K joint assignments instead (reference behaviour for small K).
    """
    alphas = np.asarray(alphas, dtype=float)
    betas = np.asarray(betas, dtype=float)
    k = alphas.size
    if k == 0 or betas.size != k:
        raise NoFeasibleSignsError("need matching, non-empty alpha/beta arrays")
    A = np.arccos(np.clip(alphas, -1.0, 1.0))
    B = np.arccos(np.clip(betas, -1.0, 1.0))
    options = [_phi_options(A[i], B[i]) for i in range(k)]

    best = None
    if exhaustive:
        for combo in product(*options):
            phis = np.array([c[0] for c in combo])
            mean = _circular_mean(phis)
            var = _circular_var(phis, mean)
            fam = (tuple(c[1] for c in combo), mean, var)
            if _better_family(fam, best):
                best = fam
    else:
        values = np.array([[opt[0] for opt in wall] for wall in options])  # (k, 4)
        centers = values.reshape(-1)  # every candidate value seeds one cluster
        rows = np.arange(k)[None, :]
        pick = None
        for _ in range(4):
            diff = np.abs(
                np.mod(values[None, :, :] - centers[:, None, None] + math.pi, TWO_PI)
                - math.pi
            )
            new_pick = np.argmin(diff, axis=2)  # ties -> lower index = lex smaller
            if pick is not None and np.array_equal(new_pick, pick):
                break
            pick = new_pick
            chosen = values[rows, pick]
            centers = np.arctan2(np.sin(chosen).sum(axis=1), np.cos(chosen).sum(axis=1))
        chosen = values[rows, pick]
        means = np.arctan2(np.sin(chosen).sum(axis=1), np.cos(chosen).sum(axis=1))
        dev = np.mod(chosen - means[:, None] + math.pi, TWO_PI) - math.pi
        variances = np.mean(dev * dev, axis=1)
        order = np.argsort(variances, kind="stable")
        vmin = variances[order[0]]
        for row in order:
            if variances[row] > vmin + 1e-15 * max(vmin, 1.0) + 1e-30:
                break
            fam = (
                tuple(options[i][pick[row, i]][1] for i in range(k)),
                float(means[row]),
                float(variances[row]),
            )
            if _better_family(fam, best):
                best = fam

    signs, mean, var = best
    thetas = np.array([(signs[i][0] * A[i]) % TWO_PI for i in range(k)])
    phis = np.array(
        [wrap_angle(signs[i][0] * A[i] - signs[i][1] * B[i]) for i in range(k)]
    )
    return signs, mean, var, thetas, phis


def enumerate_sign_families(alphas, betas, var_threshold: float):
    """All 4^K sign assignments whose phi variance falls below the threshold.

    Returns a list of ``(signs, phi_mean, var)`` triples, exhaustively
    enumerated; intended as a reference oracle for small K.
    """
    alphas = np.asarray(alphas, dtype=float)
    betas = np.asarray(betas, dtype=float)
    k = alphas.size
    A = np.arccos(np.clip(alphas, -1.0, 1.0))
    B = np.arccos(np.clip(betas, -1.0, 1.0))
    options = [_phi_options(A[i], B[i]) for i in range(k)]
    out = []
    for combo in product(*options):
        phis = np.array([c[0] for c in combo])
        mean = _circular_mean(phis)
        var = _circular_var(phis, mean)
        if var < var_threshold:
            out.append((tuple(c[1] for c in combo), mean, var))
    return out


def count_assignments(n1: int, n2: int, n3: int, k: int) -> int:
    """Exact number of echo assignments: C(n1,k) C(n2,k) C(n3,k) (k!)^2."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if k > min(n1, n2, n3):
        raise ValueError("k exceeds an echo set size")
    return (
        math.comb(n1, k)
        * math.comb(n2, k)
        * math.comb(n3, k)
        * math.factorial(k) ** 2
    )


def _check_angle_constraint(thetas_sorted: np.ndarray, lo_deg: float, hi_deg: float) -> bool:
    gaps = np.diff(np.concatenate([thetas_sorted, [thetas_sorted[0] + TWO_PI]]))
    lo, hi = math.radians(lo_deg), math.radians(hi_deg)
    return bool(np.all((gaps >= lo) & (gaps <= hi)))


def _evaluate_assignment(
    r1: np.ndarray,
    r2: np.ndarray,
    r3: np.ndarray,
    idx1,
    idx2,
    idx3,
    d12: float,
    d23: float,
    cfg: SlamConfig,
    raise_errors: bool = False,
):
    """Score one assignment; returns a CandidateSolution or None (or raises)."""
    sel1 = r1[list(idx1)]
    sel2 = r2[list(idx2)]
    sel3 = r3[list(idx3)]
    alphas = -(sel2 - sel1) / d12
    betas = -(sel3 - sel2) / d23
    if np.max(np.abs(alphas)) > 1.0 + cfg.eps or np.max(np.abs(betas)) > 1.0 + cfg.eps:
        if raise_errors:
            raise InfeasibleCombinationError("cosine outside the tolerance band")
        return None
    signs, phi_mean, var, thetas, phis = resolve_signs(
        alphas, betas, angular_tol=cfg.angular_tol, exhaustive=cfg.exhaustive_signs
    )
    return _finish_candidate(
        sel1, alphas, betas, signs, phi_mean, var, thetas, phis,
        idx1, idx2, idx3, d12, d23, cfg, raise_errors,
    )


def _finish_candidate(
    sel1, alphas, betas, signs, phi_mean, var, thetas, phis,
    idx1, idx2, idx3, d12, d23, cfg, raise_errors,
):
    try:
        room = room_from_walls(
            [Wall(float(t), float(s)) for t, s in zip(thetas, sel1)]
        )
    except (RoomError, ValueError) as exc:
        if raise_errors:
            raise InvalidRoomError(str(exc)) from exc
        return None
    if cfg.angle_constraint is not None:
        lo, hi = cfg.angle_constraint
        if not _check_angle_constraint(room.normal_angles(), lo, hi):
            if raise_errors:
                raise AngleConstraintError(
                    f"adjacent wall angle outside [{lo}, {hi}] degrees"
                )
            return None
    geometry = MeasurementGeometry(d12=d12, d23=d23, phi=phi_mean)
    return CandidateSolution(
        room=room,
        thetas=np.asarray(thetas, dtype=float),
        offsets=np.asarray(sel1, dtype=float),
        alphas=np.asarray(alphas, dtype=float),
        betas=np.asarray(betas, dtype=float),
        phi_estimates=np.asarray(phis, dtype=float),
        phi=phi_mean,
        var_phi=var,
        geometry=geometry,
        assignment=EchoAssignment(tuple(idx1), tuple(idx2), tuple(idx3)),
        signs=tuple(signs),
    )


def build_solution(
    assignment: EchoAssignment,
    echoes1,
    echoes2,
    echoes3,
    d12: float,
    d23: float,
    cfg: SlamConfig | None = None,
) -> CandidateSolution:
    """Evaluate one explicit echo assignment, raising on infeasibility."""
    cfg = cfg or SlamConfig()
    r1, r2, r3 = _distances(echoes1), _distances(echoes2), _distances(echoes3)
    return _evaluate_assignment(
        r1, r2, r3, assignment.point1, assignment.point2, assignment.point3,
        d12, d23, cfg, raise_errors=True,
    )


def _candidate_better(new: CandidateSolution, old: CandidateSolution | None, cfg: SlamConfig) -> bool:
    """Replacement rule for the per-K stored candidate.

    Strictly smaller variance wins.  Among variance ties, a room that fully
    covers the stored one is rejected and a covered room is preferred
    (smallest-room rule); remaining ties go to smaller perimeter, then to a
    turn angle in (0, pi), then to the lexicographically smaller angle vector.
    """
    if old is None:
        return True
    dv = new.var_phi - old.var_phi
    if dv < -cfg.var_tie_tol:
        return True
    if dv > cfg.var_tie_tol:
        return False
    new_covers = room_contains(new.room, old.room)
    old_covers = room_contains(old.room, new.room)
    if new_covers and not old_covers:
        return False
    if old_covers and not new_covers:
        return True
    dp = new.room.perimeter() - old.room.perimeter()
    if abs(dp) > 1e-12:
        return dp < 0
    new_pos = 0.0 < new.phi < math.pi
    old_pos = 0.0 < old.phi < math.pi
    if new_pos != old_pos:
        return new_pos
    return tuple(np.sort(new.thetas)) < tuple(np.sort(old.thetas))


@dataclass
class SearchStats:
    raw_count: int = 0
    nodes: int = 0
    leaves: int = 0
    candidates: int = 0
    best_var: float = math.inf


def _merge_clusters(clusters, values, width):
    """Intersect running phi windows with a wall's candidate values.

    A cluster is (ref, lo, hi): phi values within [ref+lo, ref+hi], kept only
    while hi - lo <= width.  Empty result prunes the partial assignment.
    """
    out = []
    seen = set()
    quant = 0.5 * width + 1e-12
    for ref, lo, hi in clusters:
        for v in values:
            u = wrap_angle(v - ref)
            nlo = u if u < lo else lo
            nhi = u if u > hi else hi
            if nhi - nlo <= width:
                key = (round((ref + 0.5 * (nlo + nhi)) / quant),
                       round((nhi - nlo) / quant))
                if key not in seen:
                    seen.add(key)
                    out.append((ref, nlo, nhi))
    if len(out) > 64:
        out.sort(key=lambda c: c[2] - c[1])
        out = out[:64]
    return out


def _search_k(r1, r2, r3, d12, d23, k, cfg, collect_threshold=None):
    """Best candidate with k walls (or all below collect_threshold).

    Depth-first enumeration over wall slots with ascending point-1 indices;
    a partial assignment is abandoned as soon as a cosine leaves the
    tolerance band or no phi window of width 2*angular_tol survives.
    """
    n1, n2, n3 = r1.size, r2.size, r3.size
    stats = SearchStats(raw_count=count_assignments(n1, n2, n3, k))
    lim = 1.0 + cfg.eps

    alpha = -(r2[None, :] - r1[:, None]) / d12  # [a, b]
    beta = -(r3[None, :] - r2[:, None]) / d23  # [b, c]
    A = np.arccos(np.clip(alpha, -1.0, 1.0))
    B = np.arccos(np.clip(beta, -1.0, 1.0))
    adj_ab = [
        [(b, A[a, b]) for b in range(n2) if abs(alpha[a, b]) <= lim]
        for a in range(n1)
    ]
    adj_bc = [
        [(c, B[b, c]) for c in range(n3) if abs(beta[b, c]) <= lim]
        for b in range(n2)
    ]

    best: CandidateSolution | None = None
    collected: list[CandidateSolution] = []
    idx1 = [0] * k
    idx2 = [0] * k
    idx3 = [0] * k

    # Any candidate worth keeping has phi-estimate variance below this bound,
    # and K values with variance v span a window no wider than sqrt(2 K v);
    # the window cap tightens as better candidates are found.
    def width_cap() -> float:
        if collect_threshold is not None:
            vbound = collect_threshold
        else:
            vbound = cfg.v_th
            if best is not None:
                vbound = min(vbound, best.var_phi + cfg.var_tie_tol)
        return min(2.0 * cfg.angular_tol, math.sqrt(2.0 * k * vbound) * (1 + 1e-9))

    cap = width_cap()

    def leaf():
        nonlocal best, cap
        stats.leaves += 1
        if cfg.budget is not None and stats.leaves > cfg.budget:
            raise BudgetExceededError(
                f"evaluated assignments exceed budget {cfg.budget}",
                {k: stats.raw_count},
            )
        cand = _evaluate_assignment(r1, r2, r3, tuple(idx1), tuple(idx2), tuple(idx3),
                                    d12, d23, cfg)
        if cand is None:
            return
        if collect_threshold is not None:
            if cand.var_phi <= collect_threshold:
                collected.append(cand)
                stats.candidates += 1
            return
        stats.candidates += 1
        if _candidate_better(cand, best, cfg):
            best = cand
            stats.best_var = cand.var_phi
            cap = width_cap()

    def descend(depth, a_start, used2, used3, clusters):
        if depth == k:
            leaf()
            return
        for a in range(a_start, n1 - (k - depth - 1)):
            for b, a_ab in adj_ab[a]:
                if used2 >> b & 1:
                    continue
                for c, b_bc in adj_bc[b]:
                    if used3 >> c & 1:
                        continue
                    stats.nodes += 1
                    values = (
                        wrap_angle(a_ab - b_bc),
                        wrap_angle(a_ab + b_bc),
                        wrap_angle(-a_ab - b_bc),
                        wrap_angle(-a_ab + b_bc),
                    )
                    if depth == 0:
                        new_clusters = [(v, 0.0, 0.0) for v in values]
                    else:
                        new_clusters = _merge_clusters(clusters, values, cap)
                        if not new_clusters:
                            continue
                    idx1[depth] = a
                    idx2[depth] = b
                    idx3[depth] = c
                    descend(depth + 1, a + 1, used2 | (1 << b), used3 | (1 << c),
                            new_clusters)

    descend(0, 0, 0, 0, [])
    if collect_threshold is not None:
        return collected, stats
    return best, stats


def _search_k_task(args):
    r1, r2, r3, d12, d23, k, cfg = args
    return k, _search_k(r1, r2, r3, d12, d23, k, cfg)


def collect_candidates(
    echoes1, echoes2, echoes3, d12, d23, k, cfg=None, var_threshold=1e-12
):
    """All valid k-wall candidates with variance below the threshold.

    Used to demonstrate ambiguity: duplicate rooms (same angles and offsets)
    are collapsed, distinct rooms kept.
    """
    cfg = cfg or SlamConfig()
    r1, r2, r3 = _distances(echoes1), _distances(echoes2), _distances(echoes3)
    cands, _ = _search_k(r1, r2, r3, d12, d23, k, cfg, collect_threshold=var_threshold)
    unique = {}
    for c in cands:
        key = (
            tuple(np.round(np.sort(c.thetas), 7)),
            tuple(np.round(c.offsets[np.argsort(c.thetas)], 7)),
        )
        if key not in unique or c.var_phi < unique[key].var_phi:
            unique[key] = c
    return sorted(unique.values(), key=lambda c: (c.var_phi, c.room.perimeter()))


def slam(
    echoes1,
    echoes2,
    echoes3,
    d12: float,
    d23: float,
    cfg: SlamConfig | None = None,
) -> CandidateSolution:
    """Reconstruct the room and O3 from three ungrouped echo sets.

    For each wall count K in ``[k_min, k_max]`` the assignment search keeps
    the minimum-variance candidate; the result is the candidate of the
    largest K whose variance falls below ``v_th``.  Raises NoSolutionError
    when no K qualifies and BudgetExceededError when the combination count
    exceeds ``cfg.budget``.
    """
    cfg = cfg or SlamConfig()
    if d12 <= 0 or d23 <= 0:
        raise ValueError("path lengths must be positive")
    r1, r2, r3 = _distances(echoes1), _distances(echoes2), _distances(echoes3)
    n_min = min(r1.size, r2.size, r3.size)
    ks = [k for k in range(cfg.k_min, cfg.k_max + 1) if 3 <= k <= n_min]
    if not ks:
        raise NoSolutionError("echo sets too small for any wall count in range")

    if cfg.budget is not None:
        counts = {k: count_assignments(r1.size, r2.size, r3.size, k) for k in ks}
        over = {k: c for k, c in counts.items() if c > cfg.budget}
        if over:
            raise BudgetExceededError(
                f"assignment counts {over} exceed budget {cfg.budget}", counts
            )

    results: dict[int, tuple[CandidateSolution | None, SearchStats]] = {}
    if cfg.jobs > 1 and len(ks) > 1:
        tasks = [(r1, r2, r3, d12, d23, k, cfg) for k in ks]
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            for k, res in pool.map(_search_k_task, tasks):
                results[k] = res
    else:
        for k in ks:
            results[k] = _search_k(r1, r2, r3, d12, d23, k, cfg)

    per_k = {
        k: {
            "raw_count": st.raw_count,
            "nodes": st.nodes,
            "leaves": st.leaves,
            "candidates": st.candidates,
            "best_var": None if best is None else best.var_phi,
        }
        for k, (best, st) in results.items()
    }
    qualifying = [
        k for k, (best, _) in results.items()
        if best is not None and best.var_phi < cfg.v_th
    ]
    if not qualifying:
        raise NoSolutionError(
            f"no candidate below variance threshold {cfg.v_th}; per-K stats: {per_k}"
        )
    k_star = max(qualifying)
    sol = results[k_star][0]
    sol.diagnostics = {
        "per_k": per_k,
        "combinations_examined": sum(st.leaves for _, st in results.values()),
        "k_range": ks,
    }
    return sol


def equation_residuals(sol: CandidateSolution, echoes1, echoes2, echoes3):
    """Slot-wise residuals of the two projection identities at a solution.

    Returns ``(res12, res23)`` where
    ``res12[s] = (r2_s - r1_s) + d12 * cos(theta_s)`` and
    ``res23[s] = d23 * cos(theta_s - phi) + (r3_s - r2_s)``.
    """
    r1, r2, r3 = _distances(echoes1), _distances(echoes2), _distances(echoes3)
    i1 = list(sol.assignment.point1)
    i2 = list(sol.assignment.point2)
    i3 = list(sol.assignment.point3)
    g = sol.geometry
    res12 = (r2[i2] - r1[i1]) + g.d12 * np.cos(sol.thetas)
    res23 = g.d23 * np.cos(sol.thetas - sol.phi) + (r3[i3] - r2[i2])
    return res12, res23


def solution_to_dict(sol: CandidateSolution) -> dict:
    """JSON-ready view of a solution (angles in degrees for walls)."""
    room = sol.room
    return {
        "k": sol.k,
        "phi_rad": float(sol.phi),
        "var_phi": float(sol.var_phi),
        "walls": [
            {"normal_angle_deg": math.degrees(w.normal_angle), "offset_m": w.offset}
            for w in room.walls
        ],
        "vertices": [[float(x), float(y)] for x, y in room.vertices],
        "o2": [float(v) for v in sol.geometry.o2],
        "o3": [float(v) for v in sol.geometry.o3],
        "assignment": {
            "o1": list(sol.assignment.point1),
            "o2": list(sol.assignment.point2),
            "o3": list(sol.assignment.point3),
        },
        "signs": [
            ("+" if s > 0 else "-") + ("+" if r > 0 else "-") for s, r in sol.signs
        ],
        "diagnostics": sol.diagnostics,
    }
