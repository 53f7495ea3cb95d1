"""Quantum monodromy from computed joint spectra.

Away from the critical value the joint spectrum is locally a deformed
affine image of h Z^2.  This module fits such lattice charts from data,
transports them along paths with integer-affine gluing, unwinds closed
polygonal lines through the spectrum (the developing map), extracts the
monodromy as the end-to-start chart transition, and realizes the exact
eigenvalue count of a spectrum polygon through Pick's formula.

All integer geometry (point-in-polygon, Pick counts, transitions) is done
in exact arithmetic; floating point only enters through the chart fits,
whose rounding residuals are explicitly budgeted (0.05 for charts, 0.1
for transitions, both configurable).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ChartError, DomainError, TransportError

CHART_RESIDUAL_MAX = 0.05
TRANSITION_RESIDUAL_MAX = 0.1
CHART_CONDITION_MAX = 1e3
MIN_CHART_POINTS = 6


def _points_array(spectrum) -> np.ndarray:
    if isinstance(spectrum, np.ndarray):
        return np.asarray(spectrum, dtype=float)
    return np.array([[p.E1, p.E2] for p in spectrum.points], dtype=float)


# --- charts --------------------------------------------------------------

@dataclass(frozen=True)
class LatticeChart:
    """Affine identification P -> (linear P + offset)/h of a spectrum disc
    with the straight integer lattice."""

    center: tuple
    linear: np.ndarray
    offset: np.ndarray
    radius: float
    h: float
    residual: float = 0.0

    def real_labels(self, pts: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        return (pts @ self.linear.T + self.offset) / self.h

    def labels(self, pts: np.ndarray) -> np.ndarray:
        return np.rint(self.real_labels(pts)).astype(int)

    def contains(self, pts: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        d = pts - np.asarray(self.center, dtype=float)
        return np.hypot(d[:, 0], d[:, 1]) <= self.radius


@dataclass(frozen=True)
class ChartTransition:
    """Integer-affine map k -> matrix k + shift between chart label frames."""

    matrix: np.ndarray
    shift: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=int)
        s = np.asarray(self.shift, dtype=int)
        if abs(int(round(np.linalg.det(m)))) != 1:
            raise ChartError(f"transition matrix {m.tolist()} has |det| != 1")
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "shift", s)

    def apply(self, k: np.ndarray) -> np.ndarray:
        k = np.asarray(k, dtype=int)
        return k @ self.matrix.T + self.shift

    def compose(self, other: "ChartTransition") -> "ChartTransition":
        """self after other: (self o other)(k) = self(other(k))."""
        return ChartTransition(self.matrix @ other.matrix,
                               self.matrix @ other.shift + self.shift)

    def inverse(self) -> "ChartTransition":
        det = int(round(np.linalg.det(self.matrix)))
        m = self.matrix
        inv = det * np.array([[m[1, 1], -m[0, 1]], [-m[1, 0], m[0, 0]]],
                             dtype=int)
        return ChartTransition(inv, -inv @ self.shift)

    def is_identity(self) -> bool:
        return bool(np.array_equal(self.matrix, np.eye(2, dtype=int))
                    and np.array_equal(self.shift, [0, 0]))

    @staticmethod
    def identity() -> "ChartTransition":
        return ChartTransition(np.eye(2, dtype=int), np.zeros(2, dtype=int))


def local_spacing(points: np.ndarray, center, k: int = 9) -> float:
    """Median nearest-neighbor distance among the k points nearest center."""
    pts = _points_array(points)
    d = np.hypot(pts[:, 0] - center[0], pts[:, 1] - center[1])
    idx = np.argsort(d)[:max(k, 3)]
    sub = pts[idx]
    diff = sub[:, None, :] - sub[None, :, :]
    dist = np.hypot(diff[..., 0], diff[..., 1])
    np.fill_diagonal(dist, np.inf)
    return float(np.median(np.min(dist, axis=1)))


def fit_local_chart(points, center, h: float, radius: float | None = None,
                    residual_max: float = CHART_RESIDUAL_MAX) -> LatticeChart:
    """Fit an affine lattice chart on the disc around center.

    Basis candidates are the two shortest linearly independent
    nearest-neighbor difference vectors; the affine map is then refined by
    least squares against rounded integer labels until the labels are
    stable.  When no radius is given, starts at 3.5 local spacings and
    shrinks until the residual budget is met.  Raises ChartError when
    fewer than 6 points fall in the disc, the neighbor geometry is
    degenerate, the infinity-norm rounding residual exceeds residual_max,
    or the linear part is ill conditioned.
    """
    pts_all = _points_array(points)
    center = (float(center[0]), float(center[1]))
    if radius is None:
        r = 3.5 * local_spacing(pts_all, center)
        last = None
        for _ in range(4):
            try:
                return _fit_chart_fixed(pts_all, center, h, r, residual_max)
            except ChartError as exc:
                last = exc
                r *= 0.75
        raise last
    return _fit_chart_fixed(pts_all, center, h, float(radius), residual_max)


def _fit_chart_fixed(pts_all: np.ndarray, center, h: float, radius: float,
                     residual_max: float) -> LatticeChart:
    d = np.hypot(pts_all[:, 0] - center[0], pts_all[:, 1] - center[1])
    pts = pts_all[d <= radius]
    if len(pts) < MIN_CHART_POINTS:
        raise ChartError(
            f"only {len(pts)} points in the disc at {center}, radius {radius:g}")

    diff = pts[:, None, :] - pts[None, :, :]
    dist = np.hypot(diff[..., 0], diff[..., 1])
    np.fill_diagonal(dist, np.inf)
    flat = np.argsort(dist, axis=None)
    d1 = None
    d2 = None
    for f in flat:
        i, j = np.unravel_index(f, dist.shape)
        v = diff[i, j]
        if d1 is None:
            d1 = v
            continue
        if abs(d1[0] * v[1] - d1[1] * v[0]) > 0.3 * np.hypot(*d1) * np.hypot(*v):
            d2 = v
            break
    if d2 is None:
        raise ChartError(f"degenerate neighbor geometry at {center}")

    basis = np.column_stack([d1, d2])
    linear = h * np.linalg.inv(basis)
    # anchor on the point nearest the center: the center itself need not
    # be a lattice point, and a half-integer anchor stalls the rounding
    anchor = pts[np.argmin(np.hypot(pts[:, 0] - center[0],
                                    pts[:, 1] - center[1]))]
    offset = -linear @ anchor

    prev = None
    for _ in range(8):
        real = (pts @ linear.T + offset) / h
        k = np.rint(real)
        if prev is not None and np.array_equal(k, prev):
            break
        prev = k
        # rows of [P | 1] map to h k under (linear, offset)
        A = np.column_stack([pts, np.ones(len(pts))])
        sol, _, _, _ = np.linalg.lstsq(A, h * k, rcond=None)
        linear = sol[:2].T
        offset = sol[2]
    real = (pts @ linear.T + offset) / h
    resid = float(np.max(np.abs(real - np.rint(real))))
    if resid > residual_max:
        raise ChartError(
            f"chart residual {resid:.4f} > {residual_max} at {center}")
    if np.linalg.cond(linear) >= CHART_CONDITION_MAX:
        raise ChartError(f"ill-conditioned chart at {center}")
    return LatticeChart(center=center, linear=linear, offset=offset,
                        radius=float(radius), h=float(h), residual=resid)


def transport_chart(chart: LatticeChart, new_center, points,
                    radius: float | None = None,
                    residual_max: float = CHART_RESIDUAL_MAX,
                    transition_max: float = TRANSITION_RESIDUAL_MAX,
                    ) -> tuple[LatticeChart, ChartTransition]:
    """Continue a chart frame to a nearby disc.

    Fits a fresh chart at new_center, expresses the old labels on the
    overlap as an integer-affine function of the new ones, and returns the
    corrected chart (which agrees with the old frame on the overlap, so
    its raw transition is the identity by construction) together with the
    transition that was found.
    """
    pts_all = _points_array(points)
    fresh = fit_local_chart(pts_all, new_center, chart.h, radius=radius,
                            residual_max=residual_max)
    both = chart.contains(pts_all) & fresh.contains(pts_all)
    overlap = pts_all[both]
    if len(overlap) < MIN_CHART_POINTS:
        raise TransportError(
            f"only {len(overlap)} points in the chart overlap at {new_center}")
    k_old = chart.labels(overlap).astype(float)
    k_new = fresh.labels(overlap).astype(float)
    A = np.column_stack([k_new, np.ones(len(k_new))])
    sol, _, _, _ = np.linalg.lstsq(A, k_old, rcond=None)
    T_real, s_real = sol[:2].T, sol[2]
    T = np.rint(T_real).astype(int)
    s = np.rint(s_real).astype(int)
    resid = max(float(np.max(np.abs(T_real - T))),
                float(np.max(np.abs(s_real - s))))
    if resid > transition_max:
        raise TransportError(
            f"transition rounding residual {resid:.4f} > {transition_max} "
            f"at {new_center} (chart spacing too coarse)")
    trans = ChartTransition(T, s)  # validates |det| = 1
    corrected = LatticeChart(center=fresh.center,
                             linear=trans.matrix @ fresh.linear,
                             offset=trans.matrix @ fresh.offset
                             + chart.h * trans.shift,
                             radius=fresh.radius, h=fresh.h,
                             residual=fresh.residual)
    return corrected, trans


# --- polygons and unwinding ----------------------------------------------

@dataclass
class SpectrumPolygon:
    """Closed polygonal line through joint eigenvalues.

    vertices: JointEigenvalue list, cyclic (first vertex not repeated).
    For loops enclosing the critical value the polygon must start on the
    n = 0 line at E1 > 0 and contain exactly two n = 0 vertices, so that
    its intersection with every lattice line is a segment with vertex
    extremities.
    """

    vertices: list
    starts_on_L0: bool = False

    def vertex_points(self) -> np.ndarray:
        return np.array([[v.E1, v.E2] for v in self.vertices], dtype=float)


@dataclass
class UnwindResult:
    vertices: np.ndarray          # (l+1, 2) int; last = continued first
    monodromy: ChartTransition
    charts: list
    transitions: list
    closed: bool = field(init=False)

    def __post_init__(self):
        self.closed = bool(np.array_equal(self.vertices[0],
                                          self.vertices[-1]))


def winding_around_origin(pts: np.ndarray) -> int:
    pts = np.asarray(pts, dtype=float)
    ang = np.arctan2(pts[:, 1], pts[:, 0])
    dang = np.diff(np.concatenate([ang, ang[:1]]))
    dang = (dang + math.pi) % (2.0 * math.pi) - math.pi
    return int(round(np.sum(dang) / (2.0 * math.pi)))


def unwind(polygon: SpectrumPolygon, spectrum, h: float | None = None,
           chart_radius: float | None = None,
           residual_max: float = CHART_RESIDUAL_MAX,
           transition_max: float = TRANSITION_RESIDUAL_MAX) -> UnwindResult:
    """Develop the polygon onto the integer lattice chart by chart.

    A chart is fitted at the first vertex and transported vertex to
    vertex around the loop; unwound vertex j is the continued-frame label
    of vertex j.  The monodromy is the transition from the final
    continued frame back to the starting chart, measured on the starting
    disc; it is the identity for non-enclosing loops and unipotent with
    one Jordan block for loops around the critical value.
    """
    pts_all = _points_array(spectrum)
    verts = polygon.vertex_points()
    if h is None:
        h = polygon.vertices[0].h
    ell = len(verts)
    if ell < 3:
        raise DomainError("polygon needs at least 3 vertices")

    try:
        chart0 = fit_local_chart(pts_all, verts[0], h, radius=chart_radius,
                                 residual_max=residual_max)
    except ChartError as exc:
        raise ChartError(f"chart chain failed at vertex 0: {exc}") from exc
    def step(chart, target, depth=4):
        # subdivide the segment when the chart overlap is too thin
        try:
            return transport_chart(chart, target, pts_all,
                                   radius=chart_radius,
                                   residual_max=residual_max,
                                   transition_max=transition_max)
        except TransportError:
            if depth == 0:
                raise
            mid = (0.5 * (chart.center[0] + target[0]),
                   0.5 * (chart.center[1] + target[1]))
            middle, _ = step(chart, mid, depth - 1)
            return step(middle, target, depth - 1)

    charts = [chart0]
    transitions = []
    labels = [chart0.labels(verts[0])[0]]
    current = chart0
    for j in range(1, ell + 1):
        v = verts[j % ell]
        try:
            current, trans = step(current, v)
        except (ChartError, TransportError) as exc:
            raise type(exc)(
                f"chart chain failed on segment {j - 1} -> {j % ell}: {exc}"
            ) from exc
        charts.append(current)
        transitions.append(trans)
        labels.append(current.labels(v)[0])

    # monodromy: continued frame vs the original chart on the start disc
    both = chart0.contains(pts_all) & current.contains(pts_all)
    overlap = pts_all[both]
    if len(overlap) < MIN_CHART_POINTS:
        raise TransportError("start/end chart overlap too small")
    k_start = chart0.labels(overlap).astype(float)
    k_cont = current.labels(overlap).astype(float)
    A = np.column_stack([k_start, np.ones(len(k_start))])
    sol, _, _, _ = np.linalg.lstsq(A, k_cont, rcond=None)
    T = np.rint(sol[:2].T).astype(int)
    s = np.rint(sol[2]).astype(int)
    resid = max(float(np.max(np.abs(sol[:2].T - T))),
                float(np.max(np.abs(sol[2] - s))))
    if resid > transition_max:
        raise TransportError(
            f"monodromy rounding residual {resid:.4f} > {transition_max}")
    monodromy = ChartTransition(T, s)
    return UnwindResult(vertices=np.array(labels, dtype=int),
                        monodromy=monodromy, charts=charts,
                        transitions=transitions)


def l0_line(spectrum, charts, monodromy: ChartTransition | None = None):
    """Eigenvalues unwound onto the line fixed pointwise by the monodromy.

    charts must form a consistent closed chain (as returned by unwind);
    the monodromy defaults to the end-to-start transition implied by the
    first and last charts.  Returns [] with a warning when the monodromy
    is the identity (every line is then fixed) or no fixed lattice points
    exist.
    """
    import warnings

    pts = _points_array(spectrum)
    if monodromy is None:
        if len(charts) < 2:
            raise ChartError("need a chart chain to define the monodromy")
        first, last = charts[0], charts[-1]
        both = first.contains(pts) & last.contains(pts)
        overlap = pts[both]
        if len(overlap) < MIN_CHART_POINTS:
            raise ChartError("first/last chart overlap too small")
        A = np.column_stack([first.labels(overlap).astype(float),
                             np.ones(len(overlap))])
        sol, _, _, _ = np.linalg.lstsq(A, last.labels(overlap).astype(float),
                                       rcond=None)
        monodromy = ChartTransition(np.rint(sol[:2].T).astype(int),
                                    np.rint(sol[2]).astype(int))
    if monodromy.is_identity():
        warnings.warn("identity monodromy: fixed line is undefined")
        return []
    N = monodromy.matrix - np.eye(2, dtype=int)
    rhs = -monodromy.shift
    # fixed points solve N k = rhs; N is rank one for unipotent monodromy
    rows = [(int(N[i, 0]), int(N[i, 1]), int(rhs[i])) for i in range(2)]
    rows = [r for r in rows if r[0] != 0 or r[1] != 0]
    if not rows:
        warnings.warn("no constraint rows; fixed line undefined")
        return []
    a, b, c = rows[0]
    g = math.gcd(a, b)
    if c % g != 0:
        warnings.warn("monodromy has no fixed lattice points")
        return []

    out = []
    seen = set()
    for idx, p in enumerate(spectrum.points):
        pt = np.array([[p.E1, p.E2]])
        for ch in charts:
            if ch.contains(pt)[0]:
                k = ch.labels(pt)[0]
                if np.array_equal(N @ k, rhs) and idx not in seen:
                    seen.add(idx)
                    out.append(p)
                break
    return out


# --- exact integer geometry ----------------------------------------------

def _orient(a, b, c) -> int:
    v = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
    return (v > 0) - (v < 0)


def _on_segment(a, b, p) -> bool:
    if _orient(a, b, p) != 0:
        return False
    return (min(a[0], b[0]) <= p[0] <= max(a[0], b[0])
            and min(a[1], b[1]) <= p[1] <= max(a[1], b[1]))


def _segments_intersect(a, b, c, d) -> bool:
    o1, o2 = _orient(a, b, c), _orient(a, b, d)
    o3, o4 = _orient(c, d, a), _orient(c, d, b)
    if o1 != o2 and o3 != o4:
        return True
    return (_on_segment(a, b, c) or _on_segment(a, b, d)
            or _on_segment(c, d, a) or _on_segment(c, d, b))


def _validate_simple(v: list) -> None:
    m = len(v)
    if m < 3:
        raise DomainError("polygon needs at least 3 vertices")
    for i in range(m):
        if v[i] == v[(i + 1) % m]:
            raise DomainError(f"repeated consecutive vertex at {i}")
    area2 = sum(v[i][0] * v[(i + 1) % m][1] - v[(i + 1) % m][0] * v[i][1]
                for i in range(m))
    if area2 == 0:
        raise DomainError("degenerate polygon (zero area)")
    for i in range(m):
        a, b = v[i], v[(i + 1) % m]
        for j in range(i + 1, m):
            if j == i or (j + 1) % m == i or (i + 1) % m == j:
                continue
            c, d = v[j], v[(j + 1) % m]
            if _segments_intersect(a, b, c, d):
                raise DomainError(
                    f"polygon self-intersects: edges {i} and {j}")


def pick_count(vertices) -> int:
    """Lattice points inside or on a simple integer polygon, by Pick.

    N = Area + boundary/2 + 1, all in exact integer arithmetic; raises
    DomainError for degenerate or self-intersecting input.
    """
    v = [(int(p[0]), int(p[1])) for p in vertices]
    if len(v) > 1 and v[0] == v[-1]:
        v = v[:-1]
    _validate_simple(v)
    m = len(v)
    area2 = abs(sum(v[i][0] * v[(i + 1) % m][1] - v[(i + 1) % m][0] * v[i][1]
                    for i in range(m)))
    boundary = sum(math.gcd(abs(v[(i + 1) % m][0] - v[i][0]),
                            abs(v[(i + 1) % m][1] - v[i][1]))
                   for i in range(m))
    return (area2 + boundary) // 2 + 1


def lattice_point_in_polygon(p, vertices) -> bool:
    """Exact inside-or-on test for an integer point against an integer polygon."""
    v = [(int(q[0]), int(q[1])) for q in vertices]
    if len(v) > 1 and v[0] == v[-1]:
        v = v[:-1]
    x, y = int(p[0]), int(p[1])
    m = len(v)
    for i in range(m):
        if _on_segment(v[i], v[(i + 1) % m], (x, y)):
            return True
    inside = False
    for i in range(m):
        (ax, ay), (bx, by) = v[i], v[(i + 1) % m]
        if (ay > y) != (by > y):
            # x < x-intersection of the edge with the horizontal through y
            lhs = (bx - ax) * (y - ay) - (x - ax) * (by - ay)
            if by > ay:
                if lhs > 0:
                    inside = not inside
            else:
                if lhs < 0:
                    inside = not inside
    return inside


# --- the counting theorem -------------------------------------------------

def _line_tables(spectrum) -> dict:
    lines: dict[int, list] = {}
    for p in spectrum.points:
        lines.setdefault(p.n, []).append(p)
    for n in lines:
        lines[n].sort(key=lambda q: q.E1)
    return lines


def _enumerate_line_labels(line_pts, charts) -> tuple[np.ndarray, np.ndarray]:
    """Chain-frame labels for every point of one lattice line.

    Points covered by a chart get their labels directly; the rest are
    filled in by the consecutive-integer structure of the line (labels
    are affine in the x-order index).  All covered points must agree with
    that affine enumeration exactly; a mismatch means the chart chain is
    inconsistent with the line enumeration and raises ChartError.
    """
    pts = np.array([[p.E1, p.E2] for p in line_pts], dtype=float)
    covered: dict[int, np.ndarray] = {}
    masks = [ch.contains(pts) for ch in charts]
    for i in range(len(pts)):
        for ch, mask in zip(charts, masks):
            if mask[i]:
                covered[i] = ch.labels(pts[i])[0]
                break
    if len(covered) < 2:
        raise ChartError("line has fewer than 2 chart-covered points")
    idx = sorted(covered)
    step = None
    for a, b in zip(idx[:-1], idx[1:]):
        if b == a + 1:
            step = covered[b] - covered[a]
            base_i, base = a, covered[a]
            break
    if step is None:
        raise ChartError("no adjacent chart-covered pair on the line")
    for i in idx:
        expect = base + (i - base_i) * step
        if not np.array_equal(covered[i], expect):
            raise ChartError(
                f"line enumeration inconsistent at index {i}: chart label "
                f"{covered[i].tolist()} vs affine {expect.tolist()}")
    i_all = np.arange(len(pts))
    labels = base[None, :] + (i_all - base_i)[:, None] * step[None, :]
    return labels, pts


def _count_lines(spectrum, charts, poly_vertices, n_values) -> int:
    lines = _line_tables(spectrum)
    poly = [tuple(map(int, v)) for v in poly_vertices]
    total = 0
    for n in n_values:
        if n not in lines:
            continue
        labels, _ = _enumerate_line_labels(lines[n], charts)
        for lab in labels:
            if lattice_point_in_polygon(lab, poly):
                total += 1
    return total


def count_in_polygon(spectrum, polygon: SpectrumPolygon,
                     chart_radius: float | None = None) -> tuple[int, int]:
    """Verify the counting identity on one spectrum polygon.

    Returns (N_spec, N_pick): N_spec counts the joint eigenvalues whose
    unwound labels land inside or on the unwound polygon (per-line affine
    enumeration anchored in the boundary charts; enclosing loops are split
    into the upper and lower half-planes glued along the n = 0 line), and
    N_pick applies Pick's formula to the unwound vertices.  The theorem
    asserts they are equal.
    """
    verts = polygon.vertex_points()
    wind = winding_around_origin(verts)
    h = polygon.vertices[0].h
    res = unwind(polygon, spectrum, h, chart_radius=chart_radius)

    if wind == 0:
        n_vals = range(min(v.n for v in polygon.vertices),
                       max(v.n for v in polygon.vertices) + 1)
        n_spec = _count_lines(spectrum, res.charts, res.vertices[:-1], n_vals)
        n_pick = pick_count(res.vertices[:-1])
        return n_spec, n_pick

    if not (polygon.starts_on_L0 and polygon.vertices[0].n == 0):
        raise DomainError(
            "an enclosing polygon must start on the n = 0 line")
    if not res.closed:
        raise ChartError("enclosing loop anchored on the n = 0 line did "
                         "not unwind to a closed polygon")
    zero_idx = [j for j, v in enumerate(polygon.vertices) if v.n == 0]
    if len(zero_idx) != 2:
        raise DomainError(
            f"enclosing polygon must have exactly 2 vertices on n = 0, "
            f"found {len(zero_idx)}")
    ia = zero_idx[1]
    ell = len(polygon.vertices)
    upper_is_first = all(v.n >= 0 for v in polygon.vertices[:ia + 1])
    if upper_is_first and not all(v.n <= 0 for v in polygon.vertices[ia:]):
        raise DomainError("polygon arcs must separate at the n = 0 line")
    if not upper_is_first:
        if not (all(v.n <= 0 for v in polygon.vertices[:ia + 1])
                and all(v.n >= 0 for v in polygon.vertices[ia:])):
            raise DomainError("polygon arcs must separate at the n = 0 line")

    first_arc = res.vertices[:ia + 1]          # vertices 0..ia
    first_charts = res.charts[:ia + 1]
    second_arc = res.vertices[ia:]             # vertices ia..l (= vertex 0)
    second_charts = res.charts[ia:]
    n_top = max(abs(v.n) for v in polygon.vertices)
    if upper_is_first:
        up_arc, up_charts = first_arc, first_charts
        lo_arc, lo_charts = second_arc, second_charts
    else:
        up_arc, up_charts = second_arc, second_charts
        lo_arc, lo_charts = first_arc, first_charts
    # upper polytope counts lines n >= 0 (the closing n=0 chord is part of
    # its boundary); the lower polytope counts strictly negative lines.
    n_spec = _count_lines(spectrum, up_charts, up_arc, range(0, n_top + 1))
    n_spec += _count_lines(spectrum, lo_charts, lo_arc, range(-n_top, 0))
    n_pick = pick_count(res.vertices[:-1])
    return n_spec, n_pick


# --- polygon construction -------------------------------------------------

def _snap(lines: dict, n: int, tx: float):
    pts = lines.get(n)
    if not pts:
        raise DomainError(f"no eigenvalues on line n={n}")
    xs = np.array([p.x for p in pts])
    return pts[int(np.argmin(np.abs(xs - tx)))]


def make_loop_polygon(spectrum, radius_x: float, n_top: int | None = None,
                      seed: int = 0, center=(0.0, 0.0),
                      enclosing: bool = True) -> SpectrumPolygon:
    """Polygon through spectrum points with one vertex per line per side.

    Follows an ellipse of half-width radius_x (zoomed x units) and half-
    height n_top lines around `center` = (x, n), snapping each lattice
    line to its eigenvalue nearest the targeted x; every crossed line gets
    exactly one vertex on each side, so the polygon meets each line in a
    segment with vertex extremities.  Enclosing loops start on the n = 0
    line at x > 0 and contain exactly two n = 0 vertices.  The radial
    jitter is seeded for reproducibility.
    """
    rng = np.random.default_rng(seed)
    lines = _line_tables(spectrum)
    cx, cn = float(center[0]), float(center[1])
    if n_top is None:
        n_top = max(1, int(round(0.75 * radius_x)))

    def half_width(dn: float) -> float:
        w = radius_x * math.sqrt(max(0.0, 1.0 - (dn / (n_top + 0.5)) ** 2))
        return w * (1.0 + 0.1 * (rng.random() - 0.5))

    chosen = []
    if enclosing:
        n0 = int(round(cn))
        for n in range(n0, n0 + n_top + 1):          # right side, upward
            chosen.append(_snap(lines, n, cx + half_width(n - cn)))
        for n in range(n0 + n_top, n0 - n_top - 1, -1):   # left side, down
            chosen.append(_snap(lines, n, cx - half_width(n - cn)))
        for n in range(n0 - n_top, n0, 1):            # right side, back up
            chosen.append(_snap(lines, n, cx + half_width(n - cn)))
    else:
        n0 = int(round(cn))
        for n in range(n0 - n_top, n0 + n_top + 1):
            chosen.append(_snap(lines, n, cx + half_width(n - cn)))
        for n in range(n0 + n_top, n0 - n_top - 1, -1):
            chosen.append(_snap(lines, n, cx - half_width(n - cn)))

    dedup = []
    for p in chosen:
        if dedup and p is dedup[-1]:
            continue
        dedup.append(p)
    while len(dedup) > 1 and dedup[0] is dedup[-1]:
        dedup.pop()
    if enclosing:
        zero_count = sum(1 for p in dedup if p.n == int(round(cn)))
        if zero_count != 2:
            raise DomainError(
                f"loop construction produced {zero_count} anchor-line "
                "vertices; adjust radius")
    if len(dedup) < 3:
        raise DomainError("loop construction found too few vertices")
    return SpectrumPolygon(vertices=dedup,
                           starts_on_L0=enclosing and dedup[0].n == 0)
