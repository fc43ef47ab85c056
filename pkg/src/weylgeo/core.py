"""Points, metric and gauge fields, gauge transformations, and jets.

Index conventions follow the 2n-valued scheme: a rank-k object over the
n-dimensional complex chart carries indices ``0..n-1`` (holomorphic) and
``n..2n-1`` (antiholomorphic). Hybrid and self-conjugate constraints are
enforced structurally: a metric stores only its mixed block ``g[mu, nu]``
(= g_{mu nubar}) and a gauge field only its holomorphic components, the
barred partners being recovered by conjugation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from . import autodiff as ad
from .autodiff import conj_, d_anti, d_holo, d_second, exp_, log_, polar_conj, tmap, value
from .errors import (
    DomainError,
    NonFiniteError,
    ToleranceError,
)

Polarized = Callable[[Sequence, Sequence], object]


@dataclass(frozen=True)
class ComplexPoint:
    """A point of the working chart, given by n complex coordinates."""

    coords: tuple
    chart_id: int = 0

    def __post_init__(self):
        coords = tuple(complex(c) for c in self.coords)
        if len(coords) < 1:
            raise DomainError("a point needs at least one coordinate")
        for c in coords:
            if not (np.isfinite(c.real) and np.isfinite(c.imag)):
                raise NonFiniteError("point coordinates must be finite")
        object.__setattr__(self, "coords", coords)

    @property
    def dim(self) -> int:
        return len(self.coords)

    def as_array(self) -> np.ndarray:
        return np.array(self.coords, dtype=complex)

    def polarized(self):
        """Coordinate lists ``(z, zb)`` on the real slice."""
        z = list(self.coords)
        return z, [c.conjugate() for c in z]


def point(*coords, chart_id: int = 0) -> ComplexPoint:
    """Convenience constructor: ``point(1, 0.5j)`` etc."""
    return ComplexPoint(tuple(coords), chart_id)


@dataclass
class JetValue:
    """A field value with its first (and optionally mixed second) derivatives.

    ``d_holo[l]`` holds d/dz^l of every entry, ``d_anti[l]`` the
    antiholomorphic partner, and ``second[m, n]`` the mixed block
    d_m d_nbar when second order was requested.
    """

    value: np.ndarray
    d_holo: np.ndarray
    d_anti: np.ndarray
    second: Optional[np.ndarray] = None


def _as_complex_array(obj) -> np.ndarray:
    arr = np.array(tmap(value, obj), dtype=complex)
    if not np.all(np.isfinite(arr)):
        raise NonFiniteError("evaluator produced a non-finite value")
    return arr


class MetricField:
    """A Hermitian metric family ``g_{mu nubar}`` with a polarized evaluator.

    Parameters
    ----------
    dim : complex dimension n of the chart.
    family : one of ``flat``, ``fubini_study``, ``potential_derived``,
        ``table_driven`` (or ``derived`` for gauge-transformed fields).
    polarized : evaluator ``(z, zb) -> n x n`` nested list, holomorphic in
        each slot. ``None`` only for table-driven families.
    """

    def __init__(self, dim: int, family: str, polarized: Optional[Polarized],
                 params: Optional[dict] = None, chart_id: int = 0,
                 jet_capable: bool = True):
        self.dim = int(dim)
        self.family = family
        self.params = dict(params or {})
        self.chart_id = chart_id
        self.jet_capable = jet_capable
        self._polarized = polarized

    # -- constructors ---------------------------------------------------

    @staticmethod
    def flat(dim: int) -> "MetricField":
        def g(z, zb):
            return [[1.0 + 0j if i == j else 0j for j in range(dim)]
                    for i in range(dim)]

        return MetricField(dim, "flat", g)

    @staticmethod
    def fubini_study(dim: int) -> "MetricField":
        r"""Metric of the projective potential ``(1/2) ln(1 + \sum |w|^2)``.

        Closed form: g_{mu nubar} = [delta (1+S) - zb_mu z_nu] / (2 (1+S)^2)
        with S = sum_k z_k zb_k.
        """

        def g(z, zb):
            s = 0j
            for k in range(dim):
                s = s + z[k] * zb[k]
            q = 1.0 + s
            den = 2.0 * q * q
            return [[((q if i == j else 0j) - zb[i] * z[j]) / den
                     for j in range(dim)] for i in range(dim)]

        return MetricField(dim, "fubini_study", g)

    @staticmethod
    def from_potential(dim: int, potential: Polarized,
                       name: str = "potential_derived") -> "MetricField":
        """Metric ``g = d dbar K`` of a polarized real potential."""

        def g(z, zb):
            return [[d_second(potential, z, zb, i, dim + j, dim)
                     for j in range(dim)] for i in range(dim)]

        return MetricField(dim, "potential_derived", g, params={"name": name})

    @staticmethod
    def quartic(dim: int) -> "MetricField":
        """Potential-derived family with K = (1/2) sum (z zb)^2."""

        def K(z, zb):
            s = 0j
            for k in range(dim):
                s = s + (z[k] * zb[k]) ** 2
            return 0.5 * s

        m = MetricField.from_potential(dim, K, name="quartic")
        return m

    @staticmethod
    def table(dim: int, points: Sequence[Sequence[complex]],
              matrices: Sequence) -> "MetricField":
        """Sampled metric, nearest-neighbour lookup. Plotting only."""
        pts = [np.array([complex(c) for c in p]) for p in points]
        mats = [np.array(m, dtype=complex) for m in matrices]
        if len(pts) != len(mats) or not pts:
            raise DomainError("table metric needs matching, nonempty samples")

        m = MetricField(dim, "table_driven", None, jet_capable=False)
        m._table = (pts, mats)
        return m

    # -- evaluation -------------------------------------------------------

    def __call__(self, p: ComplexPoint) -> np.ndarray:
        if p.dim != self.dim:
            raise DomainError(f"point dimension {p.dim} != metric dimension {self.dim}")
        if p.chart_id != self.chart_id:
            raise DomainError(
                f"point lives on chart {p.chart_id}, evaluator is for chart {self.chart_id}")
        if self._polarized is None:
            pts, mats = self._table
            z = p.as_array()
            k = int(np.argmin([np.abs(z - q).max() for q in pts]))
            return mats[k].copy()
        z, zb = p.polarized()
        return _as_complex_array(self._polarized(z, zb))


class GaugeField:
    """A self-conjugate one-form, stored through its holomorphic components."""

    def __init__(self, dim: int, family: str, polarized: Optional[Polarized],
                 params: Optional[dict] = None, jet_capable: bool = True):
        self.dim = int(dim)
        self.family = family
        self.params = dict(params or {})
        self.jet_capable = jet_capable
        self._polarized = polarized
        self._polarized_bar = polar_conj(polarized) if polarized is not None else None

    @staticmethod
    def zero(dim: int) -> "GaugeField":
        def a(z, zb):
            return [0j] * dim

        return GaugeField(dim, "zero", a)

    @staticmethod
    def exact_linear(coeffs: Sequence[complex]) -> "GaugeField":
        """Constant components A_mu = c_mu (gradient of a real-linear potential)."""
        cs = [complex(c) for c in coeffs]

        def a(z, zb):
            return list(cs)

        return GaugeField(len(cs), "exact", a, params={"kind": "linear", "coeffs": cs})

    @staticmethod
    def exact_log_smooth(dim: int, alpha: float) -> "GaugeField":
        """Gradient of ``(alpha/2) ln(1 + sum |z|^2)``: a smooth exact field."""
        al = float(alpha)

        def a(z, zb):
            s = 0j
            for k in range(dim):
                s = s + z[k] * zb[k]
            return [al * zb[k] / (2.0 * (1.0 + s)) for k in range(dim)]

        return GaugeField(dim, "exact", a, params={"kind": "log_smooth", "alpha": al})

    @staticmethod
    def angular(dim: int, c: float, axis: int = 0) -> "GaugeField":
        """Vortex field ``c dtheta`` around the origin of one coordinate axis.

        Holomorphic component ``A_axis = -i c / (2 z_axis)``; closed away from
        the puncture but not exact when loops encircle it.
        """
        cc = float(c)
        if not 0 <= axis < dim:
            raise DomainError("angular gauge axis out of range")

        def a(z, zb):
            out = [0j] * dim
            out[axis] = -1j * cc / (2.0 * z[axis])
            return out

        return GaugeField(dim, "angular", a, params={"c": cc, "axis": axis})

    @staticmethod
    def from_potential(dim: int, potential: Polarized) -> "GaugeField":
        """A = d f for a polarized real potential f."""

        def a(z, zb):
            return [d_holo(potential, z, zb, mu) for mu in range(dim)]

        return GaugeField(dim, "exact", a, params={"kind": "potential"})

    def components(self, p: ComplexPoint) -> np.ndarray:
        if p.dim != self.dim:
            raise DomainError(f"point dimension {p.dim} != gauge dimension {self.dim}")
        z, zb = p.polarized()
        if self.family == "angular":
            axis = self.params["axis"]
            if abs(z[axis]) < 1e-12:
                raise NonFiniteError("angular gauge field evaluated at its puncture")
        return _as_complex_array(self._polarized(z, zb))

    def components_bar(self, p: ComplexPoint) -> np.ndarray:
        """Barred components; equal to conj(components) by self-conjugacy."""
        return np.conj(self.components(p))


class GaugeTransformation:
    """A strictly positive rescaling ``lambda`` with its log-gradient."""

    def __init__(self, polarized: Polarized, params: Optional[dict] = None,
                 label: str = "custom"):
        self._polarized = polarized
        self.params = dict(params or {})
        self.label = label

    @staticmethod
    def constant(c: float) -> "GaugeTransformation":
        cc = float(c)
        if cc <= 0:
            raise DomainError("gauge scale must be strictly positive")

        def lam(z, zb):
            return cc + 0j

        return GaugeTransformation(lam, {"c": cc}, label=f"const_{cc}")

    @staticmethod
    def exp_re(coeffs: Sequence[float]) -> "GaugeTransformation":
        """``lambda = exp(sum_k a_k Re z_k)``."""
        cs = [float(c) for c in coeffs]

        def lam(z, zb):
            s = 0j
            for k, a in enumerate(cs):
                s = s + 0.5 * a * (z[k] + zb[k])
            return exp_(s)

        return GaugeTransformation(lam, {"coeffs": cs}, label="exp_re")

    @staticmethod
    def smooth_quadratic(dim: int, scale: float = 0.5) -> "GaugeTransformation":
        """``lambda = 1 + scale * sum |z|^2``, smooth and bounded below by 1."""
        sc = float(scale)

        def lam(z, zb):
            s = 0j
            for k in range(dim):
                s = s + z[k] * zb[k]
            return 1.0 + sc * s

        return GaugeTransformation(lam, {"scale": sc}, label="smooth_quadratic")

    def __call__(self, p: ComplexPoint) -> float:
        z, zb = p.polarized()
        v = value(self._polarized(z, zb))
        if abs(v.imag) > 1e-10 * max(1.0, abs(v.real)):
            raise DomainError("gauge scalar is not real on the real slice")
        if v.real <= 0:
            raise DomainError("gauge scalar must be strictly positive")
        return v.real

    def log_gradient(self, p: ComplexPoint) -> np.ndarray:
        """Holomorphic components of d ln(lambda)."""
        z, zb = p.polarized()
        lam = self._polarized(z, zb)
        n = p.dim
        return np.array(
            [value(d_holo(self._polarized, z, zb, mu)) / value(lam) for mu in range(n)],
            dtype=complex,
        )


@dataclass
class ManifoldSpec:
    """The central input object: a metric family paired with a gauge field."""

    metric: MetricField
    gauge: GaugeField
    label: str = ""

    def __post_init__(self):
        if self.metric.dim != self.gauge.dim:
            raise DomainError(
                f"metric dimension {self.metric.dim} != gauge dimension {self.gauge.dim}")

    @property
    def dim(self) -> int:
        return self.metric.dim


# -- operations ---------------------------------------------------------


def evaluate_metric(spec: ManifoldSpec, p: ComplexPoint) -> np.ndarray:
    """Metric matrix ``g_{mu nubar}`` at ``p``, checked Hermitian positive."""
    g = spec.metric(p)
    herm = np.abs(g - g.conj().T).max()
    if herm > 1e-10 * max(1.0, np.abs(g).max()):
        raise ToleranceError(f"metric not Hermitian at {p.coords}: residual {herm:g}")
    if np.linalg.eigvalsh(g).min() <= 0:
        raise DomainError(f"metric not positive-definite at {p.coords}")
    return g


def metric_jet(spec: ManifoldSpec, p: ComplexPoint, order: int = 1,
               cross_check: bool = False, check_rtol: float = 1e-6) -> JetValue:
    """First (and optionally mixed second) derivatives of the metric.

    Derivatives come from exact forward-mode duals. With ``cross_check``
    they are compared against five-point central differences; disagreement
    beyond ``check_rtol`` (relative to the jet scale) raises
    ``ToleranceError``.
    """
    if order not in (1, 2):
        raise DomainError("jet order must be 1 or 2")
    if not spec.metric.jet_capable:
        raise DomainError(f"{spec.metric.family} metric is not differentiable")
    n = spec.dim
    if p.dim != n:
        raise DomainError("point dimension mismatch")
    z, zb = p.polarized()
    f = spec.metric._polarized
    val = _as_complex_array(f(z, zb))
    dh = np.array([tmap(value, d_holo(f, z, zb, mu)) for mu in range(n)], dtype=complex)
    da = np.array([tmap(value, d_anti(f, z, zb, mu)) for mu in range(n)], dtype=complex)
    second = None
    if order == 2:
        second = np.array(
            [[tmap(value, d_second(f, z, zb, mu, n + nu, n)) for nu in range(n)]
             for mu in range(n)],
            dtype=complex,
        )
    jet = JetValue(val, dh, da, second)
    if not (np.all(np.isfinite(dh)) and np.all(np.isfinite(da))):
        raise NonFiniteError("metric jet is not finite")
    if cross_check:
        _cross_check_jet(spec, p, jet, check_rtol)
    return jet


def _cross_check_jet(spec: ManifoldSpec, p: ComplexPoint, jet: JetValue,
                     rtol: float):
    coords = list(p.coords)

    def point_eval(cs):
        return spec.metric(ComplexPoint(tuple(cs), p.chart_id))

    scale = max(1.0, np.abs(jet.value).max(), np.abs(jet.d_holo).max())
    for mu in range(spec.dim):
        fd_h = ad.fd_wirtinger(point_eval, coords, mu, h=1e-5)
        fd_a = ad.fd_wirtinger(point_eval, coords, mu, h=1e-5, anti=True)
        err = max(np.abs(fd_h - jet.d_holo[mu]).max(), np.abs(fd_a - jet.d_anti[mu]).max())
        if err > rtol * scale:
            raise ToleranceError(
                f"jet/finite-difference mismatch {err:g} in direction {mu}")
    if jet.second is not None:
        for mu in range(spec.dim):
            for nu in range(spec.dim):
                fd2 = ad.fd_wirtinger_mixed(point_eval, coords, mu, nu, h=1e-4)
                err = np.abs(fd2 - jet.second[mu, nu]).max()
                if err > 10 * rtol * max(scale, np.abs(jet.second).max()):
                    raise ToleranceError(
                        f"second-jet mismatch {err:g} at ({mu},{nu})")


def apply_gauge(spec: ManifoldSpec, t: GaugeTransformation) -> ManifoldSpec:
    """Rescaled pair: metric ``lambda^2 g``, gauge ``A + d ln(lambda)``.

    The input spec is untouched; the returned evaluators close over it.
    """
    n = spec.dim
    gpol = spec.metric._polarized
    apol = spec.gauge._polarized
    lam = t._polarized
    if gpol is None or apol is None:
        raise DomainError("table-driven fields cannot be gauge transformed")

    def new_g(z, zb):
        s = lam(z, zb)
        s2 = s * s
        base = gpol(z, zb)
        return [[s2 * base[i][j] for j in range(n)] for i in range(n)]

    def new_a(z, zb):
        base = apol(z, zb)
        lv = lam(z, zb)
        return [base[mu] + d_holo(lam, z, zb, mu) / lv for mu in range(n)]

    metric = MetricField(n, "derived", new_g,
                         params={"base": spec.metric.family, "gauge": t.label},
                         chart_id=spec.metric.chart_id,
                         jet_capable=spec.metric.jet_capable)
    gauge = GaugeField(n, "derived", new_a,
                       params={"base": spec.gauge.family, "gauge": t.label},
                       jet_capable=spec.gauge.jet_capable)
    label = f"{spec.label}*{t.label}" if spec.label else t.label
    return ManifoldSpec(metric, gauge, label=label)


def cotensor_rescale(tensor, power: int, lambda_value: float):
    """Entrywise ``lambda^power * T`` for a co-tensor of the given power."""
    lam = float(lambda_value)
    if lam <= 0:
        raise DomainError("rescaling factor must be strictly positive")
    return np.asarray(tensor) * lam ** power


def complex_structure(dim: int) -> np.ndarray:
    """The constant mixed structure tensor: +i on holomorphic,
    -i on antiholomorphic indices. Squares to minus the identity."""
    if dim < 1:
        raise DomainError("dimension must be at least 1")
    return np.diag([1j] * dim + [-1j] * dim)


def lower_structure(spec: ManifoldSpec, p: ComplexPoint) -> np.ndarray:
    """Skew form ``F_i^k g_{kj}`` as a 2n x 2n array over Yano indices.

    Scales with power 2 under ``apply_gauge``, like the metric.
    """
    n = spec.dim
    g = evaluate_metric(spec, p)
    out = np.zeros((2 * n, 2 * n), dtype=complex)
    out[:n, n:] = 1j * g
    out[n:, :n] = -1j * g.T
    return out
