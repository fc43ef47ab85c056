"""Hermitian connections, their gauge-corrected form, and curvature.

The base connection is the Levi-Civita connection of the underlying real
metric written in complex coordinates; for a hybrid metric its only
independent blocks are

    pure  : G^chi_{mu la}    = (1/2) g^{chi nubar} (d_mu g_{la nubar} + d_la g_{mu nubar})
    mixed : G^chi_{mu labar} = (1/2) g^{chi nubar} (d_labar g_{mu nubar} - d_nubar g_{mu labar})

The gauge-corrected coefficients subtract the length-connection terms

    pure  -= delta^chi_la A_mu + delta^chi_mu A_la
    mixed -= g^{chi nubar} (g_{mu nubar} A_labar - g_{mu labar} A_nubar)

and are exactly invariant under ``apply_gauge`` -- the central validated
property of this module. A ``chern`` convention (unsymmetrized pure block,
vanishing mixed block) is kept behind a flag for comparison.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .autodiff import d_dir, generic_inverse, tmap, transpose, value
from .core import ComplexPoint, ManifoldSpec
from .errors import DomainError, NonFiniteError, ToleranceError

CONVENTIONS = ("levi_civita", "chern")


@dataclass
class ConnectionCoefficients:
    """Connection blocks at a point.

    ``pure[c, m, l]`` is the coefficient with all indices holomorphic,
    symmetric in ``(m, l)``; ``mixed[c, m, l]`` carries an antiholomorphic
    last index. Barred-upper blocks follow by entrywise conjugation.
    """

    pure: np.ndarray
    mixed: np.ndarray
    point: ComplexPoint
    gauged: bool

    @property
    def dim(self) -> int:
        return self.pure.shape[0]


@dataclass
class CurvatureTensors:
    """Riemann components of the corrected connection, with contractions.

    ``riemann[c, m, k, l]`` has holomorphic bundle indices ``c, m`` and
    2n-valued derivative indices ``k, l`` (antisymmetric pair); conjugate
    blocks follow by self-conjugacy and are not stored.
    """

    riemann: np.ndarray
    ricci: np.ndarray
    scalar: float
    point: ComplexPoint


class ScalarField:
    """A scalar field with a declared rescaling weight.

    ``power`` is the exponent the value picks up under ``apply_gauge``;
    the curvature scalar carries power -2.
    """

    def __init__(self, point_fn: Callable[[ComplexPoint], float],
                 polarized: Callable, power: int, label: str = ""):
        self.point_fn = point_fn
        self.polarized = polarized
        self.power = power
        self.label = label

    def __call__(self, p: ComplexPoint) -> float:
        return self.point_fn(p)

    @staticmethod
    def constant(c: float, power: int = 0) -> "ScalarField":
        cc = complex(c)

        def pol(z, zb):
            return cc

        return ScalarField(lambda p: cc.real, pol, power, label=f"const_{c}")


def _require_jets(spec: ManifoldSpec):
    if not spec.metric.jet_capable or not spec.gauge.jet_capable:
        raise DomainError("connection requires differentiable (non-table) fields")


def _gamma_blocks(spec: ManifoldSpec, z, zb, gauged: bool, convention: str):
    """Connection blocks as nested lists of generic scalars (dual-safe)."""
    n = spec.dim
    gpol = spec.metric._polarized
    g = gpol(z, zb)
    dg = [d_dir(gpol, z, zb, l, n) for l in range(n)]
    dga = [d_dir(gpol, z, zb, n + l, n) for l in range(n)]
    ginv = generic_inverse(transpose(g), n)  # ginv[c][nu] = g^{c nubar}

    pure = [[[0j for _ in range(n)] for _ in range(n)] for _ in range(n)]
    mixed = [[[0j for _ in range(n)] for _ in range(n)] for _ in range(n)]
    for c in range(n):
        for m in range(n):
            for l in range(n):
                acc_p = 0j
                acc_m = 0j
                for nu in range(n):
                    if convention == "levi_civita":
                        acc_p = acc_p + ginv[c][nu] * (dg[m][l][nu] + dg[l][m][nu])
                        acc_m = acc_m + ginv[c][nu] * (dga[l][m][nu] - dga[nu][m][l])
                    else:  # chern
                        acc_p = acc_p + 2.0 * ginv[c][nu] * dg[m][l][nu]
                pure[c][m][l] = 0.5 * acc_p
                mixed[c][m][l] = 0.5 * acc_m

    if gauged:
        a = spec.gauge._polarized(z, zb)
        abar = spec.gauge._polarized_bar(z, zb)
        hab = [sum_generic(ginv[c][nu] * abar[nu] for nu in range(n)) for c in range(n)]
        for c in range(n):
            for m in range(n):
                for l in range(n):
                    corr = 0j
                    if c == l:
                        corr = corr + a[m]
                    if c == m:
                        corr = corr + a[l]
                    pure[c][m][l] = pure[c][m][l] - corr
                    mcorr = (abar[l] if c == m else 0j) - g[m][l] * hab[c]
                    mixed[c][m][l] = mixed[c][m][l] - mcorr
    return pure, mixed


def sum_generic(terms):
    acc = 0j
    for t in terms:
        acc = acc + t
    return acc


def _blocks_at(spec: ManifoldSpec, p: ComplexPoint, gauged: bool, convention: str):
    if convention not in CONVENTIONS:
        raise DomainError(f"unknown connection convention {convention!r}")
    _require_jets(spec)
    if p.dim != spec.dim:
        raise DomainError("point dimension mismatch")
    z, zb = p.polarized()
    pure, mixed = _gamma_blocks(spec, z, zb, gauged, convention)
    pure_arr = np.array(tmap(value, pure), dtype=complex)
    mixed_arr = np.array(tmap(value, mixed), dtype=complex)
    if not (np.all(np.isfinite(pure_arr)) and np.all(np.isfinite(mixed_arr))):
        raise NonFiniteError("connection coefficients are not finite")
    return ConnectionCoefficients(pure_arr, mixed_arr, p, gauged)


def base_christoffel(spec: ManifoldSpec, p: ComplexPoint,
                     convention: str = "levi_civita") -> ConnectionCoefficients:
    """Metric connection blocks at ``p`` (no gauge correction)."""
    return _blocks_at(spec, p, gauged=False, convention=convention)


def weyl_christoffel(spec: ManifoldSpec, p: ComplexPoint,
                     convention: str = "levi_civita") -> ConnectionCoefficients:
    """Gauge-corrected connection blocks; invariant under ``apply_gauge``."""
    return _blocks_at(spec, p, gauged=True, convention=convention)


def _full_symmetrized(coeffs: ConnectionCoefficients) -> np.ndarray:
    """All 2n x 2n x 2n components, conjugate blocks filled, lower indices
    symmetrized (torsion-free placement of the mixed block)."""
    n = coeffs.dim
    full = np.zeros((2 * n, 2 * n, 2 * n), dtype=complex)
    full[:n, :n, :n] = coeffs.pure
    full[:n, :n, n:] = coeffs.mixed
    full[:n, n:, :n] = coeffs.mixed.transpose(0, 2, 1)
    full[n:, n:, n:] = np.conj(coeffs.pure)
    full[n:, n:, :n] = np.conj(coeffs.mixed)
    full[n:, :n, n:] = np.conj(coeffs.mixed.transpose(0, 2, 1))
    return full


_F_EIGS = None


def _structure_eigs(n: int) -> np.ndarray:
    return np.array([1j] * n + [-1j] * n)


def covariant_derivative_structure(spec: ManifoldSpec, p: ComplexPoint,
                                   convention: str = "levi_civita") -> np.ndarray:
    """Covariant derivative of the mixed structure tensor.

    Returns ``out[k, i, j]``; the tensor is constant, so only the
    connection commutator survives and the result vanishes exactly when
    the mixed corrected block does.
    """
    coeffs = weyl_christoffel(spec, p, convention)
    n = coeffs.dim
    full = _full_symmetrized(coeffs)
    f = _structure_eigs(n)
    out = np.zeros((2 * n, 2 * n, 2 * n), dtype=complex)
    for i in range(2 * n):
        for j in range(2 * n):
            w = f[j] - f[i]
            if w != 0:
                out[:, i, j] = w * full[i, j, :]
    return out


def covariant_derivative_fundamental(spec: ManifoldSpec, p: ComplexPoint,
                                     convention: str = "levi_civita") -> np.ndarray:
    """Covariant derivative of the lowered skew form ``F_i^k g_{kj}``.

    Unlike the mixed-tensor derivative this sees the length non-metricity:
    with a flat metric and nonzero gauge field it equals ``2 A_k F_{ij}``.
    Returns ``out[k, i, j]``.
    """
    _require_jets(spec)
    n = spec.dim
    z, zb = p.polarized()
    gpol = spec.metric._polarized

    def flow(z2, zb2):
        g = gpol(z2, zb2)
        top = [[1j * g[i][j] for j in range(n)] for i in range(n)]
        bot = [[-1j * g[j][i] for j in range(n)] for i in range(n)]
        return [[0j] * n + top[i] for i in range(n)] + \
               [bot[i] + [0j] * n for i in range(n)]

    f0 = np.array(tmap(value, flow(z, zb)), dtype=complex)
    coeffs = weyl_christoffel(spec, p, convention)
    full = _full_symmetrized(coeffs)
    out = np.zeros((2 * n, 2 * n, 2 * n), dtype=complex)
    for k in range(2 * n):
        df = np.array(tmap(value, d_dir(flow, z, zb, k, n)), dtype=complex)
        out[k] = df - np.einsum("mi,mj->ij", full[:, :, k], f0) \
                    - np.einsum("mj,im->ij", full[:, :, k], f0)
    return out


def _curvature_parts(spec: ManifoldSpec, z, zb, convention: str):
    """Riemann/Ricci/scalar as generic nested structures (dual-safe)."""
    n = spec.dim

    def gam_full(z2, zb2):
        pure, mixed = _gamma_blocks(spec, z2, zb2, True, convention)
        return [[pure[c][m] + mixed[c][m] for m in range(n)] for c in range(n)]

    g0 = gam_full(z, zb)
    dgam = [d_dir(gam_full, z, zb, k, n) for k in range(2 * n)]

    riem = [[[[0j for _ in range(2 * n)] for _ in range(2 * n)]
             for _ in range(n)] for _ in range(n)]
    for c in range(n):
        for m in range(n):
            for k in range(2 * n):
                for l in range(k + 1, 2 * n):
                    acc = dgam[k][c][m][l] - dgam[l][c][m][k]
                    for s in range(n):
                        acc = acc + g0[c][s][k] * g0[s][m][l] \
                                  - g0[c][s][l] * g0[s][m][k]
                    riem[c][m][k][l] = acc
                    riem[c][m][l][k] = -acc

    ricci = [[sum_generic(riem[c][m][c][n + nu] for c in range(n))
              for nu in range(n)] for m in range(n)]
    ginv = generic_inverse(transpose(spec.metric._polarized(z, zb)), n)
    scalar = sum_generic(ginv[m][nu] * ricci[m][nu]
                         for m in range(n) for nu in range(n))
    return riem, ricci, scalar


def curvature(spec: ManifoldSpec, p: ComplexPoint,
              convention: str = "levi_civita") -> CurvatureTensors:
    """Riemann, Ricci and scalar curvature of the corrected connection."""
    if convention not in CONVENTIONS:
        raise DomainError(f"unknown connection convention {convention!r}")
    _require_jets(spec)
    z, zb = p.polarized()
    riem, ricci, scalar = _curvature_parts(spec, z, zb, convention)
    riem_arr = np.array(tmap(value, riem), dtype=complex)
    ricci_arr = np.array(tmap(value, ricci), dtype=complex)
    s = value(scalar)
    if not np.all(np.isfinite(riem_arr)):
        raise NonFiniteError("curvature is not finite")
    if abs(s.imag) > 1e-6 * max(1.0, abs(s.real)):
        raise ToleranceError(f"scalar curvature has imaginary residue {s.imag:g}")
    return CurvatureTensors(riem_arr, ricci_arr, s.real, p)


def scalar_curvature_field(spec: ManifoldSpec,
                           convention: str = "levi_civita") -> ScalarField:
    """The curvature scalar as a reusable field of rescaling power -2."""

    def point_fn(p: ComplexPoint) -> float:
        return curvature(spec, p, convention).scalar

    def polarized(z, zb):
        return _curvature_parts(spec, z, zb, convention)[2]

    return ScalarField(point_fn, polarized, power=-2, label="scalar_curvature")
