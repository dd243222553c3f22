"""Closed-form Landau kernels and the compact-support resolvent application.

The Landau Hamiltonian (P - (B/2) x_perp)^2 with uniform field B has heat
kernel

    q_B(x, y, t) = B / (4 pi sinh(Bt))
                   * exp( -(B/4) coth(Bt) |x-y|^2 - i (B/2) x^y )

(x^y = x1 y2 - x2 y1) and spectrum B(2N+1).  Its resolvent kernel is, for
spectral parameter z off the pole lattice,

    K_B(z; x, y) = (1/4pi) Gamma(A) U(A, 1, w)
                   * exp( -i (B/2) x^y - (B/4) |x-y|^2 ),

with A = 1/2 - z/(2B) and w = B |x-y|^2 / 2, where U is Tricomi's confluent
hypergeometric function evaluated through its Laplace-type integral
representation.  The product Gamma(A) * U(A,1,w) is always computed as the
raw (un-normalized) integral, which is positive for real arguments and free
of the overflow/cancellation of forming Gamma and U separately.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from importlib import resources

import numpy as np
import scipy.special as spec

from .grid_model import Field
from .mho_kernels import SignedLog

__all__ = [
    "landau_heat_kernel", "log_landau_heat_kernel",
    "tricomi_u", "gamma_tricomi_u", "landau_resolvent_kernel",
    "pole_distance", "apply_landau_resolvent", "offdiag_decay_rate",
    "DecayFit", "export_decay_fit", "resolvent_norm_envelope",
    "load_landau_constants",
    "PoleProximityError", "DomainError", "SupportError",
]


class PoleProximityError(ValueError):
    """Spectral parameter too close to the Landau pole lattice."""

    def __init__(self, distance, guard):
        super().__init__("spectral parameter within %g of the pole lattice "
                         "(guard %g)" % (distance, guard))
        self.distance = distance


class DomainError(ValueError):
    """Arguments outside the integral-representation domain."""


class SupportError(ValueError):
    """Input support touches the grid boundary."""


# ---------------------------------------------------------------------------
# heat kernel


def _wedge(x, y):
    return x[0] * y[1] - x[1] * y[0]


def log_landau_heat_kernel(B, x, y, t):
    """log of the Landau heat kernel; B may be 0 or complex, t > 0 scalar or
    array."""
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0):
        raise ValueError("t must be positive")
    B = complex(B)
    x = np.asarray(x, dtype=complex)
    y = np.asarray(y, dtype=complex)
    d2 = (x[0] - y[0]) ** 2 + (x[1] - y[1]) ** 2

    bt = B * t
    if abs(B) * np.max(t) < 1e-4:
        # series of Bt/sinh(Bt) and Bt*coth(Bt) about Bt = 0
        ratio = 1 - bt ** 2 / 6 + 7 * bt ** 4 / 360          # Bt/sinh(Bt)
        btcoth = 1 + bt ** 2 / 3 - bt ** 4 / 45              # Bt*coth(Bt)
        log_pref = np.log(ratio / (4 * np.pi * t))
        expo = -btcoth / (4 * t) * d2
    else:
        # log(B/sinh(Bt)) via the scaled form sinh(z) e^{-z} = (1-e^{-2z})/2
        # for Re z >= 0; for Re(Bt) < 0 use sinh(-z) = -sinh(z)
        btp = np.where(np.real(bt) >= 0, bt, -bt)
        sb = -np.expm1(-2 * btp) / 2                         # sinh(btp) e^{-btp}
        log_sinh = btp + np.log(sb + 0j)
        flip = np.where(np.real(bt) >= 0, 1.0, -1.0)
        log_pref = np.log(flip * B / (4 * np.pi)) - log_sinh
        coth = flip * (1 + np.exp(-2 * btp)) / (2 * sb)      # coth(bt)
        expo = -(B / 4) * coth * d2
    return log_pref + expo - 1j * (B / 2) * _wedge(x, y)


def landau_heat_kernel(B, x, y, t):
    """Landau heat kernel; returns a SignedLog carrier on overflow."""
    lq = log_landau_heat_kernel(B, x, y, t)
    if np.any(np.real(lq) > 700):
        return SignedLog(log_value=lq)
    out = np.exp(lq)
    return complex(out) if np.ndim(out) == 0 else out


# ---------------------------------------------------------------------------
# Tricomi U via the Laplace-type integral


def _ts_nodes(level):
    """Tanh-sinh nodes/weights for integrals over (0, 1)."""
    h = 0.5 ** level
    tau = np.arange(-3.6, 3.6 + h / 2, h)
    # t = (1 + tanh((pi/2) sinh tau))/2 in the cancellation-free sigmoid
    # form, so nodes near 0 keep full relative precision (needed for the
    # t^{a-1} endpoint singularity)
    e = np.pi * np.sinh(tau)
    t = 1.0 / (1.0 + np.exp(-e))
    one_minus_t = 1.0 / (1.0 + np.exp(e))
    dt = h * np.pi * np.cosh(tau) * t * one_minus_t
    keep = (t > 0) & (t < 1)
    return t[keep], dt[keep]


_GLX, _GLW = np.polynomial.legendre.leggauss(24)


def _raw_integral(a, z, level):
    """int_0^inf e^{-tz} t^{a-1} (1+t)^{-a} dt  (= Gamma(a) U(a,1,z)).

    Evaluated after one integration by parts,

        = (1/a) int_0^inf t^a (1+t)^{-a} e^{-tz} (z + a/(1+t)) dt,

    which removes the t^{a-1} endpoint singularity exactly (for small Re a
    the mass of the original integrand sits at t ~ e^{-1/a}, far below any
    floating-point node; the 1/a pole is carried analytically instead).
    a scalar, z scalar or 1-d array; the integrand is assembled in log form.
    """
    z = np.asarray(z, dtype=complex)
    zz = z[..., None]

    def chunk(t, dt):
        body = np.exp(-t * zz + a * np.log(t) - a * np.log1p(t))
        return np.sum(body * (zz + a / (1 + t)) * dt, axis=-1)

    t, dt = _ts_nodes(level)
    head = chunk(t, dt)

    # tail over [1, inf): geometric panels, truncated on the envelope test
    tail = np.zeros_like(head)
    lo = 1.0
    for _ in range(300):   # reaches t ~ 2^300: covers Re z down to ~1e-88
        hi = 2 * lo
        mid, rad = 0.5 * (lo + hi), 0.5 * (hi - lo)
        piece = rad * chunk(mid + rad * _GLX, _GLW)
        tail = tail + piece
        ref = np.maximum(np.abs(head + tail), 1e-300)
        if np.all(np.abs(piece) < 1e-17 * ref):
            break
        lo = hi
    else:
        raise DomainError("tail of the U integral did not converge "
                          "(Re z too small?)")
    return (head + tail) / a


def gamma_tricomi_u(a, z, rel_tol: float = 1e-10):
    """Gamma(a) * U(a, 1, z) as one un-normalized Laplace integral.

    Requires Re a > 0 and Re z > 0.  z may be an array; the quadrature level
    is refined until two successive levels agree to rel_tol.
    """
    a = complex(a)
    zarr = np.asarray(z, dtype=complex)
    if a.real <= 0:
        raise DomainError("integral representation needs Re a > 0")
    if np.any(np.real(zarr) <= 0):
        raise DomainError("integral representation needs Re z > 0")
    prev = _raw_integral(a, zarr, 4)
    for level in (5, 6, 7):
        cur = _raw_integral(a, zarr, level)
        if np.all(np.abs(cur - prev) <= rel_tol * np.abs(cur)):
            return cur if np.ndim(z) else complex(cur)
        prev = cur
    raise DomainError("U quadrature failed to reach the relative tolerance")


def tricomi_u(a, z, rel_tol: float = 1e-10):
    """Tricomi's confluent hypergeometric U(a, 1, z), Re a > 0, Re z > 0."""
    return gamma_tricomi_u(a, z, rel_tol) / spec.gamma(complex(a))


# ---------------------------------------------------------------------------
# resolvent kernel


def pole_distance(B, z) -> float:
    """Distance of A = 1/2 - z/(2B) from the nonpositive integers, i.e. the
    (rescaled) distance of z from the Landau levels B(2N+1)."""
    A = 0.5 - complex(z) / (2 * complex(B))
    n = max(0, round(-A.real))
    return min(abs(A + n), abs(A + n + 1), abs(A + max(n - 1, 0)))


def landau_resolvent_kernel(B, z, x, y, pole_guard: float = 1e-6,
                            rel_tol: float = 1e-10):
    """Landau resolvent kernel (H_B - z)^{-1}(x, y) for x != y."""
    B, z = complex(B), complex(z)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    d2 = float(np.sum((x - y) ** 2))
    if d2 == 0:
        raise DomainError("resolvent kernel is log-singular at x = y")
    dist = pole_distance(B, z)
    if dist < pole_guard:
        raise PoleProximityError(dist, pole_guard)
    A = 0.5 - z / (2 * B)
    w = B * d2 / 2
    if w.real <= 0:
        raise DomainError("Re(B|x-y|^2/2) must be positive")
    core = gamma_tricomi_u(A, w, rel_tol) / (4 * np.pi)
    phase = np.exp(-1j * (B / 2) * _wedge(x, y) - (B / 4) * d2)
    return complex(core * phase)


# ---------------------------------------------------------------------------
# resolvent application on a grid


def _radial_table(B, z, r2_int, h, rel_tol=1e-9):
    """F(d) = (1/4pi) Gamma(A) U(A,1,B d^2/2) e^{-B d^2/4} for the unique
    lattice distances d^2 = h^2 * r2_int (r2_int an integer array > 0)."""
    A = 0.5 - complex(z) / (2 * complex(B))
    d2 = (h ** 2) * r2_int.astype(float)
    w = complex(B) * d2 / 2
    out = np.empty(len(d2), dtype=complex)
    chunk = 4096
    for i in range(0, len(d2), chunk):
        out[i:i + chunk] = gamma_tricomi_u(A, w[i:i + chunk], rel_tol)
    return out / (4 * np.pi) * np.exp(-complex(B) * d2 / 4)


def _diagonal_cell(B, z, h, rel_tol=1e-9):
    """int_{|u| < rho} F(|u|) du over the equal-area disk of one grid cell,
    by radial tanh-sinh quadrature (the integrand is r * log(r)-like)."""
    A = 0.5 - complex(z) / (2 * complex(B))
    rho = h / np.sqrt(np.pi)
    t, dt = _ts_nodes(6)
    keep = t > 1e-10           # r log(r) integrand: smaller radii contribute
    t, dt = t[keep], dt[keep]  # below double precision
    r = rho * t
    w = complex(B) * r ** 2 / 2
    vals = gamma_tricomi_u(A, w, rel_tol) / (4 * np.pi) \
        * np.exp(-complex(B) * r ** 2 / 4)
    return complex(2 * np.pi * rho * np.sum(vals * r * dt))


def apply_landau_resolvent(B, z, f: Field, pole_guard: float = 1e-6) -> Field:
    """(H_B - z)^{-1} f by product-grid quadrature of the kernel integral.

    f must be compactly supported strictly inside the grid (one empty node
    ring).  The log-singular diagonal cell is integrated by local polar
    refinement; all other cells use the midpoint product rule with the
    radial factor looked up from a table over the unique lattice distances.
    """
    B, z = complex(B), complex(z)
    dist = pole_distance(B, z)
    if dist < pole_guard:
        raise PoleProximityError(dist, pole_guard)
    grid = f.grid
    n, h = grid.n, grid.spacing
    vals = f.values
    sup = np.abs(vals) > 0
    if not sup.any():
        return Field(grid, np.zeros_like(vals, dtype=complex))
    si, sj = np.nonzero(sup)
    if si.min() == 0 or sj.min() == 0 or si.max() == n - 1 or sj.max() == n - 1:
        raise SupportError("input support touches the grid boundary")

    # radial factor, tabulated over the representable integer squared
    # lattice distances i^2 + j^2
    max_r2 = int(2 * (n - 1) ** 2)
    ii = np.arange(n) ** 2
    r2_all = np.unique((ii[:, None] + ii[None, :]).ravel())
    r2_pos = r2_all[r2_all > 0]
    table = np.zeros(max_r2 + 1, dtype=complex)
    table[r2_pos] = _radial_table(B, z, r2_pos, h)

    out = np.zeros((n, n), dtype=complex)
    axis = grid.axis()
    diag_cell = _diagonal_cell(B, z, h)
    idx = np.arange(n)
    for k in range(len(si)):
        i0, j0 = si[k], sj[k]
        fy = vals[i0, j0]
        y1, y2 = axis[i0], axis[j0]
        r2 = (idx[:, None] - i0) ** 2 + (idx[None, :] - j0) ** 2
        F = table[r2]
        # phase exp(-i(B/2)(x1*y2 - x2*y1)) as an outer product of 1-d factors
        # (x1 varies along axis 0, x2 along axis 1)
        ph1 = np.exp(-1j * (B / 2) * axis * y2)
        ph2 = np.exp(1j * (B / 2) * axis * y1)
        out += (h * h * fy) * F * ph1[:, None] * ph2[None, :]
        out[i0, j0] += fy * diag_cell
    return Field(grid, out)


def resolvent_norm_envelope(lam, b, diameter, constants=None) -> float:
    """Frozen-constant envelope for ||R f|| / ||f|| with complex coupling:
    C * |lam|^sharp * exp( (b |Im lam| diameter / 2)^2 / (b Re lam) )."""
    constants = constants or load_landau_constants()
    lam = complex(lam)
    C = constants["norm_C"]
    sharp = constants["norm_sharp"]
    growth = (0.5 * b * abs(lam.imag) * diameter) ** 2 / (b * lam.real)
    return C * abs(lam) ** sharp * np.exp(growth)


def load_landau_constants() -> dict:
    with resources.files("maglab.data").joinpath(
            "landau_constants.json").open() as fh:
        return json.load(fh)


# ---------------------------------------------------------------------------
# off-diagonal decay


@dataclass
class DecayFit:
    rate: float
    band: float                      # 1-sigma confidence band of the slope
    distances: np.ndarray
    log_norms: np.ndarray
    low_dynamic_range: bool

    def dynamic_range_decades(self) -> float:
        return float((self.log_norms.max() - self.log_norms.min())
                     / np.log(10.0))


def offdiag_decay_rate(B, z, f: Field, ring_radii) -> DecayFit:
    """Fitted exponential decay rate of ||chi_S R chi_K f|| with distance.

    f defines the compact source K (its support); ring_radii are the inner
    radii of annuli (width = one radius step) measured from the support hull.
    """
    g = apply_landau_resolvent(B, z, f)
    grid = f.grid
    X1, X2 = grid.meshes()
    sup = np.abs(f.values) > 0
    # distance of each node from the source support
    si, sj = np.nonzero(sup)
    pts1, pts2 = X1[si, sj], X2[si, sj]
    d = np.full(X1.shape, np.inf)
    for p1, p2 in zip(pts1, pts2):
        d = np.minimum(d, np.hypot(X1 - p1, X2 - p2))

    radii = np.asarray(sorted(ring_radii), dtype=float)
    widths = np.diff(radii)
    widths = np.append(widths, widths[-1] if len(widths) else radii[-1])
    dists, norms = [], []
    h = grid.spacing
    for r, wdt in zip(radii, widths):
        mask = (d >= r) & (d < r + wdt)
        if not mask.any():
            continue
        nrm = np.sqrt(np.sum(np.abs(g.values[mask]) ** 2) * h * h)
        if nrm == 0:
            continue
        dists.append(r)
        norms.append(np.log(nrm))
    dists = np.asarray(dists)
    lognorms = np.asarray(norms)
    if len(dists) < 3:
        raise ValueError("need at least three resolved rings")
    M = np.stack([dists, np.ones_like(dists)], axis=1)
    coef, res, _, _ = np.linalg.lstsq(M, lognorms, rcond=None)
    slope = coef[0]
    dof = max(len(dists) - 2, 1)
    sigma2 = (res[0] / dof) if len(res) else 0.0
    band = float(np.sqrt(sigma2 / np.sum((dists - dists.mean()) ** 2)))
    span = (lognorms.max() - lognorms.min()) / np.log(10.0)
    return DecayFit(rate=float(-slope), band=band, distances=dists,
                    log_norms=lognorms, low_dynamic_range=bool(span < 4.0))


def export_decay_fit(path, fit: DecayFit) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["distance", "log_norm", "fitted_rate", "band"])
        for d, ln in zip(fit.distances, fit.log_norms):
            w.writerow(["%.17g" % d, "%.17g" % ln,
                        "%.17g" % fit.rate, "%.17g" % fit.band])
