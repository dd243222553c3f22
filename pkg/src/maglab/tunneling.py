"""Hopping coefficient rho0, tunneling splitting Delta0, and the 2x2
quasimode reduction connecting them.

rho0 = lam^2 * integral of conj(phi0(x+d)) v(x+d) e^{i b lam d1 x2} phi0(x-d),
with d = (d1, 0) and phi0 the single-well ground state (well at the origin),
regauged so its overlap with the closed-form oscillator ground state is
positive.  Delta0 = E1 - E0 of the double-well operator.  The quasimodes are
Riesz projections of magnetically translated, cut-off oscillator ground
states; their 2x2 Gramian G and energy matrix M reproduce the splitting
through sqrt(sigma)/|det G| with sigma = tr(adj(G) M)^2 - 4 det(G) det(M).
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, replace
from typing import List, Optional, Sequence

import numpy as np

from .grid_model import (Field, Grid2D, ModelParams, SparseHermitianOp,
                         WellSpec, build_operator, choose_grid,
                         magnetic_translate, well_values)
from .mho_kernels import MHOParams, ground_state
from .spectral import (Contour, SpectralResult, contour_for_ground,
                       lowest_eigs, projector_rank_estimate, riesz_project)


class GroundStateError(ValueError):
    """The supplied single-well ground state is missing residual verification."""


class ClusterError(RuntimeError):
    """The contour does not enclose a rank-2 spectral cluster."""


class DegenerateQuasimodeError(RuntimeError):
    """The quasimode Gramian is numerically singular."""


# ---------------------------------------------------------------------------
# oscillator reference data


def mho_reference(params: ModelParams, spec: Optional[WellSpec] = None) -> MHOParams:
    """Quadratic-approximation oscillator parameters for one well.

    Matching (P - (b lam/2) X_perp)^2 + lam^2 v(X) near the well bottom against
    the closed-form oscillator Hamiltonian gives k_j = sqrt(Hess_jj(v)/2) and
    reference field -b/2.  Only the ground-state Gaussian (eta, zeta, xi) and
    the frequencies f_plus/f_minus are consumed here, all of which stay regular
    in the isotropic zero-field case, so MHOParams is built directly instead of
    through the kernel-validating factory.
    """
    spec = spec if spec is not None else WellSpec.radial(params.a)
    Hw = spec.hessian_at_origin()
    if abs(Hw[0, 1]) > 1e-12 * max(Hw[0, 0], Hw[1, 1]):
        raise ValueError("well hessian must be axis-aligned for the "
                         "oscillator reference (got %s)" % (Hw,))
    k1 = float(np.sqrt(Hw[0, 0] / 2.0))
    k2 = float(np.sqrt(Hw[1, 1] / 2.0))
    return MHOParams(k1=k1, k2=k2, B=-params.b / 2.0,
                     lam=float(np.real(params.lam)))


def mho_contour_energies(p: MHOParams):
    """(e0, e1) for the spectral contour: ground and first excited levels of
    the quadratic model in units of lam, relative to the well depth -lam^2."""
    e0 = float(np.real(p.f_plus))
    e1 = float(np.real(2 * p.f_plus - p.f_minus))
    return e0, e1


def _c4_step(t: np.ndarray) -> np.ndarray:
    """C^4 monotone step: 0 for t<=0, 1 for t>=1."""
    t = np.clip(t, 0.0, 1.0)
    return t ** 5 * (126 + t * (-420 + t * (540 + t * (-315 + t * 70))))


def cutoff_field(grid: Grid2D, a: float) -> Field:
    """Radial cutoff chi: 1 on the ball of radius a/2, 0 outside radius 3a/4."""
    X1, X2 = grid.meshes()
    r = np.hypot(X1, X2)
    t = (r - a / 2) / (a / 4)
    return Field(grid, 1.0 - _c4_step(t))


def mho_ground_field(p: MHOParams, grid: Grid2D, center=(0.0, 0.0)) -> Field:
    X1, X2 = grid.meshes()
    vals = ground_state(p, (X1 - center[0], X2 - center[1]))
    return Field(grid, vals)


# ---------------------------------------------------------------------------
# single well and the hopping coefficient


def single_well_ground(params: ModelParams, n: int,
                       spec: Optional[WellSpec] = None,
                       pad: Optional[float] = None, seed: int = 0):
    """(SpectralResult, op) for the well at the origin.

    The grid is padded (default: by d1) so that the shifted samples
    phi0(x -+ d) needed by the hopping integral stay inside the domain.
    """
    spec = spec if spec is not None else WellSpec.radial(params.a)
    pad = params.d1 if pad is None else pad
    grid = choose_grid(params, n, double_well=True, pad=pad)
    op = build_operator(params, grid, wells=[(spec, (0.0, 0.0))])
    res = lowest_eigs(op, k=1, seed=seed)
    return res, op


@dataclass
class HoppingResult:
    rho: complex
    abs_rho: float
    quadrature_error: float
    phase_convention: str
    d1_snapped: float


def _shift_rows(arr: np.ndarray, s: int) -> np.ndarray:
    """out[i, :] = arr[i + s, :], zero-filled past the edges."""
    out = np.zeros_like(arr)
    m = arr.shape[0]
    if s >= 0:
        out[:m - s, :] = arr[s:, :]
    else:
        out[-s:, :] = arr[:m + s, :]
    return out


def hopping_coefficient(params: ModelParams, phi0: Field,
                        spec: Optional[WellSpec] = None,
                        residual: Optional[float] = None,
                        residual_tol: float = 1e-5) -> HoppingResult:
    """rho0 as a grid sum over the support of v(. + d).

    phi0 must come with its eigen-residual (from SpectralResult.residuals);
    an absent or too-large residual is a precondition failure.  Before the
    sum, phi0 is regauged so that its overlap with the oscillator ground
    state is real positive; only |rho0| is convention-free.
    """
    if residual is None:
        raise GroundStateError("pass residual=<eigen-residual of phi0>; "
                               "an unverified ground state is rejected")
    if residual > residual_tol:
        raise GroundStateError("ground-state residual %.3g exceeds %.3g"
                               % (residual, residual_tol))
    spec = spec if spec is not None else WellSpec.radial(params.a)
    grid = phi0.grid
    h = grid.spacing
    d1s = float(grid.snap([params.d1, 0.0])[0])
    steps = int(round(d1s / h))
    if steps == 0:
        raise ValueError("d1 = %g is below one grid spacing" % params.d1)

    lam = float(np.real(params.lam))
    blam = params.b * lam
    X1, X2 = grid.meshes()

    # phase convention: <psi0_mho, phi0> real positive
    pref = mho_reference(params, spec)
    psi = ground_state(pref, (X1, X2))
    ov = np.sum(np.conj(psi) * phi0.values) * h * h
    u = phi0.values * np.exp(-1j * np.angle(ov))

    vp = well_values(spec, X1 + d1s, X2)          # v(x + d), support near -d
    pp = _shift_rows(u, steps)                     # phi0(x + d)
    pm = _shift_rows(u, -steps)                    # phi0(x - d)
    phase = np.exp(1j * blam * d1s * X2)
    integrand = np.conj(pp) * vp * phase * pm

    def quad(stride: int) -> complex:
        sub = integrand[::stride, ::stride]
        return complex(lam ** 2 * (h * stride) ** 2 * np.sum(sub))

    rho = quad(1)
    rho_coarse = quad(2)
    quad_err = abs(rho - rho_coarse) / 3.0        # second-order extrapolation
    return HoppingResult(rho=rho, abs_rho=abs(rho),
                         quadrature_error=float(quad_err),
                         phase_convention="mho-overlap-positive",
                         d1_snapped=d1s)


# ---------------------------------------------------------------------------
# quasimodes and the 2x2 reduction


@dataclass
class QuasimodePair:
    psi_minus: Field
    psi_plus: Field
    norm_minus: float
    norm_plus: float
    cross_overlap: float
    contour: Contour
    rank_estimate: Optional[float]

    def defects(self) -> dict:
        return {"norm_minus": abs(self.norm_minus - 1.0),
                "norm_plus": abs(self.norm_plus - 1.0),
                "cross_overlap": self.cross_overlap}


def quasimodes(params: ModelParams, op: SparseHermitianOp,
               spec: Optional[WellSpec] = None,
               contour: Optional[Contour] = None,
               check_rank: bool = True, rank_tol: float = 0.1,
               rank_probes: int = 6, seed: int = 0) -> QuasimodePair:
    """psi_{+-d} = Riesz projection of the translated, cut-off oscillator
    ground state R^{+-d} chi(X) psi0_mho, each normalized before projection."""
    spec = spec if spec is not None else WellSpec.radial(params.a)
    grid = op.grid
    pref = mho_reference(params, spec)
    if contour is None:
        e0, e1 = mho_contour_energies(pref)
        contour = contour_for_ground(params, e0, e1)

    if check_rank:
        rank = projector_rank_estimate(op, contour, probes=rank_probes,
                                       seed=seed)
        if abs(rank - 2.0) > rank_tol:
            raise ClusterError("projector rank estimate %.3f is not 2 "
                               "(contour center %s radius %g)"
                               % (rank, contour.center, contour.radius))
    else:
        rank = None

    lam = float(np.real(params.lam))
    blam = params.b * lam
    d1s = float(grid.snap([params.d1, 0.0])[0])
    chi = cutoff_field(grid, params.a)
    base = Field(grid, chi.values * mho_ground_field(pref, grid).values)
    base = base.normalized()
    phi_plus = magnetic_translate(base, (+d1s, 0.0), blam)
    phi_minus = magnetic_translate(base, (-d1s, 0.0), blam)

    proj = riesz_project(op, contour, [phi_minus, phi_plus])
    psi_minus, psi_plus = proj
    return QuasimodePair(
        psi_minus=psi_minus, psi_plus=psi_plus,
        norm_minus=psi_minus.norm(), norm_plus=psi_plus.norm(),
        cross_overlap=abs(psi_minus.inner(psi_plus)),
        contour=contour, rank_estimate=rank)


@dataclass
class TwoByTwoReduction:
    G: np.ndarray
    M: np.ndarray
    gamma: complex
    sigma: complex
    gram_defect: float
    gram_budget: float

    @property
    def splitting(self) -> float:
        """sqrt(sigma)/|gamma|; for real parameters sigma is real >= 0."""
        s = self.sigma
        if abs(s.imag) <= 1e-8 * max(abs(s), 1e-300):
            s = s.real
        return float(np.sqrt(abs(s)) / abs(self.gamma))


def reduction_from_matrices(G: np.ndarray, M: np.ndarray,
                            gram_budget: float = np.inf) -> TwoByTwoReduction:
    G = np.asarray(G, dtype=complex)
    M = np.asarray(M, dtype=complex)
    gamma = G[0, 0] * G[1, 1] - G[0, 1] * G[1, 0]
    if abs(gamma) < 1e-12 * np.linalg.norm(G) ** 2:
        raise DegenerateQuasimodeError("Gramian is numerically singular "
                                       "(det G = %s)" % gamma)
    adjG = np.array([[G[1, 1], -G[0, 1]], [-G[1, 0], G[0, 0]]], dtype=complex)
    tr = np.trace(adjG @ M)
    detM = M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0]
    sigma = tr ** 2 - 4.0 * gamma * detM
    defect = float(np.linalg.norm(G - np.eye(2), 2))
    return TwoByTwoReduction(G=G, M=M, gamma=complex(gamma),
                             sigma=complex(sigma), gram_defect=defect,
                             gram_budget=float(gram_budget))


def gram_and_m(psi_minus: Field, psi_plus: Field, op: SparseHermitianOp,
               gram_budget_constant: float = 5.0) -> TwoByTwoReduction:
    """G_ab = <psi_a, psi_b>, M_ab = <psi_a, H psi_b> for a,b in {-d, +d}."""
    pair = [psi_minus, psi_plus]
    images = [op.apply(p) for p in pair]
    G = np.empty((2, 2), dtype=complex)
    M = np.empty((2, 2), dtype=complex)
    for i in range(2):
        for j in range(2):
            G[i, j] = pair[i].inner(pair[j])
            M[i, j] = pair[i].inner(images[j])
    lam = float(np.real(op.params.lam))
    budget = gram_budget_constant / np.sqrt(lam)
    red = reduction_from_matrices(G, M, gram_budget=budget)
    if red.gram_defect > budget:
        warnings.warn("Gramian defect %.3g exceeds the O(lam^{-1/2}) budget "
                      "%.3g" % (red.gram_defect, budget))
    return red


# ---------------------------------------------------------------------------
# direct splitting and the ratio report


@dataclass
class SplittingResult:
    delta: float
    energies: List[float]
    spectral: SpectralResult
    cluster_separated: bool


def splitting_direct(op: SparseHermitianOp, seed: int = 0,
                     separation_factor: float = 2.0,
                     refine_shift: bool = True) -> SplittingResult:
    """Delta0 = E1 - E0 with E2 monitoring the gap to the rest of the
    spectrum; warns when the 2-cluster is not cleanly separated.

    With refine_shift, a second shift-invert pass targets just below the
    computed cluster: the absolute eigenvalue error scales with the distance
    to the shift, and the splitting can be many orders smaller than E0.
    """
    res = lowest_eigs(op, k=3, seed=seed)
    e0, e1, e2 = res.eigenvalues
    if refine_shift:
        margin = max(e2 - e0, 1e-8 * max(abs(e0), 1.0))
        res = lowest_eigs(op, k=3, seed=seed, sigma=e0 - margin)
        e0, e1, e2 = res.eigenvalues
    delta = e1 - e0
    separated = (e2 - e1) > separation_factor * max(delta, 1e-300)
    if not separated:
        warnings.warn("cluster gap E2-E1 = %.3g does not dominate the "
                      "splitting %.3g" % (e2 - e1, delta))
    return SplittingResult(delta=float(delta), energies=[e0, e1, e2],
                           spectral=res, cluster_separated=separated)


RATIO_CSV_COLUMNS = ["lambda", "b", "d1", "E0", "E1", "Delta", "abs_rho",
                     "ratio", "quad_err", "grid_n", "grid_L"]


@dataclass
class RatioRow:
    lam: float
    b: float
    d1: float
    E0: float
    E1: float
    delta: float
    abs_rho: float
    ratio: float
    quad_err: float
    grid_n: int
    grid_L: float

    def as_list(self):
        return [self.lam, self.b, self.d1, self.E0, self.E1, self.delta,
                self.abs_rho, self.ratio, self.quad_err, self.grid_n,
                self.grid_L]


def ratio_point(params: ModelParams, n: int,
                spec: Optional[WellSpec] = None, seed: int = 0) -> RatioRow:
    """One sweep point: Delta0 from the double well, rho0 from the single
    well on the same grid, and their ratio Delta0 / (2 |rho0|)."""
    spec = spec if spec is not None else WellSpec.radial(params.a)
    grid = choose_grid(params, n, double_well=True, pad=params.d1)
    # refine if needed so the flux-per-plaquette bound h*lam <= 0.5 holds
    # with some headroom
    lam = float(np.real(params.lam))
    if grid.spacing * lam > 0.45:
        n = int(np.ceil(2 * grid.half_extent * lam / 0.45)) + 1
        n += n % 2
        grid = choose_grid(params, n, double_well=True, pad=params.d1)
    d1s = float(grid.snap([params.d1, 0.0])[0])
    params_s = replace(params, d1=d1s)

    sw = build_operator(params_s, grid, wells=[(spec, (0.0, 0.0))])
    res1 = lowest_eigs(sw, k=1, seed=seed)
    hop = hopping_coefficient(params_s, res1.eigenvectors[0], spec=spec,
                              residual=res1.residuals[0])

    dw = build_operator(params_s, grid,
                        wells=[(spec, (-d1s, 0.0)), (spec, (+d1s, 0.0))])
    split = splitting_direct(dw, seed=seed)

    ratio = split.delta / (2.0 * hop.abs_rho)
    return RatioRow(lam=float(np.real(params.lam)), b=params.b, d1=d1s,
                    E0=split.energies[0], E1=split.energies[1],
                    delta=split.delta, abs_rho=hop.abs_rho, ratio=ratio,
                    quad_err=hop.quadrature_error, grid_n=n,
                    grid_L=grid.half_extent)


def ratio_report(params_base: ModelParams, lams: Sequence[float], n: int,
                 spec: Optional[WellSpec] = None,
                 seed: int = 0) -> List[RatioRow]:
    rows = []
    for lam in lams:
        rows.append(ratio_point(replace(params_base, lam=float(lam)), n,
                                spec=spec, seed=seed))
    return rows


def write_ratio_csv(path, rows: Sequence[RatioRow]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(RATIO_CSV_COLUMNS)
        for r in rows:
            w.writerow(["%.17g" % v if isinstance(v, float) else str(v)
                        for v in r.as_list()])


def read_ratio_csv(path) -> List[RatioRow]:
    rows = []
    with open(path, newline="") as fh:
        rd = csv.reader(fh)
        header = next(rd)
        if header != RATIO_CSV_COLUMNS:
            raise ValueError("unexpected CSV header %s" % header)
        for rec in rd:
            vals = [float(v) for v in rec]
            rows.append(RatioRow(lam=vals[0], b=vals[1], d1=vals[2],
                                 E0=vals[3], E1=vals[4], delta=vals[5],
                                 abs_rho=vals[6], ratio=vals[7],
                                 quad_err=vals[8], grid_n=int(vals[9]),
                                 grid_L=vals[10]))
    return rows
