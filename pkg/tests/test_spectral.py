"""Eigensolver and Riesz projector tests on small grids where a dense
eigendecomposition provides an exact oracle."""

import numpy as np
import pytest
import scipy.linalg as la

from maglab.grid_model import Field, Grid2D, ModelParams, build_operator
from maglab.spectral import (
    Contour,
    contour_for_ground,
    lowest_eigs,
    projector_rank_estimate,
    riesz_project,
)


def make_op(n=20, b=0.2, lam=2.0):
    params = ModelParams(lam=lam, b=b, d1=0.4, a=0.15)
    grid = Grid2D(half_extent=1.0, n=n)
    return build_operator(params, grid, wells=())


def dense_eigs(op):
    return la.eigh(op.matrix.toarray())


def cluster_contour(w, k, m=32):
    """Circle enclosing exactly the lowest k dense eigenvalues."""
    center = 0.5 * (w[0] + w[k - 1])
    radius = 0.5 * ((w[k - 1] - center) + (w[k] - center))
    return Contour(center=complex(center), radius=float(radius),
                   quadrature_nodes=m)


def test_lowest_eigs_matches_dense_oracle():
    op = make_op()
    res = lowest_eigs(op, k=4)
    w, _ = dense_eigs(op)
    np.testing.assert_allclose(res.eigenvalues, w[:4], rtol=1e-10)
    assert res.eigenvalues == sorted(res.eigenvalues)
    assert all(r < 1e-8 * abs(res.eigenvalues[0]) for r in res.residuals)
    assert res.orthogonality_defect <= 1e-8
    # eigenvectors are L2(grid)-normalized
    for f in res.eigenvectors:
        assert abs(f.norm() - 1.0) < 1e-10


def test_lowest_eigs_rejects_large_k():
    op = make_op(n=20)
    with pytest.raises(ValueError):
        lowest_eigs(op, k=400)


def test_contour_for_ground_geometry():
    params = ModelParams(lam=10.0, b=0.1, d1=0.4, a=0.15)
    c = contour_for_ground(params, e0_mho=1.5, e1_mho=2.5, m=16)
    assert c.center == pytest.approx(-100.0 + 15.0)
    assert c.radius == pytest.approx(0.5 * 1.0 * 10.0)
    assert c.quadrature_nodes == 16
    with pytest.raises(ValueError):
        contour_for_ground(params, e0_mho=2.0, e1_mho=2.0)


def test_contour_clearance():
    c = Contour(center=0.0 + 0.0j, radius=1.0)
    assert c.clearance_ok([0.0, 2.0])
    assert not c.clearance_ok([0.9995])


def test_riesz_projector_matches_dense_projector():
    op = make_op()
    w, V = dense_eigs(op)
    contour = cluster_contour(w, 2)
    rng = np.random.default_rng(0)
    vec = rng.standard_normal(op.dimension) \
        + 1j * rng.standard_normal(op.dimension)
    f = Field(op.grid, vec.reshape(op.grid.n, op.grid.n))
    pf = riesz_project(op, contour, f)
    exact = V[:, :2] @ (V[:, :2].conj().T @ vec)
    assert np.linalg.norm(pf.flat() - exact) <= 1e-8 * np.linalg.norm(vec)


def test_riesz_projector_idempotent_and_commutes():
    op = make_op(b=0.3)
    w, _ = dense_eigs(op)
    contour = cluster_contour(w, 2)
    rng = np.random.default_rng(1)
    vec = rng.standard_normal(op.dimension).astype(complex)
    f = Field(op.grid, vec.reshape(op.grid.n, op.grid.n))
    pf = riesz_project(op, contour, f)
    ppf = riesz_project(op, contour, pf)
    assert np.linalg.norm(ppf.flat() - pf.flat()) \
        <= 1e-7 * np.linalg.norm(vec)
    # commutation with the Hamiltonian
    hp = op.apply(pf)
    ph = riesz_project(op, contour, op.apply(f))
    assert np.linalg.norm(hp.flat() - ph.flat()) \
        <= 1e-6 * np.linalg.norm(op.apply(f).flat())


def test_riesz_projector_accepts_field_lists():
    op = make_op()
    w, _ = dense_eigs(op)
    contour = cluster_contour(w, 2)
    rng = np.random.default_rng(2)
    fs = [Field(op.grid, rng.standard_normal((op.grid.n, op.grid.n))
                .astype(complex)) for _ in range(3)]
    out = riesz_project(op, contour, fs)
    assert isinstance(out, list) and len(out) == 3


@pytest.mark.parametrize("enclosed", [1, 2, 3])
def test_projector_rank_estimate_counts_enclosed_levels(enclosed):
    op = make_op(b=0.25)
    w, _ = dense_eigs(op)
    contour = cluster_contour(w, enclosed, m=48)
    est = projector_rank_estimate(op, contour, probes=6, seed=0)
    assert abs(est - enclosed) < 0.05
