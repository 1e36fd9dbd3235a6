import numpy as np
import pytest
import scipy.special

from sobolev_adjoint.core import Domain, GridFn, inner, l2_norm
from sobolev_adjoint.bvp import solve_dirichlet_poisson_2d
from sobolev_adjoint.multiplier import NormVariant, SobolevSpec, adjoint_embedding
from sobolev_adjoint.spectral import (
    adjoint_embedding_eigs,
    bessel_j,
    bessel_j_zero,
    disk_dirichlet_eigs,
    rectangle_dirichlet_eigs,
    svd_from_multiplier,
)


def test_bessel_j_values():
    assert bessel_j(0, 0.0) == 1.0
    assert abs(bessel_j(1, 0.0)) < 1e-15
    for m in (0, 1, 2, 5, 10):
        for x in np.linspace(0.1, 60.0, 25):
            assert abs(bessel_j(m, x) - scipy.special.jv(m, x)) < 1e-10


def test_bessel_j_zero_values():
    j01 = bessel_j_zero(0, 1)
    assert 2.40 <= j01 <= 2.41
    assert abs(j01 - 2.404825557695773) < 1e-10
    assert abs(bessel_j(0, j01)) < 1e-9
    assert abs(bessel_j_zero(1, 1) - 3.8317059702075125) < 1e-10


def test_bessel_j_zero_table_against_oracle():
    for m in (0, 1, 3, 7, 10):
        ref = scipy.special.jn_zeros(m, 20)
        for n in (1, 5, 20):
            assert abs(bessel_j_zero(m, n) - ref[n - 1]) < 1e-9


def test_rectangle_eigs_values_and_orthonormality():
    grid = Domain.rectangle(1.0, 1.0, 129, 129)
    eigs = rectangle_dirichlet_eigs(1.0, 1.0, 4, 4, grid)
    assert abs(eigs.entries[0][0] - 2 * np.pi**2) < 1e-12
    lams = [lam for lam, _ in eigs.entries]
    assert lams == sorted(lams)
    K = eigs.count
    gram = np.array([[inner(fi, fj).real for _, fj in eigs.entries]
                     for _, fi in eigs.entries])
    assert np.max(np.abs(gram - np.eye(K))) < 1e-8


def test_rectangle_eigs_satisfy_fd_laplacian():
    grid = Domain.rectangle(1.0, 1.0, 129, 129)
    eigs = rectangle_dirichlet_eigs(1.0, 1.0, 2, 2, grid)
    lam, f = eigs.entries[0]
    arr = f.to_array()
    h = grid.spacing[0]
    lap = -(arr[2:, 1:-1] + arr[:-2, 1:-1] + arr[1:-1, 2:] + arr[1:-1, :-2]
            - 4 * arr[1:-1, 1:-1]) / h**2
    core = np.abs(arr[1:-1, 1:-1]) > 0.1
    ratio = lap[core] / arr[1:-1, 1:-1][core]
    assert np.max(np.abs(ratio / lam - 1.0)) < 1e-3  # O(h^2) stencil defect


def test_disk_eigs():
    grid = Domain.disk_mask(1.0, 201)
    eigs = disk_dirichlet_eigs(1.0, 2, 2, grid)
    assert abs(eigs.entries[0][0] - 5.783185962946785) < 1e-10
    # boundary condition at grid tolerance
    _, f0 = eigs.entries[0]
    arr = f0.to_array()
    X, Y = np.meshgrid(*grid.axes(), indexing="ij")
    ring = (np.sqrt(X**2 + Y**2) > 0.98) & grid.active.reshape(grid.shape)
    assert np.max(np.abs(arr[ring])) < 0.05 * np.max(np.abs(arr))
    # coarse pixel quadrature orthonormality
    K = eigs.count
    gram = np.array([[inner(fi, fj).real for _, fj in eigs.entries]
                     for _, fi in eigs.entries])
    assert np.max(np.abs(gram - np.eye(K))) < 1e-2
    # m=0 keeps only the cosine branch: eigenvalues appear once for m=0
    lam0 = eigs.entries[0][0]
    assert sum(1 for lam, _ in eigs.entries if abs(lam - lam0) < 1e-9) == 1


def test_adjoint_embedding_eigs_basics():
    grid = Domain.rectangle(1.0, 1.0, 65, 65)
    eigs = rectangle_dirichlet_eigs(1.0, 1.0, 3, 3, grid)
    lam, f = eigs.entries[0]
    out = adjoint_embedding_eigs(f, eigs)
    assert np.max(np.abs(out.values - f.values / lam)) < 1e-12
    X, Y = np.meshgrid(*grid.axes(), indexing="ij")
    probe = GridFn(grid, (np.sin(5 * np.pi * X) * np.sin(4 * np.pi * Y)).ravel())
    assert l2_norm(adjoint_embedding_eigs(probe, eigs)) < 1e-14
    with pytest.raises(ValueError):
        from sobolev_adjoint.spectral import EigenSystem
        adjoint_embedding_eigs(f, EigenSystem(grid, ()))


def test_eigenexpansion_matches_fd_dirichlet_solve():
    grid = Domain.rectangle(1.0, 1.0, 129, 129)
    u = GridFn(grid, np.ones(129 * 129))
    eigs = rectangle_dirichlet_eigs(1.0, 1.0, 10, 10, grid)
    z_eig = adjoint_embedding_eigs(u, eigs)
    z_fd = solve_dirichlet_poisson_2d(u)
    assert l2_norm(z_eig - z_fd) / l2_norm(z_fd) < 2e-2


def test_truncation_monotonicity():
    grid = Domain.rectangle(1.0, 1.0, 65, 65)
    u = GridFn(grid, np.ones(65 * 65))
    z_fd = solve_dirichlet_poisson_2d(u)
    errs = []
    for mx in (4, 6, 8, 10):
        eigs = rectangle_dirichlet_eigs(1.0, 1.0, mx, mx, grid)
        errs.append(l2_norm(adjoint_embedding_eigs(u, eigs) - z_fd))
    assert all(a >= b for a, b in zip(errs, errs[1:]))


def test_eigenexpansion_self_adjoint_psd():
    grid = Domain.rectangle(1.0, 1.0, 33, 33)
    eigs = rectangle_dirichlet_eigs(1.0, 1.0, 4, 4, grid)
    rng = np.random.default_rng(0)
    u = GridFn(grid, rng.standard_normal(33 * 33))
    v = GridFn(grid, rng.standard_normal(33 * 33))
    Bu, Bv = adjoint_embedding_eigs(u, eigs), adjoint_embedding_eigs(v, eigs)
    assert abs(inner(Bu, v) - inner(u, Bv)) < 1e-12
    assert inner(Bu, u).real >= 0.0


def test_svd_triples_and_reconstruction():
    dom = Domain.torus(1, 64)
    spec = SobolevSpec(1.0, NormVariant.TORUS_S)
    svd = svd_from_multiplier(spec, dom, 33)
    assert svd.sigmas[0] == 1.0
    assert abs(svd.sigmas[1] - (1 + 4 * np.pi**2) ** -0.5) < 1e-12
    assert abs(svd.sigmas[1] - 0.15717672547758985) < 1e-10
    # v_k = sigma_k u_k and orthonormality of v in H^s
    from sobolev_adjoint.multiplier import sobolev_inner
    for i in (0, 1, 2):
        vk, uk, sig = svd.v_fns[i], svd.u_fns[i], svd.sigmas[i]
        assert np.max(np.abs(vk.values - sig * uk.values)) < 1e-12
        assert abs(sobolev_inner(vk, vk, spec) - 1.0) < 1e-10

    x = dom.axes()[0]
    rng = np.random.default_rng(1)
    vals = np.zeros(64)
    for k in range(1, 9):
        a, b = rng.standard_normal(2)
        vals += a * np.cos(2 * np.pi * k * x) + b * np.sin(2 * np.pi * k * x)
    u = GridFn(dom, vals)
    rec = svd.apply_adjoint(u)
    ref = adjoint_embedding(u, spec)
    assert l2_norm(GridFn(dom, rec.values - ref.values)) / l2_norm(u) < 1e-10
    emb = svd.apply_embedding(u)
    assert l2_norm(GridFn(dom, emb.values - u.values)) / l2_norm(u) < 1e-10


def test_svd_sigma_consistency_with_composition():
    # sigma_k^2 equals the per-mode eigenvalue of E E* (the inverse weight)
    dom = Domain.torus(1, 32)
    spec = SobolevSpec(1.5, NormVariant.TORUS_S)
    svd = svd_from_multiplier(spec, dom, 9)
    for sig, uk in zip(svd.sigmas, svd.u_fns):
        smooth = adjoint_embedding(GridFn(dom, uk.values), spec)
        lam = (smooth.values[0] / uk.values[0]).real
        assert abs(sig**2 - lam) < 1e-12


def test_svd_rejects_bad_requests():
    dom = Domain.torus(1, 16)
    spec = SobolevSpec(1.0, NormVariant.TORUS_S)
    with pytest.raises(ValueError):
        svd_from_multiplier(spec, dom, 17)
    with pytest.raises(ValueError):
        svd_from_multiplier(spec, Domain.interval(0, 1, 17), 4)
