import numpy as np
import pytest

from core.errors import ConfigError, ConvergenceError, SolverError
from core.kernel import assemble_kernels
from core.mityuk import SlitSpec, build_rhs
from core.solver import DENSE_DIRECT, ITERATIVE, SolverConfig, solve_density


def _system(domain, alpha, slits):
    A, gamma = build_rhs(domain, alpha, slits)
    kernels = assemble_kernels(domain, A)
    return kernels.N, kernels.M, gamma


def test_method_aliases():
    assert SolverConfig(method="direct").method == DENSE_DIRECT
    assert SolverConfig(method="iterative").method == ITERATIVE
    with pytest.raises(ConfigError):
        SolverConfig(method="lu")
    with pytest.raises(ConfigError):
        SolverConfig(tol=0.0)


def test_config_round_trip_through_dict():
    cfg = SolverConfig(method="iterative", tol=1e-12, restart=30)
    assert SolverConfig.from_dict(cfg.to_dict()) == cfg
    with pytest.raises(ConfigError):
        SolverConfig.from_dict({"precision": 5})


def test_disk_center_gives_zero_h0(unit_disk):
    N, M, gamma = _system(unit_disk, 0.0, SlitSpec(()))
    density = solve_density(N, M, gamma, n=unit_disk.n)
    assert density.h0 == pytest.approx(0.0, abs=1e-13)


def test_residual_and_piecewise_constant_h(annulus):
    N, M, gamma = _system(annulus, 0.5, SlitSpec.parse("c"))
    density = solve_density(N, M, gamma, n=annulus.n)
    assert density.residual < 1e-12
    assert density.h_means.shape == (2,)
    assert max(density.h_residuals) < 1e-10
    rhs = -M @ gamma
    assert np.max(np.abs(density.mu - N @ density.mu - rhs)) <= 1e-12 * np.max(np.abs(rhs))


def test_iterative_matches_direct(annulus):
    N, M, gamma = _system(annulus, 0.4 + 0.3j, SlitSpec.parse("r"))
    direct = solve_density(N, M, gamma, n=annulus.n)
    gmres = solve_density(N, M, gamma, SolverConfig(method="iterative", tol=1e-13), n=annulus.n)
    assert gmres.method == ITERATIVE
    assert np.allclose(gmres.h_means, direct.h_means, atol=1e-10)


def test_iterative_stops_short(annulus):
    N, M, gamma = _system(annulus, 0.5, SlitSpec.parse("c"))
    with pytest.raises(ConvergenceError) as info:
        solve_density(N, M, gamma, SolverConfig(method="iterative", tol=1e-14, max_iter=1), n=annulus.n)
    assert info.value.details["residual"] > 1e-13


def test_size_mismatch():
    with pytest.raises(SolverError):
        solve_density(np.eye(4), np.eye(4), np.ones(3))


def test_non_finite_rhs():
    with pytest.raises(SolverError):
        solve_density(np.zeros((2, 2)), np.eye(2), np.array([1.0, np.inf]))


def test_non_finite_kernel_entries(unit_disk):
    N, M, gamma = _system(unit_disk, 0.2, SlitSpec(()))
    N = N.copy()
    N[3, 5] = np.nan
    with pytest.raises(SolverError):
        solve_density(N, M, gamma, n=unit_disk.n)


def test_excluded_nodes_left_out_of_means(annulus):
    N, M, gamma = _system(annulus, 0.5, SlitSpec.parse("c"))
    skip = np.zeros(annulus.total_nodes, dtype=bool)
    skip[[0, 7, annulus.n + 3]] = True
    density = solve_density(N, M, gamma, n=annulus.n, exclude=skip)
    assert density.h_means[0] == pytest.approx(np.mean(density.h[:annulus.n][~skip[:annulus.n]]), abs=1e-14)
    assert density.h_means[1] == pytest.approx(np.mean(density.h[annulus.n:][~skip[annulus.n:]]), abs=1e-14)
    with pytest.raises(SolverError):
        solve_density(N, M, gamma, n=annulus.n, exclude=skip[:10])
