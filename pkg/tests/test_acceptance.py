"""Acceptance criteria, one test (or parametrised family) per criterion.

Run ``pytest tests/test_acceptance.py`` to get a PASS/FAIL line per criterion
in the terminal summary.
"""
import cmath
import math
import re

import numpy as np
import pytest

from dirac_lp import cli
from dirac_lp import halfspace_weyl as hw
from dirac_lp import radial_modes as rm
from dirac_lp import spectral_region as sr
from dirac_lp.closed_spectra import circle_spectrum, discretized_circle_abs_spectrum

INF = math.inf
criterion = pytest.mark.criterion


def _disk_samples(rng, count, radius):
    r = radius * np.sqrt(rng.uniform(0, 1, count))
    theta = rng.uniform(0, 2 * np.pi, count)
    return r * np.exp(1j * theta)


# 1 ---------------------------------------------------------------------------

@criterion(1, "region with lambda0=0 equals the strip |Im mu| <= ck|1/p-1/2|")
@pytest.mark.parametrize("k", [1, 2, 3])
@pytest.mark.parametrize("p", [1.0, 1.5, 2.0, 3.0, INF])
def test_c01_strip(k, p):
    rng = np.random.default_rng(100 + 10 * k + (0 if p == INF else int(4 * p)))
    region = sr.SpectralRegion(c=1.0, k=k, lambda0=0.0, p=p)
    strip = k * abs((0.0 if p == INF else 1.0 / p) - 0.5)
    mus = _disk_samples(rng, 1000, 10.0)
    got = np.array([sr.contains(region, mu, tol=1e-9) for mu in mus])
    want = np.abs(mus.imag) <= strip + 1e-9
    assert np.array_equal(got, want)


# 2 ---------------------------------------------------------------------------

@criterion(2, "p=2 region degenerates to the real rays |mu| >= lambda0")
@pytest.mark.parametrize("lambda0", [0.0, 1.0, 2.0])
def test_c02_p2_rays(lambda0):
    rng = np.random.default_rng(7 + int(lambda0))
    region = sr.SpectralRegion(c=1.0, k=2, lambda0=lambda0, p=2.0)
    real = rng.uniform(-5, 5, 500).astype(complex)
    nonreal = rng.uniform(-5, 5, 500) + 1j * rng.uniform(-5, 5, 500)
    assert np.all(nonreal.imag != 0)
    for mu in np.concatenate([real, nonreal]):
        want = mu.imag == 0 and abs(mu.real) >= lambda0
        assert sr.contains(region, mu, tol=1e-9) == want, mu


# 3 ---------------------------------------------------------------------------

@criterion(3, "landmarks x_R, x_M, x_L at threshold t=1")
@pytest.mark.parametrize("lambda0, tag, expected", [
    (2.0, "R", math.sqrt(3.0)),
    (0.5, "M", math.sqrt(0.75)),
    (0.0, "L", 1.0),
])
def test_c03_landmarks(lambda0, tag, expected):
    region = sr.SpectralRegion(c=1.0, k=2, lambda0=lambda0, p=1.0)
    assert region.threshold == 1.0
    case = sr.classify(region)
    assert case.tag == tag
    assert abs(case.landmark - expected) <= 1e-12
    # oracle: boundary point at s = 0 is sqrt(lambda0**2 + (i t)**2)
    crossing = cmath.sqrt(lambda0 ** 2 - 1.0)
    assert abs(max(abs(crossing.real), abs(crossing.imag)) - case.landmark) <= 1e-12


# 4 ---------------------------------------------------------------------------

@criterion(4, "AB+BA = 0 exactly; eig(A) = +-sqrt(lam^2-mu^2)")
def test_c04_mode_matrices():
    rng = np.random.default_rng(4)
    for _ in range(50):
        lam, mu = rng.normal(size=2) + 1j * rng.normal(size=2)
        A, B = rm.mode_matrices(lam, mu)
        assert np.array_equal(A @ B + B @ A, np.zeros((4, 4)))
        kappa = np.sqrt(lam * lam - mu * mu)
        eig = np.linalg.eigvals(A)
        for target in (kappa, -kappa):
            close = np.abs(eig - target) <= 1e-10
            assert close.sum() == 2, (eig, kappa)


# 5 ---------------------------------------------------------------------------

@criterion(5, "radial decay slopes: -2 (1%), growing 0 (2% abs), c=0 fit (-1,-1) (2%)")
def test_c05_radial_decay():
    system = rm.build_system(1.0, 0.0, rho=1.0, c=1.0, k=2)
    decaying = rm.decaying_solution(system, 1.0, 20.0, steps=801)
    slope = rm.decay_exponent(decaying, (8.0, 16.0))
    assert abs(slope - (-2.0)) <= 0.01 * 2.0
    growing = rm.growing_solution(system, 1.0, 20.0, steps=801)
    assert abs(rm.decay_exponent(growing, (8.0, 16.0))) <= 0.02

    flat = rm.build_system(1.0, 0.0, rho=1.0, c=0.0, k=2)
    traj = rm.decaying_solution(flat, 1.0, 210.0, steps=2001)
    beta, gamma = rm.decay_exponent(traj, (50.0, 200.0))
    assert abs(beta + 1.0) <= 0.02
    assert abs(gamma + 1.0) <= 0.02


# 6 ---------------------------------------------------------------------------

@criterion(6, "h'(t) matches central differences to 1e-6 relative")
@pytest.mark.parametrize("k", [1, 2, 3])
@pytest.mark.parametrize("t", [0.1, 0.3, 0.5, 0.9])
def test_c06_h_derivative(k, t):
    step = 1e-6 * t
    _, deriv = rm.h_func(t, k)
    numeric = (rm.h_func(t + step, k)[0] - rm.h_func(t - step, k)[0]) / (2 * step)
    assert abs(numeric - deriv) <= 1e-6 * abs(deriv)


# 7 ---------------------------------------------------------------------------

SANDWICH_SETS = [
    # (c, k, lam, mu); rho = k/2; all have Re(kappa)/c <= 1
    (1.0, 2, 1.0, 0.0),
    (1.0, 1, 0.5, 0.0),
    (2.0, 3, 1.0, 0.5j),
    (1.0, 2, 0.8, 0.3 + 0.4j),
    (1.5, 4, 1.0, 0.2),
]
# round-off allowance for |Phi_hat(t)| near t = 0 where the band is narrower than 1 ulp
ROUNDOFF = 1e-12


@criterion(7, "sandwich bound exp(-+3 rho t^(2Re kappa/c)) along integrate_hat, t <= 0.4")
@pytest.mark.parametrize("c, k, lam, mu", SANDWICH_SETS)
def test_c07_sandwich(c, k, lam, mu):
    system = rm.build_system(lam, mu, c=c, k=k)
    assert system.rho == k / 2
    v = rm.eigenvector(system, -1)
    traj = rm.integrate_hat(system, 0.4, v, steps=801, t_start=1e-10)
    ratio = np.linalg.norm(traj.phi_hat, axis=1) / np.linalg.norm(v)
    lo, hi = rm.sandwich_bounds(system, traj.t)
    assert np.all(traj.t <= 0.4 + 1e-15)
    assert np.all(ratio >= lo * (1 - ROUNDOFF))
    assert np.all(ratio <= hi * (1 + ROUNDOFF))


# 8, 9 ------------------------------------------------------------------------

WEYL_N = [2, 4, 8, 16, 32]


def _weyl_sweep(p, s, squared):
    fn = hw.weyl_ratio_squared if squared else hw.weyl_ratio
    return [fn(hw.WeylConfig(k=3, p=p, s=s, sign=1, n=n)) for n in WEYL_N]


def _check_sweep(results):
    ratios = [r.ratio for r in results]
    assert all(a > b for a, b in zip(ratios, ratios[1:])), ratios
    assert ratios[-1] < 0.15 * ratios[0]
    for r in results:
        assert r.ratio <= r.analytic_bound, (r.n, r.ratio, r.analytic_bound)


@criterion(8, "Weyl ratios for D: decreasing, ratio(32) < 0.15 ratio(2), below bound")
@pytest.mark.parametrize("p", [1.0, INF])
@pytest.mark.parametrize("s", [0.0, 1.0])
def test_c08_weyl_dirac(p, s):
    _check_sweep(_weyl_sweep(p, s, squared=False))


@criterion(9, "Weyl ratios for D^2 and vanishing c_n coefficient")
@pytest.mark.parametrize("p", [1.0, INF])
@pytest.mark.parametrize("s", [0.0, 1.0])
def test_c09_weyl_squared(p, s):
    cfg = hw.WeylConfig(k=3, p=p, s=s, sign=1, n=2)
    assert abs(hw.squared_zeroth_coefficient(cfg.alpha, cfg.k, cfg.mu)) <= 1e-12
    _check_sweep(_weyl_sweep(p, s, squared=True))


# 10 --------------------------------------------------------------------------

@criterion(10, "ball integral finite iff p > 2; k=2, p=3 gives 1/3")
@pytest.mark.parametrize("k", [2, 3])
@pytest.mark.parametrize("p", [1.0, 1.5, 2.0, 2.2, 3.0, 4.0])
def test_c10_ball(k, p):
    result = hw.ball_harmonic_integral(k, p)
    assert result.divergent == (not p > 2)
    if k == 2 and p == 3.0:
        assert abs(result.value - 1.0 / 3.0) <= 1e-9


# 11 --------------------------------------------------------------------------

@criterion(11, "circle spectrum vs 512-point discretisation, second-order convergence")
@pytest.mark.parametrize("structure", ["nontrivial", "trivial"])
def test_c11_circle_oracle(structure):
    L = 2 * math.pi
    exact = np.sort(np.abs(circle_spectrum(L, structure).eigenvalues))[:6]

    def error(N):
        return np.max(np.abs(discretized_circle_abs_spectrum(L, structure, N)[:6] - exact))

    fine, coarse = error(512), error(256)
    assert fine <= 1e-3
    assert 3.0 <= coarse / fine <= 5.0


# 12 --------------------------------------------------------------------------

@criterion(12, "symmetries: -mu, conj mu, dual exponent, squaring")
def test_c12_symmetries():
    rng = np.random.default_rng(12)
    for _ in range(10):
        p = INF if rng.uniform() < 0.2 else float(rng.uniform(1.0, 6.0))
        region = sr.SpectralRegion(c=float(rng.uniform(0.2, 2.0)), k=int(rng.integers(1, 5)),
                                   lambda0=float(rng.uniform(0.0, 3.0)), p=p)
        mus = _disk_samples(rng, 1000, 6.0)
        for mu in mus:
            report = sr.symmetry_transforms(region, mu)
            assert report.contains_mu == report.contains_neg == report.contains_conj, mu
            assert report.dual_symmetric, mu
            assert report.square_consistent, mu


# 13 --------------------------------------------------------------------------

CLI_RUNS = {
    "region_json": ["region", "--c", "1", "--k", "2", "--lambda0", "2", "--p", "1", "--format", "json"],
    "region_svg": ["region", "--lambda0", "0", "0.5", "2", "--p", "1", "--format", "svg"],
    "region_csv": ["region", "--lambda0", "1", "--p", "inf", "--format", "csv"],
    "membership": ["membership", "--lambda0", "0.5", "--p", "1", "--mu", "0.3,0.5"],
    "compare_csv": ["compare-laplacian", "--k", "3", "--p", "1.5"],
    "compare_svg": ["compare-laplacian", "--k", "2", "--p", "1", "--format", "svg"],
    "radial": ["radial", "--r-end", "12", "--window", "6,12"],
    "weyl": ["weyl", "--k", "2", "--p", "1", "--n-list", "2,4"],
    "ball": ["ball", "--k", "2", "3"],
}


@criterion(13, "CLI output byte-identical across runs; three-panel SVG")
@pytest.mark.parametrize("name", sorted(CLI_RUNS))
def test_c13_cli_determinism(name, tmp_path):
    blobs = []
    for attempt in range(2):
        out = tmp_path / f"{name}-{attempt}.out"
        code = cli.main(CLI_RUNS[name] + ["--out", str(out)])
        assert code == 0
        blobs.append(out.read_bytes())
    assert blobs[0] == blobs[1]
    assert len(blobs[0]) > 0
    if name == "region_svg":
        text = blobs[0].decode("utf-8")
        panels = re.split(r'<g class="panel"', text)[1:]
        assert len(panels) == 3
        for panel in panels:
            assert 'class="boundary"' in panel


@criterion(13, "CLI output byte-identical across runs; three-panel SVG")
def test_c13_cli_parallel_env(tmp_path, monkeypatch):
    args = ["weyl", "--k", "2", "--p", "inf", "--n-list", "2,4,8"]
    blobs = []
    for threads in ("1", "3"):
        monkeypatch.setenv(cli.THREADS_ENV, threads)
        out = tmp_path / f"weyl-{threads}.csv"
        assert cli.main(args + ["--out", str(out)]) == 0
        blobs.append(out.read_bytes())
    assert blobs[0] == blobs[1]
