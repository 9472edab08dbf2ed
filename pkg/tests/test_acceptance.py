"""Acceptance criteria 1-8, each checked at its stated tolerance.

Every test records a ``criterion`` property; the summary hook in
``conftest.py`` prints one PASS/FAIL line per criterion at the end of the
run.  Measured values are recorded as ``detail`` before asserting, so the
summary shows them for failures too.
"""

import math
import time
from dataclasses import replace

import numpy as np
import pytest

from paulistab.converter import REFERENCE_CONVERTER, REFERENCE_GRID, build_minor_loop, retune_pll_bandwidth
from paulistab.dataio import export_models, load_config, reference_config_path, run_analysis, with_overrides
from paulistab.freqresp import FrequencyGrid, Rational, make_log_grid
from paulistab.oracles import closed_loop_eigs, matrix_det2, matrix_eig2, matrix_inv2
from paulistab.pauli import PauliQuaternion, QuaternionElement, decompose, q_inverse, q_mul, recompose, semi_norm_sq
from paulistab.stability import (
    characteristic_via_loop,
    contributions,
    eigenvalues,
    minor_loop,
    passivity_index,
    rank_root_causes,
)

from conftest import random_complex


@pytest.fixture(scope="module")
def cfg():
    return load_config(reference_config_path())


@pytest.fixture(scope="module")
def reference_run(cfg):
    t0 = time.perf_counter()
    result = run_analysis(cfg)
    return result, time.perf_counter() - t0


@pytest.fixture(scope="module")
def retuned_run(cfg):
    return run_analysis(with_overrides(cfg, pll_bandwidth_override=20.0))


def test_criterion_1a_unstable_verdict(reference_run, record_property):
    r = reference_run[0].report
    record_property("criterion", "1a")
    record_property("detail", f"verdict={r.verdict} encirclements={r.encirclements}")
    assert r.verdict == "unstable"
    assert r.encirclements != 0


def test_criterion_1b_critical_frequency(reference_run, record_property):
    r = reference_run[0].report
    record_property("criterion", "1b")
    record_property("detail", f"f_c={r.f_c:.2f} Hz (target 325 +- 2)")
    assert abs(r.f_c - 325.0) <= 2.0


def test_criterion_1c_runtime(reference_run, record_property):
    elapsed = reference_run[1]
    record_property("criterion", "1c")
    record_property("detail", f"analysis took {elapsed:.2f} s (limit 5 s)")
    assert elapsed < 5.0


def test_criterion_2_root_cause_ranking(reference_run, record_property):
    r = reference_run[0].report
    mags = {k: abs(v) for k, v in r.breakdown.terms.items()}
    ranking = rank_root_causes(r.breakdown)
    record_property("criterion", "2")
    record_property(
        "detail",
        f"at f_c={r.f_c:.1f} Hz: " + " ".join(f"|{k}|={v:.3g}" for k, v in mags.items())
        + f" first={ranking[0][0]}",
    )
    for big in ("l0", "l3"):
        for small in ("l1", "l2"):
            assert mags[big] > mags[small], (big, small)
    assert ranking[0][0] in ("l0", "l3")


def test_criterion_3_stabilization(retuned_run, record_property):
    r = retuned_run.report
    p = retune_pll_bandwidth(REFERENCE_CONVERTER, 20.0)
    record_property("criterion", "3")
    record_property(
        "detail",
        f"Kp={p.kp_pll:.4f} Ki={p.ki_pll:.2f} verdict={r.verdict} encirclements={r.encirclements}",
    )
    assert r.verdict == "stable"
    assert r.encirclements == 0


def test_criterion_4_oracle_agreement(record_property):
    unstable = closed_loop_eigs(REFERENCE_CONVERTER, REFERENCE_GRID, pade_order=4)
    stable = closed_loop_eigs(retune_pll_bandwidth(REFERENCE_CONVERTER, 20.0), REFERENCE_GRID, pade_order=4)
    rhp = unstable[unstable.real > 0]
    target = 2 * math.pi * 325
    freqs = np.abs(rhp.imag)
    record_property("criterion", "4")
    record_property(
        "detail",
        "330 Hz PLL RHP eigs at "
        + ", ".join(f"{v.real:.1f}{v.imag / (2 * math.pi):+.1f}j Hz" for v in rhp if v.imag >= 0)
        + f"; 20 Hz PLL max Re={stable.real.max():.2f} 1/s",
    )
    assert rhp.size >= 1
    assert np.any(np.abs(freqs - target) <= 0.15 * target)
    assert np.all(stable.real < 0)


def test_criterion_5_algebraic_properties(record_property):
    rng = np.random.default_rng(5)
    n_per = 2000  # five properties x 2000 samples = 10 000 randomized samples
    worst = {}

    def scale_of(M):
        return np.abs(M).max(axis=(-2, -1))

    # round trip
    M = random_complex(rng, (n_per, 2, 2))
    worst["round_trip"] = np.max(np.abs(recompose(decompose(M)) - M).max(axis=(1, 2)) / scale_of(M))

    # product
    z = PauliQuaternion(*(random_complex(rng, n_per) for _ in range(4)))
    y = PauliQuaternion(*(random_complex(rng, n_per) for _ in range(4)))
    Z, Y = recompose(z), recompose(y)
    got = recompose(q_mul(z, y))
    want = Z @ Y
    worst["q_mul"] = np.max(np.abs(got - want).max(axis=(1, 2)) / (scale_of(Z) * scale_of(Y)))

    # semi-norm vs det, and multiplicativity
    q = PauliQuaternion(*(random_complex(rng, n_per) for _ in range(4)))
    Q = recompose(q)
    worst["semi_norm_vs_det"] = np.max(np.abs(semi_norm_sq(q) - matrix_det2(Q)) / scale_of(Q) ** 2)
    zy = q_mul(z, y)
    worst["multiplicativity"] = np.max(
        np.abs(semi_norm_sq(zy) - semi_norm_sq(z) * semi_norm_sq(y)) / (scale_of(Z) * scale_of(Y)) ** 2
    )

    # eigenvalues
    L = PauliQuaternion(*(random_complex(rng, n_per) for _ in range(4)))
    l1, l2 = eigenvalues(L)
    m1, m2 = matrix_eig2(recompose(L))
    s = np.maximum(np.abs(m1), np.abs(m2))
    d = np.minimum(
        np.maximum(np.abs(l1 - m1), np.abs(l2 - m2)),
        np.maximum(np.abs(l1 - m2), np.abs(l2 - m1)),
    )
    worst["eigenvalues"] = np.max(d / s)

    # inverse
    q = PauliQuaternion(*(random_complex(rng, n_per) for _ in range(4)))
    keep = np.abs(semi_norm_sq(q)) > 1e-9 * scale_of(recompose(q)) ** 2
    q = q[keep]
    inv_q = recompose(q_inverse(q))
    inv_m = matrix_inv2(recompose(q))
    worst["q_inverse"] = np.max(np.abs(inv_q - inv_m).max(axis=(1, 2)) / scale_of(inv_m))

    record_property("criterion", "5")
    record_property("detail", " ".join(f"{k}={v:.1e}" for k, v in worst.items()))
    assert worst["round_trip"] <= 1e-15
    for k in ("q_mul", "semi_norm_vs_det", "eigenvalues", "q_inverse"):
        assert worst[k] <= 1e-10, k
    assert worst["multiplicativity"] <= 1e-12


def test_criterion_6_characteristic_equation(reference_run, record_property):
    r = reference_run[0].report
    tr = r.trace
    m = build_minor_loop(REFERENCE_CONVERTER, REFERENCE_GRID)
    Z, Y = recompose(tr.z), recompose(tr.y)
    det = matrix_det2(np.eye(2) + Z @ Y)
    via_loop = characteristic_via_loop(tr.L)
    scale = np.maximum.reduce([np.abs(tr.L_char), np.abs(det), np.abs(via_loop)])
    e1 = np.max(np.abs(tr.L_char - via_loop) / scale)
    e2 = np.max(np.abs(tr.L_char - det) / scale)
    e3 = np.max(np.abs(via_loop - det) / scale)
    b = contributions(m.z, m.y, 2 * math.pi * r.f_c)
    e4 = abs(1 + sum(b.terms.values()) - b.L_at_wc) / abs(b.L_at_wc)
    record_property("criterion", "6")
    record_property("detail", f"{len(tr)} samples: max rel {max(e1, e2, e3):.1e}; contribution sum {e4:.1e}")
    assert max(e1, e2, e3) <= 1e-10
    assert e4 <= 1e-10


@pytest.mark.parametrize("pll_bw", [None, 20.0])
def test_criterion_7_measured_round_trip(cfg, tmp_path, pll_bw, record_property):
    c = with_overrides(cfg, pll_bandwidth_override=pll_bw)
    analytic = run_analysis(c).report
    conv, grid = export_models(c, tmp_path)
    measured = run_analysis(with_overrides(c, measured=(str(conv), str(grid)))).report
    record_property("criterion", "7" + ("" if pll_bw is None else "b"))
    record_property(
        "detail",
        f"pll_bw={pll_bw or 330} Hz: analytic {analytic.verdict} f_c={analytic.f_c:.3f}, "
        f"measured {measured.verdict} f_c={measured.f_c:.3f}",
    )
    assert measured.verdict == analytic.verdict
    assert abs(measured.f_c - analytic.f_c) <= 1.0


def test_criterion_8_passivity(reference_run, record_property):
    grid = make_log_grid(10, 2000, 200)
    rl_admittance = QuaternionElement.scalar(Rational((1.0,), (3e-3, 0.5)))
    _, rho_rl = passivity_index(rl_admittance, grid)
    f, rho_c = reference_run[0].passivity
    neg = f[rho_c < 0]
    record_property("criterion", "8")
    record_property(
        "detail",
        f"RL min rho={rho_rl.min():.3g}; converter min rho={rho_c.min():.3g} "
        f"at {f[np.argmin(rho_c)]:.0f} Hz, negative over {neg.min():.0f}-{neg.max():.0f} Hz",
    )
    assert np.all(rho_rl >= 0)
    assert np.any(rho_c < 0)
