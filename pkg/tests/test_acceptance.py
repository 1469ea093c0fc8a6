"""Acceptance criteria 1-10.  Each test is tagged with its criterion and the
conftest summary prints one PASS/FAIL line per criterion.

Run standalone with `python3 tests/test_acceptance.py`.
"""
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from tcgsim import composer as comp
from tcgsim import library as lib
from tcgsim import tomography as tomo
from tcgsim.circuit import Circuit, circuit_unitary, simulate, truth_table
from tcgsim.cli import main
from tcgsim.core import HilbertSpace, state_fidelity
from tcgsim.noise import DeviceConfig
from tcgsim.verify import golden_checks

sys.path.insert(0, str(Path(__file__).parent))
from conftest import session_elapsed  # noqa: E402

GOLDEN_TOL = 1e-12
ORACLE_TOL = 1e-9
SHOTS = 5000


def _detail(record_property, text):
    record_property("detail", text)


# ---------------------------------------------------------------- 1

@pytest.mark.criterion("1")
def test_c01_golden_matrices(record_property):
    t0 = time.perf_counter()
    rows = golden_checks()
    dt = time.perf_counter() - t0
    bad = [f"{r.name}={r.residual:.2e}" for r in rows if r.residual > GOLDEN_TOL]
    _detail(record_property, f"{len(rows)} entries, runtime {dt:.2f} s, over {GOLDEN_TOL:g}: {bad or 'none'}")
    names = {r.name for r in rows}
    assert {"cu", "spcu", "cu_com", "cu_prime", "cu_qutrit", "swap_com", "swap", "cu_phase_extended"} <= names
    assert next(r for r in rows if r.name == "cu").points == 81
    assert dt < 1.0
    assert not bad


# ---------------------------------------------------------------- 2

def _population_oracle(theta):
    # control |1> rotates the target populations by sin^2(theta/2)
    c, s = np.cos(theta / 2) ** 2, np.sin(theta / 2) ** 2
    m = np.eye(4)
    m[2:, 2:] = [[c, s], [s, c]]
    return m


@pytest.mark.criterion("2")
def test_c02_truth_tables(record_property):
    worst_exact, worst_sigma = 0.0, 0.0
    for theta in (0.0, np.pi / 2, np.pi):
        c = Circuit((3, 3)).append("cu", (0, 1), theta=theta, phi=0.0)
        m0 = _population_oracle(theta)
        exact = truth_table(c).matrix
        worst_exact = max(worst_exact, float(np.abs(exact - m0).max()))
        for seed in range(5):
            sampled = truth_table(c, shots=SHOTS, seed=seed).matrix
            sigma = np.sqrt(m0 * (1 - m0) / SHOTS)
            dev = np.abs(sampled - m0)
            assert np.all(dev[sigma == 0] == 0)
            worst_sigma = max(worst_sigma, float(np.max(dev[sigma > 0] / sigma[sigma > 0], initial=0.0)))
    _detail(record_property, f"exact residual {worst_exact:.1e}, worst sampled deviation {worst_sigma:.2f} sigma")
    assert worst_exact <= GOLDEN_TOL
    assert worst_sigma <= 3.0


# ---------------------------------------------------------------- 3

@pytest.mark.criterion("3")
def test_c03_scans(record_property):
    t0 = time.perf_counter()
    thetas = np.linspace(0, 2 * np.pi, 33)
    rot = np.array([r["P10"] for r in lib.rotation_scan(thetas)])
    r_rot = float(np.abs(rot - np.sin(thetas / 2) ** 2).max())
    phis = np.linspace(0, 2 * np.pi, 33)
    r_phase, r_echo = 0.0, 0.0
    for phi0 in (0.0, 0.37, -1.1):
        ph = np.array([r["P10"] for r in lib.phase_scan(phis, phi0)])
        ec = np.array([r["P10"] for r in lib.echo_phase_scan(phis, phi0)])
        r_phase = max(r_phase, float(np.abs(ph - np.cos(phis + phi0) ** 2).max()))
        r_echo = max(r_echo, float(np.abs(ec - np.cos(2 * (phis + phi0)) ** 2).max()))
        # periods pi and pi/2: grid step is pi/16
        assert np.abs(ph[16:] - ph[:17]).max() <= GOLDEN_TOL
        assert np.abs(ec[8:] - ec[:25]).max() <= GOLDEN_TOL
        assert np.abs(ph[8:] - ph[:25]).max() > 0.5
    dt = time.perf_counter() - t0
    _detail(record_property, f"rotation {r_rot:.1e}, phase {r_phase:.1e}, echo {r_echo:.1e}, runtime {dt:.2f} s")
    assert max(r_rot, r_phase, r_echo) <= GOLDEN_TOL
    assert dt < 1.0


# ---------------------------------------------------------------- 4

TABLE_FORMULAS = {
    ("GHZ", "CZ"): lambda m: (2 * m - 1, m - 1, 2 * m - 1),
    ("GHZ", "CU"): lambda m: (1, m - 1, m),
    ("W", "CZ"): lambda m: (5 * m - 6, 3 * m - 5, 6 * m - 9),
    ("W", "CU"): lambda m: (2, 2 * m - 3, 2 * m - 1),
}


@pytest.mark.criterion("4")
def test_c04_depth_accounting(record_property):
    rows = lib.depth_rows(10)
    got = {(r["circuit"], r["scheme"], r["m"]): (r["N1q"], r["N2q"], r["depth"]) for r in rows}
    mismatches = [(k, got[k + (m,)], f(m)) for k, f in TABLE_FORMULAS.items() for m in range(3, 11)
                  if got[k + (m,)] != f(m)]
    cliff, tcg = got[("comparator", "Clifford", 4)], got[("comparator", "TCG", 4)]
    red = lambda fam, m: 1 - got[(fam, "CU", m)][2] / got[(fam, "CZ", m)][2]
    red_cmp = 1 - tcg[2] / cliff[2]
    _detail(record_property, f"{len(mismatches)} formula mismatches, comparator {cliff} vs {tcg}, "
                             f"reductions GHZ {red('GHZ', 3):.1%} W {red('W', 3):.1%} comparator {red_cmp:.0%}")
    assert not mismatches
    assert cliff == (22, 12, 25) and tcg == (8, 6, 7)
    assert red_cmp == pytest.approx(0.72, abs=1e-12)
    assert red("GHZ", 3) == pytest.approx(0.40, abs=1e-12)
    assert red("W", 3) == pytest.approx(4 / 9, abs=1e-12)


# ---------------------------------------------------------------- 5

def _comparison_row(a, b):
    """Flags (a > b, a < b) of two one-bit numbers."""
    return int(a > b), int(a < b)


@pytest.mark.criterion("5")
def test_c05_comparator(record_property):
    c = lib.comparator_circuit()
    u = circuit_unitary(c)
    unit = float(np.abs(u.conj().T @ u - np.eye(u.shape[0])).max())
    sp = c.space
    worst = 0.0
    for gt in (0, 1):
        for a in (0, 1):
            for b in (0, 1):
                for lt in (0, 1):
                    fg, fl = _comparison_row(a, b)
                    col = u[:, sp.index((gt, a, b, lt))]
                    exp_idx = sp.index((gt ^ fg, a, b, lt ^ fl))
                    worst = max(worst, 1 - abs(col[exp_idx]) ** 2)
    me = truth_table(c).matrix
    f = tomo.truth_table_fidelity(me, lib.comparator_reference_table())
    _detail(record_property, f"unitarity {unit:.1e}, worst row miss {worst:.1e}, F(d=16) = {f:.12f}")
    assert unit <= GOLDEN_TOL
    assert worst <= GOLDEN_TOL
    assert me.shape == (16, 16)
    assert f == pytest.approx(1.0, abs=GOLDEN_TOL)


# ---------------------------------------------------------------- 6

@pytest.mark.criterion("6")
def test_c06_frame_identity(record_property):
    zetas = np.linspace(0, 2 * np.pi, 16, endpoint=False)
    res = max(comp.path_independence_check(z, s) for z in zetas for s in (0, 1))
    _detail(record_property, f"16 zeta values, both control sites, max residual {res:.1e}")
    assert res <= GOLDEN_TOL


# ---------------------------------------------------------------- 7

def _random_state(rng, n, rank):
    g = rng.normal(size=(2 ** n, rank)) + 1j * rng.normal(size=(2 ** n, rank))
    r = g @ g.conj().T
    return r / np.trace(r)


def _embed_state(rho2, n):
    sp = HilbertSpace((3,) * n)
    idx = sp.computational_indices()
    full = np.zeros((sp.dim, sp.dim), dtype=complex)
    full[np.ix_(idx, idx)] = rho2
    return full


def _random_unitary(rng, d):
    z = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def _chi_of_kraus(ks):
    chi = np.zeros((16, 16), dtype=complex)
    for k in ks:
        chi += tomo.chi_of_unitary(k)
    return chi


@pytest.mark.criterion("7")
def test_c07_tomography_oracles(record_property):
    rng = np.random.default_rng(7)
    worst_qst = 0.0
    for n in (2, 3):
        for rank in (1, 2, 2 ** n):
            rho = _random_state(rng, n, rank)
            est = tomo.qst_from_rho(_embed_state(rho, n), (3,) * n).matrix
            worst_qst = max(worst_qst, float(np.abs(est - rho).max()))
    worst_qpt = 0.0
    for _ in range(4):
        u4 = _random_unitary(rng, 4)
        u9 = np.eye(9, dtype=complex)
        idx = HilbertSpace((3, 3)).computational_indices()
        u9[np.ix_(idx, idx)] = u4
        u9[np.ix_([2, 5, 6, 7, 8], [2, 5, 6, 7, 8])] = _random_unitary(rng, 5)
        chi = tomo.qpt(u9)
        worst_qpt = max(worst_qpt, float(np.abs(chi.chi - tomo.chi_of_unitary(u4)).max()))
        assert chi.fidelity(tomo.ChiMatrix(tomo.chi_of_unitary(np.exp(0.8j) * u4))) == pytest.approx(1, abs=ORACLE_TOL)
    # random CPTP channels from Stinespring dilations
    for _ in range(3):
        v = _random_unitary(rng, 16)[:, :4]
        ks = [v[4 * j:4 * j + 4, :] for j in range(4)]
        outs = []
        for a, b in tomo.INPUT_LABELS:
            psi = np.kron(tomo._INPUT_VECS[a], tomo._INPUT_VECS[b])
            rho = np.outer(psi, psi.conj())
            outs.append(sum(k @ rho @ k.conj().T for k in ks))
        chi = tomo.chi_from_outputs(outs)
        worst_qpt = max(worst_qpt, float(np.abs(chi.chi - _chi_of_kraus(ks)).max()))
    f_id = tomo.process_fidelity(tomo.qpt(comp.cu(np.pi, np.pi)).chi, tomo.chi_of_unitary(comp.cu(np.pi, np.pi).restricted.matrix))
    _detail(record_property, f"QST residual {worst_qst:.1e}, QPT residual {worst_qpt:.1e}, F(identical) = {f_id:.12f}")
    assert worst_qst <= ORACLE_TOL
    assert worst_qpt <= ORACLE_TOL
    assert f_id == pytest.approx(1.0, abs=ORACLE_TOL)


# ---------------------------------------------------------------- 8

@pytest.mark.criterion("8")
def test_c08_feedback(record_property):
    st = tomo.feedback_calibrate(np.pi, np.pi, dtheta=0.1, max_iter=5)
    runs = [tomo.feedback_calibrate(np.pi, np.pi, dtheta=0.1, max_iter=5, shots=SHOTS, seed=s) for s in range(10)]
    med = float(np.median([r.fidelity for r in runs]))
    med_params = float(np.median([r.param_history[-1] for r in runs]))
    _detail(record_property, f"exact: F={st.fidelity:.6f} after {st.iterations} iterations; "
                             f"{SHOTS} shots: median F={med:.4f}, median F of applied parameters={med_params:.5f}")
    assert st.converged and st.iterations <= 5 and st.fidelity >= 0.999
    assert med >= 0.99
    assert med_params >= 0.99


# ---------------------------------------------------------------- 9

@pytest.mark.criterion("9a")
def test_c09a_error_trend_vs_theta(record_property):
    nm = DeviceConfig.default().noise_model(order=[0, 1], leak_rate=0.01)
    thetas = np.linspace(0, np.pi, 7)
    phis = np.linspace(0, 2 * np.pi, 4, endpoint=False)
    err = np.zeros((thetas.size, phis.size))
    for i, th in enumerate(thetas):
        for j, ph in enumerate(phis):
            c = Circuit((4, 3)).append("cu", (0, 1), theta=float(th), phi=float(ph))
            chi0 = tomo.chi_of_unitary(comp.cu(th, ph).restricted.matrix)
            err[i, j] = 1 - tomo.qpt(c, noise=nm).fidelity_with_loss(chi0)
    mean = err.mean(axis=1)
    phi_spread = float((err.max(axis=1) - err.min(axis=1)).max())
    theta_spread = float(mean.max() - mean.min())
    _detail(record_property, f"1-F from {mean[0]:.5f} to {mean[-1]:.5f}, phi spread {phi_spread:.1e}")
    assert np.all(np.diff(err, axis=0) >= -1e-12)
    assert phi_spread < theta_spread


@pytest.mark.criterion("9b")
def test_c09b_identity_sequence_ordering(record_property):
    base = DeviceConfig.default().noise_model(order=[0, 1])
    rows = lib.decoherence_comparison(np.geomspace(2, 50, 5), np.geomspace(2, 50, 5), base=base)
    bad = [f"{r['kind']}({r['initial']}, {r['value']:.3g}): CZ {r['CZ']:.3f} CU {r['CU']:.3f} CNOT {r['CNOT']:.3f}"
           for r in rows if not (r["CZ"] >= r["CU"] - 1e-12 and r["CU"] >= r["CNOT"] - 1e-12)]
    _detail(record_property, f"{len(rows) - len(bad)}/{len(rows)} rows ordered CZ >= CU >= CNOT; "
                             f"violations: {bad[:2]}{' ...' if len(bad) > 2 else ''}")
    assert not bad


PREP_GRIDS = {
    "GHZ": (lib.ghz_circuit, lib.ghz_state, (0.0, np.pi / 2, np.pi, 3 * np.pi / 2)),
    "W": (lib.w_circuit, lib.w_state, (0.0, 0.5, 1.0, np.sqrt(2))),
}


@pytest.fixture(scope="module")
def prep_fidelities():
    nm = DeviceConfig.default().noise_model(order=[0, 1, 2])
    out = {}
    for fam, (build, target, grid) in PREP_GRIDS.items():
        for x in grid:
            for scheme in lib.PREP_SCHEMES:
                out[(fam, x, scheme)] = state_fidelity(simulate(build(3, x, scheme), noise=nm), target(3, x))
    return out


@pytest.mark.criterion("9c")
def test_c09c_cu_prep_beats_cz(record_property, prep_fidelities):
    f = prep_fidelities
    gaps = {fam: min(f[(fam, x, "CU")] - f[(fam, x, "CZ")] for x in PREP_GRIDS[fam][2]) for fam in PREP_GRIDS}
    _detail(record_property, "min CU-CZ gap " + ", ".join(f"{k} {v:+.4f}" for k, v in gaps.items()))
    assert all(v >= 0 for v in gaps.values())


@pytest.mark.criterion("9d")
def test_c09d_spcu_prep_vs_cu(record_property, prep_fidelities):
    f = prep_fidelities
    gaps = {fam: min(f[(fam, x, "SPCU")] - f[(fam, x, "CU")] for x in PREP_GRIDS[fam][2]) for fam in PREP_GRIDS}
    _detail(record_property, "min SPCU-CU gap " + ", ".join(f"{k} {v:+.4f}" for k, v in gaps.items()))
    assert all(v >= -0.005 for v in gaps.values())


# ---------------------------------------------------------------- 10

CLI_RUNS = [
    ["verify"],
    ["depth-table", "--m-max", "6"],
    ["prepare", "--kind", "w", "--reps", "2", "--shots", "500", "--seed", "3"],
    ["prepare", "--kind", "ghz", "--sweep", "--reps", "2", "--shots", "200", "--noise"],
    ["comparator", "--reps", "2", "--shots", "200", "--seed", "5"],
    ["qpt", "--theta", "1.2", "--reps", "2", "--shots", "500", "--noise"],
    ["feedback", "--shots", "1000", "--seed", "9"],
    ["scan", "rotation", "--points", "9", "--noise"],
    ["scan", "phase", "--points", "9"],
    ["scan", "echo", "--points", "9", "--phi0", "0.3"],
    ["decohere", "--points", "2"],
]


def _run_cli(argv, out, capsys):
    code = main(argv + ["--out", str(out)])
    text = capsys.readouterr().out
    files = {p.name: p.read_bytes() for p in sorted(out.iterdir())}
    return code, text, files


@pytest.mark.criterion("10")
@pytest.mark.runs_last
def test_c10_determinism_and_runtime(record_property, tmp_path, capsys):
    differing = []
    for k, argv in enumerate(CLI_RUNS):
        a = _run_cli(argv, tmp_path / f"a{k}", capsys)
        b = _run_cli(argv, tmp_path / f"b{k}", capsys)
        assert a[2], f"{argv[0]} wrote no artifact"
        if a != b:
            differing.append(" ".join(argv))
    elapsed = session_elapsed()
    _detail(record_property, f"{len(CLI_RUNS)} CLI runs repeated, differing: {differing or 'none'}; "
                             f"suite time at this point {elapsed:.1f} s")
    assert not differing
    assert elapsed <= 120


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
