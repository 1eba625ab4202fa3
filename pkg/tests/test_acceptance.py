"""Exit criteria.  Each test records one PASS/FAIL line, printed in the summary."""

import itertools
import math
import time

import numpy as np
import pytest

from lhvmc import cli
from lhvmc.estimators import (
    DEFAULT_GRID,
    DEFAULT_TRIALS,
    ModelParams,
    count_terms,
    detection_census,
    run_sweep_point,
)
from lhvmc.operators import SIGN_TRIPLES, build_magic_square, is_projector, joint_projector, max_abs
from lhvmc.oracle import ideal_term_values, ideal_witnesses
from lhvmc.terms import ALL_TERMS, CHI_TERMS, S_TERMS
from naive import naive_counts

TOL = 1e-12
# Every S term has at least this many post-selected trials before the location
# of the S maximum is read off; below it S sits at 12 by small-sample saturation.
RESOLVED_MIN_CONDITIONED = 1000
FIT_SEEDS = (cli.DEFAULT_SEED, 1, 2)


@pytest.fixture(scope="module")
def fit_points():
    t0 = time.perf_counter()
    points = [run_sweep_point(ModelParams(2.1, seed, DEFAULT_TRIALS)) for seed in FIT_SEEDS]
    return points, (time.perf_counter() - t0) / len(points)


def test_c1_exact_algebra(criterion):
    t0 = time.perf_counter()
    sq = build_magic_square()
    m = {o.name: o.matrix for o in sq.observables}
    eye = np.eye(4)
    dev = [
        m["A"] @ m["B"] - m["C"], m["a"] @ m["b"] - m["c"], m["A"] @ m["a"] - m["α"],
        m["B"] @ m["b"] - m["β"], m["α"] @ m["β"] - m["γ"], m["C"] @ m["c"] + m["γ"],
    ]
    worst = max(max_abs(d) for d in dev)
    for ctx in sq.contexts:
        projs = {st: joint_projector(ctx, st) for st in SIGN_TRIPLES}
        assert all(is_projector(p, TOL) for p in projs.values())
        for a, b in itertools.permutations(SIGN_TRIPLES, 2):
            worst = max(worst, max_abs(projs[a] @ projs[b]))
        worst = max(worst, max_abs(sum(projs.values()) - eye))
    cgc = sq.context("cγC")
    vanishing = [(1, 1, 1), (1, -1, -1), (-1, 1, -1), (-1, -1, 1)]
    summing = [(-1, -1, -1), (-1, 1, 1), (1, -1, 1), (1, 1, -1)]
    worst = max(worst, max_abs(sum(joint_projector(cgc, st) for st in vanishing)))
    worst = max(worst, max_abs(sum(joint_projector(cgc, st) for st in summing) - eye))
    elapsed = time.perf_counter() - t0
    criterion("C1 exact algebra", worst <= TOL and elapsed < 1.0,
              f"max deviation {worst:.1e}, {elapsed:.3f} s")


def test_c2_oracle_values(criterion):
    t0 = time.perf_counter()
    chi, s, omega = ideal_witnesses()
    values = ideal_term_values()
    worst_term = max(abs(values[t.label] - t.sign) for t in S_TERMS)
    elapsed = time.perf_counter() - t0
    ok = abs(chi - 6) <= TOL and abs(s - 12) <= TOL and abs(omega - 18) <= TOL
    criterion("C2 oracle values", ok and worst_term <= TOL and elapsed < 1.0,
              f"chi={chi:.12g} S={s:.12g} omega={omega:.12g}, {elapsed:.3f} s")


def test_c3_theorem1_suite(criterion):
    t0 = time.perf_counter()
    totals = {}
    for s in (0.25, 0.5, 0.75, 1.0):
        alice, bob = detection_census(s, 31337, 100_000)
        totals[s] = sum(alice.values()) + sum(bob.values())
    elapsed = time.perf_counter() - t0
    criterion("C3 no multi-detections for s <= 1", all(v == 0 for v in totals.values()) and elapsed < 60,
              f"{totals}, {elapsed:.1f} s")


def test_c4_chi_exact_under_post_selection(default_sweep, criterion):
    bad = []
    defined = 0
    for p in default_sweep:
        for t in CHI_TERMS:
            c = p.counts[t.label]
            if c.n_conditioned == 0:
                continue
            defined += 1
            wrong = c.n_minus if t.ctx.parity == 1 else c.n_plus
            if wrong != 0:
                bad.append((p.s, t.label))
        if p.chi is not None and p.chi != 6.0:
            bad.append((p.s, "chi"))
    criterion("C4 chi = 6 exactly under post-selection", not bad and defined > 0,
              f"{defined} defined product terms, violations {bad}")


def test_c5_fit_point(fit_points, criterion):
    points, per_run = fit_points
    detail = ", ".join(f"seed {p.seed}: S={p.S:.3f} eta={p.eta:.4f}" for p in points)
    ok = all(11.1 <= p.S <= 11.8 and 0.023 <= p.eta <= 0.043 for p in points)
    criterion("C5 fit point s=2.1", ok and per_run < 300, f"{detail}; {per_run:.1f} s per run")


def _s_error(p):
    return math.sqrt(sum(se * se for se in p.S_stderr))


def test_c6a_small_s(default_sweep, criterion):
    small = [p for p in default_sweep if p.s <= 1.4]
    s_defined = [p for p in small if p.S is not None]
    s_ok = all(abs(p.S - 12) <= 3 * _s_error(p) for p in s_defined)
    eta_ok = all(p.eta < 0.005 for p in small if p.eta is not None)
    detail = "; ".join(
        f"s={p.s}: S={'undef' if p.S is None else f'{p.S:.4f}±{_s_error(p):.4f}'} "
        f"eta={'undef' if p.eta is None else f'{p.eta:.5f}'}"
        for p in small
    )
    criterion("C6a S ~ 12 and eta < 0.005 for s <= 1.4", s_ok and eta_ok and bool(s_defined), detail)


def test_c6b_joint_peak(default_sweep, criterion):
    eta_pts = [p for p in default_sweep if p.eta is not None]
    eta_peak = max(eta_pts, key=lambda p: p.eta)
    resolved = [
        p for p in default_sweep
        if p.S is not None
        and min(p.counts[t.label].n_conditioned for t in S_TERMS) >= RESOLVED_MIN_CONDITIONED
    ]
    s_peak = max(resolved, key=lambda p: p.S)
    ok = abs(eta_peak.s - 4.5) <= 0.5 and abs(s_peak.s - 4.5) <= 0.5
    criterion("C6b joint peak of S and eta at 4.5 ± 0.5", ok,
              f"eta max {eta_peak.eta:.4f} at s={eta_peak.s}; S max {s_peak.S:.4f} at s={s_peak.s}")


def test_c6c_s_above_threshold(default_sweep, criterion):
    vals = [p.S for p in default_sweep if p.S is not None]
    criterion("C6c min S >= 10", bool(vals) and min(vals) >= 10, f"min S {min(vals):.4f}")


def test_c6d_eta_below_half(default_sweep, criterion):
    vals = [p.eta for p in default_sweep if p.eta is not None]
    criterion("C6d max eta < 0.5", bool(vals) and max(vals) < 0.5, f"max eta {max(vals):.4f}")


def test_c6e_epsilon_zero_below_one(default_sweep, criterion):
    pts = [(p.s, p.epsilon) for p in default_sweep if p.s <= 1.0 and p.epsilon is not None]
    criterion("C6e(i) epsilon = 0 for s <= 1", bool(pts) and all(e == 0.0 for _, e in pts), f"{pts}")


def test_c6e_epsilon_positive_from_1_5(default_sweep, criterion):
    pts = [(p.s, p.epsilon) for p in default_sweep if p.s >= 1.5 and p.epsilon is not None]
    zero = [s for s, e in pts if not e > 0]
    criterion("C6e(ii) epsilon > 0 for s >= 1.5", bool(pts) and not zero,
              f"epsilon = 0 at s = {zero}")


def test_c7_omega_violation(fit_points, criterion):
    points, _ = fit_points
    ok = all(p.omega > 16 and 17.1 <= p.omega <= 17.8 for p in points)
    criterion("C7 omega > 16 at s=2.1", ok, ", ".join(f"{p.omega:.3f}" for p in points))


def test_c8_naive_equivalence(criterion):
    mismatched = []
    for s, seed in ((2.1, 1), (3.5, 2), (4.5, 3)):
        ref = naive_counts(s, seed, 1000)
        got = count_terms(s, seed, 0, 1000, ALL_TERMS)
        mismatched += [(s, t.label) for t, c in zip(ALL_TERMS, got) if vars(c) != ref[t.label]]
    criterion("C8 naive reference counts identical (N=1000)", not mismatched, f"{mismatched}")


def test_c9_determinism(tmp_path, criterion):
    outputs = []
    for i, threads in enumerate((1, 1, 4)):
        path = tmp_path / f"sweep{i}.csv"
        rc = cli.main(["--threads", str(threads), "sweep", "--s-min", "1.5", "--s-max", "4.5",
                       "--s-step", "0.75", "--trials", "65536", "--seed", "11", "--out", str(path)])
        assert rc == 0
        outputs.append(path.read_bytes())
    criterion("C9 byte-identical CSV across runs and threads", outputs[0] == outputs[1] == outputs[2])
