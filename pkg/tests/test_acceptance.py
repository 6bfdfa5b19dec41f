"""The seven acceptance criteria, one test each.

Every test prints a single ``criterion N PASS|FAIL`` line (also collected into
the terminal summary) before asserting, so a failing criterion still reports
what it measured.
"""

import filecmp
import json
import os
import subprocess
import sys
import time
from fractions import Fraction as F

from conftest import ACCEPTANCE_LINES

from advcalc.risk import LabeledDistribution
from advcalc.strings import StringUniverse, string_adversarial_risk, string_oracle_search, swap_family
from advcalc.suites import SUITES, run_suite, suite_cases

SEED = 7


def report(n, title, ok, detail, elapsed, limit):
    budget = f"{elapsed:.1f}s of {limit}s" if limit else f"{elapsed:.1f}s, no time limit"
    line = f"criterion {n} {'PASS' if ok else 'FAIL'}: {title} ({detail}; {budget})"
    print(line)
    ACCEPTANCE_LINES.append(line)
    return ok


def timed_suite(name, **kw):
    t0 = time.perf_counter()
    run = run_suite(name, SEED, **kw)
    return run, time.perf_counter() - t0


def failing(run):
    return [f"{r.case_id}:{r.check}" for r in run.rows if r.status != "pass"][:5]


def test_criterion_1_identity_suite():
    run, dt = timed_suite("identities")
    cases = suite_cases("identities", SEED)
    eps_seen = {p["eps"] for _, _, p in cases}
    parts = max(len(p["A"]["data"]) for _, c, p in cases if "A" in p)
    fam = max(len(p["family"]) for _, c, p in cases if c == "family_relations")
    families = len(run.summary())
    shape_ok = eps_seen <= {"1/4", "1/3", "1/2", "1"} and parts <= 8 and fam <= 5 and families == 8
    ok = run.failures == 0 and shape_ok and dt < 30
    detail = f"{len(run.rows)} checks over {SUITES['identities']} sets, {families} families, {run.failures} failures {failing(run)}"
    assert report(1, "exact 1-D identity suite", ok, detail, dt, 30), detail


def test_criterion_2_grid_suite():
    run, dt = timed_suite("grid")
    checks = {r.check for r in run.rows}
    want = {"extensive", "monotone", "duality", "padding_invariant", "compose", "l2_counterexample"}
    ok = run.failures == 0 and checks == want and dt < 30
    detail = f"{len(run.rows)} checks on {SUITES['grid']} 32x32 masks, {run.failures} failures {failing(run)}"
    assert report(2, "grid morphology suite", ok, detail, dt, 30), detail


def test_criterion_3_risk_inequalities():
    run, dt = timed_suite("risk")
    ok = run.failures == 0 and dt < 60
    detail = f"{len(run.rows)} checks on {SUITES['risk']} triples, {run.failures} violations {failing(run)}"
    assert report(3, "exact risk inequalities", ok, detail, dt, 60), detail


def test_criterion_4_oracle_and_mollifier():
    run, dt = timed_suite("optimize")
    two = [r for r in run.rows if r.case_id == "two_atom" and r.check == "oracle_value"]
    two_ok = len(two) == 1 and two[0].status == "pass" and two[0].lhs == "1/2"
    ok = run.failures == 0 and two_ok and dt < 300
    detail = f"{SUITES['optimize']} instances, {len(run.rows)} checks, {run.failures} failures, two-atom best {two[0].lhs if two else '?'}"
    assert report(4, "oracle optimality and mollified minimizer", ok, detail, dt, 300), detail


def test_criterion_5_gauge_suite():
    run, dt = timed_suite("gauge")
    worst = {}
    for name, n, f, v in run.summary():
        worst[name.split(".", 1)[1]] = v
    ok = run.failures == 0 and dt < 60
    detail = ", ".join(f"{k} {v:.1e}" for k, v in worst.items()) + f"; {run.failures} failures {failing(run)}"
    assert report(5, "gauge probes", ok, detail, dt, 60), detail


def test_criterion_6_strings_suite():
    run, dt = timed_suite("strings")
    U = StringUniverse("ab", 2)
    D = LabeledDistribution([("ab", F(1, 2), 1), ("ba", F(1, 2), 0)])
    B = swap_family([(1, 2)])
    t0 = time.perf_counter()
    risk_ab = string_adversarial_risk({"ab"}, D, B, U)
    best = string_oracle_search(D, B, U)
    dt += time.perf_counter() - t0
    ok = run.failures == 0 and risk_ab == 1 and best.best_risk == F(1, 2) and dt < 30
    detail = (
        f"{len(run.rows)} checks, {run.failures} failures; R({{'ab'}}) = {risk_ab}, "
        f"optimum {best.best_risk} at {sorted(best.best_set)} (expected 1/2)"
    )
    assert report(6, "string swap suite", ok, detail, dt, 30), detail


# reduced case counts keep two full passes over every suite short
DETERMINISM_CASES = {"identities": 100, "grid": 30, "risk": 60, "optimize": 10, "gauge": 2000, "strings": 40}


def cli(*args):
    return subprocess.run([sys.executable, "-m", "advcalc", *args], capture_output=True, text=True)


def test_criterion_7_cli_determinism(tmp_path):
    t0 = time.perf_counter()
    problems = []
    for suite, n in DETERMINISM_CASES.items():
        for run in ("a", "b"):
            proc = cli("suite", suite, "--seed", str(SEED), "--cases", str(n), "--out", str(tmp_path / run))
            if proc.returncode != 0:
                problems.append(f"{suite} exit {proc.returncode}")
    names = sorted(os.listdir(tmp_path / "a"))
    match, mismatch, errors = filecmp.cmpfiles(tmp_path / "a", tmp_path / "b", names, shallow=False)
    problems += [f"differs: {m}" for m in mismatch + errors]
    # forced failure: exit 1, a witness file, and a replay that reproduces it
    out = tmp_path / "inject"
    proc = cli("suite", "identities", "--seed", str(SEED), "--cases", "10", "--inject-failure", "--out", str(out))
    witnesses = sorted((out / "witnesses").glob("*.json")) if (out / "witnesses").exists() else []
    if proc.returncode != 1:
        problems.append(f"inject exit {proc.returncode}")
    if len(witnesses) != 1:
        problems.append(f"{len(witnesses)} witness files")
    else:
        body = json.loads(witnesses[0].read_text())
        rep = cli("replay", str(witnesses[0]))
        if rep.returncode != 1 or not rep.stdout.startswith("reproduced:"):
            problems.append(f"replay exit {rep.returncode}: {rep.stdout.strip()}")
        if body.get("check") != "closing_is_identity":
            problems.append("witness names the wrong check")
    dt = time.perf_counter() - t0
    ok = not problems
    detail = f"{len(match)} artifacts byte-identical across 2 runs of {len(DETERMINISM_CASES)} suites; forced failure exit {proc.returncode}"
    if problems:
        detail += f"; problems {problems}"
    assert report(7, "CLI determinism and replayable witnesses", ok, detail, dt, None), detail
