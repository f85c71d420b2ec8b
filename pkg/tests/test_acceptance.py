"""Acceptance gate: one test (and one pass/fail line) per top-level criterion.

Each criterion is checked at its stated tolerance against an independent
oracle where the expected value is derived rather than asserted directly.
"""

import json
import re
import time

import numpy as np
import pytest
from click.testing import CliRunner

from paretolab import bench, campaign, embed, fls, gp, pal
from paretolab.cli import main as cli_main


def _report(name, detail):
    print(f"[ACCEPTANCE] {name}: PASS ({detail})")


# --- criterion 1: Binh-Korn benchmark reproduction --------------------------


def test_binh_korn_benchmark_reproduction():
    records = bench.run_binh_korn_suite(n_runs=20, epsilon=0.01, max_total_evaluations=40)
    converged = sum(r["converged"] and r["samples"] <= 40 for r in records)
    covered = sum(r["coverage"] for r in records)
    slowest = max(r["seconds"] for r in records)
    assert converged >= 18, f"only {converged}/20 runs converged within 40 evaluations"
    assert covered >= 19, f"only {covered}/20 runs covered the exact grid front"
    assert slowest < 60.0, f"slowest run took {slowest:.1f}s"
    _report(
        "Binh-Korn reproduction",
        f"converged {converged}/20, coverage {covered}/20, max {slowest:.2f}s",
    )


# --- criterion 2: GP oracle equivalence -------------------------------------


def test_gp_oracle_equivalence():
    rng = np.random.default_rng(2024)
    worst_pred = 0.0
    for _ in range(50):
        X = rng.uniform(size=(10, 3))
        y = rng.normal(size=10)
        params = gp.KernelParams(
            float(rng.uniform(0.5, 2.0)),
            rng.uniform(0.2, 1.5, size=3),
            float(rng.uniform(1e-4, 1e-1)),
        )
        model = gp.fit(X, y, gp.FitConfig(fixed_params=params))
        q = rng.uniform(size=3)
        pred = gp.predict(model, q)
        # dense linear-solve oracle on the standardized targets
        ys = (y - model.y_mean) / model.y_std
        K = gp._kernel_matrix(X, X, params) + params.noise_variance * np.eye(10)
        k = np.array([gp.kernel_eval(x, q, params) for x in X])
        mean = float(k @ np.linalg.solve(K, ys)) * model.y_std + model.y_mean
        var = params.signal_variance - float(k @ np.linalg.solve(K, k))
        std = np.sqrt(max(var, 0.0)) * model.y_std
        worst_pred = max(worst_pred, abs(pred.mean - mean), abs(pred.std - std))
        assert pred.mean == pytest.approx(mean, abs=1e-8)
        assert pred.std == pytest.approx(std, abs=1e-8)

    worst_grad = 0.0
    for _ in range(20):
        X = rng.uniform(size=(5, 2))
        y = rng.normal(size=5)
        params = gp.KernelParams(
            float(rng.uniform(0.5, 2.0)),
            rng.uniform(0.2, 1.5, size=2),
            float(rng.uniform(1e-3, 1e-1)),
        )
        _, grad = gp.log_marginal_likelihood(X, y, params)
        theta = gp._pack(params)
        h = 1e-6
        for j in range(theta.size):
            tp, tm = theta.copy(), theta.copy()
            tp[j] += h
            tm[j] -= h
            lp, _ = gp.log_marginal_likelihood(X, y, gp._unpack(tp, 2))
            lm, _ = gp.log_marginal_likelihood(X, y, gp._unpack(tm, 2))
            fd = (lp - lm) / (2 * h)
            rel = abs(grad[j] - fd) / max(abs(fd), 1e-7)
            worst_grad = max(worst_grad, rel)
            assert grad[j] == pytest.approx(fd, rel=1e-4, abs=1e-7)
    _report(
        "GP oracle equivalence",
        f"worst predict error {worst_pred:.2e}, worst gradient rel error {worst_grad:.2e}",
    )


# --- criterion 3: classification degeneracy ---------------------------------


def test_classification_degeneracy():
    rng = np.random.default_rng(7)
    failures = 0
    for _ in range(100):
        V = rng.normal(size=(20, 2 + int(rng.integers(0, 2))))
        ranges = np.column_stack((V.min(axis=0), V.max(axis=0)))
        classes = pal.classify(
            V, V, np.zeros(V.shape[1]), ranges, np.zeros(20, dtype=np.int8)
        )
        got = set(np.flatnonzero(classes == pal.Classification.PARETO_OPTIMAL))
        undecided = int(np.sum(classes == pal.Classification.UNDECIDED))
        if got != set(pal.pareto_front(V)) or undecided != 0:
            failures += 1
    assert failures == 0, f"{failures}/100 instances diverged from the exact front"
    _report("classification degeneracy", "100/100 instances match the exact front")


# --- criterion 4: fuzzy linguistic summaries --------------------------------


def _fixed_fls_setup():
    """200-record synthetic dataset, 5 variables, 3 quantifiers, 4 qualifiers."""
    variables = {
        "v1": fls.LinguisticVariable("v1", (0.0, 1.0)),
        "v2": fls.LinguisticVariable("v2", (0.0, 1.0)),
        "v3": fls.LinguisticVariable("v3", (0.0, 1.0)),
        "v4": fls.LinguisticVariable("v4", (1000.0, 8000.0), label="spin speed"),
        "v5": fls.LinguisticVariable("v5", (0.0, 1.0)),
    }
    qualifiers = [
        fls.Qualifier("pareto_optimal", "class", category="pareto_optimal"),
        fls.Qualifier("discarded", "class", category="discarded"),
        fls.Qualifier("undecided", "class", category="undecided"),
        fls.Qualifier("high_uncertainty", "uncertainty", trapezoid=(0.5, 0.7, 1.0, 1.0)),
    ]
    rng = np.random.default_rng(123)
    classes = ["pareto_optimal"] * 80 + ["discarded"] * 90 + ["undecided"] * 30
    records = []
    for i in range(200):
        rec = {
            name: float(rng.uniform(*var.domain)) for name, var in variables.items()
        }
        rec["class"] = classes[i]
        rec["uncertainty"] = float(rng.uniform(0.0, 1.0))
        records.append(rec)
    return variables, qualifiers, records


def _interp_term_matrix(variable, column):
    """Triangular memberships via np.interp: an independent evaluation path."""
    peaks = variable.peaks()
    out = {}
    for i, term in enumerate(variable.terms):
        if i == 0:
            xp, fp = [peaks[0], peaks[1]], [1.0, 0.0]
        elif i == len(peaks) - 1:
            xp, fp = [peaks[-2], peaks[-1]], [0.0, 1.0]
        else:
            xp, fp = [peaks[i - 1], peaks[i], peaks[i + 1]], [0.0, 1.0, 0.0]
        out[term] = np.interp(column, xp, fp)
    return out


def _piecewise_trapezoid(x, a, b, c, d):
    x = np.asarray(x, dtype=float)
    rising = (x - a) / (b - a) if b > a else 1.0
    falling = (d - x) / (d - c) if d > c else 1.0
    return np.select(
        [x < a, x < b, x <= c, x <= d],
        [0.0, rising, 1.0, falling],
        default=0.0,
    )


def test_fuzzy_linguistic_summaries():
    variables, qualifiers, records = _fixed_fls_setup()

    # partition of unity at 10,000 random points per variable
    rng = np.random.default_rng(9)
    for var in variables.values():
        xs = rng.uniform(*var.domain, size=10_000)
        total = sum(
            np.array([fls.term_membership(var, t, x) for x in xs]) for t in var.terms
        )
        assert np.max(np.abs(total - 1.0)) < 1e-9

    statements = fls.enumerate_statements(
        variables, fls.DEFAULT_QUANTIFIERS, qualifiers, 3
    )
    assert len(statements) == 18312
    evaluated = fls.evaluate_statements(statements, variables, records)

    # independent direct-summation oracle (np.interp terms, piecewise trapezoids)
    term_mu = {}
    for name, var in variables.items():
        column = np.array([rec[name] for rec in records])
        for term, mu in _interp_term_matrix(var, column).items():
            term_mu[(name, term)] = mu
    class_col = np.array([rec["class"] for rec in records])
    unc_col = np.array([rec["uncertainty"] for rec in records])
    qual_mu = {
        "pareto_optimal": (class_col == "pareto_optimal").astype(float),
        "discarded": (class_col == "discarded").astype(float),
        "undecided": (class_col == "undecided").astype(float),
        "high_uncertainty": _piecewise_trapezoid(unc_col, 0.5, 0.7, 1.0, 1.0),
    }
    n = len(records)
    worst = 0.0
    for st in evaluated:
        mu_p = np.ones(n)
        for pair in st.summarizer:
            mu_p = np.minimum(mu_p, term_mu[pair])
        mu_r = qual_mu[st.qualifier.name]
        numerator = float(np.sum(np.minimum(mu_p, mu_r)))
        denom = float(np.sum(mu_p)) if st.summarizer else float(n)
        if denom == 0.0:
            expected = 0.0
        else:
            a, b, c, d = st.quantifier.trapezoid
            expected = float(_piecewise_trapezoid(numerator / denom, a, b, c, d))
        worst = max(worst, abs(st.truth - expected))
    assert worst <= 1e-12, f"worst truth deviation {worst:.2e}"

    # simplify: idempotent, and no surviving same-(Q,R) specialization remains
    pruned = fls.simplify(evaluated, 0.8)
    assert fls.simplify(pruned, 0.8) == pruned
    survivors = {
        (s.quantifier.name, s.qualifier.name): [] for s in pruned
    }
    for s in pruned:
        survivors[(s.quantifier.name, s.qualifier.name)].append(frozenset(s.summarizer))
    eligible = [s for s in evaluated if s.truth >= 0.8]
    kept_keys = {
        (s.quantifier.name, s.qualifier.name, frozenset(s.summarizer)) for s in pruned
    }
    for s in eligible:
        group = survivors.get((s.quantifier.name, s.qualifier.name), [])
        has_ancestor = any(anc < frozenset(s.summarizer) for anc in group)
        kept = (s.quantifier.name, s.qualifier.name, frozenset(s.summarizer)) in kept_keys
        assert kept == (not has_ancestor)

    # report shape at threshold 0.95 on a dataset with a "some" front share
    shaped = fls.simplify(evaluated, 0.95)
    report = fls.render_report(shaped, variables)
    assert re.search(r"^## (Few|Some|Many) ", report.markdown, re.M)
    assert "some are pareto optimal points." in report.markdown
    _report(
        "fuzzy linguistic summaries",
        f"18312 statements, worst oracle deviation {worst:.2e}, "
        f"{len(shaped)} statements at threshold 0.95",
    )


# --- criterion 5: embedding quality ------------------------------------------


def test_embedding_quality():
    cfg = campaign.GridConfig()
    points = campaign.build_grid(cfg)
    assert len(points) == 1375
    X = campaign.normalized_design_matrix(points, cfg)
    t0 = time.perf_counter()
    Y = embed.embed_points(X, embed.EmbedConfig(seed=0))
    elapsed = time.perf_counter() - t0
    assert elapsed < 120.0, f"embedding took {elapsed:.1f}s"

    trust = embed.trustworthiness(X, Y, k=15)
    assert trust >= 0.90, f"trustworthiness {trust:.4f}"

    labels = np.array([f"{p.spin_speed}:{p.dilution}" for p in points])
    purity = embed.neighbor_label_purity(Y, labels, k=10)
    assert purity >= 0.8, f"neighbor label purity {purity:.3f}"

    Y2 = embed.embed_points(X, embed.EmbedConfig(seed=0))
    assert np.array_equal(Y, Y2), "embedding is not bit-identical across repeats"
    _report(
        "embedding quality",
        f"trustworthiness {trust:.4f}, purity {purity:.3f}, {elapsed:.1f}s",
    )


# --- criterion 6: end-to-end surrogate campaign ------------------------------


def _noise_free_values(state):
    return np.array(
        [
            bench.surrogate_closed_form(
                p.c_pvp10, p.c_pvp40, p.c_pvp360, p.normalized_speed, p.dilution
            )
            for p in state.points
        ]
    )


def _run_surrogate_campaign(run, max_evaluations=120):
    state = campaign.new_campaign(seed=run, epsilon=0.1)
    state.beta_scale = 0.4
    campaign.run_campaign(
        state,
        lambda p: bench.surrogate_spincoat(p, seed=1000 + run),
        max_evaluations=max_evaluations,
        n_initial=3,
    )
    return state


def test_end_to_end_surrogate_campaign():
    converged = 0
    covered = 0
    evals = []
    truth = None
    coverage = None
    for run in range(20):
        state = _run_surrogate_campaign(run)
        if truth is None:
            truth = _noise_free_values(state)
            _, coverage = bench.brute_force_epareto(truth, state.epsilon)
        evals.append(len(state.measurements))
        if state.converged and len(state.measurements) <= 120:
            converged += 1
        if coverage(truth[state.pareto_ids()]):
            covered += 1
    assert converged == 20, f"only {converged}/20 campaigns converged within 120 evals"
    assert covered >= 18, f"only {covered}/20 campaigns epsilon-cover the true front"

    # save/load is lossless and an interrupted run resumes identically
    run = 3
    direct = _run_surrogate_campaign(run)
    partial = _run_surrogate_campaign(run, max_evaluations=45)
    saved = campaign.save(partial)
    resumed = campaign.load(saved)
    assert campaign.save(resumed) == saved, "save/load round trip is lossy"
    campaign.run_campaign(
        resumed,
        lambda p: bench.surrogate_spincoat(p, seed=1000 + run),
        max_evaluations=120,
        n_initial=3,
    )
    assert resumed.converged == direct.converged
    assert sorted(resumed.measurements) == sorted(direct.measurements)
    assert np.array_equal(resumed.classes, direct.classes)
    assert np.array_equal(resumed.means, direct.means)
    assert resumed.pareto_ids() == direct.pareto_ids()
    _report(
        "end-to-end surrogate campaign",
        f"converged {converged}/20 (median {int(np.median(evals))} evals), "
        f"coverage {covered}/20, resume identical",
    )


# --- criterion 7: CLI contract -----------------------------------------------


def test_cli_contract(tmp_path):
    runner = CliRunner()

    # benchmark suite through the CLI entry point
    result = runner.invoke(
        cli_main, ["bench", "--runs", "20", "--max-evaluations", "40"]
    )
    assert result.exit_code == 0, result.output
    lines = result.output.strip().splitlines()
    records = [json.loads(line) for line in lines if not line.startswith("#")]
    assert sum(r["converged"] and r["samples"] <= 40 for r in records) >= 18
    assert sum(r["coverage"] for r in records) >= 19

    # scripted campaign workflow: init, ingest, step, suggest, explain, embed
    path = str(tmp_path / "c.json")
    result = runner.invoke(
        cli_main,
        [
            "init",
            "--campaign",
            path,
            "--epsilon",
            "0.1",
            "--simplex-denominator",
            "3",
            "--speeds",
            "1000,4000,8000",
            "--dilutions",
            "0,0.5,1",
        ],
    )
    assert result.exit_code == 0, result.output
    state = campaign.load_from_file(path)
    state.burn_in = 6
    rng = np.random.default_rng(0)
    rows = ["point_id,hardness,inverse_elasticity,note"]
    for pid in rng.choice(state.n_points, 8, replace=False):
        h, ie = bench.surrogate_spincoat(state.points[int(pid)], seed=5)
        rows.append(f"{int(pid)},{h},{ie},")
    campaign.save_to_file(state, path)
    csv = tmp_path / "m.csv"
    csv.write_text("\n".join(rows) + "\n")
    for args in (
        ["ingest", "--campaign", path, str(csv)],
        ["step", "--campaign", path, "--no-report", "--no-embedding"],
        ["suggest", "--campaign", path],
        ["status", "--campaign", path],
        ["explain", "--campaign", path, "--threshold", "0.5", "--out", str(tmp_path / "r.md")],
        ["embed", "--campaign", path, "--out", str(tmp_path / "e.jsonl")],
    ):
        result = runner.invoke(cli_main, args)
        assert result.exit_code == 0, f"{args[0]} failed: {result.output}"

    _report("CLI contract", "bench suite and scripted workflow ran without the service")
