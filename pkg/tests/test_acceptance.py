"""Acceptance criteria, one test each.

Every test records a pass/fail line in conftest.ACCEPTANCE_LINES (shown in the
terminal summary) and prints it, then asserts.
"""
import json
import math
import shutil
import time

import numpy as np

import oracles
from conftest import ACCEPTANCE_LINES, mean_max_confidence, random_prediction_set, separable_fixture
from test_cli import GOLDEN_FILES, regenerate
from xlcalib import (
    BinningSpec,
    LanguageProfile,
    accuracy,
    apply_temperature,
    calibration_report,
    ece,
    fit_temperature,
    generate_synthetic,
    nll,
)
from xlcalib.cli import main
from xlcalib.io import load_predictions, load_profiles, load_report_dir
from xlcalib.langfeatures import Vocabulary, correlate_factors, pearson, subword_overlap
from xlcalib.smoothing import SmoothingSpec, TrainConfig, continue_finetune, ls_cross_entropy, ls_gradient, \
    smooth_labels, train


def record(criterion, passed, detail):
    ACCEPTANCE_LINES.append((criterion, bool(passed), detail))
    print(f"[{'PASS' if passed else 'FAIL'}] {criterion}: {detail}")
    assert passed, detail


def test_1_ece_oracle_equivalence():
    rng = np.random.default_rng(2024)
    start = time.perf_counter()
    worst = 0.0
    for i in range(200):
        ps = random_prediction_set(rng)
        M = int(rng.integers(1, 11))
        scheme = ("equal-width", "equal-mass")[i % 2]
        got = ece(ps, BinningSpec(M, scheme))
        want = oracles.ece(ps.logits.tolist(), ps.labels.tolist(), M, scheme)
        worst = max(worst, abs(got - want))
    elapsed = time.perf_counter() - start
    record("1 ECE oracle equivalence", worst <= 1e-12 and elapsed < 5,
           f"max |diff| = {worst:.3g} over 200 sets, {elapsed:.2f}s")


def test_2_calibrated_sampler():
    start = time.perf_counter()
    values = [ece(generate_synthetic(100_000, num_classes=3, logit_scale=1.0, seed=seed)[1], BinningSpec(10))
              for seed in range(20)]
    elapsed = time.perf_counter() - start
    hits = sum(v < 0.01 for v in values)
    record("2 calibrated sampler", hits >= 19 and elapsed < 10,
           f"ECE < 0.01 in {hits}/20 seeds (max {max(values):.4f}), {elapsed:.2f}s")


def test_3_temperature_recovery():
    details, ok = [], True
    for c in (0.5, 2.0, 4.0):
        start = time.perf_counter()
        _, dev = generate_synthetic(10_000, logit_scale=c, seed=7)
        model = fit_temperature(dev)
        _, grid_nll = oracles.grid_search_temperature(dev.logits, dev.labels)
        elapsed = time.perf_counter() - start
        rel = abs(model.T - c) / c
        ok &= rel < 0.05 and model.dev_nll <= grid_nll + 0.01 and elapsed < 5
        details.append(f"c={c}: T={model.T:.4f} ({rel:.2%}), NLL-grid={model.dev_nll - grid_nll:+.2e}, "
                       f"{elapsed:.2f}s")
    record("3 temperature recovery", ok, "; ".join(details))


def test_4_ts_safety():
    rng = np.random.default_rng(4)
    sets = [random_prediction_set(rng, n=int(rng.integers(2, 200))) for _ in range(100)]
    sets += [generate_synthetic(2000, logit_scale=c, seed=s)[1] for s, c in enumerate((0.3, 1.0, 3.0, 8.0))]
    acc_ok = nll_ok = 0
    for ps in sets:
        model = fit_temperature(ps)
        scaled = apply_temperature(ps, model)
        acc_ok += accuracy(scaled) == accuracy(ps)
        nll_ok += nll(ps, model.T) <= nll(ps) + 1e-9
    n = len(sets)
    record("4 TS safety", acc_ok == n and nll_ok == n,
           f"accuracy unchanged {acc_ok}/{n}, NLL(T*) <= NLL(1) + 1e-9 {nll_ok}/{n}")


def test_5_improvement_ordering():
    start = time.perf_counter()
    self_ts_wins = 0
    for seed in range(40):
        _, target = generate_synthetic(10_000, logit_scale=2.0, seed=1000 + seed, language="xx")
        dev, test = target.subset(np.arange(5000)), target.subset(np.arange(5000, 10_000))
        T = fit_temperature(dev).T
        self_ts_wins += ece(test, T=T) < ece(test)
    fsl_wins = 0
    for seed in range(40):
        src, _ = generate_synthetic(2000, seed=100 + seed)
        fewshot, _ = generate_synthetic(500, domain_shift=2.0, seed=200 + seed)
        test, _ = generate_synthetic(2000, domain_shift=2.0, seed=300 + seed)
        config = TrainConfig(learning_rate=0.01, epochs=5, seed=seed, smoothing=SmoothingSpec(0.0))
        base = train(src, config)
        adapted = continue_finetune(base, fewshot, config)
        fsl_wins += nll(adapted.predictions(test)) < nll(base.predictions(test))
    elapsed = time.perf_counter() - start
    record("5 improvement ordering", self_ts_wins >= 38 and fsl_wins >= 36 and elapsed < 60,
           f"Self-TS < OOB in {self_ts_wins}/40, FSL lowers NLL in {fsl_wins}/40, {elapsed:.2f}s")


def test_6_label_smoothing():
    examples = [((1, 3, 0.1), [0.05, 0.9, 0.05]), ((0, 2, 0.0), [1.0, 0.0]),
                ((0, 4, 0.3), [0.7, 0.1, 0.1, 0.1])]
    exact = all(np.allclose(smooth_labels(y, K, SmoothingSpec(a)), want, rtol=0, atol=1e-15)
                for (y, K, a), want in examples)

    rng = np.random.default_rng(6)
    worst = 0.0
    for _ in range(100):
        K = int(rng.integers(2, 7))
        logits = rng.normal(scale=2.0, size=K)
        label = int(rng.integers(K))
        spec = SmoothingSpec(float(rng.uniform(0, 0.5)))
        g = ls_gradient(logits, label, spec)
        fd = np.array([oracles.central_difference(
            lambda t, k=k: ls_cross_entropy(np.where(np.arange(K) == k, t, logits), label, spec), logits[k])
            for k in range(K)])
        worst = max(worst, np.linalg.norm(fd - g) / np.linalg.norm(g))

    data = separable_fixture()
    lower = 0
    for seed in range(10):
        hard = train(data, TrainConfig(learning_rate=0.05, epochs=50, seed=seed, smoothing=SmoothingSpec(0.0)))
        soft = train(data, TrainConfig(learning_rate=0.05, epochs=50, seed=seed, smoothing=SmoothingSpec(0.1)))
        lower += mean_max_confidence(soft, data) < mean_max_confidence(hard, data)
    record("6 label smoothing", exact and worst < 1e-6 and lower == 10,
           f"examples exact={exact}, max FD rel err {worst:.2e}, lower confidence {lower}/10 seeds")


def test_7_factor_analysis(data_dir):
    def v(*tokens):
        return Vocabulary(frozenset(tokens), 1)

    swo = (subword_overlap(v("a", "b", "c"), v("b", "c", "d")) == 0.5
           and subword_overlap(v("a", "b"), v("a", "b")) == 1.0
           and subword_overlap(v("a"), v("b")) == 0.0)
    closed = (abs(pearson([1, 2, 3], [2, 4, 6]) - 1) <= 1e-12
              and abs(pearson([1, 2, 3], [-1, -2, -3]) + 1) <= 1e-12
              and abs(pearson([1, 2, 3], [1, 3, 2]) - 0.5) <= 1e-12
              and abs(pearson([1, 2, 3, 4], [1, 3, 2, 4]) - 0.8) <= 1e-12)

    eces = {"en": 0.05, "de": 0.10, "fr": 0.12, "ru": 0.15, "sw": 0.20}
    profiles = {lang: LanguageProfile(lang, size_tokens=math.exp(10 - 20 * e)) for lang, e in eces.items()}
    linear = correlate_factors(eces, profiles, "en")["SIZE"].r

    d = data_dir / "factors"
    reports = load_report_dir(d / "reports")
    shipped = correlate_factors({lang: r.ece for lang, r in reports.items()},
                                load_profiles(d / "sizes.csv", d / "syn.csv", d / "corpora"), "en")
    rs = {f: res.r for f, res in shipped.items()}
    negative = all(r is not None and r < 0 for r in rs.values())
    record("7 factor analysis", swo and closed and abs(linear + 1) <= 1e-12 and negative,
           f"SWO exact={swo}, pearson closed-form={closed}, linear r={linear!r}, "
           f"fixture " + ", ".join(f"{f}={r:.3f}" for f, r in rs.items()))


def test_8_cli_end_to_end(tmp_path, data_dir, capsys, monkeypatch):
    shutil.copytree(data_dir / "fixture", tmp_path / "fixture")
    (tmp_path / "golden" / "reports").mkdir(parents=True)
    monkeypatch.chdir(tmp_path)
    regenerate(capsys)
    mismatched = [name for name in GOLDEN_FILES
                  if (tmp_path / "golden" / name).read_bytes() != (data_dir / "golden" / name).read_bytes()]

    T = json.loads((tmp_path / "golden" / "en.temp.json").read_text())["T"]
    assert main(["ece", "--test", "golden/en.scaled.jsonl", "--out", "a.json"]) == 0
    assert main(["ece", "--test", "fixture/en.jsonl", "--temp", repr(T), "--out", "b.json"]) == 0
    capsys.readouterr()
    a = json.loads((tmp_path / "a.json").read_text())["report"]
    b = json.loads((tmp_path / "b.json").read_text())["report"]
    diff = max(abs(a["ece"] - b["ece"]), abs(a["nll"] - b["nll"]))
    # the same property on an independent larger set, through the library
    ps = load_predictions(tmp_path / "fixture" / "en.dev.jsonl")
    model = fit_temperature(ps)
    lib = abs(calibration_report(apply_temperature(ps, model)).ece - calibration_report(ps, T=model.T).ece)
    diff = max(diff, lib)
    record("8 CLI end-to-end", not mismatched and diff <= 1e-12 and a["accuracy"] == b["accuracy"],
           f"{len(GOLDEN_FILES) - len(mismatched)}/{len(GOLDEN_FILES)} golden files identical"
           f"{' (differ: ' + ', '.join(mismatched) + ')' if mismatched else ''}, path diff {diff:.2g}")
