"""
What predicts calibration error?
================================

Per-language ECE can be correlated with properties of each language
relative to the pivot: how much pre-training data it has (SIZE), how
similar its syntax is (SYN) and how many frequent tokens the two
vocabularies share (SWO).
"""

# %%
from pathlib import Path

from xlcalib.io import load_profiles, load_report_dir
from xlcalib.langfeatures import correlate_factors, factor_values

factors = Path(__file__).resolve().parents[1] / "tests" / "data" / "factors"
reports = load_report_dir(factors / "reports")
profiles = load_profiles(factors / "sizes.csv", factors / "syn.csv", factors / "corpora")
eces = {lang: r.ece for lang, r in reports.items()}

# %%
# Factor values relative to English.
table = {f: factor_values(profiles, "en", f) for f in ("SIZE", "SYN", "SWO")}
print(f"{'lang':>4} {'ECE':>6} {'SIZE':>6} {'SYN':>6} {'SWO':>6}")
for lang in sorted(eces, key=eces.get):
    if lang == "en":
        continue
    row = [table[f].get(lang) for f in ("SIZE", "SYN", "SWO")]
    print(f"{lang:>4} {eces[lang]:6.3f} " + " ".join(f"{v:6.3f}" if v is not None else "     -" for v in row))

# %%
# Correlations. Languages with a missing value for a factor are dropped for
# that factor only.
for factor, res in correlate_factors(eces, profiles, "en").items():
    print(factor, f"r={res.r:.3f}" if res.available else res.reason, "dropped:", res.dropped or "-")
