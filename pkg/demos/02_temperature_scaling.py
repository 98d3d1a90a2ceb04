"""
Temperature scaling across languages
====================================

A model fitted on a pivot language is often less calibrated on other
languages. Here a single temperature is fitted on pivot dev data and then
compared with a temperature fitted on each target language's own dev data
(Self-TS).
"""

# %%
import numpy as np

from xlcalib import aggregate, apply_temperature, calibration_report, ece, fit_temperature, generate_synthetic

# Languages are simulated by different degrees of overconfidence.
scales = {"en": 1.3, "de": 1.8, "hi": 2.6, "sw": 3.5}
data = {lang: generate_synthetic(8000, logit_scale=c, seed=i, language=lang)[1]
        for i, (lang, c) in enumerate(scales.items())}
dev = {lang: ps.subset(np.arange(4000)) for lang, ps in data.items()}
test = {lang: ps.subset(np.arange(4000, 8000)) for lang, ps in data.items()}

# %%
# Out of the box, then with the pivot's temperature, then Self-TS.
pivot_model = fit_temperature(dev["en"])
print(f"pivot T = {pivot_model.T:.3f} (converged={pivot_model.converged})")

print(f"{'lang':>4} {'OOB':>7} {'TS':>7} {'Self-TS':>8} {'T':>6}")
for lang in scales:
    own = fit_temperature(dev[lang])
    print(f"{lang:>4} {ece(test[lang]):7.4f} {ece(test[lang], T=pivot_model.T):7.4f} "
          f"{ece(test[lang], T=own.T):8.4f} {own.T:6.3f}")

# %%
# Aggregate over non-pivot languages.
reports = {lang: calibration_report(apply_temperature(test[lang], fit_temperature(dev[lang])))
           for lang in scales}
agg = aggregate(reports, "en")
print(f"mean ECE {agg.mean_ece:.4f}, max {agg.max_ece:.4f} ({agg.max_language})")

# %%
# The fitted model serialises to JSON for the command line tools.
print(pivot_model.to_json())
