"""Binned conditional-independence test on a null and an alternative.

Both datasets have X and Y driven by a shared Z. Under the null the noises
are independent; under the alternative Y reuses X's noise, so X and Y stay
dependent after conditioning on Z.

The threshold is sized for power: the Type II bound is small, while the
Type I bound at this eps and bin size is 1, so the null may well reject.
Criterion 7 of the acceptance suite shows the other trade-off.
"""

import math

from wci.binning import LipschitzConstants
from wci.bounds import BoundParams
from wci.ci_test import CIConfig, run_ci_test
from wci.datagen import FunctionSpec, NoiseSpec, ScenarioSpec, generate, support_diameter

p, eps, delta = 1.0, 0.1, 0.85
L = LipschitzConstants(0.05, 0.05, 0.05 * math.sqrt(2))
base = dict(n=8000, f=FunctionSpec(slope=0.05), g=FunctionSpec(slope=0.05), noise=NoiseSpec("two_point", a=1.0))

for name, spec in (
    ("null", ScenarioSpec("additive_null", **base)),
    ("alternative", ScenarioSpec("shared_noise_alt", rho=1.0, **base)),
):
    cfg = CIConfig(p, eps, L, delta=delta, bound_params=BoundParams(p=p, D=support_diameter(spec)),
                   require_side_condition=False, seed=1)
    rep = run_ci_test(generate(spec), cfg)
    print(f"{name}: reject={rep.reject}  type1_total={rep.type1_total:.3f}  type2_total={rep.type2_total:.4f}")
    for b in rep.tested:
        print(f"  bin {b.cell}  rows={b.n_rows:5d}  k={b.n_j:4d}  W1={b.distance:.4f}  reject={b.reject}")
    for msg in rep.warnings:
        print(f"  warning: {msg}")
