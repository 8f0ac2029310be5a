"""Learned scores, and how the set widens when the signal is weak.

Without the true densities we fit them from the data. The "gaussian" score
fits a normal to each segment of the candidate split; "kde" uses a kernel
density estimate instead. Both keep the p-values valid, and they cost some
sharpness compared with the oracle.
"""

from croc import build_constraint_one_early, run_croc
from croc.simgen import gen_setting, setting1, setting2
from croc.study import make_score, run_coverage

X, xi, model = gen_setting(setting1(seed=11))
R = build_constraint_one_early(80, 10, 20, 50)

for name in ("oracle", "gaussian", "kde"):
    S = make_score(name, model, xi, 10)
    res = run_croc(X, R, S, alpha=0.1, M=100, seed=0)
    print(f"{name:9s} set = {[k + 1 for k in res.members]}  ({res.elapsed:.1f}s)")

# Replicate to see average behaviour. 60 reps keeps this quick; the test
# suite runs 300.
print("\nreps=60, gaussian score, croc")
for label, spec in (("setting 1 (moderate)", setting1()), ("setting 2 (weak)", setting2())):
    s = run_coverage(spec, "gaussian", "croc", alpha=0.1, M=100, reps=60, seed=1)
    print(f"  {label:22s} coverage {s['coverage']:.2f}  mean size {s['mean_set_size']:.2f}")
