# coding: utf-8

# # How the tuner bandwidth changes control effort
#
# beta sets how fast the applied estimate follows the intermediate one. Small
# beta enlarges the robustness margin (2/beta)|psi|^2; large beta brings the
# tuner close to the gradient law. Values with beta < alpha / min(Gamma) fail
# the gain condition and are skipped.

# In[1]:

from adaptive_safety import build, check_conditions, load_scenario, run


# In[2]:

base = load_scenario("di_compare")
print(" beta    gate   min h    l2 effort   smoothness")
for beta in (0.005, 0.01, 0.05, 0.5, 5.0):
    cfg = base.replace(beta=beta)
    gate = check_conditions(cfg)
    if not gate.passed:
        print(f"{beta:6g}  FAIL   ({', '.join(e.name for e in gate.failed)})")
        continue
    s = run(build(cfg)).summary
    print(f"{beta:6g}  pass  {s['min_h']:.4f}  {s['l2_effort']:10.1f}  {s['smoothness']:11.0f}")
