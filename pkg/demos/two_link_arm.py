# coding: utf-8

# # Two-link arm with joint limits
#
# The arm tracks qd(t) = (pi/4) sin 2t in both joints while the joint limits
# are |q_i| <= pi/6. A smooth filter turns the desired velocity into a safe
# reference velocity r, and an adaptive sliding controller tracks r.

# In[1]:

import math

import numpy as np

from adaptive_safety import build, check_conditions, load_scenario, monitor_robot, run


# Starting at rest puts the arm off the sliding manifold s = q' - r = 0, and
# the start condition flags it. Starting with q'(0) = r(0) satisfies it.

# In[2]:

rest = load_scenario("two_link")
matched = rest.replace(x0=(0.0, 0.0, math.pi / 2, math.pi / 2))
for name, cfg in (("at rest", rest), ("matched", matched)):
    print(name)
    print(check_conditions(cfg).text())


# The matched run takes about 40 s: the (2/beta) W W^T damping is stiff, so the
# integrator subdivides steps where needed.

# In[3]:

scn = build(matched)
tr = run(scn)
print(monitor_robot(tr, scn.plant, scn.gains).text())
print(f"max |q| = {np.max(np.abs(tr.x[:, :2])):.4f}  (limit {math.pi / 6:.4f})")


# In[4]:

for k in range(0, len(tr), 1000):
    q = tr.x[k, :2]
    print(f"t={tr.t[k]:5.2f}  q={np.array2string(q, precision=3)}  "
          f"|s|={np.linalg.norm(tr.s[k]):.2e}  B={tr.B[k]:+.4f}")
