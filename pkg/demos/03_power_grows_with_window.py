"""
Power grows with the window
===========================

One check compares ``n - floor(0.8 n)`` samples from before a drift with as
many from after it. As n grows the statistic separates from its resampling
null and the rejection rate climbs towards 1. On a stationary stream the
same procedure should flag at most about alpha of the time.

Each trial here fits a fresh model, so this takes a minute or two.
"""

from modeldrift import DetectorConfig, StreamSpec
from modeldrift.evaluation import power_curve

config = DetectorConfig(alpha=0.05, K=100)
sizes = [100, 250, 500]

drifting = StreamSpec("sine", 2, drift_points=(1,), seed=1)
stationary = StreamSpec("sine", 2, seed=1)

print("window  power  size")
power = dict(power_curve(drifting, sizes, 30, config, standardize=True))
size = dict(power_curve(stationary, sizes, 30, config, standardize=True, require_drift=False))
for n in sizes:
    print(f"{n:6d}  {power[n]:5.2f}  {size[n]:4.2f}")
