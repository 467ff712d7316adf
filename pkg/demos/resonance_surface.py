"""Density sloshing in a periodically tilted double well, zero-flux walls.

A unit point mass starts at the origin of (-4, 4) and spreads under
subdiffusive dynamics (order 0.75) while the tilt -x*cos(t) of the
quartic potential rocks the two wells.  With zero-flux boundaries the
scheme conserves the discrete mass to near machine precision; the run
reports the worst deviation and saves a surface plot (the first few
milliseconds are cut, where the point source produces large spurious
oscillations).
"""

import numpy as np

from fracfp import run_resonance_demo

result = run_resonance_demo()
drift = np.max(np.abs(result.mass - 1.0))
print(f"steps: {result.times.size - 1}, dofs: {result.x.size}")
print(f"max |mass - 1| over the run: {drift:.3e}")

x, t, surface = result.surface_after(0.005)
print(f"surface kept for t >= 0.005: {surface.shape[0]} levels")

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
except ImportError:
    print("matplotlib not installed; skipping the plot")
else:
    fig = plt.figure(figsize=(8, 5))
    ax = fig.add_subplot(projection="3d")
    xx, tt = np.meshgrid(x, t)
    ax.plot_surface(xx, tt, surface, cmap="viridis", rstride=16, cstride=1,
                    linewidth=0, antialiased=True)
    ax.set_xlabel("x")
    ax.set_ylabel("t")
    ax.set_zlabel("u")
    ax.view_init(elev=35, azim=-120)
    fig.tight_layout()
    fig.savefig("resonance_surface.png", dpi=150)
    print("wrote resonance_surface.png")
