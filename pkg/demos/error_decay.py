"""How the error behaves as a function of time for non-smooth data.

With discontinuous initial data the solution leaves t = 0 with limited
regularity, and the spatial error grows like t**(-3*alpha/4) (up to a
logarithm) as t drops toward zero.  On a log-log plot the error series
is a straight line over the mid range; this script fits its slope and,
if matplotlib is around, saves the plot.
"""

from fracfp import error_decay_slope, run_convergence_study

alpha = 0.75
table = run_convergence_study([alpha], [7, 15, 31, 63], 255, 2000, "l2")

print("least-squares slopes of log E vs log t on t in [1e-3, 1e-1]:")
print(f"  predicted from the weighted-error theory: {-0.75 * alpha}")
for q_h in (7, 15, 31, 63):
    series = table.series[(alpha, q_h)]
    slope = error_decay_slope(series, (1e-3, 1e-1))
    print(f"  {q_h:3d} dofs: {slope:+.4f}")

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
except ImportError:
    print("matplotlib not installed; skipping the plot")
else:
    fig, ax = plt.subplots(figsize=(6, 4.5))
    for q_h in (7, 15, 31, 63):
        series = table.series[(alpha, q_h)]
        keep = series.times > 0
        ax.loglog(series.times[keep], series.errors[keep], label=f"{q_h} dofs")
    t_ref = series.times[(series.times > 1e-3) & (series.times < 1e-1)]
    ax.loglog(t_ref, 2e-4 * t_ref ** (-0.75 * alpha), "k--", label=r"slope $-3\alpha/4$")
    ax.set_xlabel("t")
    ax.set_ylabel("L2 error vs reference")
    ax.set_title(f"error decay, alpha = {alpha}")
    ax.legend()
    fig.tight_layout()
    fig.savefig("error_decay.png", dpi=150)
    print("wrote error_decay.png")
