"""
Empirical size under the null
=============================

Rejection rates of the test on panels without a break, laid out like a
size table: rows are (N, T), columns are the DGP, trimming and level.
A few hundred replications keep this quick; use more for a real table.
"""

from panelbreak import DgpSpec, McConfig, emit_table, run_size_table

REPS = 200

# %%
# Independent factor and errors, then AR(1) factor and errors.
results = []
for kind in ("IID", "AR1"):
    cfg = McConfig(DgpSpec(kind, t_len=200, n_len=10), reps=REPS,
                   sweep={"N": (10, 20)}, epsilons=(0.05,), master_seed=1)
    results += run_size_table(cfg)

# %%
# Entries are percentages. The 5% column should sit near 5.
print(emit_table(results, "markdown"))

# %%
# Each cell also carries its Monte Carlo standard error.
for r in results:
    if r.level == 0.05:
        print(f"{r.kind:4s} N={r.n_len:<3d} {100 * r.rejection_rate:5.1f}% +/- {100 * r.mc_stderr:.1f}")
