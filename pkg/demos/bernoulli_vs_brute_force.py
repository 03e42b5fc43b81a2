"""Solve a few random Bernoulli instances and compare with the exhaustive optimum.

The scheme may spend up to p + eps of overflow, so its profit can beat the
best subset that respects the original budget p.
"""

from stochknap.generators import generate
from stochknap.oracles import brute_force_opt, exact_overflow
from stochknap.scheme_bernoulli import solve_bernoulli

for seed in range(5):
    inst = generate("bernoulli", 10, seed=seed)
    sol = solve_bernoulli(inst)
    opt = brute_force_opt(inst)
    over = exact_overflow(inst.subset_dists(sol.selected), inst.capacity)
    print(f"seed {seed}: capacity {inst.capacity}, budget p = {float(inst.p):.2f}, eps = {float(inst.epsilon)}")
    print(f"  scheme  picks {list(sol.selected)} profit {sol.total_profit} overflow {float(over):.4f}"
          f" via the {sol.diagnostics['branch']} branch")
    print(f"  optimum picks {list(opt.subset)} profit {opt.profit} overflow {float(opt.overflow):.4f}")
