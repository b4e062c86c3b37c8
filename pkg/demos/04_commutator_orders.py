# %% [markdown]
# # Measuring operator orders of the weighted commutator
#
# [J^a d_x1; phi] is an operator of order a.  Subtracting its principal
# part drops the measured order to a-1, and subtracting the first
# correction as well drops it to a-2.  Orders are measured as log-log
# slopes of output norms over random band-limited probes on annuli
# |xi| in [N, 2N).  Expect about half a minute per alpha at 256^2.

# %%
import numpy as np

from fzklab.spectral import Grid
from fzklab.symbols import (
    SymbolExpansion, commutator_apply, commutator_minus_principal, order_probe,
)
from fzklab.weights import GridBumpWeight

grid = Grid.square(2, 256, 1.0)
weight = GridBumpWeight(grid, (1.0, 0.0), up=(0.06, 0.38), down=(0.56, 0.38))
scales = [4, 8, 16, 32]
rng = np.random.default_rng(0)

for alpha in (1.0, 1.5):
    expansion = SymbolExpansion.build(alpha, weight, 2)
    full = order_probe(lambda f: commutator_apply(alpha, weight, f),
                       grid, scales, rng, probes_per_scale=8)
    r1 = order_probe(commutator_minus_principal(alpha, expansion, ["alpha"]),
                     grid, scales, rng, probes_per_scale=8)
    r2 = order_probe(
        commutator_minus_principal(alpha, expansion, ["alpha", "alpha_minus_1"]),
        grid, scales, rng, probes_per_scale=8)
    print(f"alpha={alpha}:")
    print(f"  commutator slope          {full.slope:+.3f}   (nominal {alpha:+.1f})")
    print(f"  minus principal part      {r1.slope:+.3f}   (nominal {alpha - 1:+.1f})")
    print(f"  minus first correction    {r2.slope:+.3f}   (nominal {alpha - 2:+.1f})")
