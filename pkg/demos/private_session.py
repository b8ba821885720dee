"""One private retrieval session, in process, step by step."""

import numpy as np

from iplt import Demand, PrimeField, answer, gen_query, recover
from iplt.audit import structural_posterior

F = PrimeField(101)
rng = np.random.default_rng(42)

K = 11
X = F.random(K, rng)
print("server messages X:", X.tolist())

# The user wants 2 combinations of messages 3, 5, 9 and 10.
demand = Demand(K, (3, 5, 9, 10), [[1, 1, 1, 1], [1, 2, 3, 4]], F)
query, state = gen_query(demand, rng)
lay = state.layout
print(f"layout: case {'I' if lay.case == 1 else 'II'}, {lay.n} full blocks, last block "
      f"{lay.last_rows}x{lay.last_cols}, {query.rows} rows in total")
print("demand placed in block", state.i_star, "of", lay.num_blocks)
print("pi:", query.pi.tolist())

# The server only sees (G, pi).  Every index looks equally likely to be in W.
print("posterior Pr(i in W | query):", [str(x) for x in structural_posterior(lay, query.pi)])

ans = answer(query, X)
Z = recover(ans, state)
print("answer y:", ans.y.tolist())
print("recovered Z:", Z.tolist(), " direct V X_W:", demand.evaluate(X).tolist())
