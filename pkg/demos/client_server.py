"""Serve a random message file over TCP and run a few retrievals against it."""

import numpy as np

from iplt.dataset import generate_dataset
from iplt.client import retrieve
from iplt.server import start_background

dataset = generate_dataset(20, 13, seed=7)
server = start_background(dataset)
print("server on", server.address)
try:
    for W, L in [((2, 4, 5, 7, 8, 10, 11, 12), 3), ((2, 4, 5, 7, 8, 10), 3), ((1, 20), 1)]:
        result = retrieve(server.address, W, L=L, seed=1)
        print("\n".join(result.summary()))
        ok = np.array_equal(result.Z, result.demand.evaluate(dataset.X))
        print("matches local evaluation:", ok)
        print()
finally:
    server.shutdown()
    server.server_close()
