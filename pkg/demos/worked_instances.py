"""Replay the two F_13 worked instances and show the matrices they produce."""

import numpy as np

from iplt import gen_query
from iplt.fixtures import INSTANCES, replay


def show(title, M):
    print(title)
    for row in np.asarray(M):
        print("   " + " ".join(f"{int(v):>2}" for v in row))


for number, inst in INSTANCES.items():
    print(f"=== instance {number}: {inst.name}")
    query, state = gen_query(inst.demand(), np.random.default_rng(0), fixtures=inst.fixtures)
    show("query matrix G:", query.G)
    print("pi:", " ".join(f"{l}->{int(c)}" for l, c in enumerate(query.pi, start=1)))
    if state.combiner:
        print("combiner scalars:", state.combiner, " block scalars:", state.alpha.tolist())
    if state.recovery is not None:
        show("recovery matrix E:", state.recovery)
    report = replay(number)
    print("\n".join(report.lines()))
    print()
