"""Rate bounds for a range of parameters, with the converse program cross-check."""

from iplt import compute_bounds
from iplt.capacity import closed_form_converse, ilp_converse_oracle

K = 20
print(f"K={K}")
print(f"{'D':>3} {'L':>3} {'R':>3} {'S':>3} {'lower':>8} {'upper':>8} tight  ILP  closed")
for D in range(2, 11):
    for L in (1, 2, 3):
        if L > D:
            continue
        b = compute_bounds(K, D, L)
        ilp, _ = ilp_converse_oracle(K, D, L)
        print(f"{D:>3} {L:>3} {b.R:>3} {b.S:>3} {str(b.lower):>8} {str(b.upper):>8} "
              f"{'yes' if b.tight else 'no':>5} {ilp:>4} {closed_form_converse(K, D, L):>6}")

# Loose instances: the remainder exceeds L and does not divide D.
loose = [(k, d, l) for k in range(2, 16) for d in range(2, k + 1) for l in range(1, d + 1)
         if not compute_bounds(k, d, l).tight]
print(f"\n{len(loose)} loose instances with K < 16, e.g. {loose[:4]}")
