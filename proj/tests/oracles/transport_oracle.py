"""Reference values for the transport and semantic-distance tests.

Solves each transport problem as a dense LP with scipy's HiGHS backend and
prints C++ initializers that are pasted into tests/test_transport.cpp.
"""
import itertools

import numpy as np
from scipy.optimize import linprog


def emd(p, q, cost):
    n, m = len(p), len(q)
    a_eq, b_eq = [], []
    for i in range(n):
        row = np.zeros(n * m)
        row[i * m:(i + 1) * m] = 1
        a_eq.append(row)
        b_eq.append(p[i])
    for j in range(m):
        row = np.zeros(n * m)
        row[j::m] = 1
        a_eq.append(row)
        b_eq.append(q[j])
    res = linprog(np.asarray(cost).ravel(), A_eq=np.array(a_eq), b_eq=b_eq, bounds=(0, None), method="highs")
    assert res.status == 0
    return res.fun


def levenshtein(a, b):
    d = list(range(len(b) + 1))
    for i, x in enumerate(a, 1):
        prev, d[0] = d[0], i
        for j, y in enumerate(b, 1):
            prev, d[j] = d[j], min(d[j] + 1, d[j - 1] + 1, prev + (x != y))
    return d[len(b)]


def fmt(v):
    return "{" + ", ".join(repr(float(x)) for x in v) + "}"


def generic_cases():
    rng = np.random.default_rng(20240611)
    print("// generic transport cases: supply, demand, cost (row-major), optimum")
    for _ in range(8):
        n, m = rng.integers(2, 6, size=2)
        p = rng.integers(1, 10, size=n).astype(float)
        q = rng.integers(1, 10, size=m).astype(float)
        p /= p.sum()
        q /= q.sum()
        cost = rng.integers(0, 20, size=(n, m)) / 4.0
        print(f"{{{fmt(p)}, {fmt(q)}, {fmt(cost.ravel())}, {int(m)}, {emd(p, q, cost)!r}}},")


def supermarket_cases():
    # 2x2 grid, item at (1,1), horizon 2: all 25 action pairs are feasible and full length.
    seqs = list(itertools.product(range(5), repeat=2))
    dist = np.array([[levenshtein(a, b) / 2 for b in seqs] for a in seqs])

    def listener(plan, eps):
        step = lambda t, a: (1 - eps) * (a == plan[t]) + eps / 5
        return np.array([step(0, s[0]) * step(1, s[1]) for s in seqs])

    print("// supermarket 2x2 W1 cases: plan1, eps1, plan2, eps2, optimum")
    for plan1, e1, plan2, e2 in [((1, 2), 0.3, (2, 1), 0.1), ((1, 1), 0.0, (4, 4), 0.5),
                                 ((0, 3), 0.2, (0, 3), 0.7), ((2, 4), 0.25, (3, 0), 0.25)]:
        print(f"{{{{{plan1[0]}, {plan1[1]}}}, {e1}, {{{plan2[0]}, {plan2[1]}}}, {e2}, "
              f"{emd(listener(plan1, e1), listener(plan2, e2), dist)!r}}},")


if __name__ == "__main__":
    generic_cases()
    supermarket_cases()
