"""Quick end-to-end check of the perclab Python module.

Build and install first:

    pip install --no-build-isolation ./crates/py
    python python/smoke_test.py
"""

import math

import perclab


def check_graphs():
    tree = perclab.Kernel("tree(2)")
    assert tree.degree == 3
    o = tree.origin()
    nb = tree.neighbors(o)
    assert len(nb) == 3
    for u in nb:
        assert o in tree.neighbors(u)
        assert perclab.Vertex.decode(u.encode()) == u
    assert tree.distance(o, nb[0]) == 1
    assert tree.ball_size(1) == 4

    half = perclab.Kernel("grandparent(2)", "descendants_of_origin")
    assert half.contains(half.origin())

    lamp = perclab.Kernel("lamp_walk", "nonneg_street")
    g = perclab.Vertex.lamp(0, [0])
    assert lamp.contains(g)
    assert not lamp.contains(perclab.Vertex.lamp(-1))


def check_percolation():
    k = perclab.Kernel("dl(3,2)")
    a, b = k.neighbors(k.origin())[:2]
    assert perclab.edge_uniform(7, a, b) == perclab.edge_uniform(7, b, a)

    closed = perclab.estimate(k, "e_1", 0.0, replicas=50)
    assert closed.mean == 0.0 and closed.stderr == 0.0 and closed.n == 50

    e = perclab.estimate(k, "e_1", 0.3, replicas=2000, seed=4)
    again = perclab.estimate(k, "e_1", 0.3, replicas=2000, seed=4, workers=2)
    assert (e.mean, e.stderr) == (again.mean, again.stderr)
    assert 0.0 < e.mean

    prof = perclab.profile(k, "forward", 3, 0.2, replicas=500)
    assert len(prof) == 4 and prof[0].mean == 1.0

    cluster = perclab.explore(k, 0.2, seed=2)
    assert cluster["size"] >= 1 and sum(cluster["per_level"].values()) == cluster["size"]

    pc = perclab.critical_point(perclab.Kernel("tree(2)"), depth=6, tol=0.02, replicas=2000)
    assert 0.3 < pc["p_hat"] < 0.7, pc


def check_oracle():
    poly = perclab.exact(perclab.Kernel("triangles"), "e_1", radius=2, lo=-1, hi=2)
    p = 0.2
    assert math.isclose(poly(p), 2 * (p + (1 - p) * p * p), rel_tol=1e-12)
    assert poly(0.0) == 0.0


def check_analytic():
    good = perclab.bound_ledger(6, 2)
    assert good["sufficient"]
    assert not perclab.bound_ledger(3, 2)["sufficient"]
    assert good["pc_upper"] < good["pu_lower"]
    for n in (0, 1, 10, 100, 500):
        assert perclab.q_distinct(n) == perclab.q_odd(n)
    assert perclab.q_distinct(100) == 444793


def main():
    print("perclab", perclab.__version__)
    for check in (check_graphs, check_percolation, check_oracle, check_analytic):
        check()
        print("ok", check.__name__)


if __name__ == "__main__":
    main()
