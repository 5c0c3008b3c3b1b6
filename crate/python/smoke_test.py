"""Smoke test for the Python extension.

Usage: python3 python/smoke_test.py [path/to/libposiform_py.so]

Without an argument the extension is built in release mode first.
"""

import importlib.util
import os
import shutil
import subprocess
import sys
import tempfile

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))


def build():
    subprocess.run(
        ["cargo", "build", "--release", "-p", "posiform-py", "--features", "extension-module"],
        cwd=ROOT,
        check=True,
    )
    target = os.environ.get("CARGO_TARGET_DIR", os.path.join(ROOT, "target"))
    return os.path.join(target, "release", "libposiform_py.so")


def load(lib):
    tmp = tempfile.mkdtemp()
    dest = os.path.join(tmp, "posiform.so")
    shutil.copy(lib, dest)
    spec = importlib.util.spec_from_file_location("posiform", dest)
    mod = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(mod)
    return mod


def main():
    pf = load(sys.argv[1] if len(sys.argv) > 1 else build())
    print("posiform", pf.__version__)

    inst = pf.plant("101", seed=81944)
    q = inst.qubo
    assert repr(q) == "Qubo(x1 + x2 - 2 x0 x2 + 1)", repr(q)
    assert inst.clause_count == 6
    assert inst.planted_energy == 0.0
    assert q.energy("101") == 0.0

    bare = pf.Qubo(3, q.linear, q.quadratic)
    energy, minimizers = pf.brute_force(bare)
    assert (energy, minimizers) == (-1.0, ["101"]), (energy, minimizers)
    assert q.to_posiform().to_qubo() == q

    conv = pf.Qubo(3, {0: 2, 1: -1}, {(0, 1): 1, (1, 2): -2})
    p = conv.to_posiform()
    assert p.offset == -3.0
    for x in range(8):
        bits = format(x, "03b")
        assert p.value(bits) == conv.energy(bits)

    g = pf.chimera(4)
    assert (g.num_vars, g.num_edges) == (128, 352)
    big = pf.plant(g.num_vars, seed=7, edge_set=g)
    sa = pf.simulated_annealing(big.qubo, num_reads=100, sweeps=1000, seed=1)
    gsp = sa.gsp(big.planted_energy)
    assert gsp > 0.5, gsp
    assert sa.tts99(big.planted_energy, "work") is not None
    greedy = pf.steepest_descent(big.qubo, num_reads=100, seed=1)
    assert len(greedy) == 100

    assert abs(pf.tts99(8.0, 800, 1.0) - 0.01) < 1e-12
    assert pf.tts99(8.0, 800, 0.0) is None

    assert pf.solve_2sat(2, [(1, 2), (-1, 2), (1, -2)]) == "11"
    assert pf.is_uniquely_satisfiable(2, [(1, 2), (-1, 2), (1, -2)], "11")
    assert pf.solve_2sat(1, [(1, 1), (-1, -1)]) is None

    for make, nodes, edges in [
        (lambda: pf.pegasus(6), 680, 4484),
        (lambda: pf.zephyr(4), 576, 5032),
        (lambda: pf.chimera(16), 2048, 6016),
    ]:
        e = make()
        assert (e.num_vars, e.num_edges) == (nodes, edges), e

    try:
        pf.plant("10", seed=0, batch_size=0)
    except ValueError:
        pass
    else:
        raise AssertionError("batch_size=0 accepted")

    print("smoke test passed")


if __name__ == "__main__":
    main()
