#!/usr/bin/env python3
"""Smoke test for the muxcomm_py extension module.

Builds are produced by `cargo build -p muxcomm-py` (add --release for the
release directory). The script locates the compiled cdylib, exposes it
under the importable module name, and exercises the main types against
closed-form values.
"""

import math
import shutil
import sys
import tempfile
from pathlib import Path


def locate_extension() -> Path:
    root = Path(__file__).resolve().parent.parent
    candidates = [
        root / "target" / "release" / "libmuxcomm_py.so",
        root / "target" / "debug" / "libmuxcomm_py.so",
        root / "target" / "release" / "libmuxcomm_py.dylib",
        root / "target" / "debug" / "libmuxcomm_py.dylib",
    ]
    for c in candidates:
        if c.is_file():
            return c
    sys.exit(
        "extension not built; run `cargo build -p muxcomm-py` first "
        f"(searched {[str(c) for c in candidates]})"
    )


def import_module():
    lib = locate_extension()
    stage = Path(tempfile.mkdtemp(prefix="muxcomm_py_"))
    suffix = ".so" if lib.suffix == ".so" else ".so"  # CPython loads .so on macOS too
    shutil.copy2(lib, stage / f"muxcomm_py{suffix}")
    sys.path.insert(0, str(stage))
    import muxcomm_py

    return muxcomm_py


def approx(a: float, b: float, tol: float = 1e-9) -> bool:
    return abs(a - b) <= tol * max(1.0, abs(a), abs(b))


def main() -> None:
    mc = import_module()
    print(f"loaded muxcomm_py {mc.__version__}")

    # ---- closed-form toy: one undirected unweighted edge ----
    toy = mc.MultiplexTensor.from_edges([(1, 1, 2, 1.0)], undirected=True)
    assert toy.n_vertices == 2 and toy.n_layers == 1
    b = mc.SupraAdjacency.build(toy, 1.0)
    tc = b.total_communicability()
    assert approx(tc, 2.0 * math.e - 2.0), tc
    triple = b.perron()
    assert approx(triple.rho, 1.0), triple.rho
    assert approx(triple.condition_number(), 1.0)
    pc = mc.perron_communicability(triple)
    assert approx(pc, 2.0 * (math.e - 1.0)), pc

    p = mc.path_length_matrix(toy, 1.0)
    q = mc.efficiency_matrix(p)
    assert approx(mc.global_k_efficiency(q), 1.0)
    h_in, h_out = mc.harmonic_centralities(q)
    assert h_in == [1.0, 1.0] and h_out == [1.0, 1.0]

    report = b.communicability_report()
    assert report["violations"] == []
    assert report["bound_lo"] <= report["pc"] <= report["bound_hi"]
    assert approx(b.total_communicability_ln(), math.log(tc))

    # ---- layer-switch cost: two-layer chain ----
    chain = mc.MultiplexTensor.from_edges([(1, 1, 2, 1.0), (2, 2, 3, 1.0)])
    p2 = mc.path_length_matrix(chain, 1.0, kmax=2)
    assert p2.lengths()[0][2] == 3.0, p2.lengths()
    exact = mc.exact_k_path_lengths(chain, 1.0, 2)
    assert exact[0][2] == 3.0
    p2_cheap = mc.path_length_matrix(chain, 2.0, kmax=2)
    assert p2_cheap.lengths()[0][2] == 2.5

    # min-plus product against the tropical identity
    inf = math.inf
    a = [[0.0, 3.0], [2.0, 0.0]]
    ident = [[0.0, inf], [inf, 0.0]]
    assert mc.minplus_multiply(a, ident) == a

    # ---- ranking and perturbation on a 4-vertex multiplex ----
    net = mc.MultiplexTensor.from_edges(
        [
            (1, 1, 2, 4.0),
            (1, 2, 3, 1.0),
            (2, 3, 4, 1.0),
            (2, 4, 1, 1.0),
            (1, 1, 3, 1.0),
        ],
        undirected=True,
    )
    eff = mc.rank_edges_efficiency(net, 1.0, top=3)
    assert len(eff) == 3 and eff[0]["rank"] == 1
    assert eff[0]["score"] >= eff[1]["score"] >= eff[2]["score"]
    pop = mc.rank_edges_popularity(net, 1.0, top=1)
    assert pop[0]["vertex_pair"] == (2, 1), pop  # the weight-4 hub edge
    assert pop[0]["layers"] == [1]

    stronger = net.apply_perturbation([(1, 1, 2)], "scale", 1.25)
    cmp = mc.compare_measures(net, stronger, 1.0)
    assert cmp["delta"]["rho_supra"] >= -1e-10
    assert cmp["delta"]["total_communicability"] > 0.0
    null = mc.compare_measures(net, net, 1.0)
    assert null["delta"]["global_efficiency"] == 0.0

    # error surfaces map to Python exceptions
    try:
        mc.MultiplexTensor.from_edges([(1, 5, 5, 1.0)])
    except ValueError as e:
        assert "self-loop" in str(e)
    else:
        raise AssertionError("self-loop must raise ValueError")

    print("smoke test passed")


if __name__ == "__main__":
    main()
