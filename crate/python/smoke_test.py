"""Smoke test for the limitlab Python extension.

Build and stage the module first:

    cargo build --release -p limitlab-py --features extension-module
    cp target/release/liblimitlab_py.so python/limitlab.so
    python3 python/smoke_test.py
"""

import math
import os
import sys

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import limitlab  # noqa: E402


def close(a, b, tol):
    return abs(a - b) <= tol


def main():
    print("limitlab", limitlab.__version__)

    g = limitlab.Group.demo_schottky()
    assert (g.rank, g.dimension) == (2, 2), g
    assert g.word_counts(3) == [1, 4, 12, 36]
    assert len(g.generators()) == 2 and len(g.generators()[0]) == 4

    x, xp, xi = [0.1, 0.2, -0.3], [-0.4, 0.1, 0.2], [0.0, 0.6, 0.8]
    d = limitlab.busemann(x, xp, xi)
    assert close(d, -limitlab.busemann(xp, x, xi), 1e-12)

    delta = g.critical_exponent(9)
    assert 0.3 < delta < 0.5, delta

    mu = limitlab.ps_measure(g, 6, delta)
    assert len(mu) == sum(g.word_counts(6))
    back = mu.translate([0.2, -0.1, 0.3]).translate([0.0, 0.0, 0.0])
    assert max(abs(a / b - 1.0) for a, b in zip(back.weights, mu.weights)) < 1e-10
    assert mu.transport_defect("", [[1.0, 0.0, 0.0]]) == 0.0
    assert mu.transport_defect("a", [[0.6, 0.0, 0.8]]) >= 0.0

    k = limitlab.kms_defect(mu, "a")
    assert k["tau_unit"] > 0.0 and k["defect"] >= 0.0

    jw = limitlab.janson_wolff("exp-i-theta", 2.0, grid=1024)
    assert close(jw, (2 * math.pi) ** 2, 0.005 * (2 * math.pi) ** 2), jw

    s = limitlab.summability("weierstrass", [16, 32, 64], [1.0, 1.5, 2.0, 2.5, 3.0])
    assert s["p_janson_wolff"] is not None

    sphere = limitlab.sphere_defects(4)
    assert sphere["anticommutator_defect"] == 0.0 and sphere["involution_defect"] == 0.0

    fuchsian = limitlab.Group.demo_fuchsian_schottky()
    scan = limitlab.cantor_scan(fuchsian, 5, 1.0)
    assert len(scan) == 6 and all(b >= a for a, b in zip(scan, scan[1:]))

    try:
        limitlab.Group.from_json('{"kind": "cyclic", "dimension": 2}')
    except ValueError as e:
        print("rejected bad group:", e)
    else:
        raise AssertionError("missing translation_length accepted")

    print("smoke test passed")


if __name__ == "__main__":
    main()
