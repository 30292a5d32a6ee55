"""Smoke test for the mlab Python extension.

Build and install first:  cd crates/py && maturin develop --release
Then run:                 python python/smoke_test.py
"""

import cmath
import json
import math

import mlab


def close(a, b, tol=1e-9):
    return abs(a - b) <= tol * (1 + abs(b))


def main():
    sieve = mlab.Sieve(10_000)
    assert sieve.primes()[:5] == [2, 3, 5, 7, 11]
    assert sieve.mobius(30) == -1 and sieve.euler_phi(36) == 12
    assert close(sieve.von_mangoldt(8), math.log(2))
    assert sieve.ramanujan_sum(6, 1) == 1
    assert sieve.factorize(360) == [(2, 3), (3, 2), (5, 1)]

    cw = mlab.CramerWeight(5, sieve)
    assert close(cw.normalization, 30 / 8)
    assert cw.eval_range(1, 7) == [cw.normalization, 0, 0, 0, 0, 0, cw.normalization]

    approx = mlab.MangoldtApproximant(1e6, 10, sieve)
    assert 3.8 < approx.level < 3.9

    # A pure linear phase has U² norm and little-u² bound both equal to 1.
    n = 64
    f = [cmath.exp(2j * math.pi * 0.25 * x) for x in range(1, n + 1)]
    assert close(mlab.gowers_norm(f, n, 1), 1.0, 1e-9)
    little, coeffs = mlab.little_gowers_lower(f, n, 1)
    assert little > 1 - 1e-6 and len(coeffs) == 2

    # Duality between the average and its adjoint.
    N, p = 6, [0, 0, 1]
    w = [1.0 + k % 2 for k in range(N)]
    fs = (0, [complex(math.sin(k), math.cos(3 * k)) for k in range(12)])
    gs = (0, [complex(1 + k % 5, -k % 3) for k in range(60)])
    hs = (-4, [complex(k % 7, 1) for k in range(30)])

    def pair(u, v):
        (ou, uu), (ov, vv) = u, v
        return sum(uu[x - ou] * vv[x - ov] for x in range(max(ou, ov), min(ou + len(uu), ov + len(vv))))

    lhs = pair(hs, mlab.avg_upper(N, w, fs, gs, p))
    rhs = pair(mlab.avg_adjoint(N, w, hs, gs, p), fs)
    assert abs(lhs - rhs) < 1e-9 * (1 + abs(lhs))

    assert close(mlab.variation([0, 1, 0, 1], 2.0), math.sqrt(3))
    assert close(abs(mlab.symbol(0, 0, 1, p)), 1.0)
    assert abs(mlab.symbol(1, 0, 5, p)) <= 1 + 1e-12
    assert 0 <= mlab.plancherel(60, 12, [3, 7, 11]) <= 1 + 1e-9
    assert abs(mlab.weyl_sum(10_000, 0.0, [0, 1], sieve) - 1) < 0.05
    assert mlab.padic_norm_lower(5, 1, 2.0, restarts=4, seed=1) >= 1 - 1e-12

    try:
        mlab.Sieve(10**12)
    except mlab.ScaleError:
        pass
    else:
        raise AssertionError("scale guard did not fire")

    names = [e[0] for e in mlab.experiments()]
    assert "progression_means" in names
    cfg = json.dumps({"experiment": "prime_weyl", "parameters": {"n_values": "1000,2000"}, "seed": 1})
    csv = mlab.run(cfg)
    assert csv == mlab.run(cfg)
    assert csv.startswith("# experiment: prime_weyl")
    print("mlab smoke test passed")


if __name__ == "__main__":
    main()
