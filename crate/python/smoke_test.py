"""Smoke test for the pdp extension module.

Build and install it first:

    pip install --no-build-isolation -e crates/python
"""

import math

import pdp


def main():
    m = pdp.Model.scenario("mcfadden").with_horizon(20.0)
    assert m.num_states == 2
    assert m.validate() == []

    sol = pdp.solve(m, 0.04)
    x = sol.nodes
    cdf = sol.cdf()
    assert len(x) == len(cdf) == 51
    assert sol.invariant_violations == 0
    assert max(sol.drift) < 1e-12
    err = max(abs(f - pdp.mcfadden_cdf(xi)) for xi, f in zip(x, cdf))
    assert err < 5e-3, err
    print(f"mcfadden dx=0.04: sup error {err:.3e}, {sol.ops} ops")

    values, per_state = pdp.run_paths(m, 20.0, x, 20000, seed=7)
    dist = max(abs(a - b) for a, b in zip(values, cdf))
    assert dist < 0.02, dist
    assert abs(per_state[0][-1] + per_state[1][-1] - 1.0) < 1e-12
    print(f"monte carlo distance {dist:.3e}")

    rows, slope, restricted = pdp.convergence_study("gamma", [0.1, 0.05, 0.025])
    assert 0.75 <= restricted <= 1.25, restricted
    print(f"gamma slopes: full {slope:.3f}, restricted {restricted:.3f}")

    assert pdp.gamma_equilibrium_cdf(0.0) == 0.5
    assert abs(pdp.complex_gamma(complex(0.5, 0.0)) - math.sqrt(math.pi)) < 1e-14
    assert abs(pdp.hyp2f1_conjugate(complex(0.25, 0.0), 0.0) - 1.0) < 1e-15

    custom = pdp.Model(
        [(1.0, 0.5), (1.0, -0.5)],
        ["exponential:1.0", "gamma:2.0"],
        [[0.0, 1.0], [1.0, 0.0]],
        -1.0,
        1.0,
        2.0,
    )
    # exponential intervals switch at y = 0, which costs O(dy) mass
    assert pdp.solve(custom, 0.1).cdf()[-1] > 0.9
    try:
        pdp.Model([(1.0, 0.5)], ["exponential:1.0"], [[0.5]], -1.0, 1.0, 1.0)
    except ValueError as e:
        print(f"rejected bad matrix: {e}")
    else:
        raise AssertionError("non-stochastic matrix accepted")

    print("ok")


if __name__ == "__main__":
    main()
