"""Smoke test for the `replab` extension module.

Build first, for example:
    pip install maturin && maturin build -m crates/python/Cargo.toml --release
    pip install target/wheels/replab-*.whl
"""

import json
import math

import replab


def close(a, b, tol):
    return abs(a - b) <= tol


def main():
    assert close(replab.binary_threshold(0.75, 0.2), 4 / 11, 1e-12)

    holds = replab.Model(kappa=0.2, delta=0.4, binary_precision=0.75).check_fei()
    assert holds["holds"] and close(holds["witness"]["v_bar"], 0.48 / 0.7, 1e-12)

    failing = replab.Model(kappa=0.2, delta=0.3, pi0=0.3, c=0.05, binary_precision=0.75)
    assert not failing.check_fei()["holds"]
    assert failing.horizon()["horizon_t"] == 8
    bound = failing.outside_option_bound()
    assert bound["bound_value"] < 1.0

    ref = replab.Model(kappa=0.2, delta=0.5, pi0=0.3, c=0.05, binary_precision=0.75)
    q = ref.non_efe_parameters()
    for key, want in [("v_bar", 0.64), ("v_tilde", 0.24), ("v_hat", 0.67), ("x", 0.6417910447761195)]:
        assert close(q[key], want, 1e-9), (key, q[key])

    for kind in ("fe", "non-efe"):
        report = replab.verify(ref.construct(kind))
        assert report["passed"], kind

    automaton = ref.construct("non-efe")
    bad = json.loads(automaton)
    bad["states"][1]["belief"] += 0.02
    assert not replab.verify(json.dumps(bad))["passed"]

    a = replab.simulate(automaton, paths=2000, horizon=200, seed=3)
    b = replab.simulate(automaton, paths=2000, horizon=200, seed=3)
    assert a == b
    oracle = replab.analytic_effort(automaton)["value"]
    est = a["long_run_effort"]
    assert abs(est["estimate"] - oracle) <= 5 * est["std_error"], (est, oracle)

    try:
        replab.Model(kappa=1.5, delta=0.4, binary_precision=0.75)
    except ValueError:
        pass
    else:
        raise AssertionError("invalid kappa accepted")

    assert math.isfinite(a["martingale"]["z"])
    print("replab", replab.__version__, "smoke test ok")


if __name__ == "__main__":
    main()
