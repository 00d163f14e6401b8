"""Smoke test for the compiled `pll_lockin` extension.

Build it with `maturin develop -m crates/py/Cargo.toml`, or copy
`target/release/libpll_lockin.so` to `pll_lockin.so` on the Python path.
"""

import math

import pll_lockin as pll


def main():
    p = pll.LoopParams(0.0633, 0.0225, 250.0, 2.0 / math.pi)
    coeffs = p.coeffs()
    assert coeffs.case == "focus", coeffs

    r = pll.lock_in_ranges(p)
    print(r)
    assert abs(r.omega_l - 85.27) < 0.01
    assert r.omega_l_c < r.omega_l
    assert abs(pll.huque_stensby_pull_out(p) / 2 - r.omega_l) < 1e-9 * r.omega_l

    numeric = pll.lock_in_numeric(p, bisect_tol=1e-3)
    assert abs(numeric - r.omega_l) / r.omega_l < 5e-3, numeric
    conservative = pll.conservative_lock_in_numeric(p, bisect_tol=1e-3)
    assert abs(conservative - r.omega_l_c) / r.omega_l_c < 5e-3, conservative

    curve = pll.separatrix(p, 256)
    at_zero = [y for th, y, _ in curve if th == 0.0]
    assert at_zero and abs(at_zero[0] - r.y_l) < 1e-9

    calm = pll.simulate_step(p, 69.0)
    slip = pll.simulate_step(p, 86.0)
    assert not calm.slipped_sup and slip.slipped_sup

    try:
        pll.LoopParams(0.0633, 0.0225, 250.0, 0.3)
    except ValueError as e:
        print("rejected:", e)
    else:
        raise AssertionError("k <= 1/pi accepted")

    print("smoke test passed")


if __name__ == "__main__":
    main()
