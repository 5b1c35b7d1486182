"""Quick check of the Python bindings: build a PEC cavity, solve, compare solvers."""

import math
import sys

import pywaveholtz as wh


def main() -> int:
    omega = 6.5
    grid = wh.Grid2D((-1.0, -1.0), (1.0, 1.0), (28, 28))
    current = [omega * math.exp(-36.0 * (x * x + y * y)) for x, y in grid.ez_coordinates()]

    op = wh.Operator(grid, [current], [omega], periods=1)
    print(grid, "dim", op.dim, "steps", op.steps)

    gm = op.solve("gmres", tol=1e-10)
    cg = op.solve("cg", tol=1e-10)
    print(gm, cg)
    assert gm.converged and cg.converged
    gap = max(abs(a - b) for a, b in zip(gm.state, cg.state))
    scale = max(abs(v) for v in gm.state)
    assert gap <= 1e-7 * scale, gap

    # The solution is a fixed point of Pi: (I - S) nu = Pi 0.
    lhs = op.apply(gm.state)
    rhs = op.rhs()
    res = math.sqrt(sum((a - b) ** 2 for a, b in zip(lhs, rhs))) / math.sqrt(sum(b * b for b in rhs))
    assert res <= 1e-9, res

    # Boundary nodes stay at zero.
    mask = grid.ez_mask()
    assert all(v == 0.0 for v, m in zip(gm.im_ez[0], mask) if m)

    w = wh.filter_weights(omega, 40)
    assert abs(sum(w) + 0.5) < 1e-12
    assert abs(wh.beta(omega, omega, 40) - 1.0) < 1e-12
    assert abs(wh.common_base_frequency([5.5, 16.5, 38.5]) - 5.5) < 1e-12

    small = wh.Grid2D((-1.0, -1.0), (1.0, 1.0), (8, 8))
    asym, lo, hi, _ = wh.spectrum(wh.Operator(small, [[1.0] * 81], [3.5]))
    assert asym < 1e-12 and lo > 0.0, (asym, lo)

    try:
        wh.common_base_frequency([5.5, 7.1])
    except wh.WaveHoltzError as e:
        print("rejected as expected:", e)
    else:
        raise AssertionError("incommensurate frequencies accepted")

    print(f"ok: gmres {gm.iterations} it, cg {cg.iterations} it, residual {res:.2e}, spectrum [{lo:.3e}, {hi:.3f}]")
    return 0


if __name__ == "__main__":
    sys.exit(main())
