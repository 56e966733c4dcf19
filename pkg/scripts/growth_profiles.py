#!/usr/bin/env python3
"""Defect profiles of natural window families, as CSV on stdout.

Columns: model, family, size parameter, |F|, theta (exact), theta (float).
The square lattice and the circle approach 1; the free group stalls below
1/2 no matter how large the balls grow.
"""

from fractions import Fraction

from folnerlab.folner import topological_defect
from folnerlab.groups import ArcMetric, Entourage, WordMetric, grid_sample, make_model, window


def main() -> None:
    print("model,family,n,|F|,theta,theta_float")

    Z2 = make_model("lattice", dim=2)
    E = window(Z2, [(1, 0), (-1, 0), (0, 1), (0, -1)])
    U = Entourage(WordMetric(Z2), Fraction(0))
    for n in range(2, 16):
        box = window(Z2, [(i, j) for i in range(n) for j in range(n)])
        theta, _ = topological_defect(box, E, U)
        print(f"lattice2,boxes,{n},{len(box)},{theta},{float(theta):.6f}")

    F2 = make_model("free", rank=2)
    EF = window(F2, [F2.parse("a"), F2.parse("b")])
    UF = Entourage(WordMetric(F2), Fraction(0))
    for n in range(1, 7):
        ball = grid_sample(F2, n)
        theta, _ = topological_defect(ball, EF, UF)
        print(f"free2,balls,{n},{len(ball)},{theta},{float(theta):.6f}")

    H = make_model("heisenberg")
    EH = window(H, [(1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0)])
    UH = Entourage(WordMetric(H), Fraction(0))
    for n in range(1, 7):
        ball = grid_sample(H, n)
        theta, _ = topological_defect(ball, EH, UH)
        print(f"heisenberg,balls,{n},{len(ball)},{theta},{float(theta):.6f}")

    C = make_model("circle")
    EC = window(C, [Fraction(1, 3), Fraction(1, 7)])
    UC = Entourage(ArcMetric(C), Fraction(1, 40))
    for n in range(4, 44, 4):
        grid = grid_sample(C, n)
        theta, _ = topological_defect(grid, EC, UC)
        print(f"circle,grids,{n},{len(grid)},{theta},{float(theta):.6f}")


if __name__ == "__main__":
    main()
