"""Tabulate the effective Hamiltonian of several velocity equilibria and
print how far each implicit solve sits from its closed form.

Writes gallery.csv (p, one column per model) under --out.
"""

import argparse
import os

import numpy as np

from kinetic_eikonal import (
    Hamiltonian,
    build_discrete_maxwellian,
    build_uniform_maxwellian,
)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--p-max", type=float, default=5.0)
    ap.add_argument("--np", type=int, default=201)
    ap.add_argument("--out", default=os.path.join(os.path.dirname(__file__), "out"))
    args = ap.parse_args()

    p = np.linspace(-args.p_max, args.p_max, args.np)
    uniform = Hamiltonian.implicit(build_uniform_maxwellian(1.0, 32))
    atoms = Hamiltonian.implicit(build_discrete_maxwellian([(1.0, 0.5), (-1.0, 0.5)]))
    coth = Hamiltonian.closed_coth(1.0)
    rel = Hamiltonian.closed_relativistic()
    classical = Hamiltonian.classical_eikonal(1.0 / 3.0)

    cols = {
        "uniform_implicit": uniform.value(p),
        "coth_closed": coth.value(p),
        "atoms_implicit": atoms.value(p),
        "relativistic_closed": rel.value(p),
        "classical": classical.value(p),
    }
    print("max |implicit - closed| over", len(p), "points of "
          f"[{-args.p_max}, {args.p_max}]:")
    print(f"  uniform vs coth        {np.abs(cols['uniform_implicit'] - cols['coth_closed']).max():.3e}")
    print(f"  atoms   vs relativistic {np.abs(cols['atoms_implicit'] - cols['relativistic_closed']).max():.3e}")
    print("the capped models flatten toward slope v_max = 1; the classical "
          "parabola does not:")
    tail = p[-1]
    for name in ("coth_closed", "classical"):
        print(f"  H'({tail:g}) ~ {(cols[name][-1] - cols[name][-2]) / (p[-1] - p[-2]):.3f}  ({name})")

    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, "gallery.csv")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("p," + ",".join(cols) + "\n")
        for i in range(len(p)):
            fh.write(",".join(repr(float(v)) for v in
                              (p[i], *[cols[c][i] for c in cols])) + "\n")
    print("wrote", path)


if __name__ == "__main__":
    main()
