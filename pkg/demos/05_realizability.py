"""Distinct parameter vectors, one and the same realized map.

Two witnesses make the many-to-one parameterization concrete:

* pad entries are dead weight by construction, so rewriting them moves
  the parameter vector without moving the map at all (deviation 0.0);
* permuting an mlp1h's hidden units (rows of W1 and b1 with columns of
  W2) relabels the sum over hidden units, which can only stir summation
  order, so the deviation sits at roundoff (<= 1e-12).

Run: python3 demos/05_realizability.py
"""

import numpy as np

from goalchase import BridgeFamily, pad_witness, permutation_witness


def show(report):
    keys = ["check", "verdict", "max_deviation", "params_changed"]
    print("  " + ", ".join(f"{k}={report[k]}" for k in keys if k in report))


def main():
    gen = np.random.Generator(np.random.PCG64(42))

    print("pad rewrite on affine1(m=3, pad=2):")
    fam = BridgeFamily("affine1", m=3, pad=2)
    show(pad_witness(fam, gen.uniform(-1, 1, fam.param_count)))

    print("pad rewrite on mlp1h(m=2, hidden=3, pad=4):")
    fam = BridgeFamily("mlp1h", m=2, hidden=3, pad=4)
    show(pad_witness(fam, gen.uniform(-1, 1, fam.param_count)))

    print("hidden-unit permutation on mlp1h(m=2, hidden=5):")
    fam = BridgeFamily("mlp1h", m=2, hidden=5)
    params = gen.uniform(-1, 1, fam.param_count)
    show(permutation_witness(fam, params, [4, 0, 3, 1, 2]))

    print("identity permutation (vacuous, reported as a warning):")
    show(permutation_witness(fam, params, [0, 1, 2, 3, 4]))


if __name__ == "__main__":
    main()
