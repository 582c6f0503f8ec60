"""Recompute the worked examples from the shipped fixtures and print them."""

from pathlib import Path

import numpy as np

from liquidweights.accuracy import group_accuracy
from liquidweights.cli import load_instance
from liquidweights.games import best_pure_ne_accuracy, construct_max_accuracy_NE, is_U_NE
from liquidweights.model import expected_weights
from liquidweights.optimal import algorithm1, best_pure_accuracy, optimal_weights
from liquidweights.shares import is_Uhat_NE

FIX = Path(__file__).resolve().parent.parent / "fixtures"


def main():
    np.set_printoptions(precision=5, suppress=True)
    ex1 = load_instance(FIX / "ex1.json")
    w = expected_weights(ex1.delegation)
    print("ex1  expected weights", w, " accuracy", group_accuracy(ex1.q, w).value)

    q = load_instance(FIX / "ex2.json").q
    D = algorithm1(q)
    print("ex2  w*", optimal_weights(q).w_star)
    print("     algorithm1 rows\n", D.D)
    print("ex3  best pure", best_pure_accuracy(q).value, " weighted", group_accuracy(q, expected_weights(D)).value)

    ex4 = load_instance(FIX / "ex4.json")
    print("ex4  mixed profile is U-NE:", is_U_NE(ex4.delegation, ex4.utilities).is_equilibrium)

    q5 = load_instance(FIX / "ex5.json").q
    D5 = construct_max_accuracy_NE(q5)
    value, witness = best_pure_ne_accuracy(q5)
    print("ex5  weighted NE", group_accuracy(q5, expected_weights(D5)).value, " best pure NE", value, witness)

    ex6 = load_instance(FIX / "ex6.json")
    print("ex6  sink profile is share-NE:", is_Uhat_NE(ex6.delegation, ex6.utilities).is_equilibrium)


if __name__ == "__main__":
    main()
