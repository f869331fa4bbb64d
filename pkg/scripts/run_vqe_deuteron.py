#!/usr/bin/env python3
"""Variational ground-state search for the two-qubit deuteron Hamiltonian.

The ansatz is a single-parameter circuit; the energy is evaluated exactly
(shots=0) through the observe path and minimized with the bundled
Nelder-Mead optimizer.
"""
import argparse

from qk import JitSession, ObjectiveFunction, X, Y, Z, nelder_mead

ANSATZ = """def ansatz(q : qreg, t0: float):
    X(q[0])
    Ry(q[1], t0)
    CNOT(q[1], q[0])
"""


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--max-evals", type=int, default=100)
    parser.add_argument("--start", type=float, default=0.0)
    parser.add_argument("--shots", type=int, default=0, help="0 = exact expectation")
    args = parser.parse_args()

    session = JitSession()
    session.compile_source(ANSATZ)
    hamiltonian = (
        -2.1433 * X(0) * X(1)
        - 2.1433 * Y(0) * Y(1)
        + 0.21829 * Z(0)
        - 6.125 * Z(1)
        + 5.907
    )
    objective = ObjectiveFunction(
        session.registry.get("ansatz"), hamiltonian, session.registry, shots=args.shots
    )
    result = nelder_mead(objective, [args.start], max_evals=args.max_evals)
    for step, energy in enumerate(objective.history):
        print(f"iteration {step:3d}  energy {energy:+.6f}")
    print(f"\nminimum {result.fun:.6f} at t0 = {result.x[0]:.6f}")
    print(f"objective evaluations: {objective.evaluations}")


if __name__ == "__main__":
    main()
