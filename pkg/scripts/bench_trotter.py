#!/usr/bin/env python3
"""Circuit-composition benchmark: time the construction of first-order
Trotter circuits for an operator file (defaults to the bundled H2 data)
and report qubits / terms / flattened instruction count."""
import argparse
import time
from pathlib import Path

from qk import CompositeInstruction, JitSession, PauliOperator, count_instructions, exp_i_theta, parse_pauli

DEFAULT_OPERATOR = Path(__file__).parents[1] / "src" / "qk" / "data" / "h2.op"


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--operator", default=str(DEFAULT_OPERATOR))
    parser.add_argument("--steps", type=int, default=1)
    parser.add_argument("--repeat", type=int, default=5, help="timing repetitions")
    args = parser.parse_args()

    operator = parse_pauli(Path(args.operator).read_text())
    terms = [PauliOperator({w: c}) for w, c in operator.term_list()]

    best = float("inf")
    instructions = 0
    for _ in range(args.repeat):
        start = time.perf_counter_ns()
        comp = CompositeInstruction()
        for _ in range(args.steps):
            for term in terms:
                comp.add(exp_i_theta(1.0, term))
        instructions = count_instructions(comp)
        best = min(best, time.perf_counter_ns() - start)

    print(f"operator      {args.operator}")
    print(f"qubits        {max(operator.num_qubits(), 1)}")
    print(f"terms         {len(terms)}")
    print(f"trotter steps {args.steps}")
    print(f"instructions  {instructions}")
    print(f"composition   {best / 1e6:.3f} ms (best of {args.repeat})")


if __name__ == "__main__":
    main()
