#!/usr/bin/env python3
"""Generic Grover search: the oracle is handed to the search kernel as a
callable kernel argument."""
import argparse

from qk import ArgPack, JitSession, QReg, execute

KERNELS = """def reflect_about_uniform(q: qreg):
    with compute:
        H(q)
        X(q)
    with action:
        Z.ctrl(q[0: q.size() - 1], q[q.size() - 1])

def cz_oracle(q: qreg):
    CZ(q[0], q[2])
    CZ(q[1], q[2])

def run_grover(q: qreg, oracle_var: KernelSignature(qreg), iterations: int):
    H(q)
    for i in range(iterations):
        oracle_var(q)
        reflect_about_uniform(q)
    Measure(q)
"""


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--iterations", type=int, default=1)
    parser.add_argument("--shots", type=int, default=8192)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    session = JitSession()
    session.compile_source(KERNELS)
    q = QReg(3)
    execute(
        session.registry.get("run_grover"),
        ArgPack({"q": q, "oracle_var": "cz_oracle", "iterations": args.iterations}),
        session.registry,
        shots=args.shots,
        seed=args.seed,
    )
    for key in sorted(q.counts()):
        bar = "#" * (60 * q.counts()[key] // args.shots)
        print(f"{key}  {q.counts()[key]:6d}  {bar}")


if __name__ == "__main__":
    main()
