#!/usr/bin/env python3
"""
Example Usage of c6proto
"""

import numpy as np

from c6proto import (
    DenseMessage,
    FuzzCampaign,
    ReportGenerator,
    SecretState,
    c6,
    capacity,
    dense_decode,
    dense_encode,
    infer_assignment,
    load_table,
    run_protocol,
    solo_guess_fidelity,
    validate_table,
)
from c6proto.modules.protocols import CERTIFIED_LAYOUTS
from c6proto.modules.tables import load_source_table


def example_teleportation():
    """Example: Teleport a random two-qubit payload"""
    print("\n" + "="*60)
    print("Example 1: Teleportation")
    print("="*60 + "\n")

    transcript = run_protocol("teleport", seed=7)
    print(f"Payload:     {transcript.secret.vector.round(4)}")
    print(f"Outcome:     {transcript.outcomes[0]}")
    print(f"cbits sent:  {transcript.cbits}")
    print(f"Correction:  {transcript.corrections[0].describe()}")
    print(f"Fidelity:    {transcript.fidelity:.15f}")


def example_splitting():
    """Example: Split a payload between Bob and Charlie"""
    print("\n" + "="*60)
    print("Example 2: Quantum information splitting")
    print("="*60 + "\n")

    secret = SecretState.from_vector([1, 1j, -1, 1], normalize=True)
    for protocol in ("qis1", "qis2"):
        transcript = run_protocol(protocol, seed=3, secret=secret)
        print(f"{protocol}: outcomes {transcript.outcomes}, {transcript.cbits} cbits, "
              f"fidelity {transcript.fidelity:.12f}")
        print(f"  Charlie alone recovers fidelity {solo_guess_fidelity(protocol, secret):.3f}")


def example_dense_coding():
    """Example: Five classical bits over three qubits"""
    print("\n" + "="*60)
    print("Example 3: Dense coding")
    print("="*60 + "\n")

    print(f"Capacity of the cluster with qubits 1, 6, 4 as sender: {capacity(c6(), {1, 6, 4}):.6f} bits")
    for value in (0, 1, 21, 31):
        msg = DenseMessage.from_int(value)
        decoded = dense_decode(dense_encode(msg))
        print(f"  {msg.bits()} -> {'/'.join(msg.operators())} -> {decoded.bits()}")


def example_table_validation():
    """Example: Compare a printed table with the simulation"""
    print("\n" + "="*60)
    print("Example 4: Table validation")
    print("="*60 + "\n")

    table = load_table("table1")
    report = validate_table(table, c6(), CERTIFIED_LAYOUTS[table.table_id], label="certified",
                            source_table=load_source_table(table))
    print(f"Table {table.table_id}: {report.matched}/{len(report.rows)} rows reproduced")
    for row in report.rows:
        if not row.matched:
            print(f"  row {row.row:2}: {row.erratum or 'UNDOCUMENTED'}")

    inference = infer_assignment(load_table("table3"), source_table=load_source_table(load_table("table3")))
    print(f"\nBest layout for table 3: {' '.join(inference.layout.encoding())} "
          f"({inference.score}/{inference.rows}, {inference.verdict})")


def example_campaign():
    """Example: Seeded trials and a JSON summary"""
    print("\n" + "="*60)
    print("Example 5: Fuzz campaign")
    print("="*60 + "\n")

    summary = FuzzCampaign(workers=4).run("rsp", trials=50, seed=11)
    print(f"Min fidelity:  {summary.min_fidelity:.15f}")
    print(f"Mean fidelity: {np.round(summary.mean_fidelity, 15)}")
    print(ReportGenerator().to_json({"cbits": summary.cbits, "passed": summary.passed}))


def main():
    """Run all examples"""
    print("\n")
    print("█" * 60)
    print("█" + " " * 58 + "█")
    print("█  " + "c6proto - Usage Examples".center(54) + "  █")
    print("█" + " " * 58 + "█")
    print("█" * 60)

    try:
        example_teleportation()
        example_splitting()
        example_dense_coding()
        example_table_validation()
        example_campaign()

        print("\n" + "="*60)
        print("✅ All examples completed successfully!")
        print("="*60 + "\n")

    except Exception as e:
        print(f"\n❌ Error: {e}")
        import traceback
        traceback.print_exc()


if __name__ == "__main__":
    main()
