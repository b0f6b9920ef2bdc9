"""
Main CLI Interface for c6proto
"""

import argparse
import logging
import os
import sys
from typing import Dict, List, Optional

from colorama import Fore, Style
from colorama import just_fix_windows_console

import config
from c6proto import (
    C6Error,
    DenseMessage,
    FuzzCampaign,
    PartyAssignment,
    ReportGenerator,
    SecretState,
    c6,
    capacity,
    dense_decode,
    dense_encode,
    infer_assignment,
    load_table,
    run_acceptance,
    run_protocol,
    validate_table,
)
from c6proto.modules.protocols import CERTIFIED_LAYOUTS, PROTOCOLS, DENSE_QUBITS
from c6proto.modules.tables import (
    Layout,
    available_tables,
    load_source_table,
    outcome_gram,
    verify_data_hashes,
)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2

logger = logging.getLogger("c6proto")
_COLOR = config.COLORS_ENABLED


def _paint(text: str, color: str) -> str:
    return f"{color}{text}{Style.RESET_ALL}" if _COLOR else text


def ok(text: str) -> str:
    return _paint(f"✅ {text}", Fore.GREEN)


def fail(text: str) -> str:
    return _paint(f"❌ {text}", Fore.RED)


def create_parser():
    """Create command-line argument parser"""
    parser = argparse.ArgumentParser(
        prog='c6proto',
        description='c6proto - simulator and verifier for six-qubit cluster state protocols',
        formatter_class=argparse.RawDescriptionHelpFormatter
    )
    parser.add_argument('--version', action='version', version=f'%(prog)s {config.VERSION}')
    parser.add_argument('-v', '--verbose', action='store_true', help='Debug logging')
    parser.add_argument('--no-color', action='store_true', help='Plain console output')

    subparsers = parser.add_subparsers(dest='command', help='Available commands')

    # Protocol run
    run_parser = subparsers.add_parser('run', help='Run one protocol end to end')
    run_parser.add_argument('--protocol', required=True, choices=sorted(PROTOCOLS), help='Protocol name')
    run_parser.add_argument('--secret', default='random',
                            help='Four comma-separated amplitudes (normalized) or "random"')
    run_parser.add_argument('--phi', type=float, help='Phase for rsp (radians)')
    run_parser.add_argument('--seed', type=int, help=f'Seed (default: ${config.SEED_ENV_VAR} or {config.DEFAULT_SEED})')
    run_parser.add_argument('--tol', type=float, default=config.EIGEN_TOL, help='Fidelity tolerance')
    run_parser.add_argument('-o', '--output', help='Transcript file (.json or .html)')

    # Table verification
    verify_parser = subparsers.add_parser('verify', help='Validate a table against the simulated protocol')
    verify_parser.add_argument('--table', required=True, help='Table file or bundled name (table1 ... table6)')
    verify_parser.add_argument('--assignment', help='Party assignment, e.g. "alice=a,b,1,6,2,5 bob=3,4"')
    verify_parser.add_argument('--data-dir', help='Directory with table files')
    verify_parser.add_argument('--tol', type=float, default=config.EIGEN_TOL, help='Row tolerance')
    verify_parser.add_argument('-o', '--output', help='Report file (.json or .html)')

    # Full acceptance report
    report_parser = subparsers.add_parser('report', help='Run every acceptance check')
    report_parser.add_argument('--json', dest='json_file', help='JSON report file')
    report_parser.add_argument('--html', dest='html_file', help='HTML report file')
    report_parser.add_argument('--trials', type=int, default=config.ACCEPTANCE_TRIALS, help='Trials per protocol')
    report_parser.add_argument('--seed', type=int, help='Seed')
    report_parser.add_argument('--workers', type=int, default=config.MAX_WORKERS, help='Worker threads')
    report_parser.add_argument('--data-dir', help='Directory with table files')
    report_parser.add_argument('--tol', type=float, default=config.EIGEN_TOL, help='Tolerance')

    # Fuzz campaign
    fuzz_parser = subparsers.add_parser('fuzz', help='Seeded random trials of one protocol')
    fuzz_parser.add_argument('--protocol', required=True, choices=sorted(PROTOCOLS), help='Protocol name')
    fuzz_parser.add_argument('--trials', type=int, default=100, help='Number of trials')
    fuzz_parser.add_argument('--seed', type=int, help='Seed')
    fuzz_parser.add_argument('--workers', type=int, default=config.MAX_WORKERS, help='Worker threads')
    fuzz_parser.add_argument('--tol', type=float, default=config.EIGEN_TOL, help='Fidelity tolerance')
    fuzz_parser.add_argument('-o', '--output', help='Summary file (.json)')

    # Assignment inference
    infer_parser = subparsers.add_parser('infer', help='Search the qubit layout that best reproduces a table')
    infer_parser.add_argument('--table', required=True, help='Table file or bundled name')
    infer_parser.add_argument('--assignment', help='Stated assignment used for tie-breaking')
    infer_parser.add_argument('--data-dir', help='Directory with table files')
    infer_parser.add_argument('--tol', type=float, default=config.EIGEN_TOL, help='Row tolerance')
    infer_parser.add_argument('-o', '--output', help='Report file (.json or .html)')

    # Bundled tables
    tables_parser = subparsers.add_parser('tables', help='List bundled tables and their hash status')
    tables_parser.add_argument('--data-dir', help='Directory with table files')

    # Dense coding
    dense_parser = subparsers.add_parser('dense', help='Encode and decode a five-bit dense-coding message')
    dense_parser.add_argument('--message', type=int, required=True, help='Message number 0-31')

    return parser


def resolve_seed(seed: Optional[int]) -> int:
    if seed is not None:
        return seed
    env = os.environ.get(config.SEED_ENV_VAR)
    if env:
        try:
            return int(env)
        except ValueError:
            raise ValueError(f"Invalid {config.SEED_ENV_VAR}: {env!r}")
    return config.DEFAULT_SEED


def parse_secret(spec: str) -> Optional[SecretState]:
    """None for "random", else four amplitudes normalized."""
    if spec.strip().lower() == 'random':
        return None
    try:
        values = [complex(part.strip().replace(' ', '')) for part in spec.split(',')]
    except ValueError:
        raise ValueError(f"Invalid secret: {spec!r}")
    return SecretState.from_vector(values, normalize=True)


def _check_tol(tol: float) -> None:
    if not tol > 0.0:
        raise ValueError(f"Invalid tolerance: {tol}")


def write_report(data: Dict, output: Optional[str]) -> None:
    if not output:
        return
    generator = ReportGenerator()
    if output.endswith('.html'):
        generator.generate_html_report(data, output)
    else:
        generator.generate_json_report(data, output)
    print(ok(f"Report saved to: {output}"))


def cmd_run(args):
    """Handle run command"""
    _check_tol(args.tol)
    seed = resolve_seed(args.seed)
    secret = parse_secret(args.secret) if args.protocol != 'rsp' else None
    transcript = run_protocol(args.protocol, seed, secret=secret, phi=args.phi)
    data = ReportGenerator().transcript_dict(transcript)
    print_transcript(data, transcript.elapsed)
    write_report(data, args.output)
    if transcript.fidelity >= 1.0 - args.tol:
        return EXIT_OK
    print(fail(f"Fidelity {transcript.fidelity:.15f} below 1 - {args.tol}"))
    return EXIT_FAILED


def _validations(table, stated: Optional[PartyAssignment], tol: float) -> List:
    source = load_source_table(table)
    reports = []
    if stated is not None:
        reports.append(validate_table(table, c6(), Layout.from_assignment(stated), label='stated', tol=tol,
                                      source_table=source))
    certified = CERTIFIED_LAYOUTS.get(table.table_id)
    if certified is not None:
        try:
            reports.append(validate_table(table, c6(), certified, label='certified', tol=tol, source_table=source))
        except C6Error as e:
            logger.info("certified layout does not apply to %s: %s", table.path, e)
    return reports


def cmd_verify(args):
    """Handle verify command"""
    _check_tol(args.tol)
    table = load_table(args.table, args.data_dir)
    stated = PartyAssignment.parse(args.assignment) if args.assignment else table.stated
    print(f"🔍 Verifying table {table.table_id} ({len(table.rows)} rows)")

    reports = _validations(table, stated, args.tol)
    inference = infer_assignment(table, c6(), stated=stated, source_table=load_source_table(table), tol=args.tol)
    reports.append(inference.validation)
    gram = outcome_gram(table, tol=args.tol)

    for report in reports:
        print_validation(report)
    print_inference(inference.to_dict())
    print(f"Printed outcome kets orthonormal: {'yes' if gram.passed else 'no'} "
          f"(max off-diagonal {gram.max_off_diagonal:.3e})")

    data = {
        'table': table.table_id,
        'validations': [r.to_dict() for r in reports],
        'gram': gram.to_dict(),
        'inference': inference.to_dict(),
    }
    write_report(data, args.output)

    explained = [r.label for r in reports if r.explained]
    if explained:
        print(ok(f"Every mismatch is documented under the {explained[0]} assignment"))
        return EXIT_OK
    print(fail("Undocumented mismatches under every assignment"))
    return EXIT_FAILED


def cmd_report(args):
    """Handle report command"""
    _check_tol(args.tol)
    seed = resolve_seed(args.seed)
    print(f"🔬 Running acceptance checks (seed {seed}, {args.trials} trials)")
    results = run_acceptance(seed, args.trials, args.data_dir, args.workers, args.tol)
    data = {
        'seed': seed,
        'trials': args.trials,
        'criteria': [r.to_dict() for r in results],
        'passed': all(r.passed for r in results),
    }
    print_criteria(data['criteria'])
    generator = ReportGenerator()
    if args.json_file:
        generator.generate_json_report(data, args.json_file)
        print(ok(f"Report saved to: {args.json_file}"))
    if args.html_file:
        generator.generate_html_report(data, args.html_file)
        print(ok(f"Report saved to: {args.html_file}"))
    return EXIT_OK if data['passed'] else EXIT_FAILED


def cmd_fuzz(args):
    """Handle fuzz command"""
    _check_tol(args.tol)
    seed = resolve_seed(args.seed)
    campaign = FuzzCampaign(workers=args.workers, tol=args.tol)
    print(f"🎲 {args.trials} {args.protocol} trials from seed {seed}")
    summary = campaign.run(args.protocol, args.trials, seed)
    print(f"Min fidelity:   {summary.min_fidelity:.15f}")
    print(f"Mean fidelity:  {summary.mean_fidelity:.15f}")
    print(f"cbits:          {', '.join(f'{k} x{v}' for k, v in sorted(summary.cbits.items()))}")
    print(f"Distinct outcomes: {len(summary.outcomes)}")
    write_report(summary.to_dict(), args.output)
    if summary.passed:
        print(ok("All trials reached fidelity 1"))
        return EXIT_OK
    print(fail(f"{len(summary.failures)} failing trial(s)"))
    return EXIT_FAILED


def cmd_infer(args):
    """Handle infer command"""
    _check_tol(args.tol)
    table = load_table(args.table, args.data_dir)
    stated = PartyAssignment.parse(args.assignment) if args.assignment else None
    report = infer_assignment(table, c6(), stated=stated, source_table=load_source_table(table), tol=args.tol)
    data = report.to_dict()
    print_inference(data)
    write_report({'inference': data, 'validations': [report.validation.to_dict()]}, args.output)
    return EXIT_OK if report.validation.explained else EXIT_FAILED


def cmd_tables(args):
    """Handle tables command"""
    hashes = verify_data_hashes(args.data_dir)
    print("╔════════════════════════════════════════════════════════════╗")
    print("║                      BUNDLED TABLES                        ║")
    print("╚════════════════════════════════════════════════════════════╝\n")
    for name in available_tables(args.data_dir):
        table = load_table(name, args.data_dir)
        status = ok("hash ok") if hashes.get(f"{name}.qt") else fail("hash mismatch")
        stated = table.stated.spec() if table.stated else "-"
        print(f"{name:8} width {table.width}  rows {len(table.rows):2}  errata {len(table.errata):2}  {status}")
        print(f"         stated: {stated}")
    return EXIT_OK if hashes and all(hashes.values()) else EXIT_FAILED


def cmd_dense(args):
    """Handle dense command"""
    msg = DenseMessage.from_int(args.message)
    decoded = dense_decode(dense_encode(msg))
    ops = " ⊗ ".join(f"{name}[{label}]" for name, label in zip(msg.operators(), DENSE_QUBITS))
    print(f"Message:   {args.message} ({msg.bits()})")
    print(f"Encoding:  {ops}")
    print(f"Decoded:   {decoded.to_int()} ({decoded.bits()})")
    print(f"Capacity:  {capacity(c6(), set(DENSE_QUBITS)):.6f} bits")
    return EXIT_OK if decoded == msg else EXIT_FAILED


def print_transcript(data: Dict, elapsed: float):
    """Print a protocol transcript in readable format"""
    print(f"""
╔════════════════════════════════════════════════════════════╗
║                     PROTOCOL TRANSCRIPT                    ║
╚════════════════════════════════════════════════════════════╝

Protocol:            {data['protocol']}
Seed:                {data['seed']}
Outcomes:            {', '.join(map(str, data['outcomes']))}
cbits:               {data['cbits']} ({' + '.join(map(str, data['cbits_per_message']))})
Correction:          {', '.join(data['corrections'])}
Final state:         {data['final_state']}
Fidelity:            {data['fidelity']:.15f}
Elapsed:             {elapsed * 1000:.1f} ms
""")


def print_validation(report):
    counts = report.counts
    line = (f"[{report.label}] table {report.table_id}: {report.matched}/{len(report.rows)} rows "
            f"(match {counts['match']}, phase-match {counts['phase-match']}, mismatch {counts['mismatch']})")
    print(ok(line) if report.consistent else line)
    for row in report.rows:
        if row.matched:
            continue
        note = f"erratum: {row.erratum}" if row.erratum else "UNDOCUMENTED"
        diagnosis = f" [{', '.join(row.diagnosis)}]" if row.diagnosis else ""
        text = f"   row {row.row:2}: distance {row.distance:.3e}{diagnosis} {note}"
        print(text if row.erratum else fail(text))


def print_inference(data: Dict):
    layout = data['layout']
    print(f"Inferred layout:     measured ({' '.join(layout['measured_order'])}) | "
          f"print ({' '.join(layout['print_order'])})")
    print(f"Score:               {data['score']}/{data['rows']} over {data['candidates']} candidates "
          f"-> {data['verdict']}")


def print_criteria(criteria: List[Dict]):
    print("╔════════════════════════════════════════════════════════════╗")
    print("║                     ACCEPTANCE REPORT                      ║")
    print("╚════════════════════════════════════════════════════════════╝\n")
    for c in criteria:
        text = f"[{c['criterion']:>2}] {c['title']}: {c['message']}"
        print(ok(text) if c['passed'] else fail(text))


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point"""
    global _COLOR
    parser = create_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code) if isinstance(e.code, int) else EXIT_USAGE

    if not args.command:
        parser.print_help()
        return EXIT_USAGE

    _COLOR = config.COLORS_ENABLED and not args.no_color
    just_fix_windows_console()
    logging.basicConfig(level=logging.DEBUG if (args.verbose or config.VERBOSE) else logging.WARNING,
                        format=config.LOG_FORMAT)

    commands = {
        'run': cmd_run,
        'verify': cmd_verify,
        'report': cmd_report,
        'fuzz': cmd_fuzz,
        'infer': cmd_infer,
        'tables': cmd_tables,
        'dense': cmd_dense,
    }

    try:
        return commands[args.command](args)
    except (C6Error, ValueError, OSError) as e:
        print(fail(str(e)), file=sys.stderr)
        return EXIT_USAGE


if __name__ == '__main__':
    sys.exit(main())
