"""
Command line front end.

    dp4brauer analyze FILE [--field k|L] [--format text|json] [--threads N]
    dp4brauer h1 FILE [--field k|L] [--format text|json]
    dp4brauer residues FILE --at "sqrt(a) -> c" [--format text|json]
    dp4brauer verify-trace FILE [--format text|json]

Exit codes: 0 all checks pass, 2 parse or validation failure, 3 stage error
or failed check.
"""
from __future__ import annotations

import argparse
import json
import sys

from .parsing import ParseError, ValidationError, parse_pencil
from .pipeline import AnalysisReport, StageError, analyze, residue_chain

EXIT_OK, EXIT_INVALID, EXIT_STAGE = 0, 2, 3


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dp4brauer",
                                description="Brauer group computations for pencils of quadrics in P^4")
    sub = p.add_subparsers(dest="verb", required=True)

    def common(sp, field=True):
        sp.add_argument("file")
        if field:
            sp.add_argument("--field", choices=("k", "L"), default=None,
                            help="base field k or the declared extension L (default: L if declared)")
        sp.add_argument("--format", choices=("text", "json"), default="text")
        sp.add_argument("--threads", type=int, default=None,
                        help="worker threads for per-point stages (default: DP4_THREADS or 1)")

    common(sub.add_parser("analyze", help="run the full analysis"))
    common(sub.add_parser("h1", help="stop after the cohomology stage"))
    r = sub.add_parser("residues", help="tame residues of the verified symbol")
    common(r)
    r.add_argument("--at", required=True, action="append",
                   help="uniformizer, or a chain 'u1 -> u2' (specialize at u1, residue at u2)")
    common(sub.add_parser("verify-trace", help="check the certificate chain"), field=False)
    return p


def _emit(report: AnalysisReport, fmt: str, out):
    out.write(report.to_json() if fmt == "json" else report.to_text())


def main(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    args = _parser().parse_args(argv)
    try:
        spec = parse_pencil(args.file)
        which = getattr(args, "field", None)
        if args.verb == "analyze":
            report = analyze(spec, which, args.threads)
            _emit(report, args.format, out)
        elif args.verb == "h1":
            report = analyze(spec, which, args.threads, stop_after="h1")
            _emit(report, args.format, out)
        elif args.verb == "verify-trace":
            if not spec.certificates:
                raise ValidationError("the file has no [certificates] section")
            report = analyze(spec, None, args.threads, stop_after="trace")
            trace = report.stage("trace")
            if trace.skipped:
                raise ValidationError("; ".join(trace.notes))
            _emit(report, args.format, out)
        else:
            report = analyze(spec, which, args.threads, stop_after="trace")
            ver = report.data.get("verification")
            if ver is None:
                raise ValidationError("residues need a verified certificate chain")
            rows = []
            for text in args.at:
                chain = [p.strip() for p in text.split("->")]
                try:
                    r, fld = residue_chain(ver.final, chain)
                except ParseError:
                    raise
                except Exception as exc:
                    raise StageError("residues", exc) from exc
                rows.append({"at": " -> ".join(chain), "class": str(r), "trivial": r.trivial,
                             "residue_field": str(fld)})
            if args.format == "json":
                out.write(json.dumps({"symbol": str(ver.final), "residues": rows},
                                     indent=2, sort_keys=True) + "\n")
            else:
                out.write(f"symbol: {ver.final}\n")
                for row in rows:
                    state = "trivial" if row["trivial"] else "nontrivial"
                    out.write(f"residue at {row['at']}: {row['class']} ({state}) "
                              f"in {row['residue_field']}\n")
            return EXIT_OK
    except (ParseError, ValidationError) as exc:
        err.write(f"error: {exc}\n")
        return EXIT_INVALID
    except StageError as exc:
        err.write(f"error: {exc}\n")
        return EXIT_STAGE
    if not report.ok:
        err.write("error: some checks failed\n")
        return EXIT_STAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
