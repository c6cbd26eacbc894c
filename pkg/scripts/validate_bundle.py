#!/usr/bin/env python3
"""
pansrr — Volume Bundle Validation Script

Checks a bundle directory: manifest schema, sample-file sizes against the
declared dimensions and encoding, and finiteness of every sample.

Usage:
    python scripts/validate_bundle.py runs/latest/reconstructed
    python scripts/validate_bundle.py runs/latest/lr/* --quiet

Exit codes:
    0 = Passed (every bundle valid)
    1 = Failed (problems found)
    2 = Error (manifest missing or unreadable)
"""
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

from pansrr.core.bundle import read_manifest, validate_bundle  # noqa: E402
from pansrr.errors import BundleError  # noqa: E402


def check(path: Path, quiet: bool) -> int:
    """Validate one bundle and print the outcome. Returns its exit code."""
    try:
        manifest = read_manifest(path)
    except BundleError as exc:
        print(f"Error reading bundle: {exc}", file=sys.stderr)
        return 2

    problems = validate_bundle(path)
    if quiet:
        print(f"{'PASSED' if not problems else 'FAILED'} {path}")
    elif not problems:
        print(f"✅ {path} PASSED")
        print(f"   {manifest.band_count} band(s), {manifest.width}x{manifest.height}, {manifest.encoding}")
    else:
        print(f"❌ {path} FAILED")
        print(f"   Found {len(problems)} problem(s):\n")
        for problem in problems:
            print(f"   • {problem}")
    return 0 if not problems else 1


def main(argv=None) -> int:
    """CLI entry point."""
    import argparse

    parser = argparse.ArgumentParser(description="Validate pansrr volume bundles")
    parser.add_argument("bundles", nargs="+", help="bundle directories")
    parser.add_argument("--quiet", "-q", action="store_true", help="Only show pass/fail")
    args = parser.parse_args(argv)

    return max(check(Path(b), args.quiet) for b in args.bundles)


if __name__ == "__main__":
    sys.exit(main())
