#!/usr/bin/env python3
"""
Determinism smoke test: run ``full-run`` twice with the same config and seed
and compare SHA-256 digests of every produced file.

Usage:
    python scripts/smoke_run.py [--config config/experiment.env] [--seed 0]

Exit codes:
    0 = Identical outputs
    1 = Outputs differ or a run failed
"""
import hashlib
import sys
import tempfile
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

from pansrr.cli import main as pansrr_main  # noqa: E402


def digests(root: Path) -> dict:
    return {
        str(path.relative_to(root)): hashlib.sha256(path.read_bytes()).hexdigest()
        for path in sorted(root.rglob("*"))
        if path.is_file()
    }


def run(out: Path, config, seed: int) -> int:
    argv = ["full-run", "--out", str(out), "--seed", str(seed)]
    if config:
        argv += ["--config", config]
    status = pansrr_main(argv)
    print(f"full-run -> {out}: exit {status}")
    return status


def main(argv=None) -> int:
    import argparse

    parser = argparse.ArgumentParser(description="Check that two seeded full runs are identical")
    parser.add_argument("--config", "-c", default=None)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    with tempfile.TemporaryDirectory() as tmp:
        first, second = Path(tmp) / "a", Path(tmp) / "b"
        if run(first, args.config, args.seed) or run(second, args.config, args.seed):
            return 1
        a, b = digests(first), digests(second)

    differing = sorted(name for name in a.keys() | b.keys() if a.get(name) != b.get(name))
    if differing:
        print(f"❌ {len(differing)} file(s) differ:")
        for name in differing:
            print(f"   • {name}")
        return 1
    print(f"✅ {len(a)} files identical")
    return 0


if __name__ == "__main__":
    sys.exit(main())
