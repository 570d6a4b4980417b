#!/usr/bin/env python3
"""Regenerate the golden images under tests/golden from the checked-in
fixture artifacts.  Run after any intentional rendering change, then
review the images before committing."""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent))
sys.path.insert(0, str(Path(__file__).resolve().parent / "tests"))

from render import render  # noqa: E402
from test_render import SPECS, build_spec  # noqa: E402


def main() -> int:
    base = Path(__file__).resolve().parent / "tests"
    fixtures, golden = base / "fixtures", base / "golden"
    golden.mkdir(exist_ok=True)
    for kind in sorted(SPECS):
        image, _ = render(build_spec(kind, fixtures, golden / f"{kind}.png"))
        print(image)
    return 0


if __name__ == "__main__":
    sys.exit(main())
