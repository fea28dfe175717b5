"""Smoke test for the zeno_py extension.

Builds the extension with cargo when it is not importable, then exercises
each binding once.

    python3 python/smoke_test.py
"""

import json
import math
import shutil
import subprocess
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent


def load_extension():
    try:
        import zeno_py  # noqa: F401  (installed via maturin)

        return zeno_py
    except ImportError:
        pass
    subprocess.run(
        ["cargo", "build", "-p", "zeno-py", "--features", "extension-module"],
        cwd=ROOT,
        check=True,
    )
    built = ROOT / "target" / "debug" / "libzeno_py.so"
    if not built.exists():
        built = ROOT / "target" / "debug" / "libzeno_py.dylib"
    staging = Path(tempfile.mkdtemp(prefix="zeno_py_"))
    shutil.copy(built, staging / "zeno_py.so")
    sys.path.insert(0, str(staging))
    import zeno_py

    return zeno_py


def main():
    z = load_extension()

    n, exact, bound = z.window_size(0.1, 1e-8)
    assert n == 99 and exact <= bound, (n, exact, bound)

    n, taps, ripple = z.design_window(0.1, 1e-8)
    assert len(taps) == 2 * n + 1
    assert abs(sum(taps) - 1.0) < 1e-12
    assert ripple <= 1e-4

    assert abs(z.grover_gap(16, 1, 0.5) - 0.25) < 1e-12
    assert abs(z.qlsp_gap(10.0, 1.0) - 0.1) < 1e-12
    try:
        z.grover_gap(4, 4, 0.5)
    except ValueError:
        pass
    else:
        raise AssertionError("invalid problem accepted")

    manifest = {
        "problem": {"kind": "grover", "n": 16, "m": 1},
        "schedule": {"kind": "adaptive", "q": 0.5},
        "epsilon": 0.1,
        "mode": "ode",
    }
    report = json.loads(z.run_manifest(json.dumps(manifest)))
    assert report["passed"] and report["final_infidelity"] <= 0.1
    assert math.isfinite(report["cost"]["t_physical"])

    failed, text = z.verify("lemma15")
    assert failed == 0 and json.loads(text)["suite"] == "lemma15"

    print(f"zeno_py {z.__version__}: all smoke checks passed")


if __name__ == "__main__":
    main()
