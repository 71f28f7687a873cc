#!/usr/bin/env python3
"""Run the trace-norm solver on one synthetic matrix-sensing instance.

Extra flags are forwarded to `pdbfw run`; results land in results/trace.
"""

import sys

from pdbfw.cli import main

# k and delta are widened past the conservative defaults; with them the
# solver certifies a 1e-8 gap on this instance in under 30 iterations
DEFAULTS = [
    "--synthetic", "trace_sensing", "--constraint", "trace",
    "--n", "100", "--d", "80", "--c", "60", "--sparsity", "5",
    "--seed", "0", "--radius", "30.0", "--s", "8",
    "--k", "50", "--delta", "100.0",
    "--max-iters", "300",
    "--output-dir", "results/trace",
]


def run() -> int:
    extra = sys.argv[1:]
    out_dir = "results/trace"
    if "--output-dir" in extra:
        out_dir = extra[extra.index("--output-dir") + 1]
    code = main(["run"] + DEFAULTS + extra)
    if code != 0:
        return code
    return main(["compare", out_dir])


if __name__ == "__main__":
    sys.exit(run())
