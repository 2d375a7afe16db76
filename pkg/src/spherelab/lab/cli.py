"""``lab <experiment> --config <file> [--out <dir>] [--seed <n>] [--budget-cells <n>]``."""
import argparse
import csv
import hashlib
import io
import os
import platform
import sys
import time

import numpy as np

from .. import __version__
from .. import kernels
from .experiments import POLICY, SCHEMAS, parse_config_text, run


def _cell(v):
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return str(v)


def format_csv(result):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(result.columns)
    for row in result.rows:
        w.writerow([_cell(v) for v in row])
    return buf.getvalue()


def _param_text(v):
    if isinstance(v, list):
        return ",".join(_cell(x) for x in v)
    return _cell(v)


def _sha256(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def write_plot(path, result):
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    matplotlib.rcParams["svg.hashsalt"] = "spherelab"  # stable element ids
    fit = result.fit
    lx = np.array([p[0] for p in fit.points])
    ly = np.array([p[1] for p in fit.points])
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.scatter(lx, ly, label="data")
    xx = np.linspace(lx.min(), lx.max(), 2)
    ax.plot(xx, fit.slope * xx + fit.intercept, label=f"slope {fit.slope:.3f}")
    ax.set_xlabel(f"log {result.plot[0]}")
    ax.set_ylabel(f"log {result.plot[1]}")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def build_parser():
    ap = argparse.ArgumentParser(prog="lab", description="Run a spherelab experiment.")
    ap.add_argument("experiment", choices=sorted(SCHEMAS))
    ap.add_argument("--config", required=True, help="flat key=value file")
    ap.add_argument("--out", default=".", help="output directory (default: cwd)")
    ap.add_argument("--seed", type=int, default=None, help="overrides seed= in the config")
    ap.add_argument("--budget-cells", type=int, default=None,
                    help="overrides budget_cells= in the config")
    ap.add_argument("--no-plot", action="store_true", help="skip plot.svg")
    return ap


def run_cli(experiment, config_text, out_dir, seed=None, budget_cells=None, plot=True):
    """Run one experiment and write its files; returns (result, written paths)."""
    params = parse_config_text(experiment, config_text)
    if seed is not None:
        params["seed"] = seed
    if budget_cells is not None:
        if budget_cells <= 0:
            raise ValueError("--budget-cells must be positive")
        params["budget_cells"] = budget_cells
    os.makedirs(out_dir, exist_ok=True)

    t0 = time.perf_counter()
    result = run(experiment, params)
    wall = time.perf_counter() - t0

    files = []
    csv_path = os.path.join(out_dir, "results.csv")
    with open(csv_path, "w", newline="") as fh:
        fh.write(format_csv(result))
    files.append(csv_path)
    if plot and result.fit is not None and result.plot is not None:
        svg = os.path.join(out_dir, "plot.svg")
        write_plot(svg, result)
        files.append(svg)

    lines = [f"# {POLICY}",
             f"experiment={experiment}",
             f"version={__version__}",
             f"backend={kernels.BACKEND}",
             f"python={platform.python_version()}",
             f"numpy={np.__version__}",
             f"seed={params['seed']}",
             f"wall_clock_seconds={wall:.3f}"]
    lines += [f"param.{k}={_param_text(params[k])}" for k in sorted(params)]
    if result.fit is not None:
        lines += [f"fit.slope={result.fit.slope!r}", f"fit.intercept={result.fit.intercept!r}",
                  f"fit.max_residual={result.fit.max_residual!r}"]
    lines += [f"summary.{k}={_param_text(v)}" for k, v in sorted(result.summary.items())]
    lines += [f"file.{os.path.basename(p)}=sha256:{_sha256(p)}" for p in files]
    manifest = os.path.join(out_dir, "manifest.txt")
    with open(manifest, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    return result, files + [manifest]


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        with open(args.config) as fh:
            text = fh.read()
        result, _ = run_cli(args.experiment, text, args.out, args.seed, args.budget_cells,
                            plot=not args.no_plot)
    except (OSError, ValueError) as exc:
        print(f"lab: error: {exc}", file=sys.stderr)
        return 2
    print(POLICY)
    if result.fit is not None:
        print(f"slope={result.fit.slope:.4f}")
    for k, v in sorted(result.summary.items()):
        print(f"{k}={_param_text(v)}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
