"""Figure rendering for the report pipeline.

Kept separate from the CLI so matplotlib is only imported when figures
are actually requested.  Figures are derived from the same grid and
verification data that go into report.json.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib
import numpy as np

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .metric import metric_grid  # noqa: E402


def render_figures(cfg, data, cert, report: dict, out_dir: Path) -> list:
    """Write the conformal-factor heatmap and a verification summary;
    returns the list of created paths."""
    out_dir = Path(out_dir)
    written = []
    written.append(_lambda_heatmap(cfg, data, cert, out_dir))
    if "verification" in report:
        written.append(_summary_figure(report, out_dir))
    return written


def _lambda_heatmap(cfg, data, cert, out_dir: Path) -> Path:
    samples, _ = metric_grid(data, cert, cfg.grid_width, cfg.grid_height,
                             domain=cfg.grid_domain)
    xs = sorted({s.z.real for s in samples})
    ys = sorted({s.z.imag for s in samples})
    grid = np.full((len(ys), len(xs)), np.nan)
    xi = {x: k for k, x in enumerate(xs)}
    yi = {y: k for k, y in enumerate(ys)}
    for s in samples:
        grid[yi[s.z.imag], xi[s.z.real]] = np.log10(s.lam)

    fig, ax = plt.subplots(figsize=(7, 5))
    im = ax.pcolormesh(xs, ys, grid, shading="nearest", cmap="viridis")
    fig.colorbar(im, ax=ax, label=r"$\log_{10}\lambda$")
    poles = [complex(p) for p in data.poles]
    ax.plot([p.real for p in poles], [p.imag for p in poles],
            "wx", markersize=8, markeredgewidth=2)
    ax.set_xlabel("Re z")
    ax.set_ylabel("Im z")
    ax.set_title("conformal factor")
    ax.set_aspect("equal")
    path = out_dir / "lambda_heatmap.png"
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)
    return path


def _summary_figure(report: dict, out_dir: Path) -> Path:
    ver = report["verification"]
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 4))

    est = ver["cone_angle_estimates"]
    tgt = ver["cone_angle_targets"]
    idx = np.arange(len(est))
    ax1.bar(idx - 0.18, tgt, width=0.36, label="target")
    ax1.bar(idx + 0.18, est, width=0.36, label="estimate")
    ax1.set_xticks(idx)
    ax1.set_xlabel("cone point")
    ax1.set_ylabel(r"$\alpha$")
    ax1.set_title("cone angles")
    ax1.legend()

    names = ["|K-1| max", "area err", "path indep", "delta"]
    values = [ver["curvature_max_deviation"],
              abs(ver["area"] - ver["area_target"]),
              ver["path_independence_residual"],
              report.get("solver", {}).get("delta", np.nan)]
    floors = 1e-18
    ax2.bar(names, [max(v, floors) for v in values])
    ax2.set_yscale("log")
    ax2.set_title("residuals")
    ax2.tick_params(axis="x", rotation=20)

    fig.tight_layout()
    path = out_dir / "verification_summary.png"
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
