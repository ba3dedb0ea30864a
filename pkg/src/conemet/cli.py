"""Command line pipeline: exact admissibility checks, accessory-parameter
solving, metric verification, and grid export.

Configuration is a TOML file; points and angles are written as exact
rationals (decimals are converted exactly), so the check stage never
depends on floating point.  Subcommand outputs are deterministic
functions of the configuration and seeds.
"""

from __future__ import annotations

import hashlib
import json
import re
import sys

try:
    import tomllib
except ModuleNotFoundError:
    import tomli as tomllib
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import click
import numpy as np

from . import __version__, exact
from .errors import (ConemetError, InvalidConfiguration, NoConvergence,
                     NotUnitarizable, ParseError, ToleranceNotMet)
from .gaussian import QI
from .metric import metric_grid, verify_metric
from .schwarzian import DEFAULT_TOL, SchwarzianData, monodromy_generators
from .unitarize import (DELTA_ACCEPT, HermitianForm, certificate_from_form,
                        solve_unitarizing_parameters)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INADMISSIBLE = 2
EXIT_SOLVER = 3
EXIT_VERIFY = 4


# ---------------------------------------------------------------------------
# scalar parsing
# ---------------------------------------------------------------------------

_RAT = r"[+-]?\d+(?:/\d+|\.\d+)?"
_COMPLEX_RE = re.compile(
    rf"^(?P<re>{_RAT})?(?P<im>(?:[+-]|^){_RAT}?i)?$".replace("|^", "|"))


def parse_fraction(text: str) -> Fraction:
    """Exact rational from 'p/q', integer, or decimal notation."""
    text = text.strip()
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as e:
        raise ParseError(f"cannot read rational {text!r}: {e}") from None


def parse_point(text: str):
    """Gaussian rational from '3', '-1/2', '0.25', '1+2i', '1/2-1/3i',
    'i', or the marker 'inf'."""
    text = text.strip().replace(" ", "")
    if text in ("inf", "oo", "infinity"):
        return "inf"
    if not text:
        raise ParseError("empty point")
    # split into real and imaginary terms
    re_part, im_part = Fraction(0), Fraction(0)
    seen = False
    for term in re.findall(rf"[+-]?(?:{_RAT})?i|[+-]?{_RAT}", text):
        if term.endswith("i"):
            body = term[:-1]
            if body in ("", "+"):
                body = "1"
            elif body == "-":
                body = "-1"
            im_part += parse_fraction(body)
        else:
            re_part += parse_fraction(term)
        seen = True
    joined = "".join(re.findall(rf"[+-]?(?:{_RAT})?i|[+-]?{_RAT}", text))
    if not seen or joined != text:
        raise ParseError(f"cannot read point {text!r}")
    return QI(re_part, im_part)


def mobius_normalize(points):
    """Send a point at infinity to 0 by z -> 1/(z - c).

    c is the smallest nonnegative integer differing from every finite
    point, so the transform is exact over Q(i) and reproducible.
    """
    if points.count("inf") > 1:
        raise InvalidConfiguration("at most one point may be infinite")
    if "inf" not in points:
        return list(points), None
    finite = [p for p in points if p != "inf"]
    c = 0
    while any(p == QI(c) for p in finite):
        c += 1
    shift = QI(c)
    out = [QI(0) if p == "inf" else 1 / (p - shift) for p in points]
    return out, c


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------

@dataclass
class JobConfig:
    points: list
    angles: list
    mobius_c: int | None = None
    tol: float = DEFAULT_TOL
    delta_accept: float = DELTA_ACCEPT
    seeds: int = 3
    rng_seed: int = 0
    maxiter: int = 200
    stencil_h: float = 1e-3
    clearance: float = 0.1
    n_radial: int = 48
    n_angular: int = 48
    grid_width: int = 40
    grid_height: int = 30
    grid_domain: tuple | None = None
    raw: dict = field(default_factory=dict)

    @property
    def cone_configuration(self) -> exact.ConeConfiguration:
        return exact.ConeConfiguration(tuple(self.points), tuple(self.angles))

    @property
    def poles(self) -> list:
        return [complex(p) for p in self.points]

    def digest(self) -> str:
        key = repr((tuple((str(p.re), str(p.im)) for p in self.points),
                    tuple(str(a) for a in self.angles))).encode()
        return hashlib.sha256(key).hexdigest()[:16]


def load_config(path: str, seed=None, tol=None, grid=None) -> JobConfig:
    try:
        with open(path, "rb") as fh:
            doc = tomllib.load(fh)
    except OSError as e:
        raise ParseError(f"cannot open config {path}: {e}") from None
    except tomllib.TOMLDecodeError as e:
        raise ParseError(f"malformed config {path}: {e}") from None

    try:
        points = [parse_point(str(p)) for p in doc["points"]]
        angles = [parse_fraction(str(a)) for a in doc["angles"]]
    except KeyError as e:
        raise ParseError(f"config missing required key {e}") from None
    points, mob_c = mobius_normalize(points)

    cfg = JobConfig(points=points, angles=angles, mobius_c=mob_c, raw=doc)
    solver = doc.get("solver", {})
    cfg.tol = float(solver.get("tol", cfg.tol))
    cfg.delta_accept = float(solver.get("delta_accept", cfg.delta_accept))
    cfg.seeds = int(solver.get("seeds", cfg.seeds))
    cfg.rng_seed = int(solver.get("rng_seed", cfg.rng_seed))
    cfg.maxiter = int(solver.get("maxiter", cfg.maxiter))
    verify = doc.get("verify", {})
    cfg.stencil_h = float(verify.get("stencil_h", cfg.stencil_h))
    cfg.clearance = float(verify.get("clearance", cfg.clearance))
    cfg.n_radial = int(verify.get("n_radial", cfg.n_radial))
    cfg.n_angular = int(verify.get("n_angular", cfg.n_angular))
    grid_tab = doc.get("grid", {})
    cfg.grid_width = int(grid_tab.get("width", cfg.grid_width))
    cfg.grid_height = int(grid_tab.get("height", cfg.grid_height))
    if "domain" in grid_tab:
        dom = [float(v) for v in grid_tab["domain"]]
        if len(dom) != 4 or dom[0] >= dom[1] or dom[2] >= dom[3]:
            raise ParseError("grid domain must be [x0, x1, y0, y1]")
        cfg.grid_domain = tuple(dom)

    if any(v <= 0 for v in (cfg.tol, cfg.delta_accept, cfg.stencil_h,
                            cfg.clearance)):
        raise ParseError("tolerances must be positive")
    if seed is not None:
        cfg.rng_seed = int(seed)
    if tol is not None:
        cfg.tol = float(tol)
    if grid is not None:
        m = re.match(r"^(\d+)x(\d+)$", grid)
        if not m:
            raise ParseError(f"grid spec {grid!r} is not WxH")
        cfg.grid_width, cfg.grid_height = int(m.group(1)), int(m.group(2))
    return cfg


# ---------------------------------------------------------------------------
# serialization helpers
# ---------------------------------------------------------------------------

def _c(z) -> list:
    z = complex(z)
    return [z.real, z.imag]


def _mat(M) -> list:
    return [[_c(v) for v in row] for row in np.asarray(M)]


def provenance(cfg: JobConfig) -> dict:
    return {
        "config_digest": cfg.digest(),
        "version": __version__,
        "rng_seed": cfg.rng_seed,
        "seeds": cfg.seeds,
        "mobius_c": cfg.mobius_c,
    }


def _json_default(obj):
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dump_json(payload: dict) -> str:
    return json.dumps(payload, indent=2, sort_keys=True,
                      default=_json_default)


def write_json(path: Path, payload: dict):
    path.write_text(dump_json(payload) + "\n")


# ---------------------------------------------------------------------------
# pipeline stages
# ---------------------------------------------------------------------------

def run_check(cfg: JobConfig) -> dict:
    conf = cfg.cone_configuration
    gb = exact.check_gauss_bonnet(conf)
    stab = exact.check_angle_stability(conf)
    section = {
        "points": [[str(p.re), str(p.im)] for p in cfg.points],
        "angles": [str(a) for a in cfg.angles],
        "gauss_bonnet": gb,
        "angle_stability": stab,
        "admissible": gb and stab,
    }
    weights = exact.weights_from_angles(conf)
    model = exact.BundleModel(conf.n)
    flag = exact.canonical_flag(conf)
    section["weight_sum"] = str(sum(a1 + a2 for a1, a2 in weights.pairs))
    section["parabolic_degree_total"] = str(
        exact.parabolic_degree_total(model, weights))
    degree, line = exact.max_destabilizing_degree(flag, weights, conf)
    section["max_destabilizing_degree"] = str(degree)
    section["stable"] = degree < 0
    if not section["stable"] and line is not None:
        section["destabilizing_subbundle"] = {
            "degree": line.degree,
            "p": [[str(c.re), str(c.im)] for c in line.p],
            "q": [[str(c.re), str(c.im)] for c in line.q],
        }
    n = conf.n
    section["tangency_count"] = exact.tangency_count(-(n - 2), 1, n)
    section["splitting_type"] = list(
        exact.splitting_type_from_invariants(n, -(n - 2)))
    return section


def run_solve(cfg: JobConfig):
    data, cert = solve_unitarizing_parameters(
        cfg.poles, cfg.angles, seeds=cfg.seeds,
        delta_accept=cfg.delta_accept, tol=cfg.tol,
        rng_seed=cfg.rng_seed, maxiter=cfg.maxiter)
    rep = monodromy_generators(data, tol=cfg.tol)
    section = {
        "accessory": [_c(b) for b in data.accessory],
        "delta": cert.delta,
        "form": _mat(cert.form.matrix),
        "residuals": list(cert.residuals),
        "commutator_norm": cert.commutator_norm,
        "ordering": list(rep.ordering),
        "traces": [_c(np.trace(M)) for M in rep.matrices],
        "det_residuals": rep.det_residuals(),
        "product_residual": rep.product_residual(),
        "seed_results": [
            {"seed": idx, "delta": d, "free": [_c(v) for v in free]}
            for idx, d, free in cert.seed_results],
    }
    return data, cert, section


def solved_payload(cfg: JobConfig, data, cert) -> dict:
    return {
        "poles": [_c(p) for p in data.poles],
        "angles": [str(a) for a in cfg.angles],
        "accessory": [_c(b) for b in data.accessory],
        "delta": cert.delta,
        "form": _mat(cert.form.matrix),
        "provenance": provenance(cfg),
    }


def load_solved(cfg: JobConfig, path: Path):
    if not path.exists():
        raise click.UsageError(f"missing solved artifact {path}; run solve")
    doc = json.loads(path.read_text())
    data = SchwarzianData(
        poles=tuple(complex(r, i) for r, i in doc["poles"]),
        angles=tuple(float(Fraction(a)) for a in doc["angles"]),
        accessory=tuple(complex(r, i) for r, i in doc["accessory"]))
    form = HermitianForm(np.array(
        [[complex(r, i) for r, i in row] for row in doc["form"]]))
    rep = monodromy_generators(data, tol=cfg.tol)
    return data, certificate_from_form(rep, form)


def run_verify_section(cfg: JobConfig, data, cert) -> dict:
    rep = verify_metric(data, cert, h=cfg.stencil_h,
                        clearance=cfg.clearance,
                        n_radial=cfg.n_radial, n_angular=cfg.n_angular)
    return {
        "curvature_max_deviation": rep.curvature_max_deviation,
        "cone_angle_estimates": [float(a) for a in rep.cone_angle_estimates],
        "cone_angle_targets": [float(a) for a in rep.cone_angle_targets],
        "cone_angle_rel_errors": [float(e) for e in rep.cone_angle_rel_errors],
        "area": rep.area,
        "area_target": rep.area_target,
        "path_independence_residual": rep.path_independence_residual,
        "min_lambda": rep.min_lambda,
        "monodromy_angle_consistency": rep.monodromy_angle_consistency,
        "tolerances": rep.tolerances,
        "passed": rep.passed(),
    }


def export_grid(cfg: JobConfig, data, cert, path: Path) -> dict:
    samples, skipped = metric_grid(data, cert, cfg.grid_width,
                                   cfg.grid_height, domain=cfg.grid_domain)
    lines = ["re z,im z,lambda,chart"]
    for s in samples:
        lines.append(f"{s.z.real:.17g},{s.z.imag:.17g},"
                     f"{s.lam:.17g},{s.chart}")
    path.write_text("\n".join(lines) + "\n")
    return {
        "file": path.name,
        "rows": len(samples),
        "skipped": [_c(z) for z in skipped],
        "width": cfg.grid_width,
        "height": cfg.grid_height,
    }


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def common_options(fn):
    fn = click.option("--config", "config_path", required=True,
                      type=click.Path(), help="TOML job configuration")(fn)
    fn = click.option("--out", "out_dir", default=".",
                      type=click.Path(file_okay=False),
                      help="output directory")(fn)
    fn = click.option("--seed", type=int, default=None,
                      help="override solver rng seed")(fn)
    fn = click.option("--tol", type=float, default=None,
                      help="override transport tolerance")(fn)
    fn = click.option("--grid", default=None,
                      help="grid size WxH for sample/report")(fn)
    fn = click.option("--json", "as_json", is_flag=True,
                      help="print the report to stdout as JSON")(fn)
    return fn


def _emit(report: dict, as_json: bool, lines):
    if as_json:
        click.echo(dump_json(report))
    else:
        for line in lines:
            click.echo(line)


@click.group()
def cli():
    """Certify cone-angle data exactly and build the spherical metric."""


@cli.command()
@common_options
def check(config_path, out_dir, seed, tol, grid, as_json):
    """Exact admissibility and stability verdicts."""
    cfg = load_config(config_path, seed, tol, grid)
    section = run_check(cfg)
    report = {"exact": section, "provenance": provenance(cfg)}
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_json(out / "report.json", report)
    _emit(report, as_json, [
        f"gauss-bonnet: {'ok' if section['gauss_bonnet'] else 'violated'}",
        f"angle stability: "
        f"{'ok' if section['angle_stability'] else 'violated'}",
        f"stable: {section['stable']}",
    ])
    if not section["admissible"]:
        sys.exit(EXIT_INADMISSIBLE)


@cli.command()
@common_options
def solve(config_path, out_dir, seed, tol, grid, as_json):
    """Solve for unitarizing accessory parameters."""
    cfg = load_config(config_path, seed, tol, grid)
    exact_section = run_check(cfg)
    if not exact_section["admissible"]:
        click.echo("configuration is inadmissible", err=True)
        sys.exit(EXIT_INADMISSIBLE)
    try:
        data, cert, section = run_solve(cfg)
    except (NotUnitarizable, NoConvergence, ToleranceNotMet) as e:
        click.echo(f"solver failed: {e}", err=True)
        sys.exit(EXIT_SOLVER)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_json(out / "solved.json", solved_payload(cfg, data, cert))
    report = {"exact": exact_section, "solver": section,
              "provenance": provenance(cfg)}
    write_json(out / "report.json", report)
    _emit(report, as_json, [
        f"delta: {cert.delta:.3e}",
        "accessory: " + ", ".join(f"{complex(b):.6g}"
                                  for b in data.accessory),
        f"wrote {out / 'solved.json'}",
    ])


@cli.command()
@common_options
def verify(config_path, out_dir, seed, tol, grid, as_json):
    """Verify curvature, cone angles, area, and path independence."""
    cfg = load_config(config_path, seed, tol, grid)
    out = Path(out_dir)
    data, cert = load_solved(cfg, out / "solved.json")
    exact_section = run_check(cfg)
    section = run_verify_section(cfg, data, cert)
    report = {"exact": exact_section,
              "solver": {"delta": cert.delta,
                         "accessory": [_c(b) for b in data.accessory]},
              "verification": section,
              "provenance": provenance(cfg)}
    write_json(out / "report.json", report)
    _emit(report, as_json, [
        f"max |K - 1|: {section['curvature_max_deviation']:.3e}",
        f"cone angles: {section['cone_angle_estimates']}",
        f"area: {section['area']:.6f} "
        f"(target {section['area_target']:.6f})",
        f"passed: {section['passed']}",
    ])
    if not section["passed"]:
        sys.exit(EXIT_VERIFY)


@cli.command()
@common_options
def sample(config_path, out_dir, seed, tol, grid, as_json):
    """Export the metric on a lattice as CSV."""
    cfg = load_config(config_path, seed, tol, grid)
    out = Path(out_dir)
    data, cert = load_solved(cfg, out / "solved.json")
    grid_section = export_grid(cfg, data, cert, out / "grid.csv")
    report_path = out / "report.json"
    report = (json.loads(report_path.read_text())
              if report_path.exists() else {})
    report["grid"] = grid_section
    report.setdefault("provenance", provenance(cfg))
    write_json(report_path, report)
    _emit(report, as_json, [
        f"wrote {out / 'grid.csv'} "
        f"({grid_section['rows']} rows, "
        f"{len(grid_section['skipped'])} skipped)",
    ])


@cli.command()
@common_options
def report(config_path, out_dir, seed, tol, grid, as_json):
    """Full pipeline: check, solve, verify, sample, and figures."""
    from . import report as report_mod

    cfg = load_config(config_path, seed, tol, grid)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    exact_section = run_check(cfg)
    if not exact_section["admissible"]:
        write_json(out / "report.json",
                   {"exact": exact_section, "provenance": provenance(cfg)})
        click.echo("configuration is inadmissible", err=True)
        sys.exit(EXIT_INADMISSIBLE)
    try:
        data, cert, solver_section = run_solve(cfg)
    except (NotUnitarizable, NoConvergence, ToleranceNotMet) as e:
        click.echo(f"solver failed: {e}", err=True)
        sys.exit(EXIT_SOLVER)
    write_json(out / "solved.json", solved_payload(cfg, data, cert))
    verify_section = run_verify_section(cfg, data, cert)
    grid_section = export_grid(cfg, data, cert, out / "grid.csv")
    full = {"exact": exact_section, "solver": solver_section,
            "verification": verify_section, "grid": grid_section,
            "provenance": provenance(cfg)}
    write_json(out / "report.json", full)
    figures = report_mod.render_figures(cfg, data, cert, full, out)
    full["figures"] = [f.name for f in figures]
    write_json(out / "report.json", full)
    _emit(full, as_json, [
        f"delta: {cert.delta:.3e}",
        f"verification passed: {verify_section['passed']}",
        f"wrote report.json, solved.json, grid.csv and "
        f"{len(figures)} figures in {out}",
    ])
    if not verify_section["passed"]:
        sys.exit(EXIT_VERIFY)


def main():
    try:
        cli.main(standalone_mode=False)
    except click.UsageError as e:
        click.echo(f"usage error: {e.format_message()}", err=True)
        sys.exit(EXIT_USAGE)
    except click.ClickException as e:
        e.show()
        sys.exit(EXIT_USAGE)
    except click.exceptions.Abort:
        sys.exit(EXIT_USAGE)
    except ParseError as e:
        click.echo(f"config error: {e}", err=True)
        sys.exit(EXIT_USAGE)
    except InvalidConfiguration as e:
        click.echo(f"invalid configuration: {e}", err=True)
        sys.exit(EXIT_INADMISSIBLE)
    except ConemetError as e:
        click.echo(f"error: {e}", err=True)
        sys.exit(EXIT_SOLVER)


if __name__ == "__main__":
    main()
