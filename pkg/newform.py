import json
import logging
import os
from dataclasses import dataclass
from typing import Any, Dict, List, Optional

import click
import numpy as np
import typer
from dotenv import load_dotenv

from newform_utils.branching import restrict_o, restrict_o2, restrict_u, spherical_ktypes
from newform_utils.errors import NewformError
from newform_utils.harmonics import eval_poly, zonal
from newform_utils.invariants import conductor_exponent, epsilon_factor, summary
from newform_utils.profile_manager import ProfileManager
from newform_utils.quadrature import QuadratureSpec
from newform_utils.repcore import (
    GroupKind,
    HighestWeight,
    canonicalize,
    field_from_symbol,
    format_complex,
    format_descriptor,
    parse_complex,
    parse_descriptor,
)
from newform_utils.special import l_factor, rs_l_factor
from newform_utils.whittaker import (
    whittaker_gl1,
    whittaker_gl2_closed,
    whittaker_gl2_jacquet,
    whittaker_propagate,
)
from newform_utils.zetaintegrals import verify_suite
from verify_log import write_reports

logging.getLogger("sympy").setLevel(logging.WARNING)
logging.getLogger("matplotlib").setLevel(logging.WARNING)
logging.getLogger("numba").setLevel(logging.WARNING)

load_dotenv()
app = typer.Typer(name="newform", add_completion=False)

PROFILE_DIR = os.getenv("NEWFORM_PROFILE_DIR", "profiles")
DEFAULT_SEED = int(os.getenv("NEWFORM_SEED", "20240611"))
DEFAULT_BUDGET = int(os.getenv("NEWFORM_BUDGET", "2000000"))
DEFAULT_REPORT_CSV = os.getenv("NEWFORM_REPORT_CSV", "newform_reports.csv")


@dataclass
class GlobalOptions:
    json: bool = False
    # None means "not given on the command line": profiles keep their own values
    seed_option: Optional[int] = None
    budget_option: Optional[int] = None
    verbose: bool = False

    @property
    def seed(self) -> int:
        return DEFAULT_SEED if self.seed_option is None else self.seed_option

    @property
    def budget(self) -> int:
        return DEFAULT_BUDGET if self.budget_option is None else self.budget_option


state = GlobalOptions()


@app.callback()
def main(
    as_json: bool = typer.Option(False, "--json", help="Print machine-readable JSON instead of text"),
    seed: Optional[int] = typer.Option(None, "--seed", help="Seed for every Monte Carlo estimate"),
    budget: Optional[int] = typer.Option(None, "--budget", min=1, help="Maximum quadrature nodes per integral"),
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Debug logging to stderr"),
):
    """Archimedean newform invariants, Whittaker newforms and zeta-integral checks."""
    state.json, state.seed_option, state.budget_option, state.verbose = as_json, seed, budget, verbose
    logging.basicConfig(level=logging.DEBUG if verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")


def _emit(payload: Dict[str, Any], text_lines: List[str]) -> None:
    if state.json:
        typer.echo(json.dumps(payload, ensure_ascii=False, indent=2, sort_keys=True))
    else:
        for line in text_lines:
            typer.echo(line)


def _fail(exc: NewformError) -> None:
    typer.secho(f"error: {type(exc).__name__}: {exc}", fg=typer.colors.RED, err=True)
    raise typer.Exit(code=2)


def _complex_json(z: complex) -> str:
    return format_complex(complex(z))


@app.command()
def invariants(
    descriptor: str = typer.Argument(..., help='e.g. "R: D^3 t=0 ; chi^0 t=-0.2"'),
    extra: int = typer.Option(10, "--extra", min=0, help="Oldform table runs up to m = c + extra"),
):
    """Conductor exponent, newform K-type, epsilon factor and oldform dimensions."""
    try:
        rep = canonicalize(parse_descriptor(descriptor))
        info = summary(rep, extra)
    except NewformError as exc:
        _fail(exc)
    info["descriptor"] = format_descriptor(rep)
    info["langlands_ordered_input"] = rep.was_ordered
    lines = [
        f"descriptor            {info['descriptor']}",
        f"conductor exponent    {info['conductor_exponent']}",
        f"newform K-type        ({','.join(str(e) for e in info['newform_ktype'])})",
        f"dim of newform K-type {info['newform_ktype_dimension']}",
        f"epsilon factor        {info['epsilon']['display']}",
        f"minimal K-type        ({','.join(str(e) for e in info['minimal_ktype'])})",
        "oldform dimensions:",
    ]
    lines += [f"  m={m:>3}  {d}" for m, d in info["oldform_dims"].items()]
    if "oldform_convention" in info:
        typer.secho(f"note: {info['oldform_convention']}", fg=typer.colors.YELLOW, err=True)
    _emit(info, lines)


def _parse_weight(text: str) -> HighestWeight:
    head, _, body = text.partition(":")
    group = {"U": GroupKind.UNITARY, "O": GroupKind.ORTHOGONAL}.get(head.strip().upper())
    if group is None or not body.strip():
        raise typer.BadParameter(f"expected 'U: 2,0,-1' or 'O: 3,1,0', got {text!r}")
    try:
        entries = tuple(int(e) for e in body.replace(",", " ").split())
    except ValueError:
        raise typer.BadParameter(f"weight entries must be integers, got {body!r}")
    return HighestWeight(group, entries)


@app.command()
def branch(
    descriptor: Optional[str] = typer.Argument(None, help="Representation whose spherical K-types are listed"),
    weight: Optional[str] = typer.Option(None, "--weight", help="Restrict a single weight, e.g. 'O: 3,1,0'"),
    max_degree: Optional[int] = typer.Option(None, "--max-degree", min=0, help="Highest Howe degree listed"),
    o2: bool = typer.Option(False, "--o2", help="Restrict O(n) to O(n-2) x O(2) instead of O(n-1) x O(1)"),
):
    """Branching of a K-type, or the K_{n-1}-spherical K-types of a representation by degree."""
    if (descriptor is None) == (weight is None):
        raise typer.BadParameter("give either a descriptor or --weight")
    try:
        if weight is not None:
            w = _parse_weight(weight)
            if w.group is GroupKind.UNITARY:
                terms = restrict_u(w)
            else:
                terms = restrict_o2(w) if o2 else restrict_o(w)
            rows = [{"sub_weight": list(t.sub_weight.entries),
                     "det_weight": t.det_weight if isinstance(t.det_weight, int) else list(t.det_weight.entries),
                     "multiplicity": t.multiplicity} for t in terms]
            lines = [f"{t.sub_weight} x {t.det_weight}  (mult {t.multiplicity})" for t in terms]
            _emit({"weight": list(w.entries), "group": w.group.value, "terms": rows}, lines)
            return
        rep = canonicalize(parse_descriptor(descriptor))
        c = conductor_exponent(rep)
        top = c + 4 if max_degree is None else max_degree
        payload: Dict[str, Any] = {"descriptor": format_descriptor(rep), "degrees": {}}
        lines = [f"{format_descriptor(rep)}  (c = {c})"]
        for m in range(top + 1):
            found = [(tau, mult) for tau, mult in spherical_ktypes(rep, m) if mult]
            payload["degrees"][str(m)] = [{"ktype": list(tau.entries), "multiplicity": mult} for tau, mult in found]
            listing = ", ".join(f"{tau}^{mult}" for tau, mult in found) or "-"
            lines.append(f"  degree {m:>3}: {listing}")
    except NewformError as exc:
        _fail(exc)
    _emit(payload, lines)


@app.command("zonal")
def zonal_cmd(
    field: str = typer.Argument(..., help="R or C"),
    n: int = typer.Argument(..., min=1),
    degrees: List[int] = typer.Argument(..., help="p over R, p q over C"),
    at: Optional[str] = typer.Option(None, "--eval", help="Comma-separated point to evaluate at"),
):
    """The zonal harmonic polynomial P with P(e_n) = 1."""
    try:
        fld = field_from_symbol(field)
        P = zonal(fld, n, degrees)
        payload: Dict[str, Any] = {"field": fld.symbol, "n": n, "degrees": list(P.degrees), "polynomial": str(P)}
        lines = [str(P)]
        if at is not None:
            point = np.array([parse_complex(c) for c in at.split(",")], dtype=complex)
            value = complex(eval_poly(P, point))
            payload["value"] = _complex_json(value)
            lines.append(f"P({at}) = {format_complex(value)}")
    except NewformError as exc:
        _fail(exc)
    _emit(payload, lines)


@app.command()
def lfactor(
    descriptor: str = typer.Argument(...),
    s: str = typer.Argument(..., help="Complex s, e.g. 1.5 or 1+0.5i"),
    twist: Optional[str] = typer.Option(None, "--twist", help="Spherical descriptor for L(s, pi x pi')"),
):
    """L(s, pi) or L(s, pi x pi') together with the epsilon factor."""
    try:
        rep = canonicalize(parse_descriptor(descriptor))
        s_value = parse_complex(s)
        if twist:
            sph = canonicalize(parse_descriptor(twist))
            value = complex(rs_l_factor(rep, sph, s_value))
        else:
            value = complex(l_factor(rep, s_value))
        eps = epsilon_factor(rep)
    except NewformError as exc:
        _fail(exc)
    payload = {
        "descriptor": format_descriptor(rep),
        "twist": format_descriptor(sph) if twist else None,
        "s": _complex_json(s_value),
        "value": _complex_json(value),
        "epsilon": {"power_of_i": eps.power_of_i, "display": str(eps)},
    }
    _emit(payload, [f"L = {format_complex(value)}", f"epsilon = {eps}"])


@app.command()
def whittaker(
    descriptor: str = typer.Argument(...),
    at: str = typer.Option(..., "--at", help="y in W(diag(y, 1))"),
    method: str = typer.Option("closed", "--method", help="closed | jacquet | propagate"),
    level: int = typer.Option(4, "--level", min=1, max=9),
):
    """W(diag(y, 1)) for the canonically normalised Whittaker newform."""
    if method not in ("closed", "jacquet", "propagate"):
        raise typer.BadParameter(f"unknown method {method!r}")
    spec = QuadratureSpec(level=level, budget=state.budget, seed=state.seed)
    error = 0.0
    try:
        rep = canonicalize(parse_descriptor(descriptor))
        y = parse_complex(at)
        if rep.n == 1:
            value = complex(whittaker_gl1(rep, y))
        elif method == "closed":
            value = complex(whittaker_gl2_closed(rep, y))
        elif method == "jacquet":
            res = whittaker_gl2_jacquet(rep, np.array([[y, 0], [0, 1]], dtype=complex), spec)
            value, error = complex(res.value), float(res.error)
            if not res.converged:
                typer.secho("warning: Jacquet integral did not reach the tolerance", fg=typer.colors.YELLOW, err=True)
        else:
            g = np.array(y, dtype=complex) if rep.n == 2 else np.array([[y, 0], [0, 1]], dtype=complex)
            res = whittaker_propagate(rep, g, spec)
            value, error = complex(res.value), float(np.max(res.error))
    except NewformError as exc:
        _fail(exc)
    payload = {
        "descriptor": format_descriptor(rep),
        "at": _complex_json(y),
        "method": method if rep.n > 1 else "closed",
        "value": _complex_json(value),
        "quad_err": error,
    }
    _emit(payload, [f"W = {format_complex(value)}" + (f"  (+- {error:.2e})" if error else "")])


@app.command()
def verify(
    profile: str = typer.Option("fast", "--profile", help="Profile name under the profile directory"),
    json_out: Optional[str] = typer.Option(None, "--json-out", help="Write the full report list to this file"),
    csv_out: Optional[str] = typer.Option(None, "--csv", help="Append one row per report to this CSV"),
    json_dir: Optional[str] = typer.Option(None, "--json-dir", help="One JSON file per report in this directory"),
    only: Optional[List[str]] = typer.Option(None, "--only", help="Run only checks with these labels or identities"),
    workers: Optional[int] = typer.Option(None, "--workers", min=1, help="Worker threads (default: the profile's value)"),
    timing: bool = typer.Option(False, "--timing", help="Include wall time in the JSON output"),
):
    """Run a verification profile; exit 1 if any check fails."""
    try:
        config = ProfileManager(PROFILE_DIR).load_profile(
            profile, seed=state.seed_option, budget=state.budget_option, workers=workers,
            output="json" if state.json else "text",
        )
    except NewformError as exc:
        _fail(exc)
    if only:
        config = config.model_copy(update={"checks": [c for c in config.checks if c.name in only or c.identity in only]})
    reports = verify_suite(config)
    if csv_out or json_dir:
        write_reports(reports, profile, csv_out or DEFAULT_REPORT_CSV, json_dir)
    if json_out:
        with open(json_out, "w", encoding="utf-8") as wf:
            json.dump([r.to_dict() for r in reports], wf, ensure_ascii=False, indent=2, sort_keys=True)
    if state.json:
        typer.echo(json.dumps([r.to_dict(timing=timing) for r in reports], ensure_ascii=False, indent=2, sort_keys=True))
    else:
        colours = {"pass": typer.colors.GREEN, "fail": typer.colors.RED, "error": typer.colors.RED}
        for r in reports:
            line = f"[{r.verdict.upper():5}] {r.label:<28} max residual {r.max_residual:.2e}  tol {r.tolerance:.0e}"
            if r.message:
                line += f"  {r.message}"
            typer.secho(line, fg=colours[r.verdict])
        passed = sum(r.verdict == "pass" for r in reports)
        typer.echo(f"{passed}/{len(reports)} checks passed")
    if any(r.verdict != "pass" for r in reports):
        raise typer.Exit(code=1)


def run(argv: Optional[List[str]] = None) -> int:
    """Entry point returning the exit code instead of exiting."""
    try:
        result = app(args=argv, standalone_mode=False)
    except click.UsageError as exc:
        exc.show()
        return 2
    except click.exceptions.Abort:
        return 1
    return result if isinstance(result, int) else 0


if __name__ == "__main__":
    app()
