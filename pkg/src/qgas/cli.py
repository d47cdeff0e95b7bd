"""Command-line surface: certified sums, expansions, comparisons,
condensation scans and derivative-growth figure data.

Outputs are CSV (17 significant digits, '#' metadata lines carrying the
full effective config) or JSON.  Exit codes: 0 success, 2 validation
failure, 3 numeric certification failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from typing import Dict, List, Sequence

from . import __version__
from . import asymptotics as asy
from .continuum import critical_density
from .core import (
    NATURAL,
    SI,
    Dispersion,
    DispersionKind,
    ThermoState,
    Torus,
    UnitSystem,
    massive,
    massless,
    relativistic,
)
from .errors import (
    DegenerateFit,
    DomainError,
    DivergentInput,
    PoleViolation,
    PrecisionExhausted,
    QGasError,
    TailBoundFailure,
)
from .qstat import KINDS
from .specfun import bose_fermi_integral, derivative_growth_sequence
from .spectra import sphere3_spectrum, torus_spectrum
from .spectral_sum import beta_sweep, geometric_grid

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_CERTIFICATION = 3

EXPAND_CASES = (
    "massive-torus",
    "massless-torus-leading",
    "massless-1d",
    "massless-1d-q0",
    "massive-1d-theta",
    "sphere-massive",
    "sphere-massless",
    "anzaf",
    "relativistic",
)


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _parse_grid(spec: str) -> List[float]:
    """START:RATIO:COUNT geometric grid."""
    parts = spec.split(":")
    if len(parts) != 3:
        raise DomainError(f"grid must be START:RATIO:COUNT, got {spec!r}")
    start, ratio, count = float(parts[0]), float(parts[1]), int(parts[2])
    if start <= 0 or ratio <= 0 or count < 0:
        raise DomainError("grid needs START > 0, RATIO > 0, COUNT >= 0")
    return geometric_grid(start, ratio, count)


def _load_config(path: str | None) -> Dict:
    if not path:
        return {}
    with open(path) as fh:
        cfg = json.load(fh)
    if not isinstance(cfg, dict):
        raise DomainError("--config file must hold a JSON object")
    return cfg


def _merge(args: argparse.Namespace, config: Dict) -> Dict:
    """Effective parameters: CLI flags win over --config entries."""
    merged = dict(config)
    for key, val in vars(args).items():
        if key in ("func", "config", "command") or val is None:
            continue
        merged[key.replace("_", "-")] = val
    merged.pop("out", None)
    return merged


def _get(merged: Dict, key: str, default, cast):
    val = merged.get(key, default)
    if val is None:
        return None
    return cast(val)


def _units(merged: Dict) -> UnitSystem:
    mode = _get(merged, "units", "natural", str)
    if mode == "natural":
        return NATURAL
    if mode == "si":
        return SI
    raise DomainError(f"units must be natural or si, got {mode!r}")


def _dispersion(merged: Dict) -> Dispersion:
    kind = _get(merged, "dispersion", "massless", str)
    m = _get(merged, "m", 1.0, float)
    if kind == "massless":
        return massless()
    if kind == "massive":
        return massive(m)
    if kind == "relativistic":
        return relativistic(m)
    raise DomainError(f"unknown dispersion {kind!r}")


def _state(merged: Dict, beta: float) -> ThermoState:
    return ThermoState(
        beta=beta,
        z=_get(merged, "z", 1.0, float),
        q=_get(merged, "q", 0.0, float),
    )


def _betas(merged: Dict) -> List[float]:
    grid = merged.get("beta-grid")
    if grid:
        return _parse_grid(grid)
    return [_get(merged, "beta", 1.0, float)]


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _meta_lines(command: str, merged: Dict) -> List[str]:
    cfg = json.dumps(merged, sort_keys=True, default=str)
    return [f"# qgas {__version__} command={command}", f"# config: {cfg}"]


# ---------------------------------------------------------------------------
# sum
# ---------------------------------------------------------------------------


def cmd_sum(args: argparse.Namespace) -> int:
    merged = _merge(args, _load_config(args.config))
    units = _units(merged)
    disp = _dispersion(merged)
    kind = _get(merged, "kind", "number", str)
    if kind not in KINDS:
        raise DomainError(f"kind must be one of {KINDS}")
    tol = _get(merged, "tol", 1e-10, float)
    geometry = _get(merged, "geometry", "torus", str)
    if geometry == "torus":
        spec = torus_spectrum(
            Torus(_get(merged, "d", 1, int), _get(merged, "L", 1.0, float)), disp, units
        )
    elif geometry == "sphere3":
        spec = sphere3_spectrum(_get(merged, "R", 1.0, float), disp, units)
    else:
        raise DomainError(f"geometry must be torus or sphere3, got {geometry!r}")
    betas = _betas(merged)
    rows = beta_sweep(kind, spec, _state(merged, betas[0] if betas else 1.0), betas, tol, units)

    failures = [r for _, r in rows if isinstance(r, Exception)]
    for f in failures:
        if isinstance(f, (DomainError, PoleViolation)):
            raise f  # validation failure: exit 2, not 3
    fmt = _get(merged, "format", "csv", str)
    if fmt == "json":
        doc = {
            "command": "sum",
            "version": __version__,
            "config": merged,
            "rows": [
                {
                    "beta": b,
                    **(
                        {"error": str(r)}
                        if isinstance(r, Exception)
                        else {
                            "value": r.value,
                            "tail_bound": r.tail_bound,
                            "terms_used": r.terms_used,
                        }
                    ),
                }
                for b, r in rows
            ],
        }
        _write(args.out, json.dumps(doc, indent=2, sort_keys=True, default=str) + "\n")
    else:
        lines = _meta_lines("sum", merged)
        lines.append("beta,value,tail_bound,terms_used")
        for b, r in rows:
            if isinstance(r, Exception):
                lines.append(f"# error at beta={_fmt(b)}: {r}")
            else:
                lines.append(f"{_fmt(b)},{_fmt(r.value)},{_fmt(r.tail_bound)},{r.terms_used}")
        _write(args.out, "\n".join(lines) + "\n")
    if failures:
        raise TailBoundFailure(f"{len(failures)} grid point(s) failed: {failures[0]}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# expand
# ---------------------------------------------------------------------------


def _build_expansion(case: str, merged: Dict):
    units = _units(merged)
    d = _get(merged, "d", 1, int)
    L = _get(merged, "L", 1.0, float)
    R = _get(merged, "R", 1.0, float)
    m = _get(merged, "m", 1.0, float)
    order = _get(merged, "order", 5, int)
    conj = bool(merged.get("conjectural", False))
    beta0 = _get(merged, "beta", 1.0, float)
    state = _state(merged, beta0)
    geom = Torus(d, L)
    if case == "massive-torus":
        return asy.massive_torus_expansion(geom, massive(m), state, units)
    if case == "massless-torus-leading":
        return asy.massless_torus_leading(geom, state, units)
    if case == "massless-1d":
        return asy.massless_1d_zeta_expansion(
            state, Torus(1, L), units, order, allow_conjectural=conj
        )
    if case == "massless-1d-q0":
        return asy.massless_1d_q0_exact(state.z, Torus(1, L), units, order)[0]
    if case == "massive-1d-theta":
        return asy.massive_1d_q0_theta(state.z, m, Torus(1, L), units)[0]
    if case == "sphere-massive":
        return asy.sphere_massive_expansion(state, R, m, units)
    if case == "sphere-massless":
        return asy.sphere_massless_expansion(state, R, units, order, allow_conjectural=conj)
    if case == "anzaf":
        return asy.conjecture_anzaf(d, state, geom, units, order)
    if case == "relativistic":
        return asy.relativistic_leading(d)
    raise DomainError(f"unknown case {case!r}; choose from {EXPAND_CASES}")


def cmd_expand(args: argparse.Namespace) -> int:
    merged = _merge(args, _load_config(args.config))
    case = _get(merged, "case", None, str)
    if case is None:
        raise DomainError("--case is required")
    exp = _build_expansion(case, merged).drop_zero()
    doc = {
        "command": "expand",
        "version": __version__,
        "case": case,
        "config": merged,
        "terms": [
            {"power": str(p), "coefficient": float(c)} for p, c in exp.terms
        ],
        "remainder_class": str(exp.remainder),
        "provenance": exp.provenance,
    }
    if exp.remainder.kind == asy.CONJECTURAL:
        doc["warning"] = "expansion is conjectural for these parameters"
    _write(args.out, json.dumps(doc, indent=2, sort_keys=True, default=str) + "\n")
    return EXIT_OK


# ---------------------------------------------------------------------------
# compare
# ---------------------------------------------------------------------------


def _exact_spectrum_for_case(case: str, merged: Dict):
    units = _units(merged)
    d = _get(merged, "d", 1, int)
    L = _get(merged, "L", 1.0, float)
    R = _get(merged, "R", 1.0, float)
    m = _get(merged, "m", 1.0, float)
    if case in ("massive-torus",):
        return torus_spectrum(Torus(d, L), massive(m), units)
    if case in ("massless-torus-leading", "anzaf"):
        return torus_spectrum(Torus(d, L), massless(), units)
    if case in ("massless-1d", "massless-1d-q0"):
        return torus_spectrum(Torus(1, L), massless(), units)
    if case == "massive-1d-theta":
        return torus_spectrum(Torus(1, L), massive(m), units)
    if case == "sphere-massive":
        return sphere3_spectrum(R, massive(m), units)
    if case == "sphere-massless":
        return sphere3_spectrum(R, massless(), units)
    if case == "relativistic":
        return torus_spectrum(Torus(d, 1.0), relativistic(1.0), NATURAL)
    raise DomainError(f"unknown case {case!r}")


def cmd_compare(args: argparse.Namespace) -> int:
    merged = _merge(args, _load_config(args.config))
    case = _get(merged, "case", None, str)
    if case is None:
        raise DomainError("--case is required")
    exp = _build_expansion(case, merged)
    spec = _exact_spectrum_for_case(case, merged)
    tol = _get(merged, "tol", 1e-10, float)
    trunc_p = Fraction(_get(merged, "truncate", "0", str))
    betas = _parse_grid(merged["beta-grid"]) if merged.get("beta-grid") else []
    state0 = _state(merged, betas[0] if betas else 1.0)
    units = _units(merged)

    rows = beta_sweep("number", spec, state0, betas, tol, units)
    lines = _meta_lines("compare", merged)
    lines.append("beta,exact,predicted,residual,residual_scaled")
    sweep = []
    trunc = exp.truncate(trunc_p)
    for b, r in rows:
        if isinstance(r, Exception):
            lines.append(f"# error at beta={_fmt(b)}: {r}")
            continue
        pred = trunc.evaluate(b)
        resid = r.value - pred
        scaled = resid * b ** (-float(trunc_p))
        sweep.append((b, r.value, r.tail_bound))
        lines.append(
            f"{_fmt(b)},{_fmt(r.value)},{_fmt(pred)},{_fmt(resid)},{_fmt(scaled)}"
        )
    try:
        fit = asy.order_fit(sweep, exp, trunc_p)
        lines.append(
            "# orderfit slope=%s intercept=%s r_squared=%s window=[%s,%s] "
            "points=%d floored=%d"
            % (
                _fmt(fit.slope),
                _fmt(fit.intercept),
                _fmt(fit.r_squared),
                _fmt(fit.window[0]),
                _fmt(fit.window[1]),
                fit.points_used,
                fit.points_floored,
            )
        )
    except DegenerateFit as exc:
        lines.append(f"# orderfit degenerate: {exc}")
    _write(args.out, "\n".join(lines) + "\n")
    return EXIT_OK


# ---------------------------------------------------------------------------
# condense
# ---------------------------------------------------------------------------


def cmd_condense(args: argparse.Namespace) -> int:
    merged = _merge(args, _load_config(args.config))
    d = _get(merged, "d", 3, int)
    disp = _dispersion(merged)
    if disp.kind is DispersionKind.RELATIVISTIC:
        raise DomainError("condensation scan covers massless and massive dispersions")
    q = _get(merged, "q", 1.0, float)
    if not 0.0 < q <= 1.0:
        raise DomainError(f"condensation scan needs q in (0, 1], got {q}")
    tol = _get(merged, "tol", 1e-10, float)
    count = _get(merged, "z-points", 8, int)
    z_spec = merged.get("z-grid")
    if z_spec:
        zs = [float(t) for t in str(z_spec).split(",")]
    else:
        zs = [(1.0 / q) * (1.0 - 2.0 ** (-j)) for j in range(1, count + 1)]
    lines = _meta_lines("condense", merged)
    lines.append("z,density,verdict")
    for z in zs:
        if z * q >= 1.0:
            raise DomainError(f"z = {z} reaches the pole z*q >= 1")
        dens = bose_fermi_integral(d, q, z, disp.alpha, tol=tol) if z > 0 else 0.0
        lines.append(f"{_fmt(z)},{_fmt(dens)},")
    verdict = critical_density(d, disp, tol=tol)
    lines.append(
        f"{_fmt(1.0 / q)},{_fmt(verdict.value) if verdict.finite else 'inf'},{verdict.verdict}"
    )
    _write(args.out, "\n".join(lines) + "\n")
    return EXIT_OK


# ---------------------------------------------------------------------------
# figure-derivatives
# ---------------------------------------------------------------------------


def cmd_figure_derivatives(args: argparse.Namespace) -> int:
    merged = _merge(args, _load_config(args.config))
    q = _get(merged, "q", 0.5, float)
    z = _get(merged, "z", 1.0, float)
    scale = _get(merged, "scale", 1.0, float)
    max_n = _get(merged, "max-n", 40, int)
    bits = _get(merged, "precision-bits", 256, int)
    rows = derivative_growth_sequence(q, z, scale, max_n, bits)
    lines = _meta_lines("figure-derivatives", merged)
    if rows:
        lines.append(f"# precision_bits={bits} min_sig_digits={min(r[2] for r in rows):.1f}")
    else:
        lines.append(f"# precision_bits={bits}")
    lines.append("n,growth")
    for n, growth, _digits in rows:
        lines.append(f"{n},{_fmt(growth)}")
    _write(args.out, "\n".join(lines) + "\n")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="qgas",
        description="Spectral actions for free q-particle gases over discrete spectra",
    )
    p.add_argument("--version", action="version", version=f"qgas {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", help="JSON file of defaults; flags win on conflict")
        sp.add_argument("--out", help="output path (default stdout)")
        sp.add_argument("--units", choices=("natural", "si"))
        sp.add_argument("--q", type=float)
        sp.add_argument("--z", type=float)
        sp.add_argument("--tol", type=float)

    sp = sub.add_parser("sum", help="certified spectral sums over a beta grid")
    common(sp)
    sp.add_argument("--geometry", choices=("torus", "sphere3"))
    sp.add_argument("--d", type=int)
    sp.add_argument("--L", type=float)
    sp.add_argument("--R", type=float)
    sp.add_argument("--dispersion", choices=("massless", "massive", "relativistic"))
    sp.add_argument("--m", type=float)
    sp.add_argument("--beta", type=float)
    sp.add_argument("--beta-grid", help="START:RATIO:COUNT")
    sp.add_argument("--kind", choices=KINDS)
    sp.add_argument("--format", choices=("csv", "json"))
    sp.set_defaults(func=cmd_sum)

    sp = sub.add_parser("expand", help="asymptotic expansion coefficients (JSON)")
    common(sp)
    sp.add_argument("--case", choices=EXPAND_CASES)
    sp.add_argument("--d", type=int)
    sp.add_argument("--L", type=float)
    sp.add_argument("--R", type=float)
    sp.add_argument("--m", type=float)
    sp.add_argument("--beta", type=float)
    sp.add_argument("--order", type=int)
    sp.add_argument("--conjectural", action="store_true", default=None)
    sp.set_defaults(func=cmd_expand)

    sp = sub.add_parser("compare", help="exact sums vs truncated expansion (CSV)")
    common(sp)
    sp.add_argument("--case", choices=EXPAND_CASES)
    sp.add_argument("--d", type=int)
    sp.add_argument("--L", type=float)
    sp.add_argument("--R", type=float)
    sp.add_argument("--m", type=float)
    sp.add_argument("--order", type=int)
    sp.add_argument("--conjectural", action="store_true", default=None)
    sp.add_argument("--beta-grid", help="START:RATIO:COUNT")
    sp.add_argument("--truncate", help="truncation power P (rational, e.g. 3 or -1/2)")
    sp.set_defaults(func=cmd_compare)

    sp = sub.add_parser("condense", help="density scan toward the z = 1/q endpoint")
    common(sp)
    sp.add_argument("--d", type=int)
    sp.add_argument("--dispersion", choices=("massless", "massive"))
    sp.add_argument("--m", type=float)
    sp.add_argument("--z-grid", help="comma-separated activities")
    sp.add_argument("--z-points", type=int)
    sp.set_defaults(func=cmd_condense)

    sp = sub.add_parser(
        "figure-derivatives", help="derivative growth |g^(2n)(0)|^(1/2n) data"
    )
    common(sp)
    sp.add_argument("--scale", type=float)
    sp.add_argument("--max-n", type=int)
    sp.add_argument("--precision-bits", type=int)
    sp.set_defaults(func=cmd_figure_derivatives)

    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (DomainError, PoleViolation, DivergentInput, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (TailBoundFailure, PrecisionExhausted) as exc:
        print(f"certification error: {exc}", file=sys.stderr)
        return EXIT_CERTIFICATION
    except QGasError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
