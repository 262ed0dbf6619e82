"""Command-line front end.

Subcommands cover classification, root and curve inspection, domain
partitions, figure rendering, the bundled verification suite, family
lattice sweeps, and the background jump probe.  Reports are JSON with
a fixed field order and 17-significant-digit floats, so identical
configurations produce byte-identical output.

Exit codes: 0 success (any classification verdict counts as success),
1 verification failures, 2 configuration errors, 3 internal
inconsistencies, 4 file system errors.
"""

from __future__ import annotations

import argparse
import configparser
import itertools
import os
import sys
from dataclasses import dataclass, replace

import numpy as np

from . import __version__
from .classify import classify, generate_family
from .core import Triple, build_quartic
from .errors import (
    ConfigError,
    DegenerateCut,
    IllConditionedRoots,
    InternalInconsistency,
    InvalidPairing,
    NlsadmError,
    OutOfWindow,
)
from .geometry import (
    _LABEL_NAMES,
    compute_sign_field,
    cut_intersects_D1_closure,
    default_window,
    locate_K2_window,
    partition_domains,
    trace_gamma,
)
from .report import (
    config_hash,
    csv_chains,
    dumps,
    write_atomic,
    write_csv_chains,
    write_json,
    write_sign_grid,
)
from .roots import solve_quartic
from .scattering import background_jump, global_relation_verdict
from .spectral import background_normalizer, background_shift, cpoint_product, make_branched_root
from .verify import format_results, run_suite
from .svgfig import compute_layers, figure_chains, render_figure

_TOOL = {"name": "nlsadm", "version": __version__}

_FAMILY_PARAMS = {
    "A": ("alpha", "omega"),
    "B": ("K", "omega", "c2"),
    "C": ("alpha", "omega"),
    "D": ("alpha", "omega"),
    "E": ("K", "omega", "c2"),
}


# -- flag parsing ----------------------------------------------------------


def _parse_float(text: str, flag: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise ConfigError(f"{flag} expects a number, got {text!r}") from None
    if not np.isfinite(v):
        raise ConfigError(f"{flag} must be finite, got {text!r}")
    return v


def _parse_complex(text: str) -> complex:
    parts = text.split(",")
    if len(parts) != 2:
        raise ConfigError(f"complex values are written re,im - got {text!r}")
    return complex(_parse_float(parts[0], "--c real part"), _parse_float(parts[1], "--c imaginary part"))


def _parse_window(text: str) -> tuple:
    parts = text.split(",")
    if len(parts) != 4:
        raise ConfigError(f"--window expects x0,x1,y0,y1 - got {text!r}")
    x0, x1, y0, y1 = (_parse_float(p, "--window") for p in parts)
    if not (x0 < x1 and y0 < y1):
        raise ConfigError("window is degenerate: need x0 < x1 and y0 < y1")
    return (x0, x1, y0, y1)


def _parse_resolution(text: str) -> tuple:
    parts = text.split(",")
    if len(parts) != 2:
        raise ConfigError(f"--resolution expects nx,ny - got {text!r}")
    try:
        nx, ny = int(parts[0]), int(parts[1])
    except ValueError:
        raise ConfigError(f"--resolution expects integers, got {text!r}") from None
    if nx < 64 or ny < 64:
        raise ConfigError("resolution must be at least 64 per axis")
    return (nx, ny)


def _parse_pairing(text: str) -> tuple:
    # "0-3,1-2" pairs root indices 0 with 3 and 1 with 2
    pairs = []
    for part in text.split(","):
        bits = part.split("-")
        if len(bits) != 2:
            raise ConfigError(f"--pairing expects i-j pairs, got {part!r}")
        try:
            pairs.append((int(bits[0]), int(bits[1])))
        except ValueError:
            raise ConfigError(f"--pairing expects integer indices, got {part!r}") from None
    return tuple(pairs)


def _parse_loop(text: str) -> tuple:
    parts = text.split(",")
    if len(parts) != 2:
        raise ConfigError(f"--loop expects index,radius - got {text!r}")
    try:
        idx = int(parts[0])
    except ValueError:
        raise ConfigError(f"--loop index must be an integer, got {parts[0]!r}") from None
    radius = _parse_float(parts[1], "--loop radius")
    if radius <= 0:
        raise ConfigError("--loop radius must be positive")
    return (idx, radius)


def _parse_range(text: str) -> tuple:
    # "omega=-10:-4:5" sweeps 5 points; "K=1.5" pins a single value
    if "=" not in text:
        raise ConfigError(f"--range expects name=lo:hi:n or name=value, got {text!r}")
    name, _, spec = text.partition("=")
    name = name.strip()
    bits = spec.split(":")
    if len(bits) == 1:
        v = _parse_float(bits[0], "--range")
        return name, (v,)
    if len(bits) != 3:
        raise ConfigError(f"--range expects name=lo:hi:n or name=value, got {text!r}")
    lo = _parse_float(bits[0], "--range")
    hi = _parse_float(bits[1], "--range")
    try:
        n = int(bits[2])
    except ValueError:
        raise ConfigError(f"--range count must be an integer, got {bits[2]!r}") from None
    if n < 1:
        raise ConfigError("--range count must be at least 1")
    if n == 1:
        return name, (lo,)
    return name, tuple(float(v) for v in np.linspace(lo, hi, n))


def _threads_from_env() -> int | None:
    raw = os.environ.get("NLSADM_THREADS")
    if raw is None or raw == "":
        return None
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"NLSADM_THREADS must be a positive integer, got {raw!r}") from None
    if n < 1:
        raise ConfigError(f"NLSADM_THREADS must be a positive integer, got {raw!r}")
    return n


# -- configuration ---------------------------------------------------------


@dataclass(frozen=True)
class RunConfig:
    command: str
    lam: int = 1
    triple: Triple | None = None
    family: str | None = None
    ranges: tuple = ()
    window: tuple | None = None
    resolution: tuple = (800, 800)
    cut_strategy: str = "auto"
    pairing: tuple | None = None
    loop: tuple | None = None
    tol_root: float = 1e-6
    tol_membership: float = 1e-9
    tol_geometry: float = 1e-9
    tol_integrator: float = 1e-10
    seed: int = 20260816
    samples: int | None = None
    fmt: str | None = None
    out: str | None = None
    threads: int | None = None

    def __post_init__(self):
        for name in ("tol_root", "tol_membership", "tol_geometry", "tol_integrator"):
            if not getattr(self, name) > 0.0:
                raise ConfigError(f"{name.replace('_', '-')} must be positive")
        if self.resolution[0] < 64 or self.resolution[1] < 64:
            raise ConfigError("resolution must be at least 64 per axis")
        if self.lam not in (1, -1):
            raise ConfigError("--lambda must be +1 or -1")

    def require_triple(self) -> Triple:
        if self.triple is None:
            raise ConfigError(f"{self.command} needs --alpha, --omega and --c")
        return self.triple

    def echo(self) -> dict:
        t = self.triple
        return {
            "command": self.command,
            "lambda": self.lam,
            "triple": None if t is None else {"alpha": t.alpha, "omega": t.omega, "c": t.c},
            "family": self.family,
            "ranges": {name: list(vals) for name, vals in self.ranges} if self.ranges else None,
            "window": list(self.window) if self.window else None,
            "resolution": list(self.resolution),
            "cut_strategy": self.cut_strategy,
            "pairing": [list(p) for p in self.pairing] if self.pairing else None,
            "loop": list(self.loop) if self.loop else None,
            "tolerances": {
                "root": self.tol_root,
                "membership": self.tol_membership,
                "geometry": self.tol_geometry,
                "integrator": self.tol_integrator,
            },
            "seed": self.seed,
            "samples": self.samples,
            "format": self.fmt,
            "threads": self.threads,
        }


_FILE_KEYS = {
    ("triple", "alpha"): "alpha",
    ("triple", "omega"): "omega",
    ("triple", "c"): "c",
    ("triple", "lambda"): "lam",
    ("grid", "window"): "window",
    ("grid", "resolution"): "resolution",
    ("cuts", "strategy"): "cut_strategy",
    ("cuts", "pairing"): "pairing",
    ("cuts", "loop"): "loop",
    ("tolerances", "root"): "tol_root",
    ("tolerances", "membership"): "tol_membership",
    ("tolerances", "geometry"): "tol_geometry",
    ("tolerances", "integrator"): "tol_integrator",
    ("output", "out"): "out",
    ("output", "format"): "fmt",
    ("sampling", "seed"): "seed",
    ("sampling", "samples"): "samples",
}


def _load_config_file(path: str) -> dict:
    cp = configparser.ConfigParser()
    try:
        with open(path, "r", encoding="utf-8") as fh:
            cp.read_file(fh)
    except configparser.Error as exc:
        raise ConfigError(f"config file {path}: {exc}") from None
    values = {}
    for section in cp.sections():
        for key, raw in cp.items(section):
            dest = _FILE_KEYS.get((section, key))
            if dest is None:
                raise ConfigError(f"config file {path}: unknown key [{section}] {key}")
            values[dest] = raw
    return values


def _resolve_config(args) -> RunConfig:
    file_vals = _load_config_file(args.config) if getattr(args, "config", None) else {}

    def pick(flag_name, file_key=None):
        v = getattr(args, flag_name, None)
        if v is not None:
            return v
        return file_vals.get(file_key or flag_name)

    alpha = pick("alpha")
    omega = pick("omega")
    cval = pick("c")
    lam_raw = pick("lam")
    lam = 1
    if lam_raw is not None:
        text = str(lam_raw)
        if text not in ("1", "+1", "-1"):
            raise ConfigError(f"--lambda must be +1 or -1, got {text!r}")
        lam = int(text)

    triple = None
    if alpha is not None or omega is not None or cval is not None:
        if alpha is None or omega is None or cval is None:
            raise ConfigError("a triple needs all of --alpha, --omega and --c")
        triple = Triple(
            _parse_float(str(alpha), "--alpha"),
            _parse_float(str(omega), "--omega"),
            _parse_complex(str(cval)),
            lam,
        )

    window = pick("window")
    resolution = pick("resolution")
    pairing = pick("pairing")
    loop = pick("loop")

    def tol(flag_name):
        v = pick(flag_name)
        return None if v is None else _parse_float(str(v), "--" + flag_name.replace("_", "-"))

    family = getattr(args, "family", None)
    if family is not None:
        family = family.removeprefix("Family").upper()
        if family not in _FAMILY_PARAMS:
            raise ConfigError(f"--family must be one of A..E, got {args.family!r}")

    kwargs = dict(
        command=args.command,
        lam=lam,
        triple=triple,
        family=family,
        ranges=tuple(_parse_range(r) for r in getattr(args, "range", None) or ()),
        window=_parse_window(str(window)) if window is not None else None,
        cut_strategy=pick("cut_strategy") or "auto",
        pairing=_parse_pairing(str(pairing)) if pairing is not None else None,
        loop=_parse_loop(str(loop)) if loop is not None else None,
        out=pick("out"),
        fmt=pick("fmt", "fmt"),
        threads=_threads_from_env(),
    )
    if resolution is not None:
        kwargs["resolution"] = _parse_resolution(str(resolution))
    for name in ("tol_root", "tol_membership", "tol_geometry", "tol_integrator"):
        v = tol(name)
        if v is not None:
            kwargs[name] = v
    seed = pick("seed")
    if seed is not None:
        try:
            kwargs["seed"] = int(str(seed))
        except ValueError:
            raise ConfigError(f"--seed expects an integer, got {seed!r}") from None
    samples = pick("samples")
    if samples is not None:
        try:
            kwargs["samples"] = int(str(samples))
        except ValueError:
            raise ConfigError(f"--samples expects an integer, got {samples!r}") from None
        if kwargs["samples"] < 1:
            raise ConfigError("--samples must be at least 1")
    return RunConfig(**kwargs)


def _check_format(cfg: RunConfig, allowed: tuple) -> str:
    fmt = cfg.fmt or allowed[0]
    if fmt not in allowed:
        raise ConfigError(f"{cfg.command} supports --format {'|'.join(allowed)}, got {fmt!r}")
    return fmt


def _emit_text(cfg: RunConfig, text: str) -> None:
    if cfg.out:
        write_atomic(cfg.out, text.encode("utf-8"))
    else:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")


def _complex_dict(z: complex) -> dict:
    return {"re": float(np.real(z)), "im": float(np.imag(z))}


def _cut_dict(cut) -> dict:
    d = {"kind": cut.kind, "p": complex(cut.p), "q": complex(cut.q)}
    if cut.kind == "loop":
        d["center"] = complex(cut.center)
        d["radius"] = float(cut.radius)
    if cut.root_indices:
        d["root_indices"] = list(cut.root_indices)
    return d


def _resolved_window(cfg: RunConfig, br) -> tuple:
    if cfg.window is not None:
        return cfg.window
    return default_window(br.cuts.branch_points)


def _build_branched(cfg: RunConfig, triple: Triple):
    return make_branched_root(
        triple,
        strategy=cfg.cut_strategy,
        pairing=cfg.pairing,
        loop=cfg.loop,
        cluster_tol=cfg.tol_root,
    )


# -- consistency checks shared by classify reports -------------------------


def _spot_checks(cfg: RunConfig, triple: Triple, br) -> list:
    rng = np.random.default_rng(cfg.seed)
    ks = []
    clear = 10.0 * br.cuts.geom_tol + 1e-6
    radius = 4.0 * (1.0 + br.rootset.max_abs())
    while len(ks) < 16:
        k = complex(rng.uniform(-radius, radius), rng.uniform(-radius, radius))
        if br.cuts.distance(k) > clear:
            ks.append(k)
    ks = np.array(ks)
    om = br.value_raw(ks)
    poly = br.quartic.eval(ks)
    sq = float(np.max(np.abs(om * om - poly) / np.maximum(np.abs(poly), 1.0)))
    h = background_shift(br, ks, omega_value=om)
    lhs = (h - 2.0 * om) * h
    rhs = cpoint_product(triple, ks)
    shift = float(np.max(np.abs(lhs - rhs) / np.maximum(np.maximum(np.abs(lhs), np.abs(rhs)), 1.0)))
    checks = [
        {"id": "branch-square", "passed": sq <= 1e-10, "worst": sq, "tol": 1e-10},
        {"id": "shift-identity", "passed": shift <= 1e-10, "worst": shift, "tol": 1e-10},
    ]
    keep = np.abs(rhs) > 1e-6 * (1.0 + np.abs(ks)) ** 2
    if np.any(keep):
        E = background_normalizer(br, ks[keep])
        det = E[..., 0, 0] * E[..., 1, 1] - E[..., 0, 1] * E[..., 1, 0]
        dv = float(np.max(np.abs(det - 1.0)))
        checks.append({"id": "normalizer-det", "passed": dv <= 1e-10, "worst": dv, "tol": 1e-10})
    return checks


# -- subcommands ------------------------------------------------------------


def cmd_classify(cfg: RunConfig) -> int:
    _check_format(cfg, ("json",))
    t = cfg.require_triple()
    # verify=True runs the geometric exclusion rules against family
    # verdicts too and raises InternalInconsistency on disagreement
    cl = classify(t, tol=cfg.tol_membership, verify=True)

    report = {"schema": 1, "tool": dict(_TOOL)}
    checks = [
        {
            "id": "exclusion-rules-consistent",
            "passed": True,
            "worst": max(
                (
                    r.margin
                    for r in cl.reasons
                    if not r.rule.startswith("membership:") and np.isfinite(r.margin)
                ),
                default=0.0,
            ),
            "tol": 0.0,
        }
    ]

    roots_section = None
    cuts_section = None
    connectivity = None
    br = None
    try:
        rs = solve_quartic(build_quartic(t), cluster_tol=cfg.tol_root)
        roots_section = {
            "pattern": list(rs.pattern),
            "roots": [{"position": _complex_dict(r), "multiplicity": int(m)} for r, m in zip(rs.roots, rs.mults)],
            "residual": rs.residual,
            "reconstruction_error": rs.reconstruction_error,
        }
        checks.append(
            {
                "id": "root-reconstruction",
                "passed": rs.reconstruction_error <= 1e-7,
                "worst": rs.reconstruction_error,
                "tol": 1e-7,
            }
        )
    except (IllConditionedRoots, InternalInconsistency) as exc:
        roots_section = {"error": f"{type(exc).__name__}: {exc}"}

    if roots_section is not None and "error" not in roots_section:
        try:
            br = _build_branched(cfg, t)
            cuts_section = {
                "strategy": cfg.cut_strategy,
                "cuts": [_cut_dict(c) for c in br.cuts.all_cuts],
            }
        except (InvalidPairing, ConfigError, DegenerateCut) as exc:
            cuts_section = {"error": f"{type(exc).__name__}: {exc}"}

    window = None
    if br is not None:
        window = _resolved_window(cfg, br)
        part = partition_domains(br, window=window, resolution=cfg.resolution)
        connectivity = {
            "window": list(window),
            "resolution": list(cfg.resolution),
            "d1_component_count": int(part.d1_component_count),
            "d1_minus_cuts_connected": part.d1_component_count == 1,
        }
        checks.extend(_spot_checks(cfg, t, br))

    intersections = {}
    if t.lam == 1:
        try:
            top = cut_intersects_D1_closure(t, tol=cfg.tol_geometry)
            intersections["vertical_cut_vs_D1"] = {
                "top_point": _complex_dict(top.top_point),
                "top_point_sign": top.top_point_sign,
                "intersects": top.intersects,
                "abscissa": top.abscissa,
                "K": top.K,
                "left_of_K": top.left_of_K,
            }
        except DegenerateCut as exc:
            intersections["vertical_cut_vs_D1"] = {"skipped": str(exc)}
        kw = locate_K2_window(t, tol=cfg.tol_geometry)
        intersections["K2_window"] = {
            "K1": kw.K1,
            "K2": kw.K2,
            "K3": kw.K3,
            "abscissa": kw.abscissa,
            "in_window": kw.in_window,
        }
    else:
        intersections["note"] = "cut position tests apply to the defocusing sign only"

    cfg_echo = replace(cfg, window=window or cfg.window).echo()
    report["config"] = cfg_echo
    report["config_hash"] = config_hash(cfg_echo)
    report["classification"] = {
        "verdict": cl.verdict.value,
        "boundary_flags": sorted(cl.boundary_flags),
        "witness_K": cl.witness,
        "reasons": [
            {"rule": r.rule, "passed": r.passed, "margin": r.margin, "details": dict(r.details)}
            for r in cl.reasons
        ],
    }
    report["roots"] = roots_section
    report["cuts"] = cuts_section
    report["connectivity"] = connectivity
    report["intersections"] = intersections
    report["checks"] = checks

    text = dumps(report)
    if cfg.out:
        write_atomic(cfg.out, text.encode("utf-8"))
    sys.stdout.write(text + "\n")
    return 0


def cmd_roots(cfg: RunConfig) -> int:
    _check_format(cfg, ("json",))
    t = cfg.require_triple()
    q = build_quartic(t)
    rs = solve_quartic(q, cluster_tol=cfg.tol_root)
    cfg_echo = cfg.echo()
    report = {
        "schema": 1,
        "tool": dict(_TOOL),
        "config": cfg_echo,
        "config_hash": config_hash(cfg_echo),
        "quartic": {"coefficients": list(q.coeffs)},
        "pattern": list(rs.pattern),
        "roots": [{"position": _complex_dict(r), "multiplicity": int(m)} for r, m in zip(rs.roots, rs.mults)],
        "residual": rs.residual,
        "reconstruction_error": rs.reconstruction_error,
    }
    _emit_text(cfg, dumps(report) + "\n")
    return 0


def cmd_curves(cfg: RunConfig) -> int:
    fmt = _check_format(cfg, ("csv", "json"))
    t = cfg.require_triple()
    if cfg.window is not None:
        window = cfg.window
    else:
        br = _build_branched(cfg, t)
        window = _resolved_window(cfg, br)
    g = trace_gamma(t, window, cfg.resolution)
    if fmt == "csv":
        chains = [(f"gamma-{i}", line) for i, line in enumerate(g.polylines)]
        _emit_text(cfg, csv_chains(chains))
        return 0
    cfg_echo = replace(cfg, window=window).echo()
    report = {
        "schema": 1,
        "tool": dict(_TOOL),
        "config": cfg_echo,
        "config_hash": config_hash(cfg_echo),
        "polylines": [[_complex_dict(z) for z in line] for line in g.polylines],
        "real_intersections": list(g.real_intersections),
        "residual": g.residual(),
    }
    _emit_text(cfg, dumps(report) + "\n")
    return 0


def cmd_regions(cfg: RunConfig) -> int:
    _check_format(cfg, ("json",))
    t = cfg.require_triple()
    br = _build_branched(cfg, t)
    window = _resolved_window(cfg, br)
    part = partition_domains(br, window=window, resolution=cfg.resolution)
    counts = {}
    for code in sorted(_LABEL_NAMES):
        counts[_LABEL_NAMES[code]] = int(np.sum(part.labels == code))
    cfg_echo = replace(cfg, window=window).echo()
    report = {
        "schema": 1,
        "tool": dict(_TOOL),
        "config": cfg_echo,
        "config_hash": config_hash(cfg_echo),
        "window": list(window),
        "resolution": list(cfg.resolution),
        "cell_counts": counts,
        "d1_component_count": int(part.d1_component_count),
        "d1_minus_cuts_connected": part.d1_component_count == 1,
    }
    _emit_text(cfg, dumps(report) + "\n")
    return 0


def cmd_figure(cfg: RunConfig) -> int:
    _check_format(cfg, ("svg",))
    t = cfg.require_triple()
    br = _build_branched(cfg, t)
    window = _resolved_window(cfg, br)
    layers = compute_layers(t, window, cfg.resolution)
    part = partition_domains(br, window=window, resolution=cfg.resolution)
    svg = render_figure(t, br, part, layers, window)
    chains = figure_chains(layers, br)
    field = compute_sign_field(t, window, cfg.resolution)

    base = cfg.out or "figure"
    write_atomic(base + ".svg", svg.encode("utf-8"))
    write_csv_chains(base + ".csv", chains)
    write_sign_grid(
        base + ".grid",
        base + ".grid.json",
        field.im_sign,
        window,
        source="sign of Im of the quartic over the window grid",
        extra={"triple": {"alpha": t.alpha, "omega": t.omega, "c": t.c, "lambda": t.lam}},
    )
    sys.stdout.write(
        "\n".join(base + ext for ext in (".svg", ".csv", ".grid", ".grid.json")) + "\n"
    )
    return 0


def cmd_verify(cfg: RunConfig, only=None, fault=None) -> int:
    _check_format(cfg, ("json",))
    samples = cfg.samples if cfg.samples is not None else 60
    results = run_suite(samples=samples, seed=cfg.seed, only=only, fault=fault)
    sys.stdout.write(format_results(results) + "\n")
    failing = [r.id for r in results if not r.passed]
    if failing:
        sys.stdout.write(f"FAILED ({len(failing)}/{len(results)}): {', '.join(failing)}\n")
    else:
        sys.stdout.write(f"all {len(results)} invariants passed\n")
    if cfg.out:
        cfg_echo = cfg.echo()
        report = {
            "schema": 1,
            "tool": dict(_TOOL),
            "config": cfg_echo,
            "config_hash": config_hash(cfg_echo),
            "results": [
                {
                    "id": r.id,
                    "samples": int(r.samples),
                    "worst": float(r.worst),
                    "tol": float(r.tol),
                    "passed": bool(r.passed),
                    "note": r.note,
                }
                for r in results
            ],
            "passed": not failing,
        }
        write_json(cfg.out, report)
    return 1 if failing else 0


def _scan_rows(cfg: RunConfig):
    fam = cfg.family
    if fam is None:
        raise ConfigError("scan needs --family A..E")
    if cfg.lam != 1:
        raise ConfigError("scan sweeps the defocusing families")
    param_names = _FAMILY_PARAMS[fam]
    given = dict(cfg.ranges)
    unknown = set(given) - set(param_names)
    if unknown:
        raise ConfigError(
            f"family {fam} takes parameters {', '.join(param_names)}; unknown: {sorted(unknown)}"
        )
    missing = [p for p in param_names if p not in given]
    if missing:
        raise ConfigError(f"scan over family {fam} needs --range for: {', '.join(missing)}")

    header = ["family", *param_names] + [
        "triple_alpha",
        "triple_omega",
        "triple_c_re",
        "triple_c_im",
        "verdict",
        "boundary_flags",
        "root_pattern",
        "note",
    ]
    rows = [",".join(header)]
    mismatches = []
    for combo in itertools.product(*(given[p] for p in param_names)):
        params = dict(zip(param_names, combo))
        cells = [fam] + ["%.17g" % v for v in combo]
        try:
            t = generate_family(fam, params)
        except OutOfWindow as exc:
            note = str(exc).replace(",", ";").replace("\n", " ")
            rows.append(",".join(cells + ["", "", "", "", "OutOfWindow", "", "", note]))
            continue
        cl = classify(t, tol=cfg.tol_membership)
        try:
            pattern = "+".join(str(m) for m in solve_quartic(build_quartic(t), cluster_tol=cfg.tol_root).pattern)
        except (IllConditionedRoots, InternalInconsistency):
            pattern = ""
        flags = ";".join(sorted(cl.boundary_flags))
        cells += [
            "%.17g" % t.alpha,
            "%.17g" % t.omega,
            "%.17g" % t.c1,
            "%.17g" % t.c2,
            cl.verdict.value,
            flags,
            pattern,
            "",
        ]
        rows.append(",".join(cells))
        if cl.verdict.value != "Family" + fam:
            mismatches.append((params, cl.verdict.value))
    if mismatches:
        raise InternalInconsistency(
            f"round-trip failed for {len(mismatches)} lattice points, first: "
            f"{mismatches[0][0]} -> {mismatches[0][1]}"
        )
    return "\n".join(rows) + "\n"


def cmd_scan(cfg: RunConfig) -> int:
    _check_format(cfg, ("csv",))
    _emit_text(cfg, _scan_rows(cfg))
    return 0


def cmd_jump(cfg: RunConfig) -> int:
    _check_format(cfg, ("json",))
    t = cfg.require_triple()
    br = _build_branched(cfg, t)
    window = _resolved_window(cfg, br)
    n_samples = cfg.samples if cfg.samples is not None else 9

    probes = []
    first_live = None
    for cut in br.cuts.quartic_cuts:
        probe = background_jump(t, cut, n_samples=n_samples, br=br)
        if first_live is None and probe.samples:
            first_live = probe
        probes.append(
            {
                "cut": _cut_dict(cut),
                "valid_cut": probe.valid_cut,
                "jump_nonzero": probe.jump_nonzero(),
                "worst_closed_form_error": probe.worst_closed_form_error(),
                "skipped": [{"s": s, "reason": reason} for s, reason in probe.skipped],
                "samples": [
                    {
                        "s": sm.s,
                        "k": _complex_dict(sm.k),
                        "omega_plus": _complex_dict(sm.omega_plus),
                        "omega_minus": _complex_dict(sm.omega_minus),
                        "ratio_plus": _complex_dict(sm.ba_plus),
                        "ratio_minus": _complex_dict(sm.ba_minus),
                        "jump": _complex_dict(sm.jump),
                        "closed_form": _complex_dict(sm.closed_form),
                    }
                    for sm in probe.samples
                ],
            }
        )

    part = partition_domains(br, window=window, resolution=cfg.resolution)
    verdict = global_relation_verdict(t, part, probe=first_live)
    cfg_echo = replace(cfg, window=window).echo()
    report = {
        "schema": 1,
        "tool": dict(_TOOL),
        "config": cfg_echo,
        "config_hash": config_hash(cfg_echo),
        "probes": probes,
        "connectivity": {
            "window": list(window),
            "resolution": list(cfg.resolution),
            "d1_component_count": int(part.d1_component_count),
        },
        "verdict": {
            "d1_minus_cuts_connected": verdict.d1_minus_C_connected,
            "jump_obstruction": verdict.jump_obstruction,
            "consistent_with_classify": verdict.verdict_consistent_with_classify,
            "classify_verdict": verdict.classify_verdict,
        },
    }
    _emit_text(cfg, dumps(report) + "\n")
    return 0


# -- parser -----------------------------------------------------------------


def _add_common(sp):
    sp.add_argument("--config", help="key-value config file; flags override file values")
    sp.add_argument("--alpha", help="Dirichlet amplitude alpha > 0")
    sp.add_argument("--omega", help="carrier frequency omega")
    sp.add_argument("--c", help="Neumann amplitude as re,im")
    sp.add_argument("--lambda", dest="lam", help="+1 defocusing (default) or -1 focusing")
    sp.add_argument("--family", help="family label A..E")
    sp.add_argument("--window", help="plot window x0,x1,y0,y1")
    sp.add_argument("--resolution", help="grid resolution nx,ny (min 64 each)")
    sp.add_argument("--cut-strategy", dest="cut_strategy", choices=("auto", "explicit"))
    sp.add_argument("--pairing", help="explicit root pairing, e.g. 0-3,1-2")
    sp.add_argument("--loop", help="loop cut as root_index,radius")
    sp.add_argument("--tol-root", dest="tol_root", help="root clustering tolerance")
    sp.add_argument("--tol-membership", dest="tol_membership", help="family membership tolerance")
    sp.add_argument("--tol-geometry", dest="tol_geometry", help="geometric test tolerance")
    sp.add_argument("--tol-integrator", dest="tol_integrator", help="ODE integrator tolerance")
    sp.add_argument("--out", help="output path (figure: basename for .svg/.csv/.grid)")
    sp.add_argument("--format", dest="fmt", choices=("json", "csv", "svg"))
    sp.add_argument("--seed", help="seed for sampled checks")
    sp.add_argument("--samples", help="sample count (verify suite size, jump probe points)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nlsadm",
        description="Admissibility analysis of single-exponential boundary triples "
        "for the half-line nonlinear Schrodinger equation.",
    )
    parser.add_argument("--version", action="version", version=f"nlsadm {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    specs = [
        ("classify", "classify a triple and write the full JSON report"),
        ("roots", "roots and multiplicities of the spectral quartic"),
        ("curves", "trace the cubic curve Gamma over a window"),
        ("regions", "domain partition and connectivity summary"),
        ("figure", "render the spectral-plane figure (SVG + CSV + sign grid)"),
        ("verify", "run the bundled invariant suite"),
        ("scan", "sweep a family parameter lattice and classify each point"),
        ("jump", "probe the background jump across each quartic cut"),
    ]
    for name, help_text in specs:
        sp = sub.add_parser(name, help=help_text)
        _add_common(sp)
        if name == "verify":
            sp.add_argument("--only", action="append", help="run a single invariant id (repeatable)")
            sp.add_argument("--fault", choices=("flip-constant",), help=argparse.SUPPRESS)
        if name == "scan":
            sp.add_argument("--range", action="append", help="parameter range name=lo:hi:n (repeatable)")
    return parser


_HANDLERS = {
    "classify": cmd_classify,
    "roots": cmd_roots,
    "curves": cmd_curves,
    "regions": cmd_regions,
    "figure": cmd_figure,
    "scan": cmd_scan,
    "jump": cmd_jump,
}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        cfg = _resolve_config(args)
        if args.command == "verify":
            return cmd_verify(cfg, only=getattr(args, "only", None), fault=getattr(args, "fault", None))
        return _HANDLERS[args.command](cfg)
    except SystemExit as exc:  # argparse help/usage paths
        code = exc.code
        return code if isinstance(code, int) else (0 if code is None else 2)
    except (ConfigError, OutOfWindow) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except InternalInconsistency as exc:
        print(f"internal inconsistency: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 4
    except NlsadmError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
