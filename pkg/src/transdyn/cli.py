"""Command-line runs: each subcommand writes JSON-Lines reports, optional PPM images and a manifest.

Exit status: 0 on success, 1 on usage errors, 2 on domain errors (the error
class name is printed verbatim).
"""
from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import platform
import re
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .catalog import fatou, f_array, format_spec, parse_spec
from .errors import TransdynError
from .grid import RasterGrid, format_window, parse_resolution, parse_window, write_ppm

COMMANDS = ("render", "classify", "ladder", "attractors", "tracts", "hair", "web", "witness", "semiconj-check")

DEFAULT_WINDOWS = {
    "render": "-0.35,1.2:2.23,-1.2",
    "classify": "-4,4:8,-4",
    "web": "-6,6:6,-6",
    "witness": "0,4:24,-4",
}
DEFAULT_RES = {"render": "800x667", "web": "512x512", "witness": "1024x1024"}
DEFAULT_SPECS = {"witness": "expaffine:a=-2", "tracts": "expaffine:a=-2", "web": "quadexp:lambda=0.5"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _typed(fn, name):
    def conv(text):
        try:
            return fn(text)
        except (ValueError, TypeError) as exc:
            raise argparse.ArgumentTypeError(f"invalid {name} {text!r}: {exc}") from None

    conv.__name__ = name
    return conv


def _complex(text: str) -> complex:
    text = text.strip().replace("−", "-")
    if "," in text:
        re_, im_ = text.split(",")
        return complex(float(re_), float(im_))
    return complex(text.replace("i", "j"))


def _floats(text: str):
    return [float(x) for x in text.split(",") if x.strip()]


SPEC = _typed(parse_spec, "spec")
WINDOW = _typed(parse_window, "window")
RES = _typed(parse_resolution, "resolution")
COMPLEX = _typed(_complex, "complex number")
FLOATS = _typed(_floats, "list")


# ---------------------------------------------------------------------------
# semiconjugacy identity


def semiconj_check(a: complex = -1.0, grid_samples: int = 100) -> dict:
    """Residual of pi o f = g o pi for Fatou's function, pi(z) = e^{az}, g(w) = e^{-1} w e^{-w}."""
    xs = np.linspace(-5.0, 5.0, grid_samples)
    z = (xs[None, :] + 1j * xs[:, None]).ravel()
    pi = lambda u: np.exp(a * u)
    g = lambda w: math.exp(-1.0) * w * np.exp(-w)
    lhs = pi(f_array(fatou(), z))
    rhs = g(pi(z))
    res = np.abs(lhs - rhs) / np.maximum(1.0, np.abs(rhs))
    k = int(np.argmax(res))
    return {
        "a": [complex(a).real, complex(a).imag],
        "samples": int(z.size),
        "max_residual": float(res[k]),
        "worst_z": [float(z[k].real), float(z[k].imag)],
        "g_prime_0": math.exp(-1.0),
        "attracting": math.exp(-1.0) < 1.0,
    }


# ---------------------------------------------------------------------------
# parser


def _common(p, *, spec=True, window=False, res=False):
    if spec:
        p.add_argument("--spec", type=SPEC, help="function token, e.g. quadexp:lambda=1.1")
    if window:
        p.add_argument("--window", type=WINDOW, help="re,im:re,im (top-left : bottom-right)")
    if res:
        p.add_argument("--res", type=RES, help="WxH")
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--config", help="key=value file; flags given on the command line win")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="transdyn", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("render", help="Fatou/Julia classification image")
    _common(p, window=True, res=True)
    p.add_argument("--budget", type=int, default=200)

    p = sub.add_parser("classify", help="escape classes of sample points")
    _common(p, window=True)
    p.add_argument("--points", type=COMPLEX, nargs="*", help="explicit points (re,im)")
    p.add_argument("--n", type=int, default=1000, help="uniform samples in the window")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--budget", type=int, default=200)
    p.add_argument("--ell-max", type=int, default=8)
    p.add_argument("--R", type=float, help="ladder base radius")
    p.add_argument("--hull-disc", type=FLOATS, help="re,im,r of the seed disc for the hull oracle")
    p.add_argument("--nmax", type=int, default=4)

    p = sub.add_parser("ladder", help="iterated maximum modulus levels")
    _common(p)
    p.add_argument("--R", type=float)
    p.add_argument("--depth", type=int, default=21)

    p = sub.add_parser("attractors", help="attracting and parabolic cycles")
    _common(p)
    p.add_argument("--box", type=FLOATS, default=[-3.0, 3.0, -3.0, 3.0], help="xmin,xmax,ymin,ymax")
    p.add_argument("--max-period", type=int, default=2)

    p = sub.add_parser("tracts", help="tract boundaries and geometry of the log transform")
    _common(p)
    p.add_argument("--rho", type=float)
    p.add_argument("--tract-seed", type=COMPLEX, help="point near the tract boundary")
    p.add_argument("--probes", type=int, default=40)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("hair", help="hairs and endpoints of e^z + a")
    _common(p, spec=False)
    p.add_argument("--a", type=float, default=-2.0)
    p.add_argument("--address", action="append", help="pre|per, e.g. 0,1|2 (repeatable)")
    p.add_argument("--depth", type=int, default=3)
    p.add_argument("--samples", type=int, default=64)

    p = sub.add_parser("web", help="spider's-web nesting of G_n = T(f^n(G))")
    _common(p, window=True, res=True)
    p.add_argument("--centre", type=COMPLEX, help="seed disc centre (default: a repelling fixed point)")
    p.add_argument("--radius", type=float, default=0.05)
    p.add_argument("--radii", type=FLOATS, default=[1.0, 2.0, 4.0])
    p.add_argument("--nmax", type=int, default=20)

    p = sub.add_parser("witness", help="level-set separation witness B")
    _common(p, window=True, res=True)
    p.add_argument("--rho", type=float, default=math.exp(6))
    p.add_argument("--eps", type=float, default=0.1)
    p.add_argument("--rprime", type=float, default=20.0)
    p.add_argument("--depth", type=int, default=12)
    p.add_argument("--query", type=COMPLEX)

    p = sub.add_parser("semiconj-check", help="pi o f = g o pi for Fatou's function")
    _common(p, spec=False)
    p.add_argument("--a", type=float, default=-1.0)
    p.add_argument("--samples", type=int, default=100, help="grid points per axis")
    return ap


def _config_args(path: str):
    """key=value lines as argv tokens (blank lines and # comments skipped)."""
    out, command = [], None
    for raw in Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, eq, val = line.partition("=")
        if not eq:
            raise UsageError(f"--config: bad line {raw!r}")
        key, val = key.strip(), val.strip()
        if key == "command":
            command = val
            continue
        flag = "--" + key.replace("_", "-")
        if key in ("points",):
            out += [flag] + val.split()
        elif key == "address":
            for v in val.split(";"):
                out += [flag, v.strip()]
        else:
            out += [flag, val]
    return command, out


_NEGATIVE = re.compile(r"^-[\d.]")


def parse_args(argv):
    argv = list(argv)
    cfg = None
    if "--config" in argv:
        k = argv.index("--config")
        if k + 1 >= len(argv):
            raise UsageError("--config needs a path")
        cfg = argv[k + 1]
    elif any(a.startswith("--config=") for a in argv):
        cfg = next(a for a in argv if a.startswith("--config="))[len("--config="):]
    if cfg is not None:
        try:
            command, extra = _config_args(cfg)
        except OSError as exc:
            raise UsageError(f"--config: {exc}") from None
        if argv and argv[0] in COMMANDS:
            argv = [argv[0]] + extra + argv[1:]
        elif command:
            argv = [command] + extra + argv
    # values such as -0.35,1.2:2.23,-1.2 would otherwise read as options
    argv = [" " + a if _NEGATIVE.match(a) else a for a in argv]
    args = build_parser().parse_args(argv)
    if args.command is None:
        raise UsageError("a command is required: " + ", ".join(COMMANDS))
    # make the recorded config complete
    if getattr(args, "window", "n/a") is None:
        args.window = parse_window(DEFAULT_WINDOWS[args.command])
    if getattr(args, "res", "n/a") is None:
        args.res = parse_resolution(DEFAULT_RES.get(args.command, "512x512"))
    if getattr(args, "spec", "n/a") is None and args.command in DEFAULT_SPECS:
        args.spec = parse_spec(DEFAULT_SPECS[args.command])
    return args


# ---------------------------------------------------------------------------
# commands


def _grid(args) -> RasterGrid:
    tl, br = args.window if args.window else parse_window(DEFAULT_WINDOWS[args.command])
    w, h = args.res if getattr(args, "res", None) else parse_resolution(DEFAULT_RES.get(args.command, "512x512"))
    try:
        return RasterGrid(tl, br, w, h)
    except ValueError as exc:
        raise UsageError(f"--window/--res: {exc}") from None


def _spec(args):
    if getattr(args, "spec", None) is not None:
        return args.spec
    if args.command in DEFAULT_SPECS:
        return parse_spec(DEFAULT_SPECS[args.command])
    raise UsageError(f"{args.command}: --spec is required")


def _pair(z):
    z = complex(z)
    return [z.real, z.imag]


def _attractor_record(a):
    return {
        "kind": a.kind,
        "period": a.period,
        "cycle": [_pair(c) for c in a.cycle],
        "multiplier": _pair(a.multiplier),
        "abs_multiplier": abs(a.multiplier),
        "radius": a.radius,
    }


def cmd_render(args, spec):
    from .dynamics import find_attractors
    from .topology import escaping_fraction, render_classification, to_rgb

    grid = _grid(args)
    atts = find_attractors(spec)
    out = render_classification(spec, grid, atts, budget=args.budget, workers=args.workers)
    codes, counts = np.unique(out.labels, return_counts=True)
    recs = [{"code": int(c), "meaning": out.legend.get(int(c), ""), "pixels": int(n)} for c, n in zip(codes, counts)]
    recs.append({"escaping_fraction": escaping_fraction(out), "attractors": [_attractor_record(a) for a in atts]})
    return {"render.ppm": to_rgb(out.labels), "render.jsonl": recs}, {"window": grid.window_token(), "res": f"{grid.width}x{grid.height}"}


def cmd_classify(args, spec):
    from .dynamics import classify_batch, find_attractors, modulus_ladder
    from .topology import classify_hull_batch

    if args.points:
        zs = np.array(args.points, dtype=complex)
    else:
        grid = _grid(args)
        rng = np.random.default_rng(args.seed)
        tl, br = grid.top_left, grid.bottom_right
        zs = rng.uniform(tl.real, br.real, args.n) + 1j * rng.uniform(br.imag, tl.imag, args.n)
    ladder = modulus_ladder(spec, args.R, depth=args.budget + 1)
    atts = [a for a in find_attractors(spec) if a.is_attracting]
    res = classify_batch(spec, zs, ladder, args.budget, atts, args.ell_max)
    hull = None
    if args.hull_disc:
        if len(args.hull_disc) != 3:
            raise UsageError("--hull-disc: expected re,im,r")
        c = complex(args.hull_disc[0], args.hull_disc[1])
        hull = classify_hull_batch(spec, zs, (c, args.hull_disc[2]), args.nmax, args.ell_max, workers=args.workers)
    recs = []
    for k, r in enumerate(res):
        rec = {"z": _pair(zs[k]), "label": r.label.value, "ell": r.ell, "exp_ell": r.exp_ell, "steps": r.steps}
        if hull is not None:
            rec["hull_label"] = hull[k].label.value
            rec["hull_ell"] = hull[k].ell
        recs.append(rec)
    return {"classify.jsonl": recs}, {"R": ladder.R, "n_points": int(zs.size)}


def cmd_ladder(args, spec):
    from .dynamics import modulus_ladder

    lad = modulus_ladder(spec, args.R, depth=args.depth)
    recs = [{"n": n, "tier": lv.tier, "value": lv.value} for n, lv in enumerate(lad.levels)]
    return {"ladder.jsonl": recs}, {"R": lad.R, "validity_floor": lad.validity_floor}


def cmd_attractors(args, spec):
    from .dynamics import find_attractors

    if len(args.box) != 4:
        raise UsageError("--box: expected xmin,xmax,ymin,ymax")
    atts = find_attractors(spec, box=tuple(args.box), max_period=args.max_period)
    return {"attractors.jsonl": [_attractor_record(a) for a in atts]}, {}


def cmd_tracts(args, spec):
    from .logtransform import (
        check_disjoint_type,
        check_gulfs,
        estimate_geometry,
        find_normalization_shift,
        find_tract_seeds,
        make_setup,
        trace_tract_boundary,
    )

    setup = make_setup(spec, args.rho)
    seed = args.tract_seed
    if seed is None:
        seeds = find_tract_seeds(setup, n_rows=8)
        if not seeds:
            from .errors import NotFound

            raise NotFound("no level-curve crossing found on the scan lines")
        seed = min(seeds, key=lambda z: abs(z.imag))
    tract = estimate_geometry(trace_tract_boundary(setup, seed))
    tract.gulfs = check_gulfs(tract, [1.0, 1.5, 2.0, 3.0, 4.0], args.probes, rng_seed=args.seed)
    shift, shift_ok, dmin = find_normalization_shift(setup, seed=seed)
    rep = check_disjoint_type(setup, [tract])
    tract.disjoint_type = rep.value
    rec = tract.to_json()
    summary = {
        "rho": setup.rho,
        "normalization_shift": shift,
        "expanding": shift_ok,
        "min_abs_derivative": dmin,
        "disjoint_type": rep.value,
        "certificate": None if rep.certificate is None else {"centre": _pair(rep.certificate[0]), "radius": rep.certificate[1]},
        "closure_ok": rep.closure_ok,
    }
    return {"tracts.jsonl": [rec, summary]}, {"rho": setup.rho, "tract_seed": _pair(seed)}


def cmd_hair(args, spec):
    from .dynamics import modulus_ladder
    from .catalog import expaffine
    from .hairs import classify_endpoint, parse_address, trace_hair

    if not args.address:
        raise UsageError("hair: at least one --address is required")
    try:
        addrs = [parse_address(s) for s in args.address]
    except ValueError as exc:
        raise UsageError(f"--address: {exc}") from None
    ladder = modulus_ladder(expaffine(args.a))
    recs = []
    for s in addrs:
        h = trace_hair(args.a, s, depth=args.depth, t_samples=args.samples)
        classify_endpoint(args.a, h, ladder)
        recs.append(h.to_json())
    return {"hair.jsonl": recs}, {"a": args.a}


def _repelling_fixed_point(spec):
    from .dynamics import find_attractors

    cands = [a for a in find_attractors(spec, max_period=1) if a.kind == "repelling"]
    if not cands:
        raise UsageError("web: no repelling fixed point found; pass --centre")
    return min(cands, key=lambda a: (abs(a.cycle[0]), a.cycle[0].real)).cycle[0]


def cmd_web(args, spec):
    from .topology import spiderweb_nesting

    grid = _grid(args)
    centre = args.centre if args.centre is not None else _repelling_fixed_point(spec)
    rep, masks = spiderweb_nesting(spec, (centre, args.radius), args.radii, args.nmax, grid, keep_masks=True)
    # shade each pixel by the first listed level that contains it
    shade = np.zeros(grid.shape, np.uint8)
    for k, (n, _) in enumerate(reversed(rep.levels)):
        shade[masks[n]] = 80 + int(175 * (len(rep.levels) - k) / max(len(rep.levels), 1))
    rgb = np.repeat(shade[:, :, None], 3, axis=2)
    recs = [dict(r, nested=rep.nesting_ok) for r in rep.to_records()]
    recs.append(
        {
            "nesting_ok": rep.nesting_ok,
            "boundary_in_image": rep.boundary_in_image,
            "under_resolved": rep.under_resolved,
            "lower_bound_from": rep.lower_bound_from,
        }
    )
    return {"web.ppm": rgb, "web.jsonl": recs}, {"centre": _pair(centre), "radius": args.radius, "window": grid.window_token()}


def cmd_witness(args, spec):
    from .logtransform import make_setup
    from .witness import separation_witness

    grid = _grid(args)
    setup = make_setup(spec, args.rho)
    rep = separation_witness(setup, args.eps, args.rprime, grid, args.depth, args.query, workers=args.workers)
    palette = np.array([[255, 255, 255], [150, 150, 150], [0, 0, 0]], np.uint8)
    return {"witness.ppm": palette[rep.grid.labels], "witness.jsonl": [rep.to_json()]}, {"window": grid.window_token(), "rho": setup.rho}


def cmd_semiconj(args, spec):
    rec = semiconj_check(args.a, args.samples)
    return {"semiconj-check.jsonl": [rec]}, {}


HANDLERS = {
    "render": cmd_render,
    "classify": cmd_classify,
    "ladder": cmd_ladder,
    "attractors": cmd_attractors,
    "tracts": cmd_tracts,
    "hair": cmd_hair,
    "web": cmd_web,
    "witness": cmd_witness,
    "semiconj-check": cmd_semiconj,
}


def _json_default(o):
    if isinstance(o, complex):
        return [o.real, o.imag]
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(type(o).__name__)


def _write(outdir: Path, artifacts: dict) -> dict:
    digests = {}
    for name, payload in artifacts.items():
        path = outdir / name
        if name.endswith(".ppm"):
            write_ppm(path, payload)
        else:
            with open(path, "w") as fh:
                for rec in payload:
                    fh.write(json.dumps(rec, default=_json_default, sort_keys=True) + "\n")
        digests[name] = hashlib.sha256(path.read_bytes()).hexdigest()
    return digests


def _token(v) -> str:
    if isinstance(v, complex):
        return f"{v.real!r},{v.imag!r}"
    return repr(v) if isinstance(v, float) else str(v)


def _resolved(args) -> dict:
    """Flag values as the tokens the parser reads back, so a manifest re-runs as a config file."""
    out = {}
    for k, v in sorted(vars(args).items()):
        if v is None:
            pass
        elif k == "spec":
            v = format_spec(v)
        elif k == "window":
            v = format_window(*v)
        elif k == "res":
            v = f"{v[0]}x{v[1]}"
        elif k == "points":
            v = " ".join(_token(complex(x)) for x in v)
        elif k == "address":
            v = ";".join(v)
        elif isinstance(v, list):
            v = ",".join(_token(x) for x in v)
        elif isinstance(v, (complex, float)):
            v = _token(v)
        out[k] = v
    return out


def _tolerances() -> dict:
    from . import dynamics, hairs, topology, witness

    return {
        "orbit_log_horizon": dynamics.DEFAULT_HORIZON,
        "bounded_box": dynamics.DEFAULT_BOX,
        "converge_tol": dynamics.CONVERGE_TOL,
        "render_log_horizon": topology.RENDER_LOG_HORIZON,
        "tile": topology.TILE,
        "hair_stop_gap": hairs.STOP_GAP,
        "hair_endpoint_tol": hairs.TOL_ENDPOINT,
        "hair_j_max": hairs.J_MAX,
        "witness_phase_limit": witness.PHASE_LIMIT,
    }


def run(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        args = parse_args(argv)
        spec = None
        if args.command not in ("hair", "semiconj-check"):
            spec = _spec(args)
        outdir = Path(args.out)
        try:
            outdir.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise UsageError(f"--out: {exc}") from None
        if not os.access(outdir, os.W_OK):
            raise UsageError(f"--out: {outdir} is not writable")
        artifacts, extra = HANDLERS[args.command](args, spec)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except TransdynError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        # parameter values the owning module rejects (rho too small, a >= -1, ...)
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    digests = _write(outdir, artifacts)
    manifest = {
        "command": args.command,
        "config": _resolved(args),
        "resolved": extra,
        "artifacts": digests,
        "tolerances": _tolerances(),
        "versions": {
            "transdyn": __version__,
            "numpy": np.__version__,
            "scipy": __import__("scipy").__version__,
            "python": platform.python_version(),
        },
    }
    (outdir / "manifest.json").write_text(json.dumps(manifest, default=_json_default, indent=2, sort_keys=True) + "\n")
    for name in digests:
        print(outdir / name)
    return 0


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
