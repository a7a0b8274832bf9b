"""
Command-line interface: ``blochgeom {capacity,voronoi,verify}``.

Exit codes: 0 ok, 1 verification failure, 2 configuration error,
3 invalid channel, 4 mode misuse.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import channels as ch
from .capacity import capacity_details, holevo_capacity
from .core import OutOfBallError
from .sampling import ball_grid, sample_sphere
from .voronoi import (
    DIVERGENCE_MODES,
    SPHERE_MODES,
    DiagramMode,
    ModeError,
    SiteSet,
    assign,
    export_cells,
    icosphere,
    label_faces,
    pure_limit_section,
)

EXIT_OK, EXIT_VERIFY, EXIT_CONFIG, EXIT_CHANNEL, EXIT_MODE = 0, 1, 2, 3, 4
DEFAULT_SPHERE_QUERIES = 10_000
DEFAULT_GRID = 41


class ConfigError(Exception):
    pass


def _g(x) -> str:
    return f"{x:.12g}"


def _parse_params(items) -> dict:
    out = {}
    for item in items or []:
        key, sep, value = item.partition("=")
        if not sep or not key:
            raise ConfigError(f"--param expects K=V, got {item!r}")
        if key == "axis":
            out[key] = value
            continue
        try:
            out[key] = float(value)
        except ValueError:
            raise ConfigError(f"--param {key} needs a number, got {value!r}") from None
    return out


def _write(data, out):
    if isinstance(data, str):
        data = data.encode()
    if out:
        Path(out).write_bytes(data)
    else:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()


# -- capacity -------------------------------------------------------------

def _load_channel(args):
    if bool(args.channel) == bool(args.channel_file):
        raise ConfigError("give exactly one of --channel or --channel-file")
    if args.channel_file:
        try:
            return ch.load_channel(args.channel_file)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read channel file: {exc}") from None
    return ch.build(args.channel, **_parse_params(args.param))


def cmd_capacity(args) -> int:
    if args.samples is not None and args.samples < 16:
        raise ConfigError("--samples must be at least 16 for capacity")
    fmt = args.format or "json"
    if fmt not in ("json", "csv"):
        raise ConfigError("capacity output format must be json or csv")
    channel = _load_channel(args)
    n = args.samples or 2000
    if args.figure:
        from .plotting import capacity_figure

        rep, img, div = capacity_details(channel, n, seed=args.seed)
        capacity_figure(img, div, rep.center, rep.capacity_nats, args.figure,
                        title=f"{rep.label}: C = {rep.capacity_nats:.6g} nats")
    else:
        rep = holevo_capacity(channel, n, seed=args.seed)
    if fmt == "json":
        text = rep.to_json() + "\n"
    else:
        d = rep.to_dict()
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["label", "n_samples", "capacity_nats", "capacity_bits", "cx", "cy", "cz", "solver_gap"])
        w.writerow([d["label"], d["n_samples"], d["capacity_nats"], d["capacity_bits"], *d["center"], d["solver_gap"]])
        text = buf.getvalue()
    _write(text, args.out)
    return EXIT_OK


# -- voronoi --------------------------------------------------------------

def read_sites(path) -> SiteSet:
    """Sites from a CSV of ``x,y,z`` rows; a non-numeric first row is a header."""
    try:
        rows = list(csv.reader(Path(path).read_text().splitlines()))
    except OSError as exc:
        raise ConfigError(f"cannot read sites: {exc}") from None
    rows = [r for r in rows if r and not r[0].lstrip().startswith("#")]
    pts = []
    for k, r in enumerate(rows):
        try:
            vals = [float(c) for c in r]
        except ValueError:
            if k == 0:
                continue
            raise ConfigError(f"sites row {k + 1} is not numeric: {r}") from None
        if len(vals) != 3:
            raise ConfigError(f"sites row {k + 1} needs 3 values, got {len(vals)}")
        pts.append(vals)
    if not pts:
        raise ConfigError("site file holds no sites")
    try:
        return SiteSet(np.array(pts))
    except (OutOfBallError, ValueError) as exc:
        raise ConfigError(f"bad sites: {exc}") from None


def _queries(mode, samples, seed, on_sphere):
    if on_sphere:
        return sample_sphere(samples or DEFAULT_SPHERE_QUERIES, seed)
    n = DEFAULT_GRID if samples is None else max(2, round(samples ** (1.0 / 3.0)))
    return ball_grid(n, 0.999)


def _assignment_csv(a, geodesic_margin=None) -> str:
    margins = a.margins if geodesic_margin is None else geodesic_margin
    lines = ["qx,qy,qz,site,margin"]
    for q, s, m in zip(a.queries, a.sites, margins):
        lines.append(f"{_g(q[0])},{_g(q[1])},{_g(q[2])},{int(s)},{_g(m)}")
    return "\n".join(lines) + "\n"


def _assignment_json(a, margins) -> dict:
    return {
        "mode": a.mode.value,
        "epsilon": a.epsilon,
        "queries": [[float(_g(c)) for c in q] for q in a.queries],
        "sites": [int(s) for s in a.sites],
        "margins": [float(_g(m)) if math.isfinite(m) else None for m in margins],
    }


def _eps_path(out, eps):
    p = Path(out)
    return p.with_name(f"{p.stem}.eps{eps:g}{p.suffix}")


def cmd_voronoi(args) -> int:
    if not args.sites:
        raise ConfigError("voronoi needs --sites")
    try:
        mode = DiagramMode.parse(args.mode)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    fmt = args.format or "csv"
    eps_list = args.epsilon or []
    for e in eps_list:
        if not 0.0 < e <= 0.5:
            raise ConfigError(f"--epsilon must lie in (0, 0.5], got {e}")
    if args.samples is not None and args.samples < 1:
        raise ConfigError("--samples must be positive")
    sites = read_sites(args.sites)

    if eps_list and mode not in DIVERGENCE_MODES:
        raise ModeError("--epsilon applies to the divergence modes only")

    if fmt in ("off", "svg"):
        if not sites.pure.all():
            raise ModeError("mesh export draws sphere cells and needs pure sites")
        _write(export_cells(sites, fmt), args.out)
        return EXIT_OK

    on_sphere = mode in SPHERE_MODES or bool(eps_list)
    q = _queries(mode, args.samples, args.seed, on_sphere)
    if eps_list:
        results = [pure_limit_section(sites, e, mode, q) for e in eps_list]
    else:
        results = [assign(mode, sites, q)]

    # Pure-state modes report the geodesic margin so their outputs coincide.
    common = None
    if mode in SPHERE_MODES and sites.pure.all():
        common = assign(DiagramMode.GEODESIC, sites, q).margins

    if fmt == "csv":
        blocks = [_assignment_csv(a, common) for a in results]
    else:
        blocks = [json.dumps(_assignment_json(a, a.margins if common is None else common)) + "\n"
                  for a in results]

    if not eps_list:
        _write(blocks[0], args.out)
    elif args.out and len(eps_list) == 1:
        _write(blocks[0], args.out)
    elif args.out:
        for e, b in zip(eps_list, blocks):
            _write(b, _eps_path(args.out, e))
    else:
        _write("".join(f"# epsilon={e:g}\n{b}" for e, b in zip(eps_list, blocks)), None)

    if args.figure:
        if not sites.pure.all():
            raise ModeError("cell figures need pure sites")
        from .plotting import diagram_figure

        verts, faces = icosphere(4)
        labels = label_faces(sites, verts, faces, DiagramMode.GEODESIC)
        diagram_figure(sites.points, verts, faces, labels, args.figure, title=f"{mode.value} cells")
    return EXIT_OK


# -- verify ---------------------------------------------------------------

def cmd_verify(args) -> int:
    from . import verify

    try:
        rows = verify.run(args.only, seed=args.seed)
    except KeyError as exc:
        raise ConfigError(exc.args[0]) from None
    table = verify.format_table(rows)
    print(table)
    if args.out:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["suite", "property", "samples", "max_error", "tolerance", "passed"])
        for r in rows:
            w.writerow([r.suite, r.name, r.samples, _g(r.max_error), _g(r.tolerance), int(r.passed)])
        Path(args.out).write_text(buf.getvalue())
    return EXIT_OK if all(r.passed for r in rows) else EXIT_VERIFY


# -- entry point ----------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="blochgeom", description="Qubit-state geometry, Voronoi diagrams and channel capacity.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
        sp.add_argument("--out", help="output path (default stdout)")
        sp.add_argument("--format", choices=["csv", "json", "off", "svg"])
        sp.add_argument("--samples", type=int, help="number of samples / queries")

    c = sub.add_parser("capacity", help="Holevo capacity of an affine qubit channel")
    c.add_argument("--channel", help=f"builder name: {', '.join(sorted(ch.BUILDERS))}")
    c.add_argument("--param", action="append", metavar="K=V", help="builder parameter (repeatable)")
    c.add_argument("--channel-file", help="JSON channel description")
    c.add_argument("--figure", help="also render the channel image to this file (.png/.svg/.pdf)")
    common(c)
    c.set_defaults(func=cmd_capacity)

    v = sub.add_parser("voronoi", help="nearest-site assignment and cell export")
    v.add_argument("--sites", help="CSV of x,y,z site coordinates")
    v.add_argument("--mode", default="geodesic", help=f"one of {[m.value for m in DiagramMode]}")
    v.add_argument("--epsilon", type=float, action="append", help="pure-limit shrink (repeatable)")
    v.add_argument("--figure", help="also render the sphere cells to this file")
    common(v)
    v.set_defaults(func=cmd_voronoi)

    r = sub.add_parser("verify", help="run the invariant suites")
    r.add_argument("--only", action="append", metavar="SUITE", help="run only this suite (repeatable)")
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--out", help="also write the table as CSV")
    r.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ch.InvalidChannelError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CHANNEL if exc.overflow is not None else EXIT_CONFIG
    except ModeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MODE


if __name__ == "__main__":
    sys.exit(main())
