"""Command-line front end.

Subcommands::

    toricchow build theta|gamma|p1n --n N [--r R] [--d D ...] [--out FILE]
    toricchow check --fan FILE --r R
    toricchow order --theta-recipe RECIPE [--out FILE]
    toricchow chow --fan FILE --p P [--flat --r R]
    toricchow verify --suite NAME [--max-n N] [--r R] [--d D ...] [--p P] [--max-m M] [--report FILE]

Exit status is 0 when everything checked passes, 1 when a verification
failed (the report is still written) and 2 for usage or input errors.
Every command writes deterministic JSON, so identical inputs give
byte-identical output.

Built fans are cached by recipe in ``$TORIC_CACHE_DIR`` when it is set.
Each entry stores the sha256 of its payload; an entry whose digest does not
match is rebuilt with a warning on standard error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from math import comb
from pathlib import Path
from typing import Callable, Sequence

from .errors import CorruptCache, SizeLimit, ToricError
from .fan import (
    Cone,
    Fan,
    affine_space,
    fan_from_json,
    fan_to_json,
    maximal_cone_order,
    projective_line_power,
    standardness_report,
    unit,
)

MAX_RANK = 4
SUITES = ("subdivide", "ordering", "chow", "complexes", "theorem")


class UsageError(ToricError):
    pass


# ---------------------------------------------------------------------------
# JSON and the recipe cache


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def canonical(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def digest(obj) -> str:
    return hashlib.sha256(canonical(obj).encode()).hexdigest()


def normalize_recipe(recipe: dict) -> dict:
    op = recipe.get("op")
    if op not in ("theta", "gamma", "p1n"):
        raise UsageError(f"unknown recipe op {op!r}")
    try:
        out = {"op": op, "n": int(recipe["n"])}
        if op != "p1n":
            out["r"] = int(recipe.get("r", 0))
        if op == "theta":
            d = recipe.get("d", [])
            out["d"] = [int(x) for x in ([d] if isinstance(d, int) else d)]
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"malformed recipe {recipe!r}") from exc
    return out


def check_size(n: int, unsafe: bool) -> None:
    if n > MAX_RANK and not unsafe:
        raise SizeLimit(f"rank {n} exceeds the cap of {MAX_RANK}; pass --unsafe-large to override")


def construct(recipe: dict):
    """The construction named by a normalized recipe."""
    from .subdivide import Construction, build_gamma, build_theta

    if recipe["op"] == "theta":
        return build_theta(recipe["n"], recipe["r"], recipe["d"])
    if recipe["op"] == "gamma":
        return build_gamma(recipe["n"], recipe["r"])
    fan = projective_line_power(recipe["n"])
    return Construction(fan, fan, [], dict(recipe))


class FanCache:
    """Content-addressed store of fans keyed by the sha256 of their recipe."""

    def __init__(self, root: str | os.PathLike | None):
        self.root = Path(root) if root else None

    @classmethod
    def from_env(cls) -> "FanCache":
        return cls(os.environ.get("TORIC_CACHE_DIR") or None)

    def path(self, recipe: dict) -> Path:
        return self.root / f"{digest(recipe)}.json"

    def load(self, recipe: dict) -> dict | None:
        path = self.path(recipe)
        if not path.exists():
            return None
        try:
            entry = json.loads(path.read_text())
            if entry.get("recipe") != recipe or entry.get("sha256") != digest(entry["fan"]):
                raise CorruptCache("digest mismatch", str(path))
            return entry["fan"]
        except (ValueError, KeyError, TypeError) as exc:
            raise CorruptCache("unreadable entry", str(path)) from exc

    def store(self, recipe: dict, fan_json: dict) -> None:
        self.root.mkdir(parents=True, exist_ok=True)
        entry = {"recipe": recipe, "sha256": digest(fan_json), "fan": fan_json}
        tmp = self.path(recipe).with_suffix(".tmp")
        tmp.write_text(canonical(entry))
        tmp.replace(self.path(recipe))

    def fan_json(self, recipe: dict, warn: Callable[[str], None]) -> dict:
        if self.root is None:
            return fan_to_json(construct(recipe).fan)
        try:
            hit = self.load(recipe)
        except CorruptCache as exc:
            warn(f"warning: corrupt cache entry {exc.witness} ({exc.args[0]}); rebuilding")
            hit = None
        if hit is not None:
            return hit
        data = fan_to_json(construct(recipe).fan)
        self.store(recipe, data)
        return data


# ---------------------------------------------------------------------------
# verification suites


class Suite:
    """Collects named results; the suite passes when every result does."""

    def __init__(self, name: str, config: dict):
        self.name = name
        self.config = config
        self.results: list[dict] = []

    def record(self, check: str, ok: bool, **detail) -> None:
        self.results.append({"check": check, "ok": bool(ok), **detail})

    @property
    def ok(self) -> bool:
        return all(r["ok"] for r in self.results)

    def to_json(self) -> dict:
        return {"suite": self.name, "config": self.config, "ok": self.ok, "results": self.results}


def _prefix_cone(n: int, k: int) -> Cone:
    return Cone([unit(n, i) for i in range(1, k + 1)], n, check=False)


def suite_subdivide(s: Suite, max_n: int, r_values: Sequence[int], d: Sequence[int]) -> None:
    from .subdivide import SubfanSelection, build_theta, excluded_barycentric, star_sequence_subdivision

    for n in range(max_n + 1):
        fan = affine_space(n)
        for m in range(n + 1):
            sel = SubfanSelection(fan, maximal=[_prefix_cone(n, m)])
            for t in range(m + 1):
                eta = _prefix_cone(n, t)
                closed = excluded_barycentric(fan, eta, sel).fan
                literal = star_sequence_subdivision(fan, eta, sel)
                s.record("closed form equals star sequence", closed == literal, n=n, m=m, t=t)
    for n in range(1, max_n + 1):
        for r in [r for r in r_values if r <= n]:
            rep = standardness_report(build_theta(n, r, d).fan, r)
            s.record("theta is very r-standard", rep.ok, n=n, r=r, d=list(d), failures=rep.failures)


def suite_ordering(s: Suite, max_n: int, r_values: Sequence[int], d: Sequence[int]) -> None:
    from .ordering import build_admissible_ordering, verify_ordering
    from .subdivide import build_theta

    for n in range(1, max_n + 1):
        for r in [r for r in r_values if r <= n]:
            rep = verify_ordering(build_admissible_ordering(build_theta(n, r, d), r))
            s.record("ordering is admissible", rep.admissible, n=n, r=r, d=list(d), conditions=rep.conditions)


def suite_chow(s: Suite, max_n: int, r_values: Sequence[int], d: Sequence[int]) -> None:
    from .chow import chow_flat, chow_presentation, fulton_basis, sr_graded_piece
    from .errors import MethodDisagreement, NotABasis
    from .ordering import build_admissible_ordering
    from .subdivide import build_theta

    for n in range(1, max_n + 1):
        ordered = build_admissible_ordering(construct({"op": "p1n", "n": n}), 0)
        sizes = fulton_basis(ordered).sizes
        for k in range(n + 1):
            pres = chow_presentation(ordered.fan, k)
            sr = sr_graded_piece(ordered.fan, n - k)
            good = pres.rank == comb(n, k) == sizes[k] == sr.rank and not pres.torsion
            s.record("ranks of (P^1)^n", good, n=n, p=k, rank=pres.rank, expected=comb(n, k))
    for n in range(1, max_n + 1):
        for r in [r for r in r_values if r <= n]:
            ordered = build_admissible_ordering(build_theta(n, r, d), r)
            try:
                sizes = fulton_basis(ordered).sizes
                s.record("Fulton basis", True, n=n, r=r, sizes=list(sizes))
            except NotABasis as exc:
                s.record("Fulton basis", False, n=n, r=r, error=str(exc))
            for p in range(n + 1):
                try:
                    pres = chow_flat(ordered, r, p)
                    s.record("flat Chow routes agree", not pres.torsion, n=n, r=r, p=p, rank=pres.rank)
                except MethodDisagreement as exc:
                    s.record("flat Chow routes agree", False, n=n, r=r, p=p, error=str(exc))


def suite_complexes(s: Suite, max_n: int, r_values: Sequence[int], d: Sequence[int]) -> None:
    from .complexes import build_z_slice, h0_matches_chow, homology, verify_simplicial_identities
    from .subdivide import build_theta

    for n in range(1, max_n + 1):
        for r in [r for r in r_values if r <= n]:
            fan = build_theta(n, r, d).fan
            for p in range(n + 1):
                for flat in (False, True):
                    z = build_z_slice(fan, p, flat=flat, r=r)
                    h = homology(z)
                    good = (
                        z.check_square_zero()
                        and z.check_route_independence()
                        and all(rank == 0 and not tors for rank, tors in h[1:])
                        and not h[0][1]
                        and (flat or h0_matches_chow(z))
                    )
                    s.record("Z slice resolves", good, n=n, r=r, p=p, flat=flat, homology=[[a, list(b)] for a, b in h])
    for r in [r for r in r_values if 0 < r < max_n]:
        rep = verify_simplicial_identities(r, d, max_n)
        s.record("simplicial identities", rep.identities_hold, r=r, d=list(d), n_max=max_n, instances=len(rep.instances))


def suite_theorem(s: Suite, r: int, d: Sequence[int], p: int, max_m: int) -> None:
    from .complexes import ThetaTower, verify_acyclicity, verify_simplicial_identities

    T = ThetaTower(r, d)
    rep = verify_simplicial_identities(r, d, r + max_m, T)
    s.record("simplicial identities", rep.identities_hold, report=rep.to_json())
    acyc = verify_acyclicity(r, d, p, max_m, T)
    s.record("acyclicity", acyc.ok, report=acyc.to_json())


def run_suite(args) -> Suite:
    d = tuple(args.d) if args.d is not None else (1,)
    r_values = [args.r] if args.r is not None else list(range(0, args.max_n + 1))
    config = {"max_n": args.max_n, "r": args.r, "d": list(d)}
    if args.suite == "theorem":
        r = 1 if args.r is None else args.r
        p = args.p if args.p is not None else 0
        check_size(r + args.max_m, args.unsafe_large)
        s = Suite("theorem", {"r": r, "d": list(d), "p": p, "max_m": args.max_m})
        suite_theorem(s, r, d, p, args.max_m)
        return s
    check_size(args.max_n, args.unsafe_large)
    s = Suite(args.suite, config)
    runner = {
        "subdivide": suite_subdivide,
        "ordering": suite_ordering,
        "chow": suite_chow,
        "complexes": suite_complexes,
    }[args.suite]
    runner(s, args.max_n, r_values, d)
    return s


# ---------------------------------------------------------------------------
# subcommands


def _write(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _read_json(path: str) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from exc
    except ValueError as exc:
        raise UsageError(f"{path} is not valid JSON") from exc


def _load_fan(path: str) -> tuple[Fan, dict]:
    data = _read_json(path)
    try:
        return fan_from_json(data), data
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"{path} is not a fan file") from exc


def cmd_build(args) -> int:
    recipe = normalize_recipe({"op": args.kind, "n": args.n, "r": args.r, "d": args.d or []})
    check_size(recipe["n"], args.unsafe_large)
    data = FanCache.from_env().fan_json(recipe, lambda msg: print(msg, file=sys.stderr))
    _write(dumps({**data, "recipe": recipe}), args.out)
    return 0


def cmd_check(args) -> int:
    fan, _ = _load_fan(args.fan)
    rep = standardness_report(fan, args.r)
    out = {
        "r": args.r,
        "subdivision_of_p1n": rep.subdivision_of_p1n,
        "smooth": rep.smooth,
        "r_standard": rep.r_standard,
        "very_r_standard": rep.very_r_standard,
        "failures": rep.failures,
    }
    _write(dumps(out), args.out)
    return 0


def _ordered_from_recipe(recipe: dict, r: int | None):
    from .ordering import build_admissible_ordering

    return build_admissible_ordering(construct(recipe), r)


def _parse_recipe(text: str) -> dict:
    path = Path(text)
    if path.exists():
        data = _read_json(text)
        data = data.get("recipe", data)
    else:
        try:
            data = json.loads(text)
        except ValueError as exc:
            raise UsageError("--theta-recipe must be a JSON object or a file holding one") from exc
    if not isinstance(data, dict):
        raise UsageError("--theta-recipe must be a JSON object or a file holding one")
    return normalize_recipe({"op": "theta", **data})


def cmd_order(args) -> int:
    from .ordering import verify_ordering

    recipe = _parse_recipe(args.theta_recipe)
    check_size(recipe["n"], args.unsafe_large)
    ordered = _ordered_from_recipe(recipe, recipe.get("r", 0))
    rep = verify_ordering(ordered)
    position = {c: k for k, c in enumerate(maximal_cone_order(ordered.fan))}
    out = {
        "recipe": recipe,
        "fan": fan_to_json(ordered.fan),
        "order": [position[c] for c in ordered.order],
        "conditions": rep.conditions,
        "admissible": rep.admissible,
    }
    _write(dumps(out), args.out)
    return 0 if rep.admissible else 1


def cmd_chow(args) -> int:
    from .chow import chow_flat, chow_presentation

    fan, data = _load_fan(args.fan)
    if not 0 <= args.p <= fan.n:
        raise UsageError(f"--p must lie in 0..{fan.n}")
    if args.flat:
        if "recipe" not in data:
            raise UsageError("flat Chow groups need a fan file written by 'build' (it records the recipe)")
        recipe = normalize_recipe(data["recipe"])
        r = args.r if args.r is not None else recipe.get("r", 0)
        ordered = _ordered_from_recipe(recipe, r)
        if ordered.fan != fan:
            raise UsageError("the fan in the file does not match its recipe")
        pres = chow_flat(ordered, r, args.p)
    else:
        pres = chow_presentation(fan, args.p)
    out = {"p": args.p, "flat": bool(args.flat), **pres.to_json()}
    if args.flat:
        out["r"] = r
    _write(dumps(out), args.out)
    return 0


def cmd_verify(args) -> int:
    suite = run_suite(args)
    text = dumps(suite.to_json())
    if args.report:
        Path(args.report).write_text(text)
    else:
        sys.stdout.write(text)
    status = "passed" if suite.ok else "FAILED"
    failed = sum(not r["ok"] for r in suite.results)
    print(f"{suite.name}: {status} ({len(suite.results) - failed}/{len(suite.results)} checks)", file=sys.stderr)
    return 0 if suite.ok else 1


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="toricchow", description="Toric fan constructions and Chow-group verification.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p):
        p.add_argument("--unsafe-large", action="store_true", help=f"allow ranks above {MAX_RANK}")
        return p

    b = common(sub.add_parser("build", help="construct a fan and write it as JSON"))
    b.add_argument("kind", choices=["theta", "gamma", "p1n"])
    b.add_argument("--n", type=int, required=True)
    b.add_argument("--r", type=int, default=0)
    b.add_argument("--d", type=int, nargs="*", default=None)
    b.add_argument("--out")
    b.set_defaults(func=cmd_build)

    c = sub.add_parser("check", help="report standardness of a fan")
    c.add_argument("--fan", required=True)
    c.add_argument("--r", type=int, required=True)
    c.add_argument("--out")
    c.set_defaults(func=cmd_check)

    o = common(sub.add_parser("order", help="build and verify the admissible ordering of a theta fan"))
    o.add_argument("--theta-recipe", required=True, help='JSON such as {"n": 3, "r": 1, "d": [1]}, or a file holding it')
    o.add_argument("--out")
    o.set_defaults(func=cmd_order)

    h = sub.add_parser("chow", help="Chow group presentation of a fan")
    h.add_argument("--fan", required=True)
    h.add_argument("--p", type=int, required=True)
    h.add_argument("--flat", action="store_true")
    h.add_argument("--r", type=int)
    h.add_argument("--out")
    h.set_defaults(func=cmd_chow)

    v = common(sub.add_parser("verify", help="run a verification suite"))
    v.add_argument("--suite", choices=SUITES, required=True)
    v.add_argument("--max-n", type=int, default=3)
    v.add_argument("--r", type=int)
    v.add_argument("--d", type=int, nargs="+")
    v.add_argument("--p", type=int)
    v.add_argument("--max-m", type=int, default=2)
    v.add_argument("--report")
    v.set_defaults(func=cmd_verify)
    return parser


def run(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except (ToricError, ValueError, OSError) as exc:
        message = exc.args[0] if isinstance(exc, ToricError) and exc.args else str(exc)
        print(f"toricchow: error: {message}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run())
