"""Command-line entry point: ``cuspsieve <subcommand> ...``.

Exit codes: 0 clean, 1 verification violation, 2 usage or parse error,
3 I/O error.  Every option can also come from a ``key = value`` config
file given with ``--config``; flags override it.
"""

from __future__ import annotations

import json
import sys
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation
from pathlib import Path

import click

from cuspsieve import congruence, fpfactor, hecke, sieve
from cuspsieve.arith import is_prime
from cuspsieve.qseries import FORM_WEIGHTS, delta_k

EXIT_VIOLATION = 1
EXIT_USAGE = 2
EXIT_IO = 3

JSON_MARKER = "--- json ---"


class ExactInt(click.ParamType):
    """Integer accepting exact decimals and scientific notation (``1e9``)."""

    name = "integer"

    def convert(self, value, param, ctx):
        if isinstance(value, int):
            return value
        try:
            d = Decimal(str(value).strip().replace("_", ""))
        except InvalidOperation:
            self.fail(f"{value!r} is not a number", param, ctx)
        if not d.is_finite() or d != d.to_integral_value():
            self.fail(f"{value!r} is not an integer", param, ctx)
        return int(d)


INT = ExactInt()
WEIGHT = click.Choice([str(k) for k in FORM_WEIGHTS])


@dataclass
class RunConfig:
    k: int
    limit: int
    polys: list[str] = field(default_factory=list)
    checkpoint: str | None = None
    resume: str | None = None
    checkpoint_every: int = sieve.DEFAULT_CHECKPOINT_EVERY
    precision_bits: int = 128
    output: str | None = None
    workers: int = 1

    def __post_init__(self):
        if self.k not in FORM_WEIGHTS:
            raise click.BadParameter(f"k must be one of {FORM_WEIGHTS}")
        if self.limit < 2:
            raise click.BadParameter("limit must be >= 2")
        if self.workers < 1:
            raise click.BadParameter("workers must be >= 1")


def read_config(path: str) -> dict[str, str]:
    out = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise click.UsageError(f"{path}:{lineno}: expected key = value")
        out[key.strip().replace("-", "_")] = value.strip()
    return out


def _io_error(exc: OSError):
    click.echo(f"error: {exc}", err=True)
    sys.exit(EXIT_IO)


def load_polys(paths) -> list[fpfactor.ProjPolynomial]:
    polys = []
    for path in paths:
        try:
            polys.append(fpfactor.load_poly(path))
        except fpfactor.PolyFormatError as exc:
            raise click.UsageError(f"parse error: {exc}") from None
        except OSError as exc:
            _io_error(exc)
    return polys


def emit_json(payload: dict, output: str | None) -> None:
    text = json.dumps(payload, indent=2)
    click.echo(JSON_MARKER)
    click.echo(text)
    if output:
        try:
            Path(output).write_text(text + "\n")
        except OSError as exc:
            _io_error(exc)


@click.group()
@click.option("--config", "config_path", type=click.Path(dir_okay=False), help="key = value defaults file")
@click.pass_context
def main(ctx, config_path):
    """Fourier coefficients of Delta_k and the non-vanishing sieve."""
    if config_path:
        try:
            cfg = read_config(config_path)
        except OSError as exc:
            _io_error(exc)
        if "poly" in cfg:
            cfg["poly"] = [s.strip() for s in cfg["poly"].split(",") if s.strip()]
        ctx.default_map = {name: cfg for name in main.commands}


@main.command()
@click.option("--k", "k", type=WEIGHT, required=True)
@click.option("--n", "n", type=INT, required=True, help="print a_1 .. a_n")
def coeffs(k, n):
    """Print n<TAB>a_n(Delta_k) for n = 1..N."""
    if n < 1:
        raise click.BadParameter("n must be >= 1", param_hint="--n")
    f = delta_k(int(k), n)
    click.echo("\n".join(f"{i}\t{f[i]}" for i in range(1, n + 1)))


@main.command()
@click.option("--k", "k", type=WEIGHT, required=True)
@click.option("--pmax", type=INT, default=1000, show_default=True)
@click.option("--theta-nmax", type=INT, default=200, show_default=True)
@click.option("--precision-bits", type=INT, default=128, show_default=True)
def verify(k, pmax, theta_nmax, precision_bits):
    """Check congruence tables, coefficient laws and the closed form."""
    k = int(k)
    if pmax < 2:
        raise click.BadParameter("pmax must be >= 2", param_hint="--pmax")
    failures = 0

    def report(name, bad, fmt=str):
        nonlocal failures
        if bad:
            failures += len(bad)
            click.echo(f"FAIL {name}: {len(bad)} violation(s)")
            for item in bad[:20]:
                click.echo(f"  {fmt(item)}")
        else:
            click.echo(f"ok   {name}")

    report("congruence tables", congruence.verify_tables(k, pmax))
    if k == 16:
        report(f"theta congruence mod 31 (n <= {theta_nmax})", congruence.theta_congruence_check(theta_nmax), lambda n: f"n={n}")
    report("multiplicativity", hecke.multiplicativity_violations(k, pmax), lambda mn: f"m={mn[0]} n={mn[1]}")
    report("prime-power recurrence", hecke.recurrence_violations(k, pmax), lambda pj: f"p={pj[0]} j={pj[1]}")
    report("Deligne bound", hecke.deligne_violations(k, pmax), lambda p: f"p={p}")
    tol = 2.0 ** (-precision_bits / 2)
    trig_bad = [row for row in hecke.trig_suite(k, min(pmax, 50), 6, precision_bits) if row[2] >= tol]
    report("trigonometric closed form", trig_bad, lambda r: f"p={r[0]} n={r[1]} residual={float(r[2]):.3e}")
    f = delta_k(k, 3)
    ok = hecke.theorem2_preconditions(k, f[2], f[3])
    report("first-zero-is-prime preconditions", [] if ok else [(f[2], f[3])])
    hit = hecke.smallest_vanishing_scan(k, pmax)
    report(f"no vanishing a_p for p <= {pmax}", [] if hit is None else [hit], lambda p: f"a_{p} = 0")
    sys.exit(EXIT_VIOLATION if failures else 0)


@main.command("classify")
@click.option("--p", "p", type=INT, required=True)
@click.option("--disc", type=click.Choice(["-23", "-31"]), default="-31", show_default=True)
def classify_cmd(p, disc):
    """Splitting type of p in Q(sqrt(disc)) and the implied a_p residue."""
    if not is_prime(p):
        raise click.BadParameter(f"{p} is not prime", param_hint="--p")
    cls = congruence.classify(p, int(disc))
    click.echo(str(cls))
    if cls.tag != "Ramified":
        k = 12 if disc == "-23" else 16
        click.echo(f"a_p(Delta_{k}) = {congruence.type2_residue(k, p)} mod {-int(disc)}")


@main.command()
@click.option("--poly", "poly", required=True, help="polynomial file, or 'quartic59'")
@click.option("--p", "p", type=INT, required=True)
def deg2(poly, p):
    """RuledOut / NotRuledOut / Indeterminate for a prime p."""
    (P,) = load_polys([poly])
    if p == P.ell:
        raise click.BadParameter(f"p must differ from ell = {P.ell}", param_hint="--p")
    if not is_prime(p):
        raise click.BadParameter(f"{p} is not prime", param_hint="--p")
    click.echo(str(fpfactor.eliminate_by_poly(P, p)))


@main.command()
@click.option("--k", "k", type=WEIGHT, required=True)
def residues(k):
    """Zero-forcing residue classes for every congruence of weight k."""
    k = int(k)
    for rule in congruence.RULES[k]:
        zs = congruence.solve_zero_residues(rule)
        click.echo(f"ell={rule.ell}\tmod {rule.ell ** rule.N_max}\t{len(zs)}\t{','.join(map(str, zs))}")
    if k == 12:
        for ell, mod, res in congruence.SERRE_K12:
            click.echo(f"ell={ell}\tmod {mod}\t{len(res)}\t{','.join(map(str, res))}")
    if k in congruence.TYPE2:
        click.echo(f"ell={congruence.TYPE2[k]}\tnon-square")


@main.command()
def export():
    """Print the built-in congruence data as a plain-text table."""
    click.echo(congruence.rules_table(), nl=False)


def _certify(k: int, B: int, output: str | None) -> None:
    rep = sieve.certify_bound_membership(k, B)
    for line in rep.lines():
        click.echo(line)
    click.echo("all components pass" if rep.passed else "FAILED: " + ", ".join(rep.failures()))
    emit_json(rep.to_dict(), output)
    sys.exit(0 if rep.passed else EXIT_VIOLATION)


@main.command("sieve")
@click.option("--k", "k", type=WEIGHT, required=True)
@click.option("--limit", type=INT, default=None, help="scan n < LIMIT")
@click.option("--poly", "poly", multiple=True, help="polynomial file (repeatable), or 'quartic59'")
@click.option("--checkpoint", type=click.Path(dir_okay=False), default=None)
@click.option("--resume", type=click.Path(dir_okay=False), default=None)
@click.option("--checkpoint-every", type=INT, default=sieve.DEFAULT_CHECKPOINT_EVERY, show_default=True)
@click.option("--workers", type=INT, default=1, show_default=True)
@click.option("--output", type=click.Path(dir_okay=False), default=None)
@click.option("--certify", "certify_b", type=INT, default=None, help="check a published bound instead of searching")
def sieve_cmd(k, limit, poly, checkpoint, resume, checkpoint_every, workers, output, certify_b):
    """Search for the first prime not ruled out."""
    k = int(k)
    if certify_b is not None:
        _certify(k, certify_b, output)
    if limit is None:
        raise click.UsageError("--limit is required unless --certify is given")
    cfg = RunConfig(k, limit, list(poly), checkpoint, resume, checkpoint_every, output=output, workers=workers)
    polys = load_polys(cfg.polys)
    ckpt = None
    if cfg.resume:
        try:
            ckpt = sieve.SieveCheckpoint.load(cfg.resume)
        except OSError as exc:
            _io_error(exc)
        except (ValueError, KeyError) as exc:
            raise click.UsageError(f"bad checkpoint: {exc}") from None
    try:
        rep = sieve.search(
            cfg.k,
            cfg.limit,
            polys,
            checkpoint=ckpt,
            checkpoint_path=cfg.checkpoint or cfg.resume,
            checkpoint_every=cfg.checkpoint_every,
            workers=cfg.workers,
            partitions=cfg.workers if cfg.workers > 1 else None,
        )
    except sieve.CheckpointMismatch as exc:
        raise click.UsageError(str(exc)) from None
    except OSError as exc:
        _io_error(exc)
    click.echo(rep.summary())
    emit_json(rep.to_dict(), cfg.output)


@main.command()
@click.option("--k", "k", type=WEIGHT, required=True)
@click.option("--b", "b", type=INT, required=True)
@click.option("--output", type=click.Path(dir_okay=False), default=None)
def certify(k, b, output):
    """Per-component check of a published bound B_k."""
    _certify(int(k), b, output)


if __name__ == "__main__":  # pragma: no cover
    main()
