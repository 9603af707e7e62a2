"""Command-line experiment runner.

Every subcommand resolves its flags (and an optional JSON config file) into an
``ExperimentConfig``, computes everything, and only then writes its artifacts,
so a failing run leaves no partial files. Exit status: 0 success, 1 a
verification failed or a budget ran out, 2 usage or domain error.
"""

import argparse
import json
import math
import os
import random
import sys
from dataclasses import asdict, dataclass, fields
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .approx import IndexSet, parse_index_set, parse_psi
from .counterexample import (
    ConstructionConfig,
    adversarial_samples,
    build_construction,
    check_chaining,
    envelope_series,
    random_rationals,
    stable_digits,
    support_khintchine_sum,
    verify_divergence,
    verify_transfer,
)
from .errors import DomainError, MultApproxError
from .estimate import (
    ScaleMatchedStars,
    SeededSampler,
    StarUnion,
    borel_cantelli_sums,
    box_counting_dimension,
    decay_probe,
    dyadic_shells,
    mean_hit_count,
    monte_carlo_measure,
)
from .exponents import (
    KINDS,
    ExponentConfig,
    block_diagnostics,
    closed_form_exponent,
    dimension_formulas,
    exponent_of_convergence,
    gallagher_converges,
    khintchine_converges,
)
from .fourier import (
    EmpiricalMeasure,
    coeff_bound,
    fejer_nmax,
    lemma33_certified,
    lemma33_lhs,
    lemma33_rhs,
    loglog_slope,
    measure_of_family,
    periodized_cell_sum,
    rect_fourier_coeff,
)
from .geometry import (
    DyadicRectangleFamily,
    StarDomain,
    covered,
    dyadic_index_range,
    dyadic_shell,
    star_measure,
)
from .output import config_hash, render_csv, render_json, render_loglog_svg
from .summation import parallel_map

OUT_ENV = "MULTAPPROX_OUT"
COMMANDS = ("exponent", "measure", "cover-check", "coeffs", "lemma33", "counterexample", "boxdim", "bc-sum", "decay")


class UsageError(Exception):
    pass


@dataclass
class ExperimentConfig:
    command: str = None
    psi: str = None
    Q: str = None
    kind: str = None
    method: str = None
    s: float = None
    epsilon: float = None
    qmax: int = None
    kmax: int = None
    nmax: int = None
    q: int = None
    qs: list = None
    j: int = None
    samples: int = None
    resolutions: list = None
    oracle: str = None
    levels: int = None
    mode: str = None
    thetas: list = None
    budget: int = None
    shells: int = None
    xi_budget: int = None
    tol: float = None
    atom: list = None
    cells: str = None
    seed: int = None
    threads: int = None
    out: str = None

    def to_dict(self):
        return asdict(self)

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    @classmethod
    def from_dict(cls, d):
        names = {f.name for f in fields(cls)}
        unknown = sorted(set(d) - names)
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(unknown)}")
        return cls(**d)

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))

    def hashed_dict(self):
        """The part of the config that determines the results (worker count and paths excluded)."""
        d = self.to_dict()
        d.pop("threads")
        d.pop("out")
        return d


DEFAULTS = {
    "exponent": dict(psi="power:3", Q="all", kind="all", method="auto", qmax=2**20),
    "measure": dict(psi="power:2", samples=10**6, tol=1e-2),
    "cover-check": dict(psi="power:2", qs=[3, 17, 256], samples=10**5),
    "coeffs": dict(psi="power:2"),
    "lemma33": dict(psi="power:3", s=0.5, epsilon=0.05, qs=[2**i for i in range(2, 11)], tol=1e-6),
    "counterexample": dict(levels=1, mode="exact", budget=10**7, samples=10**4, s=0.01),
    "boxdim": dict(psi="power:3", Q="all", qmax=2048, resolutions=[2**i for i in range(4, 13)], oracle="scale"),
    "bc-sum": dict(psi="power:3", Q="all", qmax=10**4),
    "decay": dict(psi="power:2", cells="0:0", shells=8, xi_budget=256),
}
REQUIRED = {"measure": ["q"], "coeffs": ["q"], "decay": ["q"]}
COMMON = dict(seed=0, threads=1)


def _int_list(text):
    return [int(t) for t in text.split(",") if t.strip()]


def _float_list(text):
    return [float(t) for t in text.split(",") if t.strip()]


def _str_list(text):
    return [t.strip() for t in text.split(",") if t.strip()]


def _u64(text):
    v = int(text)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="JSON experiment config; flags override it")
    common.add_argument("--seed", type=_u64, help="master seed (unsigned 64-bit)")
    common.add_argument("--threads", type=int, help="worker processes")
    common.add_argument("--out", metavar="DIR", help=f"output directory (default ${OUT_ENV} or .)")

    parser = argparse.ArgumentParser(prog="multapprox", description=__doc__.splitlines()[0], parents=[common])
    parser.add_argument("--version", action="version", version=f"multapprox {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_text):
        return sub.add_parser(name, help=help_text, parents=[common])

    psi_help = "approximation function: power:TAU[:SCALE], reciprocal or JSON"
    p = add("exponent", "exponents of convergence and dimension formulas")
    p.add_argument("--kind", choices=list(KINDS) + ["all"])
    p.add_argument("--psi", help=psi_help)
    p.add_argument("--Q", help="index set: all, primes, stride:A:B, explicit:1,2,3 or JSON")
    p.add_argument("--method", choices=["auto", "closed-form", "bisection"])
    p.add_argument("--qmax", type=int)

    p = add("measure", "Monte Carlo measure of A_q, or the Fourier measure identity at an atom")
    p.add_argument("--q", type=int)
    p.add_argument("--psi", help=psi_help)
    p.add_argument("--samples", type=int)
    p.add_argument("--atom", type=_float_list, help="x1,x2: test the measure identity for a point mass")
    p.add_argument("--j", type=int)
    p.add_argument("--nmax", type=int, help="truncation (default: Fejer rule for --tol)")
    p.add_argument("--tol", type=float)

    p = add("cover-check", "sample A_q and check the dyadic rectangle covering")
    p.add_argument("--qs", type=_int_list, help="comma-separated q values")
    p.add_argument("--psi", help=psi_help)
    p.add_argument("--samples", type=int)

    p = add("coeffs", "Fourier coefficient table of the rectangle families")
    p.add_argument("--q", type=int)
    p.add_argument("--psi", help=psi_help)
    p.add_argument("--j", type=int)
    p.add_argument("--nmax", type=int)

    p = add("lemma33", "lattice sums bounding mu(A_q) against the two-term bound")
    p.add_argument("--psi", help=psi_help)
    p.add_argument("--s", type=float)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--qs", type=_int_list)
    p.add_argument("--kmax", type=int, help="fixed truncation (default: raise until the tail is below --tol)")
    p.add_argument("--tol", type=float)

    p = add("counterexample", "build the divergent thin-set construction and verify it")
    p.add_argument("--levels", type=int)
    p.add_argument("--mode", choices=["exact", "scaled"])
    p.add_argument("--theta-list", dest="thetas", type=_str_list, help='e.g. "1,12/N,12/N"')
    p.add_argument("--budget", type=int, help="width of the prime search window per level")
    p.add_argument("--samples", type=int, help="rational samples for the transfer check")
    p.add_argument("--s", type=float, help="exponent for the envelope series")

    p = add("boxdim", "box-counting slope of truncated star unions")
    p.add_argument("--psi", help=psi_help)
    p.add_argument("--Q")
    p.add_argument("--qmax", type=int)
    p.add_argument("--resolutions", type=_int_list)
    p.add_argument("--oracle", choices=["scale", "union"])

    p = add("bc-sum", "Borel-Cantelli and Gallagher partial sums")
    p.add_argument("--psi", help=psi_help)
    p.add_argument("--Q")
    p.add_argument("--qmax", type=int)
    p.add_argument("--samples", type=int, help="also estimate the mean hit count from this many points")

    p = add("decay", "Fourier decay of the uniform measure on chosen cells")
    p.add_argument("--q", type=int)
    p.add_argument("--psi", help=psi_help)
    p.add_argument("--j", type=int)
    p.add_argument("--cells", help='"a:b;a:b;..." or "all"')
    p.add_argument("--shells", type=int)
    p.add_argument("--xi-budget", dest="xi_budget", type=int)
    return parser


def resolve_config(args):
    """Merge config file, command-line flags and defaults."""
    base = {}
    if args.config:
        try:
            base = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"--config: {exc}") from exc
        if not isinstance(base, dict):
            raise UsageError("--config: expected a JSON object")
    cfg = ExperimentConfig.from_dict(base)
    if cfg.command not in (None, args.command):
        raise UsageError(f"--config is for {cfg.command!r}, not {args.command!r}")
    cfg.command = args.command
    for f in fields(ExperimentConfig):
        v = getattr(args, f.name, None)
        if v is not None and f.name != "command":
            setattr(cfg, f.name, v)
    for key, v in {**COMMON, **DEFAULTS[args.command]}.items():
        if getattr(cfg, key) is None:
            setattr(cfg, key, v)
    if cfg.out is None:
        cfg.out = os.environ.get(OUT_ENV, ".")
    for key in REQUIRED.get(args.command, []):
        if getattr(cfg, key) is None:
            raise UsageError(f"--{key} is required for {args.command}")
    if cfg.threads < 1:
        raise UsageError("--threads must be at least 1")
    return cfg


# subcommands: each returns (artifacts, ok) where artifacts maps a file
# suffix to ("csv", header, rows) | ("json", payload) | ("svg", series, title, xlabel, ylabel)


def _applicable(kind, psi, Q, ecfg):
    # the d formula needs nothing beyond the range of psi
    if kind == "lambda":
        return khintchine_converges(psi, Q, ecfg)
    if kind == "tau":
        return gallagher_converges(psi, Q, ecfg)
    return True


def run_exponent(cfg):
    psi, Q = parse_psi(cfg.psi), parse_index_set(cfg.Q)
    ecfg = ExponentConfig(qmax=cfg.qmax, method=cfg.method)
    if cfg.kind == "all":
        rep = dimension_formulas(psi, Q, ecfg)
        payload = rep.to_dict()
        results = rep.exponents
    else:
        res = exponent_of_convergence(cfg.kind, psi, Q, ecfg)
        payload = res.to_dict()
        payload["closed_form"] = closed_form_exponent(cfg.kind, psi, Q)
        payload["applicable"] = _applicable(cfg.kind, psi, Q, ecfg)
        results = {cfg.kind: res}
    # dyadic block sums of each series at its exponent
    rows = []
    for kind, res in results.items():
        for m, lo, hi, total, ratio in block_diagnostics(kind, psi, Q, res.value, ecfg):
            rows.append((kind, res.value, m, lo, hi, total, ratio))
    header = ["kind", "s", "block", "q_lo", "q_hi", "block_sum", "ratio"]
    return {"csv": ("csv", header, rows), "json": ("json", payload)}, True


def run_measure(cfg):
    psi = parse_psi(cfg.psi)
    psi_q = psi(cfg.q)
    if cfg.atom is None:
        dom = StarDomain(cfg.q, psi_q)
        mc = monte_carlo_measure(dom.contains, cfg.samples, SeededSampler(cfg.seed), cfg.threads)
        closed = star_measure(psi_q)
        z = (mc.mean - closed) / mc.stderr if mc.stderr > 0 else 0.0
        payload = {"q": cfg.q, "psi_q": psi_q, "closed_form": closed, "z": z, **mc.to_dict()}
        return {"json": ("json", payload)}, abs(z) <= 4
    if len(cfg.atom) != 2:
        raise UsageError("--atom takes two coordinates x1,x2")
    x1, x2 = cfg.atom
    j = cfg.j if cfg.j is not None else dyadic_index_range(cfg.q, psi_q).j_hi
    nmax = cfg.nmax if cfg.nmax is not None else fejer_nmax(cfg.q, j, psi_q, x1, x2, cfg.tol)
    mu = EmpiricalMeasure.dirac(x1, x2)
    smooth = measure_of_family(mu, cfg.q, j, psi_q, nmax, "cesaro").value
    raw = measure_of_family(mu, cfg.q, j, psi_q, nmax, "none").value
    target = float(periodized_cell_sum(cfg.q, j, psi_q, x1, x2))
    payload = {
        "q": cfg.q, "j": j, "psi_q": psi_q, "atom": [x1, x2], "nmax": nmax,
        "cesaro": smooth, "raw": raw, "cell_sum": target, "error": abs(smooth - target),
        "lebesgue_family_mass": rect_fourier_coeff(cfg.q, j, psi_q, (0, 0)),
    }
    return {"json": ("json", payload)}, abs(smooth - target) <= cfg.tol


def _cover_job(args):
    q, psi_q, n, sampler = args
    x1, x2 = StarDomain(q, psi_q).sample(n, sampler.generator())
    shell = dyadic_shell(q, psi_q, x1)
    inside = covered(q, psi_q, x1, x2)
    rows = []
    for j in dyadic_index_range(q, psi_q):
        m = shell == j
        own = DyadicRectangleFamily(q, j, psi_q).contains(x1[m], x2[m])
        rows.append((q, j, int(m.sum()), int(inside[m].sum()), int((~inside[m]).sum()), int(own.sum())))
    return rows


def run_cover_check(cfg):
    psi = parse_psi(cfg.psi)
    root = SeededSampler(cfg.seed)
    jobs = [(q, psi(q), cfg.samples, root.substream(i)) for i, q in enumerate(cfg.qs)]
    rows = [r for part in parallel_map(_cover_job, jobs, cfg.threads) for r in part]
    escaped = sum(r[4] for r in rows)
    header = ["q", "j", "samples", "covered", "escaped", "covered_by_own_level"]
    payload = {"escaped": escaped, "samples": sum(r[2] for r in rows), "qs": cfg.qs}
    return {"csv": ("csv", header, rows), "json": ("json", payload)}, escaped == 0


def run_coeffs(cfg):
    psi = parse_psi(cfg.psi)
    q = cfg.q
    psi_q = psi(q)
    levels = [cfg.j] if cfg.j is not None else list(dyadic_index_range(q, psi_q))
    nmax = cfg.nmax if cfg.nmax is not None else 2 * q
    rows = []
    worst = 0.0
    nonzero_off = 0
    for j in levels:
        for n1 in range(-nmax, nmax + 1):
            for n2 in range(-nmax, nmax + 1):
                c = rect_fourier_coeff(q, j, psi_q, (n1, n2))
                if n1 % q or n2 % q:
                    nonzero_off += c != 0
                    rows.append((q, j, n1, n2, c, "", ""))
                else:
                    b = coeff_bound(q, j, psi_q, (n1, n2))
                    worst = max(worst, abs(c) / b)
                    rows.append((q, j, n1, n2, c, b, abs(c) / b))
    payload = {"q": q, "psi_q": psi_q, "levels": levels, "nmax": nmax, "max_ratio": worst,
               "nonzero_off_lattice": int(nonzero_off)}
    header = ["q", "j", "n1", "n2", "coeff", "bound", "ratio"]
    return {"csv": ("csv", header, rows), "json": ("json", payload)}, worst <= 16 and nonzero_off == 0


def _lemma33_job(args):
    q, psi_q, s, eps, kmax, tol = args
    res = lemma33_lhs(q, psi_q, s, kmax) if kmax is not None else lemma33_certified(q, psi_q, s, tol)
    return res.to_dict(), lemma33_rhs(q, psi_q, s, eps)


def run_lemma33(cfg):
    psi = parse_psi(cfg.psi)
    jobs = [(q, psi(q), cfg.s, cfg.epsilon, cfg.kmax, cfg.tol) for q in cfg.qs]
    results = parallel_map(_lemma33_job, jobs, cfg.threads)
    header = ["q", "levels", "kmax", "omega0", "omega1", "omega2", "t11", "t12", "t21", "t22",
              "total", "parts_sum", "tail_estimate", "signed_total", "rhs", "ratio"]
    rows, ratios, errs, exact0 = [], [], [], []
    for d, rhs in results:
        ratio = d["total"] / rhs
        ratios.append(ratio)
        errs.append(abs(d["parts_sum"] - d["total"]) / d["total"])
        exact0.append(Fraction(d["omega0"]) == d["levels"] * Fraction(d["psi_q"]))
        rows.append([d[k] for k in header[:13]] + [d["signed_total"], rhs, ratio])
    slope = loglog_slope(cfg.qs, ratios) if len(cfg.qs) >= 2 else math.nan
    payload = {
        "slope": slope,
        "max_identity_error": max(errs),
        "omega0_exact": all(exact0),
        "ratio_min": min(ratios),
        "ratio_max": max(ratios),
    }
    svg = ("svg", {"total / rhs": (cfg.qs, ratios)}, "lattice sum over bound", "q", "ratio")
    ok = max(errs) <= 1e-9 and all(exact0)
    return {"csv": ("csv", header, rows), "json": ("json", payload), "svg": svg}, ok


def run_counterexample(cfg):
    cc = ConstructionConfig(cfg.levels, cfg.mode, list(cfg.thetas or []), cfg.budget)
    built = build_construction(cc)
    levels = built.levels
    div = verify_divergence(levels)
    root = SeededSampler(cfg.seed)
    transfer = []
    for i, lv in enumerate(levels):
        rng = random.Random(int(root.substream(i).generator().integers(2**63)))
        half = cfg.samples // 2
        samples = random_rationals(cfg.samples - half, 10**6, rng) + adversarial_samples(lv, half, rng)
        transfer.append({"k": lv.k, **verify_transfer(lv, samples, rng=rng).to_dict()})
    env = envelope_series(levels, cfg.s)
    ks = support_khintchine_sum(levels)
    payload = {
        "construction": cc.to_dict(),
        "levels": [lv.summary() for lv in levels],
        "divergence": [
            {"k": r["k"], "sum": r["sum"], "target": r["target"],
             "exceeds_target": r["exceeds_target"], "exceeds_one": r["exceeds_one"]}
            for r in div
        ],
        "chaining": check_chaining(levels),
        "transfer": transfer,
        "envelope": {"s": cfg.s, "partial_sums": env, "stable_digits": stable_digits(env)},
        "support_khintchine_sum": float(ks),
        "support_sum_exceeds_levels": ks > len(levels),
    }
    ok = all(r["exceeds_target"] for r in div) and payload["chaining"] and all(t["holds"] for t in transfer)
    return {"json": ("json", payload)}, ok


def run_boxdim(cfg):
    psi, Q = parse_psi(cfg.psi), parse_index_set(cfg.Q)
    oracle = ScaleMatchedStars(psi, Q, cfg.qmax) if cfg.oracle == "scale" else StarUnion(psi, Q, cfg.qmax)
    res = box_counting_dimension(oracle, cfg.resolutions, SeededSampler(cfg.seed))
    d = closed_form_exponent("d", psi, Q)
    rows = [(L, c, "" if i == 0 else res.local_slopes[i - 1]) for i, (L, c) in enumerate(zip(res.resolutions, res.counts))]
    payload = {**res.to_dict(), "formula": None if d is None else 1 + min(d, 1.0)}
    svg = ("svg", {"occupied boxes": (res.resolutions, res.counts)}, "box counts", "grid size", "count")
    return {"csv": ("csv", ["resolution", "count", "local_slope"], rows), "json": ("json", payload), "svg": svg}, True


def run_bc_sum(cfg):
    psi, Q = parse_psi(cfg.psi), parse_index_set(cfg.Q)
    bc = borel_cantelli_sums(psi, Q, cfg.qmax)
    rows = list(bc.rows())
    payload = {
        "converges": bc.converges,
        "measure_sum": float(bc.measure_partial[-1]) if len(rows) else 0.0,
        "gallagher_sum": float(bc.gallagher_partial[-1]) if len(rows) else 0.0,
    }
    if cfg.samples:
        mean, se = mean_hit_count(psi, Q, cfg.qmax, cfg.samples, SeededSampler(cfg.seed), cfg.threads)
        payload["hit_count_mean"] = mean
        payload["hit_count_stderr"] = se
    header = ["q", "psi", "measure", "measure_partial", "gallagher_partial"]
    svg = ("svg", {"sum of measures": (bc.q.tolist(), bc.measure_partial.tolist())}, "Borel-Cantelli partial sums", "q", "partial sum")
    return {"csv": ("csv", header, rows), "json": ("json", payload), "svg": svg}, True


def _parse_cells(text, fam):
    q = fam.q
    if text.strip() == "all":
        return [fam.cell(a, b) for a in range(q) for b in range(q)]
    cells = []
    for item in text.split(";"):
        try:
            a, b = (int(t) for t in item.split(":"))
        except ValueError as exc:
            raise UsageError(f"--cells: cannot parse {item!r}") from exc
        cells.append(fam.cell(a, b))
    return cells


def run_decay(cfg):
    psi = parse_psi(cfg.psi)
    psi_q = psi(cfg.q)
    j = cfg.j if cfg.j is not None else dyadic_index_range(cfg.q, psi_q).j_hi
    fam = DyadicRectangleFamily(cfg.q, j, psi_q)
    cells = _parse_cells(cfg.cells, fam)
    res = decay_probe(cells, dyadic_shells(cfg.shells), cfg.xi_budget, SeededSampler(cfg.seed))
    rows = [(r["lo"], r["hi"], r["max_abs"], r["xi1"], r["xi2"]) for r in res.shells]
    payload = {"q": cfg.q, "j": j, "cells": len(cells), **res.to_dict()}
    svg = ("svg", {"shell max": ([r[0] for r in rows], [r[2] for r in rows])}, "Fourier decay", "|xi|", "max |mu^|")
    return {"csv": ("csv", ["lo", "hi", "max_abs", "xi1", "xi2"], rows), "json": ("json", payload), "svg": svg}, True


RUNNERS = {
    "exponent": run_exponent,
    "measure": run_measure,
    "cover-check": run_cover_check,
    "coeffs": run_coeffs,
    "lemma33": run_lemma33,
    "counterexample": run_counterexample,
    "boxdim": run_boxdim,
    "bc-sum": run_bc_sum,
    "decay": run_decay,
}


def render_artifacts(cfg, artifacts):
    """File name -> text for every artifact of a run."""
    cdict = cfg.hashed_dict()
    chash = config_hash(cdict)
    stem = cfg.command.replace("-", "_")
    out = {}
    for suffix, spec in artifacts.items():
        kind = spec[0]
        if kind == "csv":
            out[f"{stem}.csv"] = render_csv(spec[1], spec[2], chash)
        elif kind == "json":
            out[f"{stem}.json"] = render_json(spec[1], cdict, chash)
        else:
            out[f"{stem}.svg"] = render_loglog_svg(spec[1], chash, *spec[2:])
    return out


def parse_and_dispatch(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    try:
        cfg = resolve_config(args)
        artifacts, ok = RUNNERS[cfg.command](cfg)
    except UsageError as exc:
        print(f"multapprox {args.command}: usage error: {exc}", file=sys.stderr)
        return 2
    except DomainError as exc:
        print(f"multapprox {args.command}: {exc}", file=sys.stderr)
        return 2
    except MultApproxError as exc:
        print(f"multapprox {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    files = render_artifacts(cfg, artifacts)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    for name, text in files.items():
        (out / name).write_text(text)
        print(out / name)
    if not ok:
        print(f"multapprox {cfg.command}: verification failed", file=sys.stderr)
        return 1
    return 0


def main(argv=None):
    sys.exit(parse_and_dispatch(argv))


if __name__ == "__main__":
    main()
