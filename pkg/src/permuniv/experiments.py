"""Seeded Monte Carlo runners and special constructions.

Every runner is a loop over trial indices.  A trial is a pure function of
``(config, index)``: its randomness comes from ``rng.trial_rng(master_seed,
index)``, so trials may run in any order or in worker processes and the
collected records (sorted by index) are identical.
"""

from __future__ import annotations

import csv
import io
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from functools import partial
from typing import Any, Callable, Optional

from . import rng as rngmod
from .errors import BadDivisibility, BadParameters, InternalInvariant, PermunivError
from .matrix import (
    ZeroOneMatrix,
    build_coupled_matrix,
    coupling_certificate,
    is_copy,
    matrix_contains_permutation,
    permutation_matrix,
    verify_certificate,
)
from .perm import (
    Permutation,
    all_permutations,
    contains_pattern,
    format_permutation,
    identity,
    is_k_universal,
    parse_permutation,
    reverse_identity,
)
from .quasirandom import _as_fraction, all_l_delta, in_Q_k, random_L_bound, restrict_permutation
from .scanning import choose_threads, multi_thread_scan, verify_trace
from .stats import binomial_sigma, quantiles, wilson_interval
from .structure import decode_structured, decompose

SCHEMA = "permuniv.experiment/1"
KINDS = ("universality", "containment", "scan_success", "ldelta_survey",
         "decomposition_sweep", "coupling_audit")
EXHAUSTIVE_MAX_N = 7


def tilted_grid(ell: int) -> Permutation:
    """The permutation a*ell + b + 1 -> b*ell + a + 1 on ell^2 points."""
    if ell < 1:
        raise ValueError("ell must be positive")
    vals = [0] * (ell * ell)
    for a in range(ell):
        for b in range(ell):
            vals[a * ell + b] = b * ell + a + 1
    return Permutation(tuple(vals))


def verify_witness(sigma: Permutation, pi: Permutation, idx) -> bool:
    """Check that positions ``idx`` of ``sigma`` carry the pattern ``pi``."""
    if idx is None or len(idx) != pi.n or any(b <= a for a, b in zip(idx, idx[1:])):
        return False
    if idx and not (1 <= idx[0] and idx[-1] <= sigma.n):
        return False
    vals = [sigma(x) for x in idx]
    return all((vals[i] < vals[j]) == (pi.values[i] < pi.values[j])
               for i in range(pi.n) for j in range(pi.n))


def auto_cap(k: int) -> int:
    """ceil(log^2 k) with natural logs, at least 1."""
    return max(1, math.ceil(math.log(k) ** 2)) if k > 1 else 1


def resolve_n(value, k: int, multiple: int = 1) -> int:
    """Explicit integer, or a preset tied to a landmark length.

    ``quarter[:eps]`` = (1+eps) k^2 / 4 (eps defaults to 0.1), ``square20`` = 20 k^2,
    ``loglog`` = 2000 k^2 log log k.  Presets round up to ``multiple``.
    """
    if isinstance(value, int):
        return value
    text = str(value).strip().lower()
    if text.lstrip("-").isdigit():
        return int(text)
    if text.startswith("quarter"):
        eps = Fraction(text.split(":", 1)[1]) if ":" in text else Fraction(1, 10)
        raw = math.ceil((1 + eps) * k * k / 4)
    elif text == "square20":
        raw = 20 * k * k
    elif text == "loglog":
        raw = math.ceil(2000 * k * k * math.log(math.log(k))) if k > 2 else 2000 * k * k
    else:
        raise BadParameters(f"unknown length preset {value!r}")
    return -(-raw // multiple) * multiple


@dataclass
class ExperimentConfig:
    kind: str
    k: int = 3
    n: Optional[int] = None
    m: Optional[int] = None
    trials: int = 1000
    master_seed: int = 0
    threads: int = 1
    cap: Optional[int] = None
    alpha: float = 0.1
    q: int = 5
    patterns: list[str] = field(default_factory=list)
    exhaustive: bool = False
    per_delta: bool = False
    timing: bool = False
    workers: int = 1
    output_path: Optional[str] = None
    format: str = "csv"

    def validate(self) -> None:
        if self.kind not in KINDS:
            raise BadParameters(f"unknown experiment kind {self.kind!r}")
        if self.trials < 1:
            raise BadParameters("trials must be at least 1")
        if self.k < 1:
            raise BadParameters("k must be at least 1")
        if self.format not in ("csv", "json"):
            raise BadParameters("format must be csv or json")
        if self.kind in ("universality", "containment", "coupling_audit") and self.n is None:
            raise BadParameters(f"{self.kind} needs n")
        if self.kind == "scan_success" and self.m is None and self.n is None:
            raise BadParameters("scan_success needs m (or n)")
        if self.kind == "coupling_audit" and self.n % (4 * self.k):
            raise BadDivisibility(f"n={self.n} is not a multiple of 4k={4 * self.k}")
        if self.cap is not None and self.cap < 1:
            raise BadParameters("cap must be positive")
        if self.exhaustive and self.kind in ("universality", "containment") and self.n > EXHAUSTIVE_MAX_N:
            raise BadParameters(f"exhaustive mode needs n <= {EXHAUSTIVE_MAX_N}")

    def public(self) -> dict:
        d = asdict(self)
        d.pop("workers")
        d.pop("output_path")
        return d


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    trials: list[dict]
    summary: dict
    violations: list[str]

    @property
    def ok(self) -> bool:
        return not self.violations


def default_panel(k: int, master_seed: int) -> list[tuple[str, Permutation]]:
    """identity, reverse, tilted grid (square k only) and one seeded random pattern."""
    panel = [("identity", identity(k)), ("reverse", reverse_identity(k))]
    root = math.isqrt(k)
    if root * root == k and k > 1:
        panel.append(("tilted", tilted_grid(root)))
    seed = rngmod.derive_seed(master_seed, 2**32 - 1)
    perm = rngmod.make_rng(seed).permutation(k) + 1
    panel.append(("random", Permutation(tuple(int(v) for v in perm))))
    return panel


def pattern_label(pi: Permutation) -> str:
    """Compact one-line form ("2413") when every value is a digit, dash-joined otherwise."""
    sep = "" if pi.n < 10 else "-"
    return sep.join(str(v) for v in pi.values)


def _panel(config: ExperimentConfig) -> list[tuple[str, Permutation]]:
    if config.patterns:
        return [(pattern_label(p), p) for p in map(parse_permutation, config.patterns)]
    return default_panel(config.k, config.master_seed)


def _sample_sigma(config: ExperimentConfig, index: int) -> tuple[Optional[int], Permutation]:
    if config.exhaustive:
        return None, _nth_permutation(config.n, index)
    seed, g = rngmod.trial_rng(config.master_seed, index)
    return seed, Permutation(tuple(int(v) + 1 for v in g.permutation(config.n)))


def _nth_permutation(n: int, index: int) -> Permutation:
    """Lexicographic unranking, so exhaustive trials are index-addressable."""
    items = list(range(1, n + 1))
    out = []
    for i in range(n, 0, -1):
        f = math.factorial(i - 1)
        j, index = divmod(index, f)
        out.append(items.pop(j))
    return Permutation(tuple(out))


def _trial_count(config: ExperimentConfig) -> int:
    if config.exhaustive and config.kind in ("universality", "containment"):
        return math.factorial(config.n)
    return config.trials


# -- per-trial functions (top level so worker processes can pickle them) --

def _trial_universality(config: ExperimentConfig, index: int) -> dict:
    seed, sigma = _sample_sigma(config, index)
    ok, missing = is_k_universal(sigma, config.k)
    verified = True
    for pi in all_permutations(config.k):
        if pi in missing:
            continue
        verified &= verify_witness(sigma, pi, contains_pattern(sigma, pi))
    return {"trial_index": index, "derived_seed": seed, "sigma": format_permutation(sigma),
            "universal": int(ok), "missing": len(missing), "verified": int(verified)}


def _trial_containment(config: ExperimentConfig, index: int) -> dict:
    seed, sigma = _sample_sigma(config, index)
    rec: dict[str, Any] = {"trial_index": index, "derived_seed": seed}
    verified = True
    for label, pi in _panel(config):
        w = contains_pattern(sigma, pi) if pi.n <= sigma.n else None
        if w is not None:
            verified &= verify_witness(sigma, pi, w)
        rec[f"avoid_{label}"] = int(w is None)
    rec["verified"] = int(verified)
    return rec


def _scan_pattern(config: ExperimentConfig) -> Permutation:
    if config.patterns:
        return parse_permutation(config.patterns[0])
    return dict(default_panel(config.k, config.master_seed))["random"]


def _scan_width(config: ExperimentConfig) -> int:
    return config.m if config.m is not None else config.n // (4 * config.k)


def _trial_scan(config: ExperimentConfig, index: int) -> dict:
    pi = _scan_pattern(config)
    k = pi.n
    seed, g = rngmod.trial_rng(config.master_seed, index)
    M = ZeroOneMatrix.random(2 * k, _scan_width(config), g)
    offsets = choose_threads((), config.threads, k)
    report = multi_thread_scan(M, pi, offsets, config.cap)
    ls = all_l_delta(pi)
    in_q = all(v * v <= 9 * k for v in ls)
    problems = []
    for tr in report.traces:
        if not verify_trace(M, pi, tr):
            problems.append(f"trace t={tr.t} failed verification")
        if tr.success and tr.pretended == 0 and not is_copy(M, pi, tr.witness):
            problems.append(f"trace t={tr.t} witness is not a copy")
    for ov in report.overlaps:
        dt = offsets[ov.j] - offsets[ov.i]
        if len(ov.rows) > ls[dt - 1]:
            problems.append(f"threads {offsets[ov.i]},{offsets[ov.j]} share {len(ov.rows)} rows > L_{dt}")
        if config.cap is not None and ov.size > len(ov.rows) * config.cap:
            problems.append("overlap exceeds rows * cap")
        # |T_t & T_t'| <= 3 sqrt(k) * cap for patterns in Q_k, as size^2 <= 9 k cap^2
        if config.cap is not None and in_q and ov.size ** 2 > 9 * k * config.cap ** 2:
            problems.append(f"threads {offsets[ov.i]},{offsets[ov.j]} overlap {ov.size} > 3 sqrt(k) cap")
    return {
        "trial_index": index, "derived_seed": seed,
        "success": "".join(str(int(tr.success)) for tr in report.traces),
        "any_success": int(report.any_success),
        "max_overlap": max((ov.size for ov in report.overlaps), default=0),
        "max_overlap_rows": max((len(ov.rows) for ov in report.overlaps), default=0),
        "pretended": sum(tr.pretended for tr in report.traces),
        "problems": ";".join(problems),
    }


def _trial_ldelta(config: ExperimentConfig, index: int) -> dict:
    seed, g = rngmod.trial_rng(config.master_seed, index)
    pi = Permutation(tuple(int(v) + 1 for v in g.permutation(config.k)))
    ls = all_l_delta(pi)
    top = max(ls, default=0)
    rec = {"trial_index": index, "derived_seed": seed, "k": config.k,
           "delta": ls.index(top) + 1 if ls else 0, "L_delta": top,
           "in_Qk": int(top * top <= 9 * config.k)}
    if config.per_delta:
        rec["all_L"] = ls
    return rec


def _decomposition_record(pi: Permutation, alpha, q: int) -> dict:
    try:
        d = decompose(pi, alpha, q)
    except PermunivError as exc:
        return {"error": f"{type(exc).__name__}: {exc}"}
    info = d.to_dict(pi)
    error = ""
    if d.Z:
        enc = d.encoding(pi)
        if decode_structured(enc) != restrict_permutation(pi, d.Z):
            error = "encode/decode round trip failed"
    budget = info["budget"] or {}
    return {
        "Z_size": len(d.Z), "iterations": len(d.iterations),
        "cases": "".join(str(it.case) for it in d.iterations),
        "q_final": d.q_final, "b_final": d.b_final,
        "budget_lhs": budget.get("lhs"), "budget_rhs": budget.get("rhs"),
        "budget_ok": None if not budget else int(budget["ok"]),
        "encoding_bits": info["encoding_bits"], "error": error,
    }


def _trial_decomposition(config: ExperimentConfig, index: int) -> dict:
    seed, g = rngmod.trial_rng(config.master_seed, index)
    pi = Permutation(tuple(int(v) + 1 for v in g.permutation(config.k)))
    rec = {"trial_index": index, "derived_seed": seed, "label": "uniform"}
    rec.update(_decomposition_record(pi, _as_fraction(config.alpha), config.q))
    return rec


def _trial_coupling(config: ExperimentConfig, index: int) -> dict:
    seed = rngmod.derive_seed(config.master_seed, index)
    sample = build_coupled_matrix(config.k, config.n, seed)
    k, mu, sigma = sample.k, sample.mu, sample.sigma
    problems = []
    cert = coupling_certificate(sample)
    if cert is None or not verify_certificate(mu, permutation_matrix(sigma), *cert):
        problems.append("no interval-minor certificate")
    panel = _panel(config)
    g = rngmod.make_rng(seed ^ 0x5DEECE66D)
    panel = panel + [("trial_random", Permutation(tuple(int(v) + 1 for v in g.permutation(k))))]
    rec: dict[str, Any] = {"trial_index": index, "derived_seed": seed}
    for label, pi in panel:
        if pi.n != k:
            rec[f"chain_{label}"] = "skip"
            continue
        scan = multi_thread_scan(mu, pi, list(range(1, mu.rows - pi.n + 1)))
        found = matrix_contains_permutation(mu, pi)
        occ = contains_pattern(sigma, pi)
        if scan.any_success and found is None:
            problems.append(f"{label}: scan success without matrix containment")
        if found is not None and (not is_copy(mu, pi, found) or occ is None):
            problems.append(f"{label}: matrix containment without pattern containment")
        if occ is not None and not verify_witness(sigma, pi, occ):
            problems.append(f"{label}: bad pattern witness")
        rec[f"chain_{label}"] = f"{int(scan.any_success)}{int(found is not None)}{int(occ is not None)}"
    rec["mu"] = "/".join(format(b, f"0{mu.cols}b")[::-1] for b in mu.bits)
    rec["problems"] = ";".join(problems)
    return rec


TRIAL_FUNCS: dict[str, Callable[[ExperimentConfig, int], dict]] = {
    "universality": _trial_universality,
    "containment": _trial_containment,
    "scan_success": _trial_scan,
    "ldelta_survey": _trial_ldelta,
    "decomposition_sweep": _trial_decomposition,
    "coupling_audit": _trial_coupling,
}


def _timed(fn, config, index):
    t0 = time.perf_counter()
    rec = fn(config, index)
    rec["wall_time"] = round(time.perf_counter() - t0, 6)
    return rec


def collect_trials(config: ExperimentConfig, indices=None) -> list[dict]:
    """Run the per-trial function over ``indices`` and return records ordered by index."""
    fn = TRIAL_FUNCS[config.kind]
    if indices is None:
        indices = range(_trial_count(config))
    indices = list(indices)
    work = partial(_timed, fn, config) if config.timing else partial(fn, config)
    if config.workers > 1 and len(indices) > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            records = list(pool.map(work, indices, chunksize=max(1, len(indices) // (8 * config.workers))))
    else:
        records = [work(i) for i in indices]
    return sorted(records, key=lambda r: r["trial_index"])


def _freq(successes: int, trials: int) -> dict:
    lo, hi = wilson_interval(successes, trials)
    p = successes / trials
    return {"count": successes, "trials": trials, "estimate": p,
            "wilson99": [lo, hi], "sigma": binomial_sigma(p, trials)}


# -- summaries --

def _summarise_universality(config, records):
    hits = sum(r["universal"] for r in records)
    s = {"n": config.n, "k": config.k, "exhaustive": config.exhaustive, **_freq(hits, len(records))}
    bad = [f"trial {r['trial_index']}: unverified witness" for r in records if not r["verified"]]
    return s, bad


def _summarise_containment(config, records):
    s: dict[str, Any] = {"n": config.n, "k": config.k, "exhaustive": config.exhaustive, "avoidance": {}}
    for key in records[0]:
        if key.startswith("avoid_"):
            s["avoidance"][key[6:]] = _freq(sum(r[key] for r in records), len(records))
    bad = [f"trial {r['trial_index']}: unverified witness" for r in records if not r["verified"]]
    return s, bad


def _summarise_scan(config, records):
    pi = _scan_pattern(config)
    t = len(records)
    per_thread = [_freq(sum(int(r["success"][i]) for r in records), t) for i in range(config.threads)]
    s = {
        "pattern": format_permutation(pi), "k": pi.n, "m": _scan_width(config),
        "threads": choose_threads((), config.threads, pi.n), "cap": config.cap,
        "in_Qk": in_Q_k(pi), "per_thread_success": per_thread,
        "any_success": _freq(sum(r["any_success"] for r in records), t),
        "max_overlap": max(r["max_overlap"] for r in records),
        "max_overlap_rows": max(r["max_overlap_rows"] for r in records),
        "pretended_total": sum(r["pretended"] for r in records),
    }
    if config.cap is not None and s["in_Qk"]:
        s["overlap_bound_ok"] = s["max_overlap"] ** 2 <= 9 * pi.n * config.cap ** 2
    bad = [f"trial {r['trial_index']}: {r['problems']}" for r in records if r["problems"]]
    return s, bad


def _summarise_ldelta(config, records):
    k, t = config.k, len(records)
    tops = [r["L_delta"] for r in records]
    s: dict[str, Any] = {"k": k, "Qk_fraction": _freq(sum(r["in_Qk"] for r in records), t),
                         "max_L": quantiles(tops), "tail": []}
    bad = []
    for L in range(1, k + 1):
        bound = random_L_bound(k, L)
        if bound.exact >= 1:
            continue
        emp = sum(1 for v in tops if v >= L) / t
        slack = 3 * math.sqrt(bound.exact * (1 - bound.exact) / t)
        ok = emp <= bound.exact + slack
        s["tail"].append({"L": L, "empirical": emp, "bound": bound.exact, "three_sigma": slack, "ok": ok})
        if not ok:
            bad.append(f"Pr(max L >= {L}) = {emp} exceeds bound {bound.exact} + 3 sigma")
    return s, bad


def _summarise_decomposition(config, records):
    uniform = [r for r in records if r["label"] == "uniform"]
    bad = [f"{r['label']} {r['trial_index']}: {r['error']}" for r in records if r["error"]]
    s = {
        "k": config.k, "alpha": config.alpha, "q": config.q,
        "stopped_immediately": _freq(sum(1 for r in uniform if r["iterations"] == 0), len(uniform)),
        "Z_size": quantiles([r["Z_size"] for r in uniform if "Z_size" in r]),
        "iterations": quantiles([r["iterations"] for r in uniform if "iterations" in r]),
        "q_final": quantiles([r["q_final"] for r in uniform if "q_final" in r]),
        "b_final": quantiles([r["b_final"] for r in uniform if "b_final" in r]),
        "encoding_bits": quantiles([r["encoding_bits"] for r in uniform if r.get("encoding_bits")]),
        "fixtures": {r["label"]: {key: r.get(key) for key in ("Z_size", "iterations", "q_final", "b_final")}
                     for r in records if r["label"] != "uniform"},
    }
    return s, bad


def _summarise_coupling(config, records):
    k, n = config.k, config.n
    m = n // (4 * k)
    counts = [[0] * m for _ in range(2 * k)]
    for r in records:
        for y, row in enumerate(r["mu"].split("/")):
            for x, ch in enumerate(row):
                counts[y][x] += ch == "1"
    t = len(records)
    uppers = [wilson_interval(c, t)[1] for row in counts for c in row]
    s = {"k": k, "n": n, "m": m, "violations": sum(1 for r in records if r["problems"]),
         "entry_frequency": [[c / t for c in row] for row in counts],
         "entry_min_wilson_upper": min(uppers), "entry_bound_ok": min(uppers) >= 0.5,
         "exact_entry_probability": 1 - (1 - 1 / (2 * k)) ** (4 * k)}
    bad = [f"trial {r['trial_index']}: {r['problems']}" for r in records if r["problems"]]
    if not s["entry_bound_ok"]:
        bad.append("an entry frequency sits below 1/2")
    return s, bad


SUMMARIES = {
    "universality": _summarise_universality,
    "containment": _summarise_containment,
    "scan_success": _summarise_scan,
    "ldelta_survey": _summarise_ldelta,
    "decomposition_sweep": _summarise_decomposition,
    "coupling_audit": _summarise_coupling,
}


def run_experiment(config: ExperimentConfig) -> ExperimentResult:
    config.validate()
    records = collect_trials(config)
    if config.kind == "decomposition_sweep":
        alpha = _as_fraction(config.alpha)
        fixtures = [("identity", identity(config.k))]
        root = math.isqrt(config.k)
        if root * root == config.k:
            fixtures.append(("tilted", tilted_grid(root)))
        for j, (label, pi) in enumerate(fixtures):
            rec = {"trial_index": -(j + 1), "derived_seed": None, "label": label}
            rec.update(_decomposition_record(pi, alpha, config.q))
            records.append(rec)
    summary, violations = SUMMARIES[config.kind](config, records)
    return ExperimentResult(config, records, summary, violations)


def run_universality(config: ExperimentConfig) -> ExperimentResult:
    config.kind = "universality"
    return run_experiment(config)


def run_containment(config: ExperimentConfig, pi: Optional[Permutation] = None) -> ExperimentResult:
    config.kind = "containment"
    if pi is not None:
        config.patterns = [format_permutation(pi)]
    return run_experiment(config)


def run_scan_success(config: ExperimentConfig, pi: Optional[Permutation] = None) -> ExperimentResult:
    config.kind = "scan_success"
    if pi is not None:
        config.patterns = [format_permutation(pi)]
    return run_experiment(config)


def run_ldelta_survey(config: ExperimentConfig) -> ExperimentResult:
    config.kind = "ldelta_survey"
    return run_experiment(config)


def run_decomposition_sweep(config: ExperimentConfig) -> ExperimentResult:
    config.kind = "decomposition_sweep"
    return run_experiment(config)


def run_coupling_audit(config: ExperimentConfig) -> ExperimentResult:
    config.kind = "coupling_audit"
    return run_experiment(config)


# -- output --

def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (list, tuple)):
        return " ".join(str(x) for x in v)
    return str(v)


def to_json(result: ExperimentResult) -> str:
    doc = {"schema": SCHEMA, "config": result.config.public(), "trials": result.trials,
           "summary": result.summary, "violations": result.violations}
    return json.dumps(doc, indent=2) + "\n"


def to_csv(result: ExperimentResult) -> str:
    buf = io.StringIO()
    header: list[str] = []
    for r in result.trials:
        for key in r:
            if key not in header:
                header.append(key)
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in result.trials:
        w.writerow([_cell(r.get(h)) for h in header])
    buf.write(f"# schema: {json.dumps(SCHEMA)}\n")
    buf.write(f"# config: {json.dumps(result.config.public())}\n")
    for key, value in result.summary.items():
        buf.write(f"# {key}: {json.dumps(value)}\n")
    buf.write(f"# violations: {json.dumps(result.violations)}\n")
    return buf.getvalue()


def render(result: ExperimentResult) -> str:
    return to_json(result) if result.config.format == "json" else to_csv(result)


def parse_csv(text: str) -> tuple[list[dict[str, str]], dict[str, Any]]:
    """Read back a CSV result: per-trial rows (as strings) and the summary block."""
    body = [ln for ln in text.splitlines() if not ln.startswith("#")]
    rows = list(csv.DictReader(io.StringIO("\n".join(body))))
    summary = {}
    for ln in text.splitlines():
        if ln.startswith("# "):
            key, _, value = ln[2:].partition(": ")
            summary[key] = json.loads(value)
    return rows, summary
