"""Command-line experiment runner.

Usage::

    bubblelab {constants,cr-moments,surround,gmc,haar-check}
              [--config PATH] [--seed N] [--out DIR] [--threads N]
              [--set KEY=VALUE ...] [--dry-run]

Config files are flat ``key = value`` lines; ``#`` starts a comment, lists
are comma-separated, and later lines override earlier ones.  ``--set``
overrides the file, and ``--seed/--out/--threads`` override both.

Outputs (all inside ``--out``, each written to a temporary file and renamed):

* ``results.json``: schema version, full config, library version, results.
  Identical (config, seed) give byte-identical files for any thread count.
* ``table.csv`` and ``table.dat``: the result table (CSV with a header row,
  and a whitespace-separated copy with a ``#`` header for gnuplot).
* ``run_meta.json``: wall-clock start time and duration.
* ``error.json`` on failure, with a nonzero exit status.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import io
import json
import math
import os
import sys
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .bubble_sampler import BubbleGrid
from .errors import BubbleLabError, ConfigError

SCHEMA_VERSION = 1
EXPERIMENTS = ("constants", "cr-moments", "surround", "gmc", "haar-check")
FORMULAS = ("auto", "w2", "general")

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_INVALID = 2


@dataclass
class ExperimentConfig:
    experiment: str = "constants"
    gamma: float = math.sqrt(8.0 / 3.0)
    rho_or_w: float = 2.0           # disk weight W; the force point weight is rho = W - 2
    epsilon_ladder: list = field(default_factory=lambda: [0.05])
    n_samples: int = 2000
    inner_walks: int = 256
    dt: float = 4e-3                # relative Loewner capacity step
    seed: int = 0
    output_path: str = "results"
    alphas: list = field(default_factory=list)
    q_imag: float = 0.3
    s: float = 0.25
    alpha: float = 1.5              # gmc bulk insertion
    p: list = field(default_factory=list)
    n_grid: int = 1024
    L: float = 50.0
    formula: str = "auto"
    threads: int = 1

    @property
    def w(self) -> float:
        return self.rho_or_w

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


_ALIASES = {"w": "rho_or_w", "epsilon": "epsilon_ladder", "out": "output_path"}
_FIELDS = {f.name: f for f in dataclasses.fields(ExperimentConfig)}


def _coerce(name: str, text: str):
    f = _FIELDS[name]
    text = text.strip()
    default = f.default_factory() if f.default_factory is not dataclasses.MISSING else f.default
    if isinstance(default, list):
        return [float(t) for t in text.split(",") if t.strip()]
    if isinstance(default, bool):
        return text.lower() in ("1", "true", "yes")
    if isinstance(default, int):
        return int(text)
    if isinstance(default, float):
        return float(text)
    return text


def apply_overrides(cfg: ExperimentConfig, pairs) -> ExperimentConfig:
    for key, value in pairs:
        key = _ALIASES.get(key.strip(), key.strip())
        if key not in _FIELDS:
            raise ConfigError(f"unknown config key {key!r}")
        try:
            setattr(cfg, key, _coerce(key, value))
        except ValueError as exc:
            raise ConfigError(f"bad value for {key}: {value!r}") from exc
    return cfg


def parse_config_text(text: str) -> list:
    """(key, value) pairs from flat ``key = value`` text."""
    pairs = []
    for n, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {n}: expected key = value")
        k, v = line.split("=", 1)
        pairs.append((k.strip(), v.strip()))
    return pairs


def load_config(path: Optional[str], experiment: str, sets=()) -> ExperimentConfig:
    cfg = ExperimentConfig(experiment=experiment)
    if path:
        apply_overrides(cfg, parse_config_text(Path(path).read_text()))
    apply_overrides(cfg, [s.split("=", 1) if "=" in s else (s, "") for s in sets])
    cfg.experiment = experiment
    return cfg


# ---------------------------------------------------------------------------
# validation


def _default_alphas(cfg: ExperimentConfig) -> list:
    from .liouville_constants import LiouvilleParams

    g = cfg.gamma
    if cfg.experiment == "cr-moments" and cfg.w == 2.0:
        return [x * g / 2 for x in (1.5, 1.75, 2.25)] + [g]
    P = LiouvilleParams(g)
    if cfg.w == 2.0:
        lo, hi = max(g / 2, 2 / g), P.Q
    else:
        b = g - 2 * cfg.w / g
        lo, hi = P.Q - b / 2, P.Q
    pts = [lo + (hi - lo) * (k + 0.5) / 11 for k in range(11)]
    return pts + [g]


def resolved(cfg: ExperimentConfig) -> ExperimentConfig:
    """Copy with list defaults filled in; used for both validation and the run."""
    c = dataclasses.replace(cfg, epsilon_ladder=list(cfg.epsilon_ladder), alphas=list(cfg.alphas), p=list(cfg.p))
    if 0 < c.gamma < 2:
        if not c.alphas and c.experiment in ("constants", "cr-moments"):
            c.alphas = _default_alphas(c)
        if not c.p and c.experiment == "gmc":
            Q = 2 / c.gamma + c.gamma / 2
            c.p = [(2 / c.gamma) * (Q - c.alpha)]
    return c


def validate(cfg: ExperimentConfig) -> list:
    """Precondition violations as human-readable strings; empty when runnable."""
    v = []
    if cfg.experiment not in EXPERIMENTS:
        return [f"unknown experiment {cfg.experiment!r}"]
    g = cfg.gamma
    if not (0 < g < 2):
        return [f"gamma must lie in (0, 2), got {g}"]
    cfg = resolved(cfg)
    Q = 2 / g + g / 2
    kappa = g * g
    w = cfg.w
    if cfg.seed < 0:
        v.append("seed must be nonnegative")
    if cfg.threads < 1:
        v.append("threads must be at least 1")
    if cfg.n_samples < 1:
        v.append("n_samples must be positive")
    if cfg.formula not in FORMULAS:
        v.append(f"formula must be one of {FORMULAS}")

    if cfg.experiment in ("constants", "cr-moments"):
        thin = 0 < w < kappa / 2
        if cfg.formula == "general" and not thin:
            v.append(f"thin-regime precondition: the general formula needs 0 < w < gamma^2/2 = {kappa / 2:.6g}, "
                     f"got w={w}")
        elif cfg.formula == "w2" and w != 2.0:
            v.append(f"the w2 formula needs w = 2, got w={w}")
        elif cfg.formula == "auto" and not (w == 2.0 or thin):
            v.append(f"thin-regime precondition: w={w} is neither 2 nor in (0, gamma^2/2)")
        b2 = g - 2 * w / g
        for a in cfg.alphas:
            if a == g:
                continue
            if not a < Q:
                v.append(f"Seiberg bound violated: alpha={a} must be < Q={Q:.6g}")
                continue
            if w == 2.0 and not (g / 2 < a < Q + 2 / g):
                v.append(f"alpha={a} outside (gamma/2, Q + 2/gamma)")
            if thin and not a + b2 / 2 > Q:
                v.append(f"Seiberg bound violated: alpha + beta/2 = {a + b2 / 2:.6g} must exceed Q={Q:.6g} "
                         f"(beta = gamma - 2w/gamma)")
            if cfg.experiment == "cr-moments":
                p = a * (Q - a / 2) - 2
                if abs(p) > 1.5:
                    v.append(f"exponent-variance guard: |2 Delta_alpha - 2| = {abs(p):.4g} > 1.5 at alpha={a}")

    if cfg.experiment in ("cr-moments", "surround"):
        if not w - 2 > -2:
            v.append(f"force point weight rho = w - 2 must exceed -2, got {w - 2}")
        if not cfg.epsilon_ladder or any(not e > 0 for e in cfg.epsilon_ladder):
            v.append("epsilon_ladder must be nonempty with positive entries")
        if not cfg.dt > 0:
            v.append("dt must be positive")
    if cfg.experiment == "cr-moments":
        if cfg.inner_walks < 64:
            v.append("inner_walks must be at least 64")
        if not cfg.q_imag > 0:
            v.append("q_imag must be positive")
    if cfg.experiment == "surround" and not cfg.s > 0:
        v.append("s must be positive")

    if cfg.experiment == "gmc":
        for p in cfg.p:
            if p >= 4 / kappa:
                v.append(f"moment-finiteness: p={p} must be < 4/gamma^2 = {4 / kappa:.6g}")
            if p == 2 and not g < math.sqrt(2):
                v.append("second-moment oracle needs gamma < sqrt(2)")
        if not (1 <= cfg.n_grid <= 4096):
            v.append("n_grid must lie in [1, 4096]")
        if not cfg.L >= 10:
            v.append("L must be at least 10")
    if cfg.experiment == "haar-check" and cfg.n_samples < 1000:
        v.append("haar-check needs at least 1000 draws")
    return v


# ---------------------------------------------------------------------------
# running


def _clean(x):
    """JSON-safe copy: NaN/inf become null, complex becomes [re, im]."""
    if isinstance(x, dict):
        return {str(k): _clean(val) for k, val in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(val) for val in x]
    if isinstance(x, complex):
        return [_clean(x.real), _clean(x.imag)]
    if hasattr(x, "item") and not isinstance(x, (str, bytes)):
        x = x.item()
    if isinstance(x, float) and not math.isfinite(x):
        return None
    return x


def _run_experiment(cfg: ExperimentConfig):
    """(summary dict, table rows) for a validated, resolved config."""
    from . import experiments as ex

    grid = BubbleGrid(dt=cfg.dt)
    if cfg.experiment == "constants":
        rows = ex.constants_table(cfg.gamma, cfg.w, cfg.alphas)
        return {"n_rows": len(rows)}, rows
    if cfg.experiment == "cr-moments":
        rows, summary = [], {"runs": []}
        for k, eps in enumerate(cfg.epsilon_ladder):
            r = ex.cr_moment_experiment(cfg.gamma, cfg.w, eps, cfg.alphas, cfg.n_samples, cfg.q_imag,
                                        cfg.inner_walks, cfg.seed if k == 0 else _sub_seed(cfg.seed, "eps", k),
                                        grid, cfg.threads)
            rows.extend(r.rows())
            summary["runs"].append({"epsilon": eps, "n_accepted": r.n_accepted, "attempts": r.attempts,
                                    "acceptance_rate": r.acceptance_rate})
        if len(cfg.epsilon_ladder) >= 2:
            summary["extrapolated"] = _extrapolate(rows)
        return summary, rows
    if cfg.experiment == "surround":
        rows = []
        for k, eps in enumerate(cfg.epsilon_ladder):
            r = ex.surround_experiment(cfg.gamma, cfg.w, eps, cfg.s, cfg.n_samples,
                                       cfg.seed if k == 0 else _sub_seed(cfg.seed, "eps", k), grid, cfg.threads)
            rows.append({"epsilon": eps, "q1_imag": r.q1.imag, "q2_imag": r.q2.imag, "ratio": r.estimate.value,
                         "ratio_se": r.estimate.std_error, "target": r.target, "z_score": r.z_score,
                         "hits_q1": r.hits[0], "hits_q2": r.hits[1], "n_bubbles": cfg.n_samples})
        return {"n_rows": len(rows)}, rows
    if cfg.experiment == "gmc":
        rows = [r.as_dict() for r in ex.gmc_experiment(cfg.gamma, cfg.alpha, cfg.p, cfg.n_samples, cfg.seed,
                                                       cfg.n_grid, cfg.L)]
        return {"n_rows": len(rows)}, rows
    if cfg.experiment == "haar-check":
        r = ex.haar_experiment(cfg.n_samples, cfg.seed)
        row = {"chi2": r.chi2, "dof": r.dof, "p_value": r.p_value, "n_in_region": r.n_in_region,
               "n_draws": r.n_draws, "passed": int(r.passed)}
        return {"passed": r.passed}, [row]
    raise ConfigError(f"unknown experiment {cfg.experiment!r}")


def _extrapolate(rows: list) -> list:
    """Per alpha, the eps -> 0 intercept of a weighted linear fit of mc_value against epsilon."""
    out = []
    for a in sorted({r["alpha"] for r in rows}):
        rs = [r for r in rows if r["alpha"] == a]
        eps = np.array([r["epsilon"] for r in rs])
        y = np.array([r["mc_value"] for r in rs])
        se = np.array([r["mc_se"] for r in rs])
        if np.all(se == 0):
            out.append({"alpha": a, "value": float(y[0]), "std_error": 0.0})
            continue
        X = np.column_stack([np.ones_like(eps), eps])
        wts = 1.0 / np.maximum(se, 1e-300) ** 2
        cov = np.linalg.inv(X.T @ (wts[:, None] * X))
        coef = cov @ X.T @ (wts * y)
        out.append({"alpha": a, "value": float(coef[0]), "std_error": float(math.sqrt(cov[0, 0])),
                    "slope": float(coef[1])})
    return out


def _sub_seed(seed, tag, k):
    from .loewner_sle import derive_seed

    return derive_seed(seed, tag, k)


def _atomic_write(path: Path, data: str) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix="." + path.name + ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as f:
            f.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _table_text(rows: list, sep: str, header_prefix: str = "") -> str:
    if not rows:
        return ""
    cols = list(rows[0].keys())
    for r in rows[1:]:
        cols += [c for c in r if c not in cols]
    buf = io.StringIO()
    if sep == ",":
        wr = csv.writer(buf, lineterminator="\n")
        wr.writerow(cols)
        for r in rows:
            wr.writerow([_fmt(r.get(c)) for c in cols])
    else:
        buf.write(header_prefix + sep.join(cols) + "\n")
        for r in rows:
            buf.write(sep.join(_fmt(r.get(c)) for c in cols) + "\n")
    return buf.getvalue()


def _fmt(x) -> str:
    if x is None:
        return "nan"
    if isinstance(x, bool):
        return str(int(x))
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _dump(obj) -> str:
    return json.dumps(_clean(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"


def run(cfg: ExperimentConfig) -> int:
    """Validate, run and write outputs; returns the process exit status."""
    out = Path(cfg.output_path)
    out.mkdir(parents=True, exist_ok=True)
    start = time.time()
    violations = validate(cfg)
    if violations:
        _write_error(out, cfg, "ConfigError", "invalid configuration", violations)
        return EXIT_INVALID
    rc = resolved(cfg)
    try:
        summary, rows = _run_experiment(rc)
    except BubbleLabError as exc:
        _write_error(out, rc, type(exc).__name__, str(exc), [])
        return EXIT_RUNTIME
    config = rc.to_dict()
    # output location and thread count do not change results
    config.pop("output_path")
    config.pop("threads")
    doc = {"schema_version": SCHEMA_VERSION, "experiment": rc.experiment, "library_version": __version__,
           "config": config, "summary": summary, "rows": rows}
    _atomic_write(out / "results.json", _dump(doc))
    _atomic_write(out / "table.csv", _table_text(_clean(rows), ","))
    _atomic_write(out / "table.dat", _table_text(_clean(rows), " ", "# "))
    meta = {"schema_version": SCHEMA_VERSION, "library_version": __version__, "config": rc.to_dict(),
            "started_unix": start, "started_utc": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime(start)),
            "wall_clock_seconds": time.time() - start}
    _atomic_write(out / "run_meta.json", _dump(meta))
    return EXIT_OK


def _write_error(out: Path, cfg: ExperimentConfig, kind: str, message: str, violations: list) -> None:
    report = {"schema_version": SCHEMA_VERSION, "status": "error", "error_type": kind, "message": message,
              "violations": violations, "config": cfg.to_dict(), "library_version": __version__}
    text = _dump(report)
    _atomic_write(out / "error.json", text)
    sys.stderr.write(text)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="bubblelab", description="Bubble and boundary Liouville experiments")
    ap.add_argument("experiment", choices=EXPERIMENTS)
    ap.add_argument("--config", help="flat key = value config file")
    ap.add_argument("--seed", type=int)
    ap.add_argument("--out", help="output directory")
    ap.add_argument("--threads", type=int)
    ap.add_argument("--set", dest="sets", action="append", default=[], metavar="KEY=VALUE",
                    help="override one config key (repeatable)")
    ap.add_argument("--dry-run", action="store_true", help="only validate and print violations")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config, args.experiment, args.sets)
    except (ConfigError, OSError) as exc:
        sys.stderr.write(_dump({"status": "error", "error_type": type(exc).__name__, "message": str(exc)}))
        return EXIT_INVALID
    if args.seed is not None:
        cfg.seed = args.seed
    if args.out is not None:
        cfg.output_path = args.out
    if args.threads is not None:
        cfg.threads = args.threads
    if args.dry_run:
        v = validate(cfg)
        sys.stdout.write(_dump({"violations": v}))
        return EXIT_INVALID if v else EXIT_OK
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
