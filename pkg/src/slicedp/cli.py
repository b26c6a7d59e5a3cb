"""Command line front end.

Runs the interior-point solver, the learners, and the quasi-concave optimizer
on file datasets, plus the audit suites and parameter sweeps. Every command
takes a mandatory seed and emits a versioned JSON record; records are
byte-identical across runs up to the wall_clock_sec field.
"""

import argparse
import csv
import json
import math
import sys
import time
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from .engine import (Dataset, SliceComputation, ascending_map, holder_call_cap,
                     privacy_cost)
from .learners import (LabeledSample, learn_rectangles, learn_threshold_realizable,
                       load_labeled_csv, threshold_sample_size)
from .quasiconcave import load_qc_csv, qc_optimize
from .sync import (audit_call_count, direct_run, estimate_tv, simulate,
                   sync_gamma, sync_map_exact_dist)
from .treelog import (RegimeError, Universe, ipp, log_star, regime_threshold,
                      trim_parameter)

SCHEMA_VERSION = 1


@dataclass
class RunConfig:
    """Validated common parameters of a CLI invocation."""

    command: str
    seed: int
    epsilon: float = 1.0
    delta: float = 1e-3
    input_path: Optional[str] = None
    output_path: Optional[str] = None
    trials: int = 1
    bits: int = 32
    extras: dict = field(default_factory=dict)

    def __post_init__(self):
        if not (0 <= self.seed < (1 << 64)):
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if not (self.epsilon >= 0 and math.isfinite(self.epsilon)):
            raise ValueError(f"epsilon must be finite and nonnegative, got {self.epsilon}")
        if not (0.0 <= self.delta < 1.0):
            raise ValueError(f"delta must lie in [0, 1), got {self.delta}")
        if self.trials < 1:
            raise ValueError(f"trials must be at least 1, got {self.trials}")
        if not (1 <= self.bits <= 64):
            raise ValueError(f"bits must lie in [1, 64], got {self.bits}")


def load_dataset(path, bit_length: int) -> Dataset:
    """Newline-delimited unsigned decimal integers; blank lines are skipped."""
    values = []
    limit = 1 << bit_length
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.strip()
            if not text:
                continue
            try:
                value = int(text)
            except ValueError:
                raise ValueError(f"{path}: line {lineno}: not an integer: {text!r}")
            if value < 0:
                raise ValueError(f"{path}: line {lineno}: negative value {value}")
            if value >= limit:
                raise ValueError(
                    f"{path}: line {lineno}: value {value} out of range for "
                    f"{bit_length}-bit domain (must be < {limit})")
            values.append(value)
    return Dataset(np.asarray(values, dtype=np.uint64), bit_length)


def _record(config: RunConfig, parameters: dict, payload, success: bool,
            started: float) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "command": config.command,
        "parameters": parameters,
        "payload": payload,
        "success": bool(success),
        "wall_clock_sec": round(time.monotonic() - started, 6),
    }


def _emit(record: dict, output_path: Optional[str]) -> None:
    text = json.dumps(record, sort_keys=True, indent=2) + "\n"
    if output_path:
        with open(output_path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _trial_rng(seed: int, *path: int) -> np.random.Generator:
    # counter-based stream derivation: same (seed, path) always gives the
    # same stream, independent of evaluation order
    return np.random.default_rng([seed, *path])


# ---------------------------------------------------------------------------
# command implementations, each returning (parameters, payload, success)

def _cmd_ipp(config: RunConfig):
    data = load_dataset(config.input_path, config.bits)
    universe = Universe(config.bits)
    t = trim_parameter(config.epsilon, config.delta)
    ls = log_star(universe.size)
    required = regime_threshold(universe, config.epsilon, config.delta)
    cost = privacy_cost(config.epsilon, config.delta, tau=3, k=1,
                        delta_hat=config.delta)
    parameters = {
        "epsilon": config.epsilon, "delta": config.delta, "bits": config.bits,
        "seed": config.seed, "t": t, "log_star": ls, "n": len(data),
        "required_n": required,
        "regime_inequality": f"n = {len(data)} >= 10 * t * log*|X| = {required}",
        "accounting": {"epsilon_total": cost.epsilon, "delta_total": cost.delta,
                       "holder_call_cap": holder_call_cap(config.delta)},
    }
    rng = _trial_rng(config.seed, 0)
    value = ipp(universe, data, config.epsilon, config.delta, rng)
    lo, hi = int(data.elements.min()), int(data.elements.max())
    payload = {"value": int(value), "interior": bool(lo <= int(value) <= hi)}
    return parameters, payload, True


def _cmd_learn_threshold(config: RunConfig):
    sample = load_labeled_csv(config.input_path, config.bits)
    xi, beta = config.extras["xi"], config.extras["beta"]
    if not (0.0 < xi < 1.0 and 0.0 < beta < 1.0):
        raise ValueError("xi and beta must lie in (0, 1)")
    required = threshold_sample_size(sample.universe, xi, beta,
                                     config.epsilon, config.delta)
    parameters = {
        "epsilon": config.epsilon, "delta": config.delta, "bits": config.bits,
        "seed": config.seed, "xi": xi, "beta": beta, "n": len(sample),
        "required_n": required,
        "regime_inequality": f"n = {len(sample)} >= {required}",
    }
    rng = _trial_rng(config.seed, 0)
    hypothesis = learn_threshold_realizable(sample, xi, beta, config.epsilon,
                                            config.delta, rng)
    errors = int(np.sum(hypothesis.predict(sample.points) != sample.labels))
    payload = {"threshold": int(hypothesis.threshold),
               "empirical_error": errors / max(len(sample), 1)}
    return parameters, payload, True


def _cmd_learn_rect(config: RunConfig):
    sample = load_labeled_csv(config.input_path, config.bits)
    points = sample.points if sample.points.ndim == 2 else \
        sample.points.reshape(-1, 1)
    dims = config.extras.get("dims") or points.shape[1]
    if dims != points.shape[1]:
        raise ValueError(f"--dims {dims} does not match file width {points.shape[1]}")
    parameters = {
        "epsilon": config.epsilon, "delta": config.delta, "bits": config.bits,
        "seed": config.seed, "dims": dims, "n": len(sample),
        "positives": int(sample.labels.sum()),
    }
    rng = _trial_rng(config.seed, 0)
    hypothesis = learn_rectangles(sample, config.epsilon, config.delta, rng)
    errors = int(np.sum(hypothesis.predict(points) != sample.labels))
    payload = {
        "form": "zero" if hypothesis.zero else "rectangle",
        "intervals": None if hypothesis.zero else
            [[int(a), int(b)] for a, b in hypothesis.rectangle],
        "empirical_error": errors / max(len(sample), 1),
    }
    return parameters, payload, True


def _cmd_qc_opt(config: RunConfig):
    instance = load_qc_csv(config.input_path)
    constant_c = config.extras["constant_c"]
    parameters = {
        "epsilon": config.epsilon, "delta": config.delta, "seed": config.seed,
        "constant_c": constant_c, "domain_size": instance.size,
    }
    rng = _trial_rng(config.seed, 0)
    result = qc_optimize(instance, config.epsilon, config.delta, rng, constant_c)
    payload = {"solution": result.solution, "score": result.score,
               "opt_estimate": result.opt_estimate,
               "error_bound": result.error_bound, "branch": result.branch}
    return parameters, payload, True


def _cmd_audit_sync(config: RunConfig):
    epsilon = config.epsilon
    gamma_value = sync_gamma(epsilon)
    cutoff = config.extras.get("cutoff") or max(gamma_value + 1, 12)
    dist0 = sync_map_exact_dist(0, epsilon, cutoff)
    dist1 = sync_map_exact_dist(1, epsilon, cutoff)
    p0 = dict(dist0.outcomes)
    p1 = dict(dist1.outcomes)
    lo, hi = math.exp(-epsilon) - 1e-9, math.exp(epsilon) + 1e-9

    outcomes = []
    ratio_ok = True
    for key in sorted(set(p0) | set(p1)):
        a, b = p0.get(key, 0.0), p1.get(key, 0.0)
        if a > 0.0 or b > 0.0:
            if a <= 0.0 or b <= 0.0 or not (lo <= a / b <= hi):
                ratio_ok = False
        outcomes.append({"alpha": key[0], "beta": key[1], "p0": a, "p1": b})
    mass_ok = abs(sum(p0.values()) + dist0.tail - 1.0) <= 1e-12 and \
        abs(sum(p1.values()) + dist1.tail - 1.0) <= 1e-12
    sync0 = 1.0 - sum(p for (alpha, beta), p in p0.items() if beta == 0)
    sync1 = 1.0 - sum(p for (alpha, beta), p in p1.items() if beta == 0)
    sync_ok = min(sync0, sync1) >= 1.0 / 6.0 - 1e-12
    support_ok = all(k[0] >= 0 and k[1] in (0, 1) for k in set(p0) | set(p1))

    parameters = {"epsilon": epsilon, "seed": config.seed, "gamma": gamma_value,
                  "cutoff": cutoff}
    payload = {
        "outcomes": outcomes,
        "tails": {"b0": dist0.tail, "b1": dist1.tail},
        "sync_probability": {"b0": sync0, "b1": sync1},
        "checks": {"support_ok": support_ok, "ratio_ok": ratio_ok,
                   "mass_ok": mass_ok, "sync_ok": sync_ok},
    }
    return parameters, payload, support_ok and ratio_ok and mass_ok and sync_ok


def _audit_instance(size: int):
    # adversarial instance: the diff element x = 0 sorts first under the
    # ascending order, so every round involves it until the holder syncs
    data = list(range(1, size + 1))
    algorithm = lambda s: int(s.min()) if len(s) else -1
    return data, 0, algorithm


def _cmd_audit_sim(config: RunConfig):
    steps = config.extras["tau"]
    size = config.extras["size"]
    epsilon = config.epsilon
    data, x, algorithm = _audit_instance(size)
    script = [SliceComputation(1, algorithm, ascending_map()) for _ in range(steps)]

    counts = np.empty(config.trials, dtype=np.int64)
    sim_outputs = []
    direct_outputs = []
    for trial in range(config.trials):
        transcript = simulate(data, x, 1, script, epsilon,
                              _trial_rng(config.seed, 2, trial))
        counts[trial] = transcript.holder_calls
        sim_outputs.append(tuple(
            simulate(data, x, 0, script, epsilon,
                     _trial_rng(config.seed, 0, trial)).published))
        direct_outputs.append(tuple(
            direct_run(data, script, epsilon, _trial_rng(config.seed, 1, trial))))

    tv = estimate_tv(sim_outputs, direct_outputs)
    histogram = {}
    for c in counts.tolist():
        histogram[c] = histogram.get(c, 0) + 1
    tail = []
    tail_ok = True
    for w in range(1, 16):
        prob = float(np.mean(counts > w))
        bound = (5.0 / 6.0) ** w
        se = math.sqrt(max(bound * (1 - bound), 1e-12) / config.trials)
        ok = prob <= bound + 3.0 * se
        tail_ok = tail_ok and ok
        tail.append({"w": w, "prob": prob, "bound": bound, "within": ok})

    parameters = {"epsilon": epsilon, "seed": config.seed, "trials": config.trials,
                  "tau": steps, "size": size}
    payload = {
        "epsilon": epsilon,
        "trials": config.trials,
        "histogram": [{"calls": int(c), "frequency": int(f)}
                      for c, f in sorted(histogram.items())],
        "tv_estimate": tv,
        "mean_calls": float(counts.mean()),
        "tail": tail,
    }
    return parameters, payload, tail_ok


def sweep_minimal_n(bits: int, epsilon: float, delta: float, trials: int,
                    seed: int, target: float = 0.9) -> int:
    """Smallest n at which the solver hits `target` success over `trials`
    on the all-equal instance (unique interior point), by bisection.

    Trials share random streams across candidate sizes, so reruns with the
    same seed bisect identically.
    """
    universe = Universe(bits)
    ceiling = regime_threshold(universe, epsilon, delta)
    point = universe.size // 2
    allowed = math.floor((1.0 - target) * trials)

    def meets(n: int) -> bool:
        data = np.full(n, point, dtype=np.uint64)
        failures = 0
        for trial in range(trials):
            rng = _trial_rng(seed, trial)
            try:
                out = ipp(universe, data, epsilon, delta, rng, enforce_regime=False)
            except ValueError:
                out = -1
            if out != point:
                failures += 1
                if failures > allowed:
                    return False
        return True

    if not meets(ceiling):
        return -1
    lo, hi = 1, ceiling
    while lo < hi:
        mid = (lo + hi) // 2
        if meets(mid):
            hi = mid
        else:
            lo = mid + 1
    return lo


def _cmd_sweep(config: RunConfig):
    bits_list = config.extras["bits_list"]
    rows = []
    for bits in bits_list:
        universe = Universe(bits)
        minimal = sweep_minimal_n(bits, config.epsilon, config.delta,
                                  config.trials, config.seed)
        rows.append({"L": bits, "log_star": log_star(universe.size),
                     "minimal_n": minimal})
    # the JSON record occupies output_path itself, so the table goes beside it
    csv_path = config.output_path + ".csv" if config.output_path else None
    if csv_path:
        with open(csv_path, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=["L", "log_star", "minimal_n"])
            writer.writeheader()
            writer.writerows(rows)
    parameters = {"epsilon": config.epsilon, "delta": config.delta,
                  "seed": config.seed, "trials": config.trials,
                  "bits_list": list(bits_list)}
    payload = {"rows": rows, "csv_path": csv_path}
    success = all(row["minimal_n"] > 0 for row in rows)
    return parameters, payload, success


def _cmd_account(config: RunConfig):
    tau = config.extras["tau"]
    k = config.extras["k"]
    delta_hat = config.extras["delta_hat"]
    applications = config.extras["applications"]
    cost = privacy_cost(config.epsilon, config.delta, tau, k, delta_hat,
                        applications)
    cap = holder_call_cap(delta_hat)
    parameters = {"epsilon_step": config.epsilon, "delta_step": config.delta,
                  "tau": tau, "k": k, "delta_hat": delta_hat,
                  "applications": applications, "seed": config.seed}
    payload = {
        "epsilon_total": cost.epsilon,
        "delta_total": cost.delta,
        "holder_call_cap": cap,
        "epsilon_formula": "3 * eps * max(applications, w) + 2 * k * eps",
        "delta_formula": "delta_hat + 2 * k * tau * delta",
    }
    table = [
        ("per-step epsilon", config.epsilon),
        ("per-step delta", config.delta),
        ("slices tau", tau),
        ("delayed computes k", k),
        ("holder call cap w", cap),
        ("total epsilon", cost.epsilon),
        ("total delta", cost.delta),
    ]
    width = max(len(name) for name, _ in table)
    for name, value in table:
        print(f"{name:<{width}}  {value}")
    return parameters, payload, True


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="slicedp",
        description="Differentially private interior points, learners, and audits "
                    "over reorder-slice-compute sessions.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, input_required=False, epsilon=1.0, delta=1e-3):
        p.add_argument("--seed", type=int, required=True,
                       help="64-bit RNG seed (mandatory for reproducibility)")
        p.add_argument("--epsilon", type=float, default=epsilon)
        p.add_argument("--delta", type=float, default=delta)
        p.add_argument("--output", help="write the JSON record here instead of stdout")
        if input_required:
            p.add_argument("--input", required=True, help="input dataset path")

    p = sub.add_parser("ipp", help="interior point of a file of integers")
    common(p, input_required=True)
    p.add_argument("--bits", type=int, default=32)

    p = sub.add_parser("learn-threshold", help="realizable threshold learner")
    common(p, input_required=True)
    p.add_argument("--bits", type=int, default=32)
    p.add_argument("--xi", type=float, default=0.1)
    p.add_argument("--beta", type=float, default=0.1)

    p = sub.add_parser("learn-rect", help="axis-aligned rectangle learner")
    common(p, input_required=True)
    p.add_argument("--bits", type=int, default=16)
    p.add_argument("--dims", type=int, default=None)

    p = sub.add_parser("qc-opt", help="quasi-concave optimizer on a score CSV")
    common(p, input_required=True, epsilon=4.0, delta=0.25)
    p.add_argument("--constant-c", type=int, default=4, dest="constant_c")

    p = sub.add_parser("audit-sync", help="exact synchronization-map checks")
    common(p, epsilon=0.5)
    p.add_argument("--cutoff", type=int, default=None)

    p = sub.add_parser("audit-sim", help="simulator faithfulness and call counts")
    common(p, epsilon=0.5)
    p.add_argument("--trials", type=int, default=10000)
    p.add_argument("--tau", type=int, default=2, help="script length")
    p.add_argument("--size", type=int, default=8, help="instance size")

    p = sub.add_parser("sweep", help="minimal sample size per domain bit length")
    common(p)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--bits", type=int, nargs="+", default=[8, 16, 32, 64],
                   dest="bits_list")

    p = sub.add_parser("account", help="explicit privacy accounting report")
    common(p, epsilon=0.1)
    p.add_argument("--tau", type=int, required=True)
    p.add_argument("--k", type=int, default=1)
    p.add_argument("--delta-hat", type=float, default=1e-6, dest="delta_hat")
    p.add_argument("--applications", type=int, default=1)

    return parser


_HANDLERS = {
    "ipp": _cmd_ipp,
    "learn-threshold": _cmd_learn_threshold,
    "learn-rect": _cmd_learn_rect,
    "qc-opt": _cmd_qc_opt,
    "audit-sync": _cmd_audit_sync,
    "audit-sim": _cmd_audit_sim,
    "sweep": _cmd_sweep,
    "account": _cmd_account,
}


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    extras = {}
    for name in ("xi", "beta", "dims", "constant_c", "cutoff", "tau", "size",
                 "k", "delta_hat", "applications", "bits_list"):
        if hasattr(args, name):
            extras[name] = getattr(args, name)
    return RunConfig(
        command=args.command,
        seed=args.seed,
        epsilon=args.epsilon,
        delta=args.delta,
        input_path=getattr(args, "input", None),
        output_path=args.output,
        trials=getattr(args, "trials", 1),
        bits=getattr(args, "bits", 32) if args.command != "sweep" else 32,
        extras=extras,
    )


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    started = time.monotonic()
    try:
        config = _config_from_args(args)
        parameters, payload, success = _HANDLERS[config.command](config)
        record = _record(config, parameters, payload, success, started)
    except (ValueError, OSError, KeyError) as exc:
        payload = {"error": str(exc)}
        if isinstance(exc, RegimeError):
            payload["required"] = exc.required
            payload["provided"] = exc.provided
            payload["violated_inequality"] = f"n = {exc.provided} < {exc.required}"
        record = {
            "schema_version": SCHEMA_VERSION,
            "command": getattr(args, "command", None),
            "parameters": {"seed": getattr(args, "seed", None)},
            "payload": payload,
            "success": False,
            "wall_clock_sec": round(time.monotonic() - started, 6),
        }
        _emit(record, getattr(args, "output", None))
        return 1
    _emit(record, config.output_path)
    return 0 if record["success"] else 1


if __name__ == "__main__":
    sys.exit(main())
