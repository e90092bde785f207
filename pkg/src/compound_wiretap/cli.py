"""Command-line front end.

Every command writes one artifact (a JSON report, or a CSV table for
``sweep``) to ``--out`` or standard output. Failures print a JSON error object
on standard error and exit with 2 (unparseable input), 3 (invalid input or a
violated precondition such as ``r1 > r2``) or 4 (numerical non-convergence).
``verify-saddle`` exits 1 when a saddle inequality is violated.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass

import numpy as np

from . import dmc, matops, secrecy, serialize
from .errors import ConvergenceError, InputFormatError, ValidationError, WiretapError
from .uncertainty import (
    EavesdropperUncertainty,
    LegitimateUncertainty,
    capacity_double_rank,
    capacity_double_sided,
    capacity_rank_constrained,
)
from .verify import SaddleScenario, verify_saddle

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_PARSE = 2
EXIT_VALIDATION = 3
EXIT_CONVERGENCE = 4

COMMANDS = ("capacity", "worst-case", "verify-saddle", "sweep", "dmc-rate", "dmc-quantize", "dmc-order")
STOCHASTIC = ("verify-saddle", "dmc-quantize", "dmc-order")
LN2 = math.log(2.0)
SEED_MAX = 2**64 - 1


class _ArgParser(argparse.ArgumentParser):
    def error(self, message):
        raise InputFormatError(message)


@dataclass(frozen=True)
class JobConfig:
    """Validated command-line job."""

    command: str
    channel: str | None
    eaves_bounds: tuple[float, ...]
    eaves_bound_kind: str | None
    legit_bound: float | None
    powers: tuple[float, ...]
    rank_bound: int | None
    samples: int
    seed: int | None
    grid_step: float
    levels: int | None
    out: str | None
    bits: bool

    @property
    def units(self) -> str:
        return "bits" if self.bits else "nats"

    def scale(self, x: float) -> float:
        return x / LN2 if self.bits else x


def build_parser() -> argparse.ArgumentParser:
    p = _ArgParser(prog="compound-wiretap", description="Compound wiretap secrecy capacity toolkit.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--channel", help="channel JSON file (Gram/channel matrix or DMC family)")
    p.add_argument("--eaves-bound", help="eavesdropper gain bound; comma list for sweep")
    p.add_argument("--eaves-bound-kind", choices=("power", "voltage"))
    p.add_argument("--legit-bound", type=float, help="spectral-norm bound on the legitimate perturbation")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--power", type=float, help="total transmit power")
    g.add_argument("--power-range", help="lo:hi:npoints, log-spaced")
    p.add_argument("--rank-bound", type=int)
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--seed", type=int)
    p.add_argument("--grid-step", type=float, default=1e-3)
    p.add_argument("--levels", type=int, help="quantization levels L")
    p.add_argument("--out")
    p.add_argument("--bits", action="store_true", help="report rates in bits instead of nats")
    return p


def _float_list(text: str, flag: str) -> tuple[float, ...]:
    try:
        vals = tuple(float(t) for t in text.split(","))
    except ValueError:
        raise InputFormatError(f"{flag}: expected a comma-separated list of numbers, got {text!r}") from None
    return vals


def _power_range(text: str) -> tuple[float, ...]:
    parts = text.split(":")
    try:
        if len(parts) != 3:
            raise ValueError
        lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise InputFormatError(f"--power-range: expected lo:hi:npoints, got {text!r}") from None
    if not (0 < lo <= hi) or n < 1 or not math.isfinite(hi):
        raise ValidationError(f"--power-range needs 0 < lo <= hi and npoints >= 1, got {text!r}")
    if n == 1:
        return (lo,)
    pts = np.logspace(math.log10(lo), math.log10(hi), n)
    pts[0], pts[-1] = lo, hi
    return tuple(float(x) for x in pts)


def parse_args(argv) -> JobConfig:
    ns = build_parser().parse_args(argv)
    cmd = ns.command
    eps: tuple[float, ...] = ()
    if ns.eaves_bound is not None:
        eps = _float_list(ns.eaves_bound, "--eaves-bound")
        if ns.eaves_bound_kind is None:
            raise InputFormatError("--eaves-bound-kind power|voltage is required whenever --eaves-bound is given")
        if len(eps) > 1 and cmd != "sweep":
            raise InputFormatError("only sweep accepts a list of eavesdropper bounds")
    powers: tuple[float, ...] = ()
    if ns.power is not None:
        powers = (ns.power,)
    elif ns.power_range is not None:
        if cmd != "sweep":
            raise InputFormatError("--power-range is only valid for sweep")
        powers = _power_range(ns.power_range)

    if ns.channel is None:
        raise InputFormatError(f"{cmd} needs --channel")
    if cmd in ("capacity", "worst-case", "verify-saddle", "sweep"):
        if not eps:
            raise InputFormatError(f"{cmd} needs --eaves-bound")
        if not powers:
            raise InputFormatError(f"{cmd} needs --power" + (" or --power-range" if cmd == "sweep" else ""))
    if cmd == "dmc-quantize" and ns.levels is None:
        raise InputFormatError("dmc-quantize needs --levels")
    if cmd in STOCHASTIC and ns.seed is None:
        raise InputFormatError(f"{cmd} is stochastic and needs --seed")

    for name, v in (("--eaves-bound", min(eps, default=0.0)), ("--legit-bound", ns.legit_bound),
                    ("--power", min(powers, default=0.0))):
        if v is not None and not (math.isfinite(v) and v >= 0):
            raise ValidationError(f"{name} must be finite and nonnegative, got {v}")
    if ns.samples < 0:
        raise ValidationError(f"--samples must be nonnegative, got {ns.samples}")
    if ns.seed is not None and not 0 <= ns.seed <= SEED_MAX:
        raise ValidationError(f"--seed must be an unsigned 64-bit integer, got {ns.seed}")
    if ns.rank_bound is not None and ns.rank_bound < 1:
        raise ValidationError(f"--rank-bound must be >= 1, got {ns.rank_bound}")
    if not (0 < ns.grid_step <= 1):
        raise ValidationError(f"--grid-step must lie in (0, 1], got {ns.grid_step}")
    if ns.levels is not None and ns.levels < 1:
        raise ValidationError(f"--levels must be positive, got {ns.levels}")
    return JobConfig(
        command=cmd,
        channel=ns.channel,
        eaves_bounds=eps,
        eaves_bound_kind=ns.eaves_bound_kind,
        legit_bound=ns.legit_bound,
        powers=powers,
        rank_bound=ns.rank_bound,
        samples=ns.samples,
        seed=ns.seed,
        grid_step=ns.grid_step,
        levels=ns.levels,
        out=ns.out,
        bits=ns.bits,
    )


# ---------------------------------------------------------------- MIMO commands


@dataclass(frozen=True)
class _Model:
    kind: str
    W1: np.ndarray | None
    legit: LegitimateUncertainty | None


def _load_mimo(cfg: JobConfig) -> _Model:
    kind, M = serialize.parse_channel_file(cfg.channel)
    if kind == "family":
        raise ValidationError(f"{cfg.command} needs a MIMO channel file, got a DMC family")
    if cfg.legit_bound is not None:
        # a Gram input stands for its PSD square root as the nominal channel
        H0 = M if kind == "channel" else matops.psd_sqrt(M)
        return _Model("double_rank" if cfg.rank_bound is not None else "double_sided", None,
                      LegitimateUncertainty(H0, cfg.legit_bound))
    W1 = matops.gram(M) if kind == "channel" else M
    return _Model("rank_constrained" if cfg.rank_bound is not None else "isotropic", W1, None)


def _eaves(cfg: JobConfig, eps: float) -> EavesdropperUncertainty:
    if cfg.eaves_bound_kind == "voltage":
        return EavesdropperUncertainty.from_voltage(eps, cfg.rank_bound)
    return EavesdropperUncertainty.from_power(eps, cfg.rank_bound)


def _solve(model: _Model, eaves: EavesdropperUncertainty, P_T: float, seed: int | None):
    if model.kind == "isotropic":
        return secrecy.capacity_isotropic(model.W1, eaves.eps_power, P_T)
    if model.kind == "rank_constrained":
        return capacity_rank_constrained(model.W1, eaves, P_T)
    if model.kind == "double_sided":
        return capacity_double_sided(model.legit, eaves, P_T)
    return capacity_double_rank(model.legit, eaves, P_T, rng=np.random.default_rng(0 if seed is None else seed))


def _parameters(cfg: JobConfig, model: _Model, eaves: EavesdropperUncertainty) -> dict:
    return {
        "scenario": model.kind,
        "eaves_bound": cfg.eaves_bounds[0],
        "eaves_bound_kind": cfg.eaves_bound_kind,
        "eps_power": eaves.eps_power,
        "legit_bound": cfg.legit_bound,
        "rank_bound": cfg.rank_bound,
        "p_total": cfg.powers[0],
    }


def _worst_case_block(rep) -> dict:
    return {
        "eaves_gram": rep.worst_eaves,
        "eaves_channel": rep.worst_eaves_channel,
        "legit_gram": rep.worst_legit,
        "legit_channel": rep.worst_legit_channel,
    }


def _beamforming(rep) -> bool | None:
    if rep.gains[0] <= rep.epsilon:
        return None
    return secrecy.beamforming_optimal(rep.gains, rep.epsilon, rep.allocation.total)


def cmd_capacity(cfg: JobConfig) -> tuple[dict, int]:
    model = _load_mimo(cfg)
    eaves = _eaves(cfg, cfg.eaves_bounds[0])
    rep = _solve(model, eaves, cfg.powers[0], cfg.seed)
    report = {
        "command": cfg.command,
        "units": cfg.units,
        "parameters": _parameters(cfg, model, eaves),
        "capacity": cfg.scale(rep.capacity),
        "high_snr_asymptote": cfg.scale(rep.high_snr_asymptote),
        "gains": rep.gains,
        "active_modes": rep.active_count,
        "beamforming_optimal": _beamforming(rep),
        "allocation": {
            "powers": rep.allocation.powers,
            "water_level": rep.allocation.water_level,
            "active_set": list(rep.allocation.active_set),
            "total": rep.allocation.total,
        },
        "optimal_covariance": rep.optimal_covariance,
        "worst_case": _worst_case_block(rep),
        "diagnostics": rep.diagnostics,
    }
    if cfg.command == "worst-case":
        report = {k: report[k] for k in ("command", "units", "parameters", "capacity", "optimal_covariance", "worst_case")}
    return report, EXIT_OK


def cmd_verify_saddle(cfg: JobConfig) -> tuple[dict, int]:
    model = _load_mimo(cfg)
    eaves = _eaves(cfg, cfg.eaves_bounds[0])
    scen = SaddleScenario(model.kind, eaves, W1=model.W1, legit=model.legit)
    rep = verify_saddle(scen, cfg.powers[0], cfg.samples, cfg.seed)
    report = {
        "command": cfg.command,
        "units": cfg.units,
        "parameters": dict(_parameters(cfg, model, eaves), samples=cfg.samples, seed=cfg.seed),
        "capacity": cfg.scale(rep.capacity),
        "max_left_violation": cfg.scale(rep.max_left_violation),
        "max_right_violation": cfg.scale(rep.max_right_violation),
        "tolerance": rep.tolerance,
        "passed": rep.passed,
        "weak_equals_strong": rep.weak_equals_strong,
        "corner_cases": rep.corner_cases,
        "equality_draws": rep.equality_draws,
        "equality_gap": None if rep.equality_gap is None else cfg.scale(rep.equality_gap),
    }
    return report, EXIT_OK if rep.passed else EXIT_CHECK_FAILED


def sweep_rows(cfg: JobConfig) -> list[tuple]:
    model = _load_mimo(cfg)
    rows = []
    for eps in cfg.eaves_bounds:
        eaves = _eaves(cfg, eps)
        for P in cfg.powers:
            rep = _solve(model, eaves, P, cfg.seed)
            rows.append((P, eps, cfg.scale(rep.capacity), rep.active_count, rep.allocation.water_level))
    rows.sort(key=lambda r: (r[1], r[0]))
    return rows


def sweep_header(bits: bool) -> list[str]:
    return ["p_total", "epsilon", "capacity_bits" if bits else "capacity_nats", "active_modes", "water_level"]


# ---------------------------------------------------------------- DMC commands


def _load_family(cfg: JobConfig) -> dmc.CompoundDMCFamily:
    kind, fam = serialize.parse_channel_file(cfg.channel)
    if kind != "family":
        raise ValidationError(f"{cfg.command} needs a DMC family file with a 'states' list")
    return fam


def cmd_dmc_rate(cfg: JobConfig) -> tuple[dict, int]:
    fam = _load_family(cfg)
    rate, p = dmc.compound_rate_lower_bound(fam, cfg.grid_step)
    return {
        "command": cfg.command,
        "units": cfg.units,
        "parameters": {"grid_step": cfg.grid_step, "states": len(fam.states)},
        "rate": cfg.scale(rate),
        "input_distribution": p,
    }, EXIT_OK


def _check_dict(rep: dmc.QuantizationReport) -> dict:
    return {
        c.name: {"holds": c.holds, "worst_margin": c.worst_margin, "violations": [list(v) for v in c.violations]}
        for c in rep.checks
    }


def cmd_dmc_quantize(cfg: JobConfig) -> tuple[dict, int]:
    fam = _load_family(cfg)
    _, y, z = fam.sizes
    L = cfg.levels
    states = []
    quantized = []
    for s, (W, V) in enumerate(fam.states):
        Wq = dmc.quantize_channel(W, L, other_out_size=z)
        Vq = dmc.quantize_channel(V, L, other_out_size=y)
        quantized.append((Wq, Vq))
        rep = dmc.quantization_check((W, V), (Wq, Vq), L, p_samples=min(cfg.samples, 100_000), seed=cfg.seed + s)
        states.append({"state": s, "all_hold": rep.all_hold, "checks": _check_dict(rep)})
    return {
        "command": cfg.command,
        "parameters": {"levels": L, "samples": cfg.samples, "seed": cfg.seed},
        "quantized": serialize.encode_family(dmc.CompoundDMCFamily(tuple(quantized))),
        "states": states,
    }, EXIT_OK


def _cert(c: dmc.OrderingCertificate) -> dict:
    return {
        "holds": c.holds,
        "sampled": c.sampled,
        "witness": None if c.witness is None else [list(w) for w in c.witness],
        "residual": c.residual,
    }


def cmd_dmc_order(cfg: JobConfig) -> tuple[dict, int]:
    fam = _load_family(cfg)
    out = []
    for s, (W, V) in enumerate(fam.states):
        out.append({
            "state": s,
            "degraded": _cert(dmc.is_degraded(W, V)),
            "less_capable": _cert(dmc.is_less_capable(W, V, p_samples=cfg.samples, seed=cfg.seed)),
            "noisier": _cert(dmc.is_noisier_concavity(W, V, pair_samples=cfg.samples, seed=cfg.seed)),
        })
    return {
        "command": cfg.command,
        "parameters": {"samples": cfg.samples, "seed": cfg.seed},
        "states": out,
    }, EXIT_OK


# ---------------------------------------------------------------- entry points


def _emit(text: str, out: str | None, stdout) -> None:
    if out is None:
        stdout.write(text)
    else:
        with open(out, "w") as fh:
            fh.write(text)


def _error(kind: str, message: str, code: int, stderr) -> int:
    stderr.write(json.dumps({"error": {"type": kind, "message": message, "exit_code": code}}, sort_keys=True) + "\n")
    return code


def run(cfg: JobConfig, stdout=None) -> int:
    """Execute a parsed job and write its artifact; returns the exit status."""
    stdout = sys.stdout if stdout is None else stdout
    if cfg.command == "sweep":
        rows = sweep_rows(cfg)
        if cfg.out is None:
            serialize.write_csv(stdout, sweep_header(cfg.bits), rows)
        else:
            serialize.write_csv(cfg.out, sweep_header(cfg.bits), rows)
        return EXIT_OK
    handler = {
        "capacity": cmd_capacity,
        "worst-case": cmd_capacity,
        "verify-saddle": cmd_verify_saddle,
        "dmc-rate": cmd_dmc_rate,
        "dmc-quantize": cmd_dmc_quantize,
        "dmc-order": cmd_dmc_order,
    }[cfg.command]
    report, code = handler(cfg)
    _emit(serialize.dumps_report(report), cfg.out, stdout)
    return code


def main(argv=None, stdout=None, stderr=None) -> int:
    stderr = sys.stderr if stderr is None else stderr
    try:
        cfg = parse_args(sys.argv[1:] if argv is None else argv)
        return run(cfg, stdout)
    except InputFormatError as exc:
        return _error("parse", str(exc), EXIT_PARSE, stderr)
    except ValidationError as exc:
        return _error(type(exc).__name__, str(exc), EXIT_VALIDATION, stderr)
    except ConvergenceError as exc:
        return _error("convergence", str(exc), EXIT_CONVERGENCE, stderr)
    except WiretapError as exc:
        return _error(type(exc).__name__, str(exc), EXIT_VALIDATION, stderr)
    except OSError as exc:
        return _error("io", str(exc), EXIT_PARSE, stderr)


if __name__ == "__main__":
    sys.exit(main())
