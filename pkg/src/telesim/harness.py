"""Experiment runner and verification suite behind the ``telesim`` CLI.

Reports are plain dicts serialized as JSON (``"schema": 1``). Floats are
written with ``repr`` so they round-trip exactly; NaN becomes ``null``.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__, kernel
from .discrimination import (
    USD_LABELS,
    branch_states,
    conclusive_probability,
    discriminate_many,
    usd_povm,
)
from .ensembles import b92_demo, ensemble_density, epr_basis_choice_demo, generate_at_distance
from .measure import (
    BELL_LABELS,
    Povm,
    bell_basis,
    induced_povm,
    random_povm,
    telepovm_elements,
    validate_povm,
)
from .protocols import (
    BELL_CORRECTIONS,
    BITS,
    ChannelSpec,
    bob_average,
    derive_correction_table,
    enumerate_branches,
    verify_telepovm_equivalence,
)
from .qcore import StateVector, equal_up_to_global_phase, ket, random_state, singlet
from .rng import SplitMix64

SCHEMA = 1
OUTPUT_DIR_ENV = "TELESIM_OUTPUT_DIR"
TELEPORT_PROTOCOLS = ("standard", "singlet-only", "conclusive", "conclusive-singlet-only")
PROTOCOLS = TELEPORT_PROTOCOLS + ("verify-telepovm", "ensemble-demo")
INPUT_MODES = ("random", "fixed", "enumerate-branches")
SIGMAS = 4.0
# fixed generator for the sampling-free parts of the verification suite
SUITE_SEED = 20240601


class ConfigError(ValueError):
    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


@dataclass(frozen=True)
class RunConfig:
    protocol: str
    alpha2: float = 0.5
    theta: float | None = None
    trials: int = 100_000
    seed: int = 1
    input_mode: str = "random"
    fixed_input: tuple[complex, complex] | None = None
    output_format: str = "json"
    output_path: str | None = None
    workers: int = 1
    backend: str | None = None

    def validate(self) -> None:
        if self.protocol not in PROTOCOLS:
            raise ConfigError("protocol", f"unknown protocol {self.protocol!r}; choose from {PROTOCOLS}")
        if not isinstance(self.alpha2, (int, float)) or not 0.0 < self.alpha2 <= 1.0:
            raise ConfigError("alpha2", f"must lie in (0, 1], got {self.alpha2!r}")
        if isinstance(self.trials, bool) or not isinstance(self.trials, int) or self.trials < 1:
            raise ConfigError("trials", f"must be a positive integer, got {self.trials!r}")
        if not isinstance(self.seed, int) or not 0 <= self.seed < 2**64:
            raise ConfigError("seed", f"must be an unsigned 64-bit integer, got {self.seed!r}")
        if self.input_mode not in INPUT_MODES:
            raise ConfigError("input_mode", f"must be one of {INPUT_MODES}, got {self.input_mode!r}")
        if self.input_mode == "fixed":
            if self.fixed_input is None:
                raise ConfigError("fixed_input", "fixed input mode needs an (a, b) pair")
            norm = abs(self.fixed_input[0]) ** 2 + abs(self.fixed_input[1]) ** 2
            if abs(norm - 1.0) > 1e-9:
                raise ConfigError("fixed_input", f"|a|^2 + |b|^2 = {norm!r}, expected 1")
        if self.output_format not in ("json", "csv"):
            raise ConfigError("output_format", f"must be 'json' or 'csv', got {self.output_format!r}")
        if not isinstance(self.workers, int) or self.workers < 1:
            raise ConfigError("workers", f"must be a positive integer, got {self.workers!r}")
        if self.backend is not None and self.backend not in kernel.available_backends():
            raise ConfigError("backend", f"{self.backend!r} not available; have {kernel.available_backends()}")
        if self.protocol in ("conclusive", "conclusive-singlet-only") and self.alpha2 in (1.0, 0.0):
            raise ConfigError("alpha2", "a product channel (beta = 0) can never teleport conclusively")

    @property
    def channel(self) -> ChannelSpec:
        return ChannelSpec.from_alpha2(self.alpha2)

    def input_state(self) -> StateVector:
        return ket(*self.fixed_input)

    def echo(self) -> dict:
        d = asdict(self)
        if self.fixed_input is not None:
            d["fixed_input"] = [[z.real, z.imag] for z in map(complex, self.fixed_input)]
        d["backend"] = self.backend or kernel.BACKEND
        d["alpha"] = self.channel.alpha
        d["beta"] = self.channel.beta
        return d


def _check(name: str, passed: bool, value, tolerance, monte_carlo: bool = False, detail: str = "") -> dict:
    out = {"name": name, "passed": bool(passed), "value": value, "tolerance": tolerance, "monte_carlo": monte_carlo}
    if detail:
        out["detail"] = detail
    return out


def binomial_stderr(successes: int, n: int) -> float:
    p = successes / n
    return math.sqrt(p * (1.0 - p) / n)


def within_sigmas(observed: float, expected: float, n: int, k: float = SIGMAS) -> bool:
    sigma = math.sqrt(max(expected * (1.0 - expected), 0.0) / n)
    return abs(observed - expected) <= k * sigma + 1e-15


def exact_on_success(protocol: str, channel: ChannelSpec) -> bool:
    """Whether every announced success must deliver fidelity one."""
    return protocol.startswith("conclusive") or channel.alpha == channel.beta


def _kraus_for(channel: ChannelSpec, protocol: str):
    if protocol not in ("conclusive", "conclusive-singlet-only"):
        return None
    return [np.asarray(k) for k in usd_povm(*branch_states(channel.alpha, channel.beta)).povm.kraus()]


def _chunk_job(args):
    return args[4], kernel.run_trials(*args[:4], args[4], *args[5:])


def simulate(config: RunConfig) -> dict[str, np.ndarray]:
    """Per-trial arrays for a Monte Carlo run, independent of the worker count."""
    ch = config.channel
    kraus = _kraus_for(ch, config.protocol)
    fixed = config.fixed_input if config.input_mode == "fixed" else None
    n, w = config.trials, config.workers
    backend = config.backend or kernel.BACKEND
    if w == 1:
        parts = [(0, kernel.run_trials(config.protocol, ch.alpha, ch.beta, config.seed, 0, n, fixed, kraus, backend))]
    else:
        size = -(-n // w)
        jobs = [
            (config.protocol, ch.alpha, ch.beta, config.seed, start, min(size, n - start), fixed, kraus, backend)
            for start in range(0, n, size)
        ]
        with ProcessPoolExecutor(max_workers=w) as pool:
            parts = list(pool.map(_chunk_job, jobs))
    parts.sort(key=lambda p: p[0])
    cols = [np.concatenate([p[1][i] for p in parts]) for i in range(4)]
    return {"step1": cols[0], "step2": cols[1], "conclusive": cols[2].astype(bool), "fidelity": cols[3]}


def theoretical_success(protocol: str, channel: ChannelSpec, input_state: StateVector | None) -> float:
    if protocol == "standard":
        return 1.0
    if protocol == "conclusive":
        return conclusive_probability(channel.alpha, channel.beta)
    if protocol == "conclusive-singlet-only":
        return conclusive_probability(channel.alpha, channel.beta) / 4.0
    # singlet-only: Psi- weight; 1/4 on average over inputs
    if input_state is None:
        return 0.25
    a, b = input_state.amplitudes
    return 0.5 * (channel.alpha**2 * abs(b) ** 2 + channel.beta**2 * abs(a) ** 2)


def _step_labels(protocol: str, step1: int, step2: int) -> tuple[str, str]:
    if protocol in ("standard", "singlet-only"):
        return BELL_LABELS[step1], ""
    return ("parallel", "antiparallel")[step1], USD_LABELS[step2]


def _aggregate(conclusive: np.ndarray, fidelity: np.ndarray, n: int, exact: bool) -> dict:
    k = int(conclusive.sum())
    delivered = fidelity[~np.isnan(fidelity)]
    succ = fidelity[conclusive]
    return {
        "trials": n,
        "conclusive_count": k,
        "success_rate": k / n,
        "success_rate_stderr": binomial_stderr(k, n),
        "mean_fidelity": math.fsum(delivered) / len(delivered) if len(delivered) else None,
        "mean_fidelity_success": math.fsum(succ) / k if k else None,
        "min_success_fidelity": float(succ.min()) if k else None,
        "wrong_conclusive_count": int(np.sum(succ < 1.0 - 1e-9)) if exact else None,
    }


def _teleport_report(config: RunConfig) -> tuple[dict, list[list]]:
    ch = config.channel
    proto = config.protocol
    bits = BITS[proto]
    rows: list[list] = []
    if config.input_mode == "enumerate-branches":
        if config.fixed_input is not None:
            inputs = [config.input_state()]
        else:
            rng = np.random.default_rng(config.seed)
            inputs = [random_state((2,), rng) for _ in range(config.trials)]
        succ, fsum, fmin, wrong, bob_dev, total_dev = [], [], 1.0, 0, 0.0, 0.0
        fall = []
        for idx, psi in enumerate(inputs):
            branches = enumerate_branches(proto, psi, ch)
            total_dev = max(total_dev, abs(math.fsum(b.probability for b in branches) - 1.0))
            bob_dev = max(bob_dev, float(np.max(np.abs(bob_average(branches) - ch.bob_reduced()))))
            ps = math.fsum(b.probability for b in branches if b.conclusive)
            succ.append(ps)
            delivered = [b for b in branches if b.fidelity is not None]
            pd = math.fsum(b.probability for b in delivered)
            if pd > 0:
                fall.append(math.fsum(b.probability * b.fidelity for b in delivered) / pd)
            if ps > 0:
                fsum.append(math.fsum(b.probability * b.fidelity for b in branches if b.conclusive) / ps)
            for b in branches:
                if b.conclusive:
                    fmin = min(fmin, b.fidelity)
                    wrong += b.fidelity < 1.0 - 1e-9
                rows.append([idx, *b.outcomes, *([""] * (2 - len(b.outcomes))), b.probability, int(b.conclusive), b.fidelity, bits])
        rate = math.fsum(succ) / len(succ)
        results = {
            "inputs": len(inputs),
            "success_probability": rate,
            "success_rate_stderr": 0.0,
            "mean_fidelity": math.fsum(fall) / len(fall) if fall else None,
            "mean_fidelity_success": math.fsum(fsum) / len(fsum) if fsum else None,
            "min_success_fidelity": fmin if fsum else None,
            "wrong_conclusive_count": int(wrong) if exact_on_success(proto, ch) else None,
            "max_probability_defect": total_dev,
            "max_no_signaling_deviation": bob_dev,
        }
        expected = theoretical_success(proto, ch, inputs[0] if config.fixed_input is not None else None)
        checks = [
            _check("probabilities sum to one", total_dev < 1e-10, total_dev, 1e-10),
            _check("no-signaling", bob_dev < 1e-10, bob_dev, 1e-10),
        ]
        if exact_on_success(proto, ch):
            checks.append(_check("successes have fidelity one", wrong == 0, fmin if fsum else None, 1e-9))
        if config.fixed_input is not None or proto != "singlet-only":
            dev = max(abs(p - expected) for p in succ)
            checks.append(_check("exact success probability", dev < 1e-10, dev, 1e-10))
        header = ["input", "step1", "step2", "probability", "conclusive", "fidelity", "bits_sent"]
    else:
        data = simulate(config)
        n = config.trials
        results = _aggregate(data["conclusive"], data["fidelity"], n, exact_on_success(proto, ch))
        results["classical_bits_per_trial"] = bits
        psi = config.input_state() if config.input_mode == "fixed" else None
        expected = theoretical_success(proto, ch, psi)
        sigma = math.sqrt(max(expected * (1 - expected), 0.0) / n)
        z = (results["success_rate"] - expected) / sigma if sigma > 0 else 0.0
        checks = [
            _check(
                f"success rate within {SIGMAS:g} sigma of theory",
                within_sigmas(results["success_rate"], expected, n),
                z,
                SIGMAS,
                monte_carlo=True,
            )
        ]
        if exact_on_success(proto, ch):
            ok = results["wrong_conclusive_count"] == 0
            checks.append(
                _check("successful trials have fidelity one", ok, results["min_success_fidelity"], 1e-9, monte_carlo=True)
            )
        for t in range(n):
            s1, s2 = _step_labels(proto, int(data["step1"][t]), int(data["step2"][t]))
            f = data["fidelity"][t]
            rows.append([t, s1, s2, int(data["conclusive"][t]), None if np.isnan(f) else float(f), bits])
        header = ["trial", "step1", "step2", "conclusive", "fidelity", "bits_sent"]
    theory = {"success_probability": expected}
    if proto in ("conclusive", "conclusive-singlet-only"):
        theory["usd_overlap"] = ch.overlap
    return {"results": results, "theory": theory, "checks": checks}, [header] + rows


def _telepovm_report(config: RunConfig) -> dict:
    thetas = [config.theta] if config.theta is not None else [2 * math.pi * k / 100 for k in range(100)]
    dev, min_fid, a00, per_theta = 0.0, 1.0, 0.0, []
    for th in thetas:
        rep = verify_telepovm_equivalence(th)
        dev = max(dev, rep.max_deviation)
        fids = [f for f in rep.recovery_fidelities if f is not None]
        min_fid = min([min_fid] + fids)
        elem = induced_povm(bell_basis(), ket(math.cos(th), math.sin(th))).elements[0][0, 0].real
        a00 = max(a00, abs(elem - 0.5 * math.cos(th) ** 2))
        if config.theta is not None:
            per_theta.append({"theta": th, "probabilities": list(rep.probabilities), "recovery_fidelities": list(rep.recovery_fidelities)})
    results = {"points": len(thetas), "max_deviation": dev, "min_recovery_fidelity": min_fid, "max_a1_00_error": a00}
    if per_theta:
        results["detail"] = per_theta
    checks = [
        _check("induced POVM equals the four-element POVM", dev < 1e-12, dev, 1e-12),
        _check("(A1)_00 = c^2 / 2", a00 < 1e-12, a00, 1e-12),
        _check("fixed corrections recover the ancilla", min_fid >= 1 - 1e-10, min_fid, 1e-10),
    ]
    return {"results": results, "checks": checks}


def _ensemble_report(config: RunConfig) -> dict:
    ch = config.channel
    ens = b92_demo(ch.alpha, ch.beta)
    al, be = ch.alpha, ch.beta
    want = [ket((al + be) / math.sqrt(2), (al - be) / math.sqrt(2)), ket((al - be) / math.sqrt(2), (al + be) / math.sqrt(2))]
    b92_ok = all(equal_up_to_global_phase(s, w) for (_, s), w in zip(ens.members, want))
    z, x = epr_basis_choice_demo("z"), epr_basis_choice_demo("x")
    dz = ensemble_density(z).matrix
    dx = ensemble_density(x).matrix
    th = config.theta if config.theta is not None else math.pi / 7
    tp = generate_at_distance(singlet(), telepovm_elements(th))

    def members(e):
        return [
            {"probability": p, "state": None if s is None else [[c.real, c.imag] for c in s.amplitudes]} for p, s in e.members
        ]

    results = {
        "b92": {"members": members(ens), "residual": ens.residual()},
        "epr_z": {"members": members(z), "residual": z.residual()},
        "epr_x": {"members": members(x), "residual": x.residual()},
        "epr_density_difference": float(np.max(np.abs(dz - dx))),
        "telepovm_singlet": {"theta": th, "members": members(tp), "residual": tp.residual()},
    }
    checks = [
        _check("B92 members match the expected pair", b92_ok, None, 1e-10),
        _check("B92 ensemble reproduces Bob's state", ens.residual() < 1e-10, ens.residual(), 1e-10),
        _check("z and x ensembles share one density matrix", results["epr_density_difference"] < 1e-12, results["epr_density_difference"], 1e-12),
        _check("singlet ensemble reproduces Bob's state", tp.residual() < 1e-10, tp.residual(), 1e-10),
    ]
    return {"results": results, "checks": checks}


def run_experiment(config: RunConfig, write: bool = True) -> tuple[dict, int]:
    """Run ``config``; returns ``(report, exit_code)`` and writes the output file."""
    config.validate()
    rows = None
    if config.protocol in TELEPORT_PROTOCOLS:
        body, rows = _teleport_report(config)
    elif config.protocol == "verify-telepovm":
        body = _telepovm_report(config)
    else:
        body = _ensemble_report(config)
    report = {
        "schema": SCHEMA,
        "generator": f"telesim {__version__}",
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "config": config.echo(),
        "rng": {"algorithm": "splitmix64-counter", "seed": config.seed},
        **body,
    }
    code = 0 if all(c["passed"] for c in report["checks"]) else 1
    if write:
        path = resolve_output(config)
        if path is not None:
            if config.output_format == "csv" and rows is not None:
                write_csv(rows, path)
            else:
                write_json(report, path)
    return report, code


def run_verification_suite(seed: int = 1, inject_fault: bool = False, mc_samples: int = 100_000) -> tuple[dict, int]:
    """All module invariants as pass/fail lines; exit code 1 on any failure.

    Only lines flagged ``monte_carlo`` depend on ``seed``.
    """
    gen = np.random.default_rng(SUITE_SEED)
    checks = []

    thetas = [2 * math.pi * k / 100 for k in range(100)]
    resid, min_eig, bad = 0.0, 1.0, []
    for th in thetas:
        povm = telepovm_elements(th)
        if inject_fault:
            povm = Povm((povm.elements[0] * 1.01,) + povm.elements[1:], povm.labels)
        rep = validate_povm(povm)
        resid = max(resid, rep.completeness_residual)
        min_eig = min(min_eig, min(rep.min_eigenvalues))
        if not rep.passed:
            bad.extend(rep.failures)
    checks.append(_check("POVM validity sweep (100 angles)", not bad and resid < 1e-12, resid, 1e-12, detail="; ".join(bad[:3])))

    perturbed = telepovm_elements(0.3)
    perturbed = Povm((perturbed.elements[0] * 1.01,) + perturbed.elements[1:])
    checks.append(_check("negative control: perturbed POVM rejected", not validate_povm(perturbed).passed, None, None))

    dev, fid = 0.0, 1.0
    for th in thetas:
        rep = verify_telepovm_equivalence(th)
        dev = max(dev, rep.max_deviation)
        fid = min([fid] + [f for f in rep.recovery_fidelities if f is not None])
    checks.append(_check("Bell measurement + ancilla equals the four-element POVM", dev < 1e-12, dev, 1e-12))
    checks.append(_check("fixed corrections recover the ancilla state", fid >= 1 - 1e-10, fid, 1e-10))

    worst = 0.0
    for _ in range(1000):
        da, db = 2, 2
        shared = random_state((da, db), gen, ("A", "B"))
        povm = random_povm(int(gen.integers(2, 7)), da, gen)
        worst = max(worst, generate_at_distance(shared, povm).residual())
    checks.append(_check("remote ensemble reproduces Bob's reduced state (1000 pairs)", worst < 1e-10, worst, 1e-10))

    ens = generate_at_distance(singlet(), telepovm_elements(math.pi / 7))
    c, s = math.cos(math.pi / 7), math.sin(math.pi / 7)
    want = [ket(s, -c), ket(s, c), ket(c, -s), ket(c, s)]
    pdev = max(abs(p - 0.25) for p in ens.probabilities)
    ok = pdev < 1e-12 and all(equal_up_to_global_phase(m, w) for m, w in zip(ens.states, want))
    checks.append(_check("singlet + four-element POVM gives the listed states", ok, pdev, 1e-12))

    inputs = [random_state((2,), gen) for _ in range(100)]
    table = derive_correction_table(inputs)
    checks.append(_check("derived correction table matches the frozen one", table == BELL_CORRECTIONS, None, None, detail=str(table)))

    chmax = ChannelSpec.maximal()
    low = 1.0
    for _ in range(1000):
        psi = random_state((2,), gen)
        low = min([low] + [b.fidelity for b in enumerate_branches("standard", psi, chmax) if b.probability > 0])
    checks.append(_check("correction table restores 1000 random inputs", low >= 1 - 1e-10, low, 1e-10))

    prob_dev, sig_dev, fid_low, rate_dev = 0.0, 0.0, 1.0, 0.0
    for a2 in (0.5, 0.6, 0.75, 0.8, 0.9):
        ch = ChannelSpec.from_alpha2(a2)
        for _ in range(20):
            psi = random_state((2,), gen)
            for proto in TELEPORT_PROTOCOLS:
                brs = enumerate_branches(proto, psi, ch)
                prob_dev = max(prob_dev, abs(math.fsum(b.probability for b in brs) - 1))
                sig_dev = max(sig_dev, float(np.max(np.abs(bob_average(brs) - ch.bob_reduced()))))
                if exact_on_success(proto, ch):
                    fid_low = min([fid_low] + [b.fidelity for b in brs if b.conclusive])
                if proto in ("conclusive", "conclusive-singlet-only"):
                    want_p = theoretical_success(proto, ch, psi)
                    got = math.fsum(b.probability for b in brs if b.conclusive)
                    rate_dev = max(rate_dev, abs(got - want_p))
    checks.append(_check("branch probabilities sum to one", prob_dev < 1e-10, prob_dev, 1e-10))
    checks.append(_check("no-signaling: Bob's averaged state ignores the input", sig_dev < 1e-10, sig_dev, 1e-10))
    checks.append(_check("conclusive branches deliver fidelity one", fid_low >= 1 - 1e-9, fid_low, 1e-9))
    checks.append(_check("exact conclusive probability 1 - (alpha^2 - beta^2)", rate_dev < 1e-10, rate_dev, 1e-10))

    rng = SplitMix64(seed)
    wrong, worst_z = 0, 0.0
    for s in (0.0, 0.3, 0.6, 0.9):
        alpha, beta = math.sqrt((1 + s) / 2), math.sqrt((1 - s) / 2)
        setup = usd_povm(*branch_states(alpha, beta))
        for side, state in (("u", setup.u), ("v", setup.v)):
            idx = discriminate_many(state, setup, mc_samples, rng)
            other = 1 if side == "u" else 0
            wrong += int(np.sum(idx == other))
            hits = int(np.sum(idx == (0 if side == "u" else 1)))
            sigma = math.sqrt(s * (1 - s) / mc_samples)
            gap = abs(hits / mc_samples - (1 - s))
            if sigma:
                worst_z = max(worst_z, gap / sigma)
            elif gap:
                worst_z = math.inf
    checks.append(_check("USD never misidentifies", wrong == 0, wrong, 0, monte_carlo=True))
    checks.append(_check(f"USD conclusive rate within {SIGMAS:g} sigma of 1 - s", worst_z <= SIGMAS, worst_z, SIGMAS, monte_carlo=True))

    if kernel.BACKEND == "cython":
        ch = ChannelSpec.from_alpha2(0.8)
        kr = _kraus_for(ch, "conclusive")
        agree = True
        for proto in TELEPORT_PROTOCOLS:
            a = kernel.run_trials(proto, ch.alpha, ch.beta, seed, 0, 2000, None, kr if "conclusive" in proto else None, "cython")
            b = kernel.run_trials(proto, ch.alpha, ch.beta, seed, 0, 2000, None, kr if "conclusive" in proto else None, "python")
            agree &= all(np.array_equal(x, y) for x, y in zip(a[:3], b[:3]))
            agree &= bool(np.allclose(a[3], b[3], rtol=0, atol=1e-12, equal_nan=True))
        checks.append(_check("compiled and Python kernels agree trial by trial", agree, None, 1e-12, monte_carlo=True))

    report = {
        "schema": SCHEMA,
        "generator": f"telesim {__version__}",
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "config": {"suite": "verify", "seed": seed, "inject_fault": inject_fault, "mc_samples": mc_samples, "backend": kernel.BACKEND},
        "rng": {"algorithm": "splitmix64-counter", "seed": seed},
        "checks": checks,
    }
    return report, 0 if all(c["passed"] for c in checks) else 1


def _clean(obj):
    if isinstance(obj, float):
        return None if math.isnan(obj) or math.isinf(obj) else obj
    if isinstance(obj, (np.floating,)):
        return _clean(float(obj))
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def dumps(report: dict) -> str:
    return json.dumps(_clean(report), indent=2, allow_nan=False) + "\n"


def resolve_output(config: RunConfig) -> Path | None:
    if config.output_path:
        return Path(config.output_path)
    outdir = os.environ.get(OUTPUT_DIR_ENV)
    if outdir:
        return Path(outdir) / f"{config.protocol}-seed{config.seed}.{config.output_format}"
    return None


def write_json(report: dict, path: Path) -> None:
    try:
        Path(path).write_text(dumps(report))
    except OSError as exc:
        raise ConfigError("output_path", f"cannot write {path}: {exc}") from exc


def write_csv(rows: list[list], path: Path) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    for row in rows:
        writer.writerow(["" if v is None else repr(v) if isinstance(v, float) else v for v in row])
    try:
        Path(path).write_text(buf.getvalue())
    except OSError as exc:
        raise ConfigError("output_path", f"cannot write {path}: {exc}") from exc


def summary_lines(report: dict) -> list[str]:
    lines = []
    res = report.get("results")
    if isinstance(res, dict):
        for k, v in res.items():
            if isinstance(v, (int, float)) or v is None:
                lines.append(f"{k}: {v}")
    for c in report["checks"]:
        tag = "PASS" if c["passed"] else "FAIL"
        mc = " [monte carlo]" if c.get("monte_carlo") else ""
        lines.append(f"{tag}  {c['name']}{mc}  value={c['value']} tol={c['tolerance']}")
    return lines
