"""Command-line front end.

    qtraj {tunnel,bound,trajectory,classical-limit,verify} SCENARIO.json [--out DIR]
          [--tolerance-scale F]

A scenario is a strict JSON object; the run writes ``<output>.csv`` (except in verify
mode) and ``<output>_report.json`` into ``--out``.  Exit codes: 0 when every check is
within tolerance, 2 when at least one is not, 1 on input, numerical or I/O errors.
``QTRAJ_THREADS`` caps the worker threads used for grid evaluation (0 or unset: one per
CPU); grids are split into fixed-size chunks, so results do not depend on it.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from . import potential as potmod
from .basis import build_basis
from .bohm import (SeparableWave, classical_q_average, divergence_check, numeric_q_average,
                   running_average_deviation)
from .boundstate import action_variable, bound_basis, microstate_wave
from .errors import QTrajError, ParameterError
from .potential import Free, HarmonicOscillator, InfiniteSquareWell, RectangularBarrier
from .qshje import Microstate, conjugate_momentum, qshje_residual, substitution_brackets
from .trajectory import (classical_limit_sweep, closed_form_microstate, free_particle_time,
                         mechanical_velocity, time_of_position, time_slope)
from . import tunneling as tun

__all__ = ["Scenario", "parse_scenario", "run", "main"]

MODES = ("tunnel", "bound", "trajectory", "classical-limit", "verify")
_KEYS = {"mode", "potential", "E", "n_nodes", "microstate", "hbar", "mass", "grid", "sweep",
         "tau", "output"}
_CHUNK = 256

EXIT_OK, EXIT_INPUT, EXIT_TOLERANCE = 0, 1, 2


@dataclass(frozen=True)
class Grid:
    x_min: float
    x_max: float
    n_points: int

    def points(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.n_points)


@dataclass(frozen=True)
class Scenario:
    mode: str
    potential: object
    E: Optional[float]
    n_nodes: Optional[int]
    microstate: Microstate
    hbar: float
    mass: float
    grid: Optional[Grid]
    sweep: tuple
    tau: float
    output: str
    barrier: Optional[tun.BarrierScenario] = field(default=None, compare=False)


# --------------------------------------------------------------------------- parsing


def _number(obj, key, path, required=False, default=None):
    if key not in obj:
        if required:
            raise ParameterError(f"{path}{key}: required field missing")
        return default
    v = obj[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise ParameterError(f"{path}{key}: must be a finite number")
    return float(v)


def _strict(obj, allowed, path):
    if not isinstance(obj, dict):
        raise ParameterError(f"{path.rstrip('.') or 'scenario'}: must be a JSON object")
    extra = sorted(set(obj) - set(allowed))
    if extra:
        raise ParameterError(f"{path.rstrip('.') or 'scenario'}: unknown keys {extra}")


def _parse_grid(obj):
    _strict(obj, {"x_min", "x_max", "n_points"}, "grid.")
    lo = _number(obj, "x_min", "grid.", True)
    hi = _number(obj, "x_max", "grid.", True)
    n = obj.get("n_points")
    if isinstance(n, bool) or not isinstance(n, int):
        raise ParameterError("grid.n_points: must be an integer")
    if n < 2:
        raise ParameterError("grid.n_points: must be at least 2")
    if not lo < hi:
        raise ParameterError("grid: x_min must be less than x_max")
    return Grid(lo, hi, n)


def _default_grid(mode, pot, barrier):
    if isinstance(pot, InfiniteSquareWell):
        return Grid(-pot.L, pot.L, 201)
    if barrier is not None:
        return Grid(-barrier.q - 5.0, barrier.q + 5.0, 1001)
    if mode in ("trajectory", "classical-limit"):
        return Grid(0.0, 5.0, 201)
    return Grid(-5.0, 5.0, 201)


def parse_scenario(text) -> Scenario:
    """Validate a scenario document; errors name the offending field."""
    if isinstance(text, (bytes, bytearray)):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParameterError(f"scenario: not UTF-8 ({exc})") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParameterError(f"scenario: malformed JSON ({exc})") from None
    _strict(doc, _KEYS, "")
    mode = doc.get("mode")
    if mode not in MODES:
        raise ParameterError(f"mode: must be one of {list(MODES)}, got {mode!r}")

    if "potential" in doc:
        try:
            pot = potmod.from_dict(doc["potential"])
        except (TypeError, ValueError) as exc:
            msg = str(exc)
            raise ParameterError(msg if msg.startswith("potential") else f"potential: {msg}") from None
    elif mode == "classical-limit":
        pot = Free()
    else:
        raise ParameterError("potential: required field missing")

    hbar = _number(doc, "hbar", "", default=1.0)
    mass = _number(doc, "mass", "", default=1.0)
    if hbar <= 0:
        raise ParameterError("hbar: must be positive")
    if mass <= 0:
        raise ParameterError("mass: must be positive")
    tau = _number(doc, "tau", "", default=0.0)
    E = _number(doc, "E", "")

    n_nodes = doc.get("n_nodes")
    if n_nodes is not None and (isinstance(n_nodes, bool) or not isinstance(n_nodes, int) or n_nodes < 0):
        raise ParameterError("n_nodes: must be a nonnegative integer")

    m = doc.get("microstate", {"a": 1.0, "b": 1.0, "c": 0.0})
    _strict(m, {"a", "b", "c"}, "microstate.")
    try:
        micro = Microstate(_number(m, "a", "microstate.", True), _number(m, "b", "microstate.", True),
                           _number(m, "c", "microstate.", default=0.0))
    except ParameterError as exc:
        msg = str(exc)
        raise ParameterError(msg if msg.startswith("microstate") else f"microstate: {msg}") from None

    sweep = ()
    if "sweep" in doc:
        _strict(doc["sweep"], {"hbar"}, "sweep.")
        hs = doc["sweep"].get("hbar")
        if not isinstance(hs, list) or not hs:
            raise ParameterError("sweep.hbar: must be a non-empty list")
        for i, h in enumerate(hs):
            if isinstance(h, bool) or not isinstance(h, (int, float)) or not h > 0:
                raise ParameterError(f"sweep.hbar[{i}]: must be a positive number")
        if any(b >= a for a, b in zip(hs, hs[1:])):
            raise ParameterError("sweep.hbar: must be strictly decreasing")
        sweep = tuple(float(h) for h in hs)

    output = doc.get("output", mode)
    if not isinstance(output, str) or not output or os.sep in output or output in (".", ".."):
        raise ParameterError("output: must be a plain file stem")

    kind_mode = mode if mode != "verify" else {
        "barrier": "tunnel", "harmonic": "bound", "well": "bound", "free": "trajectory"}[pot.kind]

    barrier = None
    if kind_mode == "tunnel":
        if not isinstance(pot, RectangularBarrier):
            raise ParameterError("potential: tunnel mode needs a barrier")
        if E is None:
            raise ParameterError("E: required field missing")
        if not 0 < E < pot.U:
            raise ParameterError("E: sub-barrier energy required (0 < E < U)")
        barrier = tun.BarrierScenario(pot.U, pot.q, E, hbar, mass)
    elif kind_mode == "bound":
        if not isinstance(pot, (HarmonicOscillator, InfiniteSquareWell)):
            raise ParameterError("potential: bound mode needs a harmonic oscillator or a well")
        if n_nodes is None:
            raise ParameterError("n_nodes: required field missing")
    elif kind_mode in ("trajectory", "classical-limit"):
        if E is None:
            raise ParameterError("E: required field missing")
        if kind_mode == "classical-limit":
            if not isinstance(pot, Free):
                raise ParameterError("potential: the classical-limit sweep is for the free particle")
            if E <= 0:
                raise ParameterError("E: must be positive")
            if not sweep:
                sweep = tuple(2.0**-i for i in range(7))

    grid = _parse_grid(doc["grid"]) if "grid" in doc else _default_grid(kind_mode, pot, barrier)
    if isinstance(pot, InfiniteSquareWell) and (grid.x_min < -pot.L or grid.x_max > pot.L):
        raise ParameterError("grid: must lie inside the well [-L, L]")
    return Scenario(mode, pot, E, n_nodes, micro, hbar, mass, grid, sweep, tau, output, barrier)


# --------------------------------------------------------------------------- helpers


def _threads() -> int:
    raw = os.environ.get("QTRAJ_THREADS", "0").strip() or "0"
    try:
        n = int(raw)
    except ValueError:
        raise ParameterError(f"QTRAJ_THREADS must be an integer, got {raw!r}") from None
    if n < 0:
        raise ParameterError("QTRAJ_THREADS must be >= 0")
    return n or (os.cpu_count() or 1)


def _chunked(fn, x):
    """Apply ``fn`` to fixed-size chunks of ``x`` (thread count never changes the chunks)."""
    chunks = [x[i:i + _CHUNK] for i in range(0, len(x), _CHUNK)]
    workers = min(_threads(), len(chunks))
    if workers <= 1:
        parts = [fn(c) for c in chunks]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(fn, chunks))
    return np.concatenate(parts)


def _fmt(v) -> str:
    if isinstance(v, str):
        return v
    return format(float(v), ".16e")


def _csv_text(header, columns) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in zip(*columns):
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def _relmax(err, scale):
    return float(np.max(np.abs(err)) / max(float(scale), 1.0))


# --------------------------------------------------------------------------- modes


def _tunnel(sc: Scenario, x):
    b = sc.barrier
    rec = tun.barrier_action_derivatives(b, x)
    psi, d1, _ = tun.wave_derivatives(b, x)
    current = b.hbar / b.mass * np.imag(np.conj(psi) * d1)
    V = np.where(np.abs(x) <= b.q, b.U, 0.0)
    schw = rec.W3 / rec.W1 - 1.5 * (rec.W2 / rec.W1) ** 2
    qres = rec.W1**2 / (2 * b.mass) + V - b.E + b.hbar**2 / (4 * b.mass) * schw
    jumps = tun.interface_continuity(b)
    I, R = tun.plane_wave_coefficients(b)
    refl, trans = tun.scattering_oracle(b)
    ours_R = abs(R / I) ** 2
    ours_T = 1.0 / (b.hbar * b.k * abs(I) ** 2)
    comps = tun.resolve_components(b, x)
    inside, before = np.abs(x) <= b.q, x < -b.q
    psi_scale = float(np.max(np.abs(psi)))
    comp_err = 0.0
    if inside.any():
        comp_err = max(comp_err, _relmax((comps["interior"][0] + comps["interior"][1] - psi)[inside], psi_scale))
    if before.any():
        comp_err = max(comp_err, _relmax((comps["exterior"][0] + comps["exterior"][1] - psi)[before], psi_scale))
    xs_before = x[before] if before.any() else -b.q - (2 * math.pi / b.k) * np.linspace(0.1, 3.0, 64)
    inv = tun.inverse_mapping(b, xs_before)
    w = inv["weights"]
    inv_scale = float(np.max((abs(w["w_ip"]) + abs(w["w_rp"])) * np.abs(inv["zeta_plus"])))
    inv_err = _relmax(inv["recon_incident"] + inv["recon_reflected"] - inv["zeta_plus"], inv_scale)
    u = b.k * (xs_before + b.q)
    rt_err = max(_relmax(inv["recon_incident"] - I * np.exp(1j * u), inv_scale),
                 _relmax(inv["recon_reflected"] - R * np.exp(-1j * u), inv_scale))
    printed = tun.printed_coefficient_report(b)
    coef_dev = max(printed["incident_with_ratio_difference"][1], printed["reflected_with_ratio_sum"][1]) / abs(I)
    metrics = {
        # relative to the largest energy term: the modulated wave before the barrier
        # makes (W')^2/2m and the quantum term large and nearly cancelling
        "max_qshje_residual": float(np.max(np.abs(qres))
                                    / max(abs(b.E), 1.0, float(np.max(rec.W1**2)) / (2 * b.mass))),
        "max_interface_jump": max(abs(v) for side in jumps.values() for v in side.values()),
        "schrodinger_residual": tun.schrodinger_residual(b, x),
        "current_variation": float(np.ptp(current) / abs(np.mean(current))),
        "reflection_transmission_defect": max(abs(ours_R + ours_T - 1.0), abs(ours_R - abs(refl) ** 2),
                                              abs(abs(refl) ** 2 + abs(trans) ** 2 - 1.0)),
        "component_closure": comp_err,
        "printed_coefficient_deviation": float(coef_dev),
        "inverse_mapping_closure": max(inv_err, rt_err),
        "reflectance": float(ours_R),
    }
    tol = {
        "max_qshje_residual": 1e-9,
        "max_interface_jump": 1e-10,
        "schrodinger_residual": 1e-8,
        "current_variation": 1e-8,
        "reflection_transmission_defect": 1e-10,
        "component_closure": 1e-10,
        "printed_coefficient_deviation": 1e-10,
        "inverse_mapping_closure": 1e-10,
    }
    header = ["x", "re_psi", "im_psi", "abs_psi", "W", "W1", "current"]
    cols = [x, psi.real, psi.imag, np.abs(psi), rec.W, rec.W1, current]
    return header, cols, metrics, tol


def _bound(sc: Scenario, x):
    bs = bound_basis(sc.potential, sc.n_nodes, sc.hbar, sc.mass)
    micro = sc.microstate
    basis = bs.for_microstate(micro)
    s = basis.eval(x, 0)
    W1 = conjugate_momentum(basis, micro, x)
    wave = microstate_wave(bs, micro, x)
    inner = x if isinstance(sc.potential, HarmonicOscillator) else x[np.abs(x) < sc.potential.L]
    qres = qshje_residual(basis, micro, inner)
    r_phi, r_theta, r_norm = substitution_brackets(basis, micro, inner)
    scale = max(abs(bs.E), 1.0)
    si = basis.eval(inner, 0)
    # Schroedinger brackets relative to the size of each solution on the grid
    brk = max(float(np.max(np.abs(r_phi)) / (scale * np.max(np.abs(si.phi)))),
              float(np.max(np.abs(r_theta)) / (scale * np.max(np.abs(si.theta)))),
              float(np.max(np.abs(r_norm))))
    J = action_variable(bs, micro) / (2.0 * math.pi * sc.hbar)
    closed = isinstance(sc.potential, InfiniteSquareWell)
    metrics = {
        "E": bs.E,
        "max_qshje_residual": float(np.max(np.abs(qres))),
        "max_substitution_bracket": brk,
        "max_microstate_deviation": float(np.max(np.abs(wave - s.phi))),
        "J_over_h": J,
        "J_over_h_deviation": abs(J - (sc.n_nodes + 1)),
    }
    tol = {
        "max_qshje_residual": (1e-9 if closed else 1e-7) * scale,
        "max_substitution_bracket": 1e-10,
        "max_microstate_deviation": 1e-10,
        "J_over_h_deviation": 1e-6 if closed else 1e-4,
    }
    header = ["x", "phi", "theta", "W1", "microstate_wave"]
    return header, [x, s.phi, s.theta, W1, wave], metrics, tol


def _trajectory(sc: Scenario, x):
    pot, E, micro = sc.potential, sc.E, sc.microstate
    t = _chunked(lambda c: time_of_position(pot, E, sc.hbar, sc.mass, micro, c, sc.tau), x)
    v = _chunked(lambda c: mechanical_velocity(pot, E, sc.hbar, sc.mass, micro, c), x)
    ext = None if pot.piecewise_constant else float(np.max(np.abs(x))) * 1.05 + 1.0
    basis = build_basis(pot, E, sc.hbar, sc.mass, extent=ext).rescaled(micro)
    W1 = conjugate_momentum(basis, micro, x)
    qres = qshje_residual(basis, micro, x)
    metrics = {"max_qshje_residual": float(np.max(np.abs(qres)))}
    tol = {"max_qshje_residual": (1e-9 if pot.piecewise_constant else 1e-7) * max(abs(E), 1.0)}
    if isinstance(pot, Free):
        tc = sc.tau + free_particle_time(closed_form_microstate(micro), x, E, sc.hbar, sc.mass)
        sub = x[:: max(1, len(x) // 20)]
        dt = time_slope(pot, E, sc.hbar, sc.mass, micro, sub)
        vs = mechanical_velocity(pot, E, sc.hbar, sc.mass, micro, sub)
        metrics["jacobi_closed_form_deviation"] = float(np.max(np.abs(t - tc)))
        metrics["velocity_consistency"] = float(np.max(np.abs(vs * dt - 1.0)))
        tol["jacobi_closed_form_deviation"] = 1e-6
        tol["velocity_consistency"] = 1e-5
    header = ["x", "t", "W1", "v"]
    return header, [x, t, W1, v], metrics, tol


def _classical_limit(sc: Scenario, x):
    micro, E = sc.microstate, sc.E
    rep = classical_limit_sweep(micro, E, sc.mass, sc.sweep, (sc.grid.x_min, sc.grid.x_max))
    amps = rep.envelope_amplitude
    ratios = [b / a if a > 0 else float("nan") for a, b in zip(amps, amps[1:])]
    symmetric = micro.a == micro.b and micro.c == 0.0
    q_formula = classical_q_average(micro, E)
    q_numeric = numeric_q_average(micro, E, 1e-3, sc.mass)
    # worst running-average mismatch over a fixed window, at successive hbar halvings
    devs = [running_average_deviation(micro, E, h, sc.mass, 0.3, 0.77) for h in (4e-3, 2e-3, 1e-3)]
    metrics = {
        "converged": rep.converged,
        "cosine_coefficient": rep.cosine_coefficient,
        "converged_matches_symmetry": rep.converged == symmetric,
        "classical_q_average": q_formula,
        "numeric_q_average": q_numeric,
        "q_average_deviation": abs(q_numeric - q_formula) / abs(E),
        "q_running_average_halving_ratio": max(b / a for a, b in zip(devs, devs[1:])) if not symmetric else 0.0,
    }
    tol = {"q_average_deviation": 1e-4, "q_running_average_halving_ratio": 0.9}
    if not symmetric:
        metrics["amplitude_ratio_deviation"] = max((abs(r - 1.0) for r in ratios), default=0.0)
        tol["amplitude_ratio_deviation"] = 0.01
    header = ["hbar", "envelope_amplitude", "amplitude_ratio"]
    cols = [list(rep.hbar_values), amps, [""] + [_fmt(r) for r in ratios]]
    return header, cols, metrics, tol


def _divergence_metrics():
    u = SeparableWave((("cos", 1.0), ("cos", 1.0), ("cos", 1.0)))
    v = SeparableWave((("sin", 1.0), ("cos", 1.0), ("cos", 1.0)))
    k = 0.1
    kk = math.sqrt(1.5) * k
    u2 = SeparableWave((("cos", k), ("cos", k), ("cos", k)))
    v2 = SeparableWave((("sin", kk), ("cos", kk), ("cos", 0.0)))
    a = divergence_check(u, v)
    b = divergence_check(u2, v2)
    c = divergence_check(u2, v2, n_points=41, spacing=0.025)
    metrics = {
        "max_divergence": max(a.max_divergence, b.max_divergence),
        "divergence_halving_ratio": b.max_divergence / c.max_divergence,
        "divergence_order_defect": abs(b.max_divergence / c.max_divergence - 4.0) / 4.0,
    }
    return metrics, {"max_divergence": 1e-6, "divergence_order_defect": 0.05}


_RUNNERS = {"tunnel": _tunnel, "bound": _bound, "trajectory": _trajectory,
            "classical-limit": _classical_limit}


def _evaluate(sc: Scenario):
    mode = sc.mode
    if mode == "verify":
        mode = {"barrier": "tunnel", "harmonic": "bound", "well": "bound", "free": "trajectory"}[sc.potential.kind]
    header, cols, metrics, tol = _RUNNERS[mode](sc, sc.grid.points())
    if sc.mode == "verify" and isinstance(sc.potential, Free) and sc.E > 0:
        sweep = replace(sc, mode="classical-limit", grid=Grid(0.0, 5.0, 2),
                        sweep=tuple(2.0**-i for i in range(7)))
        _, _, m2, t2 = _classical_limit(sweep, None)
        m3, t3 = _divergence_metrics()
        metrics.update(m2, **m3)
        tol.update(t2, **t3)
    return header, cols, metrics, tol


def _violations(metrics, tol, scale):
    bad = [k for k, t in sorted(tol.items()) if not metrics[k] <= t * scale]
    if "converged_matches_symmetry" in metrics and not metrics["converged_matches_symmetry"]:
        bad.append("converged_matches_symmetry")
    return bad


def run(sc: Scenario, out_dir: str = "out", tolerance_scale: float = 1.0) -> int:
    """Evaluate ``sc``, write outputs and return the exit code."""
    header, cols, metrics, tol = _evaluate(sc)
    bad = _violations(metrics, tol, tolerance_scale)
    report = {"mode": sc.mode, **metrics,
              "tolerances": {k: v * tolerance_scale for k, v in tol.items()},
              "violations": bad, "passed": not bad}
    os.makedirs(out_dir, exist_ok=True)
    if sc.mode != "verify":
        with open(os.path.join(out_dir, f"{sc.output}.csv"), "w", newline="", encoding="utf-8") as fh:
            fh.write(_csv_text(header, cols))
    with open(os.path.join(out_dir, f"{sc.output}_report.json"), "w", newline="\n", encoding="utf-8") as fh:
        fh.write(json.dumps(report, indent=2, sort_keys=True) + "\n")
    for k in bad:
        print(f"tolerance exceeded: {k} = {metrics[k]!r} (limit {tol[k] * tolerance_scale if k in tol else 'n/a'})",
              file=sys.stderr)
    return EXIT_TOLERANCE if bad else EXIT_OK


def main(argv=None) -> int:
    p = argparse.ArgumentParser(prog="qtraj", description="Trajectory-representation computations.")
    p.add_argument("mode", choices=MODES)
    p.add_argument("scenario", help="scenario JSON file")
    p.add_argument("--out", default="out", help="output directory (default ./out)")
    p.add_argument("--tolerance-scale", type=float, default=1.0,
                   help="multiply every verification tolerance by this factor")
    args = p.parse_args(argv)
    if not (math.isfinite(args.tolerance_scale) and args.tolerance_scale > 0):
        print("error: --tolerance-scale must be positive", file=sys.stderr)
        return EXIT_INPUT
    try:
        with open(args.scenario, "rb") as fh:
            sc = parse_scenario(fh.read())
        if sc.mode != args.mode:
            raise ParameterError(f"mode: scenario says {sc.mode!r} but {args.mode!r} was requested")
        _threads()
        return run(sc, args.out, args.tolerance_scale)
    except (OSError, QTrajError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
