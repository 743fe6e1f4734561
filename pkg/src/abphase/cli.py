"""Command-line runner: ``abphase run | suite | sweep``.

Exit status: 0 success, 2 invalid configuration, 3 numerical admission failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .aharonov_bohm import (FORMALISMS, ElectricScenario, MagneticScenario, gauge_transform_check,
                            random_gauge, simulate_electric_ab, simulate_magnetic_ring,
                            write_frame_csv, write_summary_json, write_timeseries_csv)
from .errors import ConfigError, ParseError, PhaseSpaceError, ValidationError
from .io import atomic_write_text
from .moyal import HamiltonianSpec, evolve_wigner, stable_dt
from .states import PhaseGrid, PhysicalConstants, make_gaussian_packet
from .suite import run_property_suite
from .wigner import marginal_position, wigner_from_position

SCENARIOS = ("free", "electric", "magnetic", "gauge-check", "property-suite")
EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL = 0, 2, 3

_COMMON = {"scenario", "hbar", "mass", "charge", "omega", "formalism", "stride", "out", "n_times"}
_KEYS = {
    "free": {"center", "momentum", "width", "t_final", "half_width", "n"},
    "electric": {"dphi", "phi1", "phi2", "tau", "e0", "split", "packet_width", "half_width",
                 "n", "sb_size"},
    "magnetic": {"solenoid_radius", "field", "ring_radius", "tau", "p0", "split", "n_ring",
                 "sb_size"},
    "gauge-check": {"target", "n_gauges", "seed", "ring_shifts"},
    "property-suite": {"seed"},
}


@dataclass
class RunConfig:
    scenario: str
    consts: PhysicalConstants
    params: dict = field(default_factory=dict)
    formalism: str = "both"
    stride: int = 0
    out: str | None = None
    n_times: int = 9

    @property
    def formalisms(self):
        return FORMALISMS if self.formalism == "both" else (self.formalism,)


def _number(doc, key, positive=False, integer=False):
    v = doc[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ValidationError(key, "must be a number")
    if integer and int(v) != v:
        raise ValidationError(key, "must be an integer")
    if not np.isfinite(v):
        raise ValidationError(key, "must be finite")
    if positive and not v > 0:
        raise ValidationError(key, "must be positive")
    return int(v) if integer else float(v)


def parse_config(text) -> RunConfig:
    """Parse and validate a JSON run configuration, applying defaults."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno) from None
    if not isinstance(doc, dict):
        raise ParseError("top level must be a JSON object", 1)
    kind = doc.get("scenario")
    if kind not in SCENARIOS:
        raise ValidationError("scenario", f"must be one of {', '.join(SCENARIOS)}, got {kind!r}")
    unknown = set(doc) - _COMMON - _KEYS[kind]
    if unknown:
        name = sorted(unknown)[0]
        raise ValidationError(name, f"not a parameter of the {kind} scenario")
    consts = {}
    for key in ("hbar", "mass", "charge", "omega"):
        if key in doc:
            consts[key] = _number(doc, key, positive=(key != "charge"))
    formalism = doc.get("formalism", "both")
    if formalism not in FORMALISMS + ("both",):
        raise ValidationError("formalism", "must be wigner, segal-bargmann or both")
    stride = _number(doc, "stride", integer=True) if "stride" in doc else 0
    if stride < 0:
        raise ValidationError("stride", "must be >= 0")
    n_times = _number(doc, "n_times", integer=True) if "n_times" in doc else 9
    if n_times < 2:
        raise ValidationError("n_times", "must be >= 2")
    params = {k: doc[k] for k in _KEYS[kind] if k in doc}
    for k in params:
        if k == "ring_shifts":
            if not (isinstance(params[k], list) and all(isinstance(v, int) for v in params[k])):
                raise ValidationError(k, "must be a list of integers")
        elif k != "target":
            _number(params, k)
    cfg = RunConfig(kind, PhysicalConstants(**consts), params, formalism, stride, doc.get("out"), n_times)
    build_scenario(cfg)  # surfaces scenario-level validation now
    return cfg


def _get(params, key, default, positive=False, integer=False):
    if key not in params:
        return default
    return _number(params, key, positive, integer)


def _electric(p, c):
    phi1 = _get(p, "phi1", 0.0)
    if "dphi" in p and "phi2" in p:
        raise ValidationError("dphi", "give either dphi or phi2, not both")
    phi2 = _get(p, "phi2", phi1 + _get(p, "dphi", 0.25))
    kw = dict(phi1=phi1, phi2=phi2, consts=c)
    for key in ("tau", "e0", "packet_width", "half_width"):
        if key in p:
            kw[key] = _get(p, key, None, positive=True)
    if "split" in p:
        kw["split"] = _get(p, "split", 0.5)
    if "n" in p:
        kw["n_grid"] = _get(p, "n", None, positive=True, integer=True)
    if "sb_size" in p:
        kw["sb_size"] = _get(p, "sb_size", None, positive=True, integer=True)
    kw.setdefault("tau", 2 * np.pi / kw.get("e0", 0.5))
    try:
        return ElectricScenario(**kw)
    except ValueError as exc:
        raise ValidationError(_field_of(exc, kw), str(exc)) from None


def _magnetic(p, c):
    kw = dict(consts=c)
    for key, name in (("solenoid_radius", "solenoid_radius"), ("field", "field_strength"),
                      ("ring_radius", "ring_radius"), ("tau", "tau"), ("p0", "p0")):
        if key in p:
            kw[name] = _get(p, key, None, positive=(key != "field"))
    if "split" in p:
        kw["split"] = _get(p, "split", 0.5)
    for key in ("n_ring", "sb_size"):
        if key in p:
            kw[key] = _get(p, key, None, positive=True, integer=True)
    kw.setdefault("tau", 4 * np.pi / (kw.get("p0", 1.0) ** 2 / (2 * c.mass)))
    try:
        return MagneticScenario(**kw)
    except ValueError as exc:
        if "ring radius" in str(exc):
            raise ValidationError("ring_radius", "ring radius must exceed solenoid radius") from None
        raise ValidationError(_field_of(exc, kw), str(exc)) from None


def build_scenario(cfg: RunConfig):
    p, c = cfg.params, cfg.consts
    if cfg.scenario == "electric":
        return _electric(p, c)
    if cfg.scenario == "magnetic":
        return _magnetic(p, c)
    if cfg.scenario == "gauge-check":
        target = p.get("target", "electric")
        if target == "electric":
            return ElectricScenario(consts=c)
        if target == "magnetic":
            return MagneticScenario(consts=c)
        raise ValidationError("target", "must be electric or magnetic")
    return None


def _field_of(exc, kw):
    text = str(exc)
    for name in kw:
        if text.startswith(name):
            return name
    return "scenario"


# -- runs -------------------------------------------------------------------


def _run_scenario(cfg, scn):
    sim = simulate_electric_ab if isinstance(scn, ElectricScenario) else simulate_magnetic_ring
    results = {f: sim(scn, f, cfg.n_times, cfg.stride) for f in cfg.formalisms}
    primary = results[cfg.formalisms[0]]
    summary = dict(primary.summary())
    summary["scenario"] = cfg.scenario
    summary["formalisms"] = {f: r.summary() for f, r in results.items()}
    if len(results) == 2:
        a, b = results.values()
        summary["pairwise_phase_deviation"] = abs(
            float(np.angle(np.exp(1j * (a.final_phase - b.final_phase)))))
        summary["pairwise_prob_deviation"] = abs(a.prob_at_tau - b.prob_at_tau)
    files = {"result.json": summary}
    files["timeseries.csv"] = primary
    if len(results) == 2:
        for f, r in results.items():
            files[f"timeseries_{f}.csv"] = r
    for k, frame in enumerate(primary.frames):
        files[f"frame_{k}.csv"] = frame
    return files


def _run_free(cfg):
    p, c = cfg.params, cfg.consts
    n = _get(p, "n", 256, positive=True, integer=True)
    half = _get(p, "half_width", float(np.sqrt(n * np.pi * c.hbar / 2)), positive=True)
    grid = PhaseGrid.symmetric(half, n, c.hbar)
    q0, p0 = _get(p, "center", -2.0), _get(p, "momentum", 1.0)
    width = _get(p, "width", 1.0, positive=True)
    t_final = _get(p, "t_final", 1.0, positive=True)
    psi = make_gaussian_packet(grid, q0, p0, width, c)
    w0 = wigner_from_position(psi)
    h = HamiltonianSpec(c.mass, c.charge)
    dt = stable_dt(grid, h)
    qq, pp = grid.mesh()

    def exact(t):
        qs = qq - pp * t / c.mass
        return np.exp(-(qs - q0) ** 2 / width**2 - width**2 * (pp - p0) ** 2 / c.hbar**2) / (np.pi * c.hbar)

    times = np.linspace(0.0, t_final, cfg.n_times)
    rows, frames, worst = [], [], 0.0
    w = w0
    for k, t in enumerate(times):
        if k:
            w = evolve_wigner(w, h, t - times[k - 1], dt, t0=times[k - 1])
        worst = max(worst, float(np.max(np.abs(w.values - exact(t)))))
        rows.append((t, w.integral(), 0.0))
        if cfg.stride and k % cfg.stride == 0:
            frames.append((t, grid.q, marginal_position(w), np.zeros(grid.n_q)))
    summary = {"scenario": "free", "max_shear_error": worst,
               "trace_drift": abs(rows[-1][1] - rows[0][1]), "t_final": t_final}
    files = {"result.json": summary, "timeseries.csv": rows}
    for k, frame in enumerate(frames):
        files[f"frame_{k}.csv"] = frame
    return files


def _run_gauge(cfg, scn):
    p = cfg.params
    if isinstance(scn, ElectricScenario):
        rng = np.random.default_rng(_get(p, "seed", 0, integer=True))
        n = _get(p, "n_gauges", 10, positive=True, integer=True)
        devs = [gauge_transform_check(scn, random_gauge(rng)) for _ in range(n)]
        target = "electric"
    else:
        shifts = p.get("ring_shifts", [1, -2, 3])
        devs = [gauge_transform_check(scn, int(k)) for k in shifts]
        target = "magnetic"
    return {"result.json": {"scenario": "gauge-check", "target": target, "deviations": devs,
                            "max_deviation": max(devs)}}


def _run_suite(seed=0):
    checks = run_property_suite(seed)
    passed = sum(c.passed for c in checks)
    return {"result.json": {"scenario": "property-suite", "passed": passed,
                            "failed": len(checks) - passed,
                            "checks": [{"name": c.name, "value": c.value, "tol": c.tol,
                                        "passed": c.passed} for c in checks]}}


def execute(cfg: RunConfig):
    """Run a validated configuration; returns {file name: payload} without writing."""
    if cfg.scenario == "free":
        return _run_free(cfg)
    if cfg.scenario == "property-suite":
        return _run_suite(_get(cfg.params, "seed", 0, integer=True))
    scn = build_scenario(cfg)
    if cfg.scenario == "gauge-check":
        return _run_gauge(cfg, scn)
    return _run_scenario(cfg, scn)


def write_outputs(files, out_dir):
    """Everything is computed before the first write; each file lands by rename."""
    out = Path(out_dir)
    for name, payload in files.items():
        path = out / name
        if name.endswith(".json"):
            write_summary_json(payload, path)
        elif name.startswith("frame_"):
            write_frame_csv(payload, path)
        elif hasattr(payload, "times"):
            write_timeseries_csv(payload, path)
        else:
            lines = ["t,prob,phase"] + [f"{t:.17g},{pr:.17g},{ph:.17g}" for t, pr, ph in payload]
            atomic_write_text(path, "\n".join(lines) + "\n")


def _load(path):
    try:
        return Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise ParseError(f"cannot read {path}: {exc}") from None


def _cmd_run(args):
    cfg = parse_config(_load(args.config))
    if args.stride is not None:
        if args.stride < 0:
            raise ValidationError("stride", "must be >= 0")
        cfg.stride = args.stride
    files = execute(cfg)
    out = args.out or cfg.out or "abphase-out"
    write_outputs(files, out)
    print(json.dumps(files["result.json"], sort_keys=True))


def _cmd_suite(args):
    files = _run_suite(args.seed)
    res = files["result.json"]
    for c in res["checks"]:
        print(f"{'PASS' if c['passed'] else 'FAIL'}  {c['name']}: {c['value']:.3e} (tol {c['tol']:.0e})")
    print(f"{res['passed']} passed, {res['failed']} failed")
    if args.out:
        write_outputs(files, args.out)
    return EXIT_OK if res["failed"] == 0 else EXIT_NUMERICAL


def _cmd_sweep(args):
    text = _load(args.config)
    base = json.loads(text) if text.strip() else {}
    parse_config(text)
    try:
        values = [float(v) for v in args.values.split(",") if v.strip()]
    except ValueError:
        raise ValidationError("values", "must be a comma-separated list of numbers") from None
    if not values:
        raise ValidationError("values", "need at least one value")
    runs = []
    for v in values:
        doc = dict(base)
        doc[args.param] = v
        runs.append((v, parse_config(json.dumps(doc))))
    out = Path(args.out or base.get("out") or "abphase-sweep")
    all_files, rows = {}, []
    for k, (v, cfg) in enumerate(runs):
        files = execute(cfg)
        for name, payload in files.items():
            all_files[f"run_{k}/{name}"] = payload
        res = files["result.json"]
        for f, s in res.get("formalisms", {"-": res}).items():
            rows.append((v, f, s.get("phase", float("nan")), s.get("closed_form_phase", float("nan")),
                         s.get("deviation", float("nan")), s.get("prob_at_tau", float("nan"))))
    write_outputs(all_files, out)
    lines = [f"{args.param},formalism,phase,closed_form_phase,deviation,prob_at_tau"]
    lines += [f"{v:.17g},{f},{a:.17g},{b:.17g},{d:.17g},{pr:.17g}" for v, f, a, b, d, pr in rows]
    atomic_write_text(out / "sweep.csv", "\n".join(lines) + "\n")
    print("\n".join(lines))


def build_parser():
    ap = argparse.ArgumentParser(prog="abphase",
                                 description="Aharonov-Bohm phases in Wigner and Segal-Bargmann phase space")
    sub = ap.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run one scenario from a JSON config")
    run.add_argument("config")
    run.add_argument("--out")
    run.add_argument("--stride", type=int)
    suite = sub.add_parser("suite", help="run the invariant batteries")
    suite.add_argument("--seed", type=int, default=0)
    suite.add_argument("--out")
    sweep = sub.add_parser("sweep", help="repeat a run over values of one parameter")
    sweep.add_argument("config")
    sweep.add_argument("--param", required=True)
    sweep.add_argument("--values", required=True)
    sweep.add_argument("--out")
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    handler = {"run": _cmd_run, "suite": _cmd_suite, "sweep": _cmd_sweep}[args.command]
    try:
        status = handler(args)
    except ConfigError as exc:
        print(f"abphase: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except PhaseSpaceError as exc:
        print(f"abphase: numerical admission failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK if status is None else status


if __name__ == "__main__":
    sys.exit(main())
