"""``fegkp run``: execute one scenario from a JSON config and write machine-readable results.

Exit codes: 0 success, 1 validation error, 2 resource budget exceeded, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import copy
import datetime as _dt
import json
import math
import os
import platform
import sys
import tempfile
from pathlib import Path

import numpy as np

from . import gkp
from .errors import (
    ConfigError, DegenerateBranchError, DimensionBudgetError, InputError, ScheduleValidationError, TruncationError,
)
from .fock import FockSpace, wigner, write_wigner_csv
from .interaction import comb_convergence
from .linalg import kron_states, partial_trace
from .protocols import (
    compile_cluster1d, compile_cnot2, compile_ghz, compile_pauli, compile_readout, compile_rotation, execute,
    outcome_probabilities,
)
from .qec import NoiseSpec, qec_experiment

SCHEMA_VERSION = 1

SCENARIOS = ("pauli", "readout", "rotation", "cnot2", "ghz", "cluster1d", "qec", "comb-convergence", "wigner-dump")

DEFAULTS = {
    "scenario": None,
    "delta": 0.25,
    "cutoff": 150,
    "seed": 0,
    "mode": "enumerate",
    "out": "fegkp-out",
    "axis": "Z",
    "angle": math.pi / 4,
    "input": None,
    "modes": 3,
    "noise": {"kind": "displacement", "sigma": 0.1, "eta": 1.0},
    "rounds": 2,
    "trials": 200,
    "shots": None,
    "g": 0.5,
    "sigmas": [2, 4, 8],
    "wigner": None,
}

# sweep values for these keys stay strings ("input=0,1" means labels, not numbers)
_STRING_KEYS = ("scenario", "mode", "out", "axis", "input")

_WIGNER_DEFAULTS = {"extent": 4.0, "points": 81}

_INPUT_DEFAULTS = {"pauli": "0", "readout": "0", "rotation": "+", "qec": "0", "wigner-dump": "0"}

_HELP = """\
config keys (JSON object; unknown keys are rejected):
  scenario   one of: {scenarios}  (required)
  delta      GKP envelope, 0 < delta < 1             (default 0.25)
  cutoff     Fock cutoff per mode, 4..300             (default 150)
  seed       RNG seed, integer >= 0                   (default 0)
  mode       enumerate | sample                       (default enumerate)
  out        output directory                         (default fegkp-out)
  axis       X | Y | Z  for pauli/readout/rotation    (default Z)
  angle      rotation angle in radians                (default pi/4)
  input      logical input 0 | 1 | + | -              (default per scenario)
  modes      mode count for ghz/cluster1d, >= 2       (default 3)
  noise      {{"kind": "displacement"|"loss", "sigma": s, "eta": e}}
  rounds     qec rounds >= 1                          (default 2)
  trials     qec trials >= 2                          (default 200)
  shots      qec electron shots per basis or null     (default null = exact)
  g          comb-convergence coupling, number or [re, im] (default 0.5)
  sigmas     comb widths for comb-convergence         (default [2, 4, 8])
  wigner     null or {{"extent": x, "points": odd n}}  Wigner grid per mode
""".format(scenarios=", ".join(SCENARIOS))


# --- config ------------------------------------------------------------------

def _fail(msg, key=None):
    loc = "$" if key is None else f"$.{key}"
    raise ConfigError(f"{loc}: {msg}", key=key, location=loc)


def _number(cfg, key, lo=None, hi=None, integer=False, lo_open=False, hi_open=False, prefix=""):
    v = cfg[key]
    key = prefix + key
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        _fail(f"{key} must be a finite number", key)
    if integer and int(v) != v:
        _fail(f"{key} must be an integer", key)
    if lo is not None and (v < lo or (lo_open and v == lo)):
        _fail(f"{key} must be {'>' if lo_open else '≥'} {lo}", key)
    if hi is not None and (v > hi or (hi_open and v == hi)):
        _fail(f"{key} must be {'<' if hi_open else '≤'} {hi}", key)
    return int(v) if integer else float(v)


def _complex(v, key):
    if isinstance(v, (int, float)) and not isinstance(v, bool):
        return [float(v), 0.0]
    if isinstance(v, list) and len(v) == 2 and all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in v):
        return [float(v[0]), float(v[1])]
    _fail(f"{key} must be a number or an [re, im] pair", key)


def parse_config(text: str, overrides: dict | None = None) -> dict:
    """Validate a JSON config and return the fully resolved dict."""
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON at line {exc.lineno} column {exc.colno}: {exc.msg}",
                          location=f"line {exc.lineno}:{exc.colno}") from None
    if not isinstance(raw, dict):
        _fail("config must be a JSON object")
    for key in raw:
        if key not in DEFAULTS:
            _fail(f"unknown key {key!r}", key)
    cfg = copy.deepcopy(DEFAULTS)
    cfg.update(raw)
    for key, val in (overrides or {}).items():
        if val is not None:
            cfg[key] = val
    if cfg["scenario"] not in SCENARIOS:
        _fail(f"scenario must be one of {', '.join(SCENARIOS)}", "scenario")
    sc = cfg["scenario"]
    cfg["delta"] = _number(cfg, "delta", 0, 1, lo_open=True, hi_open=True)
    cfg["cutoff"] = _number(cfg, "cutoff", 4, 300, integer=True)
    cfg["seed"] = _number(cfg, "seed", 0, integer=True)
    if cfg["mode"] not in ("enumerate", "sample"):
        _fail("mode must be enumerate or sample", "mode")
    if not isinstance(cfg["out"], str) or not cfg["out"]:
        _fail("out must be a non-empty path string", "out")
    if not isinstance(cfg["axis"], str) or cfg["axis"].upper() not in ("X", "Y", "Z"):
        _fail("axis must be X, Y or Z", "axis")
    cfg["axis"] = cfg["axis"].upper()
    cfg["angle"] = _number(cfg, "angle")
    if cfg["input"] is None:
        cfg["input"] = _INPUT_DEFAULTS.get(sc)
    elif cfg["input"] not in gkp.LOGICAL_LABELS:
        _fail(f"input must be one of {', '.join(gkp.LOGICAL_LABELS)}", "input")
    cfg["modes"] = _number(cfg, "modes", integer=True)
    if cfg["modes"] < 2:
        _fail("modes must be ≥ 2", "modes")
    noise = cfg["noise"]
    if not isinstance(noise, dict):
        _fail("noise must be an object", "noise")
    for k in noise:
        if k not in ("kind", "sigma", "eta"):
            _fail(f"unknown key {k!r}", f"noise.{k}")
    noise = {**DEFAULTS["noise"], **noise}
    if noise["kind"] not in ("displacement", "loss"):
        _fail("kind must be displacement or loss", "noise.kind")
    noise["sigma"] = _number(noise, "sigma", 0, prefix="noise.")
    noise["eta"] = _number(noise, "eta", 0, 1, lo_open=True, prefix="noise.")
    cfg["noise"] = noise
    cfg["rounds"] = _number(cfg, "rounds", 1, integer=True)
    cfg["trials"] = _number(cfg, "trials", 2, integer=True)
    if cfg["shots"] is not None:
        cfg["shots"] = _number(cfg, "shots", 1, integer=True)
    cfg["g"] = _complex(cfg["g"], "g")
    if not isinstance(cfg["sigmas"], list) or not cfg["sigmas"]:
        _fail("sigmas must be a non-empty list", "sigmas")
    for i, s in enumerate(cfg["sigmas"]):
        if isinstance(s, bool) or not isinstance(s, (int, float)) or not s > 0:
            _fail("sigmas entries must be positive numbers", f"sigmas[{i}]")
    if cfg["wigner"] is not None:
        w = cfg["wigner"]
        if not isinstance(w, dict):
            _fail("wigner must be null or an object", "wigner")
        for k in w:
            if k not in _WIGNER_DEFAULTS:
                _fail(f"unknown key {k!r}", f"wigner.{k}")
        w = {**_WIGNER_DEFAULTS, **w}
        w["extent"] = _number(w, "extent", 0, lo_open=True, prefix="wigner.")
        w["points"] = _number(w, "points", 3, 401, integer=True, prefix="wigner.")
        if w["points"] % 2 == 0:
            _fail("points must be odd so the grid contains the origin", "wigner.points")
        cfg["wigner"] = w
    elif sc == "wigner-dump":
        cfg["wigner"] = dict(_WIGNER_DEFAULTS)
    return cfg


# --- scenario runners ---------------------------------------------------------

def _cplx(z):
    z = complex(z)
    return [z.real, z.imag]


_LOGICAL_AMPS = {
    "0": (1, 0), "1": (0, 1), "+": (1 / math.sqrt(2), 1 / math.sqrt(2)), "-": (1 / math.sqrt(2), -1 / math.sqrt(2)),
}


def _logical_rotation(axis: str, angle: float, amps) -> tuple:
    c, s = math.cos(angle / 2), math.sin(angle / 2)
    pauli = {"X": np.array([[0, 1], [1, 0]]), "Y": np.array([[0, -1j], [1j, 0]]), "Z": np.diag([1, -1])}[axis]
    out = (c * np.eye(2) - 1j * s * pauli) @ np.asarray(amps, dtype=complex)
    return tuple(out)


def _record_dict(rec) -> dict:
    return {
        "outcomes": list(rec.outcomes),
        "probability": rec.probability,
        "leakage": rec.leakage,
        "frame": [{"delta": _cplx(f.delta), "quarter_turns": f.quarter_turns} for f in rec.frame],
    }


def _run_schedule(cfg, schedule, initial):
    if cfg["mode"] == "sample":
        return execute(schedule, initial, "sample", seed=cfg["seed"])
    return execute(schedule, initial)


def _register(code, labels):
    state = gkp.gkp_state(code, labels[0])
    for lab in labels[1:]:
        state = kron_states(state, gkp.gkp_state(code, lab))
    return state


def _scenario_single(cfg, code):
    sc, axis, label = cfg["scenario"], cfg["axis"], cfg["input"]
    amps = _LOGICAL_AMPS[label]
    if sc == "pauli":
        schedule = compile_pauli(code, axis)
        target = _logical_rotation(axis, math.pi, amps)
    elif sc == "readout":
        schedule = compile_readout(code, axis)
        target = None
    else:
        schedule = compile_rotation(code, axis, cfg["angle"])
        target = _logical_rotation(axis, cfg["angle"], amps)
    records = _run_schedule(cfg, schedule, gkp.gkp_state(code, label))
    rows = []
    for rec in records:
        row = _record_dict(rec)
        logical = rec.logical_state()
        if target is not None:
            row["logical_fidelity"] = gkp.logical_fidelity(logical, code, target)
        else:
            eig = _readout_eigenstate(axis, rec.outcomes[0])
            row["logical_fidelity"] = gkp.logical_fidelity(logical, code, eig)
        for basis in ("Z", "X"):
            dec = gkp.decode_logical(logical, code, basis)
            row[f"decode_{basis}"] = {"bit": dec.bit, "confidence": dec.confidence}
        rows.append(row)
    return {"probabilities": outcome_probabilities(records), "records": rows}, records


def _readout_eigenstate(axis, outcome):
    s = 1 if outcome == "0" else -1
    r2 = 1 / math.sqrt(2)
    return {"Z": ((1, 0) if s > 0 else (0, 1)), "X": (r2, s * r2), "Y": (r2, s * 1j * r2)}[axis]


def _scenario_cnot2(cfg, code):
    schedule = compile_cnot2(code)
    table = {}
    for inp, want in (("00", "00"), ("01", "01"), ("10", "11"), ("11", "10")):
        recs = _run_schedule(cfg, schedule, _register(code, inp))
        agree = sum(r.probability * gkp.bit_distribution(r.logical_state(), code, "ZZ")[want] for r in recs)
        table[inp] = {"expected": want, "agreement": agree}
    recs = _run_schedule(cfg, schedule, _register(code, "+0"))
    bell = {p: sum(r.probability * gkp.pauli_expectation(r.logical_state(), code, p) for r in recs)
            for p in ("XX", "ZZ")}
    return {"truth_table": table, "bell": bell, "records": [_record_dict(r) for r in recs],
            "probabilities": outcome_probabilities(recs)}, recs


def _stabilizers(kind, m):
    if kind == "ghz":
        out = ["X" * m]
        out += ["I" * i + "ZZ" + "I" * (m - i - 2) for i in range(m - 1)]
        return out
    out = []
    for i in range(m):
        s = ["I"] * m
        s[i] = "X"
        if i > 0:
            s[i - 1] = "Z"
        if i < m - 1:
            s[i + 1] = "Z"
        out.append("".join(s))
    return out


def _scenario_multi(cfg, code):
    m = cfg["modes"]
    kind = cfg["scenario"]
    schedule = compile_ghz(code, m) if kind == "ghz" else compile_cluster1d(code, m)
    recs = _run_schedule(cfg, schedule, _register(code, "0" * m))
    stabs = {p: sum(r.probability * gkp.pauli_expectation(r.logical_state(), code, p) for r in recs)
             for p in _stabilizers(kind, m)}
    return {"stabilizers": stabs, "probabilities": outcome_probabilities(recs),
            "records": [_record_dict(r) for r in recs]}, recs


def _scenario_qec(cfg, code, out_dir):
    n = cfg["noise"]
    noise = NoiseSpec(n["kind"], n["sigma"], n["eta"], cfg["seed"])
    trace = qec_experiment(code, noise, cfg["rounds"], cfg["trials"], cfg["seed"], cfg["input"], cfg["shots"])
    _atomic_write(out_dir / "trace.csv", _trace_csv(trace))
    return {"trace": trace.to_rows(), "separation_stderr": trace.separation()}, None


def _trace_csv(trace) -> str:
    lines = ["round,mean,stderr,uncorrected_mean,uncorrected_stderr"]
    for row in trace.to_rows():
        lines.append(",".join(repr(row[k]) if isinstance(row[k], float) else str(row[k])
                              for k in ("round", "mean", "stderr", "uncorrected_mean", "uncorrected_stderr")))
    return "\n".join(lines) + "\n"


def _write_wigners(cfg, state, out_dir) -> dict:
    w = cfg["wigner"]
    grid = np.linspace(-w["extent"], w["extent"], w["points"])
    out = {}
    for mode in range(1, len(state.dims) + 1):
        rho = state if len(state.dims) == 1 else partial_trace(state, [mode - 1])
        vals = wigner(rho, grid, grid)
        path = out_dir / f"wigner_{mode}.csv"
        _atomic_write_with(path, lambda tmp: write_wigner_csv(tmp, vals, grid, grid))
        mid = w["points"] // 2
        out[str(mode)] = {"file": path.name, "origin": float(vals[mid, mid])}
    return out


def run_scenario(cfg: dict, out_dir: Path) -> dict:
    sc = cfg["scenario"]
    code = gkp.square_code(cfg["delta"], FockSpace(cfg["cutoff"]))
    records = None
    if sc in ("pauli", "readout", "rotation"):
        res, records = _scenario_single(cfg, code)
    elif sc == "cnot2":
        res, records = _scenario_cnot2(cfg, code)
    elif sc in ("ghz", "cluster1d"):
        res, records = _scenario_multi(cfg, code)
    elif sc == "qec":
        res, _ = _scenario_qec(cfg, code, out_dir)
    elif sc == "comb-convergence":
        fids = comb_convergence(complex(*cfg["g"]), cfg["sigmas"], code.fock)
        res = {"sigmas": cfg["sigmas"], "fidelities": fids}
    else:
        res = {"input": cfg["input"]}
    if cfg["wigner"] is not None:
        if sc == "wigner-dump":
            res["wigner"] = _write_wigners(cfg, gkp.gkp_state(code, cfg["input"]), out_dir)
        elif records:
            res["wigner"] = _write_wigners(cfg, records[0].logical_state(), out_dir)
    return res


# --- output -------------------------------------------------------------------

def _atomic_write_with(path: Path, writer) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    os.close(fd)
    try:
        writer(tmp)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _atomic_write(path: Path, text: str) -> None:
    def writer(tmp):
        with open(tmp, "w") as fh:
            fh.write(text)

    _atomic_write_with(path, writer)


def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=True) + "\n"


def _error_object(exc, code) -> dict:
    err = {"exit_code": code, "type": type(exc).__name__, "message": str(exc)}
    for attr in ("key", "location", "required_bytes", "budget_bytes", "required_cutoff"):
        val = getattr(exc, attr, None)
        if val is not None:
            err[attr] = val
    return err


def _exit_code(exc) -> int:
    if isinstance(exc, DimensionBudgetError):
        return 2
    if isinstance(exc, (ConfigError, ScheduleValidationError, InputError)) and not isinstance(exc, TruncationError):
        return 1
    return 3


def run_config(cfg: dict, stderr=None) -> int:
    """Run a resolved config; write artifacts under ``cfg["out"]``; return the exit code."""
    stderr = stderr or sys.stderr
    out_dir = Path(cfg["out"])
    out_dir.mkdir(parents=True, exist_ok=True)
    started = _dt.datetime.now(_dt.timezone.utc).isoformat()
    _atomic_write(out_dir / "resolved-config.json", _dumps(cfg))
    try:
        with np.errstate(over="raise", invalid="raise", divide="raise"):
            res = run_scenario(cfg, out_dir)
    except (ConfigError, InputError, ScheduleValidationError, DimensionBudgetError, TruncationError,
            DegenerateBranchError, FloatingPointError, np.linalg.LinAlgError, MemoryError) as exc:
        code = _exit_code(exc)
        err = _error_object(exc, code)
        _atomic_write(out_dir / "error.json", _dumps(err))
        print(json.dumps(err, sort_keys=True), file=stderr)
        return code
    # the output location does not affect results, so reruns elsewhere stay byte-identical
    echoed = {k: v for k, v in cfg.items() if k != "out"}
    doc = {"schema_version": SCHEMA_VERSION, "scenario": cfg["scenario"], "config": echoed, "results": res}
    _atomic_write(out_dir / "results.json", _dumps(doc))
    meta = {
        "started": started,
        "finished": _dt.datetime.now(_dt.timezone.utc).isoformat(),
        "python": platform.python_version(),
        "numpy": np.__version__,
    }
    _atomic_write(out_dir / "metadata.json", _dumps(meta))
    return 0


def _parse_sweep(spec: str):
    if "=" not in spec:
        raise ConfigError(f"--sweep expects key=v1,v2, got {spec!r}", location="--sweep")
    key, vals = spec.split("=", 1)
    key = key.strip()
    out = []
    for v in vals.split(","):
        if key in _STRING_KEYS:
            out.append(v)
            continue
        try:
            out.append(json.loads(v))
        except json.JSONDecodeError:
            out.append(v)
    return key, out


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fegkp", description="Free-electron GKP scenario runner.",
                                formatter_class=argparse.RawDescriptionHelpFormatter, epilog=_HELP)
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run one scenario", formatter_class=argparse.RawDescriptionHelpFormatter,
                       epilog=_HELP)
    r.add_argument("--config", required=True, help="path to a JSON config")
    r.add_argument("--seed", type=int, help="override the config seed")
    r.add_argument("--out", help="override the output directory")
    r.add_argument("--mode", choices=("enumerate", "sample"), help="override the execution mode")
    r.add_argument("--sweep", help="repeat the run for key=v1,v2,...; outputs go to OUT/key=value/")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        text = Path(args.config).read_text()
        overrides = {"seed": args.seed, "out": args.out, "mode": args.mode}
        if args.sweep:
            key, values = _parse_sweep(args.sweep)
            base = parse_config(text, overrides)
            if key not in DEFAULTS:
                raise ConfigError(f"unknown sweep key {key!r}", key=key, location="--sweep")
            status = 0
            for v in values:
                sub = {**overrides, key: v, "out": str(Path(base["out"]) / f"{key}={v}")}
                status = max(status, run_config(parse_config(text, sub)))
            return status
        cfg = parse_config(text, overrides)
    except (ConfigError, OSError) as exc:
        err = _error_object(exc, 1)
        print(json.dumps(err, sort_keys=True), file=sys.stderr)
        return 1
    return run_config(cfg)


if __name__ == "__main__":
    sys.exit(main())
