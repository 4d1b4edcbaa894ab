"""Batch front end: ``pucci1d omega|solve|branch|certify|sweep --config cfg.json --out dir``."""

from __future__ import annotations

import argparse
import copy
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from importlib import resources
from pathlib import Path

import jsonschema
import numpy as np

from .bvp import DiscreteOperator, continuation, default_L, resample, solve_full
from .certify import (NotApplicableError, NotFoundError, nonexistence_certificate,
                      prop29_diagnostics, single_max_check, xnorm)
from .homoclinic import DomainTooSmallError, build_omega
from .model import (Bump, InvalidNonlinearityError, InvalidPotentialError, Nonlinearity, Potential,
                    Profile, PucciParams, Sign, select_kappa0, validate_nonlinearity,
                    validate_potential)
from .scalar import LandscapeError, ScalarLandscape

SCHEMA_VERSION = 1
TASKS = ("omega", "solve", "branch", "certify", "sweep")
EXIT_OK, EXIT_CONFIG, EXIT_VALIDATION, EXIT_NOCONV, EXIT_CERT = 0, 1, 2, 3, 4
STATUS = {EXIT_OK: "ok", EXIT_CONFIG: "config_error", EXIT_VALIDATION: "validation_failed",
          EXIT_NOCONV: "no_convergence", EXIT_CERT: "certificate_violation"}


class ConfigError(ValueError):
    pass


def load_schema(name: str) -> dict:
    """``"config"`` or ``"report"``."""
    text = resources.files("pucci1d").joinpath(f"schema/{name}.schema.json").read_text()
    return json.loads(text)


def _clean(obj):
    """JSON-safe copy: numpy scalars unwrapped, non-finite floats mapped to ``None``."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj) if math.isfinite(obj) else None
    if hasattr(obj, "value") and isinstance(getattr(obj, "value"), str):
        return obj.value
    return obj


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(_clean(payload), indent=2, sort_keys=True, allow_nan=False) + "\n")


def parse_config(text: str) -> dict:
    """Parse and schema-check a scenario document; errors carry line or field information."""
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    validator = jsonschema.Draft202012Validator(load_schema("config"))
    errors = sorted(validator.iter_errors(cfg), key=lambda e: list(e.absolute_path))
    if errors:
        msgs = ["/".join(str(p) for p in e.absolute_path) or "<root>" for e in errors]
        raise ConfigError("; ".join(f"field {m}: {e.message}" for m, e in zip(msgs, errors)))
    return cfg


class Scenario:
    """Typed view of a parsed config."""

    def __init__(self, cfg: dict, base_dir: Path):
        self.raw = cfg
        self.base_dir = base_dir
        self.task = cfg.get("task")
        self.name = cfg.get("name")
        self.options = dict(cfg.get("options", {}))
        try:
            p = cfg["params"]
            self.params = PucciParams(float(p["lambda"]), float(p["Lambda"]), Sign(p.get("branch", "plus")))
            self.f = Nonlinearity.from_dict(cfg["nonlinearity"])
            pot = cfg.get("potential", {"kind": "constant", "value": 1.0})
            self.V = Potential.from_dict(pot)
        except (InvalidNonlinearityError, InvalidPotentialError, ValueError, KeyError, TypeError) as exc:
            raise ConfigError(f"invalid descriptor: {exc}") from None
        self.hypothesis = cfg.get("hypothesis")
        g = cfg.get("grid", {})
        self.h = float(g.get("h", 1e-3 if self.task == "omega" else 1e-2))
        self.L = float(g["L"]) if "L" in g else (30.0 if self.task == "omega" else
                                                 default_L(self.params, self.V, self.h))

    def landscape(self) -> ScalarLandscape:
        return ScalarLandscape.build(self.f, self.V.Vinf)

    def operator(self) -> DiscreteOperator:
        kappa0 = self.options.get("kappa0")
        if kappa0 is None:
            try:
                kappa0 = select_kappa0(self.V)
            except InvalidPotentialError:
                # no well to sit in: the bump only matters for forced solves
                kappa0 = 1.0
        return DiscreteOperator(self.params, self.V, self.f, self.L, self.h, Bump(float(kappa0)))

    def validate(self) -> dict:
        rep = {"nonlinearity": validate_nonlinearity(self.f).to_dict()}
        ok = rep["nonlinearity"]["ok"]
        if self.hypothesis:
            vr = validate_potential(self.V, self.hypothesis, self.params)
            rep["potential"] = vr.to_dict()
            ok = ok and vr.ok
        rep["ok"] = bool(ok)
        return rep


def _omega_on(sc: Scenario, branch: Sign, L: float, h: float):
    return build_omega(sc.params.with_branch(branch), sc.landscape(), L=L, h=h)


def _initial_guess(sc: Scenario, op: DiscreteOperator, desc: dict) -> np.ndarray:
    kind = desc.get("kind", "omega")
    if kind == "zero":
        return np.zeros(op.x.size)
    if kind == "csv":
        prof = Profile.from_csv(sc.base_dir / desc["path"])
        return resample(prof, op.L, op.h, float(desc.get("shift", 0.0))).values
    if kind == "omega":
        L_om = float(desc.get("omega_L", 30.0))
        om = _omega_on(sc, sc.params.branch, L_om, op.h)
        scale = float(desc.get("scale", 1.0))
        return scale * resample(om.profile, op.L, op.h, float(desc.get("shift", 0.0))).values
    raise ConfigError(f"field options/init/kind: unknown initial guess {kind!r}")


def _norms(op: DiscreteOperator, prof: Profile, residual: float) -> dict:
    return {"sup": prof.sup(), "xnorm": xnorm(prof, op.eta1), "eta1": op.eta1, "residual": residual}


def _task_omega(sc: Scenario, out: Path, report: dict) -> int:
    ls = sc.landscape()
    report["landscape"] = ls.to_dict()
    branches = sc.options.get("branches", [sc.params.branch.value])
    if branches == "both":
        branches = ["plus", "minus"]
    report["omega"] = {}
    for b in branches:
        om = _omega_on(sc, Sign(b), sc.L, sc.h)
        om.export(out / f"omega_{b}")
        report["artifacts"] += [f"omega_{b}.csv", f"omega_{b}.json"]
        report["omega"][b] = {"max": om.max_value, "y1": om.y1, "c1": om.c1, "c2": om.c2,
                              "glue_dupp": om.glue["dupp"]}
        s1, s2, s1m = om.levels
        report["matching_levels"] = {"s1": s1, "s2": s2, "s1_minus": s1m}
    return EXIT_OK


def _solve(sc: Scenario, op: DiscreteOperator, opts: dict):
    init = _initial_guess(sc, op, opts.get("init", {"kind": "omega"}))
    t = float(opts.get("t", 0.0))
    return solve_full(op, t, init, max_iter=int(opts.get("max_iter", 200)))


def _task_solve(sc: Scenario, out: Path, report: dict) -> int:
    op = sc.operator()
    sol = _solve(sc, op, sc.options)
    prof = sol.profile
    prof.to_csv(out / "solution.csv")
    report["artifacts"].append("solution.csv")
    report["norms"] = _norms(op, prof, sol.residual)
    info = {"converged": sol.converged, "iterations": sol.iterations, "t": float(sc.options.get("t", 0.0)),
            "argmax": prof.argmax()}
    if prof.sup() > 0:
        info["single_max"] = single_max_check(prof)[0]
    if sc.V.kind == "constant" and sol.converged and prof.sup() > 0:
        om = _omega_on(sc, sc.params.branch, op.L, op.h)
        shifted = resample(om.profile, op.L, op.h, prof.argmax()).values
        info["omega_sup_diff"] = float(np.max(np.abs(prof.values - shifted)))
    report["solve"] = info
    return EXIT_OK if sol.converged else EXIT_NOCONV


def _task_branch(sc: Scenario, out: Path, report: dict) -> int:
    op = sc.operator()
    ts = sc.options.get("t_values", [2.0 - 0.25 * k for k in range(9)])
    init = _initial_guess(sc, op, sc.options.get("init", {"kind": "omega"}))
    br = continuation(op, ts, init)
    br.to_csv(out / "branch.csv")
    br.final.profile.to_csv(out / "branch_final.csv")
    report["artifacts"] += ["branch.csv", "branch_final.csv"]
    report["branch"] = [{"t": e.t, "sup_norm": e.sup_norm, "x_norm": e.x_norm, "residual": e.residual,
                         "converged": e.converged} for e in br.entries]
    report["norms"] = _norms(op, br.final.profile, br.final.residual)
    diag = {"M0": br.M0, "eta1": br.eta1}
    if sc.hypothesis == "well" and any(e.converged and e.sup_norm > 0 for e in br.entries):
        try:
            diag["prop_checks"] = prop29_diagnostics(br, sc.V, sc.params, sc.landscape(), op.bump)
        except (NotApplicableError, NotFoundError) as exc:
            diag["prop_checks"] = {"error": str(exc)}
    report["diagnostics"] = diag
    return EXIT_OK if br.final.converged else EXIT_NOCONV


def _task_certify(sc: Scenario, out: Path, report: dict) -> int:
    cand = sc.options.get("candidate", {"kind": "solve"})
    kind = cand.get("kind", "solve")
    if kind == "csv":
        prof = Profile.from_csv(sc.base_dir / cand["path"])
    elif kind == "omega":
        prof = _omega_on(sc, sc.params.branch, sc.L, sc.h).profile
    elif kind == "solve":
        op = sc.operator()
        sol = _solve(sc, op, cand)
        prof = sol.profile
        prof.to_csv(out / "candidate.csv")
        report["artifacts"].append("candidate.csv")
        report["norms"] = _norms(op, prof, sol.residual)
        if not sol.converged:
            report["message"] = "candidate solve did not converge"
            return EXIT_NOCONV
    else:
        raise ConfigError(f"field options/candidate/kind: unknown candidate {kind!r}")
    try:
        cert = nonexistence_certificate(prof, sc.V, sc.params, sc.landscape())
    except (NotApplicableError, NotFoundError) as exc:
        report["message"] = f"certificate not applicable: {exc}"
        return EXIT_VALIDATION
    (out / "certificate.json").write_text(cert.to_json() + "\n")
    report["artifacts"].append("certificate.json")
    report["certificate"] = cert.to_dict()
    report["diagnostics"] = {"narrative": cert.narrative,
                             **{k: v for k, v in cert.meta.items() if k != "reflected"},
                             "reflected": cert.meta.get("reflected", False)}
    expect = sc.options.get("expect", "consistent")
    if expect == "consistent" and cert.broken:
        report["message"] = f"broken link: {cert.broken_link}"
        return EXIT_CERT
    return EXIT_OK


def _merge(base: dict, over: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in over.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = copy.deepcopy(v)
    return out


def _task_sweep(sc: Scenario, out: Path, report: dict) -> int:
    runs = sc.options.get("scenarios")
    if not isinstance(runs, list) or not runs:
        raise ConfigError("field options/scenarios: expected a non-empty list")
    base = {k: v for k, v in sc.raw.items() if k not in ("task", "options", "name")}
    jobs = []
    for i, over in enumerate(runs):
        cfg = _merge(base, over)
        task = cfg.get("task")
        if task not in TASKS or task == "sweep":
            raise ConfigError(f"field options/scenarios/{i}/task: expected one of omega, solve, branch, certify")
        name = cfg.get("name") or f"run{i:03d}"
        jobs.append((name, cfg))
    names = [n for n, _ in jobs]
    if len(set(names)) != len(names):
        raise ConfigError("field options/scenarios: duplicate scenario names")
    workers = int(sc.options.get("workers", 4))

    def run(job):
        name, cfg = job
        sub = out / name
        sub.mkdir(parents=True, exist_ok=True)
        return name, execute(cfg, sub, sc.base_dir)

    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        results = list(pool.map(run, jobs))
    report["runs"] = [{"name": n, "exit_code": c, "status": STATUS[c]} for n, c in results]
    report["artifacts"] += [f"{n}/report.json" for n, _ in results]
    return max(c for _, c in results)


HANDLERS = {"omega": _task_omega, "solve": _task_solve, "branch": _task_branch,
            "certify": _task_certify, "sweep": _task_sweep}


def execute(config, out_dir, base_dir=None, task: str | None = None) -> int:
    """Run one scenario and write ``report.json`` plus task artifacts into ``out_dir``.

    ``config`` may be a parsed dict or JSON text. Returns the exit status.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    base = Path(base_dir) if base_dir is not None else Path.cwd()
    report = {"schema_version": SCHEMA_VERSION, "task": task or "omega", "name": None, "artifacts": []}
    try:
        cfg = parse_config(config) if isinstance(config, str) else parse_config(json.dumps(config))
        cfg_task = cfg.get("task")
        if task and cfg_task and cfg_task != task:
            raise ConfigError(f"field task: config says {cfg_task!r} but {task!r} was requested")
        cfg["task"] = task or cfg_task
        if cfg["task"] is None:
            raise ConfigError("field task: no task given")
        report["task"] = cfg["task"]
        sc = Scenario(cfg, base)
        report["name"] = sc.name
        if cfg["task"] != "sweep":
            report["validation"] = sc.validate()
            if not report["validation"]["ok"]:
                code = EXIT_VALIDATION
                report["message"] = "descriptor failed its declared hypothesis"
            else:
                code = HANDLERS[cfg["task"]](sc, out, report)
        else:
            code = HANDLERS["sweep"](sc, out, report)
    except ConfigError as exc:
        code = EXIT_CONFIG
        report["message"] = str(exc)
    except (LandscapeError, DomainTooSmallError) as exc:
        code = EXIT_VALIDATION
        report["message"] = str(exc)
    report["exit_code"] = code
    report["status"] = STATUS[code]
    _write_json(out / "report.json", report)
    return code


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="pucci1d", description=__doc__)
    ap.add_argument("task", choices=TASKS)
    ap.add_argument("--config", required=True, help="scenario JSON file")
    ap.add_argument("--out", required=True, help="output directory")
    args = ap.parse_args(argv)
    cfg_path = Path(args.config)
    try:
        text = cfg_path.read_text()
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    code = execute(text, args.out, cfg_path.parent, task=args.task)
    report = json.loads((Path(args.out) / "report.json").read_text())
    if code:
        print(f"{args.task}: {report['status']} (exit {code}): {report.get('message', '')}", file=sys.stderr)
    else:
        print(f"{args.task}: ok, wrote {', '.join(report['artifacts'])}")
    return code


if __name__ == "__main__":
    sys.exit(main())
