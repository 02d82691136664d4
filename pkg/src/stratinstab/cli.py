"""Command-line front end.

Every command resolves a flat configuration (built-in defaults, then an
optional ``key=value`` file given by ``--config``, then explicit flags),
runs one analysis and writes ``<command>.csv`` / ``<command>.json`` (and an
optional ``<command>.svg``) into ``--out``. The JSON summary embeds the
resolved configuration and a ``"schema": 1`` tag.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import asdict, dataclass, fields
from typing import Dict, List, Optional, Sequence

import numpy as np

from . import dispersion as disp
from . import rootfinder as rf
from .errors import (
    ConfigurationError,
    NotFriedlander,
    NoZeroFound,
    NumericalError,
)
from .evolve.grid import Grid1D
from .evolve.linear import linear_growth
from .evolve.nonlinear import instability_time
from .modes import dominant_mode, mode_residual, reconstruct_mode
from .profiles import (
    build_friedlander,
    check_alpha,
    couette_shear,
    couette_stable,
    miles_howard_check,
    tanh_shear,
)

SCHEMA = 1
COMMANDS = (
    "profile-check",
    "nyquist",
    "spectrum",
    "mode",
    "evolve-linear",
    "evolve-nonlinear",
    "scan-beta",
    "scan-delta",
    "scan-M",
)


@dataclass
class RunConfig:
    command: str = ""
    kind: str = "tanh"
    beta: float = 5.0
    alpha: float = 0.97
    kappa: float = 0.0
    k: int = 1
    M: float = 1.0 / 3.0
    nz: int = 128
    nx: int = 64
    dt: float = 0.02
    t_end: float = 0.0          # 0: choose from the predicted growth rate
    model: str = "hydrostatic"
    tol: float = 1e-12
    eps: float = 1e-2
    eps_floor: float = 0.05
    method: str = "both"
    delta: float = 1e-4
    deltas: str = "1e-3,1e-4,1e-5"
    m_threshold: float = 0.05
    betas: str = "1,2,3,5,8"
    Ms: str = "20,40,80"
    seed: int = 0
    out: str = "."
    format: str = "csv,json"

    def formats(self) -> List[str]:
        fm = [f.strip() for f in self.format.split(",") if f.strip()]
        bad = [f for f in fm if f not in ("csv", "json", "svg")]
        if bad:
            raise ConfigurationError(f"unknown output format(s): {bad}")
        return fm

    def validate(self) -> "RunConfig":
        if self.command not in COMMANDS:
            raise ConfigurationError(f"unknown command {self.command!r}")
        if self.kind not in ("tanh", "couette"):
            raise ConfigurationError(f"kind must be tanh or couette, got {self.kind!r}")
        check_alpha(self.alpha, allow_half=True)
        for name in ("tol", "eps", "eps_floor", "m_threshold", "beta", "M", "dt"):
            if not getattr(self, name) > 0:
                raise ConfigurationError(f"{name} must be > 0")
        if self.kappa < 0:
            raise ConfigurationError("kappa must be >= 0")
        if self.k == 0:
            raise ConfigurationError("k must be nonzero")
        if self.model not in ("hydrostatic", "boussinesq"):
            raise ConfigurationError("model must be hydrostatic or boussinesq")
        if self.method not in ("both", "neumann", "shooting", "auto"):
            raise ConfigurationError("method must be both, neumann, shooting or auto")
        self.formats()
        for name in ("deltas", "betas", "Ms"):
            _floats(getattr(self, name), name)
        return self


_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _cast(key: str, raw: str):
    typ = _TYPES[key]
    try:
        if typ in ("int", int):
            return int(raw)
        if typ in ("float", float):
            return float(raw)
    except ValueError as exc:
        raise ConfigurationError(f"bad value for {key}: {raw!r}") from exc
    return str(raw)


def _floats(text: str, name: str) -> List[float]:
    try:
        vals = [float(s) for s in str(text).split(",") if s.strip()]
    except ValueError as exc:
        raise ConfigurationError(f"{name} must be a comma-separated list of numbers") from exc
    if not vals:
        raise ConfigurationError(f"{name} is empty")
    return vals


def read_config_file(path: str) -> Dict[str, object]:
    out: Dict[str, object] = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc}") from exc
    for n, line in enumerate(lines, 1):
        s = line.split("#", 1)[0].strip()
        if not s:
            continue
        if "=" not in s:
            raise ConfigurationError(f"{path}:{n}: expected key=value")
        key, val = (p.strip() for p in s.split("=", 1))
        key = key.replace("-", "_")
        if key not in _TYPES or key == "command":
            raise ConfigurationError(f"{path}:{n}: unknown key {key!r}")
        out[key] = _cast(key, val)
    return out


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="stratinstab", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", help="key=value file; explicit flags take precedence")
    p.add_argument("--kind", choices=("tanh", "couette"))
    p.add_argument("--beta", type=float)
    p.add_argument("--alpha", type=float)
    p.add_argument("--kappa", type=float)
    p.add_argument("--k", type=int)
    p.add_argument("--M", type=float)
    p.add_argument("--nz", type=int)
    p.add_argument("--nx", type=int)
    p.add_argument("--dt", type=float)
    p.add_argument("--t-end", dest="t_end", type=float)
    p.add_argument("--model", choices=("hydrostatic", "boussinesq"))
    p.add_argument("--tol", type=float)
    p.add_argument("--eps", type=float)
    p.add_argument("--eps-floor", dest="eps_floor", type=float)
    p.add_argument("--method", choices=("both", "neumann", "shooting", "auto"))
    p.add_argument("--delta", type=float)
    p.add_argument("--delta-list", dest="deltas")
    p.add_argument("--m-threshold", dest="m_threshold", type=float)
    p.add_argument("--beta-list", dest="betas")
    p.add_argument("--M-list", dest="Ms")
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.add_argument("--format", help="comma-separated subset of csv,json,svg")
    return p


def resolve_config(argv: Sequence[str]) -> RunConfig:
    ns = build_parser().parse_args(argv)
    values: Dict[str, object] = {}
    if ns.config:
        values.update(read_config_file(ns.config))
    for key in _TYPES:
        if key == "command":
            continue
        v = getattr(ns, key, None)
        if v is not None:
            values[key] = v
    cfg = RunConfig(command=ns.command, **values)
    return cfg.validate()


# --------------------------------------------------------------------------- #
# output

def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


def _jsonable(x):
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if np.isfinite(x) else None
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, complex):
        return [x.real, x.imag]
    return x


class Writer:
    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        self.formats = cfg.formats()
        os.makedirs(cfg.out, exist_ok=True)
        self.stem = os.path.join(cfg.out, cfg.command)

    def csv(self, header: Sequence[str], rows):
        if "csv" not in self.formats:
            return
        with open(self.stem + ".csv", "w", encoding="utf-8", newline="\n") as fh:
            fh.write(",".join(header) + "\n")
            for r in rows:
                fh.write(",".join(_fmt(v) for v in r) + "\n")

    def json(self, summary: dict) -> dict:
        doc = {"schema": SCHEMA, "command": self.cfg.command}
        doc.update(summary)
        doc["config"] = asdict(self.cfg)
        doc = _jsonable(doc)
        if "json" in self.formats:
            with open(self.stem + ".json", "w", encoding="utf-8", newline="\n") as fh:
                json.dump(doc, fh, indent=2, sort_keys=True)
                fh.write("\n")
        return doc

    def svg(self, xs, ys, title: str = ""):
        if "svg" not in self.formats:
            return
        with open(self.stem + ".svg", "w", encoding="utf-8", newline="\n") as fh:
            fh.write(polyline_svg(xs, ys, title))


def polyline_svg(xs, ys, title: str = "", size=(480, 360), pad=30) -> str:
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    ok = np.isfinite(xs) & np.isfinite(ys)
    xs, ys = xs[ok], ys[ok]
    w, h = size
    x0, x1 = xs.min(), xs.max()
    y0, y1 = ys.min(), ys.max()
    sx = (w - 2 * pad) / (x1 - x0 or 1.0)
    sy = (h - 2 * pad) / (y1 - y0 or 1.0)
    pts = " ".join(f"{pad + (x - x0) * sx:.2f},{h - pad - (y - y0) * sy:.2f}" for x, y in zip(xs, ys))
    return (
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}">\n'
        f'<text x="{pad}" y="{pad - 10}" font-size="12">{title}</text>\n'
        f'<polyline fill="none" stroke="black" stroke-width="1" points="{pts}"/>\n'
        "</svg>\n"
    )


# --------------------------------------------------------------------------- #
# commands

def _equilibrium(cfg: RunConfig):
    if cfg.kind == "couette":
        return couette_stable()
    return build_friedlander(tanh_shear(cfg.beta), cfg.alpha)


def _shear(cfg: RunConfig):
    return couette_shear() if cfg.kind == "couette" else tanh_shear(cfg.beta)


def cmd_profile_check(cfg: RunConfig, out: Writer) -> dict:
    rep = miles_howard_check(_equilibrium(cfg))
    out.csv(("z", "ri"), rep.samples)
    out.svg([s[0] for s in rep.samples], [s[1] for s in rep.samples], "Ri(z)")
    return out.json({"min_ri": rep.min_ri, "argmin_z": rep.argmin_z, "satisfied": rep.miles_howard_satisfied})


def cmd_nyquist(cfg: RunConfig, out: Writer) -> dict:
    shear = _shear(cfg)
    contour = rf.nyquist_contour(shear, cfg.eps)
    rep = rf.winding_number(rf.nyquist_function(shear), contour)
    phase = rep.phases()[:-1]
    rows = [(c.real, c.imag, f.real, f.imag, p) for (c, f), p in zip(rep.samples, phase)]
    out.csv(("re_c", "im_c", "re_F", "im_F", "phase"), rows)
    # arcsinh keeps the huge near-axis values and the small arc values on one plot
    F = np.array([f for _, f in rep.samples])
    out.svg(np.arcsinh(F.real), np.arcsinh(F.imag), "asinh F(contour)")
    return out.json(
        {
            "winding": rep.winding,
            "max_phase_step": rep.max_phase_step,
            "eps": cfg.eps,
            "radius": contour.radius,
            "n_samples": len(rep.samples),
        }
    )


def _methods(cfg: RunConfig, eq) -> List[str]:
    if cfg.method == "both":
        return ["neumann", "shooting"] if eq.is_friedlander else ["shooting"]
    if cfg.method == "auto":
        return ["neumann" if eq.is_friedlander else "shooting"]
    if cfg.method == "neumann" and not eq.is_friedlander:
        raise NotFriedlander("NotFriedlander: the Neumann formulation needs a Friedlander equilibrium")
    return [cfg.method]


def cmd_spectrum(cfg: RunConfig, out: Writer) -> dict:
    eq = _equilibrium(cfg)
    rows = []
    zeros = {}
    for m in _methods(cfg, eq):
        zs = rf.spectrum(eq, cfg.kappa, cfg.eps_floor, m, cfg.tol)
        zeros[m] = zs
        for z in zs:
            g1 = rf.verify_necessary_conditions(z, eq).g1_pass
            rows.append((m, cfg.alpha if eq.is_friedlander else "", cfg.kappa, z.c.real, z.c.imag, z.residual, g1))
    out.csv(("method", "alpha", "kappa", "re_c", "im_c", "residual", "g1_pass"), rows)
    all_im = [z.c.imag for zs in zeros.values() for z in zs]
    summary = {
        "gamma0": max(all_im) if all_im else None,
        "n_zeros": {m: len(zs) for m, zs in zeros.items()},
        "zeros": {m: [[z.c.real, z.c.imag] for z in zs] for m, zs in zeros.items()},
    }
    if len(zeros) == 2 and all(zeros.values()):
        a, b = zeros["neumann"][0].c, zeros["shooting"][0].c
        summary["method_gap"] = abs(a - b)
    return out.json(summary)


def _top_zero(cfg: RunConfig, eq, kappa: float) -> rf.Zero:
    method = "neumann" if eq.is_friedlander else "shooting"
    zs = rf.spectrum(eq, kappa, cfg.eps_floor, method, cfg.tol)
    if not zs:
        raise NoZeroFound(f"NoZeroFound: no unstable phase speed with Im(c) >= {cfg.eps_floor}")
    return zs[0]


def cmd_mode(cfg: RunConfig, out: Writer) -> dict:
    eq = _equilibrium(cfg)
    z0 = _top_zero(cfg, eq, cfg.kappa)
    q = disp.DispersionQuery(z0.c, eq, cfg.kappa)
    source = "neumann" if eq.is_friedlander else "shooting"
    m = reconstruct_mode(z0, cfg.k, q, grid=np.linspace(-1.0, 1.0, cfg.nz + 2), source=source)
    rep = mode_residual(m, eq)
    rows = [(z, p.real, p.imag, r.real, r.imag, w.real, w.imag) for z, p, r, w in zip(m.z, m.phi, m.r, m.w)]
    out.csv(("z", "re_phi", "im_phi", "re_r", "im_r", "re_w", "im_w"), rows)
    out.svg(m.z, np.abs(m.phi), "|phi(z)|")
    return out.json(
        {
            "c": [m.c.real, m.c.imag],
            "sigma": m.sigma,
            "tg_residual": rep.tg_residual,
            "bc_defect": rep.bc_defect,
        }
    )


def cmd_evolve_linear(cfg: RunConfig, out: Writer) -> dict:
    eq = _equilibrium(cfg)
    kappa = 0.0 if cfg.model == "hydrostatic" else (cfg.kappa or abs(cfg.k) / cfg.M)
    z0 = _top_zero(cfg, eq, kappa)
    pred = cfg.k * z0.c.imag
    t_end = cfg.t_end or 16.0 / abs(pred)
    series = linear_growth(
        eq, cfg.k, Grid1D(cfg.nz), dt=cfg.dt, t_end=t_end, model=cfg.model, kappa=kappa, seed=cfg.seed
    )
    out.csv(("t", "deviation_norm"), zip(series.times, series.norms))
    out.svg(series.times, np.log(series.norms), "log norm")
    return out.json(
        {
            "fitted_sigma": series.fitted_sigma,
            "fit_r2": series.fit_r2,
            "fit_window": list(series.fit_window),
            "predicted_sigma": pred,
            "relative_error": abs(series.fitted_sigma - pred) / abs(pred),
            "kappa": kappa,
        }
    )


def _nonlinear_runs(cfg: RunConfig, out: Writer, deltas: List[float]) -> dict:
    eq = _equilibrium(cfg)
    Lam, vec = dominant_mode(1, 1.0 / cfg.M, eq, Grid1D(cfg.nz), seed=cfg.seed)
    rows, Ts, fits = [], [], []
    err = None
    for d in deltas:
        try:
            T, series = instability_time(d, cfg.m_threshold, vec, eq, cfg.nx, cfg.nz, cfg.dt, cfg.M, Lam)
        except NumericalError as exc:
            # keep whatever was computed before the failure
            err, series, T = exc, getattr(exc, "series", None), float("nan")
        Ts.append(T)
        if series is not None:
            fits.append(series.fitted_sigma)
            rows += [(d, t, n) for t, n in zip(series.times, series.norms)]
        if err is not None:
            break
    out.csv(("delta", "t", "deviation_norm"), rows)
    if rows:
        out.svg([r[1] for r in rows], np.log([r[2] for r in rows]), "log deviation")
    summary = {
        "Lambda": Lam,
        "deltas": deltas[: len(Ts)],
        "T_delta": Ts,
        "fitted_sigma": fits,
        "predicted_slope": 1.0 / Lam,
    }
    if len(Ts) >= 2 and err is None:
        slope = float(np.polyfit(np.abs(np.log(deltas)), Ts, 1)[0])
        summary["fitted_slope_vs_logdelta"] = slope
        summary["slope_relative_error"] = abs(slope * Lam - 1.0)
    doc = out.json(summary)
    if err is not None:
        raise err
    return doc


def cmd_evolve_nonlinear(cfg: RunConfig, out: Writer) -> dict:
    return _nonlinear_runs(cfg, out, [cfg.delta])


def cmd_scan_delta(cfg: RunConfig, out: Writer) -> dict:
    return _nonlinear_runs(cfg, out, _floats(cfg.deltas, "deltas"))


def cmd_scan_beta(cfg: RunConfig, out: Writer) -> dict:
    betas = _floats(cfg.betas, "betas")
    scan = rf.beta_scan(betas, cfg.eps)
    out.csv(("beta", "winding"), sorted(scan.items()))
    return out.json(
        {"scan": {_fmt(b): w for b, w in sorted(scan.items())}, "first_unstable_beta": rf.first_unstable_beta(scan)}
    )


def cmd_scan_M(cfg: RunConfig, out: Writer) -> dict:
    eq = _equilibrium(cfg)
    hydro = _top_zero(cfg, eq, 0.0).c
    f_rows = []
    prev = hydro
    for M in _floats(cfg.Ms, "Ms"):
        kappa = 1.0 / M
        f = disp.dispersion_function(eq, kappa)
        c, res, _ = rf.secant(f, prev, prev + 1e-6, cfg.tol)
        if not (res < cfg.tol and c.imag > 0):
            z = _top_zero(cfg, eq, kappa)
            c, res = z.c, z.residual
        prev = c
        series = linear_growth(eq, 1, Grid1D(cfg.nz), dt=cfg.dt, t_end=16.0 / c.imag, model="boussinesq", kappa=kappa, seed=cfg.seed)
        f_rows.append((M, c.real, c.imag, abs(c - hydro), series.fitted_sigma, abs(series.fitted_sigma / c.imag - 1)))
    out.csv(("M", "re_c", "im_c", "dist_to_hydrostatic", "linear_sigma", "relative_error"), f_rows)
    return out.json(
        {
            "hydrostatic_c": [hydro.real, hydro.imag],
            "M": [r[0] for r in f_rows],
            "c": [[r[1], r[2]] for r in f_rows],
            "dist_to_hydrostatic": [r[3] for r in f_rows],
            "linear_sigma": [r[4] for r in f_rows],
        }
    )


HANDLERS = {
    "profile-check": cmd_profile_check,
    "nyquist": cmd_nyquist,
    "spectrum": cmd_spectrum,
    "mode": cmd_mode,
    "evolve-linear": cmd_evolve_linear,
    "evolve-nonlinear": cmd_evolve_nonlinear,
    "scan-beta": cmd_scan_beta,
    "scan-delta": cmd_scan_delta,
    "scan-M": cmd_scan_M,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        cfg = resolve_config(argv)
        out = Writer(cfg)
    except SystemExit as exc:  # argparse
        return int(exc.code or 0) and 2
    except ConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        doc = HANDLERS[cfg.command](cfg, out)
    except ConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    print(json.dumps(doc, sort_keys=True))
    return 0


if __name__ == "__main__":
    sys.exit(main())
