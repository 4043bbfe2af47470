"""Command-line front end.

Every command writes its outputs plus ``manifest.json`` (configuration and
SHA-256 of each file) into ``--out``. Exit codes: 0 success, 1 bad input or
I/O, 2 unstable system, 3 degenerate spectrum on the path, 4 loop through a
degeneracy or non-continuable Berry trace, 5 simplex search did not converge.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Sequence

import numpy as np

from .berry import (SphereSpec, circle_loop, locate_degeneracy, loop_holonomy,
                    singular_gap_fn, sphere_scan)
from .bmd import bmd_from_svd
from .errors import (DegenerateSpectrum, LoopThroughDegeneracy, NoConvergence,
                     NonContinuableTrace, NonConvergentStep, UnstableSystem)
from .linalg import matrix_to_json, symplectic_defect, symplectic_form
from .models import (BUILTIN_SYSTEMS, BosonicSystem, MicroringSpec, as_system, builtin,
                     check_stability, hamiltonian_gap, hamiltonian_spectrum_check,
                     interaction_matrix, load_system, param_values, parametric_transfer,
                     spectral_covariance, squeezing_spectra, transfer_function)

COMMANDS = ("spectra", "sphere", "loop", "locate", "covariance", "check")
PINCH_DB = 0.5

EXIT_OK, EXIT_INPUT, EXIT_UNSTABLE, EXIT_DEGENERATE, EXIT_LOOP, EXIT_SEARCH = range(6)


class UsageError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    system: str = "fourmode-codim3"
    omega: str | None = None
    eta: float = 1e-2
    k: int | None = None
    center: str | None = None
    radius: float | None = None
    params: str | None = None
    seed: str | None = None
    pair: int | None = None
    step: float | None = None
    thetas: int = 41
    out: str = "."

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise UsageError(f"unknown command {self.command!r}")
        if not self.eta > 0:
            raise UsageError("eta must be positive")
        if self.k is not None and self.k < 1:
            raise UsageError("k must be at least 1")

    def omega_range(self) -> tuple[float, float]:
        ab = _floats(self.omega, "omega", sep=":")
        if len(ab) != 2 or not ab[0] < ab[1]:
            raise UsageError("omega range must be a:b with a < b")
        return ab[0], ab[1]

    def param_names(self) -> list[str]:
        return [p.strip() for p in self.params.split(",") if p.strip()] if self.params else []

    def source(self) -> BosonicSystem | MicroringSpec:
        if self.system in BUILTIN_SYSTEMS:
            return builtin(self.system)
        try:
            with open(self.system) as fh:
                return load_system(json.load(fh))
        except FileNotFoundError:
            raise UsageError(f"system {self.system!r} is neither built in "
                             f"{BUILTIN_SYSTEMS} nor a readable file") from None


def _floats(text: str | None, name: str, sep: str = ",") -> list[float]:
    if text is None:
        raise UsageError(f"--{name} is required")
    try:
        return [float(x) for x in str(text).split(sep)]
    except ValueError:
        raise UsageError(f"--{name}: cannot parse {text!r}") from None


def _threads() -> int:
    raw = os.environ.get("SYMPECTRA_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise UsageError(f"SYMPECTRA_THREADS must be an integer, got {raw!r}") from None


# --- output --------------------------------------------------------------

class Outputs:
    """Collects written files and emits the manifest."""

    def __init__(self, config: RunConfig):
        self.config = config
        self.dir = Path(config.out)
        self.dir.mkdir(parents=True, exist_ok=True)
        self.files: list[str] = []
        self.extra: dict = {}

    def path(self, name: str) -> Path:
        self.files.append(name)
        return self.dir / name

    def json(self, name: str, obj) -> None:
        with open(self.path(name), "w") as fh:
            json.dump(obj, fh, indent=2, sort_keys=True)
            fh.write("\n")

    def finish(self) -> None:
        hashes = {name: hashlib.sha256((self.dir / name).read_bytes()).hexdigest()
                  for name in self.files}
        manifest = {"config": asdict(self.config), "files": hashes, **self.extra}
        with open(self.dir / "manifest.json", "w") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True)
            fh.write("\n")


# --- pinch detection -----------------------------------------------------

def _parabola_vertex(x: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    c = np.polyfit(x - x[1], y, 2)
    if c[0] <= 0:
        return float(x[1]), float(y[1])
    xv = -c[1] / (2 * c[0])
    xv = float(np.clip(xv, x[0] - x[1], x[2] - x[1]))
    return xv + float(x[1]), float(np.polyval(c, xv))


def find_pinches(omegas: np.ndarray, anti_db: np.ndarray, threshold_db: float = PINCH_DB) -> list[dict]:
    """Interior local minima of adjacent anti-squeezing gaps below ``threshold_db``.

    Each minimum is refined by a parabola through the minimising sample and
    its neighbours. ``pair`` is the 1-based index ``j`` of ``(d_j, d_{j+1})``.
    """
    out = []
    for j in range(anti_db.shape[1] - 1):
        gap = anti_db[:, j] - anti_db[:, j + 1]
        for i in range(1, len(gap) - 1):
            if gap[i] <= gap[i - 1] and gap[i] < gap[i + 1] and gap[i] < threshold_db:
                w, g = _parabola_vertex(omegas[i - 1:i + 2], gap[i - 1:i + 2])
                out.append({"pair": j + 1, "omega": w, "gap_db": max(g, 0.0)})
    return sorted(out, key=lambda p: (p["omega"], p["pair"]))


# --- commands --------------------------------------------------------------

def cmd_spectra(cfg: RunConfig, out: Outputs) -> None:
    sys_ = as_system(cfg.source())
    a, b = cfg.omega_range()
    spectra = squeezing_spectra(sys_, a, b, cfg.eta, cfg.k)
    spectra.write_csv(out.path("spectra.csv"))
    out.extra["pinches"] = find_pinches(spectra.omegas, spectra.anti_db)
    out.extra["samples"] = int(spectra.omegas.size)
    out.extra["rejected_steps"] = int(spectra.bmd.rejected)


def _evaluator(cfg: RunConfig, count: int):
    names = cfg.param_names()
    if len(names) != count:
        raise UsageError(f"{cfg.command} needs exactly {count} parameter name(s) in --params")
    src = cfg.source()
    try:
        param_values(src, names)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    return parametric_transfer(src, names)


def _center(cfg: RunConfig, dim: int) -> list[float]:
    c = _floats(cfg.center, "center")
    if len(c) != dim:
        raise UsageError(f"--center needs {dim} comma-separated values")
    if cfg.radius is None or not cfg.radius > 0:
        raise UsageError("--radius must be positive")
    return c


def cmd_sphere(cfg: RunConfig, out: Outputs) -> None:
    ev = _evaluator(cfg, 2)
    center = _center(cfg, 3)
    spec = SphereSpec(tuple(center), cfg.radius, ev, np.linspace(0, np.pi, cfg.thetas))
    trace = sphere_scan(spec, cfg.eta, cfg.k, workers=_threads())
    trace.write_csv(out.path("berry.csv"))
    out.json("verdict.json", {"flagged_pairs": trace.flagged(1e-3),
                              "net_phase": [float(x) for x in trace.net()],
                              "tolerance": 1e-3})


def cmd_loop(cfg: RunConfig, out: Outputs) -> None:
    ev = _evaluator(cfg, 1)
    center = _center(cfg, 2)
    hol = loop_holonomy(circle_loop(ev, center, cfg.radius), cfg.eta, cfg.k)
    d = np.diag(hol.U_hol)
    out.json("loop.json", {"holonomy_re": [float(x) for x in d.real],
                           "holonomy_im": [float(x) for x in d.imag],
                           "phases": [float(x) for x in hol.phases],
                           "offdiag_max": float(np.abs(hol.U_hol - np.diag(d)).max()),
                           "samples": len(hol.bmd)})


def cmd_locate(cfg: RunConfig, out: Outputs) -> None:
    names = cfg.param_names()
    ev = _evaluator(cfg, len(names))
    seed = _floats(cfg.seed, "seed")
    if len(seed) != len(names) + 1:
        raise UsageError(f"--seed needs {len(names) + 1} values (omega and each parameter)")
    if cfg.pair is None or cfg.pair < 1:
        raise UsageError("--pair must be a positive 1-based index")
    step = cfg.step if cfg.step is not None else 0.025
    try:
        report = locate_degeneracy(singular_gap_fn(ev, cfg.pair), seed, cfg.pair, step=step)
    except NoConvergence as exc:
        out.json("degeneracy.json", exc.report.to_json())
        raise
    out.json("degeneracy.json", report.to_json())


def cmd_covariance(cfg: RunConfig, out: Outputs) -> None:
    sys_ = as_system(cfg.source())
    (w,) = _floats(cfg.omega, "omega")[:1]
    S = transfer_function(sys_, w, verify=True)
    sigma = spectral_covariance(S)
    f = bmd_from_svd(S)
    diag = np.real(np.diag(f.U.conj().T @ sigma @ f.U))
    out.json("covariance.json", {"omega": w, "covariance": matrix_to_json(sigma),
                                 "supermode_variances": [float(x) for x in diag]})


def cmd_check(cfg: RunConfig, out: Outputs) -> None:
    sys_ = as_system(cfg.source())
    check_stability(sys_)
    w = _floats(cfg.omega, "omega")[0] if cfg.omega else 0.5
    S, Sm = transfer_function(sys_, w), transfer_function(sys_, -w)
    Om = symplectic_form(sys_.n)
    M = interaction_matrix(sys_)
    out.json("check.json", {
        "omega": w,
        "conjugate_symmetry": float(np.linalg.norm(Sm.matrix - S.matrix.conj())
                                    / np.linalg.norm(S.matrix)),
        "symplectic_defect": symplectic_defect(S.matrix),
        "hamiltonian_defect": float(np.abs((Om @ M).T - Om @ M).max()),
        "hamiltonian_gap": hamiltonian_gap(hamiltonian_spectrum_check(sys_)),
    })


HANDLERS = {"spectra": cmd_spectra, "sphere": cmd_sphere, "loop": cmd_loop,
            "locate": cmd_locate, "covariance": cmd_covariance, "check": cmd_check}


# --- entry point -----------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="sympectra", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", help="JSON file with the same field names as the flags")
    p.add_argument("--system", help=f"built-in {BUILTIN_SYSTEMS} or system JSON path")
    p.add_argument("--omega", help="range a:b (single value for covariance/check)")
    p.add_argument("--eta", type=float)
    p.add_argument("--k", type=int, help="track only the k dominant pairs")
    p.add_argument("--center", help="comma-separated loop/sphere center (omega first)")
    p.add_argument("--radius", type=float)
    p.add_argument("--params", help="comma-separated parameter names, e.g. g11,g22 or delta_s0")
    p.add_argument("--seed", help="comma-separated simplex starting point (omega first)")
    p.add_argument("--pair", type=int, help="1-based index j of the pair (d_j, d_j+1)")
    p.add_argument("--step", type=float, help="initial simplex edge")
    p.add_argument("--thetas", type=int, help="number of sphere parallels")
    p.add_argument("--out", help="output directory")
    return p


def _glue_negative(argv: Sequence[str]) -> list[str]:
    # "--omega -10:10" would otherwise read the value as an option.
    out, it = [], iter(argv)
    for tok in it:
        if tok in ("--omega", "--center", "--seed"):
            nxt = next(it, None)
            out.append(tok if nxt is None else f"{tok}={nxt}")
        else:
            out.append(tok)
    return out


def parse_config(argv: Sequence[str] | None) -> RunConfig:
    argv = sys.argv[1:] if argv is None else list(argv)
    ns = build_parser().parse_args(_glue_negative(argv))
    values: dict = {}
    if ns.config:
        with open(ns.config) as fh:
            values.update(json.load(fh))
    known = {f.name for f in fields(RunConfig)}
    bad = set(values) - known
    if bad:
        raise UsageError(f"unknown config field(s) {sorted(bad)}")
    for name in known - {"command"}:
        v = getattr(ns, name, None)
        if v is not None:
            values[name] = v
    for name in ("center", "seed", "omega"):
        if isinstance(values.get(name), list):
            values[name] = ("," if name != "omega" else ":").join(str(x) for x in values[name])
    return RunConfig(command=ns.command, **values)


def main(argv: Sequence[str] | None = None) -> int:
    try:
        cfg = parse_config(argv)
        out = Outputs(cfg)
        try:
            HANDLERS[cfg.command](cfg, out)
        finally:
            if out.files:
                out.finish()
    except UnstableSystem as exc:
        code, msg = EXIT_UNSTABLE, exc
    except (DegenerateSpectrum, NonConvergentStep) as exc:
        code, msg = EXIT_DEGENERATE, exc
    except (LoopThroughDegeneracy, NonContinuableTrace) as exc:
        code, msg = EXIT_LOOP, exc
    except NoConvergence as exc:
        code, msg = EXIT_SEARCH, exc
    except (UsageError, ValueError, OSError, json.JSONDecodeError) as exc:
        code, msg = EXIT_INPUT, exc
    else:
        return EXIT_OK
    print(f"sympectra: error: {msg}", file=sys.stderr)
    return code


if __name__ == "__main__":
    raise SystemExit(main())
