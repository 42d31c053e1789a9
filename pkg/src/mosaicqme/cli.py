"""Command line entry point: ``mosaicqme {spectrum,poles,evolve,sweep}``.

Examples::

    mosaicqme poles --config table1_k2
    mosaicqme evolve --config fig3_k2 --oracle-check --threads 4
    mosaicqme spectrum --config table1_k2 --set model.N=610
    mosaicqme sweep --config table1_k2 --axis N=8:24:4
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from .analysis import SWEEP_AXES, all_crossings, ipr_curve_from_poles, pole_sweep
from .config import RunConfig
from .dynamics import integrate_auxiliary, integrate_volterra
from .errors import ConfigError, DomainError, NumericalError
from .io import RunWriter
from .lattice import build_hamiltonian
from .laplace import build_augmented, find_poles, overlap_matrix, reconstruct_trajectory, with_initial_state
from .localization import eigendecompose, ipr_spectrum, model_edges

log = logging.getLogger("mosaicqme")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_GATE = 0, 2, 3, 4
OUT_ENV = "MOSAICQME_OUT"


def resolve_outdir(cfg: RunConfig, command: str, out: str | None) -> Path:
    if out:
        return Path(out)
    if cfg["output.dir"]:
        return Path(cfg["output.dir"])
    return Path(os.environ.get(OUT_ENV, "runs")) / cfg.name / command


def _plot_stub(writer: RunWriter, csv_name: str, x: str, ys: str):
    body = (
        "import csv\nimport matplotlib.pyplot as plt\n\n"
        f"rows = [r for r in csv.DictReader(l for l in open({csv_name!r}) if not l.startswith('#'))]\n"
        f"x = [float(r[{x!r}]) for r in rows]\n"
        f"for key in [k for k in rows[0] if k.startswith({ys!r})]:\n"
        "    plt.plot(x, [float(r[key]) for r in rows], label=key)\n"
        "plt.legend()\nplt.show()\n"
    )
    writer.text(f"plot_{Path(csv_name).stem}.py", body)


# --- spectrum ---------------------------------------------------------------

def cmd_spectrum(cfg: RunConfig, outdir: Path) -> int:
    w = RunWriter(outdir, "spectrum", cfg.echo())
    edges = {}
    for suffix, spec in cfg.model_specs():
        levels = ipr_spectrum(spec)
        name = f"spectrum{suffix}.csv"
        w.csv(name, ["j", "E_j", "IPR_j"], ((j, e, i) for j, (e, i) in enumerate(levels)),
              comments=[f"model: {spec.label()} N={spec.N} delta={spec.delta:g} phi={spec.phi:g}"])
        report = model_edges(spec)
        w.json(f"mobility_edges{suffix}.json", report)
        edges[suffix.lstrip("_") or "default"] = report
        if cfg["output.plot_stub"]:
            _plot_stub(w, name, "E_j", "IPR")
    w.extra["mobility_edges"] = edges
    w.finish()
    return EXIT_OK


# --- poles ------------------------------------------------------------------

def cmd_poles(cfg: RunConfig, outdir: Path) -> int:
    w = RunWriter(outdir, "poles", cfg.echo())
    params = cfg.bath()
    summary = {}
    for suffix, spec in cfg.model_specs():
        H = build_hamiltonian(spec)
        es = eigendecompose(H)
        d = find_poles(build_augmented(H, params), es, cfg["analysis.tol_steady"])
        w.csv(f"poles{suffix}.csv", ["index", "re_z", "im_z", "steady", "pseudomode"],
              ((i + 1, z.real, z.imag, d.steady[i], d.pseudomode[i]) for i, z in enumerate(d.poles)),
              comments=[f"model: {spec.label()} N={spec.N} eta={params.eta:g} omega_c={params.omega_c:g}"])
        O = overlap_matrix(es, params, H)
        w.csv(f"overlap{suffix}.csv", ["j", "E_j"] + [f"O_{i + 1}" for i in range(O.shape[1])],
              ([j, es.values[j], *O[j]] for j in range(es.N)))
        summary[suffix.lstrip("_") or "default"] = {
            "steady": (d.steady_indices() + 1).tolist(),
            "pseudomode": d.pseudomode_index() + 1,
            "degenerate_pairs": d.degenerate_pairs,
            "max_im": float(d.poles.imag.max()),
        }
    w.extra["poles"] = summary
    w.finish()
    return EXIT_OK


# --- evolve -----------------------------------------------------------------

def _initial_states(cfg: RunConfig, es) -> list[tuple[str, int | None, np.ndarray]]:
    vec = cfg["analysis.initial_vector"]
    if vec:
        a0 = np.asarray(vec, dtype=complex)
        if a0.shape != (es.N,):
            raise ConfigError(f"analysis.initial_vector must have {es.N} entries")
        nrm = np.linalg.norm(a0)
        if nrm == 0:
            raise ConfigError("analysis.initial_vector is zero")
        return [("custom", None, a0 / nrm)]
    sel = cfg["analysis.initial_states"]
    idx = range(es.N) if sel == "all" else sel
    out = []
    for j in idx:
        if not 0 <= j < es.N:
            raise ConfigError(f"initial state index {j} outside 0..{es.N - 1}")
        out.append((f"E{j}", j, es.vectors[:, j].astype(complex)))
    return out


def _traj_rows(traj):
    p = np.abs(traj.amplitudes) ** 2
    surv = p.sum(axis=1)
    ipr_raw = (p * p).sum(axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        ipr_norm = np.where(surv > 0, ipr_raw / surv**2, 0.0)
    for k, t in enumerate(traj.times):
        row = [t]
        for a in traj.amplitudes[k]:
            row += [a.real, a.imag]
        yield row + [surv[k], ipr_raw[k], ipr_norm[k]]


def cmd_evolve(cfg: RunConfig, outdir: Path, threads: int = 1, oracle_check: bool = False) -> int:
    params = cfg.bath()
    T, h, dec = cfg["dynamics.T"], cfg["dynamics.h"], cfg["dynamics.decimation"]
    methods = list(cfg["dynamics.methods"])
    if oracle_check:
        methods = ["residue_reconstruction", "auxiliary_ode", "volterra"]
    w = RunWriter(outdir, "evolve", cfg.echo())
    oracle, gate_ok = {}, True
    crossings_out = {}
    for suffix, spec in cfg.model_specs():
        H = build_hamiltonian(spec)
        es = eigendecompose(H)
        base = find_poles(build_augmented(H, params), es, cfg["analysis.tol_steady"])
        states = _initial_states(cfg, es)

        def run(state):
            label, _, a0 = state
            d = with_initial_state(base, a0)
            res = {"decomp": d}
            if "residue_reconstruction" in methods:
                res["residue_reconstruction"] = reconstruct_trajectory(d, T, h, dec, label)
            if "auxiliary_ode" in methods:
                res["auxiliary_ode"] = integrate_auxiliary(H, params, a0, T, h, dec, label)
            if "volterra" in methods:
                res["volterra"] = integrate_volterra(H, params, a0, T, h, dec, label=label)
            return res

        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as ex:
                results = list(ex.map(run, states))
        else:
            results = [run(s) for s in states]
        w.mark(f"integrate{suffix}")

        curves = []
        for (label, j, _), res in zip(states, results):
            energy = None if j is None else float(es.values[j])
            head = f"initial_state: {label}" + ("" if energy is None else f" E={energy:.12g}")
            for m in ("residue_reconstruction", "auxiliary_ode", "volterra"):
                if m in res:
                    w.csv(f"traj_{label}_{m}{suffix}.csv",
                          ["t"] + [f"{p}_alpha_{n + 1}" for n in range(es.N) for p in ("re", "im")]
                          + ["survival", "ipr", "ipr_normalized"],
                          _traj_rows(res[m]), comments=[f"method: {m}", head])
            c = res["decomp"].residues
            w.csv(f"residues_{label}{suffix}.csv",
                  ["n"] + [f"{p}_c_{i + 1}" for i in range(c.shape[1]) for p in ("re", "im")],
                  ([n + 1, *np.column_stack([c[n].real, c[n].imag]).ravel()] for n in range(es.N)),
                  comments=["poles: " + " ".join(f"{z.real:.12g}{z.imag:+.12g}j" for z in base.poles)])
            times = next(res[m].times for m in methods if m in res)
            curves.append(ipr_curve_from_poles(res["decomp"], times, label, energy))

            if "auxiliary_ode" in res:
                ref = res["auxiliary_ode"].amplitudes
                entry = {}
                if "residue_reconstruction" in res:
                    entry["reconstruction_vs_auxiliary"] = float(np.max(np.abs(res["residue_reconstruction"].amplitudes - ref)))
                if "volterra" in res:
                    entry["volterra_vs_auxiliary"] = float(np.max(np.abs(res["volterra"].amplitudes - ref)))
                entry["pass"] = (entry.get("reconstruction_vs_auxiliary", 0.0) < cfg["analysis.oracle_tol"]
                                 and entry.get("volterra_vs_auxiliary", 0.0) < cfg["analysis.volterra_tol"])
                gate_ok &= entry["pass"]
                oracle[f"{label}{suffix}"] = entry

        name = f"ipr_curves{suffix}.csv"
        w.csv(name, ["t"] + [f"ipr_{c.label}" for c in curves],
              ([t, *(c.values[k] for c in curves)] for k, t in enumerate(curves[0].times)),
              comments=["raw IPR sum_n |alpha_n(t)|^4 from residue reconstruction"])
        if cfg["output.plot_stub"]:
            _plot_stub(w, name, "t", "ipr_")

        sel = cfg["analysis.crossing_states"]
        chosen = curves if sel == "all" else [c for c, (_, j, _) in zip(curves, states) if j in sel]
        reports = [r.to_dict() for r in all_crossings(chosen)]
        w.json(f"crossings{suffix}.json", {"pairs": reports,
                                           "energies": {c.label: c.energy for c in chosen}})
        crossings_out[suffix.lstrip("_") or "default"] = sum(len(r["t_star"]) for r in reports)

    w.extra["oracle"] = oracle
    w.extra["crossing_counts"] = crossings_out
    if oracle_check and not gate_ok:
        w.finish(status="oracle_check_failed")
        log.error("oracle check failed: %s", {k: v for k, v in oracle.items() if not v["pass"]})
        return EXIT_GATE
    w.finish()
    return EXIT_OK


# --- sweep ------------------------------------------------------------------

def parse_axis(text: str) -> tuple[str, list]:
    """``name=v1,v2,...`` or ``name=start:stop:step`` (stop inclusive)."""
    if "=" not in text:
        raise ConfigError(f"axis {text!r} must look like NAME=values")
    name, spec = (s.strip() for s in text.split("=", 1))
    if not spec:
        raise ConfigError(f"axis {name!r} has no values")
    if ":" in spec:
        parts = [float(x) for x in spec.split(":")]
        if len(parts) != 3 or parts[2] <= 0:
            raise ConfigError(f"range {spec!r} must be start:stop:step with step > 0")
        start, stop, step = parts
        values = list(np.arange(start, stop + 0.5 * step, step))
    else:
        values = [float(x) for x in spec.split(",") if x.strip()]
    if not values:
        raise ConfigError(f"axis {name!r} has no values")
    return name, values


def cmd_sweep(cfg: RunConfig, outdir: Path, axis: tuple[str, list] | None = None, threads: int = 1) -> int:
    if axis is None:
        if not cfg["sweep.axis"] or not cfg["sweep.values"]:
            raise ConfigError("sweep needs --axis NAME=values or sweep.axis/sweep.values in the config")
        axis = (cfg["sweep.axis"], list(cfg["sweep.values"]))
    name, values = axis
    if not values:
        raise ConfigError("sweep axis is empty")
    if name not in SWEEP_AXES:
        raise ConfigError(f"cannot sweep over {name!r}; choose from {sorted(SWEEP_AXES)}")
    params = cfg.bath()
    w = RunWriter(outdir, "sweep", {**cfg.echo(), "sweep.axis": name, "sweep.values": list(values)})
    failures = {}
    for suffix, spec in cfg.model_specs():
        try:
            result = pole_sweep(spec, name, values, params, threads, cfg["analysis.tol_steady"])
        except DomainError as exc:
            raise ConfigError(str(exc)) from exc
        w.csv(f"sweep_{name}{suffix}.csv", [name, "N", "index", "re_z", "im_z", "steady", "pseudomode"],
              result.rows())
        failures[suffix.lstrip("_") or "default"] = {str(p.value): p.error for p in result.points if p.error}
    w.extra["failures"] = failures
    w.finish()
    return EXIT_OK


# --- entry point ------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mosaicqme", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    for name in ("spectrum", "poles", "evolve", "sweep"):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="config file or bundled name (table1_k2, fig3_k2, ...)")
        p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="override a config key")
        p.add_argument("--out", default=None, help=f"output directory (default ${OUT_ENV}/<config>/<command>)")
        p.add_argument("--threads", type=int, default=1)
        p.add_argument("--plot-stub", action="store_true", help="also write a matplotlib script per data file")
        p.add_argument("-v", "--verbose", action="store_true")
        if name == "evolve":
            p.add_argument("--oracle-check", action="store_true",
                           help="exit 4 if reconstruction and direct integration disagree")
        if name == "sweep":
            p.add_argument("--axis", default=None, help="NAME=v1,v2,... or NAME=start:stop:step")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = RunConfig.load(args.config).override(args.set)
        if args.plot_stub:
            cfg = cfg.override(["output.plot_stub=true"])
        outdir = resolve_outdir(cfg, args.command, args.out)
        if args.command == "spectrum":
            code = cmd_spectrum(cfg, outdir)
        elif args.command == "poles":
            code = cmd_poles(cfg, outdir)
        elif args.command == "evolve":
            code = cmd_evolve(cfg, outdir, args.threads, args.oracle_check)
        else:
            axis = parse_axis(args.axis) if args.axis is not None else None
            code = cmd_sweep(cfg, outdir, axis, args.threads)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    if code == EXIT_OK:
        print(f"wrote {outdir}")
    return code


if __name__ == "__main__":
    raise SystemExit(main())
