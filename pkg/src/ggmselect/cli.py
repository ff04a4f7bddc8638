"""Command-line interface.

Subcommands
-----------
penalty   tabulate the penalty for given (n, p, K, dmax)
simulate  draw covariance models and Gaussian samples to a directory
select    estimate a graph from a data CSV
evaluate  score an estimate against a stored true model
bench     run a full simulation grid and write per-run/aggregate CSVs

Exit codes: 0 on success, 2 on configuration/usage errors, 3 on numeric
failures.  ``GGMSELECT_THREADS`` caps the bench worker processes (default 1;
outputs are byte-identical at any worker count).
"""

from __future__ import annotations

import argparse
import concurrent.futures
import json
import logging
import os
import platform
import sys
import time
from pathlib import Path

import numpy as np

from ._rng import substream
from .errors import DomainError, GGMSelectError
from .family_ew import EWParams
from .graphs import Graph
from .linmodel import as_data_matrix, fit_graph
from .metrics import fdr_power, msep
from .penalty import PenaltyParams, pen_table
from .selector import FAMILY_NAMES, ggmselect, select_my_fam
from .simulate import CovModel, SimParams, calibrate_eta, gen_cov, sample

__all__ = ["main"]

logger = logging.getLogger("ggmselect")

_RUN_COLUMNS = (
    "run,graph_id,rep,family,fdr,power,msep,crit,exact,n,Is,p,K,D"
)
_AGG_COLUMNS = (
    "family,n,Is,p,K,D,runs,fdr_mean,fdr_se,power_mean,power_se,"
    "msep_mean,msep_se,exact_rate"
)


def _fmt(x: float) -> str:
    """Deterministic, compact float formatting for CSV cells."""
    return format(float(x), ".12g")


def _load_csv(path: str, header: bool) -> np.ndarray:
    try:
        X = np.loadtxt(path, delimiter=",", skiprows=1 if header else 0, ndmin=2)
    except (OSError, ValueError) as exc:
        raise DomainError(f"cannot read data CSV {path}: {exc}") from exc
    return as_data_matrix(X)


def _write_json(path: Path, payload: dict):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _ew_params_from_args(args) -> EWParams:
    kwargs = {}
    if getattr(args, "ew_config", None):
        try:
            kwargs.update(json.loads(Path(args.ew_config).read_text()))
        except (OSError, json.JSONDecodeError) as exc:
            raise DomainError(f"cannot read EW config: {exc}") from exc
    for name in ("alpha", "beta", "tau", "h", "T", "burn_in"):
        value = getattr(args, f"ew_{name.lower()}", None)
        if value is not None:
            kwargs[name] = value
    try:
        return EWParams(**kwargs)
    except TypeError as exc:
        raise DomainError(f"bad EW parameter: {exc}") from exc


# ---------------------------------------------------------------------------
# penalty


def _cmd_penalty(args) -> int:
    pt = pen_table(PenaltyParams(n=args.n, p=args.p, K=args.K, d_max=args.dmax))
    lines = ["d,pen"]
    lines += [f"{d},{_fmt(v)}" for d, v in enumerate(pt.values)]
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


# ---------------------------------------------------------------------------
# simulate


def _cmd_simulate(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    eta = args.eta
    if eta is None:
        if args.Is is None:
            raise DomainError("either --eta or --Is must be given")
        eta = calibrate_eta(args.p, args.Is, trials=args.eta_trials, seed=args.seed)
    for g in range(args.NG):
        model = gen_cov(
            SimParams(
                p=args.p,
                eta_int=eta,
                eta_ext=eta / 5.0,
                seed=int(substream(args.seed, "model", g).integers(2**63)),
            )
        )
        _write_json(out / f"model_{g:03d}.json", model.to_dict())
        for r in range(args.NX):
            X = sample(
                model,
                args.n,
                seed=int(substream(args.seed, "data", g, r).integers(2**63)),
            )
            rows = "\n".join(",".join(_fmt(v) for v in row) for row in X)
            (out / f"data_{g:03d}_{r:02d}.csv").write_text(rows + "\n")
    logger.info("simulate: wrote %d models x %d samples to %s", args.NG, args.NX, out)
    return 0


# ---------------------------------------------------------------------------
# select


def _cmd_select(args) -> int:
    X = _load_csv(args.data, args.header)
    families = [f.strip() for f in args.families.split(",") if f.strip()]
    result = ggmselect(
        X,
        families=families,
        K=args.K,
        D=args.dmax,
        ew_params=_ew_params_from_args(args),
        seed=args.seed,
        qe_cap=args.qe_cap,
    )
    payload = result.to_dict()
    if args.out:
        _write_json(Path(args.out), payload)
    else:
        sys.stdout.write(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return 0


# ---------------------------------------------------------------------------
# evaluate


def _cmd_evaluate(args) -> int:
    try:
        model = CovModel.from_dict(json.loads(Path(args.model).read_text()))
    except (OSError, json.JSONDecodeError) as exc:
        raise DomainError(f"cannot read model JSON: {exc}") from exc
    try:
        got = json.loads(Path(args.result).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise DomainError(f"cannot read result JSON: {exc}") from exc
    G_hat = Graph.from_dict(got["graph"] if "graph" in got else got)
    fdr, power = fdr_power(model.graph, G_hat)
    payload = {
        "fdr": fdr,
        "power": power,
        "n_edges_true": model.graph.n_edges,
        "n_edges_est": G_hat.n_edges,
        "exact": int(G_hat == model.graph),
    }
    if args.data:
        X = _load_csv(args.data, args.header)
        theta_hat = fit_graph(X, G_hat)
        payload["msep"] = msep(model.Sigma, model.theta, theta_hat)
    sys.stdout.write(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return 0


# ---------------------------------------------------------------------------
# bench


def _bench_config(args) -> dict:
    cfg = {
        "p": 30,
        "n": [30, 100, 300],
        "Is": [1.0],
        "NG": 10,
        "NX": 10,
        "families": ["qe"],
        "K": 2.5,
        "D": 5,
        "seed": 0,
        "eta_trials": 100,
        "qe_cap": 100_000,
        "ew": {},
    }
    if args.config:
        try:
            cfg.update(json.loads(Path(args.config).read_text()))
        except (OSError, json.JSONDecodeError) as exc:
            raise DomainError(f"cannot read bench config: {exc}") from exc
    for key in ("p", "NG", "NX", "K", "D", "seed"):
        value = getattr(args, key, None)
        if value is not None:
            cfg[key] = value
    if args.n is not None:
        cfg["n"] = [int(v) for v in args.n.split(",")]
    if args.Is is not None:
        cfg["Is"] = [float(v) for v in args.Is.split(",")]
    if args.families is not None:
        cfg["families"] = [f.strip() for f in args.families.split(",") if f.strip()]
    _validate_bench_config(cfg)
    return cfg


def _validate_bench_config(cfg: dict):
    if cfg["p"] < 2:
        raise DomainError(f"p must be >= 2, got {cfg['p']}")
    if not cfg["n"] or any(n < 9 for n in cfg["n"]):
        raise DomainError(f"each n must be >= 9, got {cfg['n']}")
    if not cfg["Is"] or any(i < 0 for i in cfg["Is"]):
        raise DomainError(f"sparsity targets must be >= 0, got {cfg['Is']}")
    if cfg["NG"] < 1 or cfg["NX"] < 1:
        raise DomainError("NG and NX must be >= 1")
    bad = [f for f in cfg["families"] if f not in FAMILY_NAMES]
    if bad or not cfg["families"]:
        raise DomainError(
            f"families must be a nonempty subset of {FAMILY_NAMES}, got {cfg['families']}"
        )
    if not float(cfg["K"]) > 1.0:
        raise DomainError(f"K must be > 1, got {cfg['K']}")
    if any(cfg["D"] > n - 3 for n in cfg["n"]):
        raise DomainError(f"D={cfg['D']} exceeds n - 3 for some n in {cfg['n']}")


def _bench_one(task: dict) -> dict:
    """One (Is, graph, n, rep, family) unit; returns row dict or failure."""
    cfg = task["cfg"]
    model = gen_cov(
        SimParams(
            p=cfg["p"],
            eta_int=task["eta"],
            eta_ext=task["eta"] / 5.0,
            seed=task["model_seed"],
        )
    )
    X = sample(model, task["n"], seed=task["data_seed"])
    out = []
    for family in cfg["families"]:
        try:
            res = ggmselect(
                X,
                families=[family],
                K=cfg["K"],
                D=cfg["D"],
                ew_params=EWParams(**cfg.get("ew", {})),
                seed=task["select_seed"],
                qe_cap=cfg["qe_cap"],
            )
            fdr, power = fdr_power(model.graph, res.graph)
            theta_hat = fit_graph(X, res.graph)
            out.append(
                {
                    "graph_id": task["graph_id"],
                    "rep": task["rep"],
                    "family": family,
                    "fdr": fdr,
                    "power": power,
                    "msep": msep(model.Sigma, model.theta, theta_hat),
                    "crit": res.crit,
                    "exact": int(res.graph == model.graph),
                    "n": task["n"],
                    "Is": task["Is"],
                }
            )
        except GGMSelectError as exc:  # keep the grid going
            out.append(
                {
                    "graph_id": task["graph_id"],
                    "rep": task["rep"],
                    "family": family,
                    "error": f"{type(exc).__name__}: {exc}",
                    "n": task["n"],
                    "Is": task["Is"],
                }
            )
    return {"rows": out}


def _cmd_bench(args) -> int:
    cfg = _bench_config(args)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    seed = int(cfg["seed"])
    t0 = time.monotonic()

    etas = {}
    for i_idx, target in enumerate(cfg["Is"]):
        etas[i_idx] = calibrate_eta(
            cfg["p"], target, trials=cfg["eta_trials"], seed=seed
        )
        logger.info("bench: Is=%.3g -> eta=%.4f", target, etas[i_idx])

    tasks = []
    for i_idx, target in enumerate(cfg["Is"]):
        for g in range(cfg["NG"]):
            model_seed = int(substream(seed, "model", i_idx, g).integers(2**63))
            for n_idx, n in enumerate(cfg["n"]):
                for r in range(cfg["NX"]):
                    tasks.append(
                        {
                            "cfg": cfg,
                            "eta": etas[i_idx],
                            "Is": target,
                            "graph_id": g,
                            "n": n,
                            "rep": r,
                            "model_seed": model_seed,
                            "data_seed": int(
                                substream(seed, "data", i_idx, g, n_idx, r).integers(2**63)
                            ),
                            "select_seed": int(
                                substream(seed, "select", i_idx, g, n_idx, r).integers(2**63)
                            ),
                        }
                    )

    workers = max(1, int(os.environ.get("GGMSELECT_THREADS", "1")))
    results = []
    if workers == 1:
        for task in tasks:
            results.append(_bench_one(task))
    else:
        with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_bench_one, tasks, chunksize=1))

    rows = [r for res in results for r in res["rows"]]
    rows.sort(
        key=lambda r: (
            r["family"],
            r["n"],
            r["Is"],
            r["graph_id"],
            r["rep"],
        )
    )
    failures = [r for r in rows if "error" in r]
    ok_rows = [r for r in rows if "error" not in r]

    lines = [_RUN_COLUMNS]
    for i, r in enumerate(ok_rows):
        lines.append(
            ",".join(
                [
                    str(i),
                    str(r["graph_id"]),
                    str(r["rep"]),
                    r["family"],
                    _fmt(r["fdr"]),
                    _fmt(r["power"]),
                    _fmt(r["msep"]),
                    _fmt(r["crit"]),
                    str(r["exact"]),
                    str(r["n"]),
                    _fmt(r["Is"]),
                    str(cfg["p"]),
                    _fmt(cfg["K"]),
                    str(cfg["D"]),
                ]
            )
        )
    (out / "runs.csv").write_text("\n".join(lines) + "\n")

    agg_lines = [_AGG_COLUMNS]
    cells = sorted({(r["family"], r["n"], r["Is"]) for r in ok_rows})
    for family, n, target in cells:
        cell = [
            r
            for r in ok_rows
            if r["family"] == family and r["n"] == n and r["Is"] == target
        ]
        m = len(cell)

        def stats(key):
            vals = np.array([r[key] for r in cell], dtype=float)
            mean = vals.mean()
            se = vals.std(ddof=1) / np.sqrt(m) if m > 1 else 0.0
            return mean, se

        fdr_m, fdr_s = stats("fdr")
        pow_m, pow_s = stats("power")
        msep_m, msep_s = stats("msep")
        exact_rate = float(np.mean([r["exact"] for r in cell]))
        agg_lines.append(
            ",".join(
                [
                    family,
                    str(n),
                    _fmt(target),
                    str(cfg["p"]),
                    _fmt(cfg["K"]),
                    str(cfg["D"]),
                    str(m),
                    _fmt(fdr_m),
                    _fmt(fdr_s),
                    _fmt(pow_m),
                    _fmt(pow_s),
                    _fmt(msep_m),
                    _fmt(msep_s),
                    _fmt(exact_rate),
                ]
            )
        )
    (out / "aggregate.csv").write_text("\n".join(agg_lines) + "\n")

    manifest = {
        "config": {k: v for k, v in cfg.items()},
        "eta": {f"{cfg['Is'][i]}": etas[i] for i in etas},
        "versions": {
            "python": platform.python_version(),
            "numpy": np.__version__,
            "ggmselect": _package_version(),
        },
        "workers": workers,
        "wall_time_s": round(time.monotonic() - t0, 3),
        "n_runs": len(ok_rows),
        "failures": [
            {k: v for k, v in r.items() if k != "cfg"} for r in failures
        ],
    }
    try:
        import scipy

        manifest["versions"]["scipy"] = scipy.__version__
    except ImportError:  # pragma: no cover
        pass
    _write_json(out / "manifest.json", manifest)
    logger.info(
        "bench: %d runs (%d failures) in %.1fs -> %s",
        len(ok_rows),
        len(failures),
        manifest["wall_time_s"],
        out,
    )
    return 3 if failures else 0


def _package_version() -> str:
    try:
        from importlib.metadata import version

        return version("ggmselect")
    except Exception:  # pragma: no cover
        return "unknown"


# ---------------------------------------------------------------------------
# parser


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="ggmselect",
        description="Graph estimation for Gaussian graphical models.",
    )
    ap.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = ap.add_subparsers(dest="command", required=True)

    p_pen = sub.add_parser("penalty", help="tabulate the penalty")
    p_pen.add_argument("--n", type=int, required=True)
    p_pen.add_argument("--p", type=int, required=True)
    p_pen.add_argument("--K", type=float, default=2.5)
    p_pen.add_argument("--dmax", type=int, required=True)
    p_pen.add_argument("--out", default=None)
    p_pen.set_defaults(func=_cmd_penalty)

    p_sim = sub.add_parser("simulate", help="draw models and samples")
    p_sim.add_argument("--p", type=int, required=True)
    p_sim.add_argument("--n", type=int, required=True)
    p_sim.add_argument("--eta", type=float, default=None)
    p_sim.add_argument("--Is", type=float, default=None, help="target sparsity index")
    p_sim.add_argument("--eta-trials", type=int, default=100)
    p_sim.add_argument("--NG", type=int, default=1, help="model replicates")
    p_sim.add_argument("--NX", type=int, default=1, help="data replicates per model")
    p_sim.add_argument("--seed", type=int, default=0)
    p_sim.add_argument("--out", required=True)
    p_sim.set_defaults(func=_cmd_simulate)

    p_sel = sub.add_parser("select", help="estimate a graph from a CSV")
    p_sel.add_argument("--data", required=True)
    p_sel.add_argument("--header", action="store_true", help="CSV has a header row")
    p_sel.add_argument("--families", default="qe,c01,la,ew")
    p_sel.add_argument("--K", type=float, default=2.5)
    p_sel.add_argument("--dmax", type=int, default=None)
    p_sel.add_argument("--seed", type=int, default=0)
    p_sel.add_argument("--qe-cap", type=int, default=100_000)
    p_sel.add_argument("--ew-config", default=None, help="JSON file of EW params")
    p_sel.add_argument("--ew-alpha", type=float, default=None, dest="ew_alpha")
    p_sel.add_argument("--ew-beta", type=float, default=None, dest="ew_beta")
    p_sel.add_argument("--ew-tau", type=float, default=None, dest="ew_tau")
    p_sel.add_argument("--ew-h", type=float, default=None, dest="ew_h")
    p_sel.add_argument("--ew-T", type=float, default=None, dest="ew_t")
    p_sel.add_argument("--ew-burn-in", type=float, default=None, dest="ew_burn_in")
    p_sel.add_argument("--out", default=None)
    p_sel.set_defaults(func=_cmd_select)

    p_eval = sub.add_parser("evaluate", help="score an estimate against truth")
    p_eval.add_argument("--model", required=True, help="model JSON from simulate")
    p_eval.add_argument("--result", required=True, help="result JSON from select")
    p_eval.add_argument("--data", default=None, help="data CSV (enables msep)")
    p_eval.add_argument("--header", action="store_true")
    p_eval.set_defaults(func=_cmd_evaluate)

    p_bench = sub.add_parser("bench", help="run a simulation grid")
    p_bench.add_argument("--config", default=None, help="JSON config file")
    p_bench.add_argument("--p", type=int, default=None)
    p_bench.add_argument("--n", default=None, help="comma-separated sample sizes")
    p_bench.add_argument("--Is", default=None, help="comma-separated sparsity targets")
    p_bench.add_argument("--NG", type=int, default=None)
    p_bench.add_argument("--NX", type=int, default=None)
    p_bench.add_argument("--families", default=None)
    p_bench.add_argument("--K", type=float, default=None)
    p_bench.add_argument("--D", type=int, default=None)
    p_bench.add_argument("--seed", type=int, default=None)
    p_bench.add_argument("--out", required=True)
    p_bench.set_defaults(func=_cmd_bench)
    return ap


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args)
    except DomainError as exc:
        logger.error("%s", exc)
        return 2
    except GGMSelectError as exc:
        logger.error("%s", exc)
        return 3
    except np.linalg.LinAlgError as exc:
        logger.error("linear algebra failure: %s", exc)
        return 3


if __name__ == "__main__":
    sys.exit(main())
