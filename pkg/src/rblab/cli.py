"""File-driven command line front end.

Subcommands: simulate, verify-decay, extract-poles, filter, gauge-report,
conditioning-study, xeb.  Each reads a JSON experiment config, writes CSV
outputs plus JSON sidecars into a fresh run directory, and echoes the fully
resolved configuration.  Exit codes: 0 ok, 2 config/schema error,
3 theorem-hypothesis violation under --strict, 4 numeric failure.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
import warnings
from pathlib import Path

import numpy as np

from . import distributions as dist
from . import noise as noise_mod
from .decay import verify_nonuniform_bound, verify_subset_bound, verify_uniform_bound
from .filtering import filtered_data, xeb_exact, xeb_normalization, xeb_sample
from .gauge import cp_violation_scan, depolarizing_gauge, fidelity_decomposition
from .groups import build_catalog, build_clifford_1q, build_pauli_group
from .poles import (asymptotic_cond, cond2, esprit, exponential_signal, hausdorff,
                    pole_family)
from .rbsim import RBConfig, run_rb
from .runio import config_hash, write_csv
from .superop import depolarizing

EXIT_OK = 0
EXIT_SCHEMA = 2
EXIT_HYPOTHESIS = 3
EXIT_NUMERIC = 4


class ConfigError(ValueError):
    pass


SCHEMA = {
    "group": {"name": str, "qubits": int},
    "noise": {"model": str, "p": float, "theta": float, "axis": list,
              "alpha": float, "gamma": float, "level": int, "mu": float,
              "decays": list},
    "protocol": str,
    "sequence_lengths": list,
    "shots": int,
    "sequences": int,
    "state": {"name": str},
    "povm": {"name": str},
    "sampling": {"name": str, "epsilon": float, "gate": int, "support": list},
    "ending_gate": int,
    "randomize_ending": bool,
    "seed": int,
    "output_dir": str,
    "irrep": str,
    "family": str,
    "n_poles": int,
    "max_length": int,
    "samples": int,
}

DEFAULTS = {
    "group": {"name": "clifford", "qubits": 1},
    "noise": {"model": "depolarizing", "p": 0.02},
    "protocol": "uniform",
    "sequence_lengths": list(range(5, 41)),
    "shots": 100,
    "sequences": 100,
    "state": {"name": "zero"},
    "povm": {"name": "survival"},
    "sampling": {"name": "uniform"},
    "ending_gate": None,
    "randomize_ending": False,
    "seed": 0,
    "output_dir": "runs",
    "irrep": "adjoint",
    "family": "F1",
    "n_poles": 2,
    "max_length": 100,
    "samples": 100_000,
}


def _check_keys(obj: dict, schema: dict, path: str = "") -> None:
    for key, val in obj.items():
        if key not in schema:
            raise ConfigError(f"unknown config key {path + key!r}")
        spec = schema[key]
        if isinstance(spec, dict):
            if not isinstance(val, dict):
                raise ConfigError(f"key {path + key!r} must be an object")
            _check_keys(val, spec, path + key + ".")
        elif spec is float:
            if not isinstance(val, (int, float)) or isinstance(val, bool):
                raise ConfigError(f"key {path + key!r} must be a number")
        elif spec is int:
            if not isinstance(val, int) or isinstance(val, bool):
                raise ConfigError(f"key {path + key!r} must be an integer")
        elif not isinstance(val, spec) and val is not None:
            raise ConfigError(f"key {path + key!r} has the wrong type")


def load_config(path: str | None, overrides: dict | None = None) -> dict:
    cfg = json.loads(json.dumps(DEFAULTS))  # deep copy
    if path is not None:
        try:
            with open(path, encoding="utf-8") as fh:
                user = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        _check_keys(user, SCHEMA)
        for key, val in user.items():
            if isinstance(val, dict):
                cfg[key] = {**cfg.get(key, {}), **val}
            else:
                cfg[key] = val
    for key, val in (overrides or {}).items():
        if val is not None:
            cfg[key] = val
    return cfg


def build_group(cfg: dict):
    name = cfg["group"]["name"]
    q = cfg["group"].get("qubits", 1)
    if name == "pauli":
        group, rep = build_pauli_group(q)
    elif name == "clifford":
        if q != 1:
            raise ConfigError("the full Clifford group build supports qubits = 1")
        group, rep = build_clifford_1q()
    else:
        raise ConfigError(f"unknown group {name!r} (use 'pauli' or 'clifford')")
    return group, rep, build_catalog(group, rep)


def build_noise(cfg: dict, rep):
    spec = cfg["noise"]
    model = spec["model"]
    if model == "ideal":
        from .fourier import representation_map

        return representation_map(rep)
    if model == "depolarizing":
        return noise_mod.depolarizing_noise(rep, spec.get("p", 0.02))
    if model == "gate_independent_depolarizing":
        return noise_mod.depolarizing_noise(rep, spec.get("p", 0.02))
    if model == "overrotation":
        return noise_mod.overrotation(rep, spec.get("theta", 0.05),
                                      tuple(spec.get("axis", (0, 0, 1))))
    if model == "anisotropic":
        return noise_mod.anisotropic_pauli(rep, tuple(spec.get("decays",
                                                               (0.97, 0.95, 0.93))))
    if model == "counterexample":
        return noise_mod.counterexample_ix_a(rep, spec.get("alpha", 0.5),
                                             spec.get("gamma", 0.0),
                                             verify=spec.get("gamma", 0.0) == 0.0)
    if model == "stochastic_leak":
        return noise_mod.stochastic_leak(rep, spec.get("level", 1),
                                         spec.get("mu", 0.95))
    raise ConfigError(f"unknown noise model {model!r}")


def build_state_povm(cfg: dict, dim: int):
    from .basis import pauli_matrix

    sname = cfg["state"]["name"]
    if sname == "zero":
        rho = np.zeros((dim, dim), dtype=complex)
        rho[0, 0] = 1.0
    elif sname == "plus":
        v = np.ones(dim, dtype=complex) / np.sqrt(dim)
        rho = np.outer(v, v.conj())
    elif sname == "bloch_diag" and dim == 2:
        n = np.array([1.0, 1.0, 1.0]) / np.sqrt(3)
        rho = 0.5 * (np.eye(2) + n[0] * pauli_matrix("X")
                     + n[1] * pauli_matrix("Y") + n[2] * pauli_matrix("Z"))
    else:
        raise ConfigError(f"unknown state {sname!r}")

    pname = cfg["povm"]["name"]
    if pname == "survival":
        povm = [rho.copy(), np.eye(dim) - rho]
        labels = ["survive", "other"]
    elif pname == "computational":
        povm = [np.diag((np.arange(dim) == k).astype(complex)) for k in range(dim)]
        labels = [str(k) for k in range(dim)]
    elif pname == "pauli_6" and dim == 2:
        povm, labels = [], []
        for s in "XYZ":
            povm.append((np.eye(2) + pauli_matrix(s)) / 6)
            povm.append((np.eye(2) - pauli_matrix(s)) / 6)
            labels += [f"{s}+", f"{s}-"]
    else:
        raise ConfigError(f"unknown POVM {pname!r}")
    return rho, povm, labels


def build_sampling(cfg: dict, group):
    spec = cfg["sampling"]
    name = spec["name"]
    if name == "uniform":
        return dist.uniform(group), None
    if name == "mixture":
        base = dist.peaked(group, spec.get("gate", group.identity))
        return dist.mixture(group, base, spec.get("epsilon", 0.1)), None
    if name == "generators":
        return dist.generator_supported(group, spec["support"]), None
    if name == "interleaved":
        return None, dist.InterleavedSchedule(group, spec.get("gate", group.identity))
    raise ConfigError(f"unknown sampling {name!r}")


def assemble_rb_config(cfg: dict):
    group, rep, catalog = build_group(cfg)
    phi = build_noise(cfg, rep)
    rho, povm, labels = build_state_povm(cfg, phi.dim)
    nu, schedule = build_sampling(cfg, group)
    rb = RBConfig(group, rep, phi, lengths=list(cfg["sequence_lengths"]),
                  state=rho, povm=povm, nu=nu, schedule=schedule,
                  ending_gate=cfg["ending_gate"],
                  randomize_ending=cfg["randomize_ending"],
                  shots=cfg["shots"], sequences=cfg["sequences"],
                  seed=cfg["seed"], povm_labels=labels)
    return rb, catalog


def make_run_dir(cfg: dict) -> Path:
    h = config_hash(cfg)
    stamp = time.strftime("%Y%m%dT%H%M%S")
    base = Path(cfg["output_dir"])
    run = base / f"run-{h}-{stamp}"
    suffix = 0
    while run.exists():  # never overwrite an existing run directory
        suffix += 1
        run = base / f"run-{h}-{stamp}-{suffix}"
    run.mkdir(parents=True)
    with open(run / "config.json", "w", encoding="utf-8") as fh:
        json.dump(cfg, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return run


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_simulate(cfg: dict, run: Path, strict: bool) -> int:
    rb, _ = assemble_rb_config(cfg)
    dataset = run_rb(rb)
    dataset.to_csv(run / "dataset.csv")
    print(f"wrote {run / 'dataset.csv'} ({len(dataset.rows)} rows)")
    return EXIT_OK


def cmd_verify_decay(cfg: dict, run: Path, strict: bool) -> int:
    rb, catalog = assemble_rb_config(cfg)
    protocol = cfg["protocol"]
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        if protocol in ("uniform", "interleaved"):
            report = verify_uniform_bound(rb, catalog)
        elif protocol == "approximate":
            report = verify_nonuniform_bound(rb, catalog, rb.nu)
        elif protocol == "subset":
            report = verify_subset_bound(rb, catalog, rb.nu)
        else:
            raise ConfigError(f"verify-decay does not handle protocol {protocol!r}")
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    report.to_csv(run / "decay_report.csv")
    print(f"wrote {run / 'decay_report.csv'}: delta={report.delta:.6f} "
          f"hypothesis_ok={report.hypothesis_ok} all_pass={report.all_pass}")
    if strict and not (report.hypothesis_ok and report.all_pass):
        return EXIT_HYPOTHESIS
    return EXIT_OK


def cmd_extract_poles(cfg: dict, run: Path, strict: bool, exact: bool = True) -> int:
    family = cfg["family"]
    n = cfg["n_poles"]
    alpha = cfg["noise"].get("alpha") if family == "lin" else None
    truth = pole_family(family, n, alpha=alpha or 0.5)
    m_max = cfg["max_length"]
    y = exponential_signal(truth.poles, np.ones(n) / n, m_max)
    if not exact:
        rng = np.random.Generator(np.random.Philox(
            np.random.SeedSequence(cfg["seed"])))
        y = rng.binomial(cfg["samples"], np.clip(y.real, 0, 1)) / cfg["samples"]
    rec = esprit(y, None, n)
    hd = hausdorff(truth.poles, rec.poles)
    write_csv(run / "poles.csv", ["re", "im"],
              [[float(z.real), float(z.imag)] for z in rec.poles],
              sidecar={"family": family, "n": n, "hausdorff": hd,
                       "exact": exact, "seed": cfg["seed"]})
    print(f"wrote {run / 'poles.csv'}: hausdorff to truth = {hd:.3e}")
    return EXIT_OK


def cmd_filter(cfg: dict, run: Path, strict: bool) -> int:
    rb, catalog = assemble_rb_config(cfg)
    label = cfg["irrep"]
    rows = []
    for m in rb.lengths:
        k = filtered_data(rb, catalog, label, int(m))
        rows.append([label, int(m), k])
    write_csv(run / "filtered.csv", ["irrep", "m", "k_exact"], rows,
              sidecar={"irrep": label, "seed": cfg["seed"]})
    print(f"wrote {run / 'filtered.csv'} ({len(rows)} rows)")
    return EXIT_OK


def cmd_gauge_report(cfg: dict, run: Path, strict: bool) -> int:
    rb, catalog = assemble_rb_config(cfg)
    alphas = np.round(np.arange(0.1, 0.95, 0.1), 3)
    rows = cp_violation_scan(alphas, [cfg["noise"].get("gamma", 0.0)], catalog)
    write_csv(run / "cp_scan.csv", ["alpha", "gamma", "min_choi_phi", "min_choi_gauge"],
              [[r["alpha"], r["gamma"], r["min_choi_phi"], r["min_choi_gauge"]]
               for r in rows])
    from .gauge import GaugeError

    try:
        out = fidelity_decomposition(rb.phi, catalog)
        dec_rows = [[lab, float(np.real(v)), float(np.imag(v))]
                    for lab, v in out["dominant_terms"].items()]
        write_csv(run / "fidelity_decomposition.csv", ["irrep", "term_re", "term_im"],
                  dec_rows, sidecar={
                      "residuum_re": float(np.real(out["residuum"])),
                      "residuum_im": float(np.imag(out["residuum"])),
                      "total": out["total"],
                      "direct_average": out["direct_average"],
                      "parseval_average": out["parseval_average"]})
        print(f"wrote {run / 'fidelity_decomposition.csv'}")
    except GaugeError as exc:
        # pathological noise (degenerate dominant eigenvalue) has no decomposition
        print(f"fidelity decomposition not available: {exc}", file=sys.stderr)
    try:
        dec = depolarizing_gauge(rb.phi, catalog)
        print(f"depolarizing gauge: relation residual {dec.relation_residual:.2e}, "
              f"decays {[(s.label, round(float(np.real(s.f_max)), 6)) for s in dec.sectors]}")
    except GaugeError as exc:
        print(f"depolarizing gauge not available: {exc}", file=sys.stderr)
    print(f"wrote {run / 'cp_scan.csv'}")
    return EXIT_OK


def cmd_conditioning_study(cfg: dict, run: Path, strict: bool) -> int:
    family = cfg["family"]
    n = cfg["n_poles"]
    truth = pole_family(family, n, alpha=0.5 if family == "lin" else None)
    rows = []
    m = 8
    while m <= cfg["max_length"]:
        rows.append([family, n, m, cond2(truth.poles, m)])
        m *= 2
    asym = asymptotic_cond(truth.poles)
    write_csv(run / "conditioning.csv", ["family", "n", "M", "cond2"], rows,
              sidecar={"asymptotic": asym})
    print(f"wrote {run / 'conditioning.csv'}; asymptote sqrt(kappa(C)) = {asym:.6g}")
    return EXIT_OK


def cmd_xeb(cfg: dict, run: Path, strict: bool) -> int:
    q = cfg["group"].get("qubits", 2)
    d = 2**q
    p = cfg["noise"].get("p", 0.05)
    lam = depolarizing(d, p)
    ms = [int(m) for m in cfg["sequence_lengths"]]
    exact = xeb_exact(lam, ms)
    rows = []
    for m, fx in zip(ms, exact):
        est = xeb_sample(lam, m, n_circuits=max(cfg["sequences"], 1),
                         seed=cfg["seed"] + m)
        rows.append([m, fx, est])
    write_csv(run / "xeb.csv", ["m", "f_exact", "f_estimate"], rows,
              sidecar={"p": p, "qubits": q,
                       "normalization_mc": xeb_normalization(d, cfg["samples"],
                                                             seed=cfg["seed"]),
                       "normalization_haar": 2 * d / (d + 1)})
    print(f"wrote {run / 'xeb.csv'} ({len(rows)} rows)")
    return EXIT_OK


COMMANDS = {
    "simulate": cmd_simulate,
    "verify-decay": cmd_verify_decay,
    "extract-poles": cmd_extract_poles,
    "filter": cmd_filter,
    "gauge-report": cmd_gauge_report,
    "conditioning-study": cmd_conditioning_study,
    "xeb": cmd_xeb,
}


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="rblab",
                                     description="randomized benchmarking laboratory")
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", help="JSON experiment config file")
    parser.add_argument("--seed", type=int, default=None, help="override the seed")
    parser.add_argument("--output-dir", default=None, help="override the output dir")
    parser.add_argument("--shots", type=int, default=None)
    parser.add_argument("--sequences", type=int, default=None)
    parser.add_argument("--family", default=None, help="pole family for studies")
    parser.add_argument("--n-poles", type=int, default=None)
    parser.add_argument("--noisy", action="store_true",
                        help="extract-poles: add binomial sampling noise")
    parser.add_argument("--strict", action="store_true",
                        help="exit 3 when a theorem hypothesis fails")
    parser.add_argument("--threads", type=int, default=None,
                        help="worker count hint; outputs are identical for any value")
    args = parser.parse_args(argv)

    overrides = {"seed": args.seed, "output_dir": args.output_dir,
                 "shots": args.shots, "sequences": args.sequences,
                 "family": args.family, "n_poles": args.n_poles}
    try:
        cfg = load_config(args.config, overrides)
        run = make_run_dir(cfg)
        if args.command == "extract-poles":
            return cmd_extract_poles(cfg, run, args.strict, exact=not args.noisy)
        return COMMANDS[args.command](cfg, run, args.strict)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_SCHEMA
    except (np.linalg.LinAlgError, RuntimeError, ValueError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
