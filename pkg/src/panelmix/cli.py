"""Batch driver: CSV inputs + one config file in, JSON/CSV reports out.

Subcommands mirror the estimation pipeline: ``simulate`` writes synthetic
input files, ``stationarity`` decides which variables need differencing,
``pqr`` fits the panel quantile model, ``pvm`` runs the mixed-frequency
VAR with lag selection and impulse responses, and ``granger`` writes the
predictive-content table. Identical config and seed give byte-identical
output files; nothing here reads the clock.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import hashlib
import json
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .bvar import (
    GibbsConfig,
    MinnesotaHyper,
    build_midas_design,
    gibbs_sample,
    impulse_response,
    minnesota_midas_prior,
    select_lag_order,
)
from .causality import granger_suite, suite_to_csv_text
from .errors import AlignmentError, ConfigError, PanelmixError
from .panel import (
    CsvSchema,
    PanelDataset,
    first_difference,
    load_panel_csv,
    to_quarterly,
    write_panel_csv,
)
from .panelqr import (
    ChainConfig,
    PqrMcmcFit,
    _design_with_lags,
    mmqr_fit,
    pqr_mcmc_fit,
    quantile_coefficient_table,
)
from .quantile import solver_backend
from .simulate import KINDS, DgpSpec, generate
from .stationarity import adf_test, llc_test, pp_test

MONTHLY = "monthly"
QUARTERLY = "quarterly"


# -- configuration -----------------------------------------------------------

@dataclass
class McmcSettings:
    enabled: bool = True
    iterations: int = 3000
    burn_in: int = 1000
    thin: int = 2
    proposal_scale: float = 0.1


@dataclass
class PvmSettings:
    hf_series: list[str] = field(default_factory=list)
    lf_series: list[str] = field(default_factory=list)
    lag_order: str | int = "auto"
    max_lag_order: int = 4
    draws: int = 3000
    burn_in: int = 1000
    thin: int = 2
    ordering: list[str] | None = None
    horizons: int = 12
    hyper: dict | None = None


@dataclass
class RunConfig:
    """Resolved pipeline settings: file roles, model sizes, seed.

    ``raw`` keeps the post-override mapping whose canonical JSON is
    hashed into the manifest; file paths stay as written (relative paths
    resolve against the config file's directory at open time, so moving
    a run directory does not change its hash).
    """

    seed: int
    quarterly_csv: str | None = None
    monthly_csv: str | None = None
    response: str = "q"
    financial: list[str] = field(default_factory=list)
    uncertainty: list[str] = field(default_factory=list)
    taus: list[float] = field(default_factory=lambda: [0.25, 0.5, 0.75])
    uncertainty_lags: int = 3
    unit_root_lags: int = 1
    monthly_agg: str = "mean"
    cross_demean: bool = True
    scale_tolerance_share: float = 0.0
    mcmc: McmcSettings = field(default_factory=McmcSettings)
    pvm: PvmSettings = field(default_factory=PvmSettings)
    base_dir: str = "."
    raw: dict = field(default_factory=dict)

    def path(self, name: str) -> str:
        value = getattr(self, name)
        if value is None:
            raise ConfigError(f"config is missing {name!r}")
        if os.path.isabs(value):
            return value
        return os.path.join(self.base_dir, value)


_SECTION_FIELDS = {
    "mcmc": McmcSettings,
    "pvm": PvmSettings,
}


def _build_config(mapping: dict, base_dir: str) -> RunConfig:
    known = {
        "seed", "quarterly_csv", "monthly_csv", "response", "financial",
        "uncertainty", "taus", "uncertainty_lags", "unit_root_lags",
        "monthly_agg", "cross_demean", "scale_tolerance_share", "mcmc", "pvm",
        "out",
    }
    unknown = sorted(set(mapping) - known)
    if unknown:
        raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
    if "seed" not in mapping or mapping["seed"] is None:
        raise ConfigError("seed is required (config key 'seed' or --seed)")
    kwargs: dict = {
        k: v
        for k, v in mapping.items()
        if k not in _SECTION_FIELDS and k != "out"
    }
    for section, cls in _SECTION_FIELDS.items():
        sub = mapping.get(section)
        if sub is None:
            kwargs[section] = cls()
            continue
        if not isinstance(sub, dict):
            raise ConfigError(f"config section {section!r} must be an object")
        names = set(cls.__dataclass_fields__)
        bad = sorted(set(sub) - names)
        if bad:
            raise ConfigError(f"unknown {section} keys: {', '.join(bad)}")
        kwargs[section] = cls(**sub)
    try:
        cfg = RunConfig(base_dir=base_dir, raw=dict(mapping), **kwargs)
    except TypeError as e:
        raise ConfigError(str(e)) from None
    if not isinstance(cfg.seed, int) or isinstance(cfg.seed, bool) or cfg.seed < 0:
        raise ConfigError("seed must be a non-negative integer")
    for t in cfg.taus:
        if not 0.0 < float(t) < 1.0:
            raise ConfigError(f"quantile level {t} outside (0, 1)")
    if not cfg.taus:
        raise ConfigError("taus must be non-empty")
    if cfg.uncertainty_lags < 1:
        raise ConfigError("uncertainty_lags must be >= 1")
    if cfg.monthly_agg not in ("mean", "last"):
        raise ConfigError("monthly_agg must be 'mean' or 'last'")
    if cfg.pvm.lag_order != "auto" and (
        not isinstance(cfg.pvm.lag_order, int) or cfg.pvm.lag_order < 1
    ):
        raise ConfigError("pvm.lag_order must be 'auto' or a positive integer")
    return cfg


def _load_config(args: argparse.Namespace) -> RunConfig:
    if args.config is None:
        raise ConfigError("--config is required for this command")
    path = args.config
    if not os.path.exists(path):
        raise ConfigError(f"config file not found: {path}")
    with open(path) as fh:
        try:
            mapping = json.load(fh)
        except json.JSONDecodeError as e:
            raise ConfigError(f"config file {path} is not valid JSON: {e}") from None
    if not isinstance(mapping, dict):
        raise ConfigError(f"config file {path} must hold a JSON object")
    if args.seed is not None:
        mapping["seed"] = args.seed
    if getattr(args, "taus", None):
        mapping["taus"] = [float(x) for x in args.taus.split(",")]
    pvm = dict(mapping.get("pvm") or {})
    if getattr(args, "horizons", None) is not None:
        pvm["horizons"] = args.horizons
    if getattr(args, "ordering", None):
        pvm["ordering"] = [s.strip() for s in args.ordering.split(",")]
    if getattr(args, "lag_order", None):
        pvm["lag_order"] = (
            "auto" if args.lag_order == "auto" else int(args.lag_order)
        )
    if getattr(args, "max_lag_order", None) is not None:
        pvm["max_lag_order"] = args.max_lag_order
    if pvm:
        mapping["pvm"] = pvm
    if getattr(args, "lags", None) is not None:
        # same flag name, different knob: augmentation lags for the unit-root
        # screen, Wald lag order for the causality table
        key = "uncertainty_lags" if args.command == "granger" else "unit_root_lags"
        mapping[key] = args.lags
    return _build_config(mapping, os.path.dirname(os.path.abspath(path)))


# -- deterministic file plumbing ---------------------------------------------

def _canonical_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _config_hash(mapping: dict) -> str:
    blob = json.dumps(mapping, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def _atomic_write(path: str, text: str) -> None:
    tmp = f"{path}.tmp{os.getpid()}"
    with open(tmp, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _write_json(path: str, obj) -> None:
    _atomic_write(path, _canonical_json(obj))


def _write_manifest(outdir: str, command: str, cfg_mapping: dict, seed: int) -> None:
    path = os.path.join(outdir, "manifest.json")
    manifest: dict = {}
    if os.path.exists(path):
        with open(path) as fh:
            manifest = json.load(fh)
    manifest[command] = {
        "config_hash": _config_hash(cfg_mapping),
        "seed": seed,
        "package_version": __version__,
        "quantile_backend": solver_backend(),
    }
    _write_json(path, manifest)


def _ensure_outdir(args: argparse.Namespace) -> str:
    out = args.out
    if out is None:
        raise ConfigError("--out is required")
    os.makedirs(out, exist_ok=True)
    return out


# -- input loading and transforms --------------------------------------------

def _load_quarterly(cfg: RunConfig) -> PanelDataset:
    panel = load_panel_csv(cfg.path("quarterly_csv"), CsvSchema(), QUARTERLY)
    missing = [
        v for v in [cfg.response] + cfg.financial if v not in panel.variables
    ]
    if missing:
        raise ConfigError(
            f"quarterly file lacks variables: {', '.join(missing)}"
        )
    return panel


def _load_monthly(cfg: RunConfig) -> PanelDataset | None:
    needed = list(cfg.uncertainty) + list(cfg.pvm.hf_series)
    if not needed:
        return None
    panel = load_panel_csv(cfg.path("monthly_csv"), CsvSchema(), MONTHLY)
    missing = [v for v in dict.fromkeys(needed) if v not in panel.variables]
    if missing:
        raise ConfigError(f"monthly file lacks variables: {', '.join(missing)}")
    return panel


def _single_series(panel: PanelDataset, name: str) -> np.ndarray:
    row = panel.values(name)[0]
    finite = np.flatnonzero(~np.isnan(row))
    if finite.size == 0:
        raise ConfigError(f"series {name!r} has no observations")
    return row[finite[0] : finite[-1] + 1]


def _stationarity_records(cfg: RunConfig, qpanel, mpanel):
    """Test every modeled variable; non-rejection at 5% flags differencing."""
    llc_rows = []
    for name in [cfg.response] + list(cfg.financial):
        llc_rows.append(
            llc_test(
                qpanel, name, lags=cfg.unit_root_lags,
                cross_demean=cfg.cross_demean,
            )
        )
    adf_rows = []
    pp_rows = []
    monthly_names = list(
        dict.fromkeys(list(cfg.uncertainty) + list(cfg.pvm.hf_series))
    )
    for name in monthly_names:
        series = _single_series(mpanel, name)
        adf_rows.append((name, adf_test(series, lags=cfg.unit_root_lags)))
        pp_rows.append((name, pp_test(series)))
    difference: list[str] = []
    for name, res in zip([cfg.response] + list(cfg.financial), llc_rows):
        if res.marker == "":
            difference.append(name)
    for (name, a), (_, p) in zip(adf_rows, pp_rows):
        if a.marker == "" or p.marker == "":
            difference.append(name)
    return llc_rows, adf_rows, pp_rows, difference


def _read_decisions(outdir: str) -> list[str] | None:
    path = os.path.join(outdir, "stationarity.json")
    if not os.path.exists(path):
        return None
    with open(path) as fh:
        return list(json.load(fh)["difference"])


def _differencing(cfg: RunConfig, qpanel, mpanel, outdir: str) -> list[str]:
    prior = _read_decisions(outdir)
    if prior is not None:
        return prior
    _, _, _, difference = _stationarity_records(cfg, qpanel, mpanel)
    return difference


def _attach_uncertainty(
    qpanel: PanelDataset, mpanel: PanelDataset, names: list[str], how: str
) -> PanelDataset:
    clash = [n for n in names if n in qpanel.variables]
    if clash:
        raise ConfigError(
            f"variables present in both files: {', '.join(clash)}"
        )
    agg = to_quarterly(mpanel.select(names), how=how)
    if tuple(agg.entities) != tuple(qpanel.entities):
        if agg.n_entities != 1:
            raise AlignmentError(
                "monthly entities match neither the quarterly panel nor a "
                "single shared series"
            )
        agg = agg.broadcast_to_entities(qpanel.entities)
    pos = {per: t for t, per in enumerate(agg.timeline)}
    new = {}
    for name in names:
        src = agg.values(name)
        arr = np.full((qpanel.n_entities, qpanel.n_periods), np.nan)
        for t, per in enumerate(qpanel.timeline):
            if per in pos:
                arr[:, t] = src[:, pos[per]]
        new[name] = arr
    return qpanel.with_variables(new)


def _pqr_panel(cfg: RunConfig, outdir: str):
    """Quarterly panel with aggregated uncertainty and differencing applied."""
    qpanel = _load_quarterly(cfg)
    mpanel = _load_monthly(cfg)
    difference = _differencing(cfg, qpanel, mpanel, outdir)
    if cfg.uncertainty:
        qpanel = _attach_uncertainty(
            qpanel, mpanel, list(cfg.uncertainty), cfg.monthly_agg
        )
    flagged = [
        n
        for n in [cfg.response] + list(cfg.financial) + list(cfg.uncertainty)
        if n in difference
    ]
    if flagged:
        qpanel = first_difference(qpanel, flagged)
    return qpanel, difference


# -- subcommands --------------------------------------------------------------

def cmd_stationarity(cfg: RunConfig, args: argparse.Namespace) -> int:
    outdir = _ensure_outdir(args)
    qpanel = _load_quarterly(cfg)
    mpanel = _load_monthly(cfg)
    llc_rows, adf_rows, pp_rows, difference = _stationarity_records(
        cfg, qpanel, mpanel
    )
    report = {
        "llc": [
            dict(variable=name, **res.to_json_record())
            for name, res in zip([cfg.response] + list(cfg.financial), llc_rows)
        ],
        "adf": [dict(variable=n, **r.to_json_record()) for n, r in adf_rows],
        "pp": [dict(variable=n, **r.to_json_record()) for n, r in pp_rows],
        "difference": difference,
    }
    _write_json(os.path.join(outdir, "stationarity.json"), report)
    lines = [
        f"{'variable':<12}{'test':<6}{'statistic':>12}{'5% c.v.':>10}"
        f"{'bracket':>16}  decision"
    ]
    for group, rows in (("llc", report["llc"]), ("adf", report["adf"]), ("pp", report["pp"])):
        for row in rows:
            decision = (
                "difference" if row["variable"] in difference else "keep levels"
            )
            lines.append(
                f"{row['variable']:<12}{group.upper():<6}"
                f"{row['statistic']:>12.4f}{row['critical_values']['5%']:>10.3f}"
                f"{row['p_value_bracket']:>16}  {decision}"
            )
    lines.append("")
    lines.append(
        "difference before modeling: "
        + (", ".join(difference) if difference else "(none)")
    )
    _atomic_write(os.path.join(outdir, "stationarity.txt"), "\n".join(lines) + "\n")
    _write_manifest(outdir, "stationarity", cfg.raw, cfg.seed)
    return 0


def _mcmc_job(payload):
    panel, response, financial, tau, chain, uncertainty, lags = payload
    return pqr_mcmc_fit(
        panel,
        response,
        financial,
        tau,
        chain_config=chain,
        uncertainty_regressors=uncertainty,
        uncertainty_lags=lags,
    )


def _heterogeneity_notes(fits: list[PqrMcmcFit]) -> list[str]:
    if len(fits) < 2:
        return []
    by_tau = sorted(fits, key=lambda f: f.tau)
    lo, hi = by_tau[0], by_tau[-1]
    lo_s, hi_s = lo.slope_summary(), hi.slope_summary()
    notes = []
    for name in lo.slope_names:
        (m0, s0), (m1, s1) = lo_s[name], hi_s[name]
        spread = float(np.hypot(s0, s1))
        if spread == 0.0:
            continue
        z = abs(m1 - m0) / spread
        if z > 2.0:
            notes.append(
                f"{name}: slope moves across quantile levels "
                f"({m0:.4f} at tau={lo.tau:g} vs {m1:.4f} at tau={hi.tau:g}, "
                f"z={z:.1f})"
            )
    return notes


def cmd_pqr(cfg: RunConfig, args: argparse.Namespace) -> int:
    outdir = _ensure_outdir(args)
    panel, difference = _pqr_panel(cfg, outdir)
    lagged, slopes = _design_with_lags(
        panel,
        cfg.response,
        list(cfg.financial),
        list(cfg.uncertainty),
        cfg.uncertainty_lags,
    )
    taus = [float(t) for t in cfg.taus]
    mm = mmqr_fit(
        lagged,
        cfg.response,
        slopes,
        taus,
        scale_tolerance_share=cfg.scale_tolerance_share,
    )
    fits: list[PqrMcmcFit] = []
    if cfg.mcmc.enabled:
        jobs = []
        for j, tau in enumerate(taus):
            chain = ChainConfig(
                iterations=cfg.mcmc.iterations,
                burn_in=cfg.mcmc.burn_in,
                thin=cfg.mcmc.thin,
                proposal_scale=cfg.mcmc.proposal_scale,
                seed=cfg.seed * 1000 + j,
            )
            jobs.append(
                (panel, cfg.response, list(cfg.financial), tau, chain,
                 list(cfg.uncertainty), cfg.uncertainty_lags)
            )
        if args.threads > 1 and len(jobs) > 1:
            with concurrent.futures.ProcessPoolExecutor(
                max_workers=min(args.threads, len(jobs))
            ) as pool:
                fits = list(pool.map(_mcmc_job, jobs))
        else:
            fits = [_mcmc_job(job) for job in jobs]
    table = quantile_coefficient_table(fits if fits else mm, taus)
    _atomic_write(os.path.join(outdir, "pqr.csv"), table.to_csv_text())
    notes = (
        _heterogeneity_notes(fits)
        if fits
        else ["quantile heterogeneity assessment needs mcmc.enabled=true"]
    )
    report = {
        "taus": taus,
        "difference_applied": [v for v in difference],
        "mmqr": mm.to_json_record(),
        "mcmc": {
            "enabled": cfg.mcmc.enabled,
            "fits": [f.to_json_record() for f in fits],
            "mean_acceptance_rates": {
                f"{f.tau:g}": f.mean_acceptance_rate for f in fits
            },
        },
        "table": table.to_json_record(),
        "heterogeneity": notes,
    }
    _write_json(os.path.join(outdir, "pqr.json"), report)
    _write_manifest(outdir, "pqr", cfg.raw, cfg.seed)
    return 0


def _expand_ordering(cfg: RunConfig, design) -> list[str] | None:
    names = cfg.pvm.ordering
    if not names:
        return None
    expanded: list[str] = []
    for name in names:
        if name in design.lf_names:
            expanded.append(name)
        elif name in design.hf_names:
            expanded.extend(f"{name}[m{j + 1}]" for j in range(design.m))
        else:
            raise ConfigError(f"ordering names unknown series {name!r}")
    return expanded


def _irf_file_name(shock: str, response: str) -> str:
    def clean(s: str) -> str:
        return s.replace("[", "_").replace("]", "")

    return f"irf_{clean(shock)}__{clean(response)}.csv"


def cmd_pvm(cfg: RunConfig, args: argparse.Namespace) -> int:
    outdir = _ensure_outdir(args)
    if not cfg.pvm.lf_series:
        raise ConfigError("pvm.lf_series must name at least one variable")
    qpanel = _load_quarterly(cfg)
    mpanel = _load_monthly(cfg)
    missing = [v for v in cfg.pvm.lf_series if v not in qpanel.variables]
    if missing:
        raise ConfigError(f"quarterly file lacks variables: {', '.join(missing)}")
    difference = _differencing(cfg, qpanel, mpanel, outdir)
    lf_flagged = [v for v in cfg.pvm.lf_series if v in difference]
    if lf_flagged:
        qpanel = first_difference(qpanel, lf_flagged)
    hf_panel = None
    if cfg.pvm.hf_series:
        hf_flagged = [v for v in cfg.pvm.hf_series if v in difference]
        hf_panel = mpanel.select(cfg.pvm.hf_series)
        if hf_flagged:
            hf_panel = first_difference(hf_panel, hf_flagged)
    selection = select_lag_order(
        hf_panel,
        qpanel,
        cfg.pvm.max_lag_order,
        hf_series=list(cfg.pvm.hf_series) or None,
        lf_series=list(cfg.pvm.lf_series),
    )
    p = selection.auto if cfg.pvm.lag_order == "auto" else int(cfg.pvm.lag_order)
    design = build_midas_design(
        hf_panel,
        qpanel,
        p,
        hf_series=list(cfg.pvm.hf_series) or None,
        lf_series=list(cfg.pvm.lf_series),
    )
    hyper = MinnesotaHyper(**cfg.pvm.hyper) if cfg.pvm.hyper else None
    prior = minnesota_midas_prior(design, hyper)
    posterior = gibbs_sample(
        design,
        prior,
        GibbsConfig(
            draws=cfg.pvm.draws,
            burn_in=cfg.pvm.burn_in,
            thin=cfg.pvm.thin,
            seed=cfg.seed,
        ),
    )
    irf = impulse_response(
        posterior, cfg.pvm.horizons, ordering=_expand_ordering(cfg, design)
    )
    _write_json(
        os.path.join(outdir, "lag_selection.json"),
        dict(selection.to_json_record(), used=p),
    )
    _write_json(
        os.path.join(outdir, "posterior_summary.json"),
        {
            "lag_order": p,
            "columns": list(design.columns),
            "ordering": list(irf.ordering),
            "horizons": cfg.pvm.horizons,
            "n_rows": design.n_rows,
            "coefficients": posterior.posterior_summary(),
            "explosive_share": irf.explosive_share,
            "warning": irf.warning,
        },
    )
    _atomic_write(os.path.join(outdir, "irf.csv"), irf.to_csv_text())
    pair_dir = os.path.join(outdir, "irf")
    os.makedirs(pair_dir, exist_ok=True)
    cols = list(irf.columns)
    header = "horizon,median,lower_5,upper_95\n"
    for j, shock in enumerate(cols):
        for i, response in enumerate(cols):
            rows = [header]
            for h in range(irf.horizons + 1):
                rows.append(
                    f"{h},{float(irf.median[h, i, j])!r},"
                    f"{float(irf.lower[h, i, j])!r},"
                    f"{float(irf.upper[h, i, j])!r}\n"
                )
            _atomic_write(
                os.path.join(pair_dir, _irf_file_name(shock, response)),
                "".join(rows),
            )
    _write_manifest(outdir, "pvm", cfg.raw, cfg.seed)
    return 0


def cmd_granger(cfg: RunConfig, args: argparse.Namespace) -> int:
    outdir = _ensure_outdir(args)
    panel, difference = _pqr_panel(cfg, outdir)
    rows = granger_suite(
        panel, cfg.response, list(cfg.uncertainty), lags=cfg.uncertainty_lags
    )
    _atomic_write(os.path.join(outdir, "granger.csv"), suite_to_csv_text(rows))
    _write_json(
        os.path.join(outdir, "granger.json"),
        {
            "effect": cfg.response,
            "lags": cfg.uncertainty_lags,
            "difference_applied": list(difference),
            "rows": [r.to_json_record() for r in rows],
        },
    )
    _write_manifest(outdir, "granger", cfg.raw, cfg.seed)
    return 0


_DEMO_CONFIG = {
    "quarterly_csv": "quarterly.csv",
    "monthly_csv": "monthly.csv",
    "response": "q",
    "financial": ["cr", "da", "oiad", "qr"],
    "uncertainty": ["epu", "rec_risk", "infexp", "consconf"],
    "taus": [0.25, 0.5, 0.75],
    "uncertainty_lags": 3,
    "unit_root_lags": 1,
    "monthly_agg": "mean",
    "cross_demean": True,
    "scale_tolerance_share": 0.0,
    "mcmc": {
        "enabled": True,
        "iterations": 3000,
        "burn_in": 1000,
        "thin": 2,
        "proposal_scale": 0.1,
    },
    "pvm": {
        "hf_series": ["epu"],
        "lf_series": ["q"],
        "lag_order": "auto",
        "max_lag_order": 4,
        "draws": 3000,
        "burn_in": 1000,
        "thin": 2,
        "ordering": None,
        "horizons": 12,
        "hyper": None,
    },
}


def _write_panel(panel: PanelDataset, path: str) -> None:
    tmp = f"{path}.tmp{os.getpid()}"
    write_panel_csv(panel, tmp)
    os.replace(tmp, path)


def cmd_simulate(args: argparse.Namespace) -> int:
    if args.seed is None:
        raise ConfigError("seed is required (--seed)")
    outdir = _ensure_outdir(args)
    spec = DgpSpec(
        kind=args.kind,
        n_entities=args.n_entities,
        n_periods=args.n_periods,
        seed=args.seed,
        coupling=args.coupling,
    )
    data = generate(spec)
    written: list[str] = []
    if args.kind == "midas_var":
        monthly, quarterly = data
        _write_panel(monthly, os.path.join(outdir, "monthly.csv"))
        _write_panel(quarterly, os.path.join(outdir, "quarterly.csv"))
        config = dict(_DEMO_CONFIG, seed=args.seed)
        _write_json(os.path.join(outdir, "config.json"), config)
        written = ["monthly.csv", "quarterly.csv", "config.json"]
    else:
        _write_panel(data, os.path.join(outdir, "panel.csv"))
        written = ["panel.csv"]
    flags = {
        "kind": args.kind,
        "n_entities": args.n_entities,
        "n_periods": args.n_periods,
        "coupling": args.coupling,
        "seed": args.seed,
    }
    _write_manifest(outdir, "simulate", flags, args.seed)
    print("wrote " + ", ".join(written))
    return 0


# -- entry point ---------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="panelmix",
        description="batch pipeline: simulate, stationarity, pqr, pvm, granger",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file")
    common.add_argument("--seed", type=int, help="override the config seed")
    common.add_argument("--out", help="output directory")
    common.add_argument(
        "--threads", type=int, default=1, help="worker processes for MCMC fits"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser(
        "simulate", parents=[common], help="write synthetic input CSVs"
    )
    sim.add_argument("--kind", required=True, choices=KINDS)
    sim.add_argument("--n-entities", type=int, default=30)
    sim.add_argument("--n-periods", type=int, default=100)
    sim.add_argument("--coupling", choices=("demo", "null"), default="demo")

    st = sub.add_parser(
        "stationarity", parents=[common], help="unit-root screening report"
    )
    st.add_argument("--lags", type=int, help="augmentation lag override")

    pqr = sub.add_parser(
        "pqr", parents=[common], help="panel quantile regression report"
    )
    pqr.add_argument("--taus", help="comma-separated quantile levels")

    pvm = sub.add_parser(
        "pvm", parents=[common], help="mixed-frequency VAR and impulse responses"
    )
    pvm.add_argument("--horizons", type=int, help="maximum response horizon")
    pvm.add_argument("--ordering", help="comma-separated recursive ordering")
    pvm.add_argument("--lag-order", help="'auto' or a positive integer")
    pvm.add_argument("--max-lag-order", type=int, help="largest order scored")

    gr = sub.add_parser(
        "granger", parents=[common], help="predictive-content Wald table"
    )
    gr.add_argument("--lags", type=int, help="cause/effect lag order")
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        if args.command == "simulate":
            return cmd_simulate(args)
        cfg = _load_config(args)
        if args.out is None and cfg.raw.get("out"):
            args.out = cfg.raw["out"]
        handler = {
            "stationarity": cmd_stationarity,
            "pqr": cmd_pqr,
            "pvm": cmd_pvm,
            "granger": cmd_granger,
        }[args.command]
        return handler(cfg, args)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except FileNotFoundError as e:
        name = getattr(e, "filename", None) or str(e)
        print(f"error: input file not found: {name}", file=sys.stderr)
        return 2
    except PanelmixError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except np.linalg.LinAlgError as e:
        print(f"error: linear algebra failure: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
