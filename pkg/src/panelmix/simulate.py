"""Synthetic data generating processes for tests, demos, and benchmarks.

Every generator draws from :func:`panelmix._rng.substream` child streams
keyed by the spec seed, so any replication is reproducible in isolation.
Dynamic processes burn in 100 periods before emitting data; independent
draw kinds need no burn-in.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ._rng import substream
from .panel import MONTHLY, QUARTERLY, PanelDataset, Period, period_range

KINDS = (
    "location_shift_panel",
    "location_scale_panel",
    "var",
    "midas_var",
    "random_walk_panel",
)

BURN_IN = 100

_LF_START = Period(1980, 1)


@dataclass(frozen=True)
class DgpSpec:
    """Declarative description of one synthetic process.

    Matrix-valued parameters are nested tuples so specs stay hashable and
    comparable; they are converted to arrays at generation time.
    """

    kind: str
    n_entities: int = 1
    n_periods: int = 120
    seed: int = 0
    # iid location / location-scale panels
    beta: tuple[float, ...] = (1.0,)
    alpha_sd: float = 1.0
    noise: str = "normal"  # "normal" | "student_t"
    noise_df: int = 5
    noise_scale: float = 1.0
    scale_intercept: float = 1.0
    scale_slope: float = 0.5
    # var kind
    var_coefs: tuple = ()  # one K x K nested tuple per lag
    var_cov: tuple = ()  # K x K nested tuple; identity when empty
    var_names: tuple[str, ...] = ()
    # random_walk_panel
    n_variables: int = 1
    # midas_var kind
    m: int = 3
    k_hf: int = 4
    k_lf: int = 5
    hf_names: tuple[str, ...] = ()
    lf_names: tuple[str, ...] = ()
    unit_root: tuple[str, ...] = ("q", "da", "oiad")
    coupling: str = "demo"  # "demo" | "null"


@dataclass(frozen=True)
class MidasTruth:
    """Stacked-system truth for the midas_var kind.

    ``columns`` follow the stacked design order (each high-frequency
    series by intra-period slot, then low-frequency series). Columns
    listed in ``unit_root`` are described in first differences.
    """

    columns: tuple[str, ...]
    a_mats: tuple  # (p, K, K) nested tuples
    sigma: tuple  # (K, K) nested tuples
    unit_root: tuple[str, ...]


def _noise(rng: np.random.Generator, size, spec: DgpSpec) -> np.ndarray:
    if spec.noise == "normal":
        return spec.noise_scale * rng.standard_normal(size)
    if spec.noise == "student_t":
        return spec.noise_scale * rng.standard_t(spec.noise_df, size)
    raise ValueError(f"unknown noise kind {spec.noise!r}")


def _entity_names(n: int, prefix: str = "e") -> tuple[str, ...]:
    width = max(2, len(str(n)))
    return tuple(f"{prefix}{i + 1:0{width}d}" for i in range(n))


def _companion_radius(a_mats: np.ndarray) -> float:
    p, k, _ = a_mats.shape
    comp = np.zeros((k * p, k * p))
    comp[:k] = np.hstack(list(a_mats))
    if p > 1:
        comp[k:, :-k] = np.eye(k * (p - 1))
    return float(np.max(np.abs(np.linalg.eigvals(comp))))


def _simulate_var(
    rng: np.random.Generator, a_mats: np.ndarray, chol: np.ndarray, t: int
) -> np.ndarray:
    p, k, _ = a_mats.shape
    total = t + BURN_IN
    y = np.zeros((total + p, k))
    shocks = rng.standard_normal((total + p, k)) @ chol.T
    for s in range(p, total + p):
        acc = shocks[s].copy()
        for lag in range(p):
            acc += a_mats[lag] @ y[s - 1 - lag]
        y[s] = acc
    return y[p + BURN_IN :]


# -- midas default truth -----------------------------------------------------

_DEMO_HF_NAMES = ("epu", "rec_risk", "infexp", "consconf")
_DEMO_LF_NAMES = ("q", "cr", "qr", "da", "oiad")


def _midas_names(spec: DgpSpec) -> tuple[tuple[str, ...], tuple[str, ...]]:
    hf = spec.hf_names or _DEMO_HF_NAMES[: spec.k_hf]
    lf = spec.lf_names or _DEMO_LF_NAMES[: spec.k_lf]
    if len(hf) != spec.k_hf or len(lf) != spec.k_lf:
        raise ValueError("hf_names/lf_names lengths must match k_hf/k_lf")
    if len(hf) > len(_DEMO_HF_NAMES) and not spec.hf_names:
        raise ValueError("provide hf_names for k_hf > 4")
    return tuple(hf), tuple(lf)


def midas_truth(spec: DgpSpec) -> MidasTruth:
    """True stacked VAR(2) matrices used by the midas_var kind."""
    if spec.kind != "midas_var":
        raise ValueError("midas_truth applies to midas_var specs")
    if spec.coupling not in ("demo", "null"):
        raise ValueError(f"unknown coupling {spec.coupling!r}")
    m, k_hf, k_lf = spec.m, spec.k_hf, spec.k_lf
    hf_names, lf_names = _midas_names(spec)
    k = m * k_hf + k_lf
    a1 = np.zeros((k, k))
    a2 = np.zeros((k, k))
    # high-frequency block: slots persist on themselves and on the latest
    # slot of the previous period; autonomous from the firm block
    for s in range(k_hf):
        base = m * s
        for j in range(m):
            a1[base + j, base + j] += 0.15
            a1[base + j, base + m - 1] += 0.20
            a2[base + j, base + j] += 0.45
    lf0 = m * k_hf
    for v in range(k_lf):
        a1[lf0 + v, lf0 + v] = 0.15
        a2[lf0 + v, lf0 + v] = 0.45
    if spec.coupling == "demo":
        # first firm variable responds to the first high-frequency series
        # with one quarter lag (and weakly at two quarters), plus a mild
        # loading on the third series when present
        if k_hf >= 1:
            a1[lf0, 0:m] = np.linspace(0.10, 0.15, m)
            a2[lf0, 0:m] = 0.05
        if k_hf >= 3:
            a1[lf0, 2 * m : 3 * m] = 0.05
    sigma = np.eye(k)
    for s in range(k_hf):
        base = m * s
        block = np.full((m, m), 0.4)
        np.fill_diagonal(block, 1.0)
        sigma[base : base + m, base : base + m] = block
    lf_sd = 0.5
    lf_corr = np.eye(k_lf)
    if spec.coupling == "demo" and k_lf > 1:
        lf_corr[0, 1:] = 0.3
        lf_corr[1:, 0] = 0.3
    sigma[lf0:, lf0:] = lf_sd * lf_corr * lf_sd
    a_mats = np.stack([a1, a2])
    radius = _companion_radius(a_mats)
    if radius >= 0.98:
        raise ValueError(f"midas truth unstable (spectral radius {radius:.3f})")
    columns = tuple(
        f"{name}[m{j + 1}]" for name in hf_names for j in range(m)
    ) + lf_names
    return MidasTruth(
        columns=columns,
        a_mats=(_nest(a1), _nest(a2)),
        sigma=_nest(sigma),
        unit_root=tuple(n for n in spec.unit_root if n in lf_names),
    )


def _nest(a: np.ndarray) -> tuple:
    return tuple(tuple(float(x) for x in row) for row in a)


# -- generators --------------------------------------------------------------

def generate(spec: DgpSpec):
    """Materialize a spec; returns a panel, or (monthly, quarterly) for midas_var."""
    if spec.kind not in KINDS:
        raise ValueError(
            f"unknown DGP kind {spec.kind!r}; expected one of {', '.join(KINDS)}"
        )
    if spec.n_entities < 1 or spec.n_periods < 3:
        raise ValueError("need n_entities >= 1 and n_periods >= 3")
    return _GENERATORS[spec.kind](spec)


def _iid_panel(spec: DgpSpec, location_scale: bool) -> PanelDataset:
    n, t, k = spec.n_entities, spec.n_periods, len(spec.beta)
    rng_alpha = substream(spec.seed, 0)
    rng_x = substream(spec.seed, 1)
    rng_u = substream(spec.seed, 2)
    alpha = spec.alpha_sd * rng_alpha.standard_normal(n)
    if location_scale:
        x = rng_x.uniform(0.5, 2.5, size=(n, t, k))
        lo = spec.scale_intercept + spec.scale_slope * 0.5
        hi = spec.scale_intercept + spec.scale_slope * 2.5
        if min(lo, hi) <= 0:
            raise ValueError("scale function not positive over the regressor support")
        scale = spec.scale_intercept + spec.scale_slope * x[:, :, 0]
    else:
        x = rng_x.standard_normal((n, t, k))
        scale = 1.0
    u = _noise(rng_u, (n, t), spec)
    y = alpha[:, None] + x @ np.asarray(spec.beta) + scale * u
    timeline = period_range(
        _LF_START, _advance(_LF_START, t - 1, QUARTERLY), QUARTERLY
    )
    values = {f"x{j + 1}": x[:, :, j] for j in range(k)}
    values["y"] = y
    return PanelDataset(_entity_names(n), timeline, QUARTERLY, values)


def _advance(start: Period, steps: int, frequency: str) -> Period:
    per_year = {QUARTERLY: 4, MONTHLY: 12}[frequency]
    total = (start.index - 1) + steps
    return Period(start.year + total // per_year, total % per_year + 1)


def _gen_location_shift(spec: DgpSpec) -> PanelDataset:
    return _iid_panel(spec, location_scale=False)


def _gen_location_scale(spec: DgpSpec) -> PanelDataset:
    return _iid_panel(spec, location_scale=True)


def _gen_var(spec: DgpSpec) -> PanelDataset:
    if not spec.var_coefs:
        raise ValueError("var kind requires var_coefs")
    a_mats = np.asarray(spec.var_coefs, dtype=float)
    if a_mats.ndim == 2:
        a_mats = a_mats[None]
    p, k, k2 = a_mats.shape
    if k != k2:
        raise ValueError("var_coefs must be square matrices")
    radius = _companion_radius(a_mats)
    if radius >= 1.0:
        raise ValueError(f"unstable var process (spectral radius {radius:.3f})")
    cov = np.asarray(spec.var_cov, dtype=float) if spec.var_cov else np.eye(k)
    chol = np.linalg.cholesky(cov)
    names = spec.var_names or tuple(f"var{j + 1}" for j in range(k))
    if len(names) != k:
        raise ValueError("var_names length must match coefficient dimension")
    n, t = spec.n_entities, spec.n_periods
    out = np.empty((n, t, k))
    for i in range(n):
        out[i] = _simulate_var(substream(spec.seed, i), a_mats, chol, t)
    timeline = period_range(
        _LF_START, _advance(_LF_START, t - 1, QUARTERLY), QUARTERLY
    )
    values = {name: out[:, :, j] for j, name in enumerate(names)}
    return PanelDataset(_entity_names(n), timeline, QUARTERLY, values)


def _gen_random_walk(spec: DgpSpec) -> PanelDataset:
    n, t, k = spec.n_entities, spec.n_periods, spec.n_variables
    steps = np.empty((n, t, k))
    for i in range(n):
        steps[i] = substream(spec.seed, i).standard_normal((t, k))
    walks = np.cumsum(steps, axis=1)
    timeline = period_range(
        _LF_START, _advance(_LF_START, t - 1, QUARTERLY), QUARTERLY
    )
    names = [f"rw{j + 1}" for j in range(k)] if k > 1 else ["rw"]
    values = {name: walks[:, :, j] for j, name in enumerate(names)}
    return PanelDataset(_entity_names(n), timeline, QUARTERLY, values)


def _gen_midas(spec: DgpSpec) -> tuple[PanelDataset, PanelDataset]:
    truth = midas_truth(spec)
    m, k_hf, k_lf = spec.m, spec.k_hf, spec.k_lf
    hf_names, lf_names = _midas_names(spec)
    a_mats = np.asarray(truth.a_mats)
    sigma = np.asarray(truth.sigma)
    p = a_mats.shape[0]
    n_hf = m * k_hf
    t = spec.n_periods
    chol_hf = np.linalg.cholesky(sigma[:n_hf, :n_hf])
    chol_lf = np.linalg.cholesky(sigma[n_hf:, n_hf:])

    # shared high-frequency block, autonomous by construction; the firm
    # recursion below runs over this full path so the joint process is
    # stationary at the emitted window
    total = t + BURN_IN
    z_full = _simulate_var(
        substream(spec.seed, 0), a_mats[:, :n_hf, :n_hf], chol_hf, total
    )

    n = spec.n_entities
    rng_alpha = substream(spec.seed, 1)
    alpha = spec.alpha_sd * rng_alpha.standard_normal((n, k_lf))
    # unit-root core columns get no intercept: their levels stay driftless
    ur_idx = [lf_names.index(name) for name in truth.unit_root]
    alpha[:, ur_idx] = 0.0

    a_fh = a_mats[:, n_hf:, :n_hf]
    a_ff = a_mats[:, n_hf:, n_hf:]
    core = np.empty((n, t, k_lf))
    for i in range(n):
        rng_i = substream(spec.seed, 2, i)
        shocks = rng_i.standard_normal((total, k_lf)) @ chol_lf.T
        f = np.zeros((total, k_lf))
        for s in range(total):
            acc = alpha[i] + shocks[s]
            for lag in range(min(p, s)):
                acc += a_fh[lag] @ z_full[s - 1 - lag] + a_ff[lag] @ f[s - 1 - lag]
            f[s] = acc
        core[i] = f[BURN_IN:]
    z = z_full[BURN_IN:]

    lf_values: dict[str, np.ndarray] = {}
    for v, name in enumerate(lf_names):
        col = core[:, :, v]
        lf_values[name] = np.cumsum(col, axis=1) if name in truth.unit_root else col
    lf_timeline = period_range(
        _LF_START, _advance(_LF_START, t - 1, QUARTERLY), QUARTERLY
    )
    lf_panel = PanelDataset(
        _entity_names(n, "firm"), lf_timeline, QUARTERLY, lf_values
    )

    hf_values: dict[str, np.ndarray] = {}
    for s, name in enumerate(hf_names):
        monthly = np.empty((1, m * t))
        for j in range(m):
            monthly[0, j::m] = z[:, m * s + j]
        hf_values[name] = monthly
    hf_start = Period(_LF_START.year, (_LF_START.index - 1) * 3 + 1)
    hf_timeline = period_range(
        hf_start, _advance(hf_start, m * t - 1, MONTHLY), MONTHLY
    )
    hf_panel = PanelDataset(("macro",), hf_timeline, MONTHLY, hf_values)
    return hf_panel, lf_panel


_GENERATORS = {
    "location_shift_panel": _gen_location_shift,
    "location_scale_panel": _gen_location_scale,
    "var": _gen_var,
    "midas_var": _gen_midas,
    "random_walk_panel": _gen_random_walk,
}
