"""Materials-design campaign: grid, measurements, iteration, persistence.

The campaign owns the simplex-constrained design grid, ingests human (or
surrogate) measurements, runs one classify-and-suggest iteration at a
time, and persists everything to a versioned JSON document.
"""

from __future__ import annotations

import datetime as _dt
import hashlib
import json
import math
import os
import tempfile
from dataclasses import dataclass, field, asdict

import numpy as np

from . import embed as embed_mod
from . import fls, gp, pal
from .errors import (
    CampaignFormatError,
    InvalidArgument,
    NotFound,
    UnsupportedVersion,
)

FORMAT_VERSION = 1

DEFAULT_SPEEDS = (1000.0, 2000.0, 4000.0, 6000.0, 8000.0)
DEFAULT_DILUTIONS = (0.0, 0.25, 0.5, 0.75, 1.0)
DEFAULT_SIMPLEX_DENOMINATOR = 9


@dataclass(frozen=True)
class GridConfig:
    simplex_denominator: int = DEFAULT_SIMPLEX_DENOMINATOR
    speeds: tuple[float, ...] = DEFAULT_SPEEDS
    dilutions: tuple[float, ...] = DEFAULT_DILUTIONS

    def __post_init__(self):
        if self.simplex_denominator < 1:
            raise InvalidArgument("simplex step must divide 1 evenly")
        if not self.speeds or not self.dilutions:
            raise InvalidArgument("speed and dilution level sets must be nonempty")


@dataclass
class DesignPoint:
    id: int
    c_pvp10: float
    c_pvp40: float
    c_pvp360: float
    spin_speed: float
    dilution: float
    normalized_speed: float = 0.0

    def coordinates(self):
        return (self.c_pvp10, self.c_pvp40, self.c_pvp360, self.spin_speed, self.dilution)


@dataclass
class Measurement:
    point_id: int
    hardness: float
    inverse_elasticity: float
    timestamp: str = ""
    note: str = ""

    def __post_init__(self):
        if not (
            math.isfinite(self.hardness)
            and math.isfinite(self.inverse_elasticity)
            and self.hardness > 0
            and self.inverse_elasticity > 0
        ):
            raise InvalidArgument("objective values must be finite and positive")
        if not self.timestamp:
            self.timestamp = _dt.datetime.now(_dt.timezone.utc).isoformat()


def build_grid(config: GridConfig) -> list[DesignPoint]:
    """Simplex compositions x spin speeds x dilutions, in fixed id order."""
    denom = config.simplex_denominator
    min_s, max_s = min(config.speeds), max(config.speeds)
    span_s = max_s - min_s if max_s > min_s else 1.0
    points = []
    idx = 0
    for i in range(denom + 1):
        for j in range(denom + 1 - i):
            k = denom - i - j
            for speed in config.speeds:
                for dilution in config.dilutions:
                    points.append(
                        DesignPoint(
                            id=idx,
                            c_pvp10=i / denom,
                            c_pvp40=j / denom,
                            c_pvp360=k / denom,
                            spin_speed=float(speed),
                            dilution=float(dilution),
                            normalized_speed=(speed - min_s) / span_s,
                        )
                    )
                    idx += 1
    return points


def normalized_design_matrix(points, config: GridConfig) -> np.ndarray:
    """(n, 5) design coordinates for the kernel and the embedding.

    Simplex coordinates enter as-is; speed and dilution are rescaled to
    [0, 1] by level rank so that neighboring levels are evenly spaced.
    """
    speed_rank = {s: i for i, s in enumerate(sorted(set(config.speeds)))}
    dil_rank = {d: i for i, d in enumerate(sorted(set(config.dilutions)))}
    s_denom = max(len(speed_rank) - 1, 1)
    d_denom = max(len(dil_rank) - 1, 1)
    return np.array(
        [
            (
                p.c_pvp10,
                p.c_pvp40,
                p.c_pvp360,
                speed_rank[p.spin_speed] / s_denom,
                dil_rank[p.dilution] / d_denom,
            )
            for p in points
        ]
    )


OBJECTIVES = ("hardness", "inverse_elasticity")


@dataclass
class CampaignState:
    grid_config: GridConfig
    points: list[DesignPoint]
    seed: int = 0
    epsilon: float = 0.01
    delta: float = 0.05
    beta_scale: float = 0.4
    batch_size: int = 3
    fit_restarts: int = 4
    # measurements to collect (pure uncertainty reduction) before any
    # point may be classified; early fits are too unreliable to lock in
    # discard decisions
    burn_in: int = 21
    iteration: int = 0
    measurements: dict[int, Measurement] = field(default_factory=dict)
    audit: list[dict] = field(default_factory=list)
    log: list[dict] = field(default_factory=list)
    pending_overrides: list[int] = field(default_factory=list)
    # PAL snapshot
    low: np.ndarray | None = None
    high: np.ndarray | None = None
    classes: np.ndarray | None = None
    means: np.ndarray | None = None
    stds: np.ndarray | None = None
    objective_ranges: np.ndarray | None = None
    disjoint_fallbacks: int = 0
    kernel_params: list[dict] | None = None
    embedding: np.ndarray | None = None

    @property
    def n_points(self) -> int:
        return len(self.points)

    @property
    def converged(self) -> bool:
        if self.classes is None:
            return False
        return not np.any(self.classes == pal.Classification.UNDECIDED)

    def counts(self) -> dict[str, int]:
        if self.classes is None:
            return {"undecided": self.n_points, "pareto": 0, "discarded": 0}
        c = np.bincount(self.classes, minlength=3)
        return {"undecided": int(c[0]), "pareto": int(c[1]), "discarded": int(c[2])}

    def pareto_ids(self):
        if self.classes is None:
            return []
        return [int(i) for i in np.flatnonzero(self.classes == pal.Classification.PARETO_OPTIMAL)]


def new_campaign(
    grid_config: GridConfig | None = None,
    seed: int = 0,
    epsilon: float = 0.01,
    batch_size: int = 3,
) -> CampaignState:
    cfg = grid_config or GridConfig()
    return CampaignState(
        grid_config=cfg,
        points=build_grid(cfg),
        seed=seed,
        epsilon=epsilon,
        batch_size=batch_size,
    )


def ingest(state: CampaignState, measurement: Measurement) -> CampaignState:
    """Store one measurement; re-ingestion replaces with an audit entry."""
    if measurement.point_id < 0 or measurement.point_id >= state.n_points:
        raise NotFound(f"unknown design point id {measurement.point_id}")
    replaced = measurement.point_id in state.measurements
    state.measurements[measurement.point_id] = measurement
    state.audit.append(
        {
            "action": "replace" if replaced else "ingest",
            "point_id": measurement.point_id,
            "hardness": measurement.hardness,
            "inverse_elasticity": measurement.inverse_elasticity,
            "timestamp": measurement.timestamp,
            "note": measurement.note,
        }
    )
    if measurement.point_id in state.pending_overrides:
        state.pending_overrides.remove(measurement.point_id)
    return state


def import_measurements_csv(state: CampaignState, text: str) -> list[Measurement]:
    """Parse the `point_id,hardness,inverse_elasticity,note` import format."""
    import csv
    import io

    reader = csv.DictReader(io.StringIO(text))
    expected = {"point_id", "hardness", "inverse_elasticity"}
    if reader.fieldnames is None or not expected.issubset(set(reader.fieldnames)):
        raise InvalidArgument(
            "measurement import needs header point_id,hardness,inverse_elasticity,note"
        )
    out = []
    for row in reader:
        m = Measurement(
            point_id=int(row["point_id"]),
            hardness=float(row["hardness"]),
            inverse_elasticity=float(row["inverse_elasticity"]),
            note=(row.get("note") or ""),
        )
        ingest(state, m)
        out.append(m)
    return out


def _fit_models(state: CampaignState):
    X = normalized_design_matrix(state.points, state.grid_config)
    ids = sorted(state.measurements)
    Xs = X[ids]
    models = []
    params_out = []
    for j, name in enumerate(OBJECTIVES):
        y = np.array([getattr(state.measurements[i], name) for i in ids])
        warm = None
        if state.kernel_params and j < len(state.kernel_params):
            p = state.kernel_params[j]
            warm = gp.KernelParams(
                p["signal_variance"], np.array(p["lengthscales"]), p["noise_variance"]
            )
        cfg = gp.FitConfig(
            n_restarts=state.fit_restarts if warm is None else 1,
            max_iter=60 if warm is None else 20,
            seed=(state.seed * 1000003 + (state.iteration + 1) * 101 + j) % (2**31),
            warm_start=warm,
            lengthscale_bounds=(1e-3, 2.0),
        )
        model = gp.fit(Xs, y, cfg)
        models.append(model)
        params_out.append(
            {
                "signal_variance": model.params.signal_variance,
                "lengthscales": list(model.params.lengthscales),
                "noise_variance": model.params.noise_variance,
            }
        )
    state.kernel_params = params_out
    return models, X


@dataclass
class StepArtifacts:
    suggestions: list[DesignPoint]
    converged: bool
    report: fls.Report | None = None
    statements: list | None = None
    embedding: np.ndarray | None = None


def step(
    state: CampaignState,
    compute_report: bool = True,
    compute_embedding: bool = True,
    report_threshold: float = 0.95,
    max_summarizer_size: int = 3,
) -> StepArtifacts:
    """One campaign iteration: refit, reclassify, suggest, explain."""
    if not state.measurements:
        raise InvalidArgument("cannot step before any measurement is ingested")
    models, X = _fit_models(state)
    means, stds = [], []
    for model in models:
        mu, sd = gp.predict_many(model, X)
        means.append(mu)
        stds.append(sd)
    state.means = np.column_stack(means)
    state.stds = np.column_stack(stds)
    state.objective_ranges = np.column_stack(
        (state.means.min(axis=0), state.means.max(axis=0))
    )
    state.iteration += 1
    beta = pal.beta_t(
        state.iteration, state.n_points, len(OBJECTIVES), state.delta, state.beta_scale
    )
    warming_up = len(state.measurements) < state.burn_in
    prev_low = state.low if (state.low is not None and not warming_up) else None
    prev_high = state.high if (state.high is not None and not warming_up) else None
    state.low, state.high, fb = pal.update_regions(
        state.means, state.stds, beta, prev_low, prev_high
    )
    state.disjoint_fallbacks += fb
    if state.classes is None:
        state.classes = np.zeros(state.n_points, dtype=np.int8)
    if not warming_up:
        eps = np.full(len(OBJECTIVES), state.epsilon)
        state.classes = pal.classify(
            state.low, state.high, eps, state.objective_ranges, state.classes
        )

    suggestions = suggest_batch(state, state.batch_size)
    report = None
    statements = None
    if compute_report:
        statements, report = explain(
            state, threshold=report_threshold, max_summarizer_size=max_summarizer_size
        )
    if compute_embedding and state.embedding is None:
        state.embedding = grid_embedding(state)

    state.log.append(
        {
            "event": "step",
            "iteration": state.iteration,
            "beta": beta,
            "counts": state.counts(),
            "suggestions": [p.id for p in suggestions],
            "report_digest": (
                hashlib.sha256(report.markdown.encode()).hexdigest() if report else None
            ),
        }
    )
    return StepArtifacts(
        suggestions=suggestions,
        converged=state.converged,
        report=report,
        statements=statements,
        embedding=state.embedding,
    )


def suggest_batch(state: CampaignState, batch_size: int) -> list[DesignPoint]:
    """Greedy fantasy batch: pick, collapse the region to the mean, repeat."""
    if batch_size < 1:
        raise InvalidArgument("batch_size must be >= 1")
    if state.low is None or state.converged:
        return []
    fantasy = pal.PalState(
        low=state.low.copy(),
        high=state.high.copy(),
        classes=state.classes.copy(),
        means=state.means,
        stds=state.stds,
        sampled_ids=sorted(state.measurements),
        objective_ranges=state.objective_ranges,
    )
    chosen: list[int] = []
    eps = np.full(len(OBJECTIVES), state.epsilon)
    for pid in state.pending_overrides:
        if pid not in state.measurements and len(chosen) < batch_size:
            chosen.append(pid)
            fantasy.sampled_ids.append(pid)
    while len(chosen) < batch_size:
        nxt = pal.select_next(fantasy)
        if nxt is None:
            break
        chosen.append(nxt)
        fantasy.sampled_ids.append(nxt)
        fantasy.low[nxt] = state.means[nxt]
        fantasy.high[nxt] = state.means[nxt]
        fantasy.classes = pal.classify(
            fantasy.low, fantasy.high, eps, state.objective_ranges, fantasy.classes
        )
    return [state.points[i] for i in chosen]


def record_override(state: CampaignState, point_id: int) -> None:
    """Log a human override; the point becomes the next evaluation target."""
    if point_id < 0 or point_id >= state.n_points:
        raise NotFound(f"unknown design point id {point_id}")
    if point_id in state.measurements:
        raise InvalidArgument(f"point {point_id} is already sampled")
    if point_id not in state.pending_overrides:
        state.pending_overrides.append(point_id)
    state.log.append(
        {"event": "override", "iteration": state.iteration, "point_id": point_id}
    )


# --- linguistic explanation -----------------------------------------------

CLASS_NAMES = {0: "undecided", 1: "pareto_optimal", 2: "discarded"}


def fls_variables(state: CampaignState) -> dict[str, fls.LinguisticVariable]:
    speeds = state.grid_config.speeds
    return {
        "c_pvp10": fls.LinguisticVariable("c_pvp10", (0.0, 1.0), label="pvp10 concentration"),
        "c_pvp40": fls.LinguisticVariable("c_pvp40", (0.0, 1.0), label="pvp40 concentration"),
        "c_pvp360": fls.LinguisticVariable("c_pvp360", (0.0, 1.0), label="pvp360 concentration"),
        "spin_speed": fls.LinguisticVariable(
            "spin_speed", (min(speeds), max(speeds)), label="spin speed"
        ),
        "dilution": fls.LinguisticVariable("dilution", (0.0, 1.0), label="dilution"),
    }


def fls_records(state: CampaignState) -> list[dict]:
    span = np.maximum(
        state.objective_ranges[:, 1] - state.objective_ranges[:, 0], 1e-12
    )
    diag = np.linalg.norm((state.high - state.low) / span, axis=1)
    max_diag = float(diag.max()) if diag.size else 1.0
    unc = diag / max_diag if max_diag > 0 else diag
    records = []
    for p in state.points:
        records.append(
            {
                "c_pvp10": p.c_pvp10,
                "c_pvp40": p.c_pvp40,
                "c_pvp360": p.c_pvp360,
                "spin_speed": p.spin_speed,
                "dilution": p.dilution,
                "class": CLASS_NAMES[int(state.classes[p.id])],
                "uncertainty": float(unc[p.id]),
            }
        )
    return records


def fls_qualifiers() -> list[fls.Qualifier]:
    return [
        fls.Qualifier("pareto_optimal", "class", category="pareto_optimal"),
        fls.Qualifier("discarded", "class", category="discarded"),
        fls.Qualifier("undecided", "class", category="undecided"),
        fls.Qualifier(
            "high_uncertainty", "uncertainty", trapezoid=(0.5, 0.7, 1.0, 1.0)
        ),
    ]


def explain(
    state: CampaignState, threshold: float = 0.95, max_summarizer_size: int = 3
):
    """Evaluate, prune, and render the linguistic summary of the grid."""
    if state.classes is None:
        raise InvalidArgument("run a step before asking for an explanation")
    variables = fls_variables(state)
    records = fls_records(state)
    statements = fls.enumerate_statements(
        variables, fls.DEFAULT_QUANTIFIERS, fls_qualifiers(), max_summarizer_size
    )
    evaluated = fls.evaluate_statements(statements, variables, records)
    pruned = fls.simplify(evaluated, threshold)
    report = fls.render_report(
        pruned, variables, campaign_label=f"iteration {state.iteration}"
    )
    return pruned, report


def grid_embedding(state: CampaignState, config: embed_mod.EmbedConfig | None = None):
    """2-D embedding of the design grid (cached by the caller)."""
    cfg = config or embed_mod.EmbedConfig(seed=state.seed)
    X = normalized_design_matrix(state.points, state.grid_config)
    return embed_mod.embed_points(X, cfg)


# --- persistence ------------------------------------------------------------


def _array(a):
    return None if a is None else np.asarray(a).tolist()


def save(state: CampaignState, path: str | None = None) -> str:
    """Serialize the campaign; when path is given, write atomically."""
    doc = {
        "format_version": FORMAT_VERSION,
        "seed": state.seed,
        "epsilon": state.epsilon,
        "delta": state.delta,
        "beta_scale": state.beta_scale,
        "batch_size": state.batch_size,
        "fit_restarts": state.fit_restarts,
        "burn_in": state.burn_in,
        "iteration": state.iteration,
        "grid_config": {
            "simplex_denominator": state.grid_config.simplex_denominator,
            "speeds": list(state.grid_config.speeds),
            "dilutions": list(state.grid_config.dilutions),
        },
        "points": [asdict(p) for p in state.points],
        "measurements": {str(k): asdict(m) for k, m in state.measurements.items()},
        "audit": state.audit,
        "log": state.log,
        "pending_overrides": state.pending_overrides,
        "pal": {
            "low": _array(state.low),
            "high": _array(state.high),
            "classes": _array(state.classes),
            "means": _array(state.means),
            "stds": _array(state.stds),
            "objective_ranges": _array(state.objective_ranges),
            "disjoint_fallbacks": state.disjoint_fallbacks,
            "kernel_params": state.kernel_params,
        },
        "embedding": _array(state.embedding),
    }
    text = json.dumps(doc)
    if path is not None:
        directory = os.path.dirname(os.path.abspath(path))
        fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
        try:
            with os.fdopen(fd, "w") as fh:
                fh.write(text)
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
    return text


def load(document: str) -> CampaignState:
    """Parse a campaign document; rejects unknown future versions."""
    try:
        doc = json.loads(document)
    except json.JSONDecodeError as exc:
        raise CampaignFormatError(
            f"corrupt campaign document: {exc.msg}", location=f"char {exc.pos}"
        )
    version = doc.get("format_version")
    if version != FORMAT_VERSION:
        raise UnsupportedVersion(
            f"campaign format version {version!r} is not supported "
            f"(expected {FORMAT_VERSION})"
        )
    try:
        cfg = GridConfig(
            simplex_denominator=doc["grid_config"]["simplex_denominator"],
            speeds=tuple(doc["grid_config"]["speeds"]),
            dilutions=tuple(doc["grid_config"]["dilutions"]),
        )
        points = [DesignPoint(**p) for p in doc["points"]]
        pal_doc = doc["pal"]

        def arr(key, dtype=float):
            v = pal_doc.get(key)
            return None if v is None else np.asarray(v, dtype=dtype)

        state = CampaignState(
            grid_config=cfg,
            points=points,
            seed=doc["seed"],
            epsilon=doc["epsilon"],
            delta=doc["delta"],
            beta_scale=doc["beta_scale"],
            batch_size=doc["batch_size"],
            fit_restarts=doc.get("fit_restarts", 2),
            burn_in=doc.get("burn_in", 21),
            iteration=doc["iteration"],
            measurements={
                int(k): Measurement(**m) for k, m in doc["measurements"].items()
            },
            audit=doc["audit"],
            log=doc["log"],
            pending_overrides=list(doc.get("pending_overrides", [])),
            low=arr("low"),
            high=arr("high"),
            classes=arr("classes", dtype=np.int8),
            means=arr("means"),
            stds=arr("stds"),
            objective_ranges=arr("objective_ranges"),
            disjoint_fallbacks=pal_doc.get("disjoint_fallbacks", 0),
            kernel_params=pal_doc.get("kernel_params"),
            embedding=(
                None
                if doc.get("embedding") is None
                else np.asarray(doc["embedding"], dtype=float)
            ),
        )
    except (KeyError, TypeError) as exc:
        raise CampaignFormatError(f"missing or malformed field: {exc}")
    return state


def save_to_file(state: CampaignState, path: str) -> None:
    save(state, path)


def load_from_file(path: str) -> CampaignState:
    if not os.path.exists(path):
        raise NotFound(f"campaign file {path!r} does not exist")
    with open(path) as fh:
        return load(fh.read())


def run_campaign(
    state: CampaignState,
    evaluator,
    max_evaluations: int = 120,
    n_initial: int = 3,
    compute_report: bool = False,
    compute_embedding: bool = False,
) -> CampaignState:
    """Drive the campaign with an automatic evaluator until convergence.

    ``evaluator(point) -> (hardness, inverse_elasticity)``; measurement
    count (including any pre-ingested seeds) stays <= max_evaluations.
    """
    if not state.measurements:
        X = normalized_design_matrix(state.points, state.grid_config)
        rng = np.random.default_rng(state.seed)
        for idx in pal._maximin_seed_ids(X, n_initial, rng):
            h, ie = evaluator(state.points[idx])
            ingest(state, Measurement(point_id=idx, hardness=h, inverse_elasticity=ie))
    while len(state.measurements) < max_evaluations:
        artifacts = step(
            state,
            compute_report=compute_report,
            compute_embedding=compute_embedding,
        )
        if artifacts.converged or not artifacts.suggestions:
            break
        budget = max_evaluations - len(state.measurements)
        for point in artifacts.suggestions[:budget]:
            h, ie = evaluator(point)
            ingest(
                state,
                Measurement(point_id=point.id, hardness=h, inverse_elasticity=ie),
            )
    return state
