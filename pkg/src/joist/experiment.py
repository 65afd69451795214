"""Experiment pipelines: splits, model comparison, correlation and composition
tables, synthetic ground-truth datasets, and plot-data emission.

All randomness is owned by explicit SplitMix64 generators seeded per
operation; nothing reads ambient RNG state, so every pipeline is reproducible
from its inputs alone.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from math import fsum
from pathlib import Path
from typing import Iterable, Mapping, NamedTuple, Sequence

from .errors import (
    DegenerateVarianceError,
    IntegrityError,
    RankDeficiencyError,
    ShapeError,
    SynthSpecError,
)
from .features import BlockFeatures, Dataset, VerificationSample
from .fit import ols_fit
from .models import PREDICTORS, ModelKind, ModelSpec, n_predictors, predict
from .rng import SplitMix64, shuffled_indices
from .stats import EvalReport, evaluate, pearson_r

_MAX_SEED = (1 << 64) - 1

# Feature columns reported by correlation_table, in table order.
CORRELATION_FEATURES = ("transparent_in", "transparent_out", "spend", "output", "joinsplit")

_FEATURE_GETTERS = {
    "transparent_in": lambda f: f.n_transparent_in,
    "transparent_out": lambda f: f.n_transparent_out,
    "spend": lambda f: f.n_spend,
    "output": lambda f: f.n_output,
    "joinsplit": lambda f: f.n_joinsplit,
}

COMPARISON_CSV_HEADER = (
    "model,split,n,mae_us,emr,r2,adj_r2,max_abs_error_us,max_prediction_us,n_exceeding"
)


@dataclass(frozen=True)
class SplitPlan:
    """A seeded fit/predict partition of a dataset."""

    seed: int
    n_fit: int
    n_predict: int

    def __post_init__(self) -> None:
        if not 0 <= self.seed <= _MAX_SEED:
            raise IntegrityError(f"seed must be an unsigned 64-bit integer, got {self.seed}")
        if self.n_fit < 1 or self.n_predict < 1:
            raise IntegrityError("n_fit and n_predict must both be >= 1")


def split(ds: Dataset, plan: SplitPlan) -> tuple[Dataset, Dataset]:
    """Partition *ds* uniformly at random into (fit_set, predict_set).

    The partition depends only on (plan.seed, len(ds)): sample indices are
    shuffled by Fisher-Yates driven by SplitMix64(seed), the first
    ``plan.n_fit`` shuffled indices form the fit set, and both sides are
    re-sorted by height. Disjoint and jointly exhaustive by construction.
    """
    if len(ds) != plan.n_fit + plan.n_predict:
        raise ShapeError(
            f"dataset has {len(ds)} samples but plan wants {plan.n_fit} + {plan.n_predict}"
        )
    order = shuffled_indices(len(ds), SplitMix64(plan.seed))
    fit_idx = sorted(order[: plan.n_fit])
    predict_idx = sorted(order[plan.n_fit :])
    fit_set = Dataset(tuple(ds.samples[i] for i in fit_idx))
    predict_set = Dataset(tuple(ds.samples[i] for i in predict_idx))
    return fit_set, predict_set


@dataclass(frozen=True)
class ComparisonRow:
    model_kind: ModelKind
    split_label: str
    report: EvalReport


def run_comparison(
    ds: Dataset,
    plan: SplitPlan,
    kinds: Sequence[ModelKind] = (),
    baselines: Sequence[ModelSpec] = (),
) -> list[ComparisonRow]:
    """Fit-and-evaluate each kind on a seeded split; evaluate baselines as-is.

    Fitted kinds are trained on the fit set and evaluated on the predict set;
    baselines skip fitting and are evaluated on the same predict set. One row
    per model, in the order given (fitted kinds first).
    """
    fit_set, predict_set = split(ds, plan)
    label = f"{plan.n_fit}/{plan.n_predict}"
    t = [float(v) for v in predict_set.times_us()]
    rows = []
    for kind in kinds:
        model = ols_fit(kind, fit_set).model
        t_hat = [predict(model, s.features) for s in predict_set]
        rows.append(ComparisonRow(kind, label, evaluate(t, t_hat, n_predictors(kind))))
    for baseline in baselines:
        t_hat = [predict(baseline, s.features) for s in predict_set]
        rows.append(
            ComparisonRow(baseline.kind, label, evaluate(t, t_hat, n_predictors(baseline.kind)))
        )
    return rows


def comparison_csv_lines(rows: Iterable[ComparisonRow]) -> list[str]:
    """The comparison table in its machine form, one string per line."""
    lines = [COMPARISON_CSV_HEADER]
    for row in rows:
        r = row.report
        lines.append(
            ",".join(
                str(v)
                for v in (
                    row.model_kind.value,
                    row.split_label,
                    r.n,
                    r.mae_us,
                    r.emr,
                    r.r2,
                    r.adj_r2,
                    r.max_abs_error_us,
                    r.max_prediction_us,
                    r.n_exceeding_max_prediction,
                )
            )
        )
    return lines


def correlation_table(ds: Dataset) -> dict[str, float | None]:
    """Pearson r of each feature column against measured verification time.

    A constant feature column yields ``None`` for that entry (degenerate
    variance) instead of a number.
    """
    t = [float(v) for v in ds.times_us()]
    table: dict[str, float | None] = {}
    for name in CORRELATION_FEATURES:
        getter = _FEATURE_GETTERS[name]
        x = [float(getter(s.features)) for s in ds]
        try:
            table[name] = pearson_r(x, t).r
        except DegenerateVarianceError:
            table[name] = None
    return table


class BlockComposition(NamedTuple):
    height: int
    transparent_in: float
    spend_output: float
    joinsplit: float


@dataclass(frozen=True)
class CompositionReport:
    """Per-block and mean shares of transparent inputs, Spend+Output
    descriptions, and JoinSplit descriptions among a block's verification
    items. Blocks with no items at all (coinbase-only) are excluded and
    counted; the means are ``None`` if nothing remains."""

    per_block: tuple[BlockComposition, ...]
    mean_transparent_in: float | None
    mean_spend_output: float | None
    mean_joinsplit: float | None
    n_excluded: int


def composition_analysis(ds: Dataset) -> CompositionReport:
    per_block = []
    excluded = 0
    for sample in ds:
        f = sample.features
        denom = f.n_transparent_in + f.n_spend + f.n_output + f.n_joinsplit
        if denom == 0:
            excluded += 1
            continue
        per_block.append(
            BlockComposition(
                height=f.height,
                transparent_in=f.n_transparent_in / denom,
                spend_output=(f.n_spend + f.n_output) / denom,
                joinsplit=f.n_joinsplit / denom,
            )
        )
    if per_block:
        n = len(per_block)
        means = (
            fsum(b.transparent_in for b in per_block) / n,
            fsum(b.spend_output for b in per_block) / n,
            fsum(b.joinsplit for b in per_block) / n,
        )
    else:
        means = (None, None, None)
    return CompositionReport(
        per_block=tuple(per_block),
        mean_transparent_in=means[0],
        mean_spend_output=means[1],
        mean_joinsplit=means[2],
        n_excluded=excluded,
    )


# Bytes each component contributes to the synthetic block size. Deliberately
# not proportional to any time coefficients: a single byte-rate predictor then
# correlates with verification time without being able to explain it.
_SYNTH_BYTES = {"joinsplit": 1802, "output": 948, "transparent_in": 150, "spend": 384}
_SYNTH_BASE_BYTES = 1000
_SYNTH_SIZE_NOISE_FRACTION = 0.05


@dataclass(frozen=True)
class SynthSpec:
    """Recipe for a synthetic dataset with known ground truth.

    ``count_ranges`` maps each feature-model predictor name to an inclusive
    integer (lo, hi) range; counts are drawn uniformly per block.
    """

    true_model: ModelSpec
    noise_sigma_us: float
    count_ranges: Mapping[str, tuple[int, int]]
    n_blocks: int
    seed: int

    def __post_init__(self) -> None:
        if self.true_model.kind is not ModelKind.JOIST:
            raise SynthSpecError("true_model must be of the joist kind")
        if self.noise_sigma_us < 0:
            raise SynthSpecError(f"noise_sigma_us must be >= 0, got {self.noise_sigma_us}")
        if self.n_blocks < 1:
            raise SynthSpecError(f"n_blocks must be >= 1, got {self.n_blocks}")
        if not 0 <= self.seed <= _MAX_SEED:
            raise SynthSpecError(f"seed must be an unsigned 64-bit integer, got {self.seed}")
        expected = set(PREDICTORS[ModelKind.JOIST])
        if set(self.count_ranges) != expected:
            raise SynthSpecError(f"count_ranges must have exactly the keys {sorted(expected)}")
        for name, (lo, hi) in self.count_ranges.items():
            if lo < 0 or hi < lo:
                raise SynthSpecError(f"bad range for {name!r}: [{lo}, {hi}]")


def generate_synthetic(spec: SynthSpec) -> Dataset:
    """Draw a deterministic synthetic dataset from the ground-truth recipe.

    Per block (heights 1..n_blocks), in this fixed draw order: the four counts
    in predictor order, one gaussian for time noise, one gaussian for size
    noise. verify_time_us is the true model value plus noise, rounded and
    clamped to >= 1; size_bytes is an affine function of the counts plus 5 %
    relative noise, so byte-rate models stay correlated but inferior.

    Raises:
        SynthSpecError: if the recipe can never produce a positive time (the
            true model value is <= 0 over the entire count box).
    """
    names = PREDICTORS[ModelKind.JOIST]
    coeffs = spec.true_model.coefficients
    best = spec.true_model.intercept_us
    for name in names:
        lo, hi = spec.count_ranges[name]
        best += coeffs[name] * (hi if coeffs[name] >= 0 else lo)
    if best <= 0:
        raise SynthSpecError(
            f"count ranges force non-positive times (best achievable model value {best})"
        )

    rng = SplitMix64(spec.seed)
    samples = []
    for height in range(1, spec.n_blocks + 1):
        counts = {name: rng.next_int(*spec.count_ranges[name]) for name in names}
        exact = spec.true_model.intercept_us + sum(coeffs[n] * counts[n] for n in names)
        time_noise = rng.next_gaussian() * spec.noise_sigma_us
        affine_size = _SYNTH_BASE_BYTES + sum(_SYNTH_BYTES[n] * counts[n] for n in names)
        size_noise = rng.next_gaussian() * _SYNTH_SIZE_NOISE_FRACTION * affine_size
        features = BlockFeatures(
            height=height,
            size_bytes=max(1, round(affine_size + size_noise)),
            n_transparent_in=counts["transparent_in"],
            n_transparent_out=counts["transparent_in"] + 1,
            n_spend=counts["spend"],
            n_output=counts["output"],
            n_joinsplit=counts["joinsplit"],
        )
        samples.append(
            VerificationSample(
                features=features,
                verify_time_us=max(1, round(exact + time_noise)),
            )
        )
    return Dataset(tuple(samples))


def emit_plot_data(predict_set: Dataset, model: ModelSpec, out: str | Path) -> None:
    """Write measured-vs-predicted plot data and its regression line.

    The CSV ``height,measured_us,predicted_us`` goes to *out*; the
    least-squares line of measured-on-predicted lands in the sidecar JSON
    ``<out>.line.json`` as ``{"slope": ..., "intercept_us": ...}``. Log
    scaling is left to the plotting tool.
    """
    predictions = [predict(model, s.features) for s in predict_set]
    measured = predict_set.times_us()

    n = len(predictions)
    x_mean = fsum(predictions) / n
    y_mean = fsum(float(m) for m in measured) / n
    sxx = fsum((x - x_mean) ** 2 for x in predictions)
    if sxx == 0.0:
        raise RankDeficiencyError("all predictions are identical; regression line undefined")
    sxy = fsum((x - x_mean) * (y - y_mean) for x, y in zip(predictions, measured))
    slope = sxy / sxx
    intercept = y_mean - slope * x_mean

    lines = ["height,measured_us,predicted_us"]
    for sample, t_hat in zip(predict_set, predictions):
        lines.append(f"{sample.features.height},{sample.verify_time_us},{t_hat}")
    out_path = Path(out)
    out_path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")
    sidecar = Path(str(out_path) + ".line.json")
    sidecar.write_text(
        json.dumps({"slope": slope, "intercept_us": intercept}) + "\n", encoding="utf-8"
    )
