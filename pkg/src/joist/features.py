"""Per-block transaction features and their extraction from decoded records.

Block verification cost is driven by a handful of countable transaction
components: legacy JoinSplit descriptions, Sapling Spend and Output
descriptions (one zk-SNARK proof each), and transparent inputs (one signature
check each, assuming P2PKH). Transparent outputs trigger no verification work
of their own; they are carried only for correlation reporting.

The types here are plain immutable records. Everything that touches wire or
file formats lives in :mod:`joist.ingest`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .errors import IntegrityError, ParseError

_COUNT_FIELDS = ("n_transparent_in", "n_transparent_out", "n_spend", "n_output", "n_joinsplit")


@dataclass(frozen=True)
class TxFeatures:
    """Component counts for a single decoded transaction.

    ``n_transparent_in`` counts inputs that reference a previous output; the
    coinbase input carries no signature check and is never counted. A
    JoinSplit description counts as one unit even though it may bundle more
    than one proof internally; the fitted coefficient absorbs the average.
    """

    n_transparent_in: int
    n_transparent_out: int
    n_spend: int
    n_output: int
    n_joinsplit: int
    is_coinbase: bool = False

    def __post_init__(self) -> None:
        for name in _COUNT_FIELDS:
            if getattr(self, name) < 0:
                raise IntegrityError(f"{name} must be >= 0, got {getattr(self, name)}")
        if self.is_coinbase and self.n_transparent_in != 0:
            raise IntegrityError("a coinbase transaction has no countable transparent inputs")


@dataclass(frozen=True)
class BlockFeatures:
    """Block-level predictor counts: the sums over all constituent transactions."""

    height: int
    size_bytes: int
    n_transparent_in: int
    n_transparent_out: int
    n_spend: int
    n_output: int
    n_joinsplit: int

    def __post_init__(self) -> None:
        if self.size_bytes <= 0:
            raise IntegrityError(f"size_bytes must be > 0, got {self.size_bytes}")
        for name in _COUNT_FIELDS:
            if getattr(self, name) < 0:
                raise IntegrityError(f"{name} must be >= 0, got {getattr(self, name)}")


@dataclass(frozen=True)
class VerificationSample:
    """One observation: a block's features paired with its measured verification time.

    Times are kept as integer microseconds in files; in memory a float is
    accepted so models can be re-fitted on their own (fractional) predictions.
    """

    features: BlockFeatures
    verify_time_us: int | float

    def __post_init__(self) -> None:
        if self.verify_time_us <= 0:
            raise IntegrityError(f"verify_time_us must be > 0, got {self.verify_time_us}")


@dataclass(frozen=True)
class Dataset:
    """An ordered, height-unique collection of verification samples.

    Heights must be strictly increasing; use :meth:`from_samples` to build a
    dataset from unordered material.
    """

    samples: tuple[VerificationSample, ...]

    def __post_init__(self) -> None:
        if len(self.samples) < 1:
            raise IntegrityError("a dataset needs at least one sample")
        prev = None
        for sample in self.samples:
            h = sample.features.height
            if prev is not None:
                if h == prev:
                    raise IntegrityError(f"duplicate height {h}")
                if h < prev:
                    raise IntegrityError(
                        f"heights must be strictly increasing ({h} after {prev})"
                    )
            prev = h

    def __len__(self) -> int:
        return len(self.samples)

    def __iter__(self):
        return iter(self.samples)

    def heights(self) -> list[int]:
        return [s.features.height for s in self.samples]

    def times_us(self) -> list[int]:
        return [s.verify_time_us for s in self.samples]

    @classmethod
    def from_samples(cls, samples: Iterable[VerificationSample]) -> "Dataset":
        """Build a dataset from samples in any order (sorted by height here)."""
        return cls(tuple(sorted(samples, key=lambda s: s.features.height)))


def extract_tx_features(tx: Mapping) -> TxFeatures:
    """Count the model-relevant components of one decoded transaction record.

    The record follows the node's decoded-transaction layout: a ``vin`` list
    (the coinbase input is the entry carrying a ``coinbase`` key), a ``vout``
    list, and optional ``vjoinsplit`` / ``vShieldedSpend`` / ``vShieldedOutput``
    lists. Absent shielded lists mean zero (pre-Sapling and transparent-only
    transactions).

    Raises:
        ParseError: if ``vin`` or ``vout`` is missing or not a list.
    """
    vin = tx.get("vin")
    if not isinstance(vin, list):
        raise ParseError('transaction record missing mandatory list "vin"')
    vout = tx.get("vout")
    if not isinstance(vout, list):
        raise ParseError('transaction record missing mandatory list "vout"')

    is_coinbase = any(isinstance(e, Mapping) and "coinbase" in e for e in vin)
    n_in = sum(1 for e in vin if not (isinstance(e, Mapping) and "coinbase" in e))

    def _shielded(key: str) -> int:
        value = tx.get(key)
        if value is None:
            return 0
        if not isinstance(value, list):
            raise ParseError(f'transaction field "{key}" must be a list when present')
        return len(value)

    return TxFeatures(
        n_transparent_in=n_in,
        n_transparent_out=len(vout),
        n_spend=_shielded("vShieldedSpend"),
        n_output=_shielded("vShieldedOutput"),
        n_joinsplit=_shielded("vjoinsplit"),
        is_coinbase=is_coinbase,
    )


def aggregate_block(txs: Sequence[TxFeatures], height: int, size_bytes: int) -> BlockFeatures:
    """Sum per-transaction counts into the block-level predictor record.

    Raises:
        IntegrityError: on an empty transaction sequence (every block carries
            at least its coinbase transaction).
    """
    if not txs:
        raise IntegrityError(f"block {height} has no transactions")
    return BlockFeatures(
        height=height,
        size_bytes=size_bytes,
        n_transparent_in=sum(t.n_transparent_in for t in txs),
        n_transparent_out=sum(t.n_transparent_out for t in txs),
        n_spend=sum(t.n_spend for t in txs),
        n_output=sum(t.n_output for t in txs),
        n_joinsplit=sum(t.n_joinsplit for t in txs),
    )
