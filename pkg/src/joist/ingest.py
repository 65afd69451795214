"""Dataset acquisition: node JSON-RPC fetching and the CSV interchange format.

Feature acquisition and time measurement are separate workflows: this module
pulls per-block transaction features from a node, while measured verification
times enter only through dataset files. Times are stored as integer
microseconds so golden files round-trip without float drift.

Dataset CSV format (UTF-8, LF line endings, no quoting):

    height,size_bytes,n_transparent_in,n_transparent_out,n_spend,n_output,n_joinsplit,verify_time_us

with every field a base-10 integer and rows sorted by height.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Mapping, Sequence

import requests

from .errors import (
    FormatError,
    HeightRangeError,
    IntegrityError,
    ParseError,
    RpcConnectionError,
)
from .features import BlockFeatures, Dataset, VerificationSample, aggregate_block, extract_tx_features

CSV_HEADER = "height,size_bytes,n_transparent_in,n_transparent_out,n_spend,n_output,n_joinsplit,verify_time_us"

# getblock verbosity level at which the node inlines fully decoded transactions.
_DECODED_TX_VERBOSITY = 2


@dataclass(frozen=True)
class RpcEndpoint:
    """A node's JSON-RPC endpoint with basic-auth credentials."""

    url: str
    username: str
    password: str
    timeout: float = 30.0
    max_parallel: int = 4

    def __post_init__(self) -> None:
        if self.timeout <= 0:
            raise IntegrityError(f"timeout must be > 0, got {self.timeout}")
        if self.max_parallel < 1:
            raise IntegrityError(f"max_parallel must be >= 1, got {self.max_parallel}")


class DatasetFormat(Enum):
    CSV = "csv"


@dataclass(frozen=True)
class DatasetFile:
    path: str | Path
    format: DatasetFormat = DatasetFormat.CSV


def _rpc_call(endpoint: RpcEndpoint, method: str, params: list):
    """One JSON-RPC 1.0 request; returns the result or raises."""
    payload = {"jsonrpc": "1.0", "id": "joist", "method": method, "params": params}
    try:
        response = requests.post(
            endpoint.url,
            json=payload,
            auth=(endpoint.username, endpoint.password),
            timeout=endpoint.timeout,
        )
    except requests.RequestException as exc:
        raise RpcConnectionError(f"cannot reach node at {endpoint.url}: {exc}") from exc
    if response.status_code in (401, 403):
        raise RpcConnectionError(f"authentication rejected by {endpoint.url}")
    try:
        body = response.json()
    except ValueError as exc:
        raise RpcConnectionError(
            f"non-JSON response from {endpoint.url} (HTTP {response.status_code})"
        ) from exc
    if not isinstance(body, Mapping):
        raise RpcConnectionError(f"malformed RPC response from {endpoint.url}")
    error = body.get("error")
    if error:
        # Callers translate method-specific errors; anything else is remote trouble.
        raise _RpcServerError(error.get("code"), error.get("message", ""))
    return body.get("result")


class _RpcServerError(Exception):
    def __init__(self, code, message: str):
        super().__init__(message)
        self.code = code
        self.message = message


def _block_features_from_record(block: Mapping, height: int) -> BlockFeatures:
    txs = block.get("tx")
    if not isinstance(txs, list) or not txs:
        raise ParseError(f'block {height}: missing mandatory list "tx"')
    size = block.get("size")
    if not isinstance(size, int) or isinstance(size, bool):
        raise ParseError(f'block {height}: missing integer field "size"')
    try:
        tx_features = [extract_tx_features(tx) for tx in txs]
    except ParseError as exc:
        raise ParseError(f"block {height}: {exc}") from exc
    return aggregate_block(tx_features, height=height, size_bytes=size)


def _fetch_one(endpoint: RpcEndpoint, height: int) -> BlockFeatures:
    try:
        block_hash = _rpc_call(endpoint, "getblockhash", [height])
    except _RpcServerError as exc:
        raise HeightRangeError(f"height {height} unknown to node: {exc.message}") from exc
    try:
        block = _rpc_call(endpoint, "getblock", [block_hash, _DECODED_TX_VERBOSITY])
    except _RpcServerError as exc:
        raise RpcConnectionError(f"getblock failed for height {height}: {exc.message}") from exc
    if not isinstance(block, Mapping):
        raise ParseError(f"block {height}: block record is not an object")
    return _block_features_from_record(block, height)


def fetch_block_features(endpoint: RpcEndpoint, height_range: tuple[int, int]) -> list[BlockFeatures]:
    """Fetch features for every height in the inclusive range, in height order.

    Up to ``endpoint.max_parallel`` requests run concurrently; results are
    assembled in ascending height order regardless of completion order.
    """
    lo, hi = height_range
    if lo > hi:
        raise HeightRangeError(f"empty height range [{lo}, {hi}]")
    heights = range(lo, hi + 1)
    workers = min(endpoint.max_parallel, len(heights))
    if workers == 1:
        return [_fetch_one(endpoint, h) for h in heights]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda h: _fetch_one(endpoint, h), heights))


def _features_row(f: BlockFeatures, verify_time_us: int) -> str:
    return ",".join(
        str(v)
        for v in (
            f.height,
            f.size_bytes,
            f.n_transparent_in,
            f.n_transparent_out,
            f.n_spend,
            f.n_output,
            f.n_joinsplit,
            verify_time_us,
        )
    )


def write_dataset(ds: Dataset, file: DatasetFile) -> None:
    """Write the dataset in the interchange CSV format, rows sorted by height.

    The format stores integer microseconds; a dataset holding fractional
    in-memory times cannot be serialized.
    """
    lines = [CSV_HEADER]
    for s in ds:
        t = s.verify_time_us
        if int(t) != t:
            raise FormatError(
                f"height {s.features.height}: verify_time_us {t} is not an integer; "
                "the CSV format stores whole microseconds"
            )
        lines.append(_features_row(s.features, int(t)))
    Path(file.path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def write_features_csv(features: Sequence[BlockFeatures], path: str | Path) -> None:
    """Write a features-only CSV with verify_time_us zeroed.

    Such a file fails dataset integrity checks on purpose: it is unusable for
    fitting until measured times are merged in.
    """
    ordered = sorted(features, key=lambda f: f.height)
    lines = [CSV_HEADER]
    lines.extend(_features_row(f, 0) for f in ordered)
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def read_dataset(file: DatasetFile) -> Dataset:
    """Read and validate a dataset CSV.

    Raises:
        FormatError: wrong header or non-integer fields.
        IntegrityError: duplicate heights, non-positive times or sizes.
    """
    text = Path(file.path).read_text(encoding="utf-8")
    lines = text.split("\n")
    if not lines or lines[0] != CSV_HEADER:
        raise FormatError(f'{file.path}: bad header; expected "{CSV_HEADER}"')
    samples = []
    for lineno, line in enumerate(lines[1:], start=2):
        if line == "":
            continue
        parts = line.split(",")
        if len(parts) != 8:
            raise FormatError(f"{file.path}:{lineno}: expected 8 fields, got {len(parts)}")
        try:
            values = [int(part) for part in parts]
        except ValueError as exc:
            raise FormatError(f"{file.path}:{lineno}: non-integer field: {exc}") from exc
        height, size_bytes, n_in, n_out, n_spend, n_output, n_js, time_us = values
        try:
            samples.append(
                VerificationSample(
                    features=BlockFeatures(
                        height=height,
                        size_bytes=size_bytes,
                        n_transparent_in=n_in,
                        n_transparent_out=n_out,
                        n_spend=n_spend,
                        n_output=n_output,
                        n_joinsplit=n_js,
                    ),
                    verify_time_us=time_us,
                )
            )
        except IntegrityError as exc:
            raise IntegrityError(f"{file.path}:{lineno}: {exc}") from exc
    if not samples:
        raise IntegrityError(f"{file.path}: dataset file has no rows")
    return Dataset.from_samples(samples)
