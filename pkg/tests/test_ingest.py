from __future__ import annotations

import pytest

from joist import (
    Dataset,
    DatasetFile,
    FormatError,
    HeightRangeError,
    IntegrityError,
    ParseError,
    RpcConnectionError,
    RpcEndpoint,
    VerificationSample,
    fetch_block_features,
    read_dataset,
    write_dataset,
    write_features_csv,
)
from joist.ingest import CSV_HEADER

from conftest import RPC_PASS, RPC_USER, TEST_CHAIN_EXPECTED, make_block, make_dataset

_ROWS = [
    (100, 285, 0, 2, 0, 0, 0, 1807),
    (101, 1523, 2, 4, 1, 4, 0, 95321),
    (102, 4820, 1, 4, 0, 0, 3, 41002),
]


# -- CSV format -----------------------------------------------------------

def test_round_trip_is_identity(tmp_path):
    ds = make_dataset(_ROWS)
    file = DatasetFile(tmp_path / "ds.csv")
    write_dataset(ds, file)
    assert read_dataset(file) == ds


def test_written_file_is_lf_terminated_ascii_integers(tmp_path):
    path = tmp_path / "ds.csv"
    write_dataset(make_dataset(_ROWS), DatasetFile(path))
    raw = path.read_bytes()
    assert b"\r" not in raw
    assert raw.endswith(b"\n")
    lines = raw.decode("utf-8").splitlines()
    assert lines[0] == CSV_HEADER
    assert lines[1] == "100,285,0,2,0,0,0,1807"
    assert len(lines) == 1 + len(_ROWS)


def test_rows_written_in_height_order(tmp_path):
    ds = make_dataset([_ROWS[2], _ROWS[0], _ROWS[1]])
    path = tmp_path / "ds.csv"
    write_dataset(ds, DatasetFile(path))
    heights = [int(line.split(",")[0]) for line in path.read_text().splitlines()[1:]]
    assert heights == [100, 101, 102]


def test_fractional_times_cannot_be_serialized(tmp_path):
    ds = Dataset((VerificationSample(features=make_block(), verify_time_us=10.5),))
    with pytest.raises(FormatError):
        write_dataset(ds, DatasetFile(tmp_path / "bad.csv"))


def test_read_rejects_wrong_header(tmp_path):
    path = tmp_path / "ds.csv"
    path.write_text("height,size\n1,2\n")
    with pytest.raises(FormatError) as excinfo:
        read_dataset(DatasetFile(path))
    assert CSV_HEADER in str(excinfo.value)


def test_read_rejects_duplicate_height(tmp_path):
    path = tmp_path / "ds.csv"
    path.write_text(
        CSV_HEADER + "\n100,285,0,2,0,0,0,1807\n100,285,0,2,0,0,0,1807\n"
    )
    with pytest.raises(IntegrityError, match="height 100"):
        read_dataset(DatasetFile(path))


def test_read_rejects_nonpositive_time(tmp_path):
    path = tmp_path / "ds.csv"
    path.write_text(CSV_HEADER + "\n100,285,0,2,0,0,0,0\n")
    with pytest.raises(IntegrityError):
        read_dataset(DatasetFile(path))


def test_read_rejects_non_integer_fields(tmp_path):
    path = tmp_path / "ds.csv"
    path.write_text(CSV_HEADER + "\n100,285,0,2,0,0,0,1.5\n")
    with pytest.raises(FormatError):
        read_dataset(DatasetFile(path))


def test_read_rejects_wrong_field_count(tmp_path):
    path = tmp_path / "ds.csv"
    path.write_text(CSV_HEADER + "\n100,285,0,2,0,0,0\n")
    with pytest.raises(FormatError, match="8 fields"):
        read_dataset(DatasetFile(path))


def test_read_rejects_header_only_file(tmp_path):
    path = tmp_path / "ds.csv"
    path.write_text(CSV_HEADER + "\n")
    with pytest.raises(IntegrityError):
        read_dataset(DatasetFile(path))


def test_read_sorts_unsorted_rows(tmp_path):
    path = tmp_path / "ds.csv"
    path.write_text(
        CSV_HEADER + "\n102,4820,1,4,0,0,3,41002\n100,285,0,2,0,0,0,1807\n"
    )
    assert read_dataset(DatasetFile(path)).heights() == [100, 102]


def test_write_features_csv_zero_fills_times(tmp_path):
    path = tmp_path / "features.csv"
    blocks = [make_block(height=102, size_bytes=20), make_block(height=101, size_bytes=10)]
    write_features_csv(blocks, path)
    lines = path.read_text().splitlines()
    assert lines[0] == CSV_HEADER
    assert lines[1] == "101,10,0,0,0,0,0,0"
    assert lines[2] == "102,20,0,0,0,0,0,0"
    # Zero-filled times keep the file out of the fitting pipeline.
    with pytest.raises(IntegrityError):
        read_dataset(DatasetFile(path))


# -- endpoint invariants ----------------------------------------------------

def test_endpoint_invariants():
    with pytest.raises(IntegrityError):
        RpcEndpoint(url="http://x", username="u", password="p", max_parallel=0)
    with pytest.raises(IntegrityError):
        RpcEndpoint(url="http://x", username="u", password="p", timeout=0)


# -- JSON-RPC fetching -------------------------------------------------------

def _endpoint(url, **kwargs):
    params = dict(url=url, username=RPC_USER, password=RPC_PASS, timeout=10.0)
    params.update(kwargs)
    return RpcEndpoint(**params)


def test_fetch_coinbase_only_block(rpc_server):
    (block,) = fetch_block_features(_endpoint(rpc_server), (100, 100))
    assert block.height == 100
    assert block.size_bytes == 285
    assert (block.n_transparent_in, block.n_spend, block.n_output, block.n_joinsplit) == (0, 0, 0, 0)
    assert block.n_transparent_out == 2


def test_fetch_range_in_order_with_expected_counts(rpc_server):
    blocks = fetch_block_features(_endpoint(rpc_server, max_parallel=3), (100, 102))
    assert [b.height for b in blocks] == [100, 101, 102]
    for block in blocks:
        expected = TEST_CHAIN_EXPECTED[block.height]
        for field, value in expected.items():
            assert getattr(block, field) == value, (block.height, field)


def test_fetch_serial_and_parallel_agree(rpc_server):
    serial = fetch_block_features(_endpoint(rpc_server, max_parallel=1), (100, 102))
    parallel = fetch_block_features(_endpoint(rpc_server, max_parallel=8), (100, 102))
    assert serial == parallel


def test_fetch_block_missing_size_field(rpc_server):
    with pytest.raises(ParseError, match="size"):
        fetch_block_features(_endpoint(rpc_server), (103, 103))


def test_fetch_unknown_height(rpc_server):
    with pytest.raises(HeightRangeError, match="200"):
        fetch_block_features(_endpoint(rpc_server), (200, 201))


def test_fetch_empty_range(rpc_server):
    with pytest.raises(HeightRangeError):
        fetch_block_features(_endpoint(rpc_server), (102, 100))


def test_fetch_bad_credentials(rpc_server):
    endpoint = _endpoint(rpc_server, password="wrong")
    with pytest.raises(RpcConnectionError):
        fetch_block_features(endpoint, (100, 100))


def test_fetch_unreachable_node(closed_port_url):
    endpoint = _endpoint(closed_port_url, timeout=2.0)
    with pytest.raises(RpcConnectionError):
        fetch_block_features(endpoint, (100, 100))
