import json
import os
import subprocess
import sys
import time
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from iplt import cli
from iplt.client import ServiceError, retrieve
from iplt.dataset import Dataset, generate_dataset, parse_dataset, read_dataset, write_dataset
from iplt.errors import InvalidParameters
from iplt.field import PrimeField
from iplt.fixtures import INSTANCE_2
from iplt.protocol import gen_query
from iplt.server import parse_address, respond, start_background
from iplt.wire import (
    AnswerMessage,
    ErrorMessage,
    Hello,
    QueryMessage,
    WireError,
    decode,
    encode,
)

F13 = PrimeField(13)
ints = st.lists(st.integers(0, 2**31 - 2), max_size=30).map(tuple)
messages = st.one_of(
    st.builds(Hello, st.integers(2, 2**31), st.integers(1, 10**6)),
    st.builds(QueryMessage, st.integers(2, 2**31), st.integers(1, 100), st.integers(0, 100),
              st.integers(0, 100), ints, ints),
    st.builds(AnswerMessage, ints),
    st.builds(ErrorMessage, st.text(max_size=20), st.text(max_size=60)),
)


@settings(max_examples=300, deadline=None)
@given(messages)
def test_wire_round_trip(msg):
    data = encode(msg)
    assert data.endswith(b"\n") and data.count(b"\n") == 1
    assert decode(data) == msg
    assert encode(decode(data)) == data


@pytest.mark.parametrize("line,code", [
    (b"{not json\n", "BAD_JSON"),
    (b"[1, 2]\n", "BAD_JSON"),
    (b'{"type": "nope"}\n', "BAD_MESSAGE"),
    (b'{"type": "answer"}\n', "BAD_MESSAGE"),
    (b'{"type": "answer", "y": [1, "2"]}\n', "BAD_MESSAGE"),
    (b'{"type": "answer", "y": [true]}\n', "BAD_MESSAGE"),
    (b'{"type": "hello", "p": 13, "k": 2.5}\n', "BAD_MESSAGE"),
    (b'{"type": "hello", "p": 13, "k": 2, "x": 1}\n', "BAD_MESSAGE"),
])
def test_decode_errors(line, code):
    with pytest.raises(WireError) as info:
        decode(line)
    assert info.value.code == code


def test_dataset_parsing(tmp_path):
    ds = parse_dataset("13 4\n1 2 3 12\n")
    assert ds.p == 13 and ds.K == 4 and ds.X.tolist() == [1, 2, 3, 12]
    again = parse_dataset(ds.dumps())
    assert again.p == ds.p and np.array_equal(again.X, ds.X)
    path = tmp_path / "x.txt"
    write_dataset(path, ds)
    assert path.read_text() == "13 4\n1 2 3 12\n"
    assert np.array_equal(read_dataset(path).X, ds.X)
    a, b = generate_dataset(20, 13, 7), generate_dataset(20, 13, 7)
    assert np.array_equal(a.X, b.X) and a.K == 20 and (a.X < 13).all()


@pytest.mark.parametrize("text", ["13 3\n1 2\n", "13 2\n1 13\n", "12 2\n1 2\n", "13\n1\n", "13 1\n", "13 1\nx\n"])
def test_dataset_errors(text):
    with pytest.raises(InvalidParameters):
        parse_dataset(text)


def _example_query_line():
    query, _ = gen_query(INSTANCE_2.demand(), np.random.default_rng(0), fixtures=INSTANCE_2.fixtures)
    msg = QueryMessage(13, 20, query.rows, query.K, tuple(int(v) for v in query.G.reshape(-1)),
                       tuple(int(v) for v in query.pi))
    return msg, query


def test_respond_example_query_and_determinism():
    ds = generate_dataset(20, 13, 3)
    msg, query = _example_query_line()
    line = encode(msg)
    first = respond(ds, line)
    assert respond(ds, line) == first
    reply = decode(first)
    assert isinstance(reply, AnswerMessage) and len(reply.y) == 11
    x_tilde = [0] * 20
    for l in range(20):
        x_tilde[int(query.pi[l]) - 1] = int(ds.X[l])
    assert list(reply.y) == [sum(g * x for g, x in zip(row, x_tilde)) % 13 for row in INSTANCE_2.G]


def test_respond_error_codes():
    ds = generate_dataset(20, 13, 3)
    msg, _ = _example_query_line()

    def code(m):
        reply = decode(respond(ds, m if isinstance(m, bytes) else encode(m)))
        assert isinstance(reply, ErrorMessage)
        return reply.code

    swap = list(msg.pi)
    swap[0] = swap[1]
    assert code(QueryMessage(msg.p, msg.k, msg.rows, msg.cols, msg.g, tuple(swap))) == "BAD_PERMUTATION"
    assert code(QueryMessage(msg.p, msg.k, msg.rows, msg.cols, msg.g, msg.pi[:-1])) == "BAD_PERMUTATION"
    assert code(QueryMessage(11, msg.k, msg.rows, msg.cols, msg.g, msg.pi)) == "FIELD_MISMATCH"
    assert code(QueryMessage(msg.p, 19, msg.rows, msg.cols, msg.g, msg.pi)) == "SIZE_MISMATCH"
    assert code(QueryMessage(msg.p, msg.k, msg.rows + 1, msg.cols, msg.g, msg.pi)) == "BAD_SHAPE"
    bad_g = (13,) + msg.g[1:]
    assert code(QueryMessage(msg.p, msg.k, msg.rows, msg.cols, bad_g, msg.pi)) == "BAD_VALUE"
    assert code(encode(Hello(13, 20))) == "BAD_MESSAGE"
    assert code(b"garbage\n") == "BAD_JSON"


@pytest.fixture
def server():
    ds = generate_dataset(20, 13, 7)
    srv = start_background(ds)
    yield srv, ds
    srv.shutdown()
    srv.server_close()


def test_retrieve_round_trip(server):
    srv, ds = server
    V = [[7, 3, 12, 10, 2, 1, 5, 6], [3, 6, 5, 12, 8, 3, 11, 4], [5, 12, 1, 4, 6, 9, 6, 7]]
    W = [2, 4, 5, 7, 8, 10, 11, 12]
    for seed in range(5):
        res = retrieve(srv.address, W, V, seed=seed)
        expected = [sum(v * int(ds.X[w - 1]) for v, w in zip(row, W)) % 13 for row in V]
        assert res.Z.tolist() == expected
        assert res.download == res.rows == 9
        assert res.rate == res.bounds.lower == res.bounds.upper == Fraction(1, 3)
    # columns of V follow W even when W is unsorted
    res = retrieve(srv.address, [5, 1], [[1, 2]], seed=1)
    assert res.Z.tolist() == [(int(ds.X[4]) + 2 * int(ds.X[0])) % 13]
    res = retrieve(srv.address, [1, 2, 3], L=2, seed=4)
    assert res.Z.tolist() == res.demand.evaluate(ds.X).tolist()


def test_retrieve_validates_before_connecting():
    dead = "127.0.0.1:1"
    with pytest.raises(InvalidParameters):
        retrieve(dead, [1, 2, 3], [[1, 2]])
    with pytest.raises(InvalidParameters):
        retrieve(dead, [1, 1], L=1)
    with pytest.raises(InvalidParameters):
        retrieve(dead, [1, 2], L=3)


def test_retrieve_surfaces_server_errors(server, monkeypatch):
    import dataclasses

    from iplt import client

    srv, _ = server
    with pytest.raises(InvalidParameters):
        retrieve(srv.address, [21], [[1]])  # beyond the K announced by the server

    real = client.gen_query

    def broken(*args, **kwargs):
        query, state = real(*args, **kwargs)
        return dataclasses.replace(query, pi=np.ones_like(query.pi)), state

    monkeypatch.setattr(client, "gen_query", broken)
    with pytest.raises(ServiceError) as info:
        retrieve(srv.address, [1, 2], [[1, 1]], seed=0)
    assert info.value.code == "BAD_PERMUTATION"


def test_parse_address():
    assert parse_address("localhost:80") == ("localhost", 80)
    assert parse_address(":9") == ("127.0.0.1", 9)
    with pytest.raises(ValueError):
        parse_address("nohost")


def test_cli_bounds_and_ilp(capsys):
    assert cli.main(["bounds", "--k", "20", "--d", "6", "--l", "3"]) == 0
    assert capsys.readouterr().out.strip() == "R=2 S=2 lower=3/11 upper=3/11 tight=yes"
    assert cli.main(["bounds", "--k", "20", "--d", "8", "--l", "3", "--json"]) == 0
    assert json.loads(capsys.readouterr().out)["lower"] == "1/3"
    assert cli.main(["ilp-oracle", "--k", "20", "--d", "8", "--l", "3"]) == 0
    assert "witness=T8=2,T4=1" in capsys.readouterr().out
    assert cli.main(["bounds", "--k", "2", "--d", "3", "--l", "1"]) == 1


@pytest.mark.parametrize("number", [1, 2])
def test_cli_demo(number, capsys):
    assert cli.main(["demo", "--example", str(number)]) == 0
    out = capsys.readouterr().out
    assert out.strip().endswith("PASS") and "FAIL" not in out


def test_cli_demo_reports_mismatch(monkeypatch, capsys):
    from iplt import fixtures

    inst = fixtures.INSTANCES[1]
    bad_G = [row[:] for row in inst.G]
    bad_G[0][0] = (bad_G[0][0] + 1) % 13
    monkeypatch.setitem(fixtures.INSTANCES, 1, fixtures.WorkedInstance(
        inst.name, inst.K, inst.W, inst.V, inst.fixtures, inst.v_tilde, bad_G, inst.pi,
        inst.message_order, inst.extra))
    assert cli.main(["demo", "--example", "1"]) == 1
    assert capsys.readouterr().out.strip().endswith("FAIL")


def test_cli_gen_dataset_stdout(capsys):
    assert cli.main(["gen-dataset", "--k", "20", "--p", "13", "--seed", "7"]) == 0
    assert parse_dataset(capsys.readouterr().out).X.tolist() == generate_dataset(20, 13, 7).X.tolist()


def test_cli_usage_errors(capsys):
    with pytest.raises(SystemExit) as info:
        cli.main([])
    assert info.value.code == 2
    with pytest.raises(SystemExit) as info:
        cli.main(["retrieve", "--w", "1,2", "--random-mds"])
    assert info.value.code == 2
    with pytest.raises(SystemExit) as info:
        cli.main(["bounds", "--k", "x", "--d", "1", "--l", "1"])
    assert info.value.code == 2


def test_cli_audit_small(capsys):
    code = cli.main(["audit", "--k", "5", "--d", "2", "--l", "1", "--trials", "20000",
                     "--queries", "20", "--p", "13", "--json"])
    data = json.loads(capsys.readouterr().out)
    assert data["structural_uniform"] == 20 and data["passed"] == (code == 0)


def test_cli_serve_and_retrieve_subprocess(tmp_path):
    path = tmp_path / "data.txt"
    assert cli.main(["gen-dataset", "--k", "20", "--p", "13", "--seed", "7", "--out", str(path)]) == 0
    env = dict(os.environ, PYTHONUNBUFFERED="1")
    proc = subprocess.Popen([sys.executable, "-m", "iplt", "serve", "--dataset", str(path),
                             "--listen", "127.0.0.1:0"], stdout=subprocess.PIPE, text=True, env=env)
    try:
        banner = proc.stdout.readline()
        address = banner.strip().rsplit(" ", 1)[-1]
        env["IPLT_LISTEN"] = address
        out = subprocess.run([sys.executable, "-m", "iplt", "retrieve", "--w", "2,4,5,7,8,10",
                              "--random-mds", "--l", "3", "--seed", "1", "--verify-dataset", str(path)],
                             capture_output=True, text=True, env=env, timeout=30)
        assert out.returncode == 0, out.stderr
        assert "oracle: match" in out.stdout and "download = 11" in out.stdout
    finally:
        proc.terminate()
        proc.wait(timeout=10)
