from __future__ import annotations

import json
import random
import subprocess
import sys
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from graphdisc import io
from graphdisc.blowup import construct_blowup
from graphdisc.catalog import blowup_catalog, hat_instances
from graphdisc.cli import main
from graphdisc.gos import check_gos_covering
from graphdisc.hatcover import verify_and_glue_hat
from graphdisc.permgrp import PermGroup
from graphdisc.voltage import random_connected_graph

DATA = Path(__file__).resolve().parent.parent / "data"


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    report = json.loads(out.out) if out.out.strip() else None
    return code, report, out.err


@given(st.integers(0, 10**6))
@settings(max_examples=30, deadline=None)
def test_graph_round_trip(seed):
    g = random_connected_graph(random.Random(seed), 6, 4)
    h, _, _ = io.stringify_graph(g)
    back = io.graph_from_json(json.loads(io.dumps(io.graph_to_json(g))), "$")
    assert back == h


def test_group_round_trip():
    G = PermGroup.symmetric([1, 2, 3, 4])
    back = io.group_from_json(json.loads(io.dumps(io.group_to_json(G))), "$")
    assert back.order() == 24 and len(back.domain) == 4


def test_floats_rejected():
    # reports carry exact values only
    with pytest.raises(ValueError):
        io.dumps({"x": 1.5})


def test_data_files_load():
    loader = io.Loader()
    for p in sorted(DATA.glob("*.json")):
        got = loader.load(str(p))
        assert got.kind in io.KINDS


def test_hat_and_blowup_files(tmp_path):
    loader = io.Loader()
    for name, d in hat_instances().items():
        got = loader.load(str(DATA / f"hat-{name}.json")).obj
        glue = verify_and_glue_hat(got)
        assert len(glue.covers) == len(verify_and_glue_hat(d).covers)
    for name in ("sym3-edge", "z2-inversion", "sym3-star"):
        inp = loader.load(str(DATA / f"{name}-blowup.json")).obj
        assert construct_blowup(inp).X.num_vertices() == construct_blowup(blowup_catalog()[name]).X.num_vertices()
    proj = loader.load(str(DATA / "gos-cover2.json")).extra["projection"]
    assert check_gos_covering(proj).degree == 2


def test_bad_json_has_line_context(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{\n  "kind": "serre-graph",\n  "vertices": [\n}\n')
    code, report, err = run(capsys, "graph", "validate", bad)
    assert code == 1
    assert "line" in (report or {}).get("message", "") + err


def test_fixed_bar_is_input_error(tmp_path, capsys):
    p = tmp_path / "g.json"
    p.write_text(json.dumps({"kind": "serre-graph", "vertices": ["v"],
                             "darts": [{"id": "e", "bar": "e", "from": "v", "to": "v"}]}))
    code, report, _ = run(capsys, "graph", "validate", p)
    assert code == 1 and report["status"] == "error"


def test_missing_file(capsys):
    code, _, _ = run(capsys, "graph", "validate", DATA / "nope.json")
    assert code == 1


def test_loop_validates(capsys):
    code, report, _ = run(capsys, "graph", "validate", DATA / "loop.json")
    assert code == 0 and report["status"] == "ok"
    assert report["result"]["vertices"] == 1 and report["result"]["edges"] == 1


def test_covering_map_blocks(capsys):
    code, report, _ = run(capsys, "graph", "validate", DATA / "cycle6_over_cycle3.json")
    assert code == 0
    code, report, _ = run(capsys, "graph", "validate", DATA / "path_over_cycle3.json")
    assert code == 2 and report["status"] == "negative"


def test_no_common_cover_exit(capsys):
    code, report, _ = run(capsys, "leighton", "common-cover", DATA / "cycle3.json", DATA / "star3.json")
    assert code == 2
    assert report["message"] == "NoCommonCover: profile mismatch"


def test_blowup_construct(capsys):
    code, report, _ = run(capsys, "blowup", "construct", DATA / "sym3-edge-blowup.json", "--verify")
    assert code == 0
    assert report["result"]["VX"] == 18 and report["result"]["verify"]["ok"]


def test_common_cover_cli(capsys):
    code, report, _ = run(capsys, "leighton", "oracle", DATA / "cycle4.json", DATA / "cycle6.json")
    assert code == 0 and report["result"]["order"] == 12


def test_reports_are_byte_identical(tmp_path, capsys):
    outs = []
    for i in range(2):
        rp = tmp_path / f"r{i}.json"
        code, _, _ = run(capsys, "leighton", "common-cover", DATA / "k4.json", DATA / "k33.json", "--report", rp)
        assert code == 0
        outs.append(rp.read_bytes())
    assert outs[0] == outs[1]


def test_dot_and_figure(tmp_path, capsys):
    dot, fig = tmp_path / "g.dot", tmp_path / "g.png"
    code, _, _ = run(capsys, "graph", "subdivide", DATA / "cycle3.json", "--dot", dot, "--figure", fig)
    assert code == 0
    text = dot.read_text()
    assert text.startswith("digraph") and text.count("->") == 12
    assert fig.read_bytes()[:4] == b"\x89PNG"


def test_out_file_round_trips(tmp_path, capsys):
    out = tmp_path / "aut.json"
    code, _, _ = run(capsys, "aut", "group", DATA / "k33.json", "--out", out)
    assert code == 0
    a = io.Loader().load(str(out)).obj
    assert a.group.order() == 72


def test_hat_cli(capsys):
    code, report, _ = run(capsys, "leighton", "hat", "verify", DATA / "hat-hexagon.json")
    assert code == 0 and report["status"] == "ok"
    code, report, _ = run(capsys, "leighton", "hat", "ball", DATA / "hat-dodecagon.json", "--radius", "2")
    assert code == 0 and report["result"]["ok"]


def test_console_script():
    r = subprocess.run([sys.executable, "-m", "graphdisc", "graph", "validate", str(DATA / "loop.json")],
                       capture_output=True, text=True)
    assert r.returncode == 0 and json.loads(r.stdout)["status"] == "ok"


def test_data_graphs_round_trip():
    loader = io.Loader()
    for p in sorted(DATA.glob("*.json")):
        got = loader.load(str(p))
        if got.kind == "serre-graph":
            again = io.graph_from_json(json.loads(io.dumps(io.graph_to_json(got.obj))), "$")
            assert again == got.obj
        elif got.kind == "perm-group":
            again = io.group_from_json(json.loads(io.dumps(io.group_to_json(got.obj))), "$")
            assert again.elements() == got.obj.elements()
