import json

import numpy as np
import pytest

from qmask import io as qio
from qmask.erasure import CodeSubspace, depolarize_channel
from qmask.errors import SchemaError
from qmask.masker import Masker, latin_masker, tilde_masker
from qmask.mols import mols_pair, literature_order3_pair
from qmask.tensor import random_isometry
from qmask.verifier import StateSet


def test_masker_round_trip_is_bit_identical(tmp_path, rng):
    for s in [latin_masker(3), tilde_masker(5), Masker(random_isometry(8, 2, rng), (2, 2, 2))]:
        path = qio.store(tmp_path / "m.json", qio.masker_to_dict(s))
        back = qio.load(path, "masker")
        assert np.array_equal(back.matrix, s.matrix)
        assert back.dims == s.dims and back.provenance == s.provenance


def test_code_channel_states_round_trip(tmp_path, rng):
    code = CodeSubspace.from_masker(latin_masker(3))
    back = qio.load(qio.store(tmp_path / "c.json", qio.code_to_dict(code)), "code")
    assert np.array_equal(back.basis, code.basis)
    ch = depolarize_channel((2, 2), 1)
    back = qio.load(qio.store(tmp_path / "k.json", qio.channel_to_dict(ch)), "channel")
    assert all(np.array_equal(a, b) for a, b in zip(back.kraus, ch.kraus)) and back.j == 1
    q = StateSet.random(3, 4, rng)
    back = qio.load(qio.store(tmp_path / "q.json", qio.states_to_dict(q)), "states")
    assert np.array_equal(back.states, q.states)


def test_pair_round_trip(tmp_path):
    pair = mols_pair(8)
    back = qio.load(qio.store(tmp_path / "p.json", pair.to_dict()), "pair")
    assert back.first == pair.first and back.second == pair.second


def test_three_element_complex_entry_names_path(tmp_path):
    doc = qio.masker_to_dict(latin_masker(2 + 1))
    doc["matrix"][4][1] = [0.0, 0.0, 0.0]
    p = tmp_path / "bad.json"
    p.write_text(json.dumps(doc))
    with pytest.raises(SchemaError) as exc:
        qio.load(p, "masker")
    assert "matrix[4][1]" in str(exc.value)


def test_order_shape_mismatch(tmp_path):
    doc = literature_order3_pair().to_dict()
    doc["first"]["order"] = 4
    p = tmp_path / "bad.json"
    p.write_text(json.dumps(doc))
    with pytest.raises(SchemaError) as exc:
        qio.load(p, "pair")
    assert "$.first.cells" in str(exc.value)


def test_base_one_pair_loads_shifted():
    pair = literature_order3_pair()
    assert pair.first.cells.min() == 0
    assert pair.first.cells.tolist() == [[0, 1, 2], [1, 2, 0], [2, 0, 1]]
    assert pair.second.cells.tolist() == [[0, 1, 2], [2, 0, 1], [1, 2, 0]]


def test_out_of_range_entries_and_bad_json(tmp_path):
    doc = {"first": {"order": 2, "cells": [[0, 5], [1, 0]]}, "second": {"order": 2, "cells": [[0, 1], [1, 0]]}}
    p = tmp_path / "p.json"
    p.write_text(json.dumps(doc))
    with pytest.raises(SchemaError):
        qio.load(p, "pair")
    p.write_text("{not json")
    with pytest.raises(SchemaError):
        qio.load(p, "pair")


def test_shape_mismatch_masker(tmp_path):
    doc = qio.masker_to_dict(latin_masker(3))
    doc["input_dim"] = 2
    p = tmp_path / "m.json"
    p.write_text(json.dumps(doc))
    with pytest.raises(SchemaError):
        qio.load(p, "masker")


def test_manifest_records_inputs(tmp_path):
    p = qio.store(tmp_path / "m.json", qio.masker_to_dict(latin_masker(3)))
    m = qio.RunManifest(["qmask", "x"], "0")
    m.add_input(p)
    m.seeds["s"] = 1
    d = m.finish()
    assert d["inputs"][str(p)] == qio.file_sha256(p)
    assert d["wall_time"] >= 0 and d["seeds"] == {"s": 1}
