"""Unit tests for the QNET parser, serializer and network assembly."""

import numpy as np
import pytest

from slhnet import (LinearComponent, beamsplitter_loop, feedback_reduce,
                    make_cavity, matkit, mixing_splitter, series_product,
                    validate)
from slhnet.netfile import (NetDocument, ParseError, build_partitioned,
                            component_document, format_cnum,
                            format_matrix_assignments, parse,
                            parse_matrix_assignments, serialize)

CAVITY = """\
component cavity {
  inputs = 1;
  modes = 1;
  S = [[1]];
  C = [[1]];
  Omega = [[0]];
}
"""

SERIES = CAVITY + """\
network {
  use a : cavity;
  use b : cavity;
  connect a.out[0] -> b.in[0];
}
"""

FIGURE6 = """\
component cavity {
  inputs = 1;
  modes = 1;
  S = [[1]];
  C = [[1.7320508075688772]];
  Omega = [[0]];
}
component splitter {
  inputs = 2;
  modes = 0;
  S = [[0.5,0.86602540378443871],[0.86602540378443871,-0.5]];
  C = [];
  Omega = [];
}
network {
  use bs : splitter;
  use cav : cavity;
  connect bs.out[1] -> cav.in[0];
  connect cav.out[0] -> bs.in[1];
  external bs.in[0] as drive;
}
"""


def _loc_of(source: str, needle: str, occurrence: int = 1) -> tuple[int, int]:
    """1-based line/column of the nth occurrence of ``needle``."""
    idx = -1
    for _ in range(occurrence):
        idx = source.index(needle, idx + 1)
    line = source.count("\n", 0, idx) + 1
    col = idx - (source.rfind("\n", 0, idx) + 1) + 1
    return line, col


def _assert_error_at(source: str, needle: str, occurrence: int = 1) -> ParseError:
    line, col = _loc_of(source, needle, occurrence)
    with pytest.raises(ParseError) as excinfo:
        parse(source)
    err = excinfo.value
    assert (err.line, err.column) == (line, col), \
        f"expected error at {line}:{col}, got {err.line}:{err.column}: {err.message}"
    sliced = err.snippet[err.column - 1:err.column - 1 + len(needle)]
    assert sliced == needle
    return err


class TestParse:
    def test_single_cavity(self):
        doc = parse(CAVITY)
        assert list(doc.components) == ["cavity"]
        assert doc.instances == {} and doc.edges == () and doc.externals == ()
        comp = doc.components["cavity"]
        assert comp.n_ports == 1 and comp.m_modes == 1
        assert comp.S[0, 0] == 1.0

    def test_series_edge_and_eta(self):
        doc = parse(SERIES)
        assert len(doc.edges) == 1
        pc = build_partitioned(doc)
        assert np.array_equal(pc.eta.real, np.eye(1))
        assert pc.internal_out == (0,) and pc.internal_in == (1,)

    def test_complex_entries(self):
        src = CAVITY.replace("S = [[1]];", "S = [[0.5-0.25i]];")
        doc = parse(src)
        assert doc.components["cavity"].S[0, 0] == 0.5 - 0.25j

    def test_pure_imaginary_entry(self):
        # hermiticity is a soft invariant, so this parses fine
        src = CAVITY.replace("Omega = [[0]];", "Omega = [[2i]];")
        doc = parse(src)
        assert doc.components["cavity"].Omega[0, 0] == 2j

    def test_comments_and_whitespace(self):
        src = "# leading comment\n" + CAVITY.replace(
            "inputs = 1;", "inputs = 1;  # trailing comment")
        assert parse(src) == parse(CAVITY)

    def test_shuffled_keys_accepted(self):
        src = """\
component cavity {
  Omega = [[0]];
  S = [[1]];
  modes = 1;
  C = [[1]];
  inputs = 1;
}
"""
        assert parse(src) == parse(CAVITY)


class TestParseErrors:
    def test_connect_to_output_port(self):
        src = CAVITY + """\
network {
  use a : cavity;
  connect a.out[0] -> a.out[0];
}
"""
        err = _assert_error_at(src, "out", occurrence=2)
        assert "'in'" in err.message

    def test_unexpected_character(self):
        _assert_error_at("component c @ {", "@")

    def test_unknown_key(self):
        src = CAVITY.replace("inputs = 1;", "gain = 1;")
        err = _assert_error_at(src, "gain")
        assert "unknown key" in err.message

    def test_duplicate_key(self):
        src = CAVITY.replace("modes = 1;", "modes = 1;\n  modes = 1;")
        err = _assert_error_at(src, "modes", occurrence=2)
        assert "duplicate key" in err.message

    def test_missing_key(self):
        src = CAVITY.replace("  Omega = [[0]];\n", "")
        err = _assert_error_at(src, "cavity")
        assert "missing key 'Omega'" in err.message

    def test_duplicate_component(self):
        src = CAVITY + CAVITY
        line, col = _loc_of(src, "component cavity", 2)
        with pytest.raises(ParseError) as excinfo:
            parse(src)
        assert excinfo.value.line == line

    def test_dimension_mismatch(self):
        src = CAVITY.replace("C = [[1]];", "C = [[1],[2]];")
        err = _assert_error_at(src, "C = [[1],[2]]")
        assert "must be 1x1" in err.message

    def test_ragged_matrix(self):
        src = CAVITY.replace("S = [[1]];", "S = [[1,2],[3]];")
        with pytest.raises(ParseError) as excinfo:
            parse(src)
        assert "unequal" in excinfo.value.message or "must be" in excinfo.value.message

    def test_unknown_component_reference(self):
        src = CAVITY + "network {\n  use a : laser;\n}\n"
        err = _assert_error_at(src, "laser")
        assert "unknown component" in err.message

    def test_duplicate_instance(self):
        src = CAVITY + "network {\n  use a : cavity;\n  use a : cavity;\n}\n"
        line, col = _loc_of(src, "use a", occurrence=2)
        with pytest.raises(ParseError) as excinfo:
            parse(src)
        assert (excinfo.value.line, excinfo.value.column) == (line, col + 4)

    def test_unknown_instance_in_connect(self):
        src = CAVITY + """\
network {
  use a : cavity;
  connect a.out[0] -> ghost.in[0];
}
"""
        err = _assert_error_at(src, "ghost")
        assert "unknown instance" in err.message

    def test_port_out_of_range(self):
        src = CAVITY + """\
network {
  use a : cavity;
  connect a.out[3] -> a.in[0];
}
"""
        err = _assert_error_at(src, "3")
        assert "out of range" in err.message

    def test_fan_in_rejected(self):
        src = CAVITY + """\
network {
  use a : cavity;
  use b : cavity;
  use c : cavity;
  connect a.out[0] -> c.in[0];
  connect b.out[0] -> c.in[0];
}
"""
        with pytest.raises(ParseError) as excinfo:
            parse(src)
        assert "already fed" in excinfo.value.message
        assert excinfo.value.line == _loc_of(src, "connect b")[0]

    def test_fan_out_rejected(self):
        src = CAVITY + """\
network {
  use a : cavity;
  use b : cavity;
  use c : cavity;
  connect a.out[0] -> b.in[0];
  connect a.out[0] -> c.in[0];
}
"""
        with pytest.raises(ParseError) as excinfo:
            parse(src)
        assert "already feeds" in excinfo.value.message

    def test_external_on_driven_input(self):
        src = CAVITY + """\
network {
  use a : cavity;
  use b : cavity;
  connect a.out[0] -> b.in[0];
  external b.in[0] as tap;
}
"""
        with pytest.raises(ParseError) as excinfo:
            parse(src)
        assert "internally driven" in excinfo.value.message

    def test_duplicate_external_alias(self):
        src = CAVITY + """\
network {
  use a : cavity;
  use b : cavity;
  external a.in[0] as drive;
  external b.in[0] as drive;
}
"""
        err = _assert_error_at(src, "drive", occurrence=2)
        assert "duplicate external name" in err.message

    def test_nonfinite_entry(self):
        src = CAVITY.replace("S = [[1]];", "S = [[1e999]];")
        with pytest.raises(ParseError) as excinfo:
            parse(src)
        assert "non-finite" in str(excinfo.value.message)

    def test_error_str_mentions_location(self):
        with pytest.raises(ParseError) as excinfo:
            parse("component {")
        assert "line 1" in str(excinfo.value)


class TestRoundTrip:
    def test_cavity_round_trip(self):
        doc = parse(CAVITY)
        assert parse(serialize(doc)) == doc

    def test_complex_value_survives_exactly(self):
        src = CAVITY.replace("S = [[1]];", "S = [[0.5-0.25i]];")
        doc = parse(src)
        again = parse(serialize(doc))
        assert again.components["cavity"].S[0, 0] == 0.5 - 0.25j
        assert again == doc

    def test_seventeen_digit_floats(self):
        value = 0.1234567890123456789
        comp = LinearComponent([[np.exp(1j * value)]], [[np.sqrt(value)]], [[value]])
        doc = component_document("c", comp)
        again = parse(serialize(doc))
        assert again.components["c"].Omega[0, 0] == value
        assert again == doc

    def test_canonical_is_key_ordered(self):
        shuffled = """\
component cavity {
  Omega = [[0]];
  C = [[1]];
  inputs = 1;
  S = [[1]];
  modes = 1;
}
"""
        text = serialize(parse(shuffled))
        assert text.index("inputs") < text.index("modes") < text.index("S =") \
            < text.index("C =") < text.index("Omega")

    def test_figure6_round_trip(self):
        doc = parse(FIGURE6)
        assert parse(serialize(doc)) == doc

    def test_network_statements_preserved(self):
        doc = parse(SERIES)
        again = parse(serialize(doc))
        assert again.edges == doc.edges
        assert list(again.instances.items()) == list(doc.instances.items())


class TestBuildPartitioned:
    def test_series_doc_matches_series_product(self):
        doc = parse(SERIES)
        red = feedback_reduce(build_partitioned(doc))
        cav = doc.components["cavity"]
        ser = series_product(cav, cav, prefixes=("b", "a"))
        assert matkit.max_abs(red.S - ser.S) <= 1e-12
        assert matkit.max_abs(red.C - ser.C) <= 1e-12
        assert matkit.max_abs(red.Omega - ser.Omega) <= 1e-12

    def test_no_edges_all_external(self):
        doc = parse(CAVITY + "network {\n  use a : cavity;\n  use b : cavity;\n}\n")
        pc = build_partitioned(doc)
        assert pc.internal_out == () and pc.internal_in == ()
        assert pc.eta.shape == (0, 0)
        red = feedback_reduce(pc)
        assert red.n_ports == 2
        assert np.array_equal(red.S, pc.comp.S)

    def test_figure6_matches_beamsplitter_loop(self):
        doc = parse(FIGURE6)
        red = feedback_reduce(build_partitioned(doc))
        direct = beamsplitter_loop(mixing_splitter(0.5), make_cavity(3.0))
        assert matkit.max_abs(red.S - direct.S) <= 1e-12
        assert matkit.max_abs(red.C - direct.C) <= 1e-12
        assert matkit.max_abs(red.Omega - direct.Omega) <= 1e-12
        assert red.port_labels == ("drive",)

    def test_port_bookkeeping(self):
        doc = parse(FIGURE6)
        pc = build_partitioned(doc)
        n = pc.comp.n_ports
        assert len(pc.internal_in) + len(pc.external_in) == n
        assert len(pc.internal_out) + len(pc.external_out) == n
        assert sorted(pc.internal_in + pc.external_in) == list(range(n))
        ints = pc.eta.real.astype(int)
        assert np.all(ints.sum(axis=0) == 1) and np.all(ints.sum(axis=1) == 1)

    def test_declared_externals_come_first(self):
        src = CAVITY + """\
network {
  use a : cavity;
  use b : cavity;
  external b.in[0] as tap;
}
"""
        pc = build_partitioned(parse(src))
        assert pc.external_in == (1, 0)   # declared port first, then residual order
        red = feedback_reduce(pc)
        assert red.port_labels[0] == "tap"


class TestMatrixAssignments:
    def test_round_trip(self):
        text = "E = [[0,1],[1,0]];\nF = [[1i],[0]];\nK = [[0.5]];\n"
        found = parse_matrix_assignments(text)
        assert set(found) == {"E", "F", "K"}
        assert found["F"][0, 0] == 1j
        again = parse_matrix_assignments(
            format_matrix_assignments(sorted(found.items())))
        for key in found:
            assert np.array_equal(found[key], again[key])

    def test_duplicate_name_rejected(self):
        with pytest.raises(ParseError):
            parse_matrix_assignments("E = [[1]];\nE = [[2]];\n")

    def test_empty_matrix(self):
        found = parse_matrix_assignments("K = [];\n")
        assert found["K"].shape == (0, 0)


def test_format_cnum_forms():
    assert format_cnum(1.0) == "1"
    assert format_cnum(-2.5) == "-2.5"
    assert format_cnum(2j) == "2i"
    assert format_cnum(-0.25j) == "-0.25i"
    assert format_cnum(0.5 - 0.25j) == "0.5-0.25i"
    assert format_cnum(complex(0.0, 0.0)) == "0"


def test_document_equality_is_structural():
    a, b = parse(CAVITY), parse(CAVITY)
    assert a == b
    c = parse(CAVITY.replace("Omega = [[0]];", "Omega = [[1]];"))
    assert a != c
