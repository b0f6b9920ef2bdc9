import shutil

import pytest

from c6proto.errors import LabelError, TableSyntaxError, TableWidthError, UnknownSymbolError
from c6proto.modules.protocols import CERTIFIED_LAYOUTS
from c6proto.modules.tables import (
    DATA_DIR,
    Layout,
    PartyAssignment,
    available_tables,
    load_source_table,
    load_table,
    outcome_gram,
    parse_table,
    serialize_table,
    validate_table,
    verify_data_hashes,
)


def certified(tables, table_id):
    table = tables[table_id]
    return validate_table(table, None, CERTIFIED_LAYOUTS[table_id], label="certified",
                          source_table=load_source_table(table))


def test_bundled_tables(tables):
    assert available_tables() == [f"table{n}" for n in range(1, 7)]
    shapes = {tid: (t.width, t.result_width, len(t.rows)) for tid, t in tables.items()}
    assert shapes == {
        "1": (6, 2, 16), "2": (4, 4, 16), "3": (2, 2, 4),
        "4": (5, 3, 16), "5": (1, 2, 2), "6": (4, 2, 4),
    }
    assert not tables["6"].is_linear
    assert all(tables[tid].is_linear for tid in "12345")


def test_data_hashes_match():
    status = verify_data_hashes()
    assert len(status) == 6
    assert all(status.values())


def test_tampered_table_fails_hash(tmp_path):
    for path in DATA_DIR.iterdir():
        shutil.copy(path, tmp_path / path.name)
    text = (tmp_path / "table1.qt").read_text(encoding="utf-8")
    (tmp_path / "table1.qt").write_text(text.replace("-b:11", "+b:11", 1), encoding="utf-8")
    status = verify_data_hashes(tmp_path)
    assert status["table1.qt"] is False
    assert status["table2.qt"] is True


def test_stated_assignments(tables):
    assert tables["1"].stated.spec() == "alice=a,b,1,6,2,5 bob=3,4"
    assert tables["3"].source == ("2", 1)
    assert tables["3"].stated.measurer == "bob"


@pytest.mark.parametrize("table_id", ["1", "2", "3", "4", "5", "6"])
def test_serialize_roundtrip(tables, table_id):
    table = tables[table_id]
    assert parse_table(serialize_table(table)) == table


def test_missing_header():
    with pytest.raises(TableSyntaxError) as exc:
        parse_table("+1:00 => +a:0\n")
    assert exc.value.line == 1


def test_width_error_has_position():
    with pytest.raises(TableWidthError) as exc:
        parse_table("table x width 2\n+1:00 +1:000 => +a:0\n")
    assert exc.value.line == 2
    assert exc.value.column == 7


def test_unknown_symbol():
    with pytest.raises(UnknownSymbolError) as exc:
        parse_table("table x width 2\n+q:00 => +a:0\n")
    assert (exc.value.line, exc.value.column) == (2, 2)


def test_row_needs_arrow():
    with pytest.raises(TableSyntaxError):
        parse_table("table x width 2\n+1:00 +a:0\n")


def test_erratum_must_name_existing_row():
    with pytest.raises(TableSyntaxError):
        parse_table("table x width 1\nerratum 3 typo\n+1:0 => +a:0\n")


def test_load_missing_table():
    with pytest.raises(FileNotFoundError):
        load_table("garbage")


def test_party_assignment_parse():
    assignment = PartyAssignment.parse("alice=a,b,1 bob=3,4")
    assert assignment.measurer == "alice"
    assert assignment.labels("alice") == ("a", "b", 1)
    assert assignment.party_of(4) == "bob"
    with pytest.raises(LabelError):
        PartyAssignment.parse("alice=1,2 bob=2")
    with pytest.raises(LabelError):
        PartyAssignment.parse("alice")


def test_layout_print_order_must_cover_receivers():
    assignment = PartyAssignment.parse("alice=1,2 bob=3,4")
    assert Layout.from_assignment(assignment).printed == (3, 4)
    with pytest.raises(LabelError):
        Layout(assignment, (3, 5))


def test_teleport_table_under_certified_layout(tables):
    report = certified(tables, "1")
    assert [r.row for r in report.rows if r.matched] == [1, 2, 3, 4, 5, 8, 13, 14, 15, 16]
    assert report.mismatched_rows == [6, 7, 9, 10, 11, 12]
    assert report.explained
    assert "b: sign" in report.rows[5].diagnosis
    assert "b: sign" in report.rows[6].diagnosis


def test_first_splitting_table_under_certified_layout(tables):
    report = certified(tables, "2")
    assert report.mismatched_rows == [6, 9, 10, 11, 12]
    assert report.explained


@pytest.mark.parametrize("table_id", ["3", "4", "5", "6"])
def test_tables_reproduce_under_certified_layout(tables, table_id):
    report = certified(tables, table_id)
    assert report.consistent


def test_phase_family_table_mode(tables):
    assert certified(tables, "6").mode == "phase-family"


def test_stated_hadamard_layout_mismatches(tables):
    table = tables["5"]
    report = validate_table(table, None, Layout.from_assignment(table.stated), label="stated",
                            source_table=load_source_table(table))
    assert not report.consistent


def test_printed_outcome_kets_repeat(tables):
    assert not outcome_gram(tables["1"]).passed
    assert not outcome_gram(tables["4"]).passed
    assert outcome_gram(tables["3"]).passed
