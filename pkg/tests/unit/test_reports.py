import json

import pytest

from src.cli.reports import (
    VerificationReport,
    all_passed,
    render_json,
    render_mapping,
    render_table,
)

pytestmark = pytest.mark.unit


def report(computed, comparison="two-sided", target=1.0, tolerance=0.1):
    return VerificationReport("quantity", computed, target, tolerance, comparison, "anchor")


@pytest.mark.parametrize(
    "computed,comparison,passed",
    [
        (1.05, "two-sided", True),
        (1.2, "two-sided", False),
        (0.5, "at-most", True),
        (1.2, "at-most", False),
        (2.0, "at-least", True),
        (0.8, "at-least", False),
    ],
)
def test_comparisons(computed, comparison, passed):
    assert report(computed, comparison).passed is passed


def test_table_marks_and_footer():
    rows = [report(1.0), report(3.0)]
    text = render_table(rows, "Checks")
    lines = text.splitlines()
    assert lines[0] == "Checks"
    assert lines[2].startswith("✅ quantity")
    assert lines[3].startswith("❌ quantity")
    assert lines[-1] == "1/2 checks passed"
    assert not all_passed(rows)


def test_json_rows():
    data = json.loads(render_json([report(1.0)]))
    assert data == [
        {
            "name": "quantity",
            "computed": 1.0,
            "target": 1.0,
            "tolerance": 0.1,
            "comparison": "two-sided",
            "passed": True,
            "anchor": "anchor",
        }
    ]


def test_mapping_flattens_nested_dicts():
    text = render_mapping({"eps": 4e-11, "best": {"epsilon": 0.5, "grid": 3}, "ok": True}, "Chain")
    lines = text.splitlines()
    assert lines[0] == "Chain"
    assert lines[2].split() == ["eps", "4e-11"]
    assert lines[3].split() == ["best.epsilon", "0.5"]
    assert lines[4].split() == ["best.grid", "3"]
    assert lines[5].split() == ["ok", "True"]
