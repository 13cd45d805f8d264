import json
import os
import subprocess
import sys

import pytest

from robustplots import (
    SchemaError,
    render_event_frequencies,
    render_scaling_fit,
    render_threshold_curve,
)

DATA = os.path.join(os.path.dirname(__file__), "data")
GOLDEN = os.path.join(os.path.dirname(__file__), "golden")


def _golden_check(name, description):
    path = os.path.join(GOLDEN, name)
    if os.environ.get("PLOTS_REGOLD"):
        with open(path, "w") as fh:
            json.dump(description, fh, sort_keys=True, indent=1)
    with open(path) as fh:
        assert description == json.load(fh)


def test_threshold_golden(tmp_path):
    out = str(tmp_path / "threshold.png")
    desc = render_threshold_curve(os.path.join(DATA, "threshold.csv"), out)
    assert os.path.getsize(out) > 0
    sidecar = json.load(open(out + ".json"))
    assert sidecar == desc
    _golden_check("threshold.json", desc)


def test_threshold_two_families(tmp_path):
    out = str(tmp_path / "two.png")
    desc = render_threshold_curve(os.path.join(DATA, "threshold_two_families.csv"), out)
    assert len(desc["curves"]) == 2
    assert {c["family"] for c in desc["curves"]} == {"complete(14)", "paley(29)"}
    _golden_check("threshold_two_families.json", desc)


def test_threshold_deterministic(tmp_path):
    a = render_threshold_curve(os.path.join(DATA, "threshold.csv"), str(tmp_path / "a.png"))
    b = render_threshold_curve(os.path.join(DATA, "threshold.csv"), str(tmp_path / "b.png"))
    assert a == b


def test_scaling_golden(tmp_path):
    out = str(tmp_path / "scaling.png")
    desc = render_scaling_fit(os.path.join(DATA, "scaling.csv"), out)
    assert os.path.getsize(out) > 0
    # the annotation is the CSV's fitted slope field, never recomputed
    rows = open(os.path.join(DATA, "scaling.csv")).read().splitlines()
    slope_field = float(rows[1].split(",")[7])
    assert desc["slope_corrected"] == slope_field
    _golden_check("scaling.json", desc)


def test_events_golden(tmp_path):
    out = str(tmp_path / "events.png")
    desc = render_event_frequencies(os.path.join(DATA, "events.csv"), out)
    assert desc["events"] == ["min-degree", "pair-edges", "small-set"]
    _golden_check("events.json", desc)


def test_schema_rejection(tmp_path):
    empty = tmp_path / "empty.csv"
    empty.write_text("")
    with pytest.raises(SchemaError):
        render_threshold_curve(str(empty), str(tmp_path / "x.png"))
    header_only = tmp_path / "h.csv"
    header_only.write_text(
        "family,n,d,lambda,property,p,trials,successes,phat,ci_lo,ci_hi,reference_value\n"
    )
    with pytest.raises(SchemaError):
        render_threshold_curve(str(header_only), str(tmp_path / "x.png"))
    with pytest.raises(SchemaError):
        render_scaling_fit(os.path.join(DATA, "events.csv"), str(tmp_path / "x.png"))
    with pytest.raises(SchemaError):
        render_event_frequencies(os.path.join(DATA, "scaling.csv"), str(tmp_path / "x.png"))
    single = tmp_path / "single.csv"
    rows = open(os.path.join(DATA, "scaling.csv")).read().splitlines()
    single.write_text("\n".join(rows[:2]) + "\n")
    with pytest.raises(SchemaError):
        render_scaling_fit(str(single), str(tmp_path / "x.png"))


def test_cli(tmp_path):
    out = tmp_path / "fig.png"
    r = subprocess.run(
        [sys.executable, "-m", "robustplots.cli", "threshold",
         "--in", os.path.join(DATA, "threshold.csv"), "--out", str(out)],
        capture_output=True, text=True,
    )
    assert r.returncode == 0 and out.exists()
    r2 = subprocess.run(
        [sys.executable, "-m", "robustplots.cli", "scaling",
         "--in", os.path.join(DATA, "events.csv"), "--out", str(tmp_path / "y.png")],
        capture_output=True, text=True,
    )
    assert r2.returncode == 2 and "error" in r2.stderr
