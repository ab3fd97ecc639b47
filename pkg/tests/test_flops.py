"""Closed-form FLOP counts.

Expected values are written out as literal integers, computed by hand from
the per-scheme formulas, so a regression in `flops_count` cannot hide behind
its own output.
"""

import pytest

from rkmimo.flops import (
    ITERATIVE_SCHEMES,
    SCHEMES,
    default_omega,
    flops_count,
    flops_table,
    relaxation_ratio_pct,
)

# (scheme, m, k, t) -> exact count; omega defaults to ceil(log2 k) for RSK.
_EXPECTED = {
    # M = 256, K = 32, T = 64, omega = 5
    ("MR", 256, 32, 0): 65_472,
    ("RZF", 256, 32, 0): 1_320_832,
    ("nRK", 256, 32, 64): 393_695,
    ("RK", 256, 32, 64): 395_711,
    ("GRK", 256, 32, 64): 1_310_112,
    ("RSK", 256, 32, 64): 920_576,
    ("TPE", 256, 32, 64): 1_679_460,
    # M = 64, K = 8, T = 12, omega = 3
    ("MR", 64, 8, 0): 4_080,
    ("RZF", 64, 8, 0): 25_696,
    ("nRK", 64, 8, 12): 20_567,
    ("RK", 64, 8, 12): 20_655,
    ("GRK", 64, 8, 12): 30_220,
    ("RSK", 64, 8, 12): 33_124,
    ("TPE", 64, 8, 12): 29_084,
}


@pytest.mark.parametrize("key", sorted(_EXPECTED))
def test_flops_count_reference_values(key):
    scheme, m, k, t = key
    assert flops_count(scheme, m, k, t) == _EXPECTED[key]


def test_flops_count_zero_iterations_is_setup_only():
    # T = 0 leaves only the setup term, so the marginal per-iteration cost
    # can be recovered by differencing and must be constant in T
    for scheme in ITERATIVE_SCHEMES:
        c0 = flops_count(scheme, 256, 32, 0)
        c1 = flops_count(scheme, 256, 32, 1)
        c2 = flops_count(scheme, 256, 32, 2)
        assert c1 - c0 == c2 - c1


def test_flops_count_marginal_iteration_costs():
    # per-iteration slopes at M = 256, K = 32, omega = 5
    slope = lambda s: flops_count(s, 256, 32, 2) - flops_count(s, 256, 32, 1)
    assert slope("nRK") == 16 * 256 + 8
    assert slope("RK") == 32 + 16 * 256 + 8
    assert slope("GRK") == 16 * 32 + 8 * 256 + 7
    assert slope("RSK") == 5 * (8 * 256 + 9) + 8 * 256 + 4
    assert slope("TPE") == 8 * 32 * 32 + 4 * 32


def test_flops_count_explicit_omega():
    base = flops_count("RSK", 256, 32, 64)
    assert flops_count("RSK", 256, 32, 64, omega=5) == base
    assert flops_count("RSK", 256, 32, 64, omega=6) == base + 64 * (8 * 256 + 9)


def test_default_omega_is_log2_ceiling_with_floor_one():
    assert default_omega(1) == 1
    assert default_omega(2) == 1
    assert default_omega(3) == 2
    assert default_omega(8) == 3
    assert default_omega(9) == 4
    assert default_omega(32) == 5
    assert default_omega(128) == 7


def test_relaxation_ratio_reference_values():
    # savings of the iterative schemes relative to the exact receiver
    assert relaxation_ratio_pct("GRK", 256, 32, 64) == pytest.approx(0.8116, abs=5e-4)
    assert relaxation_ratio_pct("RK", 256, 32, 64) == pytest.approx(70.04, abs=0.01)
    assert relaxation_ratio_pct("RZF", 256, 32, 0) == 0.0


def test_flops_table_covers_all_schemes_with_consistent_counts():
    rows = flops_table(256, 32, 64)
    assert [r["scheme"] for r in rows] == list(SCHEMES)
    for row in rows:
        t = row["t"]
        assert t == (0 if row["scheme"] in ("MR", "RZF") else 64)
        omega = row["omega"]
        assert (omega == default_omega(32)) == (row["scheme"] == "RSK")
        assert row["flops"] == flops_count(
            row["scheme"], 256, 32, t, omega if row["scheme"] == "RSK" else None
        )


def test_flops_count_validates_arguments():
    with pytest.raises(ValueError):
        flops_count("ZF", 64, 8, 0)
    with pytest.raises(ValueError):
        flops_count("nRK", 64, 8, -1)
    with pytest.raises(ValueError):
        flops_count("nRK", 0, 8, 1)
    with pytest.raises(ValueError):
        flops_count("RSK", 64, 8, 1, omega=9)
