from fractions import Fraction as F

import pytest

from hetnet.analysis.indices import (
    KSRegime,
    NonPositiveInput,
    nu_quantities,
    predict_ks_regime,
    rho,
    rho_124,
    rho_gh,
    stability_indices,
)
from hetnet.models import PRESET_PARAMS, KSParams


def exact(p):
    return {k: F(str(v)) for k, v in vars(p).items()}


def nu_oracle(p):
    """The six transverse quantities, spelled out term by term."""
    q = exact(p)
    e12, e23, e31, e24, e41 = q["e12"], q["e23"], q["e31"], q["e24"], q["e41"]
    c13, c14, c21, c32, c42 = q["c13"], q["c14"], q["c21"], q["c32"], q["c42"]
    t34, t43 = q["t34"], q["t43"]
    return {
        "1234": c14 / e12 - c13 * e24 / (e12 * e23) + c21 * c13 * t34 / (e12 * e31 * e23),
        "2314": -e24 / e23 + c21 * t34 / (e23 * e31) + c14 * c32 * c21 / (e12 * e23 * e31),
        "3124": t34 / e31 + c32 * c14 / (e12 * e31) - c32 * c13 * e24 / (e23 * e12 * e31),
        "1243": c13 / e12 - c14 * e23 / (e12 * e24) + c21 * c14 * t43 / (e12 * e41 * e24),
        "2413": -e23 / e24 + c21 * t43 / (e24 * e41) + c13 * c42 * c21 / (e12 * e24 * e41),
        "4123": t43 / e41 + c42 * c13 / (e12 * e41) - c42 * c14 * e23 / (e24 * e12 * e41),
    }


def test_rho_gh_is_four_thirds():
    q = exact(PRESET_PARAMS["gh"])
    oracle = q["c13"] * q["c21"] * q["c32"] / (q["e12"] * q["e23"] * q["e31"])
    assert oracle == F(4, 3)
    assert abs(rho_gh(PRESET_PARAMS["gh"]) - float(oracle)) < 1e-12


def test_rho_124_ks_d_is_one():
    q = exact(PRESET_PARAMS["ks-d"])
    assert q["c14"] * q["c21"] * q["c42"] / (q["e12"] * q["e24"] * q["e41"]) == 1
    assert abs(rho_124(PRESET_PARAMS["ks-d"]) - 1.0) < 1e-12


@pytest.mark.parametrize("preset", ["ks-a", "ks-b", "ks-c", "ks-d"])
def test_nu_matches_oracle(preset):
    got = nu_quantities(PRESET_PARAMS[preset])
    for k, v in nu_oracle(PRESET_PARAMS[preset]).items():
        assert got[k] == pytest.approx(float(v), rel=1e-12, abs=1e-14)


def test_ks_b_nu_1234_negative_under_both_symbol_mappings():
    p = PRESET_PARAMS["ks-b"]
    swapped = KSParams(**{**vars(p), "t34": p.t43, "t43": p.t34})
    assert nu_quantities(p)["1234"] < 0
    assert nu_quantities(swapped)["1234"] < 0


def test_regime_catalogue():
    expected = {
        "ks-a": KSRegime.NOT_AT_RESONANCE_NO_SWITCHING,
        "ks-b": KSRegime.NOT_AT_RESONANCE_SWITCHING,
        "ks-c": KSRegime.AT_RESONANCE_NO_SWITCHING,
        "ks-d": KSRegime.AT_RESONANCE_SWITCHING,
    }
    for key, regime in expected.items():
        assert predict_ks_regime(PRESET_PARAMS[key]).regime is regime
    assert predict_ks_regime(PRESET_PARAMS["ks-b"]).switching == "3->4"


def test_all_ones_is_resonant_everywhere():
    p = KSParams(**{k: 1.0 for k in KSParams.__dataclass_fields__})
    si = stability_indices(p)
    assert all(v == pytest.approx(1.0) for v in si.nu_values.values())
    assert all(si.resonance_flags.values())


def test_rho_rejects_nonpositive():
    with pytest.raises(NonPositiveInput):
        rho([1.0, 0.0], [1.0])
    with pytest.raises(NonPositiveInput):
        rho([], [1.0])
    with pytest.raises(ValueError):
        predict_ks_regime(PRESET_PARAMS["ks-a"], resonance_tol=-1)


def test_analytic_flag_is_strict_for_rounded_table_values():
    # e41 is quoted to three figures, so rho_124 misses 1 by about 2e-4
    si = stability_indices(PRESET_PARAMS["ks-c"])
    assert not si.resonance_flags["124"]
    assert "124" in predict_ks_regime(PRESET_PARAMS["ks-c"]).resonant_cycles
