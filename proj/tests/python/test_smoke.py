import math

import pytest

import numgame


def test_catalog_has_twelve_rules():
    rules = numgame.catalog()
    assert len(rules) == 12
    assert {r["tier"] for r in rules} == {"Easy", "Medium", "Hard"}
    assert any(r["id"] == "powers_of_2" and r["dsl"] == "power_of(2)" for r in rules)


def test_extension_and_canonical_text():
    assert numgame.extension("power_of(2)") == [1, 2, 4, 8, 16, 32, 64]
    assert len(numgame.extension("divisible(4)")) == 26
    assert numgame.canonicalize("AND(odd,  divisible(3))") == "and(divisible(3), odd)"
    assert numgame.extension("even", lo=0, hi=5) == [0, 2, 4]


def test_parse_errors_raise():
    with pytest.raises(numgame.ParseError):
        numgame.canonicalize("and(odd, ")
    assert issubclass(numgame.ParseError, numgame.Error)


def test_eig_matches_binary_entropy():
    h = ["odd", "even"]
    assert numgame.eig_score(h, [0.5, 0.5], 3) == pytest.approx(1.0)
    assert numgame.eig_score(h, [0.75, 0.25], 3) == pytest.approx(0.8113, abs=1e-4)
    p = numgame.predictive(["divisible(4)", "even"], [0.83, 0.17], 81)
    assert p == 0.0
    assert numgame.entropy(h, [0.83, 0.17]) == pytest.approx(0.6577, abs=1e-4)


def test_run_trial_is_deterministic():
    a = numgame.run_trial("odd_numbers", policy="pts", seed=3, budget=20)
    b = numgame.run_trial("odd_numbers", policy="pts", seed=3, budget=20)
    assert a == b
    header, rows = a
    assert header["concept_id"] == "odd_numbers"
    assert header["outcome"]["kind"] in {"converged", "dnf"}
    assert len([r for r in rows if r["t"] > 0]) <= 20
    assert all(r["nll_true"] <= 29.9 for r in rows)
    assert not math.isnan(rows[-1]["map_confidence"])


def test_unknown_rule_is_a_usage_error():
    with pytest.raises(numgame.UsageError):
        numgame.run_trial("fibonacci")
    code, _, err = numgame.cli(["run", "--rule", "fibonacci"])
    assert code == 2
    assert "squares" in err
