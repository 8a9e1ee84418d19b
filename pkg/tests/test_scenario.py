import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pathsum import library
from pathsum.hilbert import Basis, StateVector
from pathsum.scenario import (
    MeasurementEvent,
    Record,
    Scenario,
    ScenarioParseError,
    SubsystemSpec,
    parse_complex_literal,
    parse_scenario,
    scenario_equal,
    scenario_from_json,
    scenario_to_json,
    serialize_scenario,
    validate,
)
from pathsum.testing import random_scenario

MINIMAL = """
subsystem sys up down
state 1 0
measure 1 F sys retained up: 1 0 down: 0 1
"""


class TestComplexLiterals:
    @pytest.mark.parametrize(
        "text,value",
        [
            ("0", 0),
            ("1", 1),
            ("-1", -1),
            ("0.6", 0.6),
            ("3/5", 0.6),
            ("1/sqrt(2)", 1 / math.sqrt(2)),
            ("-1/sqrt(2)", -1 / math.sqrt(2)),
            ("sqrt(2/3)", math.sqrt(2 / 3)),
            ("sqrt(2)/sqrt(3)", math.sqrt(2) / math.sqrt(3)),
            ("1/sqrt(12)", 1 / math.sqrt(12)),
            ("2*sqrt(2)", 2 * math.sqrt(2)),
            ("1e-05", 1e-05),
            ("1.5e+3", 1500.0),
            ("0.5+0.5i", 0.5 + 0.5j),
            ("0.5-0.5i", 0.5 - 0.5j),
            ("1i", 1j),
            ("-1i", -1j),
            ("1/sqrt(2)+1/sqrt(2)i", (1 + 1j) / math.sqrt(2)),
            ("2.5e-1i", 0.25j),
        ],
    )
    def test_accepted(self, text, value):
        assert parse_complex_literal(text) == pytest.approx(value, abs=1e-15)

    @pytest.mark.parametrize(
        "text",
        ["", "i", "+", "1+", "1+2", "2i3", "sqrt(-1)", "1/0", "sqrt(2", "((1)",
         "1//2", "abc", "1e999", "--" * 40 + "1", "(" * 64 + "1" + ")" * 64],
    )
    def test_rejected_without_crash(self, text):
        with pytest.raises(ValueError):
            parse_complex_literal(text)


class TestParser:
    def test_minimal_scenario(self):
        s = parse_scenario(MINIMAL)
        assert [sub.name for sub in s.subsystems] == ["sys"]
        assert validate(s) == []

    def test_shipped_files_parse(self):
        for name in library.builtin_names():
            s = library.load_shipped(name)
            assert validate(s) == []

    def test_empty_input(self):
        with pytest.raises(ScenarioParseError, match="no subsystems declared"):
            parse_scenario("")

    def test_duplicate_basis_vector_names_pair(self):
        bad = MINIMAL.replace("down: 0 1", "down: 1 0")
        with pytest.raises(ScenarioParseError, match="0 and 1"):
            parse_scenario(bad)

    def test_unknown_subsystem(self):
        bad = MINIMAL.replace("measure 1 F sys", "measure 1 F spin")
        with pytest.raises(ScenarioParseError, match="unknown subsystem 'spin'"):
            parse_scenario(bad)

    def test_unknown_label_after_edit(self):
        text = serialize_scenario(library.two_wigners(library.RegimeTag.BOTH_ERASED))
        bad = text.replace("measure 1 Fbar coin", "measure 1 Fbar penny")
        with pytest.raises(ScenarioParseError, match="unknown subsystem"):
            parse_scenario(bad)

    def test_non_unitary_matrix(self):
        bad = (
            "subsystem sys up down\n"
            "state 1 0\n"
            "unitary 1 sys 1 0 1 1\n"
            "measure 2 F sys retained up: 1 0 down: 0 1\n"
        )
        with pytest.raises(ScenarioParseError, match="non-unitary"):
            parse_scenario(bad)

    def test_unnormalized_state(self):
        bad = MINIMAL.replace("state 1 0", "state 1 1")
        with pytest.raises(ScenarioParseError, match="norm"):
            parse_scenario(bad)

    def test_no_final_retained_measurement(self):
        bad = (
            "subsystem sys up down\n"
            "state 1 0\n"
            "measure 1 F sys retained up: 1 0 down: 0 1\n"
            "unitary 2 sys 0 1 1 0\n"
        )
        with pytest.raises(ScenarioParseError, match="no surviving final record"):
            parse_scenario(bad)

    def test_final_erased_measurement_rejected(self):
        bad = MINIMAL.replace("retained", "erased")
        with pytest.raises(ScenarioParseError, match="no surviving final record"):
            parse_scenario(bad)

    def test_erased_without_eraser_rejected(self):
        bad = (
            "subsystem a x y\n"
            "subsystem b x y\n"
            "state 1 0 0 0\n"
            "measure 1 F a erased x: 1 0 y: 0 1\n"
            "measure 2 W b retained x: 1 0 y: 0 1\n"
        )
        with pytest.raises(ScenarioParseError, match="never erased"):
            parse_scenario(bad)

    def test_error_location_points_at_line(self):
        bad = "subsystem sys up down\nstate 1 0\nmeasure 1 F sys retained up: 1 0 down: 0 2\n"
        with pytest.raises(ScenarioParseError) as err:
            parse_scenario(bad)
        assert err.value.line == 3

    def test_overlapping_same_time_events_rejected(self):
        bad = (
            "subsystem sys up down\n"
            "state 1 0\n"
            "measure 1 F sys retained up: 1 0 down: 0 1\n"
            "measure 1 W sys retained up: 1 0 down: 0 1\n"
        )
        with pytest.raises(ScenarioParseError, match="overlapping"):
            parse_scenario(bad)

    def test_same_time_disjoint_targets_allowed(self):
        text = (
            "subsystem a x y\n"
            "subsystem b x y\n"
            "state 1 0 0 0\n"
            "measure 1 F a retained x: 1 0 y: 0 1\n"
            "measure 1 W b retained x: 1 0 y: 0 1\n"
        )
        assert validate(parse_scenario(text)) == []

    def test_duplicate_agent_names_rejected(self):
        bad = (
            "subsystem a x y\n"
            "subsystem b x y\n"
            "state 1 0 0 0\n"
            "measure 1 F a retained x: 1 0 y: 0 1\n"
            "measure 2 F b retained x: 1 0 y: 0 1\n"
        )
        with pytest.raises(ScenarioParseError, match="not unique"):
            parse_scenario(bad)

    def test_invalid_utf8_bytes(self):
        with pytest.raises(ScenarioParseError, match="UTF-8"):
            parse_scenario(b"subsystem \xff\xfe sys")

    def test_bytes_input_accepted(self):
        s = parse_scenario(MINIMAL.encode("utf-8"))
        assert validate(s) == []


class TestRoundTrip:
    @pytest.mark.parametrize("name", library.builtin_names())
    def test_builtins(self, name):
        s = library.builtin(name)
        assert scenario_equal(s, parse_scenario(serialize_scenario(s)))

    @pytest.mark.parametrize("seed", range(25))
    def test_random_scenarios(self, seed):
        s = random_scenario(seed)
        assert scenario_equal(s, parse_scenario(serialize_scenario(s)))

    @pytest.mark.parametrize("seed", range(10))
    def test_json_random(self, seed):
        s = random_scenario(seed + 1000)
        assert scenario_equal(s, scenario_from_json(scenario_to_json(s)))

    def test_json_uses_re_im_pairs(self):
        import json

        doc = json.loads(scenario_to_json(library.builtin("double_slit")))
        assert doc["initial"]["amps"][0] == [0.6, 0.0]
        assert doc["events"][0]["kind"] == "measurement"
        assert doc["events"][0]["record"] == "RETAINED"

    def test_explicit_final_time_round_trips(self):
        s = Scenario(
            parse_scenario(MINIMAL).subsystems,
            parse_scenario(MINIMAL).initial,
            parse_scenario(MINIMAL).events,
            final_time=9,
        )
        text = serialize_scenario(s)
        assert "final 9" in text
        again = parse_scenario(text)
        assert again.final_time == 9 and scenario_equal(s, again)

    def test_final_before_last_event_rejected(self):
        with pytest.raises(ScenarioParseError, match="final_time is earlier"):
            parse_scenario(MINIMAL + "final 0\n")

    def test_scenario_equal_detects_record_flip(self):
        a = library.two_wigners(library.RegimeTag.BOTH_ERASED)
        b = library.two_wigners(library.RegimeTag.F_PRESERVED)
        assert not scenario_equal(a, b)


class TestValidate:
    def _parts(self):
        sub = SubsystemSpec("sys", 2, ("up", "down"))
        basis = Basis((2,), ("up", "down"),
                      (StateVector((2,), [1, 0]), StateVector((2,), [0, 1])))
        return sub, basis

    def test_unnormalized_initial_reported(self):
        sub, basis = self._parts()
        s = Scenario(
            (sub,),
            StateVector((2,), [1, 1]),
            (MeasurementEvent(1, "F", ("sys",), basis, Record.RETAINED),),
        )
        assert any("norm != 1" in v for v in validate(s))

    def test_builtin_scenarios_validate(self):
        for name in library.builtin_names():
            assert validate(library.builtin(name)) == []


class TestFuzz:
    def test_seeded_random_bytes_never_crash(self):
        rng = random.Random(0)
        for _ in range(2000):
            blob = bytes(rng.randrange(256) for _ in range(rng.randrange(120)))
            try:
                parse_scenario(blob)
            except ScenarioParseError as exc:
                assert exc.line >= 0 and exc.col >= 0

    @settings(max_examples=150, deadline=None)
    @given(st.binary(max_size=400))
    def test_arbitrary_bytes(self, blob):
        try:
            parse_scenario(blob)
        except ScenarioParseError:
            pass

    @settings(max_examples=150, deadline=None)
    @given(st.text(max_size=400))
    def test_arbitrary_text(self, text):
        try:
            parse_scenario(text)
        except ScenarioParseError:
            pass

    @settings(max_examples=60, deadline=None)
    @given(st.integers(0, 2 ** 32 - 1), st.integers(0, 100))
    def test_mutated_valid_sources(self, seed, cut):
        source = serialize_scenario(random_scenario(seed % 500))
        rng = random.Random(seed)
        chars = list(source)
        for _ in range(cut % 8):
            pos = rng.randrange(len(chars))
            chars[pos] = chr(rng.randrange(32, 127))
        try:
            parse_scenario("".join(chars))
        except ScenarioParseError:
            pass
