import math

import numpy as np
import pytest

from pathsum import library, paths
from pathsum.oracle import (
    OracleError,
    dilate,
    distribution,
    evolve,
    inspect_record,
    joint_probability,
)
from pathsum.scenario import RecordErasedError, parse_scenario
from pathsum.testing import random_scenario

SQ2 = 1.0 / math.sqrt(2.0)
SQ3 = 1.0 / math.sqrt(3.0)
ALPHA, BETA, GAMMA, DELTA = library.HADAMARD
S0 = library.GENERIC_S0


def amp(j, i, s0):
    """A(j <- i <- s0) for the two-level system with no own dynamics."""
    overlaps = {"fail": (ALPHA, BETA), "ok": (GAMMA, DELTA)}
    idx = {"up": 0, "down": 1}
    return np.conj(overlaps[j][idx[i]]) * s0[idx[i]]


class TestDilate:
    def test_one_ancilla_per_measurement(self):
        d = dilate(library.two_wigners(library.RegimeTag.BOTH_ERASED))
        assert len(d.ancillas) == 4
        assert d.dims == (2, 2, 3, 3, 3, 3)

    def test_single_measurement_adds_exactly_one_ancilla(self):
        s = parse_scenario(
            "subsystem sys up down\nstate 0.6 0.8\n"
            "measure 1 W sys retained fail: 1/sqrt(2) 1/sqrt(2) ok: 1/sqrt(2) -1/sqrt(2)\n"
        )
        d = dilate(s)
        assert len(d.ancillas) == 1
        assert d.dims == (2, 3)

    def test_couplings_are_unitary(self):
        d = dilate(library.two_wigners(library.RegimeTag.F_PRESERVED))
        for plan in d.couplings:
            side = plan.matrix.shape[0]
            defect = np.max(np.abs(plan.matrix.conj().T @ plan.matrix - np.eye(side)))
            assert defect <= 1e-12

    def test_erasure_map_points_at_the_eraser(self):
        s = library.wfs("II")
        d = dilate(s)
        (erased_event, _), = s.erased()
        realization = d.erasure_map[erased_event]
        eraser = s.events[realization.eraser_event]
        assert eraser.agent == "W"

    def test_erasure_basis_entangles_pointer_with_branch(self):
        # composite vectors alpha |D(up)> x |up> + beta |D(down)> x |down>
        d = dilate(library.wfs("II"))
        realization = next(iter(d.erasure_map.values()))
        fail_col = realization.basis[:, 0]
        # axes (ancilla dim 3, system dim 2); pointer up = 1, down = 2
        expected = np.zeros(6, dtype=complex)
        expected[2] = ALPHA  # (ptr=up, sys=up)
        expected[5] = BETA  # (ptr=down, sys=down)
        np.testing.assert_allclose(fail_col, expected, atol=1e-12)


class TestEvolve:
    def test_norm_conserved_at_every_boundary(self):
        s = library.two_wigners(library.RegimeTag.BOTH_ERASED)
        d = dilate(s)
        for t in range(1, 6):
            st = evolve(d, upto_time=t)
            assert st.psi.norm() == pytest.approx(1.0, abs=1e-12)

    def test_identity_only_prefix_leaves_ancillas_untriggered(self):
        s = parse_scenario(
            "subsystem sys up down\nstate 0.6 0.8\n"
            "measure 1 F sys retained up: 1 0 down: 0 1\n"
        )
        d = dilate(s)
        st = evolve(d, upto_time=0)
        tensor = st.psi.as_tensor()
        np.testing.assert_allclose(tensor[:, 0], [0.6, 0.8], atol=1e-15)
        assert np.linalg.norm(tensor[:, 1:]) == pytest.approx(0.0, abs=1e-15)

    def test_state_before_observers_has_no_heads_up_branch(self):
        s = library.two_wigners(library.RegimeTag.BOTH_PRESERVED)
        st = evolve(dilate(s), upto_time=3)
        psi = st.psi.as_tensor()  # axes: coin, spin, DFbar, DF, DWbar, DW
        assert psi[0, 0, 1, 1, 0, 0] == pytest.approx(0.0, abs=1e-12)
        for idx in ((0, 1, 1, 2, 0, 0), (1, 0, 2, 1, 0, 0), (1, 1, 2, 2, 0, 0)):
            assert psi[idx] == pytest.approx(SQ3, abs=1e-12)

    def test_disturbed_record_raises(self):
        bad = parse_scenario(
            "subsystem sys up down\n"
            "state 0.6 0.8\n"
            "measure 1 F sys erased up: 1 0 down: 0 1\n"
            "unitary 2 sys 1/sqrt(2) 1/sqrt(2) 1/sqrt(2) -1/sqrt(2)\n"
            "measure 3 W sys retained fail: 1/sqrt(2) 1/sqrt(2) ok: 1/sqrt(2) -1/sqrt(2)\n"
        )
        with pytest.raises(OracleError, match="disturbed"):
            evolve(dilate(bad))


class TestJointProbability:
    def test_which_way_statistics(self):
        # both probes engaged: P(i, j) = |A(j <- i <- s0)|^2
        st = evolve(dilate(library.double_slit()))
        for i in ("up", "down"):
            for j in ("fail", "ok"):
                expected = abs(amp(j, i, S0)) ** 2
                assert joint_probability(st, {"F": i, "W": j}) == pytest.approx(
                    expected, abs=1e-12
                )

    def test_partial_selection_marginalizes(self):
        st = evolve(dilate(library.double_slit()))
        p_ok = joint_probability(st, {"W": "ok"})
        expected = sum(abs(amp("ok", i, S0)) ** 2 for i in ("up", "down"))
        assert p_ok == pytest.approx(expected, abs=1e-12)

    def test_selection_completeness(self):
        st = evolve(dilate(library.two_wigners(library.RegimeTag.BOTH_ERASED)))
        total = sum(joint_probability(st, {"W": label}) for label in ("fail", "ok"))
        assert total == pytest.approx(1.0, abs=1e-12)

    def test_both_erased_okbar_ok_is_one_twelfth(self):
        st = evolve(dilate(library.two_wigners(library.RegimeTag.BOTH_ERASED)))
        p = joint_probability(st, {"Wbar": "ok_bar", "W": "ok"})
        assert p == pytest.approx(1 / 12, abs=1e-9)

    def test_all_retained_heads_up_is_zero(self):
        st = evolve(dilate(library.two_wigners(library.RegimeTag.BOTH_PRESERVED)))
        assert joint_probability(st, {"Fbar": "heads", "F": "up"}) == pytest.approx(
            0.0, abs=1e-12
        )

    def test_erased_selection_is_a_typed_error(self):
        st = evolve(dilate(library.two_wigners(library.RegimeTag.BOTH_ERASED)))
        with pytest.raises(RecordErasedError, match="outcome undefined"):
            joint_probability(st, {"Fbar": "heads"})

    def test_unknown_agent_and_label(self):
        st = evolve(dilate(library.double_slit()))
        with pytest.raises(ValueError, match="unknown agent"):
            joint_probability(st, {"nobody": "ok"})
        with pytest.raises(ValueError, match="unknown outcome label"):
            joint_probability(st, {"W": "sideways"})


class TestInterferenceRestoration:
    def test_without_probe_amplitudes_add(self):
        st = evolve(dilate(library.double_slit(engage_first_probe=False)))
        expected = abs(amp("ok", "up", S0) + amp("ok", "down", S0)) ** 2
        assert joint_probability(st, {"W": "ok"}) == pytest.approx(expected, abs=1e-12)

    def test_case1_sums_probabilities_case2_sums_amplitudes(self):
        p_sum = sum(abs(amp("ok", i, S0)) ** 2 for i in ("up", "down"))
        a_sum = abs(amp("ok", "up", S0) + amp("ok", "down", S0)) ** 2
        d1 = distribution(library.wfs("I"))
        d2 = distribution(library.wfs("II"))
        assert d1.probability({"W": "ok"}) == pytest.approx(p_sum, abs=1e-12)
        assert d2.probability({"W": "ok"}) == pytest.approx(a_sum, abs=1e-12)
        assert abs(p_sum - a_sum) > 0.1  # generic preparation: they differ

    def test_erasure_equals_never_measured(self):
        erased = distribution(library.wfs("II"))
        bare = distribution(library.double_slit(engage_first_probe=False))
        for label in ("fail", "ok"):
            assert erased.probability({"W": label}) == pytest.approx(
                bare.probability({"W": label}), abs=1e-12
            )


class TestInspectRecord:
    def _state(self, s0=S0):
        return evolve(dilate(library.wfs("II", s0=s0)))

    def test_joint_with_ok_carries_gamma_squared(self):
        st = self._state()
        a_ok = amp("ok", "up", S0) + amp("ok", "down", S0)
        expected = abs(GAMMA) ** 2 * abs(a_ok) ** 2
        assert inspect_record(st, "F", "up", {"W": "ok"}) == pytest.approx(
            expected, abs=1e-12
        )

    def test_joint_with_fail_carries_alpha_squared(self):
        st = self._state()
        a_fail = amp("fail", "up", S0) + amp("fail", "down", S0)
        expected = abs(ALPHA) ** 2 * abs(a_fail) ** 2
        assert inspect_record(st, "F", "up", {"W": "fail"}) == pytest.approx(
            expected, abs=1e-12
        )

    def test_marginal_is_sum_over_final_selection(self):
        st = self._state()
        total = inspect_record(st, "F", "up")
        by_parts = inspect_record(st, "F", "up", {"W": "ok"}) + inspect_record(
            st, "F", "up", {"W": "fail"}
        )
        assert total == pytest.approx(by_parts, abs=1e-12)

    def test_reading_does_not_certify_the_branch(self):
        # the record reads 'up' with probability built from interference
        # sums, not from the pre-erasure branch probability |<up|s0>|^2
        st = self._state()
        p_up = inspect_record(st, "F", "up")
        assert abs(p_up - S0[0] ** 2) > 0.1

    def test_untriggered_pointer_after_coupling_is_zero(self):
        st = self._state()
        assert inspect_record(st, "F", "0") == pytest.approx(0.0, abs=1e-12)

    def test_retained_record_directs_to_joint_probability(self):
        st = evolve(dilate(library.wfs("I")))
        with pytest.raises(ValueError, match="joint_probability"):
            inspect_record(st, "F", "up")

    def test_before_erasure_is_an_error(self):
        d = dilate(library.wfs("II"))
        st = evolve(d, upto_time=1)
        with pytest.raises(OracleError, match="not evolved past"):
            inspect_record(st, "F", "up")


class TestErasureTopologies:
    def _delta(self, s):
        pd = paths.distribution(s)
        od = distribution(s)
        keys = set(pd.weights) | set(od.weights)
        return pd, od, max(
            abs(pd.weights.get(k, 0.0) - od.weights.get(k, 0.0)) for k in keys
        )

    def test_chained_erasure_restores_full_interference(self):
        # two erased measurements in a row: the final statistics are those of
        # measuring the preparation directly
        s = parse_scenario(
            "subsystem a x y\n"
            "state 0.6 0.8\n"
            "measure 1 P a erased x: 1 0 y: 0 1\n"
            "measure 2 Q a erased f: 1/sqrt(2) 1/sqrt(2) o: 1/sqrt(2) -1/sqrt(2)\n"
            "measure 3 R a retained u: 0.6 0.8 v: -0.8 0.6\n"
        )
        pd, od, delta = self._delta(s)
        assert delta <= 1e-9
        assert pd.probability({"R": "u"}) == pytest.approx(1.0, abs=1e-9)
        assert pd.probability({"R": "v"}) == pytest.approx(0.0, abs=1e-9)

    def test_remeasuring_after_a_retained_eraser(self):
        # P's record is erased by Q; a later measurement of the same system
        # sees Q's branches, not P's
        s = parse_scenario(
            "subsystem a x y\n"
            "state 0.6 0.8\n"
            "measure 1 P a erased x: 1 0 y: 0 1\n"
            "measure 2 Q a retained f: 1/sqrt(2) 1/sqrt(2) o: 1/sqrt(2) -1/sqrt(2)\n"
            "measure 3 R a retained x: 1 0 y: 0 1\n"
        )
        pd, od, delta = self._delta(s)
        assert delta <= 1e-9
        # P(Q=m, R=n) = |<n|m>|^2 |<m|psi>|^2 with psi = 0.6|x> + 0.8|y>
        expected = {
            ("f", "x"): 0.49, ("f", "y"): 0.49, ("o", "x"): 0.01, ("o", "y"): 0.01,
        }
        for key, w in pd.weights.items():
            labels = tuple(label for _, label in key)
            assert w == pytest.approx(expected[labels], abs=1e-9)

    def test_joint_measurement_erases_a_single_subsystem_record(self):
        s = parse_scenario(
            "subsystem a x y\n"
            "subsystem b x y\n"
            "state 0.6 0 0.8 0\n"
            "measure 1 P a erased x: 1 0 y: 0 1\n"
            "measure 2 Q a,b retained"
            " p1: 1/sqrt(2) 0 0 1/sqrt(2)"
            " p2: 1/sqrt(2) 0 0 -1/sqrt(2)"
            " p3: 0 1/sqrt(2) 1/sqrt(2) 0"
            " p4: 0 1/sqrt(2) -1/sqrt(2) 0\n"
        )
        pd, od, delta = self._delta(s)
        assert delta <= 1e-9
        # amplitudes interfere through the erased record: |0.6<k|xx> + 0.8<k|yx>|^2
        assert pd.probability({"Q": "p1"}) == pytest.approx(0.18, abs=1e-9)
        assert pd.probability({"Q": "p3"}) == pytest.approx(0.32, abs=1e-9)


class TestEngineEquivalence:
    @pytest.mark.parametrize("name", library.builtin_names())
    def test_builtins(self, name):
        s = library.builtin(name)
        pd = paths.distribution(s)
        od = distribution(s)
        for key in set(pd.weights) | set(od.weights):
            assert pd.weights.get(key, 0.0) == pytest.approx(
                od.weights.get(key, 0.0), abs=1e-9
            )

    @pytest.mark.parametrize("seed", range(15))
    def test_random_scenarios(self, seed):
        s = random_scenario(seed + 9000)
        pd = paths.distribution(s)
        od = distribution(s)
        for key in set(pd.weights) | set(od.weights):
            assert pd.weights.get(key, 0.0) == pytest.approx(
                od.weights.get(key, 0.0), abs=1e-9
            )
