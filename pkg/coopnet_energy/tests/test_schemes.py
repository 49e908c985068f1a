"""Tests for end-to-end scheme evaluation and the optimizers."""

import math
import unittest
from unittest.mock import patch

from coopnet_energy.exceptions import DegenerateSuccessError, ValidationError
from coopnet_energy.params import Geometry, get_default_params
from coopnet_energy.utils.link_model import (
    SUPPORTED_BITS,
    Modulation,
    cdf_exponential_link,
    link_budget,
)
from coopnet_energy.utils.schemes import (
    SchemeKind,
    SchemeResult,
    evaluate_af,
    evaluate_df,
    evaluate_direct,
    evaluate_scheme,
    gain_crossover_distance,
    optimal_constellation,
    optimal_relay_position,
    single_transmission_energy,
    state_powers,
    state_probabilities,
)

COOPERATIVE = (SchemeKind.AF_NON_MRC, SchemeKind.AF_MRC, SchemeKind.DF_NON_MRC, SchemeKind.DF_MRC)
GRID_DISTANCES = [float(d) for d in range(5, 105, 5)]


def _fake_result(b: int, e_bit: float) -> SchemeResult:
    """SchemeResult carrying only a constellation and a bit energy."""
    return SchemeResult(
        kind=SchemeKind.AF_MRC, b=b, p_success=0.9, p_avg=1.0, e_bit=e_bit,
        gain=1.0, gamma_th=1.0, t_on=1.0, alpha=0.0, e_direct=e_bit,
    )


class TestSchemeKind(unittest.TestCase):
    """Test suite for scheme names."""

    def test_parse_values_and_aliases(self):
        """Test values, long names and CamelCase aliases resolve."""
        self.assertIs(SchemeKind.parse("af_mrc"), SchemeKind.AF_MRC)
        self.assertIs(SchemeKind.parse("AfNonMrc"), SchemeKind.AF_NON_MRC)
        self.assertIs(SchemeKind.parse("df_non_mrc"), SchemeKind.DF_NON_MRC)
        self.assertIs(SchemeKind.parse("DF-MRC"), SchemeKind.DF_MRC)
        self.assertIs(SchemeKind.parse(" direct "), SchemeKind.DIRECT)

    def test_parse_member_passes_through(self):
        """Test parsing an existing member returns it unchanged."""
        for kind in SchemeKind:
            self.assertIs(SchemeKind.parse(kind), kind)

    def test_parse_unknown(self):
        """Test an unknown scheme name is rejected."""
        with self.assertRaises(ValidationError):
            SchemeKind.parse("cf")

    def test_flags(self):
        """Test the cooperative and MRC flags."""
        self.assertFalse(SchemeKind.DIRECT.is_cooperative)
        self.assertTrue(SchemeKind.DF_NON_MRC.is_cooperative)
        self.assertTrue(SchemeKind.AF_MRC.uses_mrc)
        self.assertFalse(SchemeKind.AF_NON_MRC.uses_mrc)


class TestDirect(unittest.TestCase):
    """Test suite for direct transmission."""

    def setUp(self):
        self.params = get_default_params()

    def test_reference_point(self):
        """Test 4-QAM at 50 m: success probability and bit energy."""
        result = evaluate_direct(self.params, Geometry(50.0), Modulation(2))

        self.assertAlmostEqual(result.p_success, 0.99724, delta=1e-5)
        self.assertAlmostEqual(result.e_bit, 2.489e-5, delta=1e-8)
        self.assertEqual(result.gain, 1.0)
        self.assertEqual(result.e_direct, result.e_bit)

    def test_short_link_limit(self):
        """Test the bit energy tends to the single-attempt energy as the link shortens."""
        result = evaluate_direct(self.params, Geometry(1e-3), Modulation(4))

        self.assertAlmostEqual(result.p_success, 1.0, places=15)
        self.assertAlmostEqual(
            result.e_bit / single_transmission_energy(self.params, Modulation(4)), 1.0, places=12
        )

    def test_direct_power(self):
        """Test direct power (1 + alpha) P_t + P_ct + P_cr."""
        result = evaluate_direct(self.params, Geometry(30.0), Modulation(2))
        expected = (1 + result.alpha) * self.params.p_t + self.params.p_ct + self.params.p_cr

        self.assertAlmostEqual(result.p_avg, expected, places=15)

    def test_degenerate_link(self):
        """Test an unreachable destination raises DegenerateSuccessError."""
        with self.assertRaises(DegenerateSuccessError):
            evaluate_direct(self.params, Geometry(1e5), Modulation(10))


class TestCooperativeSchemes(unittest.TestCase):
    """Test suite for AF and DF evaluation."""

    def setUp(self):
        self.params = get_default_params()

    def test_bit_energy_reconstructs_from_fields(self):
        """Test e_bit equals (p_avg T_on + P_tr T_tr) / (L p_success) exactly."""
        p = self.params
        for kind in SchemeKind:
            for b in SUPPORTED_BITS:
                for d in (10.0, 45.0, 90.0):
                    r = evaluate_scheme(p, Geometry(d, 0.35), Modulation(b), kind)
                    rebuilt = (r.p_avg * r.t_on + p.p_tr * p.t_tr) / (p.l_bits * r.p_success)
                    self.assertEqual(r.e_bit, rebuilt, f"{kind} b={b} d={d}")
                    self.assertGreater(r.p_success, 0)
                    self.assertLessEqual(r.p_success, 1)

    def test_af_average_power(self):
        """Test AF power weights one-slot and two-slot rounds by the S-D outage."""
        geom, mod = Geometry(60.0), Modulation(6)
        result = evaluate_af(self.params, geom, mod, mrc=False)
        powers = state_powers(self.params, result.alpha)
        outage = cdf_exponential_link(result.gamma_th, self.params, geom.d_sd)

        expected = powers.single_slot * (1 - outage) + powers.two_slot * outage
        self.assertAlmostEqual(result.p_avg, expected, places=14)
        self.assertEqual(evaluate_af(self.params, geom, mod, mrc=True).p_avg, result.p_avg)

    def test_state_powers(self):
        """Test the listening relay and relay transmission appear in the round powers."""
        p = self.params
        powers = state_powers(p, 2.0)

        self.assertAlmostEqual(powers.direct, 3 * p.p_t + p.p_ct + p.p_cr, places=15)
        self.assertAlmostEqual(powers.single_slot, 3 * p.p_t + p.p_ct + 2 * p.p_cr, places=15)
        self.assertAlmostEqual(powers.two_slot, 6 * p.p_t + 2 * p.p_ct + 3 * p.p_cr, places=15)

    def test_mrc_dominates(self):
        """Test MRC never costs more energy than its non-MRC counterpart."""
        for model in ("joint", "product"):
            for b in SUPPORTED_BITS:
                for d in (25.0, 50.0, 100.0):
                    geom, mod = Geometry(d), Modulation(b)
                    af = evaluate_af(self.params, geom, mod, mrc=False, outage_model=model)
                    af_mrc = evaluate_af(self.params, geom, mod, mrc=True, outage_model=model)
                    df = evaluate_df(self.params, geom, mod, mrc=False, outage_model=model)
                    df_mrc = evaluate_df(self.params, geom, mod, mrc=True, outage_model=model)

                    label = f"{model} b={b} d={d}"
                    self.assertGreaterEqual(af_mrc.p_success, af.p_success, label)
                    self.assertLessEqual(af_mrc.e_bit, af.e_bit, label)
                    self.assertGreaterEqual(df_mrc.p_success, df.p_success, label)
                    self.assertLessEqual(df_mrc.e_bit, df.e_bit, label)

    def test_joint_model_below_product_model(self):
        """Test the joint MRC outage is no larger than the product of the branch outages."""
        geom, mod = Geometry(100.0), Modulation(10)
        for mrc_eval in (evaluate_af, evaluate_df):
            joint = mrc_eval(self.params, geom, mod, mrc=True, outage_model="joint")
            product = mrc_eval(self.params, geom, mod, mrc=True, outage_model="product")
            self.assertGreaterEqual(joint.p_success, product.p_success)

    def test_outage_model_ignored_without_mrc(self):
        """Test non-MRC schemes give identical results under both outage models."""
        geom, mod = Geometry(70.0, 0.4), Modulation(8)
        for mrc_eval in (evaluate_af, evaluate_df):
            self.assertEqual(
                mrc_eval(self.params, geom, mod, mrc=False, outage_model="joint"),
                mrc_eval(self.params, geom, mod, mrc=False, outage_model="product"),
            )

    def test_af_reflection_symmetry(self):
        """Test AF gain is unchanged when the relay is mirrored about the midpoint."""
        mod = Modulation(10)
        for kind in (SchemeKind.AF_NON_MRC, SchemeKind.AF_MRC):
            for t in (0.1, 0.2, 0.3, 0.4):
                geom = Geometry(100.0, t)
                near = evaluate_scheme(self.params, geom, mod, kind).gain
                far = evaluate_scheme(self.params, geom.reflected(), mod, kind).gain
                self.assertLess(abs(near - far) / near, 1e-12, f"{kind} t={t}")

    def test_df_states_partition(self):
        """Test the four DF states sum to one and reproduce the DF success probability."""
        geom, mod = Geometry(80.0, 0.3), Modulation(8)
        states = state_probabilities(self.params, geom, mod)
        result = evaluate_df(self.params, geom, mod, mrc=False)

        self.assertAlmostEqual(sum(states.values()), 1.0, places=15)
        self.assertAlmostEqual(result.p_success, states["direct_success"] + states["relay_success"], places=15)

    def test_df_perfect_source_relay_limit(self):
        """Test DF with the relay at the source reduces to direct plus one R-D attempt."""
        mod = Modulation(10)
        geom = Geometry(100.0, 1e-6)
        gamma_th = link_budget(self.params, mod).gamma_th
        sd_fail = cdf_exponential_link(gamma_th, self.params, 100.0)

        expected = (1 - sd_fail) + sd_fail * (1 - sd_fail)
        self.assertAlmostEqual(evaluate_df(self.params, geom, mod, mrc=False).p_success, expected, delta=1e-5)

    def test_bit_energy_nondecreasing_in_distance(self):
        """Test bit energy never falls as the S-D distance grows."""
        for kind in SchemeKind:
            for b in SUPPORTED_BITS:
                energies = [evaluate_scheme(self.params, Geometry(d), Modulation(b), kind).e_bit for d in GRID_DISTANCES]
                self.assertEqual(energies, sorted(energies), f"{kind} b={b}")

    def test_direct_gain_is_one(self):
        """Test the direct scheme always reports unit gain."""
        for d in (5.0, 50.0, 100.0):
            self.assertEqual(evaluate_scheme(self.params, Geometry(d), Modulation(6), "direct").gain, 1.0)

    def test_cooperative_gain_ratio(self):
        """Test gain = E_direct / e_bit."""
        result = evaluate_scheme(self.params, Geometry(75.0), Modulation(8), SchemeKind.DF_MRC)
        direct = evaluate_direct(self.params, Geometry(75.0), Modulation(8))

        self.assertEqual(result.e_direct, direct.e_bit)
        self.assertAlmostEqual(result.gain, direct.e_bit / result.e_bit, places=15)

    def test_relaying_survives_degenerate_direct_link(self):
        """Test relaying past the direct link's range reports unbounded gain instead of failing."""
        geom, mod = Geometry(180.0), Modulation(10)
        with self.assertRaises(DegenerateSuccessError):
            evaluate_direct(self.params, geom, mod)

        for kind in COOPERATIVE:
            result = evaluate_scheme(self.params, geom, mod, kind)

            self.assertGreater(result.p_success, 1e-12, kind)
            self.assertTrue(math.isfinite(result.e_bit), kind)
            self.assertTrue(math.isinf(result.e_direct), kind)
            self.assertTrue(math.isinf(result.gain), kind)

    def test_relaying_degenerates_on_its_own_success(self):
        """Test a cooperative scheme still raises once its own success probability vanishes."""
        with self.assertRaisesRegex(DegenerateSuccessError, "below"):
            evaluate_scheme(self.params, Geometry(1e5), Modulation(10), SchemeKind.DF_MRC)


class TestOptimizers(unittest.TestCase):
    """Test suite for the constellation, relay position and crossover searches."""

    def setUp(self):
        self.params = get_default_params()

    def test_short_link_prefers_largest_constellation(self):
        """Test every cooperative scheme picks b = 10 at 5 m."""
        for kind in COOPERATIVE:
            b_star, result = optimal_constellation(self.params, Geometry(5.0), kind)
            self.assertEqual(b_star, 10, kind)
            self.assertEqual(result.b, 10)

    def test_single_candidate(self):
        """Test a one-element candidate list returns that element."""
        b_star, _ = optimal_constellation(self.params, Geometry(50.0), SchemeKind.AF_MRC, candidates=[4])

        self.assertEqual(b_star, 4)

    def test_empty_candidates_rejected(self):
        """Test an empty candidate list is rejected."""
        with self.assertRaises(ValidationError):
            optimal_constellation(self.params, Geometry(50.0), SchemeKind.AF_MRC, candidates=[])

    @patch("coopnet_energy.utils.schemes.evaluate_scheme")
    def test_ties_go_to_larger_constellation(self, mock_evaluate):
        """Test equal bit energies resolve to the larger b."""
        mock_evaluate.side_effect = lambda params, geom, mod, kind, model: _fake_result(mod.b, 1e-6)

        b_star, _ = optimal_constellation(self.params, Geometry(50.0), SchemeKind.AF_MRC)

        self.assertEqual(b_star, 10)

    @patch("coopnet_energy.utils.schemes.evaluate_scheme")
    def test_argmin_invariant_to_scaling(self, mock_evaluate):
        """Test scaling every bit energy by a constant keeps the argmin."""
        energies = {2: 5.0, 4: 3.0, 6: 2.0, 8: 2.5, 10: 4.0}

        for scale in (1.0, 7.3e-9):
            mock_evaluate.side_effect = (
                lambda params, geom, mod, kind, model, s=scale: _fake_result(mod.b, s * energies[mod.b])
            )
            b_star, _ = optimal_constellation(self.params, Geometry(50.0), SchemeKind.AF_MRC)
            self.assertEqual(b_star, 6)

    @patch("coopnet_energy.utils.schemes.evaluate_scheme")
    def test_degenerate_candidates_skipped(self, mock_evaluate):
        """Test degenerate candidates are skipped with a warning."""
        def evaluate(params, geom, mod, kind, model):
            if mod.b >= 8:
                raise DegenerateSuccessError("no success")
            return _fake_result(mod.b, float(10 - mod.b))

        mock_evaluate.side_effect = evaluate

        with self.assertLogs("coopnet_energy.utils.schemes", level="WARNING") as logs:
            b_star, _ = optimal_constellation(self.params, Geometry(50.0), SchemeKind.AF_MRC)

        self.assertEqual(b_star, 6)
        self.assertEqual(len(logs.output), 2)

    @patch("coopnet_energy.utils.schemes.evaluate_scheme")
    def test_all_candidates_degenerate(self, mock_evaluate):
        """Test DegenerateSuccessError when no candidate is usable."""
        mock_evaluate.side_effect = DegenerateSuccessError("no success")

        with self.assertLogs("coopnet_energy.utils.schemes", level="WARNING"):
            with self.assertRaises(DegenerateSuccessError):
                optimal_constellation(self.params, Geometry(50.0), SchemeKind.AF_MRC)

    def test_unreachable_destination_raises_degenerate(self):
        """Test every constellation failing at an unreachable distance raises DegenerateSuccessError."""
        with self.assertLogs("coopnet_energy.utils.schemes", level="WARNING") as logs:
            with self.assertRaisesRegex(DegenerateSuccessError, "df_mrc"):
                optimal_constellation(self.params, Geometry(1e5), SchemeKind.DF_MRC)

        self.assertEqual(len(logs.output), len(SUPPORTED_BITS))

    def test_relay_midpoint_is_best_for_af(self):
        """Test the AF gain peaks with the relay in the middle at 100 m."""
        t_star, result = optimal_relay_position(self.params, 100.0, Modulation(10), SchemeKind.AF_MRC)

        self.assertEqual(t_star, 0.5)
        self.assertGreater(result.gain, 1.0)

    def test_crossover_distance_none_when_never_beneficial(self):
        """Test no crossover is reported for 4-QAM DF over 20..100 m."""
        distances = [float(d) for d in range(20, 105, 5)]

        self.assertIsNone(gain_crossover_distance(self.params, Modulation(2), SchemeKind.DF_NON_MRC, distances))

    def test_crossover_distance_found(self):
        """Test the crossover is the first grid distance with gain >= 1."""
        distances = [100.0, 20.0, 60.0, 40.0, 80.0]
        crossover = gain_crossover_distance(self.params, Modulation(10), SchemeKind.AF_MRC, distances)

        self.assertIsNotNone(crossover)
        gain = evaluate_scheme(self.params, Geometry(crossover), Modulation(10), SchemeKind.AF_MRC).gain
        self.assertGreaterEqual(gain, 1.0)
        for d in sorted(distances):
            if d >= crossover:
                break
            self.assertLess(evaluate_scheme(self.params, Geometry(d), Modulation(10), SchemeKind.AF_MRC).gain, 1.0)


if __name__ == "__main__":
    unittest.main()
