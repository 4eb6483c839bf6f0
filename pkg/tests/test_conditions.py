import math

import pytest

from gibbscert.conditions import (
    EPSILON_DEFAULT,
    VERDICT_FAILS,
    VERDICT_HOLDS_TO_DEPTH,
    VERDICT_INCONCLUSIVE,
    ConditionReport,
    InteractionBounds,
    TemperednessCertificate,
    certify_temperedness,
    dobrushin_check,
    explicit_kappa_check,
    main_uniqueness_check,
    phi_class_certificate,
)
from gibbscert.enumeration import (
    GROWTH_LOG,
    Budget,
    growth_power_of_log,
)
from gibbscert.hypergraph import Hypergraph
from tests.conftest import regular_tree_adjacency

PATH3 = {0: (1,), 1: (0, 2), 2: (1,)}
PATH5 = {0: (1,), 1: (0, 2), 2: (1, 3), 3: (2, 4), 4: (3,)}


def closed_form_certificate(abar, growth=GROWTH_LOG):
    return TemperednessCertificate(
        growth=growth, abar=abar, schedule=None, status="closed-form"
    )


class TestInteractionBounds:
    def test_delta_is_log_ratio(self):
        b = InteractionBounds({0: 3.0}, {0: 7.0})
        assert b.delta(0) == math.log(7.0 / 3.0)
        assert b.lower(0) == 3.0 and b.upper(0) == 7.0

    def test_delta_survives_common_rescaling_bit_exactly(self):
        scale = 2.0**-30
        plain = InteractionBounds({0: 3.0, 1: 5.0}, {0: 7.0, 1: 5.0})
        scaled = InteractionBounds(
            {0: 3.0 * scale, 1: 5.0 * scale}, {0: 7.0 * scale, 1: 5.0 * scale}
        )
        assert scaled.delta(0) == plain.delta(0)
        assert scaled.delta(1) == plain.delta(1) == 0.0

    def test_from_deltas_stores_exact_values(self):
        b = InteractionBounds.from_deltas({0: 0.3, 1: 0.0})
        assert b.delta(0) == 0.3
        assert b.delta(1) == 0.0

    def test_from_deltas_rejects_negative(self):
        # surfaces as crossed bounds: exp(d) < 1 for negative d
        with pytest.raises(ValueError, match="edge 0"):
            InteractionBounds.from_deltas({0: -0.1})

    def test_coverage_mismatch_rejected(self):
        with pytest.raises(ValueError, match="same edges"):
            InteractionBounds({0: 1.0}, {0: 2.0, 1: 2.0})

    def test_nonpositive_lower_rejected(self):
        with pytest.raises(ValueError, match="positive"):
            InteractionBounds({0: 0.0}, {0: 1.0})

    def test_crossed_bounds_rejected(self):
        with pytest.raises(ValueError, match="below lower"):
            InteractionBounds({0: 2.0}, {0: 1.0})

    def test_missing(self):
        b = InteractionBounds.from_deltas({0: 0.1, 2: 0.1})
        assert b.missing([0, 1, 2, 3]) == [1, 3]
        assert b.edges() == frozenset({0, 2})


class TestDobrushin:
    def test_chain_supremum_at_shared_vertex(self, triangle_chain):
        bounds = InteractionBounds.from_deltas({0: 0.4, 1: 0.4, 2: 0.4})
        report = dobrushin_check(triangle_chain, bounds)
        # shared vertices sit in two size-3 edges: sum = 2 * 2 * 0.4
        assert report.verdict == VERDICT_HOLDS_TO_DEPTH
        assert report.margin == pytest.approx(2.0 - 1.6)
        assert report.witness["vertex"] == 2
        assert report.passed and report.exit_code == 0

    def test_fails_above_two(self, triangle_chain):
        bounds = InteractionBounds.from_deltas({0: 0.6, 1: 0.6, 2: 0.6})
        report = dobrushin_check(triangle_chain, bounds)
        assert report.verdict == VERDICT_FAILS
        assert report.margin == pytest.approx(2.0 - 2.4)
        assert not report.passed and report.exit_code == 1

    def test_pair_edges_weighted_by_one(self):
        hg = Hypergraph([[0, 1], [1, 2]])
        bounds = InteractionBounds.from_deltas({0: 0.9, 1: 0.8})
        report = dobrushin_check(hg, bounds)
        assert report.flags["supremum"] == pytest.approx(1.7)
        assert report.witness["vertex"] == 1

    def test_missing_bounds_rejected(self, triangle_chain):
        with pytest.raises(ValueError, match="missing for edges"):
            dobrushin_check(triangle_chain, InteractionBounds.from_deltas({0: 0.1}))


class TestCertifyTemperedness:
    def test_path_graph_verified_at_log_two(self):
        cert = certify_temperedness(PATH5, GROWTH_LOG, math.log(2), depth_cap=2)
        assert cert.status == "verified-to-depth"
        assert cert.usable
        assert cert.depth == 2
        assert cert.observed_max == pytest.approx(math.log(2))

    def test_refuted_with_witness_animal(self):
        star = {0: (1, 2, 3, 4), 1: (0,), 2: (0,), 3: (0,), 4: (0,)}
        cert = certify_temperedness(star, GROWTH_LOG, 0.5, depth_cap=1, probes=[0])
        assert cert.status == "refuted"
        assert not cert.usable
        assert cert.witness["animal"] == [0, 1]
        assert cert.witness["average"] == pytest.approx(math.log(4) / 2)

    def test_average_equal_to_bound_is_not_refutation(self):
        cert = certify_temperedness(PATH5, GROWTH_LOG, math.log(2), depth_cap=3)
        assert cert.status == "verified-to-depth"

    def test_budget_exhaustion_is_inconclusive(self):
        adj = regular_tree_adjacency(3, 3)
        cert = certify_temperedness(
            adj, GROWTH_LOG, math.log(3), depth_cap=3, budget=Budget(5)
        )
        assert cert.status == "inconclusive"
        assert not cert.usable
        assert "budget" in cert.note

    def test_mapping_schedule(self):
        cert = certify_temperedness(
            PATH5, GROWTH_LOG, math.log(2), schedule={2: (1, 2)}, probes=[2]
        )
        assert cert.status == "verified-to-depth"
        assert cert.schedule == {2: (1, 2)}

    def test_schedule_validation(self):
        with pytest.raises(ValueError, match="schedule or a depth_cap"):
            certify_temperedness(PATH5, GROWTH_LOG, 1.0)
        with pytest.raises(ValueError, match="strictly increasing"):
            certify_temperedness(PATH5, GROWTH_LOG, 1.0, schedule=[2, 2])
        with pytest.raises(ValueError, match="strictly increasing"):
            certify_temperedness(PATH5, GROWTH_LOG, 1.0, schedule=[0, 1])
        with pytest.raises(ValueError, match="empty"):
            certify_temperedness(PATH5, GROWTH_LOG, 1.0, schedule=[])

    def test_json_dict_hides_unset_observed_max(self):
        cert = TemperednessCertificate(
            growth=GROWTH_LOG, abar=1.0, schedule=None, status="closed-form"
        )
        assert cert.to_json_dict()["observed_max"] is None


class TestPhiClass:
    def test_geometric_series_closed_form(self):
        # log t_k = 2^k makes the terms 2^(-k): partial + tail sums to 2 exactly
        logs = [float(2**k) for k in range(1, 13)]
        result = phi_class_certificate(
            PATH3, growth_power_of_log(2), GROWTH_LOG,
            log_t_sequence=logs, terms=11,
        )
        assert result.tail_closed
        assert result.tail_ratio == pytest.approx(0.5)
        assert result.b_bar == 2.0
        assert result.certificate.status == "closed-form"
        assert result.certificate.abar == 4.0
        assert result.hub_violations == []

    def test_adjacent_hubs_refute(self):
        adj = {
            0: (1, 2, 3, 4), 1: (0, 5, 6, 7),
            2: (0,), 3: (0,), 4: (0,), 5: (1,), 6: (1,), 7: (1,),
        }
        logs = [float(2**k) for k in range(1, 13)]
        result = phi_class_certificate(
            adj, growth_power_of_log(2), GROWTH_LOG,
            log_t_sequence=logs, terms=11,
        )
        assert result.certificate.status == "refuted"
        assert result.hub_violations[0]["pair"] == [0, 1]
        assert result.hub_violations[0]["distance"] == 1
        assert result.hub_violations[0]["required"] == pytest.approx(math.log(4) ** 2)

    def test_degree_one_nodes_are_not_hubs(self):
        # a lone edge has two degree-1 endpoints at distance 1; no hub pair
        adj = {0: (1,), 1: (0,)}
        logs = [float(2**k) for k in range(1, 13)]
        result = phi_class_certificate(
            adj, growth_power_of_log(2), GROWTH_LOG, log_t_sequence=logs, terms=11
        )
        assert result.hub_violations == []

    def test_unsettled_tail_is_inconclusive(self):
        logs = [float(k) for k in range(1, 10)]
        result = phi_class_certificate(
            PATH3, growth_power_of_log(2), GROWTH_LOG, log_t_sequence=logs, terms=8
        )
        assert not result.tail_closed
        assert result.certificate.status == "inconclusive"
        assert not result.certificate.usable

    def test_sequence_argument_validation(self):
        with pytest.raises(ValueError, match="exactly one"):
            phi_class_certificate(PATH3, GROWTH_LOG, GROWTH_LOG)
        with pytest.raises(ValueError, match="exactly one"):
            phi_class_certificate(
                PATH3, GROWTH_LOG, GROWTH_LOG, t_sequence=[1, 2], log_t_sequence=[0, 1]
            )
        with pytest.raises(ValueError, match="strictly increasing"):
            phi_class_certificate(PATH3, GROWTH_LOG, GROWTH_LOG, log_t_sequence=[2.0, 1.0])
        with pytest.raises(ValueError, match="sequence entries"):
            phi_class_certificate(
                PATH3, GROWTH_LOG, GROWTH_LOG, log_t_sequence=[1.0, 2.0], terms=2
            )


class TestMainUniqueness:
    def setup_method(self):
        self.adj = regular_tree_adjacency(3, 3)
        self.cert = certify_temperedness(self.adj, GROWTH_LOG, math.log(3), depth_cap=2)
        assert self.cert.usable

    def constant_bounds(self, delta):
        return InteractionBounds.from_deltas({node: delta for node in self.adj})

    def test_constant_delta_supremum_is_closed_form(self):
        report = main_uniqueness_check(self.adj, self.constant_bounds(0.12), self.cert)
        expected_sup = math.log(math.expm1(0.24))
        assert report.verdict == VERDICT_HOLDS_TO_DEPTH
        assert report.flags["supremum"] == pytest.approx(expected_sup)
        assert report.margin == pytest.approx(-(math.log(3) + EPSILON_DEFAULT) - expected_sup)
        assert report.witness["average"] == pytest.approx(expected_sup)
        assert report.depth == 2

    def test_verdict_flips_across_threshold(self):
        flip = 0.5 * math.log1p(math.exp(-EPSILON_DEFAULT) / 3.0)
        below = main_uniqueness_check(self.adj, self.constant_bounds(flip - 1e-6), self.cert)
        above = main_uniqueness_check(self.adj, self.constant_bounds(flip + 1e-6), self.cert)
        assert below.verdict == VERDICT_HOLDS_TO_DEPTH
        assert above.verdict == VERDICT_FAILS
        assert above.exit_code == 1

    def test_zero_oscillation_always_holds(self):
        report = main_uniqueness_check(self.adj, self.constant_bounds(0.0), self.cert)
        assert report.passed
        assert report.flags["zero_oscillation"]
        assert report.flags["supremum"] == -math.inf

    def test_budget_exhaustion_is_inconclusive(self):
        report = main_uniqueness_check(
            self.adj, self.constant_bounds(0.1), self.cert, budget=Budget(3)
        )
        assert report.verdict == VERDICT_INCONCLUSIVE
        assert report.exit_code == 2
        assert "budget" in report.flags["reason"]

    def test_refuted_certificate_rejected(self):
        refuted = TemperednessCertificate(
            growth=GROWTH_LOG, abar=0.1, schedule=None, status="refuted"
        )
        with pytest.raises(ValueError, match="refuted"):
            main_uniqueness_check(self.adj, self.constant_bounds(0.1), refuted)

    def test_inconclusive_certificate_passes_through(self):
        shaky = TemperednessCertificate(
            growth=GROWTH_LOG, abar=0.1, schedule=None, status="inconclusive"
        )
        report = main_uniqueness_check(self.adj, self.constant_bounds(0.1), shaky)
        assert report.verdict == VERDICT_INCONCLUSIVE

    def test_epsilon_must_be_positive(self):
        with pytest.raises(ValueError, match="positive"):
            main_uniqueness_check(self.adj, self.constant_bounds(0.1), self.cert, epsilon=0.0)

    def test_missing_bounds_rejected(self):
        partial = InteractionBounds.from_deltas({0: 0.1})
        with pytest.raises(ValueError, match="missing"):
            main_uniqueness_check(self.adj, partial, self.cert)

    def test_closed_form_certificate_needs_depth_cap(self):
        cert = closed_form_certificate(math.log(3))
        with pytest.raises(ValueError, match="depth_cap"):
            main_uniqueness_check(self.adj, self.constant_bounds(0.1), cert)
        report = main_uniqueness_check(
            self.adj, self.constant_bounds(0.1), cert, depth_cap=2
        )
        assert report.depth == 2

    def test_patience_cuts_constant_sweeps_short(self):
        # needs a graph where several path sizes fit in one ball; on a tree
        # the count-zero break fires before the patience window can
        k4 = {i: tuple(j for j in range(4) if j != i) for i in range(4)}
        cert = certify_temperedness(k4, GROWTH_LOG, math.log(3), depth_cap=1)
        bounds = InteractionBounds.from_deltas({node: 0.1 for node in k4})
        report = main_uniqueness_check(k4, bounds, cert, patience=1)
        full = main_uniqueness_check(k4, bounds, cert)
        assert report.flags["patience_cutoffs"]
        # constant oscillations make every size equal, so the early stop is safe
        assert report.flags["supremum"] == full.flags["supremum"]
        assert report.verdict == full.verdict


class TestExplicitKappa:
    def test_allowance_by_hand(self):
        adj = {0: (1,), 1: (0,)}
        cert = closed_form_certificate(0.5)
        kappa = math.exp(-7 * 0.5 - 0.1)
        allowance = kappa * (0.5 + 0.0)  # degree 1, log growth
        good = explicit_kappa_check(
            adj, InteractionBounds.from_deltas({0: allowance * 0.9, 1: allowance * 0.9}), cert
        )
        assert good.verdict == VERDICT_HOLDS_TO_DEPTH
        assert good.flags["kappa"] == pytest.approx(kappa)
        assert good.margin == pytest.approx(allowance * 0.1)
        bad = explicit_kappa_check(
            adj, InteractionBounds.from_deltas({0: allowance * 1.1, 1: allowance * 0.9}), cert
        )
        assert bad.verdict == VERDICT_FAILS
        assert bad.witness["edge"] == 0
        assert bad.margin == pytest.approx(-allowance * 0.1)

    def test_isolated_nodes_skipped_with_flag(self):
        adj = {0: (), 1: (2,), 2: (1,)}
        cert = closed_form_certificate(0.5)
        report = explicit_kappa_check(
            adj, InteractionBounds.from_deltas({0: 9.0, 1: 0.001, 2: 0.001}), cert
        )
        assert report.flags["skipped_isolated"] == [0]
        assert {row["edge"] for row in report.flags["per_edge"]} == {1, 2}
        assert report.passed

    def test_epsilon_domain(self):
        adj = {0: (1,), 1: (0,)}
        cert = closed_form_certificate(0.5)
        bounds = InteractionBounds.from_deltas({0: 0.001, 1: 0.001})
        for eps in (0.0, 1.0, -0.2):
            with pytest.raises(ValueError, match="epsilon"):
                explicit_kappa_check(adj, bounds, cert, epsilon=eps)

    def test_unusable_certificate_rejected(self):
        adj = {0: (1,), 1: (0,)}
        bad = TemperednessCertificate(
            growth=GROWTH_LOG, abar=0.5, schedule=None, status="refuted"
        )
        with pytest.raises(ValueError, match="status"):
            explicit_kappa_check(adj, InteractionBounds.from_deltas({0: 0.1, 1: 0.1}), bad)

    def test_kappa_pass_implies_main_condition(self):
        adj = regular_tree_adjacency(3, 3)
        cert = certify_temperedness(adj, GROWTH_LOG, math.log(3), depth_cap=2)
        kappa = math.exp(-7 * math.log(3) - 0.1)
        deltas = {
            node: 0.9 * kappa * (math.log(3) + math.log(max(len(nbrs), 1)))
            for node, nbrs in adj.items()
        }
        bounds = InteractionBounds.from_deltas(deltas)
        kappa_report = explicit_kappa_check(adj, bounds, cert)
        main_report = main_uniqueness_check(adj, bounds, cert)
        assert kappa_report.passed
        assert main_report.passed


class TestReportShape:
    def test_json_dict_keys(self):
        report = ConditionReport(criterion="dobrushin", verdict=VERDICT_FAILS, margin=-0.5)
        data = report.to_json_dict()
        assert data["criterion"] == "dobrushin"
        assert data["verdict"] == "fails"
        assert set(data) == {
            "criterion", "verdict", "margin", "witness", "depth", "budget_used", "flags",
        }
