import numpy as np
import pytest

from qchlab import algebra as alg, channel as ch, matkernel as mk
from qchlab.causal import CausalGraph
from qchlab.errors import CKRelationsError, DegenerateSplitError

from conftest import H, I2, S2, X, Z, dephasing, unit

import oracles


def single_edge_graph():
    return CausalGraph(vertices=(("x", 1), ("y", 1)), edges=(("e", "x", "y"),))


def single_edge_family():
    return alg.ck_family_with_canonical_projections(
        single_edge_graph(), {"e": unit(2, 1, 0)}
    )


def dephasing_graph_channels():
    g = CausalGraph(vertices=(("x", 2), ("y", 2)), edges=(("e", "x", "y"),))
    return g, {"e": dephasing()}


def chain_graph_channels():
    g = CausalGraph(
        vertices=(("a", 2), ("b", 2), ("c", 2)),
        edges=(("e1", "a", "b"), ("e2", "b", "c")),
    )
    return g, {"e1": ch.unitary_channel(H), "e2": dephasing()}


def planted_graph_channels():
    """Graph whose generated algebra is M2 ⊗ 1_3 ⊕ M1 inside M7."""
    g = CausalGraph(vertices=(("x", 6), ("y", 1)), edges=(("loop", "x", "x"),))
    phi = ch.make_channel([np.kron(X, np.eye(3)), np.kron(Z, np.eye(3))])
    return g, {"loop": phi}


class TestCKRelations:
    def test_single_edge_passes_exactly(self):
        rep = alg.check_ck_family(single_edge_family())
        assert rep.passed
        assert all(c.residual == 0.0 for c in rep.checks)

    def test_scaled_isometry_fails_with_residual_three(self):
        fam = alg.ck_family_with_canonical_projections(
            single_edge_graph(), {"e": 2.0 * unit(2, 1, 0)}
        )
        rep = alg.check_ck_family(fam)
        assert not rep.passed
        initial = [c for c in rep.checks if c.name == "ck:e:initial"][0]
        assert abs(initial.residual - 3.0) < 1e-12

    def test_two_edges_into_one_vertex_flagged_by_orthogonal_ranges(self):
        g = CausalGraph(
            vertices=(("x", 1), ("w", 1), ("y", 1)),
            edges=(("e", "x", "y"), ("f", "w", "y")),
        )
        s_e = unit(3, 2, 0)
        s_f = unit(3, 2, 1)
        fam = alg.ck_family_with_canonical_projections(g, {"e": s_e, "f": s_f})
        # each edge passes the relations on its own
        assert alg.check_ck_family(fam).passed
        rep = alg.check_ck_family(fam, orthogonal_ranges=True)
        assert not rep.passed
        flagged = [c for c in rep.failures() if "orthogonal-ranges" in c.name]
        assert flagged and abs(flagged[0].residual - 1.0) < 1e-12

    def test_wrong_projection_rejected(self):
        with pytest.raises(CKRelationsError):
            alg.CKFamily(
                graph=single_edge_graph(),
                projections={"x": unit(2, 1, 1), "y": unit(2, 0, 0)},
                isometries={"e": unit(2, 1, 0)},
            )


class TestCKToChannels:
    def test_single_edge_identity(self):
        out = alg.ck_to_channels(single_edge_family())
        phi = out["e"]
        assert phi.in_dim == 1 and phi.out_dim == 1
        assert np.allclose(phi.kraus[0], [[1.0]])

    def test_hadamard_block_is_unitary_map(self):
        g = CausalGraph(vertices=(("x", 2), ("y", 2)), edges=(("e", "x", "y"),))
        s = np.zeros((4, 4), dtype=complex)
        s[2:, :2] = H
        fam = alg.ck_family_with_canonical_projections(g, {"e": s})
        out = alg.ck_to_channels(fam)
        phi = out["e"]
        assert ch.is_trace_preserving(phi)
        assert ch.is_unital(phi)
        assert ch.choi_distance(phi, ch.unitary_channel(H)) < 1e-12

    def test_strict_range_gives_tp_not_unital(self):
        # Isometry from a 1-dim space into a 2-dim space: SS† < P_target.
        g = CausalGraph(vertices=(("x", 1), ("y", 2)), edges=(("e", "x", "y"),))
        s = np.zeros((3, 3), dtype=complex)
        s[1, 0] = 1.0
        fam = alg.ck_family_with_canonical_projections(g, {"e": s})
        assert alg.check_ck_family(fam).passed
        phi = alg.ck_to_channels(fam)["e"]
        assert ch.is_trace_preserving(phi)
        assert not ch.is_unital(phi)

    def test_failing_family_rejected(self):
        fam = alg.ck_family_with_canonical_projections(
            single_edge_graph(), {"e": 2.0 * unit(2, 1, 0)}
        )
        with pytest.raises(CKRelationsError):
            alg.ck_to_channels(fam)

    def test_unitary_cp_invariant_per_edge(self):
        # (‡) with SS† = P_target makes every converted channel a unitary map.
        g = CausalGraph(vertices=(("x", 2), ("y", 2)), edges=(("e", "x", "y"),))
        s = np.zeros((4, 4), dtype=complex)
        s[2:, :2] = H
        fam = alg.ck_family_with_canonical_projections(g, {"e": s})
        for phi in alg.ck_to_channels(fam).values():
            k = phi.kraus[0]
            assert len(phi.kraus) == 1
            assert np.linalg.norm(k.conj().T @ k - np.eye(phi.in_dim)) < 1e-8
            assert ch.is_completely_positive(ch.choi(phi))
            assert ch.is_trace_preserving(phi)
            assert ch.is_unital(phi)


class TestGenerateAlgebra:
    def test_no_edges_diagonal_algebra(self):
        a = alg.generate_algebra(single_edge_graph(), {})
        assert a.dim == 2

    def test_single_edge_generates_full_m2(self):
        channels = alg.ck_to_channels(single_edge_family())
        a = alg.generate_algebra(single_edge_graph(), channels)
        assert a.dim == 4
        assert a.iterations <= 4

    def test_dephasing_edge_matches_word_oracle(self):
        g, channels = dephasing_graph_channels()
        a = alg.generate_algebra(g, channels)
        gens = alg.embedded_generators(g, channels)
        d = g.total_dim()
        assert a.dim == oracles.word_span_dim(gens, 2 * d * d)

    def test_chain_matches_word_oracle(self):
        g, channels = chain_graph_channels()
        a = alg.generate_algebra(g, channels)
        gens = alg.embedded_generators(g, channels)
        d = g.total_dim()
        assert a.dim == oracles.word_span_dim(gens, 2 * d * d)

    def test_closure_properties(self):
        g, channels = chain_graph_channels()
        a = alg.generate_algebra(g, channels)
        prod_res, adj_res = alg.closure_residuals(a)
        assert prod_res < 1e-8
        assert adj_res < 1e-8

    def test_dimension_bound(self):
        for g, channels in (
            dephasing_graph_channels(),
            chain_graph_channels(),
            planted_graph_channels(),
        ):
            a = alg.generate_algebra(g, channels)
            total = g.total_dim()
            assert a.dim <= total * total
            assert a.iterations <= total * total

    def test_monotone_in_generators(self):
        g, channels = chain_graph_channels()
        small = alg.generate_algebra(g, {"e1": channels["e1"]})
        big = alg.generate_algebra(g, channels)
        assert mk.containment_residual(small.span, big.span) < 1e-8


class TestBlockDecomposition:
    def test_full_m2(self):
        channels = alg.ck_to_channels(single_edge_family())
        a = alg.generate_algebra(single_edge_graph(), channels)
        assert alg.block_decomposition(a) == [(2, 1)]

    def test_diagonal_algebra(self):
        a = alg.generate_algebra(single_edge_graph(), {})
        assert alg.block_decomposition(a) == [(1, 1), (1, 1)]

    def test_planted_blocks_recovered_exactly(self):
        g, channels = planted_graph_channels()
        a = alg.generate_algebra(g, channels)
        assert a.dim == 5
        assert alg.block_decomposition(a) == [(2, 3), (1, 1)]

    def test_wedderburn_identities(self):
        for g, channels in (
            dephasing_graph_channels(),
            chain_graph_channels(),
            planted_graph_channels(),
        ):
            a = alg.generate_algebra(g, channels)
            blocks = alg.block_decomposition(a)
            assert sum(n * n for n, _ in blocks) == a.dim
            assert sum(n * m for n, m in blocks) <= g.total_dim()

    def test_commutant_of_full_matrix_algebra_is_scalars(self):
        channels = alg.ck_to_channels(single_edge_family())
        a = alg.generate_algebra(single_edge_graph(), channels)
        comm = alg.commutant(a.span)
        assert comm.dim == 1
        assert comm.contains(np.eye(2, dtype=complex))

    def test_center_dimension_counts_blocks(self):
        g, channels = planted_graph_channels()
        a = alg.generate_algebra(g, channels)
        assert alg.center(a.span).dim == 2

    def test_deterministic_given_seed(self):
        g, channels = chain_graph_channels()
        a = alg.generate_algebra(g, channels)
        assert alg.block_decomposition(a, seed=0) == alg.block_decomposition(a, seed=0)


class TestKrausChoiceInvariance:
    def test_identity_mixing_trivially_equal(self):
        g, channels = dephasing_graph_channels()
        base = alg.generate_algebra(g, channels)
        mixed = {eid: alg.mix_kraus(phi, np.eye(len(phi.kraus), dtype=complex)) for eid, phi in channels.items()}
        again = alg.generate_algebra(g, mixed)
        assert again.dim == base.dim
        assert mk.containment_residual(base.span, again.span) < 1e-12

    def test_zero_padding_preserves_span(self):
        g, channels = dephasing_graph_channels()
        base = alg.generate_algebra(g, channels)
        phi = channels["e"]
        padded = ch.KrausChannel(
            in_dim=2,
            out_dim=2,
            kraus=tuple(phi.kraus) + (np.zeros((2, 2), dtype=complex),),
        )
        again = alg.generate_algebra(g, {"e": padded})
        assert again.dim == base.dim
        assert mk.containment_residual(base.span, again.span) < 1e-12

    def test_random_mixings(self):
        g, channels = chain_graph_channels()
        rep = alg.kraus_choice_invariance(g, channels, trials=8, seed=5)
        assert rep.passed
        assert rep.data["worst_residual"] < 1e-8

    def test_report_deterministic(self):
        g, channels = dephasing_graph_channels()
        a = alg.kraus_choice_invariance(g, channels, trials=3, seed=1)
        b = alg.kraus_choice_invariance(g, channels, trials=3, seed=1)
        assert [c.residual for c in a.checks] == [c.residual for c in b.checks]


class TestAFFiltration:
    def test_projections_only_prefix(self):
        g, channels = chain_graph_channels()
        rep = alg.af_filtration_check(g, channels)
        assert rep.passed
        assert rep.data["dims"][0] == 3  # one dimension per vertex projection

    def test_single_edge_dimension_jump(self):
        channels = alg.ck_to_channels(single_edge_family())
        rep = alg.af_filtration_check(single_edge_graph(), channels)
        assert rep.data["dims"] == [2, 4]

    def test_monotone_nested(self):
        g, channels = chain_graph_channels()
        rep = alg.af_filtration_check(g, channels)
        dims = rep.data["dims"]
        assert dims == sorted(dims)
        assert all(c.passed for c in rep.checks if "contains-previous" in c.name)


def test_haar_unitary_is_unitary(rng):
    for n in (1, 2, 3, 5):
        u = alg.haar_unitary(rng, n)
        assert np.linalg.norm(u.conj().T @ u - np.eye(n)) < 1e-12


def test_ck_json_roundtrip():
    fam = single_edge_family()
    again = alg.ck_family_from_json(alg.ck_family_to_json(fam))
    assert again.graph == fam.graph
    assert np.array_equal(
        mk.as_matrix(again.isometries["e"]), mk.as_matrix(fam.isometries["e"])
    )


def test_algebra_input_json_roundtrip():
    g, channels = dephasing_graph_channels()
    g2, channels2 = alg.algebra_input_from_json(alg.algebra_input_to_json(g, channels))
    assert g2 == g
    assert ch.choi_distance(channels2["e"], channels["e"]) == 0.0
