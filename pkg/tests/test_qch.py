import dataclasses

import numpy as np
import pytest

from qchlab import causal, channel as ch, matkernel as mk, qch
from qchlab.causal import CausalGraph
from qchlab.errors import (
    CyclicGraphError,
    InvalidInstanceError,
    MissingEdgeError,
    NotUnitaryError,
)
from qchlab.report import canonical_json

from conftest import CNOT, H, I2, S2, SWAP, X, Z, bitflip_mix, dephasing, unit


def pair_graph():
    """Two spacelike inputs a, b wired to two outputs c, d by all four edges."""
    return CausalGraph(
        vertices=(("a", 2), ("b", 2), ("c", 2), ("d", 2)),
        edges=(
            ("ac", "a", "c"),
            ("ad", "a", "d"),
            ("bc", "b", "c"),
            ("bd", "b", "d"),
        ),
    )


def cnot_instance():
    """The complete pair carrying CNOT (control a -> c, target b -> d) with the
    four channel-mode reduced edge maps."""
    g = pair_graph()
    u = ch.unitary_channel(CNOT)
    facs_in = [("a", 2), ("b", 2)]
    facs_out = [("c", 2), ("d", 2)]
    maps = {}
    for eid, src, dst in g.edges:
        maps[eid] = ch.reduce_map(u, facs_in, facs_out, src, dst, mode="channel")
    return qch.QCHInstance(
        graph=g,
        edge_maps=maps,
        complete_pairs=(qch.CompletePair(xi=("a", "b"), zeta=("c", "d"), unitary=CNOT),),
    )


def swap_instance():
    g = pair_graph()
    u = ch.unitary_channel(SWAP)
    facs_in = [("a", 2), ("b", 2)]
    facs_out = [("c", 2), ("d", 2)]
    maps = {}
    for eid, src, dst in g.edges:
        maps[eid] = ch.reduce_map(u, facs_in, facs_out, src, dst, mode="channel")
    return qch.QCHInstance(
        graph=g,
        edge_maps=maps,
        complete_pairs=(qch.CompletePair(xi=("a", "b"), zeta=("c", "d"), unitary=SWAP),),
    )


class TestValidate:
    def test_good_instance_passes(self):
        rep = qch.validate_qch(cnot_instance())
        assert rep.passed
        assert rep.max_residual < 1e-10

    def test_dimension_mismatch_flagged_as_domain_failure(self):
        g = CausalGraph(vertices=(("x", 2), ("y", 3)), edges=(("e", "x", "y"),))
        inst = qch.QCHInstance(graph=g, edge_maps={"e": ch.identity_channel(2)})
        rep = qch.validate_qch(inst)
        assert not rep.passed
        bad = rep.failures()
        assert bad and bad[0].code == "E_DOMAIN"

    def test_non_tp_edge_reports_residual(self):
        g = CausalGraph(vertices=(("x", 2), ("y", 2)), edges=(("e", "x", "y"),))
        inst = qch.QCHInstance(graph=g, edge_maps={"e": ch.make_channel([unit(2, 0, 0)])})
        rep = qch.validate_qch(inst)
        tp = [c for c in rep.checks if c.name == "edge:e:tp"][0]
        assert not tp.passed
        assert abs(tp.residual - 1.0) < 1e-12  # ||E11 - I||_F

    def test_cyclic_graph_raises(self):
        g = CausalGraph(
            vertices=(("u", 2), ("v", 2)),
            edges=(("uv", "u", "v"), ("vu", "v", "u")),
        )
        inst = qch.QCHInstance(
            graph=g,
            edge_maps={"uv": ch.identity_channel(2), "vu": ch.identity_channel(2)},
        )
        with pytest.raises(CyclicGraphError):
            qch.validate_qch(inst)

    def test_bad_pair_unitary_flagged(self):
        inst = cnot_instance()
        bad = dataclasses.replace(
            inst,
            complete_pairs=(
                qch.CompletePair(xi=("a", "b"), zeta=("c", "d"), unitary=1.1 * CNOT),
            ),
        )
        rep = qch.validate_qch(bad)
        assert not rep.passed

    def test_axiom_checks_require_valid_instance(self):
        g = CausalGraph(vertices=(("x", 2), ("y", 2)), edges=(("e", "x", "y"),))
        inst = qch.QCHInstance(graph=g, edge_maps={"e": ch.make_channel([unit(2, 0, 0)])})
        with pytest.raises(InvalidInstanceError):
            qch.check_extension(inst)


class TestSynthesize:
    def test_identity_singleton_pair(self):
        g = CausalGraph(vertices=(("x", 2), ("y", 2)), edges=(("e", "x", "y"),))
        inst = qch.QCHInstance(
            graph=g,
            edge_maps={"e": ch.identity_channel(2)},
            complete_pairs=(qch.CompletePair(xi=("x",), zeta=("y",), unitary=I2),),
        )
        maps = qch.synthesize_pair_maps(inst, 0)
        assert ch.choi_distance(maps.future["x"], ch.identity_channel(2)) < 1e-12
        assert ch.choi_distance(maps.past["y"], ch.identity_channel(2)) < 1e-12

    def test_cnot_pair_images_commute(self):
        maps = qch.synthesize_pair_maps(cnot_instance(), 0)
        fa, fb = maps.future["a"], maps.future["b"]
        worst = 0.0
        for i in range(2):
            for j in range(2):
                ma = ch.apply(fa, unit(2, i, j))
                for k in range(2):
                    for l in range(2):
                        mb = ch.apply(fb, unit(2, k, l))
                        worst = max(worst, np.linalg.norm(ma @ mb - mb @ ma))
        assert worst < 1e-10

    def test_synthesized_future_is_unital_homomorphism(self):
        maps = qch.synthesize_pair_maps(cnot_instance(), 0)
        for phi in maps.future.values():
            assert qch.star_homomorphism_residual(phi, 2) < 1e-10
            assert ch.unital_residual(phi) < 1e-10  # dual is trace preserving

    def test_synthesized_past_is_tp_with_hom_dual(self):
        maps = qch.synthesize_pair_maps(cnot_instance(), 0)
        for phi in maps.past.values():
            assert ch.tp_residual(phi) < 1e-10
            assert qch.star_homomorphism_residual(ch.dual(phi), 2) < 1e-10

    def test_non_unitary_rejected(self):
        inst = cnot_instance()
        bad = dataclasses.replace(
            inst,
            complete_pairs=(
                qch.CompletePair(
                    xi=("a", "b"), zeta=("c", "d"), unitary=CNOT + 0.05 * np.eye(4)
                ),
            ),
        )
        with pytest.raises(NotUnitaryError):
            qch.synthesize_pair_maps(bad, 0)


class TestStarHomomorphism:
    def test_embedding_is_homomorphism(self):
        isos = ch.embedding_isometries([("x", 2), ("w", 3)], {"x"})
        phi = ch.KrausChannel(in_dim=2, out_dim=6, kraus=tuple(isos))
        assert qch.is_star_homomorphism(phi, 2)

    def test_unitary_conjugation_is_homomorphism(self):
        assert qch.is_star_homomorphism(ch.unitary_channel(H), 2)

    def test_amplitude_damping_is_not(self):
        from conftest import amplitude_damping

        assert not qch.is_star_homomorphism(amplitude_damping(0.5), 2)

    def test_works_on_superoperators(self):
        s = ch.choi(ch.unitary_channel(H))
        assert qch.is_star_homomorphism(s, 2)


class TestExtension:
    def test_cnot_pair_passes(self):
        rep = qch.check_extension(cnot_instance())
        assert rep.passed
        assert rep.max_residual < 1e-10
        assert rep.data["checked_futures"] == 2
        assert rep.data["checked_pasts"] == 2

    def test_vacuous_when_nothing_declared(self):
        g = CausalGraph(vertices=(("x", 2), ("y", 2)), edges=(("e", "x", "y"),))
        inst = qch.QCHInstance(graph=g, edge_maps={"e": dephasing()})
        rep = qch.check_extension(inst)
        assert rep.passed
        assert len(rep.checks) == 0

    def test_perturbed_edge_fails_in_band(self):
        inst = cnot_instance()
        eps = 1e-3
        orig = inst.edge_maps["bd"]
        mixed = ch.make_channel(
            [np.sqrt(1 - eps) * a for a in orig.kraus]
            + [np.sqrt(eps) * b for b in dephasing().kraus]
        )
        new_maps = dict(inst.edge_maps)
        new_maps["bd"] = mixed
        pert = dataclasses.replace(inst, edge_maps=new_maps)
        assert qch.validate_qch(pert).passed
        rep = qch.check_extension(pert)
        assert not rep.passed
        for c in rep.failures():
            assert 1e-4 <= c.residual <= 1e-2

    def test_missing_required_edge_raises(self):
        # Declared pair where a related cross edge is absent: c reachable from
        # a only through the declared pair's edge set minus ("a","c").
        g = CausalGraph(
            vertices=(("a", 2), ("b", 2), ("c", 2), ("d", 2), ("m", 2)),
            edges=(
                ("am", "a", "m"),
                ("mc", "m", "c"),
                ("ad", "a", "d"),
                ("bc", "b", "c"),
                ("bd", "b", "d"),
            ),
        )
        maps = {eid: dephasing() for eid, _, _ in g.edges}
        inst = qch.QCHInstance(
            graph=g,
            edge_maps=maps,
            complete_pairs=(
                qch.CompletePair(xi=("a", "b"), zeta=("c", "d"), unitary=CNOT),
            ),
        )
        if qch.validate_qch(inst).passed:
            with pytest.raises(MissingEdgeError):
                qch.check_extension(inst)

    def test_exhaustive_covers_singleton_edges(self):
        g = CausalGraph(vertices=(("x", 2), ("y", 2)), edges=(("e", "x", "y"),))
        inst = qch.QCHInstance(graph=g, edge_maps={"e": ch.unitary_channel(H)})
        rep = qch.check_extension(inst, exhaustive=True)
        assert rep.passed
        assert len(rep.checks) > 0

    def test_exhaustive_detects_noisy_forced_edge(self):
        # With a single in/out edge, {x} is a complete past of y, so the edge
        # map itself must have a homomorphic dual; dephasing does not.
        g = CausalGraph(vertices=(("x", 2), ("y", 2)), edges=(("e", "x", "y"),))
        inst = qch.QCHInstance(graph=g, edge_maps={"e": dephasing()})
        rep = qch.check_extension(inst, exhaustive=True)
        assert not rep.passed


class TestSpacelike:
    def test_cnot_pair_commutes(self):
        rep = qch.check_spacelike_commutativity(cnot_instance())
        assert rep.passed
        assert len(rep.checks) == 2  # future side and past side

    def test_contrived_overlap_fails(self):
        # Two declared futures mapping into the same tensor factor of the
        # future algebra: images cannot commute.
        g = pair_graph()
        maps = {eid: ch.make_channel([S2 * I2, S2 * X]) for eid, _, _ in g.edges}
        iso = ch.embedding_isometries([("c", 2), ("d", 2)], {"c"})
        overlap = ch.KrausChannel(in_dim=2, out_dim=4, kraus=tuple(iso))
        inst = qch.QCHInstance(
            graph=g,
            edge_maps=maps,
            declared_futures=(
                qch.DeclaredFuture(vertex="a", zeta=("c", "d"), phi_f=overlap),
                qch.DeclaredFuture(vertex="b", zeta=("c", "d"), phi_f=overlap),
            ),
        )
        rep = qch.check_spacelike_commutativity(inst)
        assert not rep.passed
        # worst commutator over matrix units: ||[E12, E21] ⊗ I_2||_F = 2
        assert abs(rep.max_residual - 2.0) < 1e-10

    def test_disjoint_factors_commute(self):
        g = pair_graph()
        maps = {eid: ch.make_channel([S2 * I2, S2 * X]) for eid, _, _ in g.edges}
        iso_c = ch.embedding_isometries([("c", 2), ("d", 2)], {"c"})
        iso_d = ch.embedding_isometries([("c", 2), ("d", 2)], {"d"})
        inst = qch.QCHInstance(
            graph=g,
            edge_maps=maps,
            declared_futures=(
                qch.DeclaredFuture(
                    vertex="a", zeta=("c", "d"), phi_f=ch.KrausChannel(2, 4, tuple(iso_c))
                ),
                qch.DeclaredFuture(
                    vertex="b", zeta=("c", "d"), phi_f=ch.KrausChannel(2, 4, tuple(iso_d))
                ),
            ),
        )
        rep = qch.check_spacelike_commutativity(inst)
        assert rep.passed
        assert rep.max_residual < 1e-12


class TestComposition:
    def chain_instance(self, transitive_map):
        s_gate = np.diag([1, 1j]).astype(complex)
        g = CausalGraph(
            vertices=(("x", 2), ("m", 2), ("y", 2)),
            edges=(("e1", "x", "m"), ("e2", "m", "y"), ("e3", "x", "y")),
        )
        maps = {
            "e1": ch.unitary_channel(H),
            "e2": ch.unitary_channel(s_gate),
            "e3": transitive_map,
        }
        pairs = (
            qch.CompletePair(xi=("x",), zeta=("m",), unitary=H),
            qch.CompletePair(xi=("m",), zeta=("y",), unitary=s_gate),
        )
        return qch.QCHInstance(graph=g, edge_maps=maps, complete_pairs=pairs)

    def test_unitary_chain_composes(self):
        s_gate = np.diag([1, 1j]).astype(complex)
        inst = self.chain_instance(ch.unitary_channel(s_gate @ H))
        rep = qch.check_composition(inst)
        assert rep.passed
        assert rep.data["checked_triples"] == 1
        assert rep.max_residual < 1e-10

    def test_identity_instead_of_dephasing_fails_at_sqrt2(self):
        # A CNOT pair followed by an identity pair: the joint evolution from
        # layer 0 to layer 2 is CNOT, so the required control edge a -> e is
        # the dephasing channel.  Replacing it by the identity map fails with
        # Choi distance exactly ||C_id - C_deph||_F = sqrt(2).
        g = CausalGraph(
            vertices=(("a", 2), ("b", 2), ("c", 2), ("d", 2), ("e", 2), ("f", 2)),
            edges=(
                ("ac", "a", "c"),
                ("ad", "a", "d"),
                ("bc", "b", "c"),
                ("bd", "b", "d"),
                ("ce", "c", "e"),
                ("cf", "c", "f"),
                ("de", "d", "e"),
                ("df", "d", "f"),
                ("ae", "a", "e"),
            ),
        )
        layer0 = [("a", 2), ("b", 2)]
        layer1 = [("c", 2), ("d", 2)]
        layer2 = [("e", 2), ("f", 2)]
        maps = {}
        for eid, src, dst in g.edges:
            if eid == "ae":
                continue
            gate = ch.unitary_channel(CNOT if src in ("a", "b") else np.eye(4, dtype=complex))
            fin = layer0 if src in ("a", "b") else layer1
            fout = layer1 if src in ("a", "b") else layer2
            maps[eid] = ch.reduce_map(gate, fin, fout, src, dst, mode="channel")
        pairs = (
            qch.CompletePair(xi=("a", "b"), zeta=("c", "d"), unitary=CNOT),
            qch.CompletePair(xi=("c", "d"), zeta=("e", "f"), unitary=np.eye(4, dtype=complex)),
        )
        maps["ae"] = dephasing()
        good = qch.QCHInstance(graph=g, edge_maps=maps, complete_pairs=pairs)
        rep = qch.check_composition(good)
        assert rep.passed and rep.data["checked_triples"] == 1
        assert rep.max_residual < 1e-10

        maps_bad = dict(maps)
        maps_bad["ae"] = ch.identity_channel(2)
        bad = qch.QCHInstance(graph=g, edge_maps=maps_bad, complete_pairs=pairs)
        rep = qch.check_composition(bad)
        assert not rep.passed
        assert abs(rep.max_residual - np.sqrt(2)) < 1e-6

    def test_unrepresented_related_pairs_recorded(self):
        s_gate = np.diag([1, 1j]).astype(complex)
        g = CausalGraph(
            vertices=(("x", 2), ("m", 2), ("y", 2)),
            edges=(("e1", "x", "m"), ("e2", "m", "y")),
        )
        inst = qch.QCHInstance(
            graph=g,
            edge_maps={"e1": ch.unitary_channel(H), "e2": ch.unitary_channel(s_gate)},
            complete_pairs=(
                qch.CompletePair(xi=("x",), zeta=("m",), unitary=H),
                qch.CompletePair(xi=("m",), zeta=("y",), unitary=s_gate),
            ),
        )
        rep = qch.check_composition(inst)
        assert rep.passed
        assert rep.data["checked_triples"] == 0
        assert rep.data["unrepresented_pairs"] == [["x", "y", "m"]]

    def test_self_consistency_when_edges_are_composites(self):
        rep = qch.check_composition(self.chain_instance(ch.unitary_channel(np.diag([1, 1j]) @ H)))
        assert rep.passed


class TestPairReductions:
    def test_swap_pair_with_cross_identity_edges(self):
        rep = qch.verify_complete_pair_reductions(swap_instance(), 0)
        assert rep.passed
        assert len(rep.checks) == 4

    def test_cnot_pair_with_derived_edges(self):
        rep = qch.verify_complete_pair_reductions(cnot_instance(), 0)
        assert rep.passed
        assert rep.max_residual < 1e-10

    def test_cnot_pair_with_identity_edges_fails(self):
        inst = cnot_instance()
        wrong = {eid: ch.identity_channel(2) for eid in inst.edge_maps}
        bad = dataclasses.replace(inst, edge_maps=wrong)
        rep = qch.verify_complete_pair_reductions(bad, 0)
        assert not rep.passed

    def test_raw_equals_scaled_channel_reduction(self):
        inst = cnot_instance()
        pair = inst.complete_pairs[0]
        u_channel = qch.pair_channel(inst, pair)
        facs_in = inst.graph.dims(pair.xi)
        facs_out = inst.graph.dims(pair.zeta)
        for x in pair.xi:
            for y in pair.zeta:
                raw = ch.reduce_map(u_channel, facs_in, facs_out, x, y, mode="raw")
                nrm = ch.reduce_map(u_channel, facs_in, facs_out, x, y, mode="channel")
                d = 2  # dim of the dropped input factor
                assert (
                    np.linalg.norm(ch.choi_matrix(raw) - d * ch.choi_matrix(nrm))
                    < 1e-10
                )


class TestDeterminism:
    def test_reports_are_bit_identical(self):
        inst = cnot_instance()
        a = qch.check_extension(inst)
        b = qch.check_extension(inst)
        assert canonical_json(a.to_json()) == canonical_json(b.to_json())


def test_instance_json_roundtrip():
    inst = cnot_instance()
    again = qch.instance_from_json(qch.instance_to_json(inst))
    assert again.graph == inst.graph
    for eid, phi in inst.edge_maps.items():
        assert ch.choi_distance(again.edge_maps[eid], phi) == 0.0
    assert again.complete_pairs[0].xi == inst.complete_pairs[0].xi
    assert np.array_equal(again.complete_pairs[0].unitary, inst.complete_pairs[0].unitary)
