"""Build QCH instances from gate circuits.

Qubit ``q`` between layers ``t`` and ``t+1`` becomes the dimension-2 vertex
``q{q}t{t}``.  One-qubit gates and idle wires become single edges carrying the
unitary (or identity) conjugation.  A two-qubit gate becomes a declared
complete pair between its two input and two output vertices, carrying the gate
unitary, together with all four channel-mode reduced edge maps — the joint
unitary stays available on the pair while the edges keep the per-vertex
operations.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from . import channel as ch, matkernel as mk
from .causal import CausalGraph
from .errors import (
    GateArityError,
    InputFormatError,
    LayerOverlapError,
    NotUnitaryError,
    UnknownGateError,
)
from .qch import CompletePair, QCHInstance

_S2 = 1.0 / math.sqrt(2.0)

BUILTIN_GATES: dict[str, np.ndarray] = {
    "I": np.array([[1, 0], [0, 1]], dtype=np.complex128),
    "X": np.array([[0, 1], [1, 0]], dtype=np.complex128),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=np.complex128),
    "Z": np.array([[1, 0], [0, -1]], dtype=np.complex128),
    "H": np.array([[_S2, _S2], [_S2, -_S2]], dtype=np.complex128),
    "S": np.array([[1, 0], [0, 1j]], dtype=np.complex128),
    "T": np.array([[1, 0], [0, np.exp(1j * math.pi / 4)]], dtype=np.complex128),
    "CNOT": np.array(
        [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]],
        dtype=np.complex128,
    ),
    "CZ": np.diag([1, 1, 1, -1]).astype(np.complex128),
    "SWAP": np.array(
        [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]],
        dtype=np.complex128,
    ),
}

_SWAP = BUILTIN_GATES["SWAP"]


@dataclass(frozen=True)
class Gate:
    name: str
    targets: tuple[int, ...]
    matrix: np.ndarray  # resolved unitary, 2^len(targets) square


@dataclass(frozen=True)
class CircuitSpec:
    num_qubits: int
    layers: tuple[tuple[Gate, ...], ...]


def _resolve_gate(name: str, targets: Sequence[int], custom: Mapping[str, np.ndarray]) -> Gate:
    if name in custom:
        matrix = custom[name]
    elif name in BUILTIN_GATES:
        matrix = BUILTIN_GATES[name]
    else:
        raise UnknownGateError(f"unknown gate {name!r}")
    arity = round(math.log2(matrix.shape[0]))
    if arity > 2:
        raise GateArityError(f"gate {name!r} acts on {arity} qubits; at most 2 supported")
    if len(targets) != arity:
        raise GateArityError(
            f"gate {name!r} needs {arity} target(s), got {len(targets)}"
        )
    return Gate(name=name, targets=tuple(int(t) for t in targets), matrix=matrix)


def parse_circuit(source: str | dict) -> CircuitSpec:
    """Validate a circuit document: known gates, matching arities, in-range and
    non-overlapping targets per layer, unitary custom matrices."""
    obj = json.loads(source) if isinstance(source, str) else source
    try:
        num_qubits = int(obj["qubits"])
        raw_layers = obj["layers"]
    except (KeyError, TypeError) as exc:
        raise InputFormatError(f"malformed circuit object: {exc}") from exc
    if num_qubits < 1:
        raise InputFormatError(f"qubit count must be positive, got {num_qubits}")
    custom: dict[str, np.ndarray] = {}
    for name, mat in obj.get("custom", {}).items():
        u = mk.matrix_from_json(mat)
        n = u.shape[0]
        if u.shape != (n, n) or n not in (2, 4):
            raise GateArityError(
                f"custom gate {name!r} must be 2x2 or 4x4, got {u.shape}"
            )
        defect = mk.frobenius_norm(mk.adjoint(u) @ u - mk.identity(n))
        if defect >= 1e-10:
            raise NotUnitaryError(
                f"custom gate {name!r} is not unitary: ||U†U - I|| = {defect:.3e}"
            )
        custom[str(name)] = u
    layers: list[tuple[Gate, ...]] = []
    for t, raw_layer in enumerate(raw_layers):
        used: set[int] = set()
        gates: list[Gate] = []
        for raw_gate in raw_layer:
            try:
                name = str(raw_gate["gate"])
                targets = [int(x) for x in raw_gate["targets"]]
            except (KeyError, TypeError) as exc:
                raise InputFormatError(f"malformed gate in layer {t}: {exc}") from exc
            gate = _resolve_gate(name, targets, custom)
            for q in gate.targets:
                if not 0 <= q < num_qubits:
                    raise InputFormatError(
                        f"layer {t}: target {q} out of range for {num_qubits} qubits"
                    )
                if q in used:
                    raise LayerOverlapError(
                        f"layer {t}: qubit {q} targeted more than once"
                    )
                used.add(q)
            if len(set(gate.targets)) != len(gate.targets):
                raise LayerOverlapError(
                    f"layer {t}: gate {name!r} repeats a target qubit"
                )
            gates.append(gate)
        layers.append(tuple(gates))
    return CircuitSpec(num_qubits=num_qubits, layers=tuple(layers))


def vertex_id(qubit: int, layer: int) -> str:
    return f"q{qubit}t{layer}"


def circuit_to_qch(spec: CircuitSpec) -> QCHInstance:
    """The instance of a circuit: qubit-layer vertices of dimension 2, unitary
    edges for one-qubit gates, identity edges for idle wires, and for each
    two-qubit gate a complete pair plus its four reduced edge channels."""
    n, depth = spec.num_qubits, len(spec.layers)
    vertices = tuple(
        (vertex_id(q, t), 2) for t in range(depth + 1) for q in range(n)
    )
    edges: list[tuple[str, str, str]] = []
    edge_maps: dict[str, ch.KrausChannel] = {}
    pairs: list[CompletePair] = []

    def add_edge(src: str, dst: str, phi: ch.KrausChannel) -> None:
        eid = f"{src}>{dst}"
        edges.append((eid, src, dst))
        edge_maps[eid] = phi

    for t, layer in enumerate(spec.layers):
        touched: set[int] = set()
        for gate in layer:
            touched.update(gate.targets)
            if len(gate.targets) == 1:
                q = gate.targets[0]
                add_edge(
                    vertex_id(q, t),
                    vertex_id(q, t + 1),
                    ch.unitary_channel(gate.matrix),
                )
                continue
            a, b = gate.targets
            xi = (vertex_id(a, t), vertex_id(b, t))
            zeta = (vertex_id(a, t + 1), vertex_id(b, t + 1))
            # Pair unitaries act on factors in ascending-id order; the gate
            # matrix has its first target first, so conjugate by SWAP if the
            # id order disagrees.
            u = gate.matrix
            if sorted(xi)[0] != xi[0]:
                u = _SWAP @ u @ _SWAP
            xi_facs = [(v, 2) for v in sorted(xi)]
            zeta_facs = [(v, 2) for v in sorted(zeta)]
            u_channel = ch.unitary_channel(u)
            for src_q in (a, b):
                for dst_q in (a, b):
                    reduced = ch.reduce_map(
                        u_channel,
                        in_factors=xi_facs,
                        out_factors=zeta_facs,
                        keep_in=vertex_id(src_q, t),
                        keep_out=vertex_id(dst_q, t + 1),
                        mode="channel",
                    )
                    add_edge(vertex_id(src_q, t), vertex_id(dst_q, t + 1), reduced)
            pairs.append(CompletePair(xi=xi, zeta=zeta, unitary=u))
        for q in range(n):
            if q not in touched:
                add_edge(
                    vertex_id(q, t),
                    vertex_id(q, t + 1),
                    ch.identity_channel(2),
                )

    graph = CausalGraph(vertices=vertices, edges=tuple(edges))
    return QCHInstance(
        graph=graph,
        edge_maps=edge_maps,
        complete_pairs=tuple(pairs),
    )


def circuit_to_json(spec: CircuitSpec) -> dict:
    return {
        "qubits": spec.num_qubits,
        "layers": [
            [{"gate": g.name, "targets": list(g.targets)} for g in layer]
            for layer in spec.layers
        ],
    }
