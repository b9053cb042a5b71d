import numpy as np
import pytest

from qchlab import channel as ch
from qchlab.causal import CausalGraph

S2 = 1.0 / np.sqrt(2.0)

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.diag([1, -1]).astype(complex)
H = np.array([[S2, S2], [S2, -S2]], dtype=complex)
CNOT = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
)
SWAP = np.array(
    [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex
)


def unit(n, i, j):
    e = np.zeros((n, n), dtype=complex)
    e[i, j] = 1.0
    return e


def dephasing():
    return ch.make_channel([S2 * I2, S2 * Z])


def bitflip_mix():
    """rho -> (rho + X rho X)/2, the CNOT target-edge channel."""
    return ch.make_channel([S2 * I2, S2 * X])


def amplitude_damping(gamma):
    a1 = np.diag([1.0, np.sqrt(1.0 - gamma)]).astype(complex)
    a2 = np.sqrt(gamma) * unit(2, 0, 1)
    return ch.make_channel([a1, a2])


def random_kraus_channel(rng, in_dim, out_dim, count):
    ops = [
        rng.standard_normal((out_dim, in_dim)) + 1j * rng.standard_normal((out_dim, in_dim))
        for _ in range(count)
    ]
    return ch.make_channel(ops)


def random_tp_channel(rng, in_dim, out_dim, count):
    """Trace-preserving channel from a Haar-ish isometry split into blocks."""
    g = rng.standard_normal((out_dim * count, in_dim)) + 1j * rng.standard_normal(
        (out_dim * count, in_dim)
    )
    q, _ = np.linalg.qr(g)
    return ch.make_channel([q[k * out_dim : (k + 1) * out_dim, :] for k in range(count)])


def random_density(rng, dim):
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


@pytest.fixture
def diamond():
    """x -> a, x -> b, a -> z, b -> z, all vertices dimension 2."""
    return CausalGraph(
        vertices=(("x", 2), ("a", 2), ("b", 2), ("z", 2)),
        edges=(
            ("xa", "x", "a"),
            ("xb", "x", "b"),
            ("az", "a", "z"),
            ("bz", "b", "z"),
        ),
    )


@pytest.fixture
def rng():
    return np.random.default_rng(2024)
