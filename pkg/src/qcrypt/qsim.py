"""Dense statevector simulator.

Registers are ordered big-endian: the amplitude array has shape ``dims`` in C
order, so register 0 is the most significant index.  A register of size 2 is a
qubit.  States are treated as immutable; every operation returns a new one.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np

from .errors import DomainError

TOL = 1e-9
MAX_AMPLITUDES = 1 << 22


@dataclass(frozen=True, eq=False)
class Statevector:
    dims: tuple[int, ...]
    amplitudes: np.ndarray

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        if not dims or any(d < 2 for d in dims):
            raise DomainError("every register needs size >= 2")
        size = math.prod(dims)
        if size > MAX_AMPLITUDES:
            raise DomainError(f"{size} amplitudes exceeds the dense cap of 2^22")
        amps = np.asarray(self.amplitudes, dtype=complex).reshape(size)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def tensor(self) -> np.ndarray:
        return self.amplitudes.reshape(self.dims)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def equals(self, other: "Statevector", tol: float = TOL) -> bool:
        """Equality up to a global phase."""
        if self.dims != other.dims:
            return False
        overlap = abs(np.vdot(self.amplitudes, other.amplitudes))
        return abs(overlap - self.norm() * other.norm()) < tol and \
            abs(self.norm() - other.norm()) < tol


def basis_state(dims: Sequence[int], values: Sequence[int]) -> Statevector:
    if len(dims) != len(values):
        raise DomainError("one value per register")
    amps = np.zeros(tuple(dims), dtype=complex)
    amps[tuple(values)] = 1.0
    return Statevector(tuple(dims), amps)


def from_amplitudes(dims: Sequence[int], amps, normalize: bool = True) -> Statevector:
    a = np.asarray(amps, dtype=complex).reshape(-1)
    if normalize:
        n = np.linalg.norm(a)
        if n == 0:
            raise DomainError("zero vector is not a state")
        a = a / n
    return Statevector(tuple(dims), a)


def random_state(dims: Sequence[int], rng) -> Statevector:
    size = math.prod(dims)
    amps = np.array([complex(rng.gauss(0, 1), rng.gauss(0, 1)) for _ in range(size)])
    return from_amplitudes(dims, amps)


# -- gates ------------------------------------------------------------------

def standard_gate(name: str, theta: float | None = None) -> np.ndarray:
    key = name.upper()
    if key == "NOT":
        return np.array([[0, 1], [1, 0]], dtype=complex)
    if key == "H":
        return np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
    if key == "PHASE":
        if theta is None:
            raise DomainError("PHASE needs an angle")
        return np.array([[1, 0], [0, cmath.exp(1j * theta)]], dtype=complex)
    raise DomainError(f"unknown gate {name!r}")


def is_unitary(u: np.ndarray, tol: float = TOL) -> bool:
    u = np.asarray(u, dtype=complex)
    return np.allclose(u.conj().T @ u, np.eye(u.shape[0]), atol=tol)


def _check_qubit(state: Statevector, idx: int) -> None:
    if not 0 <= idx < len(state.dims):
        raise DomainError(f"register index {idx} out of range")
    if state.dims[idx] != 2:
        raise DomainError(f"register {idx} is not a qubit")


def apply_single(state: Statevector, gate: np.ndarray, qubit: int) -> Statevector:
    _check_qubit(state, qubit)
    t = np.tensordot(np.asarray(gate, dtype=complex), state.tensor, axes=([1], [qubit]))
    t = np.moveaxis(t, 0, qubit)
    return Statevector(state.dims, t)


def apply_controlled(state: Statevector, gate: np.ndarray, control: int, target: int) -> Statevector:
    _check_qubit(state, control)
    _check_qubit(state, target)
    if control == target:
        raise DomainError("control and target must differ")
    t = state.tensor.copy()
    sel = [slice(None)] * len(state.dims)
    sel[control] = 1
    sub = t[tuple(sel)]
    # target axis index shifts down by one if it sits after the control axis
    tgt = target - (1 if target > control else 0)
    sub = np.moveaxis(np.tensordot(np.asarray(gate, dtype=complex), sub, axes=([1], [tgt])), 0, tgt)
    t[tuple(sel)] = sub
    return Statevector(state.dims, t)


def apply_swap(state: Statevector, a: int, b: int) -> Statevector:
    if state.dims[a] != state.dims[b]:
        raise DomainError("swap needs equal-size registers")
    t = np.swapaxes(state.tensor, a, b)
    return Statevector(state.dims, np.ascontiguousarray(t))


# -- Fourier transform --------------------------------------------------------

def qft_matrix(m: int, direction: str = "forward") -> np.ndarray:
    """F[y, a] = e^{+-2 pi i y a / m} / sqrt(m)."""
    if m < 2:
        raise DomainError("QFT needs m >= 2")
    sign = _sign(direction)
    idx = np.arange(m)
    return np.exp(sign * 2j * np.pi * np.outer(idx, idx) / m) / math.sqrt(m)


def _sign(direction: str) -> int:
    if direction == "forward":
        return 1
    if direction == "inverse":
        return -1
    raise DomainError("direction must be 'forward' or 'inverse'")


def qft(state: Statevector, register: int, direction: str = "forward",
        method: str = "dense") -> Statevector:
    if not 0 <= register < len(state.dims):
        raise DomainError(f"register index {register} out of range")
    m = state.dims[register]
    if method == "circuit":
        return _qft_circuit(state, register, direction)
    if method != "dense":
        raise DomainError(f"unknown method {method!r}")
    t = state.tensor
    # the FFT computes the dense matrix action exactly (up to rounding)
    if _sign(direction) == 1:
        out = np.fft.ifft(t, axis=register) * math.sqrt(m)
    else:
        out = np.fft.fft(t, axis=register) / math.sqrt(m)
    return Statevector(state.dims, out)


def qft_dense_matrix_action(state: Statevector, register: int, direction: str = "forward") -> Statevector:
    """Literal m x m matrix product; the reference the FFT path is tested against."""
    f = qft_matrix(state.dims[register], direction)
    t = np.moveaxis(np.tensordot(f, state.tensor, axes=([1], [register])), 0, register)
    return Statevector(state.dims, t)


def _qft_circuit(state: Statevector, register: int, direction: str) -> Statevector:
    m = state.dims[register]
    n = m.bit_length() - 1
    if m != 1 << n:
        raise DomainError("the gate circuit needs a power-of-two register")
    # split the register into n qubits, most significant first
    dims = state.dims[:register] + (2,) * n + state.dims[register + 1:]
    qs = Statevector(dims, state.amplitudes)
    q = [register + j for j in range(n)]
    h = standard_gate("H")
    sign = _sign(direction)
    if sign == 1:
        for j in range(n):
            qs = apply_single(qs, h, q[j])
            for k in range(j + 1, n):
                qs = apply_controlled(qs, standard_gate("PHASE", 2 * math.pi / 2 ** (k - j + 1)), q[k], q[j])
        for j in range(n // 2):
            qs = apply_swap(qs, q[j], q[n - 1 - j])
    else:
        # run the forward circuit backwards with conjugated phases
        for j in range(n // 2):
            qs = apply_swap(qs, q[j], q[n - 1 - j])
        for j in reversed(range(n)):
            for k in reversed(range(j + 1, n)):
                qs = apply_controlled(qs, standard_gate("PHASE", -2 * math.pi / 2 ** (k - j + 1)), q[k], q[j])
            qs = apply_single(qs, h, q[j])
    return Statevector(state.dims, qs.amplitudes)


# -- oracles and measurement ---------------------------------------------------

OracleFn = Union[Callable[[int], int], Sequence[int], np.ndarray]


def apply_oracle(state: Statevector, f: OracleFn, in_register: int, out_register: int) -> Statevector:
    """U_f |x>|y> = |x>|y xor f(x)>."""
    dims = state.dims
    m_in, m_out = dims[in_register], dims[out_register]
    if m_out & (m_out - 1):
        raise DomainError("output register size must be a power of two")
    if in_register == out_register:
        raise DomainError("input and output registers must differ")
    values = np.asarray([f(x) for x in range(m_in)] if callable(f) else f, dtype=np.int64)
    if values.shape != (m_in,) or values.min() < 0 or values.max() >= m_out:
        raise DomainError("oracle values must lie in the output register")
    t = np.moveaxis(state.tensor, (in_register, out_register), (-2, -1))
    idx = np.arange(m_out)[None, :] ^ values[:, None]
    idx = np.broadcast_to(idx, t.shape)
    out = np.take_along_axis(t, idx, axis=-1)
    out = np.moveaxis(out, (-2, -1), (in_register, out_register))
    return Statevector(dims, np.ascontiguousarray(out))


def sample_index(probs: np.ndarray, rng) -> int:
    """Draw an index from a probability vector using one rng.random() call."""
    cdf = np.cumsum(probs)
    u = rng.random() * cdf[-1]
    i = int(np.searchsorted(cdf, u, side="right"))
    return min(i, len(probs) - 1)


def marginal(state: Statevector, register: int) -> np.ndarray:
    p = np.abs(state.tensor) ** 2
    axes = tuple(i for i in range(len(state.dims)) if i != register)
    return p.sum(axis=axes) if axes else p


def measure(state: Statevector, register: int, rng) -> tuple[int, Statevector]:
    if not 0 <= register < len(state.dims):
        raise DomainError(f"register index {register} out of range")
    probs = marginal(state, register)
    outcome = sample_index(probs, rng)
    t = np.zeros_like(state.tensor)
    sel = [slice(None)] * len(state.dims)
    sel[register] = outcome
    t[tuple(sel)] = state.tensor[tuple(sel)]
    t /= math.sqrt(probs[outcome])
    return outcome, Statevector(state.dims, t)


def fourier_sample(support, m: int, direction: str = "forward") -> np.ndarray:
    """Outcome distribution of QFT_m followed by measurement on a sparse state.

    ``support`` is an iterable of (index, amplitude) pairs, or a dict.
    Returns P with P[y] = |(1/sqrt m) sum_j e^{+-2 pi i y x_j / m} alpha_j|^2.
    """
    items = support.items() if isinstance(support, dict) else support
    vec = np.zeros(m, dtype=complex)
    for x, a in items:
        if not 0 <= x < m:
            raise DomainError("support index outside the register")
        vec[x] += a
    norm = float(np.vdot(vec, vec).real)
    if abs(norm - 1) > 1e-6:
        raise DomainError("support must be normalized")
    if _sign(direction) == 1:
        amps = np.fft.ifft(vec) * math.sqrt(m)
    else:
        amps = np.fft.fft(vec) / math.sqrt(m)
    return np.abs(amps) ** 2


def uniform_support(indices, m: int) -> np.ndarray:
    """Fourier distribution of an equal-weight superposition over `indices`."""
    idx = np.asarray(indices, dtype=np.int64)
    vec = np.zeros(m, dtype=complex)
    np.add.at(vec, idx, 1.0)
    vec /= math.sqrt(len(idx))
    return np.abs(np.fft.ifft(vec) * math.sqrt(m)) ** 2
