"""Exact quantum circuit simulation: statevector for noiseless runs, density
matrix for noisy ones.

Bit convention (frozen): qubit 0 is the most significant bit of the basis
index, so reshaping amplitudes to [2]*n puts qubit q on axis q.  Gates are
Ry(t) = exp(-i t Y / 2), Rz(t) = exp(-i t Z / 2), and nearest-neighbor
CNOT(q, q+1).  One hardware-efficient layer applies Ry then Rz on every qubit
followed by the CNOT chain q = 0 .. n-2.

Noise is channel application after every gate on the gate's support qubits:
depolarizing(p); "thermal", a stand-in composition of amplitude damping and
phase damping; "mixed" = depolarizing followed by thermal.  Density-matrix
evolution is exact and limited to 10 qubits.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np

MAX_DENSITY_QUBITS = 10

_I2 = np.eye(2, dtype=complex)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI = {"I": _I2, "X": _X, "Y": _Y, "Z": _Z}


def ry_matrix(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2.0), np.sin(theta / 2.0)
    return np.array([[c, -s], [s, c]], dtype=complex)


def rz_matrix(theta: float) -> np.ndarray:
    return np.array([[np.exp(-0.5j * theta), 0], [0, np.exp(0.5j * theta)]], dtype=complex)


def cnot_matrix() -> np.ndarray:
    """Control on the more significant qubit of the adjacent pair."""
    m = np.eye(4, dtype=complex)
    m[[2, 3]] = m[[3, 2]]
    return m


@dataclass
class StateVector:
    """Pure state on n_qubits; amplitudes indexed with qubit 0 as the MSB."""

    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex).ravel()
        if self.amplitudes.size != 2**self.n_qubits:
            raise ValueError(
                f"state on {self.n_qubits} qubits needs {2**self.n_qubits} amplitudes, "
                f"got {self.amplitudes.size}"
            )

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def copy(self) -> "StateVector":
        return StateVector(self.n_qubits, self.amplitudes.copy())


def zero_state(n_qubits: int) -> StateVector:
    if n_qubits < 1:
        raise ValueError("need at least one qubit")
    amps = np.zeros(2**n_qubits, dtype=complex)
    amps[0] = 1.0
    return StateVector(n_qubits, amps)


def _check_qubit(n: int, q: int) -> None:
    if not 0 <= q < n:
        raise ValueError(f"qubit index {q} out of range for {n} qubits")


def _mix_axis(arr: np.ndarray, m: np.ndarray) -> np.ndarray:
    """2x2 linear combination along the middle axis of a (lead, 2, trail) view."""
    out = np.empty_like(arr)
    out[:, 0, :] = m[0, 0] * arr[:, 0, :] + m[0, 1] * arr[:, 1, :]
    out[:, 1, :] = m[1, 0] * arr[:, 0, :] + m[1, 1] * arr[:, 1, :]
    return out


def apply_single(state: StateVector, gate: np.ndarray, q: int) -> StateVector:
    """Apply a 2x2 gate to qubit q (axis q of the [2]*n reshape)."""
    n = state.n_qubits
    _check_qubit(n, q)
    lead, trail = 1 << q, 1 << (n - q - 1)
    out = _mix_axis(state.amplitudes.reshape(lead, 2, trail), gate)
    return StateVector(n, out.ravel())


def apply_cnot(state: StateVector, control: int, target: int) -> StateVector:
    """Nearest-neighbor CNOT; target must be control + 1."""
    n = state.n_qubits
    _check_qubit(n, control)
    _check_qubit(n, target)
    if target != control + 1:
        raise ValueError("CNOT is restricted to the chain pattern target = control + 1")
    psi = state.amplitudes.reshape([2] * n).copy()
    # swap target amplitudes on the control=1 slice; target axis shifts down
    # by one once the control axis is fixed
    index = [slice(None)] * n
    index[control] = 1
    psi[tuple(index)] = np.flip(psi[tuple(index)], axis=target - 1)
    return StateVector(n, psi.ravel())


def run_circuit(angles: np.ndarray, n_qubits: Optional[int] = None) -> StateVector:
    """Evolve |0...0> through the layered ansatz; angles has shape (L, n, 2)
    holding (theta_y, theta_z) per layer and qubit."""
    angles = np.asarray(angles, dtype=np.float64)
    if angles.ndim != 3 or angles.shape[2] != 2:
        raise ValueError(f"angles must have shape (layers, n_qubits, 2), got {angles.shape}")
    n = angles.shape[1] if n_qubits is None else n_qubits
    if n != angles.shape[1]:
        raise ValueError("n_qubits disagrees with the angle tensor")
    state = zero_state(n)
    for layer in range(angles.shape[0]):
        for q in range(n):
            # Ry then Rz on the same qubit: one fused 2x2 product
            fused = rz_matrix(angles[layer, q, 1]) @ ry_matrix(angles[layer, q, 0])
            state = apply_single(state, fused, q)
        for q in range(n - 1):
            state = apply_cnot(state, q, q + 1)
    return state


@dataclass(frozen=True)
class PauliTerm:
    """Tensor product of X/Y/Z factors on distinct qubits; weight 1 or 2."""

    factors: Tuple[Tuple[int, str], ...]

    def __post_init__(self):
        if not 1 <= len(self.factors) <= 2:
            raise ValueError("observables here are weight-1 or weight-2 Pauli terms")
        seen = set()
        for q, p in self.factors:
            if p not in ("X", "Y", "Z"):
                raise ValueError(f"unknown Pauli factor {p!r}")
            if q in seen:
                raise ValueError("repeated qubit in a Pauli term")
            seen.add(q)
        object.__setattr__(self, "factors", tuple(sorted(self.factors)))

    def label(self) -> str:
        return "*".join(f"{p}{q}" for q, p in self.factors)


def expectation(state: StateVector, term: PauliTerm) -> float:
    phi = state.copy()
    for q, p in term.factors:
        phi = apply_single(phi, PAULI[p], q)
    val = np.vdot(state.amplitudes, phi.amplitudes)
    if abs(val.imag) > 1e-9:
        raise ValueError(f"non-real Pauli expectation ({val}); state is inconsistent")
    return float(np.clip(val.real, -1.0, 1.0))


# --- noise channels and density-matrix evolution ---

NOISE_KINDS = ("noiseless", "depolarizing", "thermal", "mixed")


@dataclass(frozen=True)
class NoiseSpec:
    """Channel selection; defaults p = gamma_amp = gamma_phase = 0.01."""

    kind: str = "noiseless"
    p: float = 0.01
    gamma_amp: float = 0.01
    gamma_phase: float = 0.01

    def __post_init__(self):
        if self.kind not in NOISE_KINDS:
            raise ValueError(f"noise kind must be one of {NOISE_KINDS}, got {self.kind!r}")
        for name in ("p", "gamma_amp", "gamma_phase"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")

    @property
    def is_noiseless(self) -> bool:
        return self.kind == "noiseless"


NOISELESS = NoiseSpec()


def depolarizing_kraus(p: float):
    return [
        np.sqrt(1.0 - 0.75 * p) * _I2,
        np.sqrt(0.25 * p) * _X,
        np.sqrt(0.25 * p) * _Y,
        np.sqrt(0.25 * p) * _Z,
    ]


def amplitude_damping_kraus(gamma: float):
    k0 = np.array([[1, 0], [0, np.sqrt(1 - gamma)]], dtype=complex)
    k1 = np.array([[0, np.sqrt(gamma)], [0, 0]], dtype=complex)
    return [k0, k1]


def phase_damping_kraus(gamma: float):
    k0 = np.array([[1, 0], [0, np.sqrt(1 - gamma)]], dtype=complex)
    k1 = np.array([[0, 0], [0, np.sqrt(gamma)]], dtype=complex)
    return [k0, k1]


def _channel_sequences(noise: NoiseSpec):
    """Kraus families applied, in order, after each gate on each support qubit."""
    if noise.is_noiseless:
        return []
    if noise.kind == "depolarizing":
        return [depolarizing_kraus(noise.p)]
    thermal = [amplitude_damping_kraus(noise.gamma_amp), phase_damping_kraus(noise.gamma_phase)]
    if noise.kind == "thermal":
        return thermal
    return [depolarizing_kraus(noise.p)] + thermal


def kraus_superoperator(kraus) -> np.ndarray:
    """S[r,s,u,v] = sum_i K_i[r,u] conj(K_i[s,v]), so rho'_{rs} = S[r,s,u,v] rho_{uv}."""
    ks = np.asarray(kraus, dtype=complex)
    return np.einsum("iru,isv->rsuv", ks, ks.conj())


def compose_superoperators(superops) -> Optional[np.ndarray]:
    """Fuse channels applied left to right into one map; None when the list is empty."""
    flat = None
    for s in superops:
        flat = s.reshape(4, 4) if flat is None else s.reshape(4, 4) @ flat
    return None if flat is None else flat.reshape(2, 2, 2, 2)


class DensityMatrix:
    """rho stored as a [2]*n x [2]*n tensor (row axes first)."""

    def __init__(self, n_qubits: int, rho: Optional[np.ndarray] = None):
        if n_qubits > MAX_DENSITY_QUBITS:
            raise ValueError(
                f"density evolution is exact and capped at {MAX_DENSITY_QUBITS} qubits, "
                f"got {n_qubits}"
            )
        self.n_qubits = n_qubits
        dim = 2**n_qubits
        if rho is None:
            rho = np.zeros((dim, dim), dtype=complex)
            rho[0, 0] = 1.0
        self.rho = np.asarray(rho, dtype=complex).reshape(dim, dim)

    def _conjugate_single(self, gate: np.ndarray, q: int) -> np.ndarray:
        # gate . rho . gate^dagger via one axis mix per side; rows first
        n = self.n_qubits
        dim = 2**n
        lead, trail = 1 << q, dim >> (q + 1)
        t = _mix_axis(self.rho.reshape(lead, 2, trail * dim), gate)
        t = _mix_axis(t.reshape(dim * lead, 2, trail), gate.conj())
        return t.reshape(dim, dim)

    def apply_single(self, gate: np.ndarray, q: int) -> None:
        _check_qubit(self.n_qubits, q)
        self.rho = self._conjugate_single(gate, q)

    def apply_two(self, gate4: np.ndarray, qa: int, qb: int) -> None:
        n = self.n_qubits
        g = gate4.reshape(2, 2, 2, 2)
        t = self.rho.reshape([2] * (2 * n))
        t = np.tensordot(g, t, axes=([2, 3], [qa, qb]))
        t = np.moveaxis(t, [0, 1], [qa, qb])
        t = np.tensordot(g.conj(), t, axes=([2, 3], [n + qa, n + qb]))
        t = np.moveaxis(t, [0, 1], [n + qa, n + qb])
        self.rho = t.reshape(2**n, 2**n)

    def apply_channel(self, superop: np.ndarray, q: int) -> None:
        """One-qubit channel given as a (2,2,2,2) superoperator S[r,s,u,v]."""
        n = self.n_qubits
        _check_qubit(n, q)
        dim = 2**n
        lead, trail = 1 << q, dim >> (q + 1)
        # expose the row and column bit of qubit q, contract both against S at once
        t = self.rho.reshape(lead, 2, trail * lead, 2, trail)
        t = t.transpose(1, 3, 0, 2, 4).reshape(4, -1)
        out = superop.reshape(4, 4) @ t
        out = out.reshape(2, 2, lead, trail * lead, trail).transpose(2, 0, 3, 1, 4)
        self.rho = out.reshape(dim, dim)

    def apply_kraus(self, kraus, q: int) -> None:
        self.apply_channel(kraus_superoperator(kraus), q)

    def trace(self) -> float:
        return float(np.trace(self.rho).real)

    def purity(self) -> float:
        return float(np.trace(self.rho @ self.rho).real)

    def validate(self, atol: float = 1e-10) -> None:
        if abs(np.trace(self.rho) - 1.0) > 1e-9:
            raise ValueError(f"trace drifted to {np.trace(self.rho)}")
        if np.max(np.abs(self.rho - self.rho.conj().T)) > 1e-9:
            raise ValueError("density matrix lost hermiticity")
        eigs = np.linalg.eigvalsh(self.rho)
        if eigs.min() < -atol:
            raise ValueError(f"negative eigenvalue {eigs.min()}")

    def expectation(self, term: PauliTerm) -> float:
        # tr(O rho): left-multiply the Pauli factors onto the row axes
        n = self.n_qubits
        dim = 2**n
        t = self.rho
        for q, p in term.factors:
            lead, trail = 1 << q, dim >> (q + 1)
            t = _mix_axis(t.reshape(lead, 2, trail * dim), PAULI[p]).reshape(dim, dim)
        val = np.trace(t)
        if abs(val.imag) > 1e-9:
            raise ValueError("non-real expectation from density matrix")
        return float(np.clip(val.real, -1.0, 1.0))


@dataclass
class NoisyResult:
    """Final density matrix plus the NoiseSpec that produced it."""

    density: DensityMatrix
    noise: NoiseSpec

    def expectation(self, term: PauliTerm) -> float:
        return self.density.expectation(term)

    def expectations(self, terms: Sequence[PauliTerm]) -> np.ndarray:
        return np.array([self.density.expectation(t) for t in terms])


def run_noisy(angles: np.ndarray, noise: NoiseSpec = NOISELESS) -> NoisyResult:
    """Density-matrix evolution of the layered ansatz with per-gate channels."""
    angles = np.asarray(angles, dtype=np.float64)
    if angles.ndim != 3 or angles.shape[2] != 2:
        raise ValueError(f"angles must have shape (layers, n_qubits, 2), got {angles.shape}")
    n = angles.shape[1]
    dm = DensityMatrix(n)
    # the same channel stack lands after every gate, so fuse it once up front
    hit_map = compose_superoperators(kraus_superoperator(k) for k in _channel_sequences(noise))
    cnot = cnot_matrix()

    for layer in range(angles.shape[0]):
        for q in range(n):
            # Ry, noise, Rz, noise on one qubit compose into a single map
            seq = [kraus_superoperator([ry_matrix(angles[layer, q, 0])])]
            if hit_map is not None:
                seq.append(hit_map)
            seq.append(kraus_superoperator([rz_matrix(angles[layer, q, 1])]))
            if hit_map is not None:
                seq.append(hit_map)
            dm.apply_channel(compose_superoperators(seq), q)
        for q in range(n - 1):
            dm.apply_two(cnot, q, q + 1)
            if hit_map is not None:
                dm.apply_channel(hit_map, q)
                dm.apply_channel(hit_map, q + 1)
    return NoisyResult(density=dm, noise=noise)


def state_to_density(state: StateVector) -> DensityMatrix:
    rho = np.outer(state.amplitudes, state.amplitudes.conj())
    return DensityMatrix(state.n_qubits, rho)


def amplitudes_csv(state: StateVector, path) -> None:
    """Dump amplitudes as (index, re, im) rows."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["index", "re", "im"])
        for i, a in enumerate(state.amplitudes):
            writer.writerow([i, repr(float(a.real)), repr(float(a.imag))])
