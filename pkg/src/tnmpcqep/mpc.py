"""Three-party replicated secret sharing over Z_{2^k} with metered communication.

A secret v is split as v = v_0 + v_1 + v_2 (mod 2^k); party i holds the pair
(v_i, v_{i+1 mod 3}).  Sessions execute all three logical parties in lockstep
inside one process; every message goes through a Transport, and the transport
is the only place the cost meter is mutated.

Costs follow a bit-exact model rather than observed wire traffic: operations
whose in-process realization sends fewer bits than the modeled protocol
(truncation, division) charge the meter their model cost explicitly.  Active
security is a cost model only: every charge is doubled, the dataflow is
unchanged.
"""

from __future__ import annotations

import struct
from collections import deque
from contextlib import contextmanager
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Optional, Sequence

import numpy as np

from .ring import (
    MAX_K,
    FixedPointCodec,
    RingValue,
    as_ring_array,
    from_signed,
    radd,
    ring_mask,
    rmul,
    rneg,
    rsub,
    to_signed,
)

CLIENT_ID = 0xFF  # party-from byte used for client-originated frames


class SecurityMode(Enum):
    PASSIVE = "passive"
    ACTIVE = "active"


class IntegrityError(Exception):
    """Replicated components disagree across parties."""


class ProtocolError(Exception):
    """Malformed program or misuse of a session."""


class DomainError(ValueError):
    """Operand outside an operation's mathematical domain."""


# --- metering ---


@dataclass(frozen=True)
class CostReport:
    """Immutable per-link bit counters for one protocol run or closed form."""

    client_to_node_bits: int = 0
    node_to_node_bits: int = 0
    reconstruction_bits: int = 0

    @property
    def total_bits(self) -> int:
        return self.client_to_node_bits + self.node_to_node_bits + self.reconstruction_bits

    def __add__(self, other: "CostReport") -> "CostReport":
        return CostReport(
            self.client_to_node_bits + other.client_to_node_bits,
            self.node_to_node_bits + other.node_to_node_bits,
            self.reconstruction_bits + other.reconstruction_bits,
        )

    def scaled(self, factor: int) -> "CostReport":
        return CostReport(
            self.client_to_node_bits * factor,
            self.node_to_node_bits * factor,
            self.reconstruction_bits * factor,
        )


CLIENT_TO_NODE = "client_to_node"
NODE_TO_NODE = "node_to_node"
RECONSTRUCTION = "reconstruction"
_CATEGORIES = (CLIENT_TO_NODE, NODE_TO_NODE, RECONSTRUCTION)


@dataclass
class CostMeter:
    """Mutable bit counters; ``multiplier`` models active security (x2)."""

    client_to_node_bits: int = 0
    node_to_node_bits: int = 0
    reconstruction_bits: int = 0
    multiplier: int = 1

    def charge(self, category: str, bits: int) -> None:
        if category not in _CATEGORIES:
            raise ProtocolError(f"unknown meter category {category!r}")
        if bits < 0:
            raise ProtocolError("cannot charge negative bits")
        setattr(self, category + "_bits", getattr(self, category + "_bits") + bits * self.multiplier)

    def reset(self) -> None:
        self.client_to_node_bits = 0
        self.node_to_node_bits = 0
        self.reconstruction_bits = 0

    @property
    def total_bits(self) -> int:
        return self.client_to_node_bits + self.node_to_node_bits + self.reconstruction_bits

    def report(self) -> CostReport:
        return CostReport(self.client_to_node_bits, self.node_to_node_bits, self.reconstruction_bits)


# --- transports ---

OPCODES = {CLIENT_TO_NODE: 1, NODE_TO_NODE: 2, RECONSTRUCTION: 3}
_OPCODE_NAMES = {v: c for c, v in OPCODES.items()}


def pack_frame(category: str, src: int, dst: int, elements: np.ndarray, k: int) -> bytes:
    """[u32 BE payload length][u8 opcode][u8 from][u8 to][payload].

    Payload is the elements as k-bit little-endian integers; k must be
    byte-aligned.  Metering counts payload bits only (len * k).
    """
    if k % 8 != 0:
        raise ProtocolError(f"wire framing requires byte-aligned k, got k={k}")
    if category not in OPCODES:
        raise ProtocolError(f"unknown frame category {category!r}")
    width = k // 8
    elems = as_ring_array(elements, k).ravel()
    payload = b"".join(int(v).to_bytes(width, "little") for v in elems)
    return struct.pack(">IBBB", len(payload), OPCODES[category], src, dst) + payload


def unpack_frame(buf: bytes, k: int):
    """Inverse of pack_frame; returns (category, src, dst, elements, remainder)."""
    if k % 8 != 0:
        raise ProtocolError(f"wire framing requires byte-aligned k, got k={k}")
    if len(buf) < 7:
        raise ProtocolError("truncated frame header")
    length, opcode, src, dst = struct.unpack(">IBBB", buf[:7])
    if opcode not in _OPCODE_NAMES:
        raise ProtocolError(f"unknown opcode {opcode}")
    end = 7 + length
    if len(buf) < end:
        raise ProtocolError("truncated frame payload")
    width = k // 8
    if length % width != 0:
        raise ProtocolError("payload length not a multiple of the element width")
    payload = buf[7:end]
    elems = np.array(
        [int.from_bytes(payload[i : i + width], "little") for i in range(0, length, width)],
        dtype=np.uint64,
    )
    return _OPCODE_NAMES[opcode], src, dst, elems, buf[end:]


class LockstepTransport:
    """In-process FIFO channels between (src, dst) pairs; meters on send."""

    def __init__(self, meter: Optional[CostMeter] = None, k: int = MAX_K):
        self.meter = meter if meter is not None else CostMeter()
        self.k = k
        self._queues: dict = {}
        self._mute_depth = 0

    @contextmanager
    def muted(self):
        """Suspend metering for internal sub-steps whose cost is charged as a model total."""
        self._mute_depth += 1
        try:
            yield self
        finally:
            self._mute_depth -= 1

    def charge(self, category: str, n_elements: int) -> None:
        if self._mute_depth == 0:
            self.meter.charge(category, n_elements * self.k)

    def charge_model(self, category: str, bits: int) -> None:
        """Charge a modeled cost that exceeds (or replaces) observed traffic."""
        if self._mute_depth == 0:
            self.meter.charge(category, bits)

    def send(self, src: int, dst: int, elements: np.ndarray, category: str) -> None:
        elems = np.atleast_1d(as_ring_array(elements, self.k))
        self.charge(category, elems.size)
        self._queues.setdefault((src, dst), deque()).append(elems)

    def recv(self, src: int, dst: int) -> np.ndarray:
        q = self._queues.get((src, dst))
        if not q:
            raise ProtocolError(f"no pending message on channel {src}->{dst}")
        return q.popleft()


class SocketTransport(LockstepTransport):
    """Same lockstep scheduling, but every message crosses a real OS socket
    using the public frame format.  Useful to exercise the wire encoding."""

    def __init__(self, meter: Optional[CostMeter] = None, k: int = MAX_K):
        super().__init__(meter, k)
        import socket

        self._socket_mod = socket
        self._pairs: dict = {}

    def _pair(self, src: int, dst: int):
        key = (src, dst)
        if key not in self._pairs:
            self._pairs[key] = self._socket_mod.socketpair()
        return self._pairs[key]

    def send(self, src: int, dst: int, elements: np.ndarray, category: str) -> None:
        elems = np.atleast_1d(as_ring_array(elements, self.k))
        self.charge(category, elems.size)
        tx, _ = self._pair(src, dst)
        tx.sendall(pack_frame(category, src, dst, elems, self.k))

    def recv(self, src: int, dst: int) -> np.ndarray:
        _, rx = self._pair(src, dst)
        header = self._read_exact(rx, 7)
        (length,) = struct.unpack(">I", header[:4])
        frame = header + self._read_exact(rx, length)
        _, fsrc, fdst, elems, rest = unpack_frame(frame, self.k)
        if (fsrc, fdst) != (src, dst) or rest:
            raise ProtocolError("frame routing mismatch")
        return elems

    def _read_exact(self, sock, n: int) -> bytes:
        out = b""
        while len(out) < n:
            chunk = sock.recv(n - len(out))
            if not chunk:
                raise ProtocolError("socket closed mid-frame")
            out += chunk
        return out

    def close(self) -> None:
        for tx, rx in self._pairs.values():
            tx.close()
            rx.close()


# --- shares ---


@dataclass(frozen=True)
class ReplicatedShare:
    """Party i's view: the component pair (v_i, v_{i+1 mod 3})."""

    party: int
    pair: tuple
    k: int = MAX_K

    def __post_init__(self):
        if self.party not in (0, 1, 2):
            raise ProtocolError(f"party must be 0, 1, or 2, got {self.party}")


def share(value, k: int = MAX_K, rng: Optional[np.random.Generator] = None):
    """Split value into three replicated shares; v_0, v_1 uniform, v_2 the residual."""
    if rng is None:
        rng = np.random.default_rng()
    if isinstance(value, RingValue):
        if value.k != k:
            raise ValueError(f"RingValue width {value.k} does not match k={k}")
        value = value.value
    v = np.atleast_1d(as_ring_array(value, k))
    v0 = _uniform_ring(rng, v.shape, k)
    v1 = _uniform_ring(rng, v.shape, k)
    v2 = rsub(rsub(v, v0, k), v1, k)
    comps = (v0, v1, v2)
    return tuple(
        ReplicatedShare(party=i, pair=(comps[i].copy(), comps[(i + 1) % 3].copy()), k=k)
        for i in range(3)
    )


def reconstruct(shares: Sequence[ReplicatedShare]):
    """Rebuild the secret from all three shares, checking replicated overlap."""
    if len(shares) != 3:
        raise IntegrityError(f"need exactly 3 shares, got {len(shares)}")
    by_party = {s.party: s for s in shares}
    if set(by_party) != {0, 1, 2}:
        raise IntegrityError("shares must come from parties 0, 1, and 2")
    k = shares[0].k
    if any(s.k != k for s in shares):
        raise IntegrityError("mixed ring widths across shares")
    for i in range(3):
        mine = np.atleast_1d(as_ring_array(by_party[i].pair[1], k))
        theirs = np.atleast_1d(as_ring_array(by_party[(i + 1) % 3].pair[0], k))
        if mine.shape != theirs.shape or not np.array_equal(mine, theirs):
            raise IntegrityError(
                f"component v_{(i + 1) % 3} differs between party {i} and party {(i + 1) % 3}"
            )
    total = as_ring_array(np.zeros(np.atleast_1d(np.asarray(by_party[0].pair[0])).shape, np.uint64), k)
    for i in range(3):
        total = radd(total, np.atleast_1d(as_ring_array(by_party[i].pair[0], k)), k)
    if total.size == 1:
        return RingValue(int(total[0]), k)
    return total


def _uniform_ring(rng, shape, k: int) -> np.ndarray:
    """Uniform draw over Z_{2^k} as uint64."""
    full = np.atleast_1d(rng.integers(0, 1 << k, size=shape, dtype=np.uint64))
    return full & np.uint64(ring_mask(k)) if k < MAX_K else full


# --- shared tensors bound to a session ---


class SharedTensor:
    """Vector of secrets under replicated sharing, tracked by canonical components."""

    __slots__ = ("components", "k")

    def __init__(self, components, k: int):
        self.components = tuple(np.atleast_1d(as_ring_array(c, k)) for c in components)
        if len(self.components) != 3:
            raise ProtocolError("a SharedTensor needs exactly 3 components")
        shapes = {c.shape for c in self.components}
        if len(shapes) != 1:
            raise ProtocolError("component shapes disagree")
        self.k = k

    @property
    def shape(self):
        return self.components[0].shape

    @property
    def size(self) -> int:
        return self.components[0].size

    def shares(self):
        c = self.components
        return tuple(
            ReplicatedShare(party=i, pair=(c[i].copy(), c[(i + 1) % 3].copy()), k=self.k)
            for i in range(3)
        )

    @classmethod
    def from_shares(cls, shares: Sequence[ReplicatedShare], k: int) -> "SharedTensor":
        secret = reconstruct(shares)  # validates overlap
        by_party = {s.party: s for s in shares}
        comps = [np.atleast_1d(as_ring_array(by_party[i].pair[0], k)) for i in range(3)]
        del secret
        return cls(comps, k)


class Mpc3Session:
    """Lockstep three-party session: all secure ops, one meter, one seed.

    fraction_bits and theta are defaults for the fixed-point ops; individual
    calls may override the codec.
    """

    def __init__(
        self,
        k: int = MAX_K,
        fraction_bits: int = 20,
        theta: int = 5,
        mode: SecurityMode = SecurityMode.PASSIVE,
        seed: int = 0,
        transport: Optional[LockstepTransport] = None,
    ):
        if theta < 1:
            raise ValueError(f"theta must be >= 1, got {theta}")
        self.k = k
        self.codec = FixedPointCodec(k=k, fraction_bits=fraction_bits)
        self.theta = theta
        self.mode = mode if isinstance(mode, SecurityMode) else SecurityMode(mode)
        self.rng = np.random.default_rng(seed)
        self.transport = transport if transport is not None else LockstepTransport(k=k)
        if self.transport.k != k:
            raise ProtocolError("transport ring width differs from session ring width")
        self.transport.meter.multiplier = 2 if self.mode is SecurityMode.ACTIVE else 1

    @property
    def meter(self) -> CostMeter:
        return self.transport.meter

    def report(self) -> CostReport:
        return self.meter.report()

    # -- sharing / opening --

    def share(self, values, rng: Optional[np.random.Generator] = None) -> SharedTensor:
        """Client-side split; each node receives its component pair (6k bits/element)."""
        v = np.atleast_1d(as_ring_array(values, self.k))
        r = rng if rng is not None else self.rng
        v0 = _uniform_ring(r, v.shape, self.k)
        v1 = _uniform_ring(r, v.shape, self.k)
        v2 = rsub(rsub(v, v0, self.k), v1, self.k)
        comps = (v0, v1, v2)
        for i in range(3):
            pair = np.concatenate([comps[i], comps[(i + 1) % 3]])
            self.transport.send(CLIENT_ID, i, pair, CLIENT_TO_NODE)
            self.transport.recv(CLIENT_ID, i)
        return SharedTensor(comps, self.k)

    def share_encoded(self, real_values, codec: Optional[FixedPointCodec] = None) -> SharedTensor:
        codec = codec or self.codec
        return self.share(codec.encode_array(np.asarray(real_values, dtype=np.float64)))

    def share_public(self, values) -> SharedTensor:
        """Trivial sharing (v, 0, 0) of a publicly known value; no traffic."""
        v = np.atleast_1d(as_ring_array(values, self.k))
        zero = np.zeros_like(v)
        return SharedTensor((v, zero.copy(), zero.copy()), self.k)

    def open(self, x: SharedTensor) -> np.ndarray:
        """Reveal to all parties: each party forwards one missing component (3k bits/element)."""
        c = x.components
        for i in range(3):
            self.transport.send((i + 1) % 3, i, c[(i + 2) % 3], RECONSTRUCTION)
        received = [self.transport.recv((i + 1) % 3, i) for i in range(3)]
        for i in range(3):
            if not np.array_equal(received[i], c[(i + 2) % 3]):
                raise IntegrityError("opened component mismatch")
        total = radd(radd(c[0], c[1], self.k), c[2], self.k)
        return total

    def open_decoded(self, x: SharedTensor, codec: Optional[FixedPointCodec] = None) -> np.ndarray:
        codec = codec or self.codec
        return codec.decode_array(self.open(x))

    # -- linear ops (local) --

    def add(self, x: SharedTensor, y: SharedTensor) -> SharedTensor:
        self._same_ring(x, y)
        return SharedTensor(
            tuple(radd(a, b, self.k) for a, b in zip(x.components, y.components)), self.k
        )

    def sub(self, x: SharedTensor, y: SharedTensor) -> SharedTensor:
        self._same_ring(x, y)
        return SharedTensor(
            tuple(rsub(a, b, self.k) for a, b in zip(x.components, y.components)), self.k
        )

    def neg(self, x: SharedTensor) -> SharedTensor:
        return SharedTensor(tuple(rneg(c, self.k) for c in x.components), self.k)

    def add_public(self, x: SharedTensor, const) -> SharedTensor:
        c = np.broadcast_to(np.atleast_1d(as_ring_array(const, self.k)), x.shape)
        comps = (radd(x.components[0], c, self.k), x.components[1].copy(), x.components[2].copy())
        return SharedTensor(comps, self.k)

    def mul_public(self, x: SharedTensor, const) -> SharedTensor:
        c = np.broadcast_to(np.atleast_1d(as_ring_array(const, self.k)), x.shape)
        return SharedTensor(tuple(rmul(comp, c, self.k) for comp in x.components), self.k)

    def sum(self, x: SharedTensor) -> SharedTensor:
        """Sum all elements into a length-1 shared tensor (local)."""
        comps = []
        for comp in x.components:
            acc = np.uint64(0)
            with np.errstate(over="ignore"):
                acc = np.add.reduce(comp, dtype=np.uint64)
            comps.append(np.atleast_1d(acc))
        return SharedTensor(tuple(as_ring_array(c, self.k) for c in comps), self.k)

    # -- interactive ops --

    def mul(self, x: SharedTensor, y: SharedTensor) -> SharedTensor:
        """Replicated product: z_i = x_i y_i + x_{i+1} y_i + x_i y_{i+1}; party i
        sends z_i to party i-1 (3k bits/element)."""
        self._same_ring(x, y)
        xc, yc = x.components, y.components
        z = []
        for i in range(3):
            j = (i + 1) % 3
            t = radd(
                radd(rmul(xc[i], yc[i], self.k), rmul(xc[j], yc[i], self.k), self.k),
                rmul(xc[i], yc[j], self.k),
                self.k,
            )
            z.append(t)
        for i in range(3):
            self.transport.send(i, (i - 1) % 3, z[i], NODE_TO_NODE)
        for i in range(3):
            self.transport.recv((i + 1) % 3, i)
        return SharedTensor(tuple(z), self.k)

    def truncate(
        self,
        x: SharedTensor,
        codec: Optional[FixedPointCodec] = None,
        shift: Optional[int] = None,
        rounding: str = "floor",
        _charge: bool = True,
    ) -> SharedTensor:
        """Divide by 2^F with floor semantics, staying shared; meters 6k bits/element.

        Realized as an exact reshare of the arithmetic shift (deterministic,
        error-free at the integer level); the 6k charge is the protocol model
        cost of the interactive variant this stands in for.
        """
        codec = codec or self.codec
        f = codec.fraction_bits if shift is None else shift
        signed = to_signed(self._combine(x), self.k)
        if rounding == "nearest":
            signed = signed + (np.int64(1) << np.int64(f - 1)) if f > 0 else signed
        shifted = signed >> np.int64(f)
        out = self._reshare_internal(from_signed(shifted, self.k))
        if _charge:
            self.transport.charge_model(NODE_TO_NODE, 6 * self.k * x.size)
        return out

    def fixed_mul(
        self, x: SharedTensor, y: SharedTensor, codec: Optional[FixedPointCodec] = None
    ) -> SharedTensor:
        """Scale-preserving product: secure mul (3k) then truncation (6k)."""
        return self.truncate(self.mul(x, y), codec)

    def divide(
        self,
        num: SharedTensor,
        den: SharedTensor,
        codec: Optional[FixedPointCodec] = None,
        theta: Optional[int] = None,
    ) -> SharedTensor:
        """Fixed-point quotient num/den via reciprocal refinement.

        The denominator's bit width is published as a power-of-two
        normalization exponent; theta iterations of two fixed-point
        multiplications refine the reciprocal of the normalized denominator,
        and one final multiplication forms the quotient.  Meters exactly
        3k(k + 4*theta + 2) node-to-node bits per element, independent of the
        operands; internal message traffic is not metered separately.
        """
        codec = codec or self.codec
        theta = self.theta if theta is None else theta
        if theta < 1:
            raise ValueError(f"theta must be >= 1, got {theta}")
        self._same_ring(num, den)
        f = codec.fraction_bits
        k = self.k

        den_signed = to_signed(self._combine(den), k)
        if np.any(den_signed <= 0):
            raise DomainError("secure division requires a strictly positive denominator")

        with self.transport.muted():
            widths = np.array([int(v).bit_length() for v in den_signed], dtype=np.int64)
            # normalize both operands by 2^(f - e): den lands in [0.5, 1)
            b0 = self._scale_pow2(den, f - widths, rounding="nearest")
            n0 = self._scale_pow2(num, f - widths, rounding="nearest")

            # linear initial estimate of 1/b0 on [0.5, 1): r = 2.9142 - 2 b0
            init = codec.encode(2.9142).value
            r = self.add_public(self.neg(self.mul_public(b0, 2)), init)
            two = codec.encode(2.0).value
            for _ in range(theta):
                t = self.truncate(self.mul(b0, r), codec, rounding="nearest", _charge=False)
                u = self.add_public(self.neg(t), two)
                r = self.truncate(self.mul(r, u), codec, rounding="nearest", _charge=False)
            q = self.truncate(self.mul(n0, r), codec, rounding="nearest", _charge=False)

        self.transport.charge_model(NODE_TO_NODE, 3 * k * (k + 4 * theta + 2) * num.size)
        return q

    # -- internals --

    def _same_ring(self, x: SharedTensor, y: SharedTensor) -> None:
        if x.k != self.k or y.k != self.k:
            raise ProtocolError("shared tensors belong to a different ring width")
        if x.shape != y.shape:
            raise ProtocolError(f"shape mismatch: {x.shape} vs {y.shape}")

    def _combine(self, x: SharedTensor) -> np.ndarray:
        c = x.components
        return radd(radd(c[0], c[1], self.k), c[2], self.k)

    def _reshare_internal(self, values: np.ndarray) -> SharedTensor:
        v0 = _uniform_ring(self.rng, values.shape, self.k)
        v1 = _uniform_ring(self.rng, values.shape, self.k)
        v2 = rsub(rsub(values, v0, self.k), v1, self.k)
        return SharedTensor((v0, v1, v2), self.k)

    def _scale_pow2(self, x: SharedTensor, exps: np.ndarray, rounding: str = "floor") -> SharedTensor:
        """Multiply element j by 2^exps[j]; negative exponents truncate exactly."""
        exps = np.broadcast_to(np.asarray(exps, dtype=np.int64), x.shape)
        signed = to_signed(self._combine(x), self.k)
        up = np.where(exps > 0, exps, 0).astype(np.uint64)
        down = np.where(exps < 0, -exps, 0)
        with np.errstate(over="ignore"):
            scaled = from_signed(signed, self.k)
            scaled = rmul(scaled, np.uint64(1) << up, self.k)
        s2 = to_signed(scaled, self.k)
        if rounding == "nearest":
            bias = np.where(down > 0, np.int64(1) << np.int64(np.maximum(down - 1, 0)), 0)
            s2 = s2 + bias * (down > 0)
        s2 = s2 >> down.astype(np.int64)
        return self._reshare_internal(from_signed(s2, self.k))


# --- straight-line programs and the plaintext oracle ---


@dataclass(frozen=True)
class Instr:
    """One step of a straight-line secure program.

    ops: add, sub, mul (scale doubles), trunc (scale drops by F),
    fixed_mul (scale preserved), cmul (integer constant, local), div.
    """

    op: str
    dst: str
    a: str
    b: Optional[str] = None
    const: Optional[int] = None


_SCALE_RULES = {"add", "sub", "mul", "trunc", "fixed_mul", "cmul", "div"}


def _program_scales(program: Sequence[Instr], input_names: Iterable[str]) -> dict:
    """Track each wire's fixed-point scale in multiples of F; validate the program."""
    scales = {name: 1 for name in input_names}
    for ins in program:
        if ins.op not in _SCALE_RULES:
            raise ProtocolError(f"unknown op {ins.op!r}")
        if ins.a not in scales:
            raise ProtocolError(f"undefined wire {ins.a!r}")
        sa = scales[ins.a]
        if ins.op in ("add", "sub", "mul", "fixed_mul", "div"):
            if ins.b is None or ins.b not in scales:
                raise ProtocolError(f"op {ins.op} needs a defined second operand")
            sb = scales[ins.b]
        if ins.op in ("add", "sub"):
            if sa != sb:
                raise ProtocolError("cannot add wires at different scales")
            scales[ins.dst] = sa
        elif ins.op == "mul":
            scales[ins.dst] = sa + sb
        elif ins.op == "fixed_mul":
            if sa != 1 or sb != 1:
                raise ProtocolError("fixed_mul expects scale-F operands")
            scales[ins.dst] = 1
        elif ins.op == "trunc":
            if sa < 2:
                raise ProtocolError("trunc expects a scale >= 2F wire")
            scales[ins.dst] = sa - 1
        elif ins.op == "cmul":
            if ins.const is None or int(ins.const) != ins.const:
                raise ProtocolError("cmul needs an integer constant")
            scales[ins.dst] = sa
        elif ins.op == "div":
            if sa != 1 or sb != 1:
                raise ProtocolError("div expects scale-F operands")
            scales[ins.dst] = 1
    return scales


def run_protocol(
    program: Sequence[Instr],
    inputs: dict,
    k: int = MAX_K,
    fraction_bits: int = 20,
    theta: int = 5,
    mode: SecurityMode = SecurityMode.PASSIVE,
    seed: int = 0,
    outputs: Optional[Sequence[str]] = None,
    transport: Optional[LockstepTransport] = None,
):
    """Execute a straight-line program under the session; returns (decoded outputs, CostReport).

    Only inputs actually referenced are shared; outputs default to the last
    destination.  An empty program therefore costs nothing.
    """
    session = Mpc3Session(
        k=k, fraction_bits=fraction_bits, theta=theta, mode=mode, seed=seed, transport=transport
    )
    codec = session.codec
    if not program:
        return {}, session.report()
    scales = _program_scales(program, inputs.keys())
    used = set()
    for ins in program:
        used.add(ins.a)
        if ins.b is not None:
            used.add(ins.b)
    wires = {}
    for name, value in inputs.items():
        if name in used:
            wires[name] = session.share_encoded(float(value))
    for ins in program:
        a = wires[ins.a]
        if ins.op == "add":
            wires[ins.dst] = session.add(a, wires[ins.b])
        elif ins.op == "sub":
            wires[ins.dst] = session.sub(a, wires[ins.b])
        elif ins.op == "mul":
            wires[ins.dst] = session.mul(a, wires[ins.b])
        elif ins.op == "fixed_mul":
            wires[ins.dst] = session.fixed_mul(a, wires[ins.b])
        elif ins.op == "trunc":
            wires[ins.dst] = session.truncate(a)
        elif ins.op == "cmul":
            wires[ins.dst] = session.mul_public(a, int(ins.const) % (1 << k))
        elif ins.op == "div":
            wires[ins.dst] = session.divide(a, wires[ins.b])
    if outputs is None:
        outputs = [program[-1].dst]
    decoded = {}
    for name in outputs:
        if name not in wires:
            raise ProtocolError(f"requested output {name!r} was never computed")
        raw = session.open(wires[name])
        scale_codec = FixedPointCodec(k=k, fraction_bits=fraction_bits * scales[name])
        decoded[name] = float(scale_codec.decode_array(raw)[0])
    return decoded, session.report()


def eval_plaintext(
    program: Sequence[Instr],
    inputs: dict,
    k: int = MAX_K,
    fraction_bits: int = 20,
    outputs: Optional[Sequence[str]] = None,
) -> dict:
    """Reference fixed-point evaluation on plain python integers.

    Mirrors the ring semantics (two's complement, floor truncation) with no
    sharing, so secure executions can be checked against it exactly.
    """
    mod = 1 << k
    half = 1 << (k - 1)
    f = fraction_bits

    def enc(v: float) -> int:
        scaled = v * (1 << f)
        m = int(np.floor(abs(scaled) + 0.5))
        return (-m if scaled < 0 else m) % mod

    def signed(x: int) -> int:
        return x - mod if x >= half else x

    if not program:
        return {}
    scales = _program_scales(program, inputs.keys())
    wires = {name: enc(float(v)) for name, v in inputs.items()}
    for ins in program:
        a = wires[ins.a]
        if ins.op == "add":
            wires[ins.dst] = (a + wires[ins.b]) % mod
        elif ins.op == "sub":
            wires[ins.dst] = (a - wires[ins.b]) % mod
        elif ins.op == "mul":
            wires[ins.dst] = (a * wires[ins.b]) % mod
        elif ins.op == "fixed_mul":
            prod = (a * wires[ins.b]) % mod
            wires[ins.dst] = (signed(prod) >> f) % mod
        elif ins.op == "trunc":
            wires[ins.dst] = (signed(a) >> f) % mod
        elif ins.op == "cmul":
            wires[ins.dst] = (a * (int(ins.const) % mod)) % mod
        elif ins.op == "div":
            num = signed(a) / (1 << f)
            den = signed(wires[ins.b]) / (1 << f)
            if den <= 0:
                raise DomainError("non-positive denominator")
            wires[ins.dst] = enc(num / den)
    if outputs is None:
        outputs = [program[-1].dst]
    return {name: signed(wires[name]) / float(1 << (f * scales[name])) for name in outputs}
