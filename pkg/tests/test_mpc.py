"""Replicated-sharing protocol checks: correctness vs a plain-integer oracle,
bit-exact metering, determinism, share-distribution sanity, wire framing."""

import numpy as np
import pytest
from scipy import stats

from tnmpcqep.mpc import (
    CLIENT_ID,
    CostMeter,
    CostReport,
    DomainError,
    Instr,
    IntegrityError,
    LockstepTransport,
    Mpc3Session,
    ProtocolError,
    ReplicatedShare,
    SecurityMode,
    SocketTransport,
    eval_plaintext,
    pack_frame,
    reconstruct,
    run_protocol,
    share,
    unpack_frame,
)
from tnmpcqep.ring import FixedPointCodec, RingValue


class _ForcedRng:
    """Stub generator feeding predetermined 'random' components."""

    def __init__(self, values):
        self.values = list(values)

    def integers(self, low, high, size=None, dtype=None):
        v = self.values.pop(0)
        return np.full(size if size else 1, v, dtype=np.uint64)


# --- share / reconstruct ---


def test_share_forced_randomness_example():
    shares = share(7, k=64, rng=_ForcedRng([3, 5]))
    pairs = [tuple(int(x[0]) for x in s.pair) for s in shares]
    v2 = (7 - 3 - 5) % 2**64
    assert v2 == 2**64 - 1
    assert pairs == [(3, 5), (5, v2), (v2, 3)]
    assert reconstruct(shares).value == 7


def test_share_reconstruct_roundtrip_random():
    rng = np.random.default_rng(2)
    for k in (32, 64):
        for _ in range(50):
            v = int(rng.integers(0, 1 << k, dtype=np.uint64))
            assert reconstruct(share(v, k=k, rng=rng)).value == v


def test_share_vector_roundtrip():
    rng = np.random.default_rng(3)
    v = rng.integers(0, 2**63, size=17, dtype=np.int64).view(np.uint64)
    out = reconstruct(share(v, k=64, rng=rng))
    assert np.array_equal(out, v)


def test_reconstruct_detects_tampering():
    shares = list(share(1234, rng=np.random.default_rng(0)))
    bad = shares[1]
    tampered = ReplicatedShare(party=1, pair=(bad.pair[0] + np.uint64(1), bad.pair[1]), k=bad.k)
    with pytest.raises(IntegrityError):
        reconstruct([shares[0], tampered, shares[2]])


def test_reconstruct_requires_three_distinct_parties():
    shares = share(5, rng=np.random.default_rng(0))
    with pytest.raises(IntegrityError):
        reconstruct(shares[:2])
    with pytest.raises(IntegrityError):
        reconstruct([shares[0], shares[0], shares[2]])


def test_share_components_look_uniform_regardless_of_secret():
    # a single party's component histogram must not depend on the secret
    n, bins = 6000, 16
    tables = []
    for secret, seed in ((0, 101), (42, 202)):
        rng = np.random.default_rng(seed)
        session = Mpc3Session(seed=seed + 1)
        vals = []
        for _ in range(n):
            sh = share(secret, rng=rng)
            vals.append(int(sh[2].pair[0][0]) >> 60)  # party 2 sees the residual v_2
        tables.append(np.bincount(vals, minlength=bins))
    chi2, p, _, _ = stats.chi2_contingency(np.array(tables))
    assert p > 0.01


# --- session linear and multiplicative ops ---


def test_session_add_sub_public_ops():
    s = Mpc3Session(seed=1)
    x = s.share(np.array([10, 20, 30], dtype=np.uint64))
    y = s.share(np.array([1, 2, 3], dtype=np.uint64))
    assert [int(v) for v in s.open(s.add(x, y))] == [11, 22, 33]
    assert [int(v) for v in s.open(s.sub(x, y))] == [9, 18, 27]
    assert [int(v) for v in s.open(s.mul_public(x, 3))] == [30, 60, 90]
    assert [int(v) for v in s.open(s.add_public(x, 5))] == [15, 25, 35]
    assert int(s.open(s.sum(x))[0]) == 60


def test_secure_mul_integers():
    s = Mpc3Session(seed=7)
    x = s.share(3)
    y = s.share(5)
    z = s.mul(x, y)
    assert int(s.open(z)[0]) == 15


def test_secure_mul_random_vectors_match_oracle():
    rng = np.random.default_rng(8)
    s = Mpc3Session(seed=8)
    a = rng.integers(0, 2**31, size=40, dtype=np.int64).view(np.uint64)
    b = rng.integers(0, 2**31, size=40, dtype=np.int64).view(np.uint64)
    z = s.open(s.mul(s.share(a), s.share(b)))
    expect = [(int(x) * int(y)) % 2**64 for x, y in zip(a, b)]
    assert [int(v) for v in z] == expect


def test_mul_meters_3k_per_element():
    s = Mpc3Session(k=64, seed=0)
    x, y = s.share(3), s.share(5)
    before = s.meter.node_to_node_bits
    s.mul(x, y)
    assert s.meter.node_to_node_bits - before == 192
    x7 = s.share(np.arange(7, dtype=np.uint64))
    y7 = s.share(np.arange(7, dtype=np.uint64))
    before = s.meter.node_to_node_bits
    s.mul(x7, y7)
    assert s.meter.node_to_node_bits - before == 192 * 7


def test_share_and_open_metering():
    s = Mpc3Session(k=64, seed=0)
    x = s.share(9)
    assert s.meter.client_to_node_bits == 384  # 6k per element
    s.open(x)
    assert s.meter.reconstruction_bits == 192  # 3k per element


def test_truncate_value_and_meter():
    s = Mpc3Session(k=64, fraction_bits=20, seed=4)
    codec = s.codec
    v = 3.25
    raw = codec.encode(v * 1.0).value  # scale F
    scaled = (raw * codec.scale) % 2**64  # lift to scale 2F
    x = s.share(scaled)
    before = s.meter.node_to_node_bits
    t = s.truncate(x)
    assert s.meter.node_to_node_bits - before == 384  # 6k
    out = codec.decode_array(s.open(t))[0]
    assert abs(out - v) <= 2 * codec.ulp


def test_fixed_mul_value_and_meter():
    s = Mpc3Session(k=64, fraction_bits=20, seed=5)
    x = s.share_encoded(2.5)
    y = s.share_encoded(-1.5)
    before = s.meter.node_to_node_bits
    z = s.fixed_mul(x, y)
    assert s.meter.node_to_node_bits - before == 576  # 9k
    assert abs(s.open_decoded(z)[0] - (-3.75)) <= 2 * s.codec.ulp


def test_fixed_mul_random_within_two_ulp():
    rng = np.random.default_rng(6)
    s = Mpc3Session(seed=6)
    a = rng.uniform(-100, 100, size=200)
    b = rng.uniform(-100, 100, size=200)
    # the 2-ulp contract is on the product of the quantized operands; raw
    # encode error of +-0.5 ulp per operand scales with the other magnitude
    aq = s.codec.decode_array(s.codec.encode_array(a))
    bq = s.codec.decode_array(s.codec.encode_array(b))
    z = s.open_decoded(s.fixed_mul(s.share_encoded(a), s.share_encoded(b)))
    assert np.max(np.abs(z - aq * bq)) <= 2 * s.codec.ulp


# --- division ---


def test_divide_known_values():
    s = Mpc3Session(seed=9)
    q = s.open_decoded(s.divide(s.share_encoded(6.0), s.share_encoded(2.0)))[0]
    assert abs(q - 3.0) <= 2 ** -10
    rng = np.random.default_rng(10)
    for v in rng.uniform(0.1, 50, size=10):
        q = s.open_decoded(s.divide(s.share_encoded(v), s.share_encoded(1.0)))[0]
        assert abs(q - v) <= max(1e-4, abs(v) * 2 ** -10)


def test_divide_relative_error_over_denominator_band():
    s = Mpc3Session(seed=11)
    rng = np.random.default_rng(11)
    dens = np.concatenate([[2.0**-6, 2.0**6], np.exp(rng.uniform(np.log(2.0**-6), np.log(2.0**6), 60))])
    for den in dens:
        ratio = rng.uniform(0.1, 20)
        num = den * ratio
        q = s.open_decoded(s.divide(s.share_encoded(num), s.share_encoded(den)))[0]
        assert abs(q - ratio) / ratio <= 2 ** -10, (num, den, q)


def test_divide_meter_exact_regardless_of_operands():
    for num, den in ((6.0, 2.0), (0.37, 41.0), (100.0, 0.02)):
        s = Mpc3Session(k=64, theta=5, seed=12)
        s.divide(s.share_encoded(num), s.share_encoded(den))
        # charges only the closed form on node_to_node: 3k(k + 4*theta + 2)
        assert s.meter.node_to_node_bits == 3 * 64 * (64 + 4 * 5 + 2) == 16512
    s = Mpc3Session(k=64, theta=5, seed=13)
    vec = s.share_encoded(np.array([1.0, 2.0, 3.0]))
    den = s.share_encoded(np.array([2.0, 4.0, 8.0]))
    before = s.meter.node_to_node_bits
    s.divide(vec, den)
    assert s.meter.node_to_node_bits - before == 16512 * 3


def test_divide_rejects_nonpositive_denominator():
    s = Mpc3Session(seed=14)
    x = s.share_encoded(1.0)
    for bad in (0.0, -2.0):
        with pytest.raises(DomainError):
            s.divide(x, s.share_encoded(bad))


def test_divide_deterministic_given_seed():
    outs = []
    for _ in range(2):
        s = Mpc3Session(seed=15)
        q = s.open(s.divide(s.share_encoded(7.3), s.share_encoded(2.9)))
        outs.append(int(q[0]))
    assert outs[0] == outs[1]


# --- straight-line programs vs the plaintext oracle ---


def test_run_protocol_empty_program():
    outputs, report = run_protocol([], {"x": 1.0})
    assert outputs == {}
    assert report == CostReport(0, 0, 0)


def test_run_protocol_single_fixed_mul_costs():
    prog = [Instr("fixed_mul", "z", "x", "y")]
    outputs, report = run_protocol(prog, {"x": 2.5, "y": -1.5}, seed=3)
    assert abs(outputs["z"] - (-3.75)) <= 2 * 2**-20
    assert report.node_to_node_bits == 576
    assert report.client_to_node_bits == 2 * 384
    assert report.reconstruction_bits == 192


def test_run_protocol_active_doubles_every_counter():
    prog = [Instr("fixed_mul", "z", "x", "y")]
    _, passive = run_protocol(prog, {"x": 2.5, "y": -1.5}, seed=3, mode=SecurityMode.PASSIVE)
    _, active = run_protocol(prog, {"x": 2.5, "y": -1.5}, seed=3, mode=SecurityMode.ACTIVE)
    assert active.node_to_node_bits == 2 * passive.node_to_node_bits == 1152
    assert active.client_to_node_bits == 2 * passive.client_to_node_bits
    assert active.reconstruction_bits == 2 * passive.reconstruction_bits


def test_run_protocol_deterministic():
    prog = [
        Instr("mul", "p", "x", "y"),
        Instr("trunc", "q", "p"),
        Instr("add", "r", "q", "z"),
    ]
    inputs = {"x": 3.5, "y": -2.25, "z": 10.0}
    a = run_protocol(prog, inputs, seed=99, outputs=["r"])
    b = run_protocol(prog, inputs, seed=99, outputs=["r"])
    assert a == b


def _random_program(rng, n_inputs=3, max_ops=10):
    """Random straight-line program; tracks approximate values to stay in range."""
    names = [f"in{i}" for i in range(n_inputs)]
    inputs = {n: float(rng.uniform(-100, 100)) for n in names}
    approx = {n: (inputs[n], 1) for n in names}  # value, scale multiple of F
    prog = []
    wid = 0
    for _ in range(int(rng.integers(1, max_ops + 1))):
        for _attempt in range(8):
            op = rng.choice(["add", "sub", "cmul", "mul", "trunc", "fixed_mul"])
            f_wires = [n for n, (_, s) in approx.items() if s == 1]
            f2_wires = [n for n, (_, s) in approx.items() if s == 2]
            if op in ("add", "sub", "mul", "fixed_mul"):
                a, b = rng.choice(f_wires), rng.choice(f_wires)
                va, vb = approx[a][0], approx[b][0]
                if op == "add":
                    v, s = va + vb, 1
                elif op == "sub":
                    v, s = va - vb, 1
                elif op == "mul":
                    v, s = va * vb, 2
                else:
                    v, s = va * vb, 1
                if op in ("mul", "fixed_mul") and abs(v) > 4e6:
                    continue
                if abs(v) > 2e3 and s == 1 and op in ("add", "sub"):
                    continue
                wid += 1
                dst = f"w{wid}"
                prog.append(Instr(op, dst, a, b))
                approx[dst] = (v, s)
                break
            if op == "cmul":
                a = rng.choice(f_wires)
                c = int(rng.integers(-4, 5)) or 2
                v = approx[a][0] * c
                if abs(v) > 2e3:
                    continue
                wid += 1
                dst = f"w{wid}"
                prog.append(Instr("cmul", dst, a, const=c))
                approx[dst] = (v, 1)
                break
            if op == "trunc" and f2_wires:
                a = rng.choice(f2_wires)
                wid += 1
                dst = f"w{wid}"
                prog.append(Instr("trunc", dst, a))
                approx[dst] = (approx[a][0], 1)
                break
    return prog, inputs


def test_thousand_random_programs_match_oracle():
    rng = np.random.default_rng(20260818)
    f = 20
    for trial in range(1000):
        prog, inputs = _random_program(rng)
        if not prog:
            continue
        outs = sorted({ins.dst for ins in prog})
        got, _ = run_protocol(prog, inputs, fraction_bits=f, seed=trial, outputs=outs)
        want = eval_plaintext(prog, inputs, fraction_bits=f, outputs=outs)
        n_trunc = sum(1 for ins in prog if ins.op in ("trunc", "fixed_mul"))
        tol = 2 * 2.0**-f * max(n_trunc, 1)
        for name in outs:
            assert abs(got[name] - want[name]) <= tol, (trial, name)


def test_program_validation_errors():
    with pytest.raises(ProtocolError):
        run_protocol([Instr("nope", "z", "x")], {"x": 1.0})
    with pytest.raises(ProtocolError):
        run_protocol([Instr("add", "z", "x", "missing")], {"x": 1.0})
    with pytest.raises(ProtocolError):
        # adding wires at different scales is rejected
        run_protocol(
            [Instr("mul", "p", "x", "y"), Instr("add", "z", "p", "x")],
            {"x": 1.0, "y": 2.0},
        )
    with pytest.raises(ProtocolError):
        run_protocol([Instr("trunc", "z", "x")], {"x": 1.0})  # not a 2F wire


# --- meter plumbing ---


def test_meter_reset_and_categories():
    m = CostMeter()
    m.charge("node_to_node", 10)
    m.charge("client_to_node", 5)
    assert m.total_bits == 15
    m.reset()
    assert m.total_bits == 0
    with pytest.raises(ProtocolError):
        m.charge("sideways", 1)


def test_session_rejects_bad_theta():
    with pytest.raises(ValueError):
        Mpc3Session(theta=0)


# --- wire format ---


def test_frame_roundtrip():
    elems = np.array([1, 2**64 - 1, 12345], dtype=np.uint64)
    buf = pack_frame("node_to_node", 1, 0, elems, 64)
    cat, src, dst, out, rest = unpack_frame(buf, 64)
    assert (cat, src, dst) == ("node_to_node", 1, 0)
    assert np.array_equal(out, elems)
    assert rest == b""
    # header is 7 bytes; payload counts only element bytes
    assert len(buf) == 7 + 3 * 8


def test_frame_errors():
    elems = np.array([1], dtype=np.uint64)
    with pytest.raises(ProtocolError):
        pack_frame("node_to_node", 0, 1, elems, 30)  # not byte-aligned
    buf = pack_frame("client_to_node", CLIENT_ID, 2, elems, 64)
    with pytest.raises(ProtocolError):
        unpack_frame(buf[:10], 64)  # truncated payload
    with pytest.raises(ProtocolError):
        unpack_frame(b"\x00\x00\x00\x00\x09\x00\x00", 64)  # unknown opcode


def test_socket_transport_matches_lockstep():
    def run(transport_cls):
        transport = transport_cls(k=64)
        s = Mpc3Session(k=64, seed=21, transport=transport)
        x = s.share_encoded(2.5)
        y = s.share_encoded(-1.5)
        z = s.open(s.fixed_mul(x, y))
        rep = s.report()
        if hasattr(transport, "close"):
            transport.close()
        return int(z[0]), rep

    lock_val, lock_rep = run(LockstepTransport)
    sock_val, sock_rep = run(SocketTransport)
    assert lock_val == sock_val
    assert lock_rep == sock_rep
