"""Post-aggregation quantum processor: gate behavior, qubit scaling, and the
bypass mix.

Run: python3 demos/qep_processor.py
"""

import dataclasses

import numpy as np

from tnmpcqep.qep import (
    make_qep,
    observable_count,
    qep_forward,
    quantum_features,
    suggest_qubits,
)


def main():
    d = 64
    print(f"suggested qubits for d={d}: {suggest_qubits(d)}")
    print("observable widths: " + ", ".join(
        f"N_q={n} -> d_q={observable_count(n, 'nearest_neighbor')}" for n in (4, 8, 16)))

    params = make_qep(d=d, n_q=8, seed=0)
    rng = np.random.default_rng(1)
    xs = rng.standard_normal((4, d))
    out, diag = qep_forward(xs, params)
    print(f"\nforward pass on 4 latents: alpha_mean {diag.alpha_mean:.4f}, "
          f"q_std {diag.q_std:.4f}")
    print(f"output change per sample (L2): {np.linalg.norm(out - xs, axis=1).round(3)}")

    q_raw = quantum_features(xs[0], params)
    print(f"raw Pauli expectations: shape {q_raw.shape}, "
          f"range [{q_raw.min():+.3f}, {q_raw.max():+.3f}] (always inside [-1, 1])")

    # alpha = 0 forces the identity; beta = 1 routes around the circuit
    gate_off = dataclasses.replace(params, alpha_w=np.zeros(d), alpha_b=-1000.0)
    out_id, _ = qep_forward(xs, gate_off)
    print(f"\ngate forced closed: max |f_out - x| = {np.abs(out_id - xs).max():.1e}")
    bypass = dataclasses.replace(params, beta=1.0)
    shifted = dataclasses.replace(bypass, delta=bypass.delta + 1.0)
    a, _ = qep_forward(xs, bypass)
    b, _ = qep_forward(xs, shifted)
    print(f"beta = 1: output ignores circuit angles, max |diff| = {np.abs(a - b).max():.1e}")


if __name__ == "__main__":
    main()
