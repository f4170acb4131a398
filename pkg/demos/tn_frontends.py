"""The three tensor-network encoders on one batch of synthetic images.

Run: python3 demos/tn_frontends.py
"""

import dataclasses

import numpy as np

from tnmpcqep.pipeline import synth_data
from tnmpcqep.tn import FrontendConfig, encode_batch, isometry_check, make_frontend


def main():
    data = synth_data(6, seed=0)
    xs = data.images.reshape(6, -1)
    print(f"batch: {xs.shape[0]} images, labels {[int(y) for y in data.labels]}")

    for kind in ("mps", "ttn", "mera"):
        params = make_frontend(FrontendConfig(kind=kind, seed=3))
        feats = encode_batch(xs, params)
        dev = isometry_check(params)
        print(f"\n{kind}: latents {feats.shape}, isometry deviation {dev:.2e}")
        print(f"  per-class latent means differ by "
              f"{np.abs(feats[data.labels == 0].mean(0) - feats[data.labels == 1].mean(0)).max():.3f} (max coord)")
        print(f"  first latent head: {feats[0, :5].round(4)}")

    # MERA with identity disentanglers collapses to the TTN map
    ttn = make_frontend(FrontendConfig(kind="ttn", seed=3))
    mera = make_frontend(FrontendConfig(kind="mera", seed=3))
    dl = mera.config.d_loc
    ident = np.stack([np.eye(2 * dl, dtype=np.complex128)] * mera.config.n_levels)
    collapsed = dataclasses.replace(mera, disentanglers=ident)
    diff = np.abs(encode_batch(xs, collapsed) - encode_batch(xs, ttn)).max()
    print(f"\nMERA with identity disentanglers vs TTN: max |diff| = {diff:.2e}")


if __name__ == "__main__":
    main()
