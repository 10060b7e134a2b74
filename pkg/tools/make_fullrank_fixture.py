"""Regenerate the stored full-rank 70-vertex probability matrix.

Connectome-like construction: two hemispheres of 35 regions, three lobes per
hemisphere with strongly contrasted block probabilities, sparse
cross-hemisphere background, plus dense symmetric uniform noise, clamped
into [0.02, 0.98]. Full rank with high probability; verified on write.
"""

import numpy as np

from graphmean.io import save_dense_csv


def build() -> np.ndarray:
    n = 70
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(7)))
    hemi = np.repeat([0, 1], 35)
    sizes = [14, 11, 10]
    lobe = np.concatenate([np.full(s, i) for i, s in enumerate(sizes)])
    lobe = np.concatenate([lobe, lobe])
    within = np.array([
        [0.94, 0.12, 0.88],
        [0.12, 0.92, 0.15],
        [0.88, 0.15, 0.90],
    ])
    P = np.where(hemi[:, None] == hemi[None, :], within[np.ix_(lobe, lobe)], 0.05)
    noise = rng.uniform(-0.05, 0.05, (n, n))
    P = P + (noise + noise.T) / 2.0
    P = np.clip((P + P.T) / 2.0, 0.02, 0.98)
    np.fill_diagonal(P, 0.0)
    return P


if __name__ == "__main__":
    P = build()
    rank = int(np.sum(np.abs(np.linalg.eigvalsh(P)) > 1e-10))
    assert rank == P.shape[0], f"fixture is rank deficient: {rank}"
    save_dense_csv(P, "src/graphmean/data/fullrank70.csv")
    print(f"wrote fullrank70.csv (rank {rank})")
