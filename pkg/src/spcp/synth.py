"""Reproducible synthetic low-rank + sparse problem generators.

All randomness comes from numpy's seeded PCG64 generator
(``np.random.default_rng``) with its ``standard_normal`` transform, so
outputs are byte-identical across runs for a fixed seed.
"""

import numpy as np

__all__ = ["gen_low_rank_plus_sparse", "gen_mask"]


def gen_low_rank_plus_sparse(m, n, rank, sparse_frac, noise_rel, seed=0):
    """Generate ``x = l_ref + s_ref + noise`` with exact controls.

    ``l_ref`` is a product of two i.i.d. standard normal factors (exact
    rank ``rank`` almost surely); ``s_ref`` has exactly
    ``round(sparse_frac * m * n)`` standard normal entries at uniformly
    chosen positions; Gaussian noise is rescaled so that
    ``||l_ref + s_ref - x||_F / ||x||_F`` equals ``noise_rel`` to within
    rounding. Returns ``(x, l_ref, s_ref)``.
    """
    m, n = int(m), int(n)
    rank = int(rank)
    if not 0 <= rank <= min(m, n):
        raise ValueError(f"rank={rank} out of range [0, {min(m, n)}]")
    if not 0.0 <= sparse_frac <= 1.0:
        raise ValueError(f"sparse_frac={sparse_frac} out of range [0, 1]")
    if not 0.0 <= noise_rel < 1.0:
        raise ValueError(f"noise_rel={noise_rel} out of range [0, 1)")
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((m, rank))
    b = rng.standard_normal((n, rank))
    l_ref = a @ b.T

    s_ref = np.zeros((m, n))
    nnz = int(round(sparse_frac * m * n))
    if nnz > 0:
        idx = rng.choice(m * n, size=nnz, replace=False)
        s_ref.flat[idx] = rng.standard_normal(nnz)

    clean = l_ref + s_ref
    if noise_rel == 0.0:
        return clean.copy(), l_ref, s_ref

    z = rng.standard_normal((m, n))
    # Solve ||a*z|| / ||clean + a*z|| = noise_rel for the scale a > 0.
    rho_sq = noise_rel * noise_rel
    z_sq = float(np.sum(z * z))
    cross = float(np.sum(clean * z))
    clean_sq = float(np.sum(clean * clean))
    qa = z_sq * (1.0 - rho_sq)
    qb = -2.0 * rho_sq * cross
    qc = -rho_sq * clean_sq
    alpha = (-qb + np.sqrt(qb * qb - 4.0 * qa * qc)) / (2.0 * qa)
    x = clean + alpha * z
    return x, l_ref, s_ref


def gen_mask(m, n, observe_frac, seed=0):
    """Boolean mask with exactly ``round(observe_frac * m * n)`` observed entries.

    Positions are uniform without replacement; deterministic per seed.
    """
    m, n = int(m), int(n)
    if not 0.0 < observe_frac <= 1.0:
        raise ValueError(f"observe_frac={observe_frac} out of range (0, 1]")
    count = int(round(observe_frac * m * n))
    mask = np.zeros((m, n), dtype=bool)
    rng = np.random.default_rng(seed)
    idx = rng.choice(m * n, size=count, replace=False)
    mask.flat[idx] = True
    return mask
