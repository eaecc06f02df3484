"""Complex linear algebra and random sampling primitives.

All vectors/matrices are plain numpy complex arrays.  Samplers take an
explicit ``numpy.random.Generator`` so that parallel callers can use
independent seeded streams.
"""

import numpy as np

from .errors import DegenerateInput, InvalidParam, NumericalDomain

# Repo-wide numerical tolerances: structural (unitarity / Hermitian symmetry)
# and algebraic identities.  Double precision leaves ample headroom at T <= 32.
TOL_STRUCTURAL = 1e-10
TOL_ALGEBRAIC = 1e-9


def rotation_unitary_from(x):
    """T x T unitary U whose last column is conj(x)/||x||.

    Consequently conj(x) x^T = U diag(0,...,0,||x||^2) U^H and
    x^T U = (0, ..., 0, ||x||).  Deterministic: built from a single
    Householder reflector with the sign chosen to avoid cancellation.

    Raises DegenerateInput on a zero vector.
    """
    x = np.asarray(x, dtype=complex).ravel()
    t = x.size
    nrm = np.linalg.norm(x)
    if nrm <= 0.0 or not np.isfinite(nrm):
        raise DegenerateInput("rotation_unitary_from requires a nonzero finite vector")
    u = np.conj(x) / nrm
    # phase of the last entry; zero entry -> phase 1
    ph = u[-1] / abs(u[-1]) if abs(u[-1]) > 0 else 1.0
    v = u.copy()
    v[-1] += ph  # no cancellation: |v[-1]| = |u[-1]| + 1
    h = np.eye(t, dtype=complex) - 2.0 * np.outer(v, np.conj(v)) / np.vdot(v, v).real
    # H e_T = -conj(ph) * u; rescale the last column so it equals u exactly
    h[:, -1] *= -ph
    return h


def log_det_hermitian_psd(m):
    """log2 det(M) for a Hermitian positive-definite matrix.

    Raises NumericalDomain if M is not Hermitian within tolerance or not
    positive definite.
    """
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise NumericalDomain("expected a square matrix")
    scale = max(1.0, np.abs(m).max())
    if np.abs(m - m.conj().T).max() > TOL_STRUCTURAL * scale:
        raise NumericalDomain("matrix is not Hermitian within tolerance")
    try:
        chol = np.linalg.cholesky(m)
    except np.linalg.LinAlgError:
        raise NumericalDomain("matrix is not positive definite") from None
    return 2.0 * np.sum(np.log2(np.diag(chol).real))


def sample_gamma(shape, scale, rng, size=None):
    """Gamma(shape, scale) draws.

    For shape < 1 uses the boost trick on a shape+1 draw:
    G = Gamma(shape+1) * U^(1/shape), needed because the auxiliary family
    uses shape = 1/log(scale) << 1 at high SNR.
    """
    if shape <= 0 or scale <= 0:
        raise InvalidParam("gamma shape and scale must be positive")
    if shape < 1.0:
        g = rng.gamma(shape + 1.0, size=size)
        u = rng.uniform(size=size)
        return scale * g * np.exp(np.log(u) / shape)
    return scale * rng.gamma(shape, size=size)


def sample_complex_gaussian(n, rng, size=None):
    """CN(0,1) i.i.d. entries; shape (n,) or size + (n,)."""
    if n < 1:
        raise InvalidParam("dimension must be >= 1")
    shp = (n,) if size is None else tuple(np.atleast_1d(size)) + (n,)
    z = rng.standard_normal(shp) + 1j * rng.standard_normal(shp)
    return z / np.sqrt(2.0)


def sample_uniform_complex_sphere(n, rng, size=None):
    """Uniform draw(s) on the complex unit sphere in C^n (||u|| = 1)."""
    z = sample_complex_gaussian(n, rng, size=size)
    return z / np.linalg.norm(z, axis=-1, keepdims=True)
