"""Shared construction helpers for the test suite."""

import numpy as np

from nearrep import Projection, RngSpec, UnitaryMatrix
from nearrep.sphere import _complex_normal, _haar_unitary


def gen_for(seed, stream=0):
    return RngSpec(seed=seed, stream=stream).generator()


def random_unitary(gen, dim):
    return UnitaryMatrix(_haar_unitary(gen, dim))


def random_projection(gen, dim, rank):
    """Projection onto the span of the first ``rank`` columns of a Haar
    unitary."""
    cols = _haar_unitary(gen, dim)[:, :rank]
    return Projection(cols @ cols.conj().T)


def random_matrix(gen, rows, cols=None):
    return _complex_normal(gen, (rows, cols if cols is not None else rows))


def random_hermitian(gen, dim, unit_norm=True):
    z = _complex_normal(gen, (dim, dim))
    h = (z + z.conj().T) / 2.0
    if unit_norm:
        h = h / np.linalg.norm(h, 2)
    return h


def exp_i_hermitian(h, t=1.0):
    eigs, vecs = np.linalg.eigh(h)
    return (vecs * np.exp(1j * t * eigs)) @ vecs.conj().T
