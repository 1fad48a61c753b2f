"""Linear maps from R^k into the skew-symmetric m x m matrices.

A :class:`JMap` is the basic datum of the whole construction: k skew
matrices J_1..J_k defining j(z) = sum_i z_i J_i.  Everything downstream
(metrics, deformations, verification) consumes these values unchanged.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .linalg import skew_basis, skew_dim

SKEW_ATOL = 1e-14


@dataclass(frozen=True)
class JMap:
    """A linear map z -> sum_i z_i J_i with skew-symmetric components.

    ``mats`` has shape (k, m, m); each component must be skew-symmetric to
    ``SKEW_ATOL`` entrywise.  Instances are immutable values.
    """

    mats: np.ndarray = field(repr=False)

    def __post_init__(self):
        mats = np.ascontiguousarray(np.asarray(self.mats, dtype=float))
        if mats.ndim != 3 or mats.shape[1] != mats.shape[2]:
            raise ValueError(f"expected shape (k, m, m), got {mats.shape}")
        if mats.shape[0] < 1 or mats.shape[1] < 1:
            raise ValueError("k and m must be positive")
        sym = np.max(np.abs(mats + np.swapaxes(mats, 1, 2)))
        if sym > SKEW_ATOL:
            raise ValueError(f"components not skew-symmetric (max |J+J^T| = {sym:.3e})")
        mats.setflags(write=False)
        object.__setattr__(self, "mats", mats)

    @property
    def m(self) -> int:
        return self.mats.shape[1]

    @property
    def k(self) -> int:
        return self.mats.shape[0]

    def __call__(self, z) -> np.ndarray:
        """Evaluate j(z); ``z`` may be a (k,) vector or a (P, k) batch."""
        z = np.asarray(z, dtype=float)
        if z.shape[-1] != self.k:
            raise ValueError(f"z has length {z.shape[-1]}, expected {self.k}")
        return np.einsum("...i,imn->...mn", z, self.mats)

    def scaled(self, c: float) -> "JMap":
        return JMap(c * self.mats)

    def frobenius_norm(self) -> float:
        return float(np.linalg.norm(self.mats))

    def __eq__(self, other) -> bool:
        return isinstance(other, JMap) and self.mats.shape == other.mats.shape \
            and bool(np.all(self.mats == other.mats))

    def to_dict(self) -> dict:
        return {
            "m": self.m,
            "k": self.k,
            "mats": [comp.reshape(-1).tolist() for comp in self.mats],
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "JMap":
        m, k = int(payload["m"]), int(payload["k"])
        mats = np.array(payload["mats"], dtype=float).reshape(k, m, m)
        return cls(mats)


def random_generic_jmap(m: int, k: int, seed: int) -> JMap:
    """Draw component matrices i.i.d. standard normal, then antisymmetrize.

    Deterministic for a fixed seed.  The draw lands in the generic set with
    probability one but the caller must confirm with :func:`genericity_test`
    (or use ``deform.find_generic_jmap``, which re-seeds until certified).
    """
    if m < 2 or k < 1:
        raise ValueError(f"need m >= 2 and k >= 1, got m={m}, k={k}")
    rng = np.random.default_rng(seed)
    raw = rng.standard_normal((k, m, m))
    return JMap((raw - np.swapaxes(raw, 1, 2)) / 2.0)


def conjugate_jmap(j: JMap, amat: np.ndarray) -> JMap:
    """The pencil z -> A j(z) A^T for an orthogonal A (re-antisymmetrized)."""
    amat = np.asarray(amat, dtype=float)
    out = np.einsum("mp,ipq,nq->imn", amat, j.mats, amat)
    return JMap((out - np.swapaxes(out, 1, 2)) / 2.0)


def substitute_basis(j: JMap, cmat: np.ndarray) -> JMap:
    """Precompose with an orthogonal map of the parameter space: (j o C)(z) = j(Cz)."""
    cmat = np.asarray(cmat, dtype=float)
    if cmat.shape != (j.k, j.k):
        raise ValueError(f"C must be {j.k} x {j.k}")
    if np.max(np.abs(cmat.T @ cmat - np.eye(j.k))) > 1e-10:
        raise ValueError("C is not orthogonal")
    # (j o C)_i = sum_l C_{li} J_l
    return JMap(np.einsum("li,lmn->imn", cmat, j.mats))


def genericity_test(j: JMap, sv_tol: float = 1e-10) -> int:
    """Dimension of the skew-symmetric commutant {X in so(m) : [X, J_i] = 0}.

    Zero means only finitely many orthogonal maps commute with every j(z),
    which is the hypothesis needed for the non-isometry argument.
    """
    basis = skew_basis(j.m)
    # columns: stacked commutators [X_b, J_i] over all components i
    cols = np.einsum("bmp,ipn->ibmn", basis, j.mats) - np.einsum("imp,bpn->ibmn", j.mats, basis)
    flat = cols.transpose(1, 0, 2, 3).reshape(len(basis), -1).T  # (k*m*m, d_so)
    sv = np.linalg.svd(flat, compute_uv=False)
    if sv.size == 0 or sv[0] == 0.0:
        return skew_dim(j.m)
    return int(np.sum(sv <= sv_tol * max(sv[0], 1.0)))


def trace_word_invariants(j: JMap, max_len: int) -> np.ndarray:
    """Traces of all words in {J_1..J_k} of length 2..max_len.

    Canonical order: by length, then lexicographic in the letter indices.
    The list is invariant under J_i -> A J_i A^T for one fixed orthogonal A,
    but not under basis rotations of z; callers comparing across candidate C
    must apply :func:`substitute_basis` first.
    """
    if max_len < 2:
        raise ValueError("max_len must be >= 2")
    out = []
    for length in range(2, max_len + 1):
        for word in itertools.product(range(j.k), repeat=length):
            prod = j.mats[word[0]]
            for letter in word[1:]:
                prod = prod @ j.mats[letter]
            out.append(np.trace(prod))
    return np.array(out)
