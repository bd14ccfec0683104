"""Row-compressed Hermitian operator storage with a small binary dump format.

Binary layout (all little-endian)::

    offset  size  field
    0       8     magic  b"DSCSR\\x00\\x00\\x00"
    8       4     format version (uint32, currently 1)
    12      4     reserved (uint32, zero)
    16      8     nrows (int64)
    24      8     ncols (int64)
    32      8     nnz (int64)
    40      ...   row offsets, (nrows + 1) x int64
                  column indices, nnz x int64
                  values, nnz x complex128 (real, imag interleaved)
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np
import scipy.sparse as sp

__all__ = ["SparseMatrix", "HERMITIAN_TOL", "DUMP_MAGIC", "DUMP_VERSION"]

HERMITIAN_TOL = 1e-12
DUMP_MAGIC = b"DSCSR\x00\x00\x00"
DUMP_VERSION = 1
_HEADER = struct.Struct("<8sII qqq")


class SparseMatrix:
    """Immutable complex CSR matrix that is checked to be Hermitian.

    Thin wrapper around :class:`scipy.sparse.csr_matrix`; explicit zeros are
    dropped and indices sorted on construction, so two matrices with the same
    entries have identical storage.

    Parameters
    ----------
    matrix : scipy sparse matrix or array-like
    check_hermitian : bool
        Verify ``max |A - A^dag| <= HERMITIAN_TOL`` (absolute).
    """

    __slots__ = ("_csr",)

    def __init__(self, matrix, check_hermitian: bool = True):
        csr = sp.csr_matrix(matrix, dtype=np.complex128, copy=True)
        csr.eliminate_zeros()
        csr.sort_indices()
        csr.sum_duplicates()
        if csr.shape[0] != csr.shape[1]:
            raise ValueError(f"matrix must be square, got shape {csr.shape}")
        for arr in (csr.data, csr.indices, csr.indptr):
            arr.flags.writeable = False
        self._csr = csr
        if check_hermitian:
            err = self.hermiticity_error()
            if err > HERMITIAN_TOL:
                raise ValueError(f"matrix is not Hermitian: max |A - A^dag| = {err:.3e}")

    # storage views -------------------------------------------------------
    @property
    def csr(self) -> sp.csr_matrix:
        return self._csr

    @property
    def row_offsets(self) -> np.ndarray:
        return self._csr.indptr

    @property
    def col_indices(self) -> np.ndarray:
        return self._csr.indices

    @property
    def values(self) -> np.ndarray:
        return self._csr.data

    @property
    def shape(self):
        return self._csr.shape

    @property
    def dim(self) -> int:
        return self._csr.shape[0]

    @property
    def nnz(self) -> int:
        return self._csr.nnz

    # algebra ---------------------------------------------------------------
    def matvec(self, v: np.ndarray) -> np.ndarray:
        return self._csr @ v

    __matmul__ = matvec

    def diagonal(self) -> np.ndarray:
        return self._csr.diagonal()

    def is_diagonal(self) -> bool:
        rows = np.repeat(np.arange(self.dim), np.diff(self._csr.indptr))
        return bool(np.all(rows == self._csr.indices))

    def hermiticity_error(self) -> float:
        diff = self._csr - self._csr.conj().T
        return float(np.abs(diff.data).max()) if diff.nnz else 0.0

    def to_dense(self) -> np.ndarray:
        return self._csr.toarray()

    def commutator_max(self, other: "SparseMatrix") -> float:
        """``max |[A, B]|`` over entries."""
        c = self._csr @ other.csr - other.csr @ self._csr
        return float(np.abs(c.data).max()) if c.nnz else 0.0

    def __repr__(self):
        return f"SparseMatrix(dim={self.dim}, nnz={self.nnz})"

    # binary dump -----------------------------------------------------------
    def dump(self, path) -> None:
        csr = self._csr
        header = _HEADER.pack(DUMP_MAGIC, DUMP_VERSION, 0, csr.shape[0], csr.shape[1], csr.nnz)
        with open(path, "wb") as fh:
            fh.write(header)
            fh.write(np.asarray(csr.indptr, dtype="<i8").tobytes())
            fh.write(np.asarray(csr.indices, dtype="<i8").tobytes())
            fh.write(np.asarray(csr.data, dtype="<c16").tobytes())

    @classmethod
    def load(cls, path, check_hermitian: bool = True) -> "SparseMatrix":
        raw = Path(path).read_bytes()
        if len(raw) < _HEADER.size:
            raise ValueError("file too short for a sparse-matrix header")
        magic, version, _, nrows, ncols, nnz = _HEADER.unpack_from(raw, 0)
        if magic != DUMP_MAGIC:
            raise ValueError(f"bad magic {magic!r}")
        if version != DUMP_VERSION:
            raise ValueError(f"unsupported dump version {version}")
        expected = _HEADER.size + 8 * (nrows + 1) + 8 * nnz + 16 * nnz
        if len(raw) != expected:
            raise ValueError(f"file size {len(raw)} does not match header ({expected})")
        off = _HEADER.size
        indptr = np.frombuffer(raw, "<i8", nrows + 1, off)
        off += 8 * (nrows + 1)
        indices = np.frombuffer(raw, "<i8", nnz, off)
        off += 8 * nnz
        data = np.frombuffer(raw, "<c16", nnz, off)
        csr = sp.csr_matrix((data, indices, indptr), shape=(nrows, ncols))
        return cls(csr, check_hermitian=check_hermitian)
