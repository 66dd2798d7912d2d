"""Hot numeric kernels with a numba path and a pure-numpy path.

The numba path is used when numba imports and ``BOXROBUST_NUMBA`` is not set
to ``0``.  Both paths compute the same quantities; the numpy path delegates
the eigenproblem to LAPACK through ``numpy.linalg``.

Set ``BOXROBUST_NUMBA=0`` before import to force the numpy path.  At runtime
``set_backend("numpy" | "numba")`` switches between them (used by the
benchmark and by the cross-backend tests).
"""

import os

import numpy as np

try:
    from numba import njit

    NUMBA_AVAILABLE = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    NUMBA_AVAILABLE = False

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f


_BACKEND = "numba" if NUMBA_AVAILABLE and os.environ.get("BOXROBUST_NUMBA", "1") != "0" else "numpy"

JACOBI_MAX_SWEEPS = 100


class ConvergenceFailure(RuntimeError):
    """The Jacobi eigensolver hit its sweep cap."""


def backend():
    return _BACKEND


def set_backend(name):
    global _BACKEND
    if name not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {name!r}")
    if name == "numba" and not NUMBA_AVAILABLE:
        raise RuntimeError("numba is not importable")
    _BACKEND = name


# ---------------------------------------------------------------------------
# Hermitian eigenproblem: cyclic complex Jacobi
# ---------------------------------------------------------------------------


@njit(cache=True)
def _jacobi_hermitian(H, max_sweeps):
    n = H.shape[0]
    A = H.copy()
    V = np.eye(n, dtype=np.complex128)
    scale = 0.0
    for i in range(n):
        for j in range(n):
            scale += A[i, j].real ** 2 + A[i, j].imag ** 2
    scale = np.sqrt(scale)
    if scale == 0.0:
        return np.zeros(n), V, 0
    threshold = 1e-15 * scale
    for sweep in range(max_sweeps):
        off = 0.0
        for p in range(n):
            for q in range(p + 1, n):
                off += A[p, q].real ** 2 + A[p, q].imag ** 2
        off = np.sqrt(2.0 * off)
        if off <= threshold:
            w = np.empty(n)
            for i in range(n):
                w[i] = A[i, i].real
            return w, V, sweep
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                mag = abs(apq)
                if mag < 1e-300:
                    continue
                phase = apq / mag
                app = A[p, p].real
                aqq = A[q, q].real
                theta = (aqq - app) / (2.0 * mag)
                if theta >= 0.0:
                    t = 1.0 / (theta + np.sqrt(1.0 + theta * theta))
                else:
                    t = -1.0 / (-theta + np.sqrt(1.0 + theta * theta))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                # G = diag-phase(q) then real rotation: columns p, q of A and V
                gpp = c + 0j
                gqp = -s * np.conj(phase)
                gpq = s + 0j
                gqq = c * np.conj(phase)
                for k in range(n):
                    akp = A[k, p]
                    akq = A[k, q]
                    A[k, p] = akp * gpp + akq * gqp
                    A[k, q] = akp * gpq + akq * gqq
                for k in range(n):
                    apk = A[p, k]
                    aqk = A[q, k]
                    A[p, k] = np.conj(gpp) * apk + np.conj(gqp) * aqk
                    A[q, k] = np.conj(gpq) * apk + np.conj(gqq) * aqk
                A[p, q] = 0.0
                A[q, p] = 0.0
                A[p, p] = A[p, p].real
                A[q, q] = A[q, q].real
                for k in range(n):
                    vkp = V[k, p]
                    vkq = V[k, q]
                    V[k, p] = vkp * gpp + vkq * gqp
                    V[k, q] = vkp * gpq + vkq * gqq
    return np.zeros(n), V, -1


def eigh(H):
    """Eigenvalues (descending) and orthonormal eigenvector columns."""
    H = np.ascontiguousarray(H, dtype=np.complex128)
    if _BACKEND == "numba":
        w, V, sweeps = _jacobi_hermitian(H, JACOBI_MAX_SWEEPS)
        if sweeps < 0:
            raise ConvergenceFailure(f"Jacobi did not converge in {JACOBI_MAX_SWEEPS} sweeps")
    else:
        w, V = np.linalg.eigh(H)
    order = np.argsort(-w, kind="stable")
    return w[order], V[:, order]


@njit(cache=True)
def _trace_norms_jacobi(stack, max_sweeps):
    m = stack.shape[0]
    out = np.empty(m)
    for i in range(m):
        w, _, sweeps = _jacobi_hermitian(stack[i], max_sweeps)
        if sweeps < 0:
            out[i] = np.nan
        else:
            out[i] = np.abs(w).sum()
    return out


def trace_norms(stack):
    """Trace norms of a stack of Hermitian matrices, shape (m, n, n)."""
    stack = np.ascontiguousarray(stack, dtype=np.complex128)
    if _BACKEND == "numba":
        out = _trace_norms_jacobi(stack, JACOBI_MAX_SWEEPS)
        if np.isnan(out).any():
            raise ConvergenceFailure("Jacobi did not converge on a batch member")
        return out
    return np.abs(np.linalg.eigvalsh(stack)).sum(axis=-1)


# ---------------------------------------------------------------------------
# Born map: p[x, y, a, b] = Tr((M[x, a] (x) N[y, b]) O)
# ---------------------------------------------------------------------------


@njit(cache=True)
def _born_loops(O4, M, N):
    nX, nA, dA, _ = M.shape
    nY, nB, dB, _ = N.shape
    p = np.zeros((nX, nY, nA, nB))
    for x in range(nX):
        for a in range(nA):
            for y in range(nY):
                for b in range(nB):
                    acc = 0.0 + 0.0j
                    for i in range(dA):
                        for j in range(dA):
                            m = M[x, a, i, j]
                            if m == 0:
                                continue
                            for k in range(dB):
                                for l in range(dB):
                                    acc += m * N[y, b, k, l] * O4[j, l, i, k]
                    p[x, y, a, b] = acc.real
    return p


def born(O, dims, M, N):
    """M has shape (nX, nA, dA, dA); N has shape (nY, nB, dB, dB)."""
    dA, dB = dims
    O4 = np.ascontiguousarray(O, dtype=np.complex128).reshape(dA, dB, dA, dB)
    M = np.ascontiguousarray(M, dtype=np.complex128)
    N = np.ascontiguousarray(N, dtype=np.complex128)
    if _BACKEND == "numba":
        return _born_loops(O4, M, N)
    return np.einsum("xaij,ybkl,jlik->xyab", M, N, O4, optimize=True).real


# ---------------------------------------------------------------------------
# Deterministic vertices of the local polytope as columns of a matrix
# ---------------------------------------------------------------------------


@njit(cache=True)
def _vertex_matrix_loops(nX, nY, nA, nB):
    nf = nA**nX
    ng = nB**nY
    D = np.zeros((nX * nY * nA * nB, nf * ng))
    fdig = np.empty(nX, dtype=np.int64)
    gdig = np.empty(nY, dtype=np.int64)
    for f in range(nf):
        r = f
        for x in range(nX - 1, -1, -1):
            fdig[x] = r % nA
            r //= nA
        for g in range(ng):
            r = g
            for y in range(nY - 1, -1, -1):
                gdig[y] = r % nB
                r //= nB
            col = f * ng + g
            for x in range(nX):
                for y in range(nY):
                    D[((x * nY + y) * nA + fdig[x]) * nB + gdig[y], col] = 1.0
    return D


def _digits(n_values, base, width):
    # row k holds the base-`base` digits of k, most significant first
    k = np.arange(n_values)
    powers = base ** np.arange(width - 1, -1, -1)
    return (k[:, None] // powers[None, :]) % base


def vertex_matrix(nX, nY, nA, nB):
    """Column f * nB**nY + g is the deterministic box a = f(x), b = g(y)."""
    if _BACKEND == "numba":
        return _vertex_matrix_loops(nX, nY, nA, nB)
    F = _digits(nA**nX, nA, nX)  # (nf, nX)
    G = _digits(nB**nY, nB, nY)  # (ng, nY)
    alice = (F[:, :, None] == np.arange(nA)).astype(float)  # (nf, nX, nA)
    bob = (G[:, :, None] == np.arange(nB)).astype(float)  # (ng, nY, nB)
    D = np.einsum("fxa,gyb->xyabfg", alice, bob)
    return D.reshape(nX * nY * nA * nB, -1)


# ---------------------------------------------------------------------------
# Classical wiring
# ---------------------------------------------------------------------------


@njit(cache=True)
def _wire_loops(p, side, apre, apost, bpre, bpost):
    nX2, nSA, nX = apre.shape
    nY2, nSB, nY = bpre.shape
    nA = apost.shape[2]
    nA2 = apost.shape[3]
    nB = bpost.shape[2]
    nB2 = bpost.shape[3]
    out = np.zeros((nX2, nY2, nA2, nB2))
    for x2 in range(nX2):
        for y2 in range(nY2):
            for sa in range(nSA):
                for sb in range(nSB):
                    w = side[x2, y2, sa, sb]
                    if w == 0.0:
                        continue
                    for x in range(nX):
                        px = apre[x2, sa, x]
                        if px == 0.0:
                            continue
                        for y in range(nY):
                            py = bpre[y2, sb, y]
                            if py == 0.0:
                                continue
                            for a in range(nA):
                                for b in range(nB):
                                    q = w * px * py * p[x, y, a, b]
                                    if q == 0.0:
                                        continue
                                    for a2 in range(nA2):
                                        for b2 in range(nB2):
                                            out[x2, y2, a2, b2] += q * apost[x2, sa, a, a2] * bpost[y2, sb, b, b2]
    return out


def wire(p, side, apre, apost, bpre, bpost):
    """side is indexed (x', y', sA, sB), already broadcast over inputs."""
    args = [np.ascontiguousarray(t, dtype=np.float64) for t in (p, side, apre, apost, bpre, bpost)]
    if _BACKEND == "numba":
        return _wire_loops(*args)
    p, side, apre, apost, bpre, bpost = args
    return np.einsum(
        "XYst,Xsx,Yty,xyab,Xsac,Ytbd->XYcd", side, apre, bpre, p, apost, bpost, optimize=True
    )
