"""Independent oracles and hypothesis strategies shared by the test suite.

The oracles deliberately use slow, obviously-correct algorithms (scan-based
free reduction, raw letter expansion, tree medians from the four-point
distance formula) so they share no code path with the package.
"""

from __future__ import annotations

import numpy as np
from hypothesis import strategies as st

from gapcert.words import BoundaryPoint, Letter, ReducedWord

# ---------------------------------------------------------------------------
# word oracles


def naive_reduce(letters) -> tuple[Letter, ...]:
    """Quadratic free reduction by repeated single-pair cancellation."""
    out = list(letters)
    changed = True
    while changed:
        changed = False
        for i in range(len(out) - 1):
            if out[i] == out[i + 1].inverse():
                del out[i : i + 2]
                changed = True
                break
    return tuple(out)


def naive_inverse(letters) -> tuple[Letter, ...]:
    return tuple(l.inverse() for l in reversed(letters))


def naive_distance(u: ReducedWord, v: ReducedWord) -> int:
    """Tree distance between vertices: length of the reduced word u^-1 v."""
    return len(naive_reduce(naive_inverse(u.letters) + v.letters))


def naive_median(u: ReducedWord, v: ReducedWord, w: ReducedWord) -> ReducedWord:
    """The unique tree vertex lying on all three geodesics between u, v, w."""
    d_uv = naive_distance(u, v)
    d_uw = naive_distance(u, w)
    d_vw = naive_distance(v, w)
    k = (d_uv + d_uw - d_vw) // 2  # distance from u to the median
    path = naive_reduce(naive_inverse(u.letters) + v.letters)[:k]
    return ReducedWord(naive_reduce(u.letters + path))


def expand_point(pre, per, n: int) -> tuple[Letter, ...]:
    """First n letters of the infinite word pre.(per)^inf, from raw pieces."""
    out = list(pre)
    i = 0
    while len(out) < n:
        out.append(per[i % len(per)])
        i += 1
    return tuple(out[:n])


def point_letters(x: BoundaryPoint, n: int) -> tuple[Letter, ...]:
    return tuple(x.letter_at(i) for i in range(n))


# ---------------------------------------------------------------------------
# linear algebra oracles


def singular_values_eig(a: np.ndarray) -> np.ndarray:
    """Singular values via the symmetric eigenproblem of a^T a, descending."""
    w = np.linalg.eigvalsh(a.T @ a)
    return np.sqrt(np.clip(w, 0.0, None))[::-1]


def grassmann_distance_projectors(f: np.ndarray, g: np.ndarray) -> float:
    """Largest principal angle sine as the 2-norm of the projector difference."""

    def proj(frame):
        q, _ = np.linalg.qr(frame)
        return q @ q.T

    return float(np.linalg.norm(proj(f) - proj(g), 2))


def random_invertible(rng, dim: int, spread: float = 2.0) -> np.ndarray:
    """Well-conditioned random invertible matrix with log-uniform spectrum."""
    q1, _ = np.linalg.qr(rng.normal(size=(dim, dim)))
    q2, _ = np.linalg.qr(rng.normal(size=(dim, dim)))
    return q1 @ np.diag(np.exp(rng.uniform(-spread, spread, size=dim))) @ q2


def random_orthonormal_frame(rng, dim: int, k: int) -> np.ndarray:
    q, _ = np.linalg.qr(rng.normal(size=(dim, k)))
    return q


def top_eigenspace(matrix: np.ndarray, k: int) -> np.ndarray:
    """Orthonormal basis of the span of the k largest-modulus eigenvectors.

    Independent oracle route: eigen-decomposition instead of iterated
    singular frames.  Requires |eigval_k| > |eigval_{k+1}| and the top-k
    eigenvalues to be real (enough for the test matrices used here).
    """
    vals, vecs = np.linalg.eig(matrix)
    order = np.argsort(-np.abs(vals))
    vals, vecs = vals[order], vecs[:, order]
    assert abs(vals[k - 1]) > abs(vals[k]) * (1 + 1e-9), "no modulus gap"
    top = vecs[:, :k]
    assert np.max(np.abs(top.imag)) < 1e-9, "top eigenvectors not real"
    q, _ = np.linalg.qr(top.real)
    return q


def word_matrix(rep, w) -> np.ndarray:
    """Plain float product of the letter images, no rescaling."""
    out = np.eye(rep.dim)
    for letter in w:
        out = out @ rep.image(letter)
    return out


# ---------------------------------------------------------------------------
# hypothesis strategies


def letters(rank: int = 2):
    return st.builds(Letter, st.integers(1, rank), st.sampled_from((1, -1)))


@st.composite
def reduced_words(draw, rank: int = 2, min_len: int = 0, max_len: int = 8):
    n = draw(st.integers(min_len, max_len))
    out: list[Letter] = []
    for _ in range(n):
        l = draw(letters(rank))
        if out and l == out[-1].inverse():
            l = l.inverse()  # flip instead of cancelling; keeps length exact
        out.append(l)
    return ReducedWord(tuple(out))


@st.composite
def cyclically_reduced_words(draw, rank: int = 2, min_len: int = 1, max_len: int = 6):
    keep = list(draw(reduced_words(rank, max(min_len, 1), max_len)).letters)
    while len(keep) >= 2 and keep[0] == keep[-1].inverse():
        keep.pop()
    return ReducedWord(tuple(keep))


@st.composite
def boundary_points(draw, rank: int = 2, max_pre: int = 4, max_per: int = 4):
    per = draw(cyclically_reduced_words(rank, 1, max_per))
    pre = draw(reduced_words(rank, 0, max_pre))
    keep = list(pre.letters)
    while keep and keep[-1] == per.letters[0].inverse():
        keep.pop()  # drop letters that would cancel into the period
    return BoundaryPoint(ReducedWord(tuple(keep)), per)
