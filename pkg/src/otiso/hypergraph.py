"""Spectral isomorphism testing for 3-uniform tripartite hypergraphs.

A hypergraph on parts of sizes (l, m, n) is encoded as the real tensor with
+1 on edges and -1 elsewhere.  Relabelling the parts acts on the tensor by
permutation matrices, so the orbit machinery applies; with simple Gram
spectra the permutations can be read off the eigenvector rows directly, and
every YES is re-checked combinatorially on the edge sets.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, FormatError
from .spectral import eig_hermitian
from .tensor import Tensor3, generator, gram

# Absolute tolerance for declaring two Gram spectra equal; adjacency
# spectra of isomorphic hypergraphs agree exactly in exact arithmetic.
SPECTRA_TOL = 1e-8

# Minimum lead of the best row match over the runner-up before the
# permutation extraction is trusted.
AMBIGUITY_MARGIN = 1e-6

# Tolerance for the signed-permutation consistency check on eigenvector
# columns (unit vectors; eigensolver noise is orders below this).
SIGN_MATCH_TOL = 1e-6


@dataclass(frozen=True)
class TripartiteHypergraph:
    """Part sizes plus a set of edges, stored 0-based."""

    part_sizes: tuple[int, int, int]
    edges: frozenset

    def __init__(self, part_sizes, edges):
        sizes = tuple(int(s) for s in part_sizes)
        if len(sizes) != 3 or any(s < 1 for s in sizes):
            raise DimensionMismatch(f"part sizes must be three positive integers, got {part_sizes!r}")
        edge_list = [tuple(int(v) for v in e) for e in edges]
        seen = set()
        for e in edge_list:
            if len(e) != 3:
                raise FormatError(f"edge {e!r} is not a triple")
            if not all(0 <= e[d] < sizes[d] for d in range(3)):
                raise FormatError(f"edge {e!r} out of range for part sizes {sizes}")
            if e in seen:
                raise FormatError(f"duplicate edge {e!r}")
            seen.add(e)
        object.__setattr__(self, "part_sizes", sizes)
        object.__setattr__(self, "edges", frozenset(edge_list))

    @property
    def edge_count(self) -> int:
        return len(self.edges)


@dataclass(frozen=True)
class PermTriple:
    """Three permutations, one per part, as image tuples: perms[d][i] is where i goes."""

    perms: tuple[tuple[int, ...], tuple[int, ...], tuple[int, ...]]

    def __init__(self, perms):
        ps = tuple(tuple(int(v) for v in p) for p in perms)
        if len(ps) != 3:
            raise DimensionMismatch("need exactly three permutations")
        for p in ps:
            if sorted(p) != list(range(len(p))):
                raise FormatError(f"{p!r} is not a permutation of 0..{len(p) - 1}")
        object.__setattr__(self, "perms", ps)

    def __getitem__(self, d: int):
        return self.perms[d]

    def apply(self, edge):
        i, j, k = edge
        return (self.perms[0][i], self.perms[1][j], self.perms[2][k])


@dataclass(frozen=True)
class HypergraphDecision:
    verdict: str  # "yes" | "no" | "cannot_decide"
    perms: PermTriple | None
    diagnostics: dict = field(default_factory=dict)


def adjacency_tensor(g: TripartiteHypergraph) -> Tensor3:
    """+1 on edges, -1 off edges."""
    arr = np.full(g.part_sizes, -1.0)
    for (i, j, k) in g.edges:
        arr[i, j, k] = 1.0
    return Tensor3(arr, "real")


def relabel(g: TripartiteHypergraph, pt: PermTriple) -> TripartiteHypergraph:
    for d in range(3):
        if len(pt[d]) != g.part_sizes[d]:
            raise DimensionMismatch(
                f"permutation lengths {tuple(len(p) for p in pt.perms)} do not match parts {g.part_sizes}"
            )
    return TripartiteHypergraph(g.part_sizes, {pt.apply(e) for e in g.edges})


def random_hypergraph(part_sizes, seed: int, edge_prob: float = 0.5, *, stream=()) -> TripartiteHypergraph:
    """Each potential edge included independently with probability edge_prob."""
    sizes = tuple(int(s) for s in part_sizes)
    rng = generator(seed, *stream)
    mask = rng.random(sizes) < edge_prob
    edges = {tuple(int(v) for v in idx) for idx in np.argwhere(mask)}
    return TripartiteHypergraph(sizes, edges)


def random_perm_triple(part_sizes, seed: int, *, stream=()) -> PermTriple:
    rng = generator(seed, *stream)
    return PermTriple(tuple(tuple(int(v) for v in rng.permutation(s)) for s in part_sizes))


def _match_rows(va: np.ndarray, vb: np.ndarray):
    """Row matching by absolute correlation.

    Rows of the two eigenvector matrices related by a signed permutation have
    matching |entry| profiles, so the correct image row scores exactly 1 and
    every other row strictly less.  Returns (perm, margin) or (None, margin)
    when ambiguous or non-bijective.
    """
    corr = np.abs(va) @ np.abs(vb).T
    perm = []
    margin = np.inf
    for r in range(corr.shape[0]):
        order = np.argsort(corr[r])[::-1]
        best = int(order[0])
        lead = corr[r, best] - (corr[r, int(order[1])] if corr.shape[1] > 1 else 0.0)
        margin = min(margin, float(lead))
        perm.append(best)
    if margin < AMBIGUITY_MARGIN or len(set(perm)) != len(perm):
        return None, margin
    return tuple(perm), margin


def _signed_match_defect(va: np.ndarray, vb: np.ndarray, perm) -> float:
    """Max over columns of the distance to the nearer of +/- the permuted column."""
    # vb with row p(r) moved back to position r:
    vb_back = vb[np.asarray(perm), :]
    defect = 0.0
    for c in range(va.shape[1]):
        d_plus = float(np.max(np.abs(vb_back[:, c] - va[:, c])))
        d_minus = float(np.max(np.abs(vb_back[:, c] + va[:, c])))
        defect = max(defect, min(d_plus, d_minus))
    return defect


def decide_hypergraph_iso(g: TripartiteHypergraph, h: TripartiteHypergraph) -> HypergraphDecision:
    """Spectral test with exact combinatorial confirmation.

    NO when some mode's Gram spectra disagree beyond SPECTRA_TOL, or when the
    extracted relabelling fails the exact edge-set check.  cannot_decide when
    a spectrum is too degenerate to pin its eigenbasis or the row matching is
    ambiguous.  YES always carries a PermTriple verified on the edge sets.
    """
    if g.part_sizes != h.part_sizes:
        raise DimensionMismatch(f"part sizes differ: {g.part_sizes} vs {h.part_sizes}")
    a = adjacency_tensor(g)
    b = adjacency_tensor(h)
    spectra = []
    diag: dict = {"spectra_dist": [], "min_gaps": [], "margins": []}
    for mode in (1, 2, 3):
        sa = eig_hermitian(gram(a, mode))
        sb = eig_hermitian(gram(b, mode))
        dist = float(np.max(np.abs(sa.eigenvalues - sb.eigenvalues)))
        diag["spectra_dist"].append(dist)
        spectra.append((sa, sb))
    if max(diag["spectra_dist"]) > SPECTRA_TOL:
        diag["step"] = "spectra"
        return HypergraphDecision("no", None, diag)
    for (sa, sb) in spectra:
        diag["min_gaps"].append(min(float(sa.min_gap), float(sb.min_gap)))
        if sa.min_gap <= sa.degeneracy_floor() or sb.min_gap <= sb.degeneracy_floor():
            diag["step"] = "degenerate_spectrum"
            return HypergraphDecision("cannot_decide", None, diag)
    perms = []
    for (sa, sb) in spectra:
        perm, margin = _match_rows(sa.vectors, sb.vectors)
        diag["margins"].append(margin)
        if perm is None:
            diag["step"] = "ambiguous_matching"
            return HypergraphDecision("cannot_decide", None, diag)
        defect = _signed_match_defect(sa.vectors, sb.vectors, perm)
        if defect > SIGN_MATCH_TOL:
            diag["step"] = "sign_structure"
            diag["sign_defect"] = defect
            return HypergraphDecision("cannot_decide", None, diag)
        perms.append(perm)
    pt = PermTriple(tuple(perms))
    if relabel(g, pt).edges == h.edges:
        diag["step"] = "verified"
        return HypergraphDecision("yes", pt, diag)
    diag["step"] = "edge_verification"
    return HypergraphDecision("no", None, diag)


def parse_hypergraph(text: str) -> TripartiteHypergraph:
    """Text format: first line 'l m n', then one 1-based edge 'i j k' per line."""
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if not lines:
        raise FormatError("empty hypergraph document")
    head = lines[0].split()
    if len(head) != 3:
        raise FormatError(f"header must be three part sizes, got {lines[0]!r}")
    try:
        sizes = tuple(int(v) for v in head)
    except ValueError as exc:
        raise FormatError(f"non-integer part size in {lines[0]!r}") from exc
    edges = []
    for ln in lines[1:]:
        toks = ln.split()
        if len(toks) != 3:
            raise FormatError(f"edge line must have three indices, got {ln!r}")
        try:
            e = tuple(int(v) - 1 for v in toks)
        except ValueError as exc:
            raise FormatError(f"non-integer index in {ln!r}") from exc
        edges.append(e)
    return TripartiteHypergraph(sizes, edges)


def format_hypergraph(g: TripartiteHypergraph) -> str:
    """Inverse of parse_hypergraph; edges written sorted for stable output."""
    out = ["{} {} {}".format(*g.part_sizes)]
    for (i, j, k) in sorted(g.edges):
        out.append(f"{i + 1} {j + 1} {k + 1}")
    return "\n".join(out) + "\n"


def read_hypergraph(path) -> TripartiteHypergraph:
    with open(path, "r", encoding="ascii") as fh:
        return parse_hypergraph(fh.read())


def write_hypergraph(g: TripartiteHypergraph, path) -> None:
    with open(path, "w", encoding="ascii") as fh:
        fh.write(format_hypergraph(g))
