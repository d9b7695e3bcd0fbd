"""Fixed-S_z Fock space, Hamiltonian assembly, spectra and state classification.

Sign convention: spin-orbital modes are ordered up-spin orbitals first, then
down-spin, each by ascending orbital index. A basis state is
c+_{m1} c+_{m2} ... |vac> with m1 < m2 < ..., and applying c_j or c+_j picks up
(-1) ** (number of occupied modes below j).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations

import numpy as np
from scipy.optimize import linear_sum_assignment

from .integrals import MODES, HubbardParams, restrict_nearest_neighbor

DOMINANCE_THRESHOLD = 0.8
TIE_TOLERANCE = 1e-6
TRACKING_FLOOR = 0.5
DEGENERACY_TOL = 1e-9  # meV


class EigensolverError(RuntimeError):
    pass


# ---------------------------------------------------------------- Fock space

@dataclass(frozen=True)
class FockState:
    up: tuple[int, ...]
    down: tuple[int, ...]
    mask: int


@dataclass(frozen=True)
class FockSpace:
    n_orb: int
    n_up: int
    n_down: int
    states: tuple[FockState, ...] = field(repr=False, compare=False, default=())

    @property
    def dim(self) -> int:
        return len(self.states)

    def up_mode(self, k: int) -> int:
        return k

    def down_mode(self, k: int) -> int:
        return self.n_orb + k

    def mode(self, k: int, spin: int) -> int:
        """spin 0 is up, 1 is down."""
        return k + spin * self.n_orb

    def index(self, mask: int) -> int:
        return _index_map(self)[mask]


@lru_cache(maxsize=None)
def fock_space(n_orb: int = 4, n_up: int = 2, n_down: int = 2) -> FockSpace:
    """All configurations, lexicographic in the up tuple then the down tuple."""
    states = []
    for up in combinations(range(n_orb), n_up):
        for down in combinations(range(n_orb), n_down):
            mask = sum(1 << k for k in up) | sum(1 << (n_orb + k) for k in down)
            states.append(FockState(up, down, mask))
    return FockSpace(n_orb, n_up, n_down, tuple(states))


@lru_cache(maxsize=None)
def _index_map(space: FockSpace) -> dict[int, int]:
    return {s.mask: i for i, s in enumerate(space.states)}


def apply(ops, mask: int):
    """Apply a product of ladder operators, rightmost first.

    ``ops`` is a sequence of (mode, dagger). Returns (sign, mask) or None when the
    state is annihilated.
    """
    sign = 1
    for mode, dagger in reversed(ops):
        bit = 1 << mode
        if bool(mask & bit) == dagger:
            return None
        if bin(mask & (bit - 1)).count("1") & 1:
            sign = -sign
        mask ^= bit
    return sign, mask


def operator_matrix(space: FockSpace, terms) -> np.ndarray:
    """Dense matrix of sum_i coeff_i * ops_i restricted to ``space``.

    Terms leaving the space are dropped; callers only pass number-conserving,
    S_z-conserving products.
    """
    index = _index_map(space)
    M = np.zeros((space.dim, space.dim))
    for coeff, ops in terms:
        if coeff == 0:
            continue
        for j, st in enumerate(space.states):
            out = apply(ops, st.mask)
            if out is not None and out[1] in index:
                M[index[out[1]], j] += coeff * out[0]
    return M


def c_dag(mode):
    return (mode, True)


def c(mode):
    return (mode, False)


@lru_cache(maxsize=None)
def _one_body_basis(space: FockSpace) -> np.ndarray:
    n = space.n_orb
    E = np.zeros((n, n, space.dim, space.dim))
    for p in range(n):
        for q in range(n):
            E[p, q] = operator_matrix(space, [(1.0, [c_dag(space.mode(p, s)), c(space.mode(q, s))])
                                              for s in (0, 1)])
    E.setflags(write=False)
    return E


@lru_cache(maxsize=None)
def _two_body_basis(space: FockSpace) -> np.ndarray:
    n = space.n_orb
    E = np.zeros((n, n, n, n, space.dim, space.dim))
    for p in range(n):
        for q in range(n):
            for r in range(n):
                for s in range(n):
                    terms = [(0.5, [c_dag(space.mode(p, a)), c_dag(space.mode(q, b)),
                                    c(space.mode(s, b)), c(space.mode(r, a))])
                             for a in (0, 1) for b in (0, 1)]
                    E[p, q, r, s] = operator_matrix(space, terms)
    E.setflags(write=False)
    return E


def spin_squared(space: FockSpace) -> np.ndarray:
    """Total S^2 = Sz^2 + (S+S- + S-S+)/2 on the space."""
    n = space.n_orb
    sz = operator_matrix(space, [(0.5 * (1 - 2 * s), [c_dag(space.mode(k, s)), c(space.mode(k, s))])
                                 for k in range(n) for s in (0, 1)])
    # S+ S- and S- S+ as two-operator products summed over site pairs
    terms = []
    for i in range(n):
        for j in range(n):
            up_i, dn_i, up_j, dn_j = (space.mode(i, 0), space.mode(i, 1),
                                      space.mode(j, 0), space.mode(j, 1))
            terms.append((0.5, [c_dag(up_i), c(dn_i), c_dag(dn_j), c(up_j)]))
            terms.append((0.5, [c_dag(dn_i), c(up_i), c_dag(up_j), c(dn_j)]))
    return sz @ sz + operator_matrix(space, terms)


# ---------------------------------------------------------------- assembly

@dataclass(frozen=True)
class ManyBodyHamiltonian:
    matrix: np.ndarray
    mode: str


def assemble_from_integrals(h: np.ndarray, V: np.ndarray, space: FockSpace | None = None) -> np.ndarray:
    """sum h_pq c+_p c_q + 1/2 sum V_pqrs c+_p c+_q c_s c_r over both spins."""
    space = space or fock_space(h.shape[0])
    H = np.einsum("pq,pqij->ij", h, _one_body_basis(space), optimize=True)
    H += np.einsum("pqrs,pqrsij->ij", V, _two_body_basis(space), optimize=True)
    return 0.5 * (H + H.T)


def hubbard_terms(p: HubbardParams, space: FockSpace):
    """Operator terms of the chain Hubbard Hamiltonian in second-quantised form."""
    n = p.n_sites
    up = lambda k: space.mode(k, 0)
    dn = lambda k: space.mode(k, 1)
    m = lambda k, s: space.mode(k, s)
    terms = []
    for k in range(n):
        for s in (0, 1):
            terms.append((p.eps[k], [c_dag(m(k, s)), c(m(k, s))]))
        terms.append((p.U[k], [c_dag(up(k)), c(up(k)), c_dag(dn(k)), c(dn(k))]))
    for k in range(n - 1):
        k1 = k + 1
        for s in (0, 1):
            terms.append((p.t[k], [c_dag(m(k, s)), c(m(k1, s))]))
            terms.append((p.t[k], [c_dag(m(k1, s)), c(m(k, s))]))
            for s2 in (0, 1):
                terms.append((p.Unn[k], [c_dag(m(k, s)), c(m(k, s)), c_dag(m(k1, s2)), c(m(k1, s2))]))
                terms.append((-p.Je[k], [c_dag(m(k, s)), c_dag(m(k1, s2)), c(m(k1, s)), c(m(k, s2))]))
            sbar = 1 - s
            for col, i in enumerate((k, k1)):
                # -J^{t,i} n_{i s} c+_{k sbar} c_{k+1 sbar} + h.c.
                n_is = [c_dag(m(i, s)), c(m(i, s))]
                terms.append((-p.Jt[k, col], n_is + [c_dag(m(k, sbar)), c(m(k1, sbar))]))
                terms.append((-p.Jt[k, col], [c_dag(m(k1, sbar)), c(m(k, sbar))] + n_is))
        pair = [c_dag(up(k1)), c_dag(dn(k1)), c(up(k)), c(dn(k))]
        terms.append((-p.Jp[k], pair))
        terms.append((-p.Jp[k], [c_dag(dn(k)), c_dag(up(k)), c(dn(k1)), c(up(k1))]))
    return terms


def assemble_hubbard(p: HubbardParams, space: FockSpace | None = None) -> np.ndarray:
    space = space or fock_space(p.n_sites)
    H = operator_matrix(space, hubbard_terms(p, space))
    return 0.5 * (H + H.T)


def assemble(source, mode: str = "hubbard-nn", space: FockSpace | None = None) -> ManyBodyHamiltonian:
    """Build the many-body Hamiltonian.

    ``source`` is a HubbardParams (hubbard-nn only) or an ``Integrals`` /
    ``(h, V)`` pair, which is truncated to nearest-neighbour terms in hubbard-nn mode.
    """
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}; expected one of {MODES}")
    if isinstance(source, HubbardParams):
        if mode != "hubbard-nn":
            raise ValueError("HubbardParams only supports the hubbard-nn mode")
        return ManyBodyHamiltonian(assemble_hubbard(source, space), mode)
    if hasattr(source, "for_mode"):
        h, V = source.for_mode(mode)
    else:
        h, V = source
        if mode == "hubbard-nn":
            h, V = restrict_nearest_neighbor(h, V)
    return ManyBodyHamiltonian(assemble_from_integrals(h, V, space), mode)


# ---------------------------------------------------------------- spectrum

@dataclass
class SpectrumResult:
    energies: np.ndarray
    vectors: np.ndarray  # columns are eigenvectors
    compositions: dict[str, np.ndarray] = field(default_factory=dict)
    tracked_ids: np.ndarray | None = None


def diagonalize(H) -> SpectrumResult:
    M = H.matrix if isinstance(H, ManyBodyHamiltonian) else np.asarray(H)
    if not np.all(np.isfinite(M)):
        raise EigensolverError("Hamiltonian has non-finite entries")
    try:
        w, v = np.linalg.eigh(M)
    except np.linalg.LinAlgError as exc:
        raise EigensolverError(str(exc)) from exc
    if not (np.all(np.isfinite(w)) and np.all(np.isfinite(v))):
        raise EigensolverError("eigensolver returned non-finite values")
    # fix the arbitrary eigenvector sign: largest component positive
    lead = np.argmax(np.abs(v), axis=0)
    v = v * np.sign(v[lead, np.arange(v.shape[1])])
    return SpectrumResult(w, v)


# ---------------------------------------------------------------- labels

def _pair_terms(kind: str, i: int, j: int):
    """Two-electron states on dots (i, j) as [(coeff, [(orb, spin), ...])]."""
    r = 1 / np.sqrt(2)
    table = {
        "S(11)": [(r, [(i, 0), (j, 1)]), (-r, [(i, 1), (j, 0)])],
        "T(11)": [(r, [(i, 0), (j, 1)]), (r, [(i, 1), (j, 0)])],
        "S(20)": [(1.0, [(i, 0), (i, 1)])],
        "S(02)": [(1.0, [(j, 0), (j, 1)])],
    }
    return table[kind]


def state_vector(space: FockSpace, terms) -> np.ndarray:
    """Vector of sum coeff * c+_{o1} c+_{o2} ... |vac> (operators applied right to left)."""
    vec = np.zeros(space.dim)
    index = _index_map(space)
    for coeff, orbs in terms:
        out = apply([c_dag(space.mode(k, s)) for k, s in orbs], 0)
        if out is None:
            continue
        vec[index[out[1]]] += coeff * out[0]
    return vec


def product_label(space: FockSpace, left: str, right: str, pairs=((0, 1), (2, 3))) -> np.ndarray:
    terms = [(cl * cr, ol + orr) for cl, ol in _pair_terms(left, *pairs[0])
             for cr, orr in _pair_terms(right, *pairs[1])]
    return state_vector(space, terms)


PAIR_KINDS = ("S(11)", "S(20)", "S(02)", "T(11)")


def standard_labels(space: FockSpace | None = None) -> dict[str, np.ndarray]:
    """Product labels X_L Y_R over the four-dot space plus S(uudd)."""
    space = space or fock_space()
    labels = {f"{x}{y}": product_label(space, x, y) for x in PAIR_KINDS for y in PAIR_KINDS}
    r = 1 / np.sqrt(2)
    labels["S(uudd)"] = state_vector(space, [(r, [(0, 0), (1, 0), (2, 1), (3, 1)]),
                                             (-r, [(0, 1), (1, 1), (2, 0), (3, 0)])])
    return labels


@dataclass(frozen=True)
class Classification:
    """Composition of every eigenstate and the eigenstates picked for each branch."""

    weights: dict[str, np.ndarray]   # label -> |<label|Psi_j>|^2 over j
    branch_index: dict[str, int]
    dominance: dict[str, float]
    ambiguous: dict[str, bool]


def composition(result: SpectrumResult, labels: dict[str, np.ndarray]) -> dict[str, np.ndarray]:
    out = {}
    for name, vec in labels.items():
        nrm = np.linalg.norm(vec)
        if not np.isclose(nrm, 1.0, atol=1e-10):
            raise ValueError(f"label {name} is not normalised (|v|={nrm})")
        out[name] = (vec @ result.vectors) ** 2
    return out


def classify(result: SpectrumResult, labels: dict[str, np.ndarray],
             references: dict[str, np.ndarray] | None = None) -> Classification:
    """Weights of every eigenstate on ``labels`` and the best match for each reference.

    ``references`` maps branch names to reference vectors (defaults to ``labels``);
    the branch's eigenstate is the one with maximal weight, its dominance that weight.
    A branch whose two best candidates tie within TIE_TOLERANCE is flagged ambiguous.
    """
    weights = composition(result, labels)
    refs = composition(result, references) if references is not None else weights
    result.compositions.update(weights)
    cluster = degenerate_clusters(result.energies)
    n_cl = cluster.max() + 1
    idx, dom, amb = {}, {}, {}
    for name, w in refs.items():
        # inside an exactly degenerate eigenspace the eigenvector basis is arbitrary,
        # so the weight is taken on the whole eigenspace
        cw = np.bincount(cluster, weights=w, minlength=n_cl)
        order = np.argsort(-cw, kind="stable")
        members = np.flatnonzero(cluster == order[0])
        idx[name] = int(members[np.argmax(w[members])])
        dom[name] = float(cw[order[0]])
        amb[name] = bool(n_cl > 1 and cw[order[0]] - cw[order[1]] <= TIE_TOLERANCE)
    return Classification(weights, idx, dom, amb)


def degenerate_clusters(energies, tol: float = DEGENERACY_TOL) -> np.ndarray:
    """Cluster label of each (ascending) eigenvalue; neighbours closer than ``tol`` share one."""
    e = np.asarray(energies)
    return np.concatenate([[0], np.cumsum(np.diff(e) > tol)]).astype(int)


# ---------------------------------------------------------------- tracking

@dataclass(frozen=True)
class Tracking:
    assignment: np.ndarray  # assignment[i] = current index continuing previous state i
    lost: bool


def track_sweep(previous: np.ndarray, current: np.ndarray,
                prev_energies=None, curr_energies=None) -> Tracking:
    """Continue eigenstates between neighbouring sweep points by maximal overlap.

    Maximises sum |<prev_i|curr_a(i)>|^2 over permutations. Ties go to the lower
    energy ordering because candidates are scanned in ascending order.
    """
    ov = (previous.T @ current) ** 2
    # tiny energy-order bias gives deterministic tie breaking
    n = ov.shape[0]
    bias = 1e-12 * np.abs(np.arange(n)[:, None] - np.arange(n)[None, :])
    rows, cols = linear_sum_assignment(-(ov - bias))
    assignment = np.empty(n, dtype=int)
    assignment[rows] = cols
    lost = bool(np.min(ov[rows, cols]) < TRACKING_FLOOR)
    return Tracking(assignment, lost)


def track_series(vectors_list) -> tuple[np.ndarray, np.ndarray]:
    """Continuation ids along a sweep.

    Returns ``ids`` with ids[p, j] = branch id of eigenstate j at point p (ids at the
    first point are the energy ranks) and a per-point tracking-loss flag.
    """
    npts = len(vectors_list)
    dim = vectors_list[0].shape[1]
    ids = np.empty((npts, dim), dtype=int)
    lost = np.zeros(npts, dtype=bool)
    ids[0] = np.arange(dim)
    for p in range(1, npts):
        tr = track_sweep(vectors_list[p - 1], vectors_list[p])
        ids[p, tr.assignment] = ids[p - 1]
        lost[p] = tr.lost
    return ids, lost


# ---------------------------------------------------------------- exchange

@dataclass(frozen=True)
class SpectralExchange:
    value: float
    valid: bool
    dominance_singlet: float
    dominance_triplet: float


def exchange_from_energies(result: SpectrumResult, cls: Classification,
                           singlet: str = "SS", triplet: str = "TS",
                           threshold: float = DOMINANCE_THRESHOLD) -> SpectralExchange:
    """E(triplet-like) - E(singlet-like); valid only when both branches dominate."""
    i, j = cls.branch_index[singlet], cls.branch_index[triplet]
    ds, dt = cls.dominance[singlet], cls.dominance[triplet]
    valid = (ds >= threshold and dt >= threshold and i != j
             and not cls.ambiguous[singlet] and not cls.ambiguous[triplet])
    return SpectralExchange(float(result.energies[j] - result.energies[i]), bool(valid), ds, dt)
