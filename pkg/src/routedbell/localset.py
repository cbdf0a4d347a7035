"""Exact local-polytope machinery and hybrid classical/quantum adversary models.

Local deterministic vertices are enumerated lexicographically (Alice's
assignment varies slowest).  Membership runs through the phase-I simplex in
`simplex`, never through the conic solver, so polytope answers stay
independent of the interior-point code they are used to check.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .quantum import CHSH_SIGNS, PAULI_X, PAULI_Y, PAULI_Z
from .behavior import OUTCOME_LABELS, BehaviorTable
from .simplex import FeasibilityResult, convex_membership
from .util import fmt17, make_rng

VERTEX_GUARD = 10**6

PAULIS = np.stack([PAULI_X, PAULI_Y, PAULI_Z])
CHSH_XY_SIGNS = np.array(CHSH_SIGNS, dtype=float)
OUTCOME_SIGNS = np.array([1.0, -1.0])


@dataclass(frozen=True)
class Scenario:
    alice_inputs: int
    alice_outputs: int
    bob_inputs: int
    bob_outputs: int

    def __post_init__(self):
        for name, v in vars(self).items():
            if v < 1:
                raise ValueError(f"{name} must be positive")
        if self.n_vertices > VERTEX_GUARD:
            raise ValueError(
                f"scenario has {self.n_vertices} deterministic vertices, guard is {VERTEX_GUARD}"
            )

    @property
    def n_vertices(self) -> int:
        return (self.alice_outputs ** self.alice_inputs) * (self.bob_outputs ** self.bob_inputs)

    @property
    def table_shape(self) -> tuple[int, int, int, int]:
        return (self.alice_inputs, self.bob_inputs, self.alice_outputs, self.bob_outputs)


@dataclass(frozen=True)
class LocalVertex:
    index: int
    alice_fn: tuple[int, ...]  # outcome per Alice input
    bob_fn: tuple[int, ...]


def enumerate_vertices(s: Scenario) -> list[LocalVertex]:
    """All deterministic strategies, lexicographic in (alice_fn, bob_fn)."""
    vertices = []
    idx = 0
    for aa in itertools.product(range(s.alice_outputs), repeat=s.alice_inputs):
        for bb in itertools.product(range(s.bob_outputs), repeat=s.bob_inputs):
            vertices.append(LocalVertex(idx, aa, bb))
            idx += 1
    return vertices


def vertex_table(v: LocalVertex, s: Scenario) -> np.ndarray:
    """Deterministic behavior table [x, y, a, b] of one vertex."""
    t = np.zeros(s.table_shape)
    for x in range(s.alice_inputs):
        for y in range(s.bob_inputs):
            t[x, y, v.alice_fn[x], v.bob_fn[y]] = 1.0
    return t


@lru_cache(maxsize=16)
def _vertex_matrix(s: Scenario) -> np.ndarray:
    vs = enumerate_vertices(s)
    return np.stack([vertex_table(v, s).reshape(-1) for v in vs], axis=1)


def local_max(coeffs: np.ndarray, s: Scenario, const: float = 0.0) -> tuple[float, int]:
    """Exact maximum of a linear functional over the local polytope.

    `coeffs` is indexed [x, y, a, b].  Returns (value, index of the first
    maximizing vertex in enumeration order).
    """
    c = np.asarray(coeffs, dtype=float)
    if c.shape != s.table_shape:
        raise ValueError(f"coefficients must have shape {s.table_shape}, got {c.shape}")
    values = c.reshape(1, -1) @ _vertex_matrix(s)
    best = int(np.argmax(values[0]))
    return float(values[0, best] + const), best


@dataclass
class LocalityCertificate:
    is_member: bool
    lp_infeasibility: float
    weights: np.ndarray | None  # per-vertex convex weights when local
    functional: np.ndarray | None  # separating coefficients [x, y, a, b] when nonlocal
    offset: float | None  # exact max of the functional over the local polytope
    value: float | None  # functional evaluated on the queried table


def is_local(table: np.ndarray, s: Scenario, exact: bool = False,
             tol: float = 1e-9) -> LocalityCertificate:
    """LP membership of a behavior table [x, y, a, b] in the local polytope.

    When nonlocal, the returned functional separates: its value on the table
    exceeds `offset`, the exact maximum over deterministic vertices.
    """
    t = np.asarray(table)
    if t.shape != s.table_shape:
        raise ValueError(f"table must have shape {s.table_shape}, got {t.shape}")
    res: FeasibilityResult = convex_membership(_vertex_matrix(s), t.reshape(-1),
                                               exact=exact, tol=tol)
    if res.feasible:
        weights = np.asarray(res.weights, dtype=object if exact else float)
        return LocalityCertificate(True, res.infeasibility, weights, None, None, None)
    g = np.asarray(res.dual[:-1], dtype=float).reshape(s.table_shape)
    offset, _ = local_max(g, s)
    value = float(np.sum(g * np.asarray(t, dtype=float)))
    return LocalityCertificate(False, res.infeasibility, None, g, offset, value)


def chsh_coefficients() -> np.ndarray:
    """CHSH as a table functional on the (2,2,2,2) scenario, local max 2."""
    return np.einsum("xy,a,b->xyab", CHSH_XY_SIGNS, OUTCOME_SIGNS, OUTCOME_SIGNS)


def tilted_coefficients(eta_a0: float, eta_b: float) -> tuple[np.ndarray, float]:
    """Efficiency-weighted CHSH as table coefficients plus a constant.

    The local maximum of the pair (coeffs, const) is 2 for any efficiencies.
    """
    c = eta_a0 * eta_b * chsh_coefficients()
    c[0, :, :, :] += eta_a0 * (1.0 - eta_b) * np.einsum("a,b->ab", OUTCOME_SIGNS, np.ones(2))
    c[:, 0, :, :] += (1.0 - eta_a0) * eta_b * np.einsum("a,b->ab", np.ones(2), OUTCOME_SIGNS)
    const = 2.0 * (1.0 - eta_a0) * (1.0 - eta_b)
    return c, const


def chsh_symmetrizations(table: np.ndarray) -> np.ndarray:
    """All eight CHSH sign variants of a (2,2,2,2) table [x, y, a, b]."""
    e = np.einsum("xyab,a,b->xy", np.asarray(table, dtype=float), OUTCOME_SIGNS, OUTCOME_SIGNS)
    out = []
    for gx in (1.0, -1.0):
        for gy in (1.0, -1.0):
            for g in (1.0, -1.0):
                out.append(g * (e[0, 0] + gy * e[0, 1] + gx * e[1, 0] - gx * gy * e[1, 1]))
    return np.array(out)


def branch_scenario(table: BehaviorTable) -> Scenario:
    k = table.n_outcomes
    return Scenario(2, k, 2, k)


# -- certificate serialization ----------------------------------------------

def weights_to_csv(cert: LocalityCertificate, path,
                   comments: list[str] | None = None) -> None:
    """Vertex-index -> weight rows for a membership certificate."""
    if not cert.is_member:
        raise ValueError("weights are only available for local tables")
    with open(path, "w") as fh:
        for line in comments or []:
            fh.write(f"# {line}\n")
        fh.write("vertex,weight\n")
        for idx, w in enumerate(cert.weights):
            fh.write(f"{idx},{fmt17(w)}\n")


def functional_to_csv(cert: LocalityCertificate, path,
                      comments: list[str] | None = None) -> None:
    """Separating-functional coefficients in behavior-table row order."""
    if cert.is_member:
        raise ValueError("separating functionals are only available for nonlocal tables")
    g = cert.functional
    with open(path, "w") as fh:
        for line in comments or []:
            fh.write(f"# {line}\n")
        fh.write(f"# local_max {fmt17(cert.offset)} value {fmt17(cert.value)}\n")
        fh.write("x,y,a,b,c\n")
        nx, ny, na, nb = g.shape
        for x in range(nx):
            for y in range(ny):
                for a in range(na):
                    for b in range(nb):
                        la = OUTCOME_LABELS[a] if na <= 3 else str(a)
                        lb = OUTCOME_LABELS[b] if nb <= 3 else str(b)
                        fh.write(f"{x},{y},{la},{lb},{fmt17(g[x, y, a, b])}\n")


# -- no-signaling sampling ---------------------------------------------------

def _pr_box(alpha: int, beta: int, gamma: int) -> np.ndarray:
    t = np.zeros((2, 2, 2, 2))
    for x in range(2):
        for y in range(2):
            for a in range(2):
                b = a ^ (x * y) ^ (alpha * x) ^ (beta * y) ^ gamma
                t[x, y, a, b] = 0.5
    return t


def random_ns_table(rng: np.random.Generator, pr_weight: float | None = None) -> np.ndarray:
    """Random no-signaling (2,2,2,2) table: deterministic points mixed with PR boxes."""
    s = Scenario(2, 2, 2, 2)
    verts = _vertex_matrix(s)
    w_local = rng.dirichlet(np.ones(verts.shape[1]))
    local = (verts @ w_local).reshape(s.table_shape)
    boxes = [_pr_box(a, b, g) for a in range(2) for b in range(2) for g in range(2)]
    w_pr = rng.dirichlet(np.ones(len(boxes)))
    pr = sum(w * box for w, box in zip(w_pr, boxes))
    lam = rng.uniform() if pr_weight is None else pr_weight
    return lam * pr + (1.0 - lam) * local


# -- hybrid adversary models -------------------------------------------------

@dataclass
class HybridLhvModel:
    """Mixture of quantum near-branch strategies with deterministic far responses.

    Component l carries weight weights[l], a two-qubit state vis[l]-mixed
    between the pure psis[l] and white noise, near-branch Alice observables
    a0_blochs[l, x], Bob observables b_blochs[l, y], and a deterministic
    far-branch response a1_resp[l, x] in {-1, +1}.  The same hidden variable
    l feeds both branches and is drawn independently of the routing choice,
    so measurement independence holds by construction.
    """

    weights: np.ndarray  # (L,)
    psis: np.ndarray  # (L, 4) complex unit vectors
    vis: np.ndarray  # (L,) mixing weight toward the pure state
    a0_blochs: np.ndarray  # (L, 2, 3)
    b_blochs: np.ndarray  # (L, 2, 3)
    a1_resp: np.ndarray  # (L, 2) entries +/-1

    @property
    def support(self) -> int:
        return self.weights.shape[0]


def _batched_correlators(psis, a_blochs, b_blochs):
    """E[..., x, y] for batched pure states and Bloch observables."""
    amat = np.einsum("...xk,kij->...xij", a_blochs, PAULIS)
    bmat = np.einsum("...yk,kij->...yij", b_blochs, PAULIS)
    psi_m = psis.reshape(psis.shape[:-1] + (2, 2))
    t = np.einsum("...xij,...ykl,...jl->...xyik", amat, bmat, psi_m)
    return np.real(np.einsum("...xyik,...ik->...xy", t, np.conj(psi_m)))


def _batched_alice_bias(psis, a_blochs):
    amat = np.einsum("...xk,kij->...xij", a_blochs, PAULIS)
    psi_m = psis.reshape(psis.shape[:-1] + (2, 2))
    rho_a = np.einsum("...jk,...lk->...jl", psi_m, np.conj(psi_m))
    return np.real(np.einsum("...xij,...ji->...x", amat, rho_a))


def _batched_bob_bias(psis, b_blochs):
    bmat = np.einsum("...yk,kij->...yij", b_blochs, PAULIS)
    psi_m = psis.reshape(psis.shape[:-1] + (2, 2))
    rho_b = np.einsum("...jk,...jl->...kl", psi_m, np.conj(psi_m))
    return np.real(np.einsum("...ykl,...lk->...y", bmat, rho_b))


def hybrid_chsh_pair(model: HybridLhvModel) -> tuple[float, float]:
    """(near-branch CHSH, far-branch CHSH) of a hybrid model."""
    e = model.vis[:, None, None] * _batched_correlators(model.psis, model.a0_blochs, model.b_blochs)
    c_near = float(np.einsum("l,lxy,xy->", model.weights, e, CHSH_XY_SIGNS))
    beta = model.vis[:, None] * _batched_bob_bias(model.psis, model.b_blochs)
    far = np.einsum("lx,ly,xy->l", model.a1_resp, beta, CHSH_XY_SIGNS)
    return c_near, float(model.weights @ far)


def induced_behavior(model: HybridLhvModel) -> BehaviorTable:
    """Full routed 2-outcome behavior of a hybrid model.

    Branch 0 follows the Born rule of the per-component quantum strategies;
    branch 1 replaces Alice's outcome by the deterministic response while Bob
    keeps measuring the shared state.
    """
    e = model.vis[:, None, None] * _batched_correlators(model.psis, model.a0_blochs, model.b_blochs)
    alpha = model.vis[:, None] * _batched_alice_bias(model.psis, model.a0_blochs)
    beta = model.vis[:, None] * _batched_bob_bias(model.psis, model.b_blochs)
    s = OUTCOME_SIGNS
    one = np.ones(2)
    near = 0.25 * (1.0
                   + np.einsum("lx,a,y,b->lxyab", alpha, s, one, one)
                   + np.einsum("ly,b,x,a->lxyab", beta, s, one, one)
                   + np.einsum("lxy,a,b->lxyab", e, s, s))
    entries = np.empty((2, 2, 2, 2, 2))
    entries[0] = np.einsum("l,lxyab->xyab", model.weights, near)
    far = 0.5 * (1.0 + np.einsum("ly,b->lyb", beta, s))
    hit = (model.a1_resp[:, :, None] == s[None, None, :]).astype(float)  # [l, x, a]
    entries[1] = np.einsum("l,lxa,lyb->xyab", model.weights, hit, far)
    entries = np.where((entries < 0.0) & (entries > -1e-12), 0.0, entries)
    return BehaviorTable(entries)


def sample_hybrid_models(count: int, seed: int,
                         support: int = 4) -> list[tuple[HybridLhvModel, BehaviorTable]]:
    """Random hybrid models with their induced routed behaviors.

    States are random pure vectors mixed with white noise, observables are
    uniform random Bloch directions, far responses are random signs.  The
    hidden-variable support is capped at 8.
    """
    if count < 1:
        raise ValueError("count must be at least 1")
    if not 1 <= support <= 8:
        raise ValueError("hidden-variable support must lie in [1, 8]")
    rng = make_rng(seed)
    models = []
    for _ in range(count):
        m = _draw_model(rng, support)
        models.append((m, induced_behavior(m)))
    return models


def _draw_model(rng: np.random.Generator, support: int) -> HybridLhvModel:
    w = rng.dirichlet(np.ones(support))
    psis = rng.normal(size=(support, 4)) + 1j * rng.normal(size=(support, 4))
    psis /= np.linalg.norm(psis, axis=1, keepdims=True)
    vis = rng.uniform(size=support)
    blochs = rng.normal(size=(support, 4, 3))
    blochs /= np.linalg.norm(blochs, axis=2, keepdims=True)
    resp = rng.choice([-1.0, 1.0], size=(support, 2))
    return HybridLhvModel(w, psis, vis, blochs[:, :2], blochs[:, 2:], resp)


def best_far_responses(model: HybridLhvModel) -> np.ndarray:
    """Deterministic far responses maximizing far-branch CHSH per component."""
    beta = model.vis[:, None] * _batched_bob_bias(model.psis, model.b_blochs)
    resp = np.sign(np.stack([beta[:, 0] + beta[:, 1], beta[:, 0] - beta[:, 1]], axis=-1))
    resp[resp == 0.0] = 1.0
    return resp


def batch_hybrid_chsh_pairs(n_models: int, seed: int, support: int = 4,
                            best_response: bool = True) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized (near, far) CHSH values for a fresh batch of random models.

    With best_response=True the far responses are the optimal deterministic
    reply to each component's Bob marginals, which is the adversary's best
    post-processing; otherwise they are random signs.
    """
    rng = make_rng(seed)
    w = rng.dirichlet(np.ones(support), size=n_models)
    psis = rng.normal(size=(n_models, support, 4)) + 1j * rng.normal(size=(n_models, support, 4))
    psis /= np.linalg.norm(psis, axis=2, keepdims=True)
    vis = rng.uniform(size=(n_models, support))
    blochs = rng.normal(size=(n_models, support, 4, 3))
    blochs /= np.linalg.norm(blochs, axis=3, keepdims=True)
    a0 = blochs[:, :, :2]
    bb = blochs[:, :, 2:]
    e = vis[:, :, None, None] * _batched_correlators(psis, a0, bb)
    c_near = np.einsum("nl,nlxy,xy->n", w, e, CHSH_XY_SIGNS)
    beta = vis[:, :, None] * _batched_bob_bias(psis, bb)
    if best_response:
        resp = np.sign(np.stack([beta[..., 0] + beta[..., 1], beta[..., 0] - beta[..., 1]], axis=-1))
        resp[resp == 0.0] = 1.0
    else:
        resp = rng.choice([-1.0, 1.0], size=(n_models, support, 2))
    far = np.einsum("nlx,nly,xy->nl", resp, beta, CHSH_XY_SIGNS)
    c_far = np.einsum("nl,nl->n", w, far)
    return c_near, c_far


def ascend_hybrid_model(model: HybridLhvModel, slope: float = 2.0,
                        rounds: int = 4) -> HybridLhvModel:
    """Best-effort coordinate ascent pushing a hybrid model against the trade-off.

    Alternates (a) optimal deterministic far responses given Bob's marginals
    and (b) a see-saw pass per component on slope * near-CHSH + linearized
    far-CHSH.  Slopes above 1 steer toward near-CHSH beyond the classical
    bound.  Heuristic by design: it tries to break the curve and is expected
    to land on or below it.
    """
    from .quantum import BellFunctional
    from .seesaw import _functional_arrays, _run_single

    w = model.weights.copy()
    psis = model.psis.copy()
    a0 = model.a0_blochs.copy()
    bb = model.b_blochs.copy()
    vis = np.ones_like(model.vis)  # noise never helps the adversary here
    cur = HybridLhvModel(w, psis, vis, a0, bb, model.a1_resp.copy())

    for _ in range(rounds):
        resp = best_far_responses(cur)
        for l in range(cur.support):
            mu = tuple(float(resp[l] @ CHSH_XY_SIGNS[:, y]) for y in range(2))
            f = BellFunctional(
                joint=tuple(tuple(slope * v for v in row) for row in CHSH_SIGNS),
                bob_marg=mu,
            )
            c, ma, mb, const = _functional_arrays(f)
            _, (psi, abl, bbl), _, _ = _run_single(
                c, ma, mb, const, (psis[l], a0[l], bb[l]), max_iters=80, tol=1e-12
            )
            psis[l] = psi
            a0[l] = abl
            bb[l] = bbl
        cur = HybridLhvModel(w, psis, vis, a0, bb, resp)
    return HybridLhvModel(w, psis, vis, a0, bb, best_far_responses(cur))
