"""Synthetic arterial tree growth.

A tree grows from a root node by two moves: leaf extension (the vessel keeps
its radius and meanders toward atlas targets) and bifurcation (an inter node
spawns a second child whose radius and angle follow Murray's law and the
fluid-dynamic bifurcation-angle relation). Every node stores a position, a
direction vector, and a ratio ``beta`` tying radius to direction magnitude:
``r = beta * ||d||``. A child's position is always the tip of its parent's
direction vector, so rescaling a branch rescales its geometry too.
"""

import math
from dataclasses import dataclass

import numpy as np

from .atlas import Atlas, decrement_neighborhood, sample_target
from .errors import (
    DegenerateBlend,
    InvalidRadii,
    NotEligible,
    ParallelDirections,
    ParseError,
    RootOutOfSupport,
    ZeroAxis,
    ZeroDirection,
)

TREE_HEADER = "vasculsynth-tree v1"
KINDS = ("root", "leaf", "inter", "bifurcation")

# Angle parity below which parent/existing-child directions count as collinear
# (the bifurcation pivot would be numerically meaningless).
_COLLINEAR_EPS = 1e-12


# --------------------------- direction-vector ops --------------------------- #

def _norm(v) -> float:
    return float(np.linalg.norm(v))


def perturb_direction(d_parent, sigma_angle: float, rng) -> np.ndarray:
    """Add Gaussian noise to the two spherical angles of a direction vector.

    Independent N(0, sigma_angle) noise goes on the polar and azimuthal angles;
    the result is rescaled to the parent's magnitude (the child keeps the
    parent's radius). The polar angle is perturbed first, then the azimuth,
    which fixes the RNG stream order.
    """
    d = np.asarray(d_parent, dtype=float)
    mag = _norm(d)
    if mag == 0.0:
        raise ZeroDirection("cannot perturb a zero direction")
    if sigma_angle < 0:
        raise ValueError("sigma_angle must be >= 0")
    polar = math.atan2(math.hypot(d[0], d[1]), d[2]) + rng.normal(0.0, sigma_angle)
    azimuth = math.atan2(d[1], d[0]) + rng.normal(0.0, sigma_angle)
    sp = math.sin(polar)
    out = np.array([sp * math.cos(azimuth), sp * math.sin(azimuth), math.cos(polar)])
    return mag * out / _norm(out)


def bifurcation_angle(r_p: float, r_c: float, r_e: float) -> float:
    """Angle of a new child off the parent axis, from the radii of all three segments.

    cos(phi_c) = (r_p^4 + r_c^4 - r_e^4) / (2 r_p^2 r_c^2). The cosine is
    clamped into [-1, 1] when it strays by at most 1e-9; beyond that the radii
    are rejected.
    """
    if r_p <= 0 or r_c <= 0 or r_e <= 0:
        raise InvalidRadii(f"radii must be positive, got {r_p}, {r_c}, {r_e}")
    c = (r_p**4 + r_c**4 - r_e**4) / (2.0 * r_p**2 * r_c**2)
    if c > 1.0 + 1e-9 or c < -1.0 - 1e-9:
        raise InvalidRadii(f"cosine argument {c} outside [-1, 1]")
    return math.acos(min(1.0, max(-1.0, c)))


def rotate_about_axis(v, axis, angle: float) -> np.ndarray:
    """Rodrigues rotation of v by `angle` (right-handed) about `axis`."""
    a = np.asarray(axis, dtype=float)
    n = _norm(a)
    if n == 0.0:
        raise ZeroAxis("rotation axis must be nonzero")
    k = a / n
    v = np.asarray(v, dtype=float)
    c, s = math.cos(angle), math.sin(angle)
    return v * c + np.cross(k, v) * s + k * (np.dot(k, v) * (1.0 - c))


def murray_expected_radius(r_p: float, gamma: float) -> float:
    """Distal radius of a perfectly symmetric bifurcation: 2^(-1/gamma) * r_p."""
    if r_p <= 0:
        raise InvalidRadii("parent radius must be positive")
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    return 2.0 ** (-1.0 / gamma) * r_p


def murray_existing_radius(r_p: float, r_c: float, gamma: float) -> float:
    """Radius left for the existing child once the new child's is fixed.

    Rearranges Murray's law: r_e = (r_p^gamma - r_c^gamma)^(1/gamma).
    """
    if not 0 < r_c < r_p:
        raise InvalidRadii(f"need 0 < r_c < r_p, got r_c={r_c}, r_p={r_p}")
    return (r_p**gamma - r_c**gamma) ** (1.0 / gamma)


def apply_target_pull(d_old, t, lam: float, parent_mag: float) -> np.ndarray:
    """Blend a direction toward a target vector, keeping the parent magnitude.

    Returns parent_mag * normalize(d_old + lam * (t - d_old)).
    """
    d = np.asarray(d_old, dtype=float)
    blended = d + lam * (np.asarray(t, dtype=float) - d)
    m = _norm(blended)
    if m == 0.0:
        raise DegenerateBlend("blended direction has zero magnitude")
    return parent_mag * blended / m


# --------------------------------- config ---------------------------------- #

@dataclass
class GrowthParams:
    """Knobs of the growth process. Defaults follow the reference model where
    stated; r_min, bifurcation_prob and lambda_pull have no canonical values
    and must be tuned per use."""

    sigma_angle: float = math.pi / 32
    beta0: float = 3.0
    gamma: float = 3.0
    r_min: float = 0.3
    bifurcation_prob: float = 0.15
    min_bifurcation_spacing: int = 3
    lambda_pull: float = 0.3
    radius_sigma_fraction: float = 1.0 / 32.0
    max_nodes: int = 2000
    seed: int = 0
    target_search_factor: float = 10.0
    decrement_amount: float = 0.1
    decrement_radius_factor: float = 1.0

    def __post_init__(self):
        if self.beta0 <= 1.0:
            raise ValueError("beta0 must exceed 1.0 (sphere overlap requirement)")
        if not 2.0 < self.gamma <= 3.0:
            raise ValueError("gamma must lie in (2.0, 3.0]")
        if not 0.0 <= self.bifurcation_prob <= 1.0:
            raise ValueError("bifurcation_prob must lie in [0, 1]")
        if self.r_min <= 0:
            raise ValueError("r_min must be positive")
        if self.max_nodes < 1:
            raise ValueError("max_nodes must be >= 1")
        if not 0.0 <= self.lambda_pull <= 1.0:
            raise ValueError("lambda_pull must lie in [0, 1]")
        if self.sigma_angle < 0:
            raise ValueError("sigma_angle must be >= 0")
        if self.radius_sigma_fraction < 0:
            raise ValueError("radius_sigma_fraction must be >= 0")
        if self.min_bifurcation_spacing < 0:
            raise ValueError("min_bifurcation_spacing must be >= 0")


# ------------------------------- tree storage ------------------------------ #

@dataclass
class Node:
    id: int
    parent: int | None
    position: np.ndarray
    direction: np.ndarray
    beta: float
    children: list[int]
    from_bifurcation: bool = False

    @property
    def radius(self) -> float:
        return self.beta * _norm(self.direction)

    @property
    def kind(self) -> str:
        if self.parent is None:
            return "root"
        n = len(self.children)
        return ("leaf", "inter", "bifurcation")[n]


class _IndexedSet:
    """Set with O(1) add/discard and uniform random sampling."""

    def __init__(self):
        self._items: list[int] = []
        self._pos: dict[int, int] = {}

    def add(self, x: int):
        if x not in self._pos:
            self._pos[x] = len(self._items)
            self._items.append(x)

    def discard(self, x: int):
        pos = self._pos.pop(x, None)
        if pos is None:
            return
        last = self._items.pop()
        if pos < len(self._items):
            self._items[pos] = last
            self._pos[last] = pos

    def sample(self, rng) -> int:
        return self._items[int(rng.integers(len(self._items)))]

    def __len__(self):
        return len(self._items)

    def __contains__(self, x):
        return x in self._pos

    def __iter__(self):
        return iter(list(self._items))


class Tree:
    """Arena-stored rooted tree of vessel nodes.

    `leaves` holds extendable tips, `bifurcation_candidates` the inter nodes
    currently eligible to bifurcate, and `discontinued` the out-of-support
    tips that will never grow again.
    """

    def __init__(self, root_pos, root_dir, beta: float):
        root = Node(
            id=0,
            parent=None,
            position=np.asarray(root_pos, dtype=float).copy(),
            direction=np.asarray(root_dir, dtype=float).copy(),
            beta=float(beta),
            children=[],
        )
        if _norm(root.direction) == 0.0:
            raise ZeroDirection("root direction must be nonzero")
        self.nodes: dict[int, Node] = {0: root}
        self.root: int | None = 0
        self.leaves = _IndexedSet()
        self.leaves.add(0)
        self.bifurcation_candidates = _IndexedSet()
        self.discontinued: set[int] = set()
        self._next_id = 1

    @classmethod
    def from_nodes(cls, nodes: list[Node]) -> "Tree":
        """Rebuild a tree from parsed nodes (possibly empty)."""
        tree = cls.__new__(cls)
        tree.nodes = {n.id: n for n in nodes}
        if len(tree.nodes) != len(nodes):
            raise ParseError("duplicate node ids")
        roots = [n.id for n in nodes if n.parent is None]
        if len(nodes) > 0 and len(roots) != 1:
            raise ParseError(f"expected exactly one root, found {len(roots)}")
        tree.root = roots[0] if roots else None
        tree.leaves = _IndexedSet()
        tree.bifurcation_candidates = _IndexedSet()
        tree.discontinued = set()
        for n in nodes:
            if not n.children:
                tree.leaves.add(n.id)
        tree._next_id = max(tree.nodes, default=-1) + 1
        return tree

    def __len__(self):
        return len(self.nodes)

    def add_child(self, parent_id: int, direction, *, from_bifurcation: bool = False,
                  in_support: bool = True) -> int:
        """Create a child at the tip of the parent's direction vector."""
        parent = self.nodes[parent_id]
        node = Node(
            id=self._next_id,
            parent=parent_id,
            position=parent.position + parent.direction,
            direction=np.asarray(direction, dtype=float).copy(),
            beta=parent.beta,
            children=[],
            from_bifurcation=from_bifurcation,
        )
        self._next_id += 1
        self.nodes[node.id] = node
        parent.children.append(node.id)
        self.leaves.discard(parent_id)
        if in_support:
            self.leaves.add(node.id)
        else:
            self.discontinued.add(node.id)
        return node.id

    def subtree_ids(self, node_id: int) -> list[int]:
        """All ids in the subtree rooted at node_id, in DFS order."""
        out = []
        stack = [node_id]
        while stack:
            nid = stack.pop()
            out.append(nid)
            stack.extend(reversed(self.nodes[nid].children))
        return out

    def remove_subtree(self, node_id: int) -> list[int]:
        """Delete a node and all its descendants; returns the removed ids.

        The detached parent rejoins the leaves set when it ends up childless
        (unless it was discontinued).
        """
        node = self.nodes[node_id]
        parent_id = node.parent
        removed = self.subtree_ids(node_id)
        for nid in removed:
            del self.nodes[nid]
            self.leaves.discard(nid)
            self.bifurcation_candidates.discard(nid)
            self.discontinued.discard(nid)
        if parent_id is not None:
            parent = self.nodes[parent_id]
            parent.children.remove(node_id)
            if not parent.children and parent_id not in self.discontinued:
                self.leaves.add(parent_id)
        else:
            self.root = None
        return removed

    def rescale_branch(self, node_id: int, ratio: float):
        """Scale every direction in a branch by `ratio`, moving descendant
        positions so that each child stays at its parent's tip."""
        stack = [node_id]
        while stack:
            nid = stack.pop()
            node = self.nodes[nid]
            if nid != node_id:
                parent = self.nodes[node.parent]
                node.position = parent.position + parent.direction
            node.direction = node.direction * ratio
            stack.extend(node.children)

    def set_direction(self, node_id: int, direction):
        """Replace a node's direction and shift its descendants accordingly."""
        node = self.nodes[node_id]
        node.direction = np.asarray(direction, dtype=float).copy()
        for nid in self.subtree_ids(node_id):
            if nid == node_id:
                continue
            child = self.nodes[nid]
            parent = self.nodes[child.parent]
            child.position = parent.position + parent.direction

    def nodes_within(self, center_id: int, max_dist: int) -> list[int]:
        """Ids within `max_dist` tree edges of a node (center included)."""
        if center_id not in self.nodes:
            return []
        seen = {center_id}
        frontier = [center_id]
        for _ in range(max_dist):
            nxt = []
            for nid in frontier:
                node = self.nodes[nid]
                neighbors = list(node.children)
                if node.parent is not None:
                    neighbors.append(node.parent)
                for nb in neighbors:
                    if nb not in seen:
                        seen.add(nb)
                        nxt.append(nb)
            frontier = nxt
        return sorted(seen)

    def has_bifurcation_within(self, node_id: int, max_dist: int) -> bool:
        """True if a 2-child node sits within `max_dist` edges of node_id
        (node_id itself excluded)."""
        for nid in self.nodes_within(node_id, max_dist):
            if nid != node_id and len(self.nodes[nid].children) == 2:
                return True
        return False

    def is_bifurcation_eligible(self, node_id: int, params: GrowthParams) -> bool:
        node = self.nodes.get(node_id)
        if node is None or len(node.children) != 1:
            return False
        if node.radius < 2.0 * params.r_min:
            return False
        spacing = params.min_bifurcation_spacing
        if spacing > 0 and self.has_bifurcation_within(node_id, spacing - 1):
            return False
        return True

    def refresh_candidates_near(self, center_ids, params: GrowthParams):
        """Re-evaluate bifurcation eligibility around topology-change sites."""
        reach = max(params.min_bifurcation_spacing - 1, 0)
        dirty: set[int] = set()
        for cid in center_ids:
            if cid in self.nodes:
                dirty.update(self.nodes_within(cid, reach))
        for nid in sorted(dirty):
            if self.is_bifurcation_eligible(nid, params):
                self.bifurcation_candidates.add(nid)
            else:
                self.bifurcation_candidates.discard(nid)


# ------------------------------- bifurcation ------------------------------- #

def spawn_bifurcation(tree: Tree, node_id: int, params: GrowthParams, rng,
                      atlas: Atlas | None = None) -> str:
    """Attempt a bifurcation at an eligible inter node.

    Returns one of "added", "pruned_new", "pruned_existing". The new child's
    radius is sampled from N(r_mu, r_mu * radius_sigma_fraction) and clipped
    into (0, r_p); the existing child's radius follows from Murray's law. The
    new direction is the existing child's direction rotated by (phi_c + phi_e)
    within the parent/existing-child plane, landing at phi_c on the far side of
    the parent axis, then scaled so the new radius is exact.

    When a child would fall below r_min it is pruned and the survivor's radius
    is reset to the parent's; otherwise the existing branch is rescaled to its
    new radius and any sub-branch dropping below r_min is removed (a downstream
    junction that loses one child this way has its survivor reset to the
    junction radius, so radius steps only ever occur at bifurcations).
    """
    if not tree.is_bifurcation_eligible(node_id, params):
        raise NotEligible(f"node {node_id} is not eligible for bifurcation")
    node = tree.nodes[node_id]
    existing_id = node.children[0]
    existing = tree.nodes[existing_id]
    d_p = node.direction
    d_e = existing.direction
    pivot = np.cross(d_p, d_e)
    if _norm(pivot) <= _COLLINEAR_EPS * _norm(d_p) * _norm(d_e):
        raise ParallelDirections("parent and existing-child directions are collinear")

    beta = node.beta
    r_p = node.radius
    r_e_old = existing.radius
    r_mu = murray_expected_radius(r_p, params.gamma)
    eps_r = 1e-9 * r_p
    r_c = float(np.clip(rng.normal(r_mu, r_mu * params.radius_sigma_fraction),
                        eps_r, r_p - eps_r))

    if r_c < params.r_min:
        # New child never materializes; the survivor reverts to the parent radius.
        ratio = r_p / r_e_old
        if abs(ratio - 1.0) > 1e-12:
            tree.rescale_branch(existing_id, ratio)
        return "pruned_new"

    r_e_new = murray_existing_radius(r_p, r_c, params.gamma)
    phi_c = bifurcation_angle(r_p, r_c, r_e_new)
    phi_e = math.atan2(_norm(pivot), float(np.dot(d_p, d_e)))
    d_rot = rotate_about_axis(d_e, pivot, -(phi_c + phi_e))

    if r_e_new < params.r_min:
        # Existing branch is pruned whole; the new child takes over at r_p.
        tree.remove_subtree(existing_id)
        direction = d_rot / _norm(d_rot) * (r_p / beta)
        _attach_child(tree, node_id, direction, params, atlas, from_bifurcation=True)
        tree.refresh_candidates_near([node_id], params)
        return "pruned_existing"

    direction = d_rot / _norm(d_rot) * (r_c / beta)
    _attach_child(tree, node_id, direction, params, atlas, from_bifurcation=True)

    ratio = r_e_new / r_e_old
    tree.rescale_branch(existing_id, ratio)
    _prune_below_min(tree, existing_id, node_id, params)
    return "added"


def _prune_below_min(tree: Tree, branch_id: int, attach_id: int, params: GrowthParams):
    """Remove sub-branches of a rescaled branch whose radius fell below r_min.

    The branch root itself was already validated against r_min. Junctions that
    lose exactly one child get their survivor branch rescaled back to the
    junction radius. Candidate bookkeeping is refreshed around every change.
    """
    dirty = [attach_id]
    demoted: list[int] = []
    stack = list(tree.nodes[branch_id].children)
    while stack:
        nid = stack.pop()
        sub = tree.nodes[nid]
        if sub.radius < params.r_min:
            parent_id = sub.parent
            was_two = len(tree.nodes[parent_id].children) == 2
            tree.remove_subtree(nid)
            dirty.append(parent_id)
            if was_two:
                demoted.append(parent_id)
            continue
        if nid in tree.bifurcation_candidates and sub.radius < 2.0 * params.r_min:
            tree.bifurcation_candidates.discard(nid)
        stack.extend(sub.children)
    if branch_id in tree.bifurcation_candidates and \
            tree.nodes[branch_id].radius < 2.0 * params.r_min:
        tree.bifurcation_candidates.discard(branch_id)
    for nid in demoted:
        node = tree.nodes.get(nid)
        if node is None or len(node.children) != 1:
            continue
        survivor_id = node.children[0]
        ratio = node.radius / tree.nodes[survivor_id].radius
        tree.rescale_branch(survivor_id, ratio)
        dirty.extend(tree.subtree_ids(survivor_id))
    tree.refresh_candidates_near(dirty, params)


def _attach_child(tree: Tree, parent_id: int, direction, params: GrowthParams,
                  atlas: Atlas | None, *, from_bifurcation: bool):
    parent = tree.nodes[parent_id]
    child_pos = parent.position + parent.direction
    in_sup = atlas.in_support(child_pos) if atlas is not None else True
    child_id = tree.add_child(parent_id, direction,
                              from_bifurcation=from_bifurcation, in_support=in_sup)
    if atlas is not None:
        decrement_neighborhood(atlas, child_pos, tree.nodes[child_id].radius,
                               params.decrement_amount, params.decrement_radius_factor)
    return child_id


# ---------------------------------- growth --------------------------------- #

def grow_tree(params: GrowthParams, atlas: Atlas, root_pos, root_dir, rng=None) -> Tree:
    """Grow a tree inside an atlas until max_nodes or exhaustion.

    Each step draws an action (bifurcation with probability bifurcation_prob,
    else leaf extension) and picks the acting node uniformly from the matching
    list. Leaf extension perturbs the parent direction, pulls it toward the
    best atlas target near the new tip, decrements the atlas around the new
    node, and marks out-of-support tips discontinued. The atlas is mutated;
    pass a private copy.
    """
    if rng is None:
        rng = np.random.default_rng(params.seed)
    if not atlas.in_support(root_pos):
        raise RootOutOfSupport(f"root position {root_pos} outside atlas support")
    tree = Tree(root_pos, root_dir, params.beta0)
    decrement_neighborhood(atlas, tree.nodes[0].position, tree.nodes[0].radius,
                           params.decrement_amount, params.decrement_radius_factor)

    # Safety valve: bifurcation attempts can no-op (pruned_new), so a
    # pathological configuration could otherwise spin forever.
    budget = max(20 * params.max_nodes, 1000)
    while len(tree.nodes) < params.max_nodes and budget > 0:
        budget -= 1
        n_leaves = len(tree.leaves)
        n_cand = len(tree.bifurcation_candidates)
        if n_leaves == 0 and n_cand == 0:
            break
        bifurcate = rng.random() < params.bifurcation_prob
        if bifurcate and n_cand == 0:
            if params.bifurcation_prob >= 1.0:
                break
            continue
        if not bifurcate and n_leaves == 0:
            if params.bifurcation_prob <= 0.0:
                break
            continue
        if bifurcate:
            _bifurcation_step(tree, params, atlas, rng)
        else:
            _extension_step(tree, params, atlas, rng)
    return tree


def _extension_step(tree: Tree, params: GrowthParams, atlas: Atlas, rng):
    leaf_id = tree.leaves.sample(rng)
    leaf = tree.nodes[leaf_id]
    parent_mag = _norm(leaf.direction)
    new_dir = perturb_direction(leaf.direction, params.sigma_angle, rng)
    child_pos = leaf.position + leaf.direction
    child_radius = leaf.beta * parent_mag
    target = sample_target(atlas, child_pos, params.target_search_factor * child_radius)
    if target is not None:
        try:
            new_dir = apply_target_pull(new_dir, target - child_pos,
                                        params.lambda_pull, parent_mag)
        except DegenerateBlend:
            pass  # keep the perturbed direction
    _attach_child(tree, leaf_id, new_dir, params, atlas, from_bifurcation=False)
    if tree.is_bifurcation_eligible(leaf_id, params):
        tree.bifurcation_candidates.add(leaf_id)


def _bifurcation_step(tree: Tree, params: GrowthParams, atlas: Atlas, rng):
    node_id = tree.bifurcation_candidates.sample(rng)
    try:
        spawn_bifurcation(tree, node_id, params, rng, atlas=atlas)
        return
    except ParallelDirections:
        pass
    # Degenerate pivot: nudge the existing child's direction once and retry.
    existing_id = tree.nodes[node_id].children[0]
    nudged = perturb_direction(tree.nodes[existing_id].direction, params.sigma_angle, rng)
    tree.set_direction(existing_id, nudged)
    try:
        spawn_bifurcation(tree, node_id, params, rng, atlas=atlas)
    except ParallelDirections:
        pass  # skip this attempt entirely (e.g. sigma_angle == 0)


# ---------------------------------- audits --------------------------------- #

def audit_tree(tree: Tree, params: GrowthParams, pristine_atlas: Atlas | None = None) -> list[str]:
    """Post-hoc structural and geometric audit; returns human-readable violations.

    Checks parent/child wiring, the position rule, magnitude preservation for
    extension children, Murray's law and the angle relation at bifurcations,
    radius monotonicity, pruning totality, bookkeeping-set consistency, and
    (optionally) membership of non-discontinued nodes in a pristine atlas
    support.
    """
    issues: list[str] = []
    if tree.root is None:
        return ["tree has no root"] if tree.nodes else issues

    reached = set(tree.subtree_ids(tree.root))
    if reached != set(tree.nodes):
        issues.append("tree contains nodes unreachable from the root")

    for nid, node in tree.nodes.items():
        for cid in node.children:
            child = tree.nodes.get(cid)
            if child is None or child.parent != nid:
                issues.append(f"node {nid}: broken child link {cid}")
                continue
            expected = node.position + node.direction
            scale = 1.0 + _norm(expected)
            if _norm(child.position - expected) > 1e-9 * scale:
                issues.append(f"node {cid}: position is not the parent's tip")
            # Magnitude preservation applies away from junctions: a bifurcation
            # decouples both of its children's magnitudes via Murray's law.
            if len(node.children) == 1 and not child.from_bifurcation:
                rel = abs(_norm(child.direction) / _norm(node.direction) - 1.0)
                if rel > 1e-12:
                    issues.append(f"node {cid}: magnitude drift {rel:.3e}")
            if child.radius > node.radius * (1.0 + 1e-9):
                issues.append(f"node {cid}: radius exceeds parent radius")
        if node.radius < params.r_min * (1.0 - 1e-12):
            issues.append(f"node {nid}: radius {node.radius} below r_min")
        if len(node.children) == 2:
            issues.extend(_audit_bifurcation(tree, node, params.gamma))
        if len(node.children) > 2:
            issues.append(f"node {nid}: more than two children")

    for nid, node in tree.nodes.items():
        is_tip = not node.children
        in_leaves = nid in tree.leaves
        in_disc = nid in tree.discontinued
        if is_tip and not (in_leaves ^ in_disc):
            issues.append(f"node {nid}: tip not in exactly one of leaves/discontinued")
        if not is_tip and (in_leaves or in_disc):
            issues.append(f"node {nid}: non-tip listed as leaf/discontinued")

    for nid in tree.bifurcation_candidates:
        if not tree.is_bifurcation_eligible(nid, params):
            issues.append(f"node {nid}: stale bifurcation candidate")

    if pristine_atlas is not None:
        for nid, node in tree.nodes.items():
            if nid not in tree.discontinued and not pristine_atlas.in_support(node.position):
                issues.append(f"node {nid}: outside pristine atlas support")
    return issues


def _audit_bifurcation(tree: Tree, node: Node, gamma: float) -> list[str]:
    issues = []
    # Children are appended in creation order, so children[1] is always the
    # bifurcation-born child the angle relation applies to.
    existing, new_child = (tree.nodes[c] for c in node.children)
    r_p = node.radius
    residual = abs(r_p**gamma - existing.radius**gamma - new_child.radius**gamma) / r_p**gamma
    if residual > 1e-9:
        issues.append(f"node {node.id}: Murray residual {residual:.3e}")
    d_p, d_c = node.direction, new_child.direction
    realized = math.atan2(_norm(np.cross(d_p, d_c)), float(np.dot(d_p, d_c)))
    try:
        expected = bifurcation_angle(r_p, new_child.radius, existing.radius)
    except InvalidRadii:
        issues.append(f"node {node.id}: radii reject the angle relation")
        return issues
    if abs(realized - expected) > 1e-6:
        issues.append(f"node {node.id}: angle off by {abs(realized - expected):.3e}")
    u1 = node.direction / _norm(node.direction)
    u2 = existing.direction / _norm(existing.direction)
    u3 = new_child.direction / _norm(new_child.direction)
    if abs(float(np.dot(u1, np.cross(u2, u3)))) > 1e-9:
        issues.append(f"node {node.id}: children not coplanar with parent")
    return issues


def murray_residuals(tree: Tree, gamma: float) -> list[float]:
    """Relative Murray residual |r_p^g - r_c^g - r_e^g| / r_p^g per bifurcation."""
    out = []
    for node in tree.nodes.values():
        if len(node.children) == 2:
            c1, c2 = (tree.nodes[c] for c in node.children)
            r_p = node.radius
            out.append(abs(r_p**gamma - c1.radius**gamma - c2.radius**gamma) / r_p**gamma)
    return out


# ------------------------------ serialization ------------------------------ #

def tree_to_text(tree: Tree) -> str:
    """Line-oriented text form: header then one node per line, 9 significant digits."""
    lines = [f"{TREE_HEADER} {len(tree.nodes)}"]
    for nid in sorted(tree.nodes):
        n = tree.nodes[nid]
        parent = -1 if n.parent is None else n.parent
        p, d = n.position, n.direction
        lines.append(
            f"{nid} {parent} {p[0]:.9g} {p[1]:.9g} {p[2]:.9g} "
            f"{d[0]:.9g} {d[1]:.9g} {d[2]:.9g} {n.beta:.9g} {n.kind}"
        )
    return "\n".join(lines) + "\n"


def tree_from_text(text: str) -> Tree:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ParseError("empty tree file")
    head = lines[0].rsplit(" ", 1)
    if len(head) != 2 or head[0] != TREE_HEADER:
        raise ParseError(f"bad tree header: {lines[0]!r}")
    try:
        count = int(head[1])
    except ValueError as exc:
        raise ParseError(f"bad node count in header: {head[1]!r}") from exc
    if len(lines) - 1 != count:
        raise ParseError(f"header promises {count} nodes, file has {len(lines) - 1}")
    nodes = []
    for ln in lines[1:]:
        parts = ln.split()
        if len(parts) != 10:
            raise ParseError(f"bad node line: {ln!r}")
        try:
            nid, parent = int(parts[0]), int(parts[1])
            vals = [float(x) for x in parts[2:9]]
        except ValueError as exc:
            raise ParseError(f"bad numeric field in: {ln!r}") from exc
        kind = parts[9]
        if kind not in KINDS:
            raise ParseError(f"unknown node kind {kind!r}")
        nodes.append(Node(
            id=nid,
            parent=None if parent < 0 else parent,
            position=np.array(vals[0:3]),
            direction=np.array(vals[3:6]),
            beta=vals[6],
            children=[],
        ))
    by_id = {n.id: n for n in nodes}
    if len(by_id) != len(nodes):
        raise ParseError("duplicate node ids")
    for n in nodes:
        if n.parent is not None:
            if n.parent not in by_id:
                raise ParseError(f"node {n.id} references missing parent {n.parent}")
            by_id[n.parent].children.append(n.id)
    for n in nodes:
        n.from_bifurcation = len(by_id[n.parent].children) == 2 if n.parent is not None else False
    tree = Tree.from_nodes(nodes)
    for n in nodes:
        if _norm(n.direction) == 0.0:
            raise ParseError(f"node {n.id}: zero direction")
    return tree
