"""The operator Q on C^N (x) M_lambda and the data behind it.

C^N (x) M_lambda splits into the submodules M_i generated by singular vectors
u_{m_i}, one per Levi block of C^N. Q acts on M_i by the scalar x_i. All
modules here are WeightModules truncated at a height; the submodules are
computed as lowering closures inside the truncation.
"""

import logging
from dataclasses import dataclass, field
from itertools import permutations

from . import linalg
from .errors import ConventionFault, DecompositionError, ModuleError
from .scalars import ExponentForm
from .singvec import build_generating
from .verma import ModuleElement, WeightModule, depth_height, depths_below, shift

logger = logging.getLogger(__name__)


def _vsub(x, y):
    return tuple(a - b for a, b in zip(x, y))


class NaturalModule(WeightModule):
    """C^N with basis w_1..w_N; at most one node per depth below w_1."""

    def __init__(self, poset, domain):
        self.poset = poset
        self.root_system = rs = poset.root_system
        self.domain = domain
        self.top = rs.node_weight(1)
        self._depths = {i: rs.root_coords(_vsub(self.top, rs.node_weight(i)))
                        for i in range(1, rs.N + 1)}
        self._nodes = {depth: i for i, depth in self._depths.items()}
        self.height = max(depth_height(depth) for depth in self._depths.values())

    def node_depth(self, i):
        return self._depths[i]

    def node_at(self, depth):
        return self._nodes.get(depth)

    def node_vector(self, i):
        return ModuleElement(self._depths[i], {0: self.domain.one})

    def dim(self, depth):
        return 1 if depth in self._nodes else 0

    def keys(self):
        return sorted(self._nodes, key=lambda d: (depth_height(d), tuple(-c for c in d)))

    def top_exponent(self, x):
        return ExponentForm.q(self.root_system.pairing(self.top, x))

    def _map(self, generator, k, depth):
        action = self.poset.natural_action(generator, k, self._nodes[depth])
        if action is None:
            return [{}]
        return [{0: self.domain.from_int(action[0])}]

    def f_map(self, k, depth):
        return self._map('f', k, depth)

    def e_map(self, k, depth):
        return self._map('e', k, depth)


@dataclass(frozen=True)
class _Block:
    left: tuple
    right: tuple
    offset: int
    left_size: int
    right_size: int


class TensorModule(WeightModule):
    """left (x) right with Delta f = f (x) K^-1 + 1 (x) f and Delta e = e (x) 1 + K (x) e.

    A weight space at total depth d is the direct sum over splittings
    d = d_left + d_right; basis vectors are ordered block by block,
    left index major.
    """

    def __init__(self, left, right, height=None):
        self.left = left
        self.right = right
        self.root_system = right.root_system
        self.domain = right.domain
        self.height = right.height if height is None else height
        self._layouts = {}
        self._fmaps = {}
        self._emaps = {}

    def top_exponent(self, x):
        return self.left.top_exponent(x) + self.right.top_exponent(x)

    def layout(self, depth):
        cached = self._layouts.get(depth)
        if cached is not None:
            return cached
        blocks = []
        offset = 0
        if depth_height(depth) <= self.height and min(depth) >= 0:
            for left_depth in self.left.keys():
                right_depth = _vsub(depth, left_depth)
                if min(right_depth) < 0 or depth_height(right_depth) > self.right.height:
                    continue
                left_size = self.left.dim(left_depth)
                right_size = self.right.dim(right_depth)
                if not left_size or not right_size:
                    continue
                blocks.append(_Block(left_depth, right_depth, offset, left_size, right_size))
                offset += left_size * right_size
        index = {(block.left, block.right): block for block in blocks}
        self._layouts[depth] = (tuple(blocks), offset, index)
        return self._layouts[depth]

    def dim(self, depth):
        if depth is None:
            return 0
        return self.layout(depth)[1]

    def locate(self, depth, index):
        """(block, left index, right index) of a basis vector."""
        for block in self.layout(depth)[0]:
            size = block.left_size * block.right_size
            if block.offset <= index < block.offset + size:
                a, b = divmod(index - block.offset, block.right_size)
                return block, a, b
        raise ModuleError(f"index {index} outside the weight space at {depth}", code='bad_index')

    def pure(self, a, b):
        """a (x) b for ModuleElements of the two factors."""
        depth = tuple(x + y for x, y in zip(a.depth, b.depth))
        block = self.layout(depth)[2].get((a.depth, b.depth))
        if block is None:
            if not a.coords or not b.coords:
                return self.zero(depth)
            raise ModuleError(f"{a.depth} (x) {b.depth} lies outside the truncation",
                              code='height_exceeded')
        coords = {}
        for i, x in a.coords.items():
            for j, y in b.coords.items():
                value = x * y
                if value:
                    coords[block.offset + i * block.right_size + j] = value
        return ModuleElement(depth, coords)

    def component(self, x, left_depth, left_index=0):
        """The right-factor vector multiplying the left basis vector (left_depth, left_index)."""
        right_depth = _vsub(x.depth, left_depth)
        block = self.layout(x.depth)[2].get((left_depth, right_depth))
        if block is None:
            return ModuleElement(right_depth, {})
        start = block.offset + left_index * block.right_size
        coords = {index - start: value for index, value in x.coords.items()
                  if start <= index < start + block.right_size}
        return ModuleElement(right_depth, coords)

    def f_map(self, k, depth):
        key = (k, depth)
        cached = self._fmaps.get(key)
        if cached is not None:
            return cached
        target = shift(depth, k)
        if depth_height(target) > self.height:
            raise ModuleError(f"height exceeded: depth {target} beyond {self.height}",
                              code='height_exceeded')
        index = self.layout(target)[2]
        alpha = self.root_system.simple_roots[k - 1]
        columns = []
        for block in self.layout(depth)[0]:
            left_target = shift(block.left, k)
            right_target = shift(block.right, k)
            moved_left = index.get((left_target, block.right))
            moved_right = index.get((block.left, right_target))
            left_cols = self.left.f_map(k, block.left) if moved_left else None
            right_cols = self.right.f_map(k, block.right) if moved_right else None
            factor = self.domain.monomial(-self.right.weight_exponent(block.right, alpha))
            for a in range(block.left_size):
                for b in range(block.right_size):
                    column = {}
                    if left_cols:
                        for a2, c in left_cols[a].items():
                            linalg.axpy(column, c * factor,
                                        {moved_left.offset + a2 * moved_left.right_size + b: self.domain.one})
                    if right_cols:
                        for b2, c in right_cols[b].items():
                            linalg.axpy(column, c,
                                        {moved_right.offset + a * moved_right.right_size + b2: self.domain.one})
                    columns.append(column)
        self._fmaps[key] = columns
        return columns

    def e_map(self, k, depth):
        key = (k, depth)
        cached = self._emaps.get(key)
        if cached is not None:
            return cached
        target = shift(depth, k, -1)
        columns = []
        index = self.layout(target)[2] if target is not None else {}
        alpha = self.root_system.simple_roots[k - 1]
        for block in self.layout(depth)[0]:
            left_target = shift(block.left, k, -1)
            right_target = shift(block.right, k, -1)
            moved_left = index.get((left_target, block.right)) if left_target else None
            moved_right = index.get((block.left, right_target)) if right_target else None
            left_cols = self.left.e_map(k, block.left) if moved_left else None
            right_cols = self.right.e_map(k, block.right) if moved_right else None
            factor = self.domain.monomial(self.left.weight_exponent(block.left, alpha))
            for a in range(block.left_size):
                for b in range(block.right_size):
                    column = {}
                    if left_cols:
                        for a2, c in left_cols[a].items():
                            linalg.axpy(column, c,
                                        {moved_left.offset + a2 * moved_left.right_size + b: self.domain.one})
                    if right_cols:
                        for b2, c in right_cols[b].items():
                            linalg.axpy(column, c * factor,
                                        {moved_right.offset + a * moved_right.right_size + b2: self.domain.one})
                    columns.append(column)
        self._emaps[key] = columns
        return columns


def singular_space(module, depth):
    """Vectors at depth killed by every e_{alpha_k}."""
    size = module.dim(depth)
    if not size:
        return []
    rows = []
    for k in range(1, module.root_system.rank + 1):
        images = module.e_map(k, depth)
        rows.extend(linalg.transpose(images, _image_size(module, k, depth)))
    return [ModuleElement(depth, vector) for vector in linalg.nullspace(module.domain, rows, size)]


def _image_size(module, k, depth):
    lower = shift(depth, k, -1)
    return module.dim(lower) if lower is not None else 0


def is_singular(module, x):
    return all(not module.act_e(k, x) for k in range(1, module.root_system.rank + 1))


def singular_tensor(tensor, natural, top, node=1):
    """sum_i w_i (x) y_i from its top component y_node, by co-natural propagation.

    Along an f-edge j -> i with f_alpha w_j = s w_i,
    y_i = -s q^{(alpha, nu_j)} e_alpha y_j.
    """
    poset = natural.poset
    rs = natural.root_system
    components = {node: top}
    for i in range(node + 1, rs.N + 1):
        source = None
        for j, label in sorted(poset.reverse.get(i, ())):
            if j in components:
                source = (j, label)
                break
        if source is None:
            continue
        j, label = source
        sign = poset.edge_sign(j, label)
        exponent = rs.pairing_exponent(rs.simple_roots[label - 1], rs.node_weight(j))
        factor = tensor.domain.from_int(-sign) * tensor.domain.monomial(exponent)
        image = tensor.right.act_e(label, components[j])
        if image and min(image.depth) >= 0:
            components[i] = image.scale(factor)
    depth = tuple(a + b for a, b in zip(natural.node_depth(node), top.depth))
    u = tensor.zero(depth)
    for i, y in components.items():
        if y:
            u = u + tensor.pure(natural.node_vector(i), y)
    if not is_singular(tensor, u):
        raise ConventionFault(f"propagated vector from node {node} is not singular",
                              code='not_singular', details={'depth': list(depth)})
    return u, components


def eigenvalues_closed_form(lam, domain):
    """x_1..x_{2 ell+3} from the block starts m_i and sizes n_i."""
    levi = lam.levi
    ell, N = levi.ell, levi.N
    starts, sizes = levi.block_starts, levi.multiplicities
    values = {}
    for i in range(1, ell + 3):
        m = starts[i - 1]
        values[i] = domain.monomial(lam.lam(m) * 2 + (-2 * (m - 1)))
    for i in range(1, ell + 2):
        m, size = starts[i - 1], sizes[i - 1]
        values[2 * ell + 4 - i] = domain.monomial(lam.lam(m) * (-2) + (-2 * N + 2 * (m + size)))
    return dict(sorted(values.items()))


def casimir_exponent(lam, node):
    """2(lambda, nu) + (nu, nu) + 2(rho, nu) - 1 - 2(rho, eps_1) for nu the weight of w_node."""
    rs = lam.levi.root_system
    nu = rs.node_weight(node)
    top = rs.node_weight(1)
    constant = rs.pairing(nu, nu) + 2 * rs.rho_pairing(nu) - 1 - 2 * rs.rho_pairing(top)
    return lam.pairing(nu) * 2 + constant


def eigenvalues_casimir(lam, domain):
    levi = lam.levi
    return {i: domain.monomial(casimir_exponent(lam, m))
            for i, m in enumerate(levi.block_starts, start=1)}


def eigenvalue_report(lam, domain):
    """Closed form against the Casimir form, the borderline values and all coincidences."""
    levi = lam.levi
    closed = eigenvalues_closed_form(lam, domain)
    casimir = eigenvalues_casimir(lam, domain)
    mismatched = [i for i in closed if closed[i] - casimir[i]]
    coincident = [(i, j) for i in closed for j in closed if i < j and not (closed[i] - closed[j])]
    ell, N, P = levi.ell, levi.N, levi.P
    special = {
        ell + 1: -domain.monomial(ExponentForm.q(2 - N)),
        ell + 2: domain.monomial(ExponentForm.q(P - N)),
        ell + 3: -domain.monomial(ExponentForm.q(2 - N)),
    }
    borderline = all(not (closed[i] - value) for i, value in special.items())
    expected = [(ell + 1, ell + 3)] if lam.special else []
    return {
        'values': closed,
        'casimir_mismatch': mismatched,
        'coincident': coincident,
        'borderline_values': borderline,
        'ok': not mismatched and coincident == expected and (borderline or not lam.special),
    }


class Filtration:
    """V_i: the submodule generated by w_k (x) v_lambda, k <= i."""

    def __init__(self, tensor, natural, verma):
        self.tensor = tensor
        self.natural = natural
        self.verma = verma
        self._spans = {}

    def generators(self, i):
        v = self.verma.highest_vector()
        return [self.tensor.pure(self.natural.node_vector(k), v) for k in range(1, i + 1)
                if depth_height(self.natural.node_depth(k)) <= self.tensor.height]

    def span(self, i, depth):
        key = (i, depth)
        cached = self._spans.get(key)
        if cached is not None:
            return cached
        depths = [d for d in depths_below(depth) if self.tensor.dim(d)]
        closure = self.tensor.lowering_closure(self.generators(i), depths)
        for d, echelon in closure.items():
            self._spans.setdefault((i, d), echelon)
        return self._spans.setdefault(key, linalg.Echelon(self.tensor.domain))

    def top_vector(self, j):
        return self.tensor.pure(self.natural.node_vector(j), self.verma.highest_vector())

    def leading(self, x, j):
        """C with x = C w_j (x) v_lambda modulo V_{j-1}."""
        top = self.top_vector(j)
        if x.depth != top.depth:
            raise DecompositionError(f"vector at depth {x.depth} is not at the weight of w_{j}",
                                     code='weight_mismatch')
        echelon = self.span(j - 1, top.depth)
        residual, _ = echelon.reduce(x.coords)
        base, _ = echelon.reduce(top.coords)
        if not base:
            raise DecompositionError(f"w_{j} (x) v_lambda lies in V_{j - 1}", code='not_a_step',
                                     details={'node': j})
        if not residual:
            return self.tensor.domain.zero
        pivot = min(base)
        ratio = residual.get(pivot, self.tensor.domain.zero) / base[pivot]
        if linalg.combine([(1, residual), (-ratio, base)]):
            raise DecompositionError(f"vector is not a multiple of w_{j} (x) v_lambda modulo V_{j - 1}",
                                     code='not_principal', details={'node': j})
        return ratio


def principal_diag_local(lam, domain, i, j):
    """Product of the per-edge factors -s q^{(lambda, nu_k - nu_c) + (nu_k - nu_c, nu_j - nu_k)}."""
    poset = lam.levi.poset
    rs = lam.levi.root_system
    nodes = poset.nodes_on_path(i, j)
    labels = poset.principal_word(i, j)
    target = rs.node_weight(j)
    total = domain.one
    for current, label, following in zip(nodes, labels, nodes[1:]):
        step = _vsub(rs.node_weight(following), rs.node_weight(current))
        exponent = lam.pairing(step) + rs.pairing(step, _vsub(target, rs.node_weight(following)))
        total = total * domain.from_int(-poset.edge_sign(current, label)) * domain.monomial(exponent)
    return total


def principal_diag_global(lam, domain, i, j):
    """The same constant from the path sign and (nu_j - nu_i, nu_j) - sum (nu_k, nu_k) + (lambda, nu_j - nu_i)."""
    poset = lam.levi.poset
    rs = lam.levi.root_system
    nodes = poset.nodes_on_path(i, j)
    labels = poset.principal_word(i, j)
    sign = 1
    for current, label in zip(nodes, labels):
        sign *= -poset.edge_sign(current, label)
    nu_i, nu_j = rs.node_weight(i), rs.node_weight(j)
    step = _vsub(nu_j, nu_i)
    constant = rs.pairing(step, nu_j) - sum(rs.pairing(rs.node_weight(k), rs.node_weight(k))
                                            for k in nodes[1:])
    return domain.from_int(sign) * domain.monomial(lam.pairing(step) + constant)


def principal_diag_solver(filtration, i, j):
    """C with w_i (x) psi^{ij} v_lambda = C w_j (x) v_lambda modulo V_{j-1}."""
    verma = filtration.verma
    word = filtration.natural.poset.principal_word(i, j)
    x = filtration.tensor.pure(filtration.natural.node_vector(i), verma.word_vector(word))
    return filtration.leading(x, j)


def nonprincipal_defects(filtration, i, j, limit=120):
    """Reorderings psi of psi^{ij} with psi v != psi^{ij} v whose w_i (x) psi v survives modulo V_{j-1}."""
    verma = filtration.verma
    natural = filtration.natural
    principal = natural.poset.principal_word(i, j)
    reference = verma.word_vector(principal)
    defects = []
    for count, word in enumerate(sorted(set(permutations(principal)))):
        if count >= limit:
            break
        if word == principal:
            continue
        vector = verma.word_vector(word)
        if not (vector - reference):
            continue
        x = filtration.tensor.pure(natural.node_vector(i), vector)
        residual, _ = filtration.span(j - 1, x.depth).reduce(x.coords)
        if residual:
            defects.append(word)
    return defects


def generating_top(levi, verma, natural, index):
    """Top component y_1 of the singular vector u_{m_index}."""
    start = levi.block_starts[index - 1]
    depth = natural.node_depth(start)
    if index == levi.special_index:
        return build_generating(levi, 1).on_highest(verma)
    basis = verma.solve_generating(depth)
    if len(basis) != 1:
        raise DecompositionError(
            f"top component of u_{start} is not unique: {len(basis)} solutions at depth {depth}",
            code='ambiguous_generating', details={'block': index, 'dimension': len(basis)})
    return basis[0]


@dataclass
class Decomposition:
    """Singular vectors u_{m_i} within the truncation and the submodules M_i they generate."""

    tensor: object
    singular: dict
    components: dict
    skipped: list = field(default_factory=list)


def decompose(levi, tensor, natural, verma):
    """Build u_{m_i} for every block whose start fits under the truncation, and the M_i."""
    if tensor.height < 2:
        raise DecompositionError("height too small for target weights", code='height_too_small',
                                 details={'height': tensor.height})
    singular, skipped = {}, []
    for index, start in enumerate(levi.block_starts, start=1):
        depth = natural.node_depth(start)
        if depth_height(depth) > tensor.height:
            skipped.append(index)
            continue
        top = generating_top(levi, verma, natural, index)
        u, _ = singular_tensor(tensor, natural, top)
        if not u:
            raise DecompositionError(f"singular vector u_{start} vanishes", code='zero_singular',
                                     details={'block': index})
        singular[index] = u
    depths = tensor.keys()
    components = {index: tensor.lowering_closure([u], depths) for index, u in singular.items()}
    logger.info("decomposition: %d singular vectors, %d beyond height %d",
                len(singular), len(skipped), tensor.height)
    return Decomposition(tensor, singular, components, skipped)


def check_direct_sum(decomposition):
    """Per depth: dim, sum of dim M_i, rank of their union. The sum is direct and full when all agree."""
    tensor = decomposition.tensor
    rows = []
    ok = True
    for depth in tensor.keys():
        total = tensor.dim(depth)
        pieces = [spans[depth] for spans in decomposition.components.values() if depth in spans]
        union = linalg.Echelon(tensor.domain)
        for echelon in pieces:
            for row in echelon.rows:
                union.add(row)
        summed = sum(echelon.rank for echelon in pieces)
        good = total == summed == union.rank
        ok = ok and good
        rows.append({'depth': list(depth), 'dim': total, 'sum': summed, 'union': union.rank, 'ok': good})
    return {'ok': ok, 'depths': rows}


class SpectralQ:
    """Q = sum x_i proj_i on the truncated C^N (x) M_lambda."""

    def __init__(self, decomposition, eigenvalues):
        self.decomposition = decomposition
        self.tensor = decomposition.tensor
        self.eigenvalues = {index: eigenvalues[index] for index in decomposition.components}
        self._bases = {}

    def _basis(self, depth):
        cached = self._bases.get(depth)
        if cached is not None:
            return cached
        echelon = linalg.Echelon(self.tensor.domain, track=True)
        vectors = {}
        for index, spans in self.decomposition.components.items():
            span = spans.get(depth)
            if span is None:
                continue
            for r, row in enumerate(span.rows):
                vectors[(index, r)] = row
                echelon.add(row, (index, r))
        self._bases[depth] = (echelon, vectors)
        return self._bases[depth]

    def decompose(self, x):
        """{index: part of x in M_index}."""
        echelon, vectors = self._basis(x.depth)
        combination = echelon.express(x.coords)
        if combination is None:
            raise DecompositionError(f"vector at depth {x.depth} is outside the sum of the M_i",
                                     code='not_spanned')
        parts = {}
        for (index, r), c in combination.items():
            linalg.axpy(parts.setdefault(index, {}), c, vectors[(index, r)])
        return {index: ModuleElement(x.depth, coords) for index, coords in parts.items()}

    def apply(self, x):
        result = {}
        for index, part in self.decompose(x).items():
            linalg.axpy(result, self.eigenvalues[index], part.coords)
        return ModuleElement(x.depth, result)

    def power(self, x, k):
        for _ in range(k):
            x = self.apply(x)
        return x

    def distinct_eigenvalues(self):
        distinct = []
        for value in self.eigenvalues.values():
            if all(value - seen for seen in distinct):
                distinct.append(value)
        return distinct

    def min_poly_residual(self, x):
        """prod (Q - x_i) over the distinct eigenvalues, applied to x."""
        for value in self.distinct_eigenvalues():
            x = self.apply(x) - x.scale(value)
        return x

    def equivariance_defects(self):
        """(generator, k, depth, index) where Q g b != g Q b for a basis vector b of height <= H - 1."""
        defects = []
        tensor = self.tensor
        for depth in tensor.keys():
            if depth_height(depth) > tensor.height - 1:
                continue
            for index in range(tensor.dim(depth)):
                b = tensor.basis_vector(depth, index)
                qb = self.apply(b)
                for k in range(1, tensor.root_system.rank + 1):
                    for generator, act in (('f', tensor.act_f), ('e', tensor.act_e)):
                        image = act(k, b)
                        if not image.coords and not act(k, qb).coords:
                            continue
                        if min(image.depth) < 0:
                            continue
                        if (self.apply(image) - act(k, qb)).coords:
                            defects.append((generator, k, depth, index))
        return defects


def principal_table(filtration, u, components, j):
    """Per component i of u: the solver values of c''_i = principal_diag(i, j) and c'_i."""
    natural = filtration.natural
    table = {}
    for i, y in sorted(components.items()):
        if not y or not natural.poset.leq(i, j):
            continue
        c_double = principal_diag_solver(filtration, i, j)
        product = filtration.leading(filtration.tensor.pure(natural.node_vector(i), y), j)
        c_prime = product / c_double if c_double else None
        table[i] = {'c_double': c_double, 'product': product, 'c_prime': c_prime}
    return table


def build_tensor(verma, height=None):
    natural = NaturalModule(verma.levi.poset, verma.domain)
    return natural, TensorModule(natural, verma, height)
