"""Root data for so(2n+1) and so(2n), the natural representation graph and Levi profiles."""

from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations

from .errors import RootDataError
from .scalars import ExponentForm

SERIES = ('B', 'D')


def _unit(n, i, sign=1):
    vector = [0] * n
    vector[i - 1] = sign
    return tuple(vector)


def _vadd(x, y):
    return tuple(a + b for a, b in zip(x, y))


def _vsub(x, y):
    return tuple(a - b for a, b in zip(x, y))


@dataclass(frozen=True)
class RootSystem:
    """Simple and positive roots in epsilon coordinates, with rho and the pairing."""

    series: str
    rank: int
    simple_roots: tuple
    positive_roots: tuple
    rho: tuple

    @property
    def N(self):
        return 2 * self.rank + 1 if self.series == 'B' else 2 * self.rank

    @property
    def n(self):
        return self.rank

    def pairing(self, x, y):
        return sum((Fraction(a) * b for a, b in zip(x, y)), Fraction(0))

    def pair_simple(self, x, k):
        """(x, alpha_k) as a Fraction."""
        return self.pairing(x, self.simple_roots[k - 1])

    def root_coords(self, x):
        """Coefficients of x in the simple roots; x must lie in the root lattice."""
        n = self.rank
        partial = [Fraction(0)] * (n + 1)
        for i in range(1, n + 1):
            partial[i] = partial[i - 1] + Fraction(x[i - 1])
        if self.series == 'B':
            coords = [partial[k] for k in range(1, n + 1)]
        else:
            coords = [partial[k] for k in range(1, n - 1)]
            coords.append((partial[n - 1] - Fraction(x[n - 1])) / 2)
            coords.append(partial[n] / 2)
        if any(c.denominator != 1 for c in coords):
            raise RootDataError(f"{x} is not in the root lattice", code='not_in_root_lattice')
        return tuple(int(c) for c in coords)

    def from_root_coords(self, coords):
        result = (0,) * self.rank
        for k, c in enumerate(coords, start=1):
            if c:
                result = _vadd(result, tuple(c * a for a in self.simple_roots[k - 1]))
        return result

    def height(self, x):
        return sum(self.root_coords(x))

    def node_weight(self, i):
        """epsilon-coordinates of the weight of w_i in C^N."""
        n, N = self.rank, self.N
        if not 1 <= i <= N:
            raise RootDataError(f"node {i} outside [1, {N}]", code='bad_node')
        if i <= n:
            return _unit(n, i)
        if self.series == 'B' and i == n + 1:
            return (0,) * n
        return _unit(n, N + 1 - i, -1)

    def rho_pairing(self, x):
        return self.pairing(self.rho, x)

    def pairing_exponent(self, x, y):
        return ExponentForm.q(self.pairing(x, y))


@lru_cache(maxsize=None)
def build_root_system(series, n):
    """Root system of so(2n+1) (series B, n >= 2) or so(2n) (series D, n >= 3)."""
    if series not in SERIES:
        raise RootDataError(f"unsupported series {series!r}", code='unsupported_series')
    if (series == 'B' and n < 2) or (series == 'D' and n < 3):
        raise RootDataError(f"unsupported rank {n} for series {series}", code='unsupported_rank')

    simple = [_vsub(_unit(n, i), _unit(n, i + 1)) for i in range(1, n)]
    if series == 'B':
        simple.append(_unit(n, n))
    else:
        simple.append(_vadd(_unit(n, n - 1), _unit(n, n)))

    positive = []
    for i, j in combinations(range(1, n + 1), 2):
        positive.append(_vsub(_unit(n, i), _unit(n, j)))
        positive.append(_vadd(_unit(n, i), _unit(n, j)))
    if series == 'B':
        positive.extend(_unit(n, i) for i in range(1, n + 1))
    N = 2 * n + 1 if series == 'B' else 2 * n
    rho = tuple(Fraction(N, 2) - i for i in range(1, n + 1))
    return RootSystem(series, n, tuple(simple), tuple(sorted(positive, reverse=True)), rho)


class HassePoset:
    """Representation graph of C^N: edges i -> j labelled by a simple root with f w_i = +-w_j."""

    def __init__(self, root_system):
        self.root_system = root_system
        self.N = root_system.N
        self.edges = {}
        self.reverse = {}
        weights = {i: root_system.node_weight(i) for i in range(1, self.N + 1)}
        by_weight = {w: i for i, w in weights.items()}
        for i in range(1, self.N + 1):
            for k, alpha in enumerate(root_system.simple_roots, start=1):
                j = by_weight.get(_vsub(weights[i], alpha))
                if j is not None:
                    self.edges.setdefault(i, []).append((j, k))
                    self.reverse.setdefault(j, []).append((i, k))
        for targets in self.edges.values():
            targets.sort()
        self._paths = {}

    def sgn(self, i):
        return 0 if 2 * i <= self.N else 1

    def sign(self, i):
        return -1 if self.sgn(i) else 1

    def edge_sign(self, i, k):
        """Sign of f_{alpha_k} w_i; (-1)^sgn_i except on the D-series edge n+1 -> n+2.

        With the plain node rule f_{alpha_{n-1}} and f_{alpha_n} would anticommute
        on w_{n-1}; that one edge carries +1 instead.
        """
        rs = self.root_system
        if rs.series == 'D' and i == rs.rank + 1 and k == rs.rank - 1:
            return 1
        return self.sign(i)

    def natural_action(self, generator, k, i):
        """(sign, target) of f_{alpha_k} or e_{alpha_k} on w_i, or None."""
        if generator == 'f':
            for j, label in self.edges.get(i, ()):
                if label == k:
                    return self.edge_sign(i, k), j
            return None
        if generator == 'e':
            for j, label in self.reverse.get(i, ()):
                if label == k:
                    return self.edge_sign(j, k), j
            return None
        raise RootDataError(f"unknown generator {generator!r}", code='bad_generator')

    def dual_action(self, generator, k, i):
        """Action on the dual basis v^i through the antipode: (sign, q-exponent, target) or None.

        S(f) = -f K and S(e) = -K^-1 e for the coproduct used throughout.
        """
        rs = self.root_system
        if generator == 'f':
            for source, label in self.reverse.get(i, ()):
                if label == k:
                    exponent = rs.pairing_exponent(rs.simple_roots[k - 1], rs.node_weight(source))
                    return -self.edge_sign(source, k), exponent, source
            return None
        if generator == 'e':
            for target, label in self.edges.get(i, ()):
                if label == k:
                    exponent = -rs.pairing_exponent(rs.simple_roots[k - 1], rs.node_weight(i))
                    return -self.edge_sign(i, k), exponent, target
            return None
        raise RootDataError(f"unknown generator {generator!r}", code='bad_generator')

    def path(self, i, j):
        """Edge labels along the canonical path from i to j (smaller intermediate nodes first)."""
        key = (i, j)
        if key in self._paths:
            return self._paths[key]
        found = None
        if i == j:
            found = ()
        else:
            queue = deque([(i, ())])
            seen = {i}
            while queue and found is None:
                node, labels = queue.popleft()
                for target, label in self.edges.get(node, ()):
                    if target in seen:
                        continue
                    if target == j:
                        found = labels + (label,)
                        break
                    seen.add(target)
                    queue.append((target, labels + (label,)))
        self._paths[key] = found
        return found

    def nodes_on_path(self, i, j):
        labels = self.principal_word(i, j)
        nodes = [i]
        for label in labels:
            nodes.append(self.natural_action('f', label, nodes[-1])[1])
        return nodes

    def leq(self, i, j):
        return self.path(i, j) is not None

    def comparable(self, i, j):
        return self.leq(i, j) or self.leq(j, i)

    def principal_word(self, i, j):
        """psi^{ij}: edge labels from w_i to w_j in the order they are applied to w_i.

        act_word treats word[0] as the outermost letter, so act_word(labels, x) applies the last label first.
        """
        labels = self.path(i, j)
        if labels is None:
            raise RootDataError(f"incomparable nodes {i} and {j}", code='incomparable_nodes')
        return labels

    def predecessor(self, j):
        """The (node, label) from which j is first reached on canonical paths from 1."""
        sources = sorted(self.reverse.get(j, ()))
        return sources[0] if sources else None


def word_weight(root_system, word):
    """epsilon-weight of an FWord: minus the sum of its root labels."""
    total = (0,) * root_system.rank
    for k in word:
        total = _vsub(total, root_system.simple_roots[k - 1])
    return total


def word_depth(root_system, word):
    depth = [0] * root_system.rank
    for k in word:
        depth[k - 1] += 1
    return tuple(depth)


def kostant_count(depth, roots):
    """Number of ways to write depth as a multiset sum of the given roots (root coordinates)."""
    roots = tuple(sorted(roots))

    @lru_cache(maxsize=None)
    def count(target, start):
        if not any(target):
            return 1
        total = 0
        for index in range(start, len(roots)):
            root = roots[index]
            rest = tuple(t - r for t, r in zip(target, root))
            if min(rest) >= 0:
                total += count(rest, index)
        return total

    return count(tuple(depth), 0)


VARIANTS = ('borderline', 'hat', 'full')


@dataclass(frozen=True)
class LeviProfile:
    """Borderline Levi data gl(n_1)+...+gl(n_l)+so(2)+so(P) inside so(N)."""

    series: str
    blocks: tuple
    p: int
    variant: str = 'borderline'

    def __post_init__(self):
        if self.series not in SERIES:
            raise RootDataError(f"unsupported series {self.series!r}", code='unsupported_series')
        if any(int(b) < 1 for b in self.blocks) or self.p < 0:
            raise RootDataError("block sizes must be >= 1 and p >= 0", code='inconsistent_totals')
        if self.series == 'D' and self.p < 1:
            raise RootDataError("series D needs p >= 1", code='inconsistent_totals')
        if self.variant not in VARIANTS:
            raise RootDataError(f"unknown Levi variant {self.variant!r}", code='bad_variant')
        object.__setattr__(self, 'blocks', tuple(int(b) for b in self.blocks))
        build_root_system(self.series, self.n)

    @property
    def ell(self):
        return len(self.blocks)

    @property
    def l(self):
        return sum(self.blocks)

    @property
    def n(self):
        return self.l + 1 + self.p

    @property
    def N(self):
        return 2 * self.n + 1 if self.series == 'B' else 2 * self.n

    @property
    def P(self):
        return 2 * self.p + 1 if self.series == 'B' else 2 * self.p

    @property
    def root_system(self):
        return build_root_system(self.series, self.n)

    @property
    def poset(self):
        return _poset(self.series, self.n)

    @property
    def d0(self):
        return self.p + 1 if self.P % 2 else self.p

    @property
    def d1(self):
        return 3 * self.p + 3 if self.P % 2 else 3 * self.p + 1

    @property
    def multiplicities(self):
        """n_1..n_{2l+3}: GL blocks, the two so(2) lines, so(P), mirrored GL blocks."""
        return self.blocks + (1, self.P, 1) + tuple(reversed(self.blocks))

    @property
    def block_starts(self):
        """m_1..m_{2l+3}: first node of each irreducible Levi block of C^N."""
        starts = []
        node = 1
        for size in self.multiplicities:
            starts.append(node)
            node += size
        return tuple(starts)

    @property
    def special_index(self):
        """Index i of the block starting at N - l, whose eigenvalue collides with block l+1."""
        return self.ell + 3

    def node_block(self, j):
        """Block index (1-based) containing node j."""
        for index, start in enumerate(self.block_starts, start=1):
            if start <= j < start + self.multiplicities[index - 1]:
                return index
        raise RootDataError(f"node {j} outside [1, {self.N}]", code='bad_node')

    def gl_ranges(self):
        """Index sets of eps_1..eps_l carrying a common lambda value."""
        ranges = []
        start = 1
        if self.variant == 'borderline':
            for size in self.blocks:
                ranges.append(tuple(range(start, start + size)))
                start += size
        else:
            ranges = [(i,) for i in range(1, self.l + 1)]
        return ranges

    def levi_simple_roots(self):
        """Indices k of simple roots lying in the Levi subalgebra."""
        rs = self.root_system
        if self.variant == 'full':
            return frozenset()
        so_p = set(range(self.l + 2, self.n + 1))
        levi = set()
        for k, alpha in enumerate(rs.simple_roots, start=1):
            support = {i for i, a in enumerate(alpha, start=1) if a}
            if support and support <= so_p:
                levi.add(k)
        if self.variant == 'borderline':
            for block in self.gl_ranges():
                for k in block[:-1]:
                    levi.add(k)
        return frozenset(levi)

    def with_variant(self, variant):
        return LeviProfile(self.series, self.blocks, self.p, variant)

    def describe(self):
        return {
            'series': self.series,
            'blocks': list(self.blocks),
            'p': self.p,
            'variant': self.variant,
            'N': self.N,
            'l': self.l,
            'P': self.P,
            'block_starts': list(self.block_starts),
            'd0': self.d0,
            'd1': self.d1,
        }


@lru_cache(maxsize=None)
def _poset(series, n):
    return HassePoset(build_root_system(series, n))


def build_levi_profile(blocks, p, series, variant='borderline', N=None):
    """Validated LeviProfile; N, when given, must match 2l + 2 + P."""
    profile = LeviProfile(series, tuple(blocks), p, variant)
    if N is not None and N != profile.N:
        raise RootDataError(
            f"inconsistent totals: blocks {tuple(blocks)} and p = {p} give N = {profile.N}, not {N}",
            code='inconsistent_totals')
    return profile
