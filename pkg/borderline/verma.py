"""Parabolic Verma modules M_lambda = U_q(g_-)/U_q(g_-)l_- acting on v_lambda.

Weight spaces are keyed by their depth: the root coordinates of lambda - mu.
Each depth carries a basis of f-words; a word is f_beta applied to a basis
word one level up. The f-action in these bases does not depend on lambda, so
it is computed once at a generic reference weight (where M_lambda is simple
and a vector vanishes exactly when all e_alpha kill it) and reused at every
evaluation weight. The e-action at the evaluation weight comes from the
recursion e_a f_b x = f_b e_a x + delta_ab [(wt x, a)]_q x.
"""

import hashlib
import logging
import pickle
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from . import linalg
from .errors import ModuleError
from .rootdata import kostant_count
from .scalars import (ExponentForm, NumericDomain, ScalarExpr, SpecializationPoint, SymbolicDomain,
                      borderline_value, random_point, to_gaussian)

logger = logging.getLogger(__name__)

REFERENCE_PRIMES = (79, 83, 89, 97, 101, 103, 107, 109, 113, 127, 131, 137,
                    139, 149, 151, 157, 163, 167, 173, 179)

CACHE_VERSION = 1


def shift(depth, k, amount=1):
    """depth + amount * e_k, or None when a coordinate turns negative."""
    shifted = list(depth)
    shifted[k - 1] += amount
    if shifted[k - 1] < 0:
        return None
    return tuple(shifted)


def _raw_shift(depth, k, amount):
    shifted = list(depth)
    shifted[k - 1] += amount
    return tuple(shifted)


def depth_height(depth):
    return sum(depth)


def depths_up_to(rank, height):
    """All nonnegative integer depths of the given rank with height <= height, by height."""
    result = [(0,) * rank]
    frontier = [(0,) * rank]
    for _ in range(height):
        following = []
        seen = set()
        for depth in frontier:
            for k in range(1, rank + 1):
                up = shift(depth, k)
                if up not in seen:
                    seen.add(up)
                    following.append(up)
        following.sort(reverse=True)
        result.extend(following)
        frontier = following
    return result


def depths_below(depth):
    """Every depth componentwise <= depth, by height."""
    result = [()]
    for bound in depth:
        result = [prefix + (c,) for prefix in result for c in range(bound + 1)]
    return sorted(result, key=lambda d: (depth_height(d), tuple(-c for c in d)))


@dataclass(frozen=True)
class LambdaProfile:
    """The highest weight: one free block variable per Levi block, optionally the special relation.

    borderline: GL block k carries Lambda_k, eps_{l+1} carries Lambda_{ell+1}, so(P) carries 0.
    hat: each eps_i, i <= l+1, carries its own Lambda_i.
    full: each eps_i, i <= n, carries its own Lambda_i.
    """

    levi: object
    special: bool = True

    @property
    def variables(self):
        if self.levi.variant == 'full':
            return self.levi.n
        return len(self.levi.gl_ranges()) + 1

    @property
    def special_variable(self):
        """Index of the block variable attached to eps_{l+1}."""
        return len(self.levi.gl_ranges()) + 1

    @property
    def imposed(self):
        if not self.special:
            return None
        return self.special_variable, self.levi.P

    def lam(self, i):
        """(lambda, eps_i) for 1 <= i <= N."""
        levi = self.levi
        n, N = levi.n, levi.N
        if i > n:
            if levi.series == 'B' and i == n + 1:
                return ExponentForm()
            return -self.lam(N + 1 - i)
        for k, block in enumerate(levi.gl_ranges(), start=1):
            if i in block:
                return ExponentForm.block(k)
        if i == levi.l + 1:
            return ExponentForm.block(self.special_variable)
        if levi.variant == 'full':
            return ExponentForm.block(i)
        return ExponentForm()

    def pairing(self, x):
        """(lambda, x) for an epsilon-vector x with integer entries."""
        total = ExponentForm()
        for i, coefficient in enumerate(x, start=1):
            coefficient = Fraction(coefficient)
            if coefficient.denominator != 1:
                raise ModuleError(f"weight {x} is not integral", code='non_integral_weight')
            if coefficient:
                total = total + self.lam(i) * int(coefficient)
        return total

    def with_special(self, special):
        return LambdaProfile(self.levi, special)

    def symbolic_domain(self):
        substitutions = {}
        if self.special:
            substitutions[self.special_variable] = borderline_value(self.levi.P)
        return SymbolicDomain(substitutions)

    def numeric_domain(self, seed=0):
        return NumericDomain(random_point(seed, self.variables, imposed=self.imposed))

    def domain(self, mode, seed=0):
        if mode == 'symbolic':
            return self.symbolic_domain()
        if mode == 'numeric':
            return self.numeric_domain(seed)
        raise ModuleError(f"unknown mode {mode!r}", code='bad_mode')

    def describe(self):
        return {
            'lambda': [str(self.lam(i)) for i in range(1, self.levi.n + 1)],
            'special': self.special,
            'variables': self.variables,
        }


def _reference_values(variables, seed):
    primes = list(REFERENCE_PRIMES)
    rotation = (2 * seed) % len(primes)
    primes = primes[rotation:] + primes[:rotation]
    return {k: Fraction(primes[2 * k - 2], primes[2 * k - 1]) for k in range(1, variables + 1)}


def reference_domain(domain, variables, seed=0):
    """A generic weight sharing v with the evaluation domain."""
    values = _reference_values(variables, seed)
    if isinstance(domain, NumericDomain):
        z = tuple((k, to_gaussian(value)) for k, value in values.items())
        return NumericDomain(SpecializationPoint(domain.point.v, z))
    return SymbolicDomain({k: ScalarExpr(value) for k, value in values.items()})


@dataclass(frozen=True)
class ModuleElement:
    """A vector of one weight space: sparse coordinates in the word basis at depth."""

    depth: tuple
    coords: dict

    def __bool__(self):
        return bool(self.coords)

    def __add__(self, other):
        self._check(other)
        return ModuleElement(self.depth, linalg.add(self.coords, other.coords))

    def __sub__(self, other):
        self._check(other)
        return ModuleElement(self.depth, linalg.combine([(1, self.coords), (-1, other.coords)]))

    def scale(self, factor):
        return ModuleElement(self.depth, linalg.scale(self.coords, factor))

    def _check(self, other):
        if other.depth != self.depth:
            raise ModuleError(f"weights differ: depth {self.depth} vs {other.depth}",
                              code='weight_mismatch')


@dataclass(frozen=True)
class WeightSpaceBasis:
    depth: tuple
    words: tuple
    expansions: dict


class WeightModule:
    """Weight spaces keyed by depth below a top weight, with e/f maps between them.

    Subclasses provide dim, top_exponent, f_map and e_map; maps are lists of
    sparse columns, one per basis vector of the source space.
    """

    root_system = None
    domain = None
    height = None

    def dim(self, depth):
        raise NotImplementedError

    def top_exponent(self, x):
        """(top weight, x) as an ExponentForm, x an epsilon-vector."""
        raise NotImplementedError

    def f_map(self, k, depth):
        raise NotImplementedError

    def e_map(self, k, depth):
        raise NotImplementedError

    def depth_weight(self, depth):
        """epsilon-vector of sum depth_k alpha_k."""
        return self.root_system.from_root_coords(depth)

    def weight_exponent(self, depth, x):
        """(top - depth, x) as an ExponentForm."""
        below = self.root_system.pairing(self.depth_weight(depth), x)
        return self.top_exponent(x) - below

    def exponent(self, depth, k):
        return self.weight_exponent(depth, self.root_system.simple_roots[k - 1])

    def cartan(self, depth, k, power=1):
        """q^{power (wt, alpha_k)} on the weight space at depth."""
        return self.domain.monomial(self.exponent(depth, k) * power)

    def bracket(self, depth, x, constant=0):
        """[(wt, x) + constant]_q on the weight space at depth."""
        return self.domain.qnum(self.weight_exponent(depth, x) + constant)

    def keys(self):
        """Every depth with a nonzero weight space inside the truncation."""
        return [depth for depth in depths_up_to(self.root_system.rank, self.height)
                if self.dim(depth)]

    def act_f(self, k, x):
        target = _raw_shift(x.depth, k, 1)
        if depth_height(target) > self.height:
            raise ModuleError(f"height exceeded: depth {target} beyond {self.height}",
                              code='height_exceeded')
        if not x.coords:
            return ModuleElement(target, {})
        return ModuleElement(target, linalg.apply_map(self.f_map(k, x.depth), x.coords))

    def act_e(self, k, x):
        target = _raw_shift(x.depth, k, -1)
        if not x.coords or min(target) < 0:
            return ModuleElement(target, {})
        return ModuleElement(target, linalg.apply_map(self.e_map(k, x.depth), x.coords))

    def act_word(self, word, x, generator='f'):
        """Apply a word of f's (or e's), outermost letter first."""
        act = self.act_f if generator == 'f' else self.act_e
        for k in reversed(word):
            x = act(k, x)
        return x

    def basis_vector(self, depth, index):
        return ModuleElement(depth, {index: self.domain.one})

    def zero(self, depth):
        return ModuleElement(depth, {})

    def is_zero(self, x):
        return not x.coords

    def coordinates(self, x):
        """Dense coordinate list of x in the weight space basis."""
        return [x.coords.get(index, self.domain.zero) for index in range(self.dim(x.depth))]

    def lowering_closure(self, generators, depths):
        """Spans of U_q(g_-) applied to the generators, per depth in the given list.

        generators: ModuleElements. depths: the depths to fill, sorted by height.
        Returns {depth: Echelon}.
        """
        spans = {}
        for depth in depths:
            spans[depth] = linalg.Echelon(self.domain)
        for x in generators:
            if x.depth in spans:
                spans[x.depth].add(x.coords)
        for depth in depths:
            for k in range(1, self.root_system.rank + 1):
                source = shift(depth, k, -1)
                if source is None or source not in spans:
                    continue
                if not spans[source].rank:
                    continue
                columns = self.f_map(k, source)
                for row in spans[source].rows:
                    spans[depth].add(linalg.apply_map(columns, row))
        return spans


class VermaStructure:
    """The lambda-independent part: word bases per depth and the f-action matrices."""

    def __init__(self, levi, height, domain, reference_seed=0):
        self.levi = levi
        self.root_system = levi.root_system
        self.height = height
        self.reference_seed = reference_seed
        self.reference = LambdaProfile(levi, special=False)
        self.domain = reference_domain(domain, self.reference.variables, reference_seed)
        self.levi_roots = levi.levi_simple_roots()
        rs = self.root_system
        self._reference_top = {k: self.reference.pairing(alpha)
                               for k, alpha in enumerate(rs.simple_roots, start=1)}
        levi_coords = set()
        for root in rs.positive_roots:
            coords = rs.root_coords(root)
            if all(coords[k - 1] == 0 for k in range(1, rs.rank + 1) if k not in self.levi_roots):
                levi_coords.add(coords)
        self.nilradical = tuple(sorted(rs.root_coords(root) for root in rs.positive_roots
                                       if rs.root_coords(root) not in levi_coords))
        zero = (0,) * rs.rank
        self.words = {zero: [()]}
        self.origins = {zero: [None]}
        self.fmaps = {}
        self.emaps = {(k, zero): [{}] for k in range(1, rs.rank + 1)}

    @property
    def key(self):
        levi = self.levi
        return (f"v{CACHE_VERSION}-{levi.series}-{'.'.join(map(str, levi.blocks)) or 'none'}"
                f"-p{levi.p}-{levi.variant}-H{self.height}-r{self.reference_seed}"
                f"-{self.domain.name}-{_domain_tag(self.domain)}")

    def state(self):
        return {'words': self.words, 'origins': self.origins, 'fmaps': self.fmaps,
                'emaps': self.emaps}

    def restore(self, state):
        self.words = state['words']
        self.origins = state['origins']
        self.fmaps = state['fmaps']
        self.emaps = state['emaps']

    def dim(self, depth):
        return len(self.ensure(depth))

    def ensure(self, depth):
        """Word basis at depth, building lower depths on demand."""
        if depth is None:
            return []
        words = self.words.get(depth)
        if words is not None:
            return words
        if depth_height(depth) > self.height:
            raise ModuleError(f"height exceeded: depth {depth} beyond {self.height}",
                              code='height_exceeded')
        self._build(depth)
        return self.words[depth]

    def _reference_bracket(self, depth, k):
        rs = self.root_system
        below = rs.pairing(rs.from_root_coords(depth), rs.simple_roots[k - 1])
        return self.domain.qnum(self._reference_top[k] - below)

    def _e_piece(self, alpha, beta, parent, j):
        """e_alpha (f_beta b_j) at the reference weight, b_j in the basis at parent."""
        result = {}
        lower = shift(parent, alpha, -1)
        if lower is not None and self.ensure(lower):
            column = self.emaps[(alpha, parent)][j]
            if column:
                result = linalg.apply_map(self.fmaps[(beta, lower)], column)
        if alpha == beta:
            linalg.axpy(result, self._reference_bracket(parent, alpha), {j: self.domain.one})
        return result

    def _build(self, depth):
        rank = self.root_system.rank
        candidates = []
        for beta in range(1, rank + 1):
            parent = shift(depth, beta, -1)
            if parent is None:
                continue
            size = len(self.ensure(parent))
            if not any(parent) and beta in self.levi_roots:
                self.fmaps[(beta, parent)] = [{}]
                continue
            candidates.extend((beta, parent, j) for j in range(size))

        offsets = {}
        total = 0
        for alpha in range(1, rank + 1):
            lower = shift(depth, alpha, -1)
            if lower is None:
                continue
            offsets[alpha] = total
            total += len(self.ensure(lower))

        echelon = linalg.Echelon(self.domain, track=True)
        pieces = []
        basis_tags = []
        for tag, (beta, parent, j) in enumerate(candidates):
            piece = {alpha: self._e_piece(alpha, beta, parent, j) for alpha in offsets}
            flat = {}
            for alpha, vector in piece.items():
                for index, value in vector.items():
                    flat[offsets[alpha] + index] = value
            pieces.append((piece, flat))
            if echelon.add(flat, tag):
                basis_tags.append(tag)

        position = {tag: index for index, tag in enumerate(basis_tags)}
        words = []
        for tag in basis_tags:
            beta, parent, j = candidates[tag]
            words.append((beta,) + self.words[parent][j])
        for tag, (beta, parent, j) in enumerate(candidates):
            if tag in position:
                coords = {position[tag]: self.domain.one}
            else:
                combination = echelon.express(pieces[tag][1])
                if combination is None:
                    raise ModuleError(f"candidate word outside its weight space at depth {depth}",
                                      code='internal_consistency')
                coords = {position[t]: c for t, c in combination.items() if c}
            columns = self.fmaps.setdefault((beta, parent), [None] * len(self.words[parent]))
            columns[j] = coords

        for alpha in range(1, rank + 1):
            self.emaps[(alpha, depth)] = [
                pieces[tag][0].get(alpha, {}) if alpha in offsets else {} for tag in basis_tags]
        self.words[depth] = words
        self.origins[depth] = [candidates[tag] for tag in basis_tags]

        expected = kostant_count(depth, self.nilradical)
        if len(words) != expected:
            raise ModuleError(
                f"weight space at depth {depth} has {len(words)} basis words, expected {expected}",
                code='degenerate_reference', details={'depth': list(depth)})
        logger.debug("depth %s: %d candidates, dimension %d", depth, len(candidates), len(words))

    def f_map(self, k, depth):
        target = shift(depth, k)
        if depth_height(target) > self.height:
            raise ModuleError(f"height exceeded: depth {target} beyond {self.height}",
                              code='height_exceeded')
        self.ensure(depth)
        self.ensure(target)
        return self.fmaps.get((k, depth), [])

    def weight_basis(self, depth):
        """Basis words at depth plus the expansion of every spanning word f_beta * b."""
        words = self.ensure(depth)
        expansions = {}
        for beta in range(1, self.root_system.rank + 1):
            parent = shift(depth, beta, -1)
            if parent is None:
                continue
            for j, coords in enumerate(self.fmaps.get((beta, parent), [])):
                if coords is not None and j < len(self.words[parent]):
                    expansions[(beta,) + self.words[parent][j]] = coords
        return WeightSpaceBasis(depth, tuple(words), expansions)

    def differences(self, other):
        """Depths and f-maps where another structure (same profile, other reference weight) disagrees."""
        found = [('words', list(depth)) for depth in sorted(set(self.words) | set(other.words))
                 if self.words.get(depth) != other.words.get(depth)]
        zero = self.domain.zero
        for key in sorted(set(self.fmaps) | set(other.fmaps)):
            mine, theirs = self.fmaps.get(key), other.fmaps.get(key)
            if mine is None or theirs is None or len(mine) != len(theirs):
                found.append(('fmap', key[0], list(key[1])))
                continue
            for left, right in zip(mine, theirs):
                left, right = left or {}, right or {}
                if any(left.get(i, zero) - right.get(i, zero) for i in set(left) | set(right)):
                    found.append(('fmap', key[0], list(key[1])))
                    break
        return found


def _domain_tag(domain):
    if isinstance(domain, NumericDomain):
        return hashlib.sha1(str(domain.point.v).encode()).hexdigest()[:12]
    return 'sym'


class StructureCache:
    """Pickled VermaStructure states under a cache directory; bad entries are rebuilt."""

    def __init__(self, directory):
        self.directory = Path(directory) if directory else None

    def _path(self, structure):
        digest = hashlib.sha1(structure.key.encode()).hexdigest()[:16]
        return self.directory / f"verma-{digest}.pickle"

    def load(self, structure):
        if self.directory is None:
            return False
        path = self._path(structure)
        if not path.exists():
            return False
        try:
            with open(path, 'rb') as handle:
                payload = pickle.load(handle)
            if payload.get('key') != structure.key:
                return False
            structure.restore(payload['state'])
        except Exception as e:
            logger.warning("Ignoring unreadable cache entry %s: %s", path, e)
            return False
        logger.debug("Loaded structure constants from %s", path)
        return True

    def store(self, structure):
        if self.directory is None:
            return
        path = self._path(structure)
        try:
            self.directory.mkdir(parents=True, exist_ok=True)
            with open(path, 'wb') as handle:
                pickle.dump({'key': structure.key, 'state': structure.state()}, handle)
        except Exception as e:
            logger.warning("Could not write cache entry %s: %s", path, e)


class VermaModule(WeightModule):
    """M_lambda at an evaluation weight, sharing a VermaStructure."""

    def __init__(self, structure, lam, domain):
        if lam.levi != structure.levi:
            raise ModuleError("lambda profile and structure use different Levi data",
                              code='profile_mismatch')
        self.structure = structure
        self.lam = lam
        self.levi = lam.levi
        self.root_system = structure.root_system
        self.domain = domain
        self.height = structure.height
        self._emaps = {}

    def top_exponent(self, x):
        return self.lam.pairing(x)

    def dim(self, depth):
        if depth is None or min(depth) < 0 or depth_height(depth) > self.height:
            return 0
        return len(self.structure.ensure(depth))

    def words(self, depth):
        return self.structure.ensure(depth)

    def f_map(self, k, depth):
        return self.structure.f_map(k, depth)

    def e_map(self, k, depth):
        """Columns of e_{alpha_k} from depth to depth - alpha_k at this module's weight."""
        key = (k, depth)
        cached = self._emaps.get(key)
        if cached is not None:
            return cached
        lower = shift(depth, k, -1)
        words = self.structure.ensure(depth)
        if lower is None or not any(depth):
            columns = [{} for _ in words]
        else:
            columns = []
            for beta, parent, j in self.structure.origins[depth]:
                column = {}
                below = shift(parent, k, -1)
                if below is not None and self.dim(below):
                    inner = self.e_map(k, parent)[j]
                    if inner:
                        column = linalg.apply_map(self.structure.f_map(beta, below), inner)
                if beta == k:
                    linalg.axpy(column, self.domain.qnum(self.exponent(parent, k)),
                                {j: self.domain.one})
                columns.append(column)
        self._emaps[key] = columns
        return columns

    def highest_vector(self):
        return self.basis_vector((0,) * self.root_system.rank, 0)

    def word_vector(self, word):
        """f-word applied to v_lambda, outermost letter first."""
        return self.act_word(word, self.highest_vector())

    def weight_basis(self, depth):
        return self.structure.weight_basis(depth)

    def kostant_dimension(self, depth):
        return kostant_count(depth, self.structure.nilradical)

    def shapovalov(self, x, y):
        """Contravariant form: <v, v> = 1 and f adjoint to e."""
        if x.depth != y.depth:
            return self.domain.zero
        total = self.domain.zero
        words = self.words(x.depth)
        for index, coefficient in x.coords.items():
            image = self.act_word(tuple(reversed(words[index])), y, generator='e')
            value = image.coords.get(0)
            if value:
                total = total + coefficient * value
        return total

    def gram(self, vectors):
        return [[self.shapovalov(x, y) for y in vectors] for x in vectors]

    def constraint_rows(self, depth, operators):
        """Rows of the stacked linear maps given as words of e's (outermost first)."""
        size = self.dim(depth)
        stacked = []
        for word in operators:
            images = [self.act_word(word, self.basis_vector(depth, index), generator='e')
                      for index in range(size)]
            rows = {}
            for index, image in enumerate(images):
                for r, value in image.coords.items():
                    rows.setdefault(r, {})[index] = value
            stacked.extend(rows[r] for r in sorted(rows))
        return stacked

    def solve_generating(self, depth):
        """Basis of y at depth with e_{alpha_1}^2 y = 0 and e_{alpha_k} y = 0 for k >= 2."""
        if self.root_system.N <= 4:
            raise ModuleError("generating coefficients need N > 4", code='unsupported_rank')
        size = self.dim(depth)
        if not size:
            return []
        operators = [(1, 1)] + [(k,) for k in range(2, self.root_system.rank + 1)]
        rows = self.constraint_rows(depth, operators)
        basis = linalg.nullspace(self.domain, rows, size)
        return [ModuleElement(depth, vector) for vector in basis]


def build_verma(lam, height, domain, reference_seed=0, cache=None):
    """VermaModule for lam at the given truncation height, structure loaded from cache if present."""
    structure = VermaStructure(lam.levi, height, domain, reference_seed)
    if cache is not None and cache.load(structure):
        return VermaModule(structure, lam, domain)
    for depth in depths_up_to(structure.root_system.rank, height):
        structure.ensure(depth)
    if cache is not None:
        cache.store(structure)
    return VermaModule(structure, lam, domain)


def reference_defects(structure, seed):
    """Rebuild structure at another generic reference weight; the two must agree word for word."""
    other = VermaStructure(structure.levi, structure.height, structure.domain, seed)
    for depth in depths_up_to(structure.root_system.rank, structure.height):
        structure.ensure(depth)
        other.ensure(depth)
    return structure.differences(other)
