"""Invariants of Q: q-traces, their classical limit, the FRT data and the reflection equation.

The presentation of the quantized class is emitted as JSON with every scalar
in the canonical numerator/denominator form of ScalarExpr.render.
"""

import json
import logging
from fractions import Fraction
from pathlib import Path

from .errors import BorderlineError, DecompositionError, PresentationError, TraceError
from .linalg import rank
from .qoperator import (Decomposition, NaturalModule, SpectralQ, TensorModule, casimir_exponent,
                        eigenvalue_report, eigenvalues_closed_form, singular_space)
from .rootdata import build_levi_profile
from .scalars import ExponentForm, ScalarExpr, VAR_Z, classical_limit
from .verma import LambdaProfile, ModuleElement, depth_height

logger = logging.getLogger(__name__)

SCHEMA = 'borderline-ideal/1'


def _sinh(domain, e):
    m = domain.monomial(e)
    return m - domain.one / m


def theta(lam, domain, k):
    """sum over the weights nu of C^N of x_nu^k prod_{alpha > 0} [(lambda+nu+rho, alpha)]/[(lambda+rho, alpha)]."""
    rs = lam.levi.root_system
    total = domain.zero
    for node in range(1, rs.N + 1):
        nu = rs.node_weight(node)
        term = domain.monomial(casimir_exponent(lam, node) * k)
        for alpha in rs.positive_roots:
            base = lam.pairing(alpha) + rs.rho_pairing(alpha)
            denominator = _sinh(domain, base)
            if not denominator:
                raise TraceError("non-regular weight: (lambda + rho, alpha) = 0",
                                 code='non_regular', details={'root': list(alpha)})
            numerator = _sinh(domain, base + rs.pairing(nu, alpha))
            if not numerator:
                term = domain.zero
                break
            term = term * numerator / denominator
        if term:
            total = total + term
    return total


def trace_height(levi):
    """Height of the deepest node w_N below w_1: N - 1 for series B, N - 2 for D."""
    return levi.N - 1 if levi.series == 'B' else levi.N - 2


def spectral_trace(spectral, natural, verma, k):
    """sum_j q^{2(rho, nu_j)} <w_j (x) v_lambda, Q^k w_j (x) v_lambda>."""
    tensor = spectral.tensor
    rs = natural.root_system
    domain = tensor.domain
    v = verma.highest_vector()
    total = domain.zero
    for j in range(1, rs.N + 1):
        if depth_height(natural.node_depth(j)) > tensor.height:
            raise TraceError(f"height {tensor.height} does not reach w_{j} (x) v_lambda",
                             code='height_too_small')
        x = tensor.pure(natural.node_vector(j), v)
        (index,) = x.coords
        coefficient = spectral.power(x, k).coords.get(index)
        if coefficient:
            weight = domain.monomial(ExponentForm.q(2 * rs.rho_pairing(rs.node_weight(j))))
            total = total + weight * coefficient
    return total


def classical_factors(mus, sizes, P):
    """(root, multiplicity) of the classical conjugacy class: mu_i, -1, +1, mu_i^-1."""
    mus = [Fraction(mu) if isinstance(mu, int) else mu for mu in mus]
    factors = [(mu, size) for mu, size in zip(mus, sizes)]
    factors.append((-1, 2))
    factors.append((1, P))
    factors.extend((1 / mu, size) for mu, size in zip(mus, sizes))
    return factors


def check_admissible(mus):
    """mu_i^2 != 1 and mu_i != mu_j^{+-1} for i != j."""
    for i, mu in enumerate(mus, start=1):
        if not (mu * mu - 1):
            raise TraceError(f"mu_{i}^2 != 1 violated", code='inadmissible', details={'index': i})
    for i, mu in enumerate(mus, start=1):
        for j in range(i + 1, len(mus) + 1):
            other = mus[j - 1]
            if not (mu - other) or not (mu * other - 1):
                raise TraceError(f"mu_{i} != mu_{j}^(+-1) violated", code='inadmissible',
                                 details={'pair': [i, j]})


def classical_trace(mus, sizes, P, k):
    """tr A^k = sum n_i (mu_i^k + mu_i^-k) + 2 (-1)^k + P."""
    mus = [Fraction(mu) if isinstance(mu, int) else mu for mu in mus]
    check_admissible(mus)
    total = 2 * (-1) ** k + P
    for mu, size in zip(mus, sizes):
        total = total + size * (mu ** k + mu ** -k)
    return total


def block_variables(levi):
    """mu_i = z_i^2 for the GL blocks."""
    return [VAR_Z[i] ** 2 for i in range(levi.ell)]


def classical_check(lam, powers):
    """k -> (classical limit of theta^k, classical trace) for the symbolic borderline weight."""
    levi = lam.levi
    domain = lam.symbolic_domain()
    mus = block_variables(levi)
    results = {}
    for k in powers:
        limit = classical_limit(theta(lam, domain, k))
        expected = ScalarExpr.coerce(classical_trace(mus, levi.blocks, levi.P, k))
        results[k] = {'limit': limit, 'expected': expected, 'ok': not (limit - expected)}
    return results


def tau_minus_check(lam, domain=None):
    """prod_i (q^{2(lambda+rho, eps_i)} - q^{-2(lambda+rho, eps_i)}); the eps_{l+1} factor is -1 - (-1)^-1."""
    levi = lam.levi
    rs = levi.root_system
    domain = domain or lam.symbolic_domain()
    total = domain.one
    factors = {}
    for i in range(1, rs.rank + 1):
        unit = tuple(1 if j == i else 0 for j in range(1, rs.rank + 1))
        exponent = (lam.pairing(unit) + rs.rho_pairing(unit)) * 2
        factors[i] = _sinh(domain, exponent)
        total = total * factors[i]
    special = levi.l + 1
    return {'special_factor': domain.render(factors[special]), 'vanishes': not total,
            'special_factor_vanishes': not factors[special]}


class FRTData:
    """The braid operator S = q P_sym - q^-1 P_anti + q^{1-N} kappa on C^N (x) C^N."""

    def __init__(self, poset, domain):
        self.poset = poset
        self.domain = domain
        self.natural = natural = NaturalModule(poset, domain)
        rs = natural.root_system
        self.N = rs.N
        self.tensor = tensor = TensorModule(natural, natural, height=2 * natural.height)
        depths = {
            'symmetric': (0,) * rs.rank,
            'antisymmetric': rs.root_coords(rs.simple_roots[0]),
            'trivial': rs.root_coords(tuple(2 * c for c in rs.node_weight(1))),
        }
        singular = {}
        for name, depth in depths.items():
            space = singular_space(tensor, depth)
            if len(space) != 1:
                raise DecompositionError(f"C^N (x) C^N has {len(space)} singular vectors at depth {depth}",
                                         code='ambiguous_generating', details={'component': name})
            singular[name] = space[0]
        keys = tensor.keys()
        components = {name: tensor.lowering_closure([u], keys) for name, u in singular.items()}
        self.decomposition = Decomposition(tensor, singular, components)
        q = domain.monomial(ExponentForm.q(1))
        self.q_power = domain.monomial(ExponentForm.q(1 - self.N))
        self.braid = self._matrix(SpectralQ(self.decomposition, {
            'symmetric': q, 'antisymmetric': -(domain.one / q), 'trivial': self.q_power}))
        self.kappa = self._matrix(SpectralQ(self.decomposition, {
            'symmetric': domain.zero, 'antisymmetric': domain.zero, 'trivial': domain.one}))

    def _pair(self, depth, index):
        block, _, _ = self.tensor.locate(depth, index)
        return self.natural.node_at(block.left), self.natural.node_at(block.right)

    def _matrix(self, operator):
        matrix = {}
        for a in range(1, self.N + 1):
            for b in range(1, self.N + 1):
                x = self.tensor.pure(self.natural.node_vector(a), self.natural.node_vector(b))
                image = operator.apply(x)
                matrix[(a, b)] = {self._pair(image.depth, i): c for i, c in image.coords.items()}
        return matrix

    def kappa_rank(self):
        flat = [{(c - 1) * self.N + d: value for (c, d), value in row.items()} for row in self.kappa.values()]
        return rank(self.domain, flat)


def _apply_pair(matrix, vector, legs):
    """Apply a two-leg matrix to a vector keyed by tuples, on the given pair of legs."""
    first, second = legs
    result = {}
    for key, value in vector.items():
        images = matrix.get((key[first], key[second]), {})
        for (c, d), coefficient in images.items():
            target = list(key)
            target[first], target[second] = c, d
            target = tuple(target)
            total = result.get(target)
            total = value * coefficient if total is None else total + value * coefficient
            if total:
                result[target] = total
            else:
                result.pop(target, None)
    return result


def _subtract(left, right):
    result = dict(left)
    for key, value in right.items():
        total = result.get(key)
        total = -value if total is None else total - value
        if total:
            result[key] = total
        else:
            result.pop(key, None)
    return result


def braid_defects(frt):
    """Basis vectors of (C^N)^{(x)3} where S12 S23 S12 != S23 S12 S23."""
    defects = []
    size = frt.N
    for a in range(1, size + 1):
        for b in range(1, size + 1):
            for c in range(1, size + 1):
                x = {(a, b, c): frt.domain.one}
                left = _apply_pair(frt.braid, _apply_pair(frt.braid, _apply_pair(frt.braid, x, (0, 1)), (1, 2)), (0, 1))
                right = _apply_pair(frt.braid, _apply_pair(frt.braid, _apply_pair(frt.braid, x, (1, 2)), (0, 1)), (1, 2))
                if _subtract(left, right):
                    defects.append((a, b, c))
    return defects


def kappa_idempotent(frt):
    defects = []
    for (a, b) in frt.kappa:
        x = {(a, b): frt.domain.one}
        once = _apply_pair(frt.kappa, x, (0, 1))
        twice = _apply_pair(frt.kappa, once, (0, 1))
        if _subtract(once, twice):
            defects.append((a, b))
    return defects


class ThreeLegs:
    """Vectors of C^N (x) (C^N (x) M_lambda) keyed by (a, depth, index) of the second and third legs."""

    def __init__(self, spectral, natural):
        self.spectral = spectral
        self.tensor = spectral.tensor
        self.natural = natural

    def split(self, depth, index):
        block, _, m = self.tensor.locate(depth, index)
        return self.natural.node_at(block.left), block.right, m

    def join(self, b, right_depth, m):
        left_depth = self.natural.node_depth(b)
        depth = tuple(x + y for x, y in zip(left_depth, right_depth))
        block = self.tensor.layout(depth)[2].get((left_depth, right_depth))
        if block is None:
            raise DecompositionError("vector left the truncation", code='height_exceeded')
        return depth, block.offset + m

    def q2(self, vector):
        grouped = {}
        for (a, depth, index), value in vector.items():
            grouped.setdefault((a, depth), {})[index] = value
        result = {}
        for (a, depth), coords in grouped.items():
            image = self.spectral.apply(ModuleElement(depth, coords))
            for index, value in image.coords.items():
                result[(a, depth, index)] = value
        return result

    def s12(self, matrix, vector):
        result = {}
        for (a, depth, index), value in vector.items():
            b, right_depth, m = self.split(depth, index)
            for (c, d), coefficient in matrix.get((a, b), {}).items():
                key = (c,) + self.join(d, right_depth, m)
                total = result.get(key)
                total = value * coefficient if total is None else total + value * coefficient
                if total:
                    result[key] = total
                else:
                    result.pop(key, None)
        return result


def re_check(spectral, frt, natural, verma, limit=None):
    """S12 Q2 S12 Q2 = Q2 S12 Q2 S12 and the kappa relations on w_a (x) w_b (x) m below the height."""
    legs = ThreeLegs(spectral, natural)
    tensor = spectral.tensor
    height = tensor.height
    re_defects, kappa_defects = [], []
    checked = 0
    for depth in verma.keys():
        for a in range(1, natural.root_system.N + 1):
            for b in range(1, natural.root_system.N + 1):
                total = depth_height(natural.node_depth(a)) + depth_height(natural.node_depth(b)) + depth_height(depth)
                if total > height:
                    continue
                for m in range(verma.dim(depth)):
                    if limit is not None and checked >= limit:
                        break
                    checked += 1
                    x = {(a,) + legs.join(b, depth, m): tensor.domain.one}
                    left = legs.q2(legs.s12(frt.braid, legs.q2(legs.s12(frt.braid, x))))
                    right = legs.s12(frt.braid, legs.q2(legs.s12(frt.braid, legs.q2(x))))
                    if _subtract(left, right):
                        re_defects.append((a, b, list(depth), m))
                    projected = legs.s12(frt.kappa, x)
                    fused = legs.q2(legs.s12(frt.braid, legs.q2(projected)))
                    scaled = {key: frt.q_power * value for key, value in projected.items()}
                    after = legs.s12(frt.kappa, legs.q2(legs.s12(frt.braid, legs.q2(x))))
                    if _subtract(fused, scaled) or _subtract(after, {key: frt.q_power * value for key, value
                                                                      in legs.s12(frt.kappa, x).items()}):
                        kappa_defects.append((a, b, list(depth), m))
    return {'checked': checked, 're_defects': re_defects, 'kappa_defects': kappa_defects}


def ideal_constants(lam, domain):
    """mu_1..mu_ell, the so(2) and so(P) values and the mirrored mu_i^-1 q^{-2N+2(n_i+1)}."""
    levi = lam.levi
    ell, N, P = levi.ell, levi.N, levi.P
    values = eigenvalues_closed_form(lam, domain)
    mus = [values[i] for i in range(1, ell + 1)]
    constants = {
        'mu': mus,
        'so2': -domain.monomial(ExponentForm.q(2 - N)),
        'soP': domain.monomial(ExponentForm.q(P - N)),
        'mirrored': [domain.one / mu * domain.monomial(ExponentForm.q(-2 * N + 2 * (size + 1)))
                     for mu, size in zip(mus, levi.blocks)],
    }
    return constants, values


def emit_ideal(lam):
    """The presentation as a JSON-ready dict, always over the symbolic borderline weight."""
    levi = lam.levi
    if levi.variant != 'borderline' or not lam.special:
        raise PresentationError("the ideal is emitted for the borderline weight only", code='bad_profile')
    domain = lam.symbolic_domain()
    coincident = eigenvalue_report(lam, domain)['coincident']
    if coincident != [(levi.ell + 1, levi.ell + 3)]:
        raise PresentationError(
            f"expected the single coincidence x_{levi.ell + 1} = x_{levi.ell + 3}, got {coincident}",
            code='non_regular', details={'coincident': coincident})
    constants, values = ideal_constants(lam, domain)
    mismatched = [i for i, value in enumerate(constants['mirrored'], start=1)
                  if value - values[2 * levi.ell + 4 - i]]
    if mismatched:
        raise PresentationError(f"mirrored constants disagree with the eigenvalues at {mismatched}",
                                code='internal_consistency')
    distinct = []
    for value in values.values():
        if all(value - seen for seen in distinct):
            distinct.append(value)
    mus = block_variables(levi)
    traces = []
    for k in range(1, levi.N + 1):
        value = theta(lam, domain, k)
        traces.append({'k': k, 'value': domain.render(value)})
    return {
        'schema': SCHEMA,
        'levi': {'series': levi.series, 'blocks': list(levi.blocks), 'p': levi.p, 'N': levi.N},
        'roots': [{'index': i, 'block_start': levi.block_starts[i - 1],
                   'multiplicity': levi.multiplicities[i - 1], 'value': domain.render(value)}
                  for i, value in values.items()],
        'minimal_polynomial': [domain.render(value) for value in distinct],
        'traces': traces,
        'classical': {
            'factors': [{'root': str(root), 'multiplicity': size}
                        for root, size in classical_factors(mus, levi.blocks, levi.P)],
            'traces': [{'k': k, 'value': str(classical_trace(mus, levi.blocks, levi.P, k))}
                       for k in range(1, levi.N + 1)],
        },
        'notes': [
            "Q acts on C^N (x) M_lambda; the trace entries are tr_q Q^k evaluated at v_lambda",
            "tau-minus vanishes: the eps_{l+1} factor is -1 - (-1)^-1 = 0 at the borderline weight",
        ],
    }


def write_ideal(payload, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + '\n')
    return path


def verify_presentation(path):
    """Re-parse an emitted presentation and re-check every field from the file alone.

    Roots against the closed-form eigenvalues, the minimal polynomial against the
    distinct roots, the classical block against a recomputation and the traces
    against their classical limit.
    """
    try:
        payload = json.loads(Path(path).read_text())
    except (OSError, ValueError) as e:
        raise PresentationError(f"cannot read presentation {path}: {e}", code='unreadable')
    try:
        if payload['schema'] != SCHEMA:
            raise PresentationError(f"unknown schema {payload['schema']!r}", code='bad_schema')
        described = payload['levi']
        levi = build_levi_profile(described['blocks'], described['p'], described['series'],
                                  N=described['N'])
        roots = [ScalarExpr.parse(entry['value']) for entry in payload['roots']]
        traces = {entry['k']: ScalarExpr.parse(entry['value']) for entry in payload['traces']}
        minimal = [ScalarExpr.parse(value) for value in payload['minimal_polynomial']]
        classical = payload['classical']
        factors = [(entry['root'], entry['multiplicity']) for entry in classical['factors']]
        classical_traces = [(entry['k'], entry['value']) for entry in classical['traces']]
    except PresentationError:
        raise
    except (KeyError, TypeError, ValueError, BorderlineError) as e:
        raise PresentationError(f"malformed presentation {path}: {e}", code='malformed')
    lam = LambdaProfile(levi, special=True)
    domain = lam.symbolic_domain()
    expected = list(eigenvalues_closed_form(lam, domain).values())
    remaining = list(expected)
    unmatched = 0
    for root in roots:
        for position, value in enumerate(remaining):
            if not (value - root):
                del remaining[position]
                break
        else:
            unmatched += 1
    distinct = []
    for root in roots:
        if all(root - seen for seen in distinct):
            distinct.append(root)
    minimal_ok = len(minimal) == len(distinct) and all(
        sum(1 for value in minimal if not (value - root)) == 1 for root in distinct)
    mus = block_variables(levi)
    classical_ok = (
        factors == [(str(root), size) for root, size in classical_factors(mus, levi.blocks, levi.P)]
        and classical_traces == [(k, str(classical_trace(mus, levi.blocks, levi.P, k)))
                                 for k in range(1, levi.N + 1)])
    trace_failures = []
    for k, value in sorted(traces.items()):
        limit = classical_limit(value)
        if limit - ScalarExpr.coerce(classical_trace(mus, levi.blocks, levi.P, k)):
            trace_failures.append(k)
    return {
        'roots_ok': not unmatched and not remaining,
        'minimal_polynomial_ok': minimal_ok,
        'classical_ok': classical_ok,
        'traces_ok': not trace_failures,
        'trace_failures': trace_failures,
        'ok': not unmatched and not remaining and minimal_ok and classical_ok and not trace_failures,
    }
