"""Exact scalars: rational functions in v (v^2 = q) and block variables z_k over Q(i).

A value is stored as a pair (re, im) of reduced fractions over QQ, so that
sympy's fast integer gcd does all cancellation and the pair is canonical.
"""

import random
from dataclasses import dataclass, field as dataclass_field
from fractions import Fraction

from sympy import I, sympify
from sympy.polys.domains import QQ, QQ_I
from sympy.polys.fields import field

from .errors import ScalarError

MAX_BLOCKS = 8

FIELD, V, *Z = field("v,z1:%d" % (MAX_BLOCKS + 1), QQ)
RING = FIELD.ring

SMALL_PRIMES = (3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73)


def to_gaussian(value):
    """Coerce int, Fraction or QQ values to a Gaussian rational."""
    if hasattr(value, 'x'):
        return value
    if isinstance(value, Fraction):
        return QQ_I(QQ(value.numerator, value.denominator))
    return QQ_I(value)


def _frac(value):
    if isinstance(value, Fraction):
        return FIELD(QQ(value.numerator, value.denominator))
    return FIELD(value)


@dataclass(frozen=True)
class ExponentForm:
    """An exponent of q: half_integer_part/2 + sum of lambda_coeffs[k] * Lambda_{k+1}."""

    half_integer_part: int = 0
    lambda_coeffs: tuple = ()

    def __post_init__(self):
        coeffs = tuple(int(c) for c in self.lambda_coeffs)
        while coeffs and coeffs[-1] == 0:
            coeffs = coeffs[:-1]
        if len(coeffs) > MAX_BLOCKS:
            raise ScalarError(f"at most {MAX_BLOCKS} block variables are supported",
                              code='too_many_blocks')
        object.__setattr__(self, 'half_integer_part', int(self.half_integer_part))
        object.__setattr__(self, 'lambda_coeffs', coeffs)

    @classmethod
    def q(cls, exponent):
        """The constant exponent q^exponent, exponent an integer or half-integer."""
        twice = Fraction(exponent) * 2
        if twice.denominator != 1:
            raise ScalarError(f"exponent {exponent} is not a half-integer", code='bad_exponent')
        return cls(int(twice))

    @classmethod
    def block(cls, k, coeff=1):
        """Lambda_k (1-based block variable)."""
        coeffs = [0] * k
        coeffs[k - 1] = coeff
        return cls(0, tuple(coeffs))

    def coeff(self, k):
        return self.lambda_coeffs[k - 1] if k <= len(self.lambda_coeffs) else 0

    @property
    def constant(self):
        return Fraction(self.half_integer_part, 2)

    @property
    def is_constant(self):
        return not self.lambda_coeffs

    def __add__(self, other):
        if not isinstance(other, ExponentForm):
            other = ExponentForm.q(other)
        size = max(len(self.lambda_coeffs), len(other.lambda_coeffs))
        coeffs = [self.coeff(k) + other.coeff(k) for k in range(1, size + 1)]
        return ExponentForm(self.half_integer_part + other.half_integer_part, tuple(coeffs))

    __radd__ = __add__

    def __neg__(self):
        return ExponentForm(-self.half_integer_part, tuple(-c for c in self.lambda_coeffs))

    def __sub__(self, other):
        if not isinstance(other, ExponentForm):
            other = ExponentForm.q(other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, factor):
        factor = int(factor)
        return ExponentForm(self.half_integer_part * factor,
                            tuple(c * factor for c in self.lambda_coeffs))

    __rmul__ = __mul__

    def __str__(self):
        parts = []
        for k, c in enumerate(self.lambda_coeffs, start=1):
            if c:
                parts.append(f"{c}*L{k}" if c != 1 else f"L{k}")
        if self.half_integer_part or not parts:
            parts.append(str(self.constant))
        return ' + '.join(parts)


class ScalarExpr:
    """Canonical element of Q(i)(v, z_1, ..., z_8)."""

    __slots__ = ('re', 'im')

    def __init__(self, re=0, im=0):
        self.re = re if hasattr(re, 'numer') else _frac(re)
        self.im = im if hasattr(im, 'numer') else _frac(im)

    @classmethod
    def coerce(cls, value):
        if isinstance(value, ScalarExpr):
            return value
        if isinstance(value, (int, Fraction)) or hasattr(value, 'numer'):
            return cls(value)
        raise TypeError(f"cannot coerce {type(value).__name__} to ScalarExpr")

    def __add__(self, other):
        try:
            other = ScalarExpr.coerce(other)
        except TypeError:
            return NotImplemented
        return ScalarExpr(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __neg__(self):
        return ScalarExpr(-self.re, -self.im)

    def __sub__(self, other):
        try:
            other = ScalarExpr.coerce(other)
        except TypeError:
            return NotImplemented
        return ScalarExpr(self.re - other.re, self.im - other.im)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        try:
            other = ScalarExpr.coerce(other)
        except TypeError:
            return NotImplemented
        if not other.im and not self.im:
            return ScalarExpr(self.re * other.re, self.im)
        return ScalarExpr(self.re * other.re - self.im * other.im,
                          self.re * other.im + self.im * other.re)

    __rmul__ = __mul__

    def inverse(self):
        if not self:
            raise ScalarError("division by zero", code='division_by_zero')
        if not self.im:
            return ScalarExpr(1 / self.re, self.im)
        norm = self.re * self.re + self.im * self.im
        return ScalarExpr(self.re / norm, -self.im / norm)

    def __truediv__(self, other):
        try:
            other = ScalarExpr.coerce(other)
        except TypeError:
            return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other):
        return ScalarExpr.coerce(other) * self.inverse()

    def __pow__(self, exponent):
        exponent = int(exponent)
        if not self.im:
            if exponent < 0 and not self.re:
                raise ScalarError("division by zero", code='division_by_zero')
            return ScalarExpr(self.re ** exponent, self.im)
        base = self if exponent >= 0 else self.inverse()
        exponent = abs(exponent)
        result = ScalarExpr(1)
        while exponent:
            if exponent & 1:
                result = result * base
            base = base * base
            exponent >>= 1
        return result

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    @property
    def is_zero(self):
        return not self

    def __eq__(self, other):
        try:
            other = ScalarExpr.coerce(other)
        except TypeError:
            return NotImplemented
        return self.re == other.re and self.im == other.im

    def __hash__(self):
        return hash((self.re, self.im))

    def variables(self):
        """Names of the generators this value actually depends on."""
        used = set()
        for part in (self.re, self.im):
            for poly in (part.numer, part.denom):
                for symbol, degree in zip(RING.symbols, poly.degrees()):
                    if degree > 0:
                        used.add(str(symbol))
        return used

    def as_expr(self):
        return self.re.as_expr() + I * self.im.as_expr()

    def render(self):
        """Canonical numerator/denominator strings of both parts."""
        return {
            're': [str(self.re.numer.as_expr()), str(self.re.denom.as_expr())],
            'im': [str(self.im.numer.as_expr()), str(self.im.denom.as_expr())],
        }

    @classmethod
    def parse(cls, payload):
        parts = []
        for key in ('re', 'im'):
            numer, denom = payload[key]
            numer = RING.from_expr(sympify(numer))
            denom = RING.from_expr(sympify(denom))
            if not denom:
                raise ScalarError("division by zero", code='division_by_zero')
            parts.append(FIELD.new(numer, denom))
        return cls(*parts)

    def __str__(self):
        return str(self.as_expr())

    def __repr__(self):
        return f"ScalarExpr({self})"


ZERO = ScalarExpr(0)
ONE = ScalarExpr(1)
IMAG = ScalarExpr(0, 1)
VAR_V = ScalarExpr(V)
VAR_Z = tuple(ScalarExpr(z) for z in Z)
Q_GAP = VAR_V ** 2 - VAR_V ** -2


def monomial(e):
    """q^e as a ScalarExpr with every block variable free."""
    result = VAR_V ** e.half_integer_part
    for k, c in enumerate(e.lambda_coeffs):
        if c:
            result = result * VAR_Z[k] ** c
    return result


def qnum(e):
    """[e]_q = (q^e - q^-e) / (q - q^-1)."""
    if not isinstance(e, ExponentForm):
        e = ExponentForm.q(e)
    m = monomial(e)
    return (m - m.inverse()) / Q_GAP


def normalize(numerator, denominator=1):
    """Reduce numerator/denominator to canonical form."""
    numerator = ScalarExpr.coerce(numerator)
    denominator = ScalarExpr.coerce(denominator)
    if not denominator:
        raise ScalarError("division by zero", code='division_by_zero')
    return numerator / denominator


@dataclass(frozen=True)
class SpecializationPoint:
    """Nonzero Gaussian-rational values for v and some of the z_k."""

    v: object
    z: tuple = ()
    imposed: tuple = dataclass_field(default=None)

    def __post_init__(self):
        v = to_gaussian(self.v)
        if not v:
            raise ScalarError("specialization value of v is zero", code='zero_value')
        values = {}
        for k, value in self.z:
            value = to_gaussian(value)
            if not value:
                raise ScalarError(f"specialization value of z{k} is zero", code='zero_value')
            values[int(k)] = value
        if self.imposed is not None:
            k, big_p = self.imposed
            forced = QQ_I(0, 1) * v ** (-big_p)
            if k in values and values[k] != forced:
                raise ScalarError(f"z{k} conflicts with the imposed relation z{k} = i*v^-{big_p}",
                                  code='inconsistent_point')
            values[k] = forced
        object.__setattr__(self, 'v', v)
        object.__setattr__(self, 'z', tuple(sorted(values.items())))

    def values(self):
        return dict(self.z)

    def describe(self):
        described = {'v': str(self.v)}
        described.update({f"z{k}": str(value) for k, value in self.z})
        if self.imposed is not None:
            described['imposed'] = f"z{self.imposed[0]} = i*v^-{self.imposed[1]}"
        return described


def random_point(seed, blocks, imposed=None, v=None):
    """Deterministic point with prime-ratio values bounded away from roots of unity."""
    rng = random.Random(seed)
    primes = list(SMALL_PRIMES)
    rng.shuffle(primes)
    if v is None:
        v = Fraction(primes.pop(), primes.pop())
    z = []
    for k in range(1, blocks + 1):
        if imposed is not None and imposed[0] == k:
            continue
        z.append((k, QQ_I(QQ(primes.pop(), primes.pop()))))
    v = to_gaussian(v)
    return SpecializationPoint(v, tuple(z), imposed)


def _evaluate_poly(poly, values):
    total = QQ_I(0)
    for monom, coeff in poly.terms():
        term = QQ_I(coeff)
        for index, degree in enumerate(monom):
            if degree:
                if index not in values:
                    raise ScalarError(f"no value assigned to {RING.symbols[index]}",
                                      code='unassigned_variable')
                term = term * values[index] ** degree
        total = total + term
    return total


def _generator_values(point):
    values = {0: point.v}
    for k, value in point.z:
        values[k] = value
    return values


def specialize(x, point):
    """Substitute the point into x; exact Gaussian rational."""
    x = ScalarExpr.coerce(x)
    values = _generator_values(point)
    result = QQ_I(0)
    for part, unit in ((x.re, QQ_I(1)), (x.im, QQ_I(0, 1))):
        if not part:
            continue
        denom = _evaluate_poly(part.denom, values)
        if not denom:
            raise ScalarError("pole at specialization point", code='pole')
        result = result + unit * _evaluate_poly(part.numer, values) / denom
    return result


def _at_v_one(part):
    gen = RING.gens[0]
    numer = part.numer.subs(gen, 1)
    denom = part.denom.subs(gen, 1)
    if not denom:
        raise ScalarError("pole at q = 1", code='pole_at_one')
    return FIELD.new(numer, denom)


def classical_limit(x):
    """Set v = 1 and keep every z_k free."""
    x = ScalarExpr.coerce(x)
    return ScalarExpr(_at_v_one(x.re), _at_v_one(x.im))


def _substitute(poly, values):
    """Evaluate a polynomial over QQ with ScalarExpr values for the generators."""
    total = ZERO
    for monom, coeff in poly.terms():
        term = ScalarExpr(FIELD(coeff))
        for index, degree in enumerate(monom):
            if degree:
                term = term * values[index] ** degree
        total = total + term
    return total


class ScalarDomain:
    """Arithmetic back end for the linear algebra: zero, one, monomials, brackets."""

    name = 'abstract'

    zero = None
    one = None

    def from_int(self, n):
        raise NotImplementedError

    def monomial(self, e):
        raise NotImplementedError

    def qnum(self, e):
        if not isinstance(e, ExponentForm):
            e = ExponentForm.q(e)
        m = self.monomial(e)
        return (m - self.one / m) / self._gap

    def is_zero(self, x):
        return not x

    def render(self, x):
        raise NotImplementedError

    def describe(self):
        return {'name': self.name}


class SymbolicDomain(ScalarDomain):
    """ScalarExpr arithmetic; some block variables may be replaced by fixed values."""

    name = 'symbolic'

    def __init__(self, substitutions=None):
        self.substitutions = dict(substitutions or {})
        self.zero = ZERO
        self.one = ONE
        self._gap = Q_GAP
        self._powers = {}

    def from_int(self, n):
        return ScalarExpr(n)

    def _z_power(self, k, c):
        key = (k, c)
        cached = self._powers.get(key)
        if cached is None:
            base = self.substitutions.get(k, VAR_Z[k - 1])
            cached = self._powers[key] = base ** c
        return cached

    def monomial(self, e):
        result = VAR_V ** e.half_integer_part
        for k, c in enumerate(e.lambda_coeffs, start=1):
            if c:
                result = result * self._z_power(k, c)
        return result

    def convert(self, x):
        """Bring a ScalarExpr (or int) into this domain, applying the substitutions."""
        x = ScalarExpr.coerce(x)
        if not self.substitutions or not (x.variables() & {f"z{k}" for k in self.substitutions}):
            return x
        values = [VAR_V] + [self.substitutions.get(k, VAR_Z[k - 1]) for k in range(1, MAX_BLOCKS + 1)]
        result = ZERO
        for part, unit in ((x.re, ONE), (x.im, IMAG)):
            if part:
                result = result + unit * _substitute(part.numer, values) / _substitute(part.denom, values)
        return result

    def render(self, x):
        return ScalarExpr.coerce(x).render()

    def describe(self):
        return {'name': self.name,
                'substitutions': {f"z{k}": str(value) for k, value in sorted(self.substitutions.items())}}


def borderline_value(big_p):
    """i * v^-P, the value of z_{l+1} realizing q^{2(lambda, eps_{l+1})} = -q^-P."""
    return IMAG * VAR_V ** (-big_p)


class NumericDomain(ScalarDomain):
    """Exact Gaussian-rational arithmetic at a SpecializationPoint."""

    name = 'numeric'

    def __init__(self, point):
        self.point = point
        self._values = point.values()
        self.zero = QQ_I(0)
        self.one = QQ_I(1)
        v2 = point.v ** 2
        self._gap = v2 - self.one / v2
        if not self._gap:
            raise ScalarError("pole at specialization point", code='pole')

    def from_int(self, n):
        return QQ_I(n)

    def monomial(self, e):
        result = self.point.v ** e.half_integer_part
        for k, c in enumerate(e.lambda_coeffs, start=1):
            if c:
                if k not in self._values:
                    raise ScalarError(f"no value assigned to z{k}", code='unassigned_variable')
                result = result * self._values[k] ** c
        return result

    def convert(self, x):
        """Bring a ScalarExpr (or int) into this domain."""
        if isinstance(x, ScalarExpr):
            return specialize(x, self.point)
        return to_gaussian(x)

    def render(self, x):
        return str(x)

    def describe(self):
        return {'name': self.name, 'point': self.point.describe()}
