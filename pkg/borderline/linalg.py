"""Exact sparse linear algebra over a ScalarDomain.

Vectors are dicts {index: scalar} with zero entries pruned. Every routine
works for ScalarExpr values and for Gaussian rationals alike; zero tests use
truthiness only.
"""

import logging

logger = logging.getLogger(__name__)


def scale(vector, factor):
    if not factor:
        return {}
    return {k: factor * x for k, x in vector.items()}


def axpy(target, factor, vector):
    """target += factor * vector, in place; returns target."""
    if not factor:
        return target
    for k, x in vector.items():
        value = target.get(k)
        value = factor * x if value is None else value + factor * x
        if value:
            target[k] = value
        else:
            target.pop(k, None)
    return target


def add(left, right):
    result = dict(left)
    for k, x in right.items():
        value = result.get(k)
        value = x if value is None else value + x
        if value:
            result[k] = value
        else:
            result.pop(k, None)
    return result


def combine(terms):
    """Sum of factor * vector over (factor, vector) pairs."""
    result = {}
    for factor, vector in terms:
        axpy(result, factor, vector)
    return result


def apply_map(columns, vector):
    """Apply a linear map stored as a list of sparse image columns."""
    result = {}
    for k, x in vector.items():
        axpy(result, x, columns[k])
    return result


def compose(outer, inner):
    return [apply_map(outer, column) for column in inner]


class Echelon:
    """Incremental echelon form; remembers how each row was built from the inputs."""

    def __init__(self, domain, track=False):
        self.domain = domain
        self.track = track
        self.rows = []
        self.pivots = []
        self.combos = []

    @property
    def rank(self):
        return len(self.rows)

    def reduce(self, vector):
        """Return (residual, combination) with vector = residual + sum c_tag * input_tag."""
        residual = dict(vector)
        combination = {}
        for pivot, row, combo in zip(self.pivots, self.rows, self.combos):
            coefficient = residual.get(pivot)
            if coefficient is None:
                continue
            axpy(residual, -coefficient, row)
            if self.track:
                axpy(combination, coefficient, combo)
        return residual, combination

    def add(self, vector, tag=None):
        """Insert vector; returns True when it was independent of the rows so far."""
        residual, combination = self.reduce(vector)
        if not residual:
            return False
        pivot = min(residual)
        inverse = self.domain.one / residual[pivot]
        self.pivots.append(pivot)
        self.rows.append(scale(residual, inverse))
        if self.track:
            combo = {tag: self.domain.one}
            axpy(combo, -self.domain.one, combination)
            self.combos.append(scale(combo, inverse))
        else:
            self.combos.append({})
        return True

    def contains(self, vector):
        residual, _ = self.reduce(vector)
        return not residual

    def express(self, vector):
        """Coefficients over the tagged inputs, or None when vector is outside the span."""
        residual, combination = self.reduce(vector)
        if residual:
            return None
        return combination

    def reduced_rows(self):
        """Rows in reduced row echelon form, paired with their pivots."""
        rows = [dict(row) for row in self.rows]
        for index in range(len(rows) - 1, -1, -1):
            pivot = self.pivots[index]
            for other in range(index):
                coefficient = rows[other].get(pivot)
                if coefficient is not None:
                    axpy(rows[other], -coefficient, rows[index])
        return list(zip(self.pivots, rows))


def span_basis(domain, vectors):
    """Independent subset (as reduced rows) spanning the given vectors."""
    echelon = Echelon(domain)
    for vector in vectors:
        echelon.add(vector)
    return echelon


def rank(domain, vectors):
    return span_basis(domain, vectors).rank


def nullspace(domain, rows, ncols):
    """Basis of {x : row . x = 0 for every row}, one vector per free column."""
    echelon = span_basis(domain, rows)
    reduced = echelon.reduced_rows()
    pivot_set = {pivot for pivot, _ in reduced}
    basis = []
    for free in range(ncols):
        if free in pivot_set:
            continue
        vector = {free: domain.one}
        for pivot, row in reduced:
            coefficient = row.get(free)
            if coefficient is not None:
                vector[pivot] = -coefficient
        basis.append(vector)
    logger.debug("nullspace: %d constraints, %d columns, dimension %d",
                 len(rows), ncols, len(basis))
    return basis


def transpose(columns, nrows):
    """Rows of a map stored as columns."""
    rows = [dict() for _ in range(nrows)]
    for c, column in enumerate(columns):
        for r, x in column.items():
            rows[r][c] = x
    return rows


def solve(domain, columns, target):
    """Coefficients x with sum x_k * columns[k] = target, or None."""
    echelon = Echelon(domain, track=True)
    for tag, column in enumerate(columns):
        echelon.add(column, tag)
    return echelon.express(target)


def determinant(domain, matrix):
    """Determinant of a small dense square matrix by cofactor expansion."""
    size = len(matrix)
    if size == 0:
        return domain.one
    if size == 1:
        return matrix[0][0]
    total = domain.zero
    for column in range(size):
        entry = matrix[0][column]
        if not entry:
            continue
        minor = [row[:column] + row[column + 1:] for row in matrix[1:]]
        term = entry * determinant(domain, minor)
        total = total + term if column % 2 == 0 else total - term
    return total
