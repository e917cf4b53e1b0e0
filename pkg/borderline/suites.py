"""Verification suites, one per CLI subcommand.

Each suite takes a RunConfig and returns a SuiteResult. Suites build their own
modules so they can run in separate worker processes.
"""

import logging
import random
import time
from fractions import Fraction
from pathlib import Path

from . import linalg
from .errors import BorderlineError, ModuleError
from .qoperator import (Filtration, SpectralQ, build_tensor, check_direct_sum, decompose,
                        eigenvalue_report, eigenvalues_closed_form, is_singular,
                        nonprincipal_defects, principal_diag_global, principal_diag_local,
                        principal_diag_solver, principal_table, singular_tensor)
from .qtrace import (FRTData, braid_defects, classical_check, classical_factors, emit_ideal,
                     block_variables, kappa_idempotent, re_check, spectral_trace, tau_minus_check,
                     theta, trace_height, verify_presentation, write_ideal)
from .report import SuiteResult, progress
from .rootdata import word_depth
from .scalars import ExponentForm, ScalarExpr, SymbolicDomain, classical_limit
from .singvec import (CORRECTED, build_generating, c_gl_product, c_gl_sum, c_hat_middle,
                      c_hat_special, c_hat_symmetric, coeff_A, coeff_B_literal, coeff_B_solver,
                      dynamical_components, dynamical_vectors, em_system, evaluate_table,
                      gram_closed_form, gram_matrix, level1_identity_residuals, level1_index,
                      phi_family, principal_coeffs)
from .verma import LambdaProfile, StructureCache, build_verma, depth_height, reference_defects

logger = logging.getLogger(__name__)

RANDOM_VECTORS = 10
RE_LIMIT = 400
TRACE_POWERS = (1, 2, 3, 4)
PRINCIPAL_MAX_N = 8
GL_IDENTITY_MAX = 4


class Workspace:
    """Modules of one profile variant at the run's mode, seed and height."""

    def __init__(self, config, variant='borderline', special=True, height=None):
        self.config = config
        self.levi = config.levi if variant == 'borderline' else config.levi.with_variant(variant)
        self.lam = LambdaProfile(self.levi, special=special)
        self.domain = self.lam.domain(config.mode, config.seed)
        self.height = height or config.height
        cache = StructureCache(config.cache_dir) if config.cache_dir else None
        self.verma = build_verma(self.lam, self.height, self.domain, config.seed, cache)
        self.natural, self.tensor = build_tensor(self.verma)
        self._filtration = None

    @property
    def filtration(self):
        if self._filtration is None:
            self._filtration = Filtration(self.tensor, self.natural, self.verma)
        return self._filtration

    def fits(self, depth):
        return depth_height(depth) <= self.height

    def node_fits(self, node):
        return self.fits(self.natural.node_depth(node))


def _is_zero_vector(x):
    return not x.coords


def _nonzero_keys(values):
    return [key for key, value in values.items() if value]


def _attempt(result, name, check):
    """Run one check; unsupported ranks are skipped, other library errors fail the check."""
    try:
        check()
    except ModuleError as e:
        if e.code == 'unsupported_rank':
            result.skip(name, e.message)
        else:
            result.add(name, False, error=e.to_dict())
    except BorderlineError as e:
        result.add(name, False, error=e.to_dict())


def singular_suite(config):
    """Generating coefficients, their recursion, the consistency systems and Gram data."""
    result = SuiteResult('verify-singular')
    ws = Workspace(config)
    levi, lam, domain, verma = ws.levi, ws.lam, ws.domain, ws.verma
    rs = levi.root_system

    def uniqueness():
        element = build_generating(levi, 1)
        depth = element.depth(rs)
        if not ws.fits(depth):
            result.skip('generating_uniqueness', f"depth {list(depth)} beyond height {ws.height}")
            return
        basis = verma.solve_generating(depth)
        built = element.on_highest(verma)
        proportional = (len(basis) == 1 and bool(built.coords)
                        and linalg.rank(domain, [basis[0].coords, built.coords]) == 1)
        result.add('generating_uniqueness', proportional, depth=list(depth), dimension=len(basis))

    def recursion():
        P, l = levi.P, levi.l
        special = lam.lam(l + 1)
        for k in range(1, l + 1):
            name = f"generating_recursion_{k}"
            element = build_generating(levi, k)
            if not ws.fits(element.depth(rs)):
                result.skip(name, "beyond height")
                continue
            lhs = verma.act_e(k, element.on_highest(verma))
            rhs = build_generating(levi, k + 1).on_highest(verma)
            rhs = rhs.scale(domain.qnum(lam.lam(k) + special + (P + l - k)))
            result.add(name, _is_zero_vector(lhs - rhs))

    def level_zero():
        values = evaluate_table(coeff_A(levi, 0), lam, domain)
        literal = coeff_B_literal(levi, values, lam, domain, 0)
        expected = domain.qnum(lam.lam(levi.l + 1) + (Fraction(levi.P, 2) - 1))
        wrong = [m for m, value in literal.items() if value - (expected if m == 1 else domain.zero)]
        result.add('level0_nullspace', not wrong, mismatched=wrong)

    def identities():
        if levi.l < 1:
            result.skip('level1_identity', "needs l >= 1")
            result.skip('em_system', "needs l >= 1")
            return
        residuals = level1_identity_residuals(lam, domain)
        result.add('level1_identity', not _nonzero_keys(residuals), nonzero=_nonzero_keys(residuals))
        residuals = em_system(lam, domain)
        result.add('em_system', not _nonzero_keys(residuals), nonzero=_nonzero_keys(residuals))

    def gram():
        if levi.l < 1:
            result.skip('gram', "needs l >= 1")
            return
        family = phi_family(levi)
        for m in range(1, levi.p + 2):
            name = f"gram_{m}"
            if not ws.fits(word_depth(rs, family.level1_prime[(3, m)])):
                result.skip(name, "beyond height")
                continue
            computed = gram_matrix(verma, levi, m)
            closed, det = gram_closed_form(lam, domain, m)
            entries = [(r, c) for r, row in enumerate(closed) for c, value in enumerate(row)
                       if value - computed[r][c]]
            det_ok = not (linalg.determinant(domain, closed) - det)
            result.add(name, not entries and det_ok, mismatched=entries, determinant=det_ok)

    def dynamical():
        if levi.series != 'B':
            result.skip('dynamical_vectors', "series B only")
            return
        full = Workspace(config, 'full', special=False)
        n = full.levi.n
        module = full.verma
        vectors = dynamical_vectors(full.levi)
        evaluated = {k: element.on_highest(module) for k, element in vectors.items()
                     if full.fits(element.depth(full.levi.root_system))}
        evaluated[n + 1] = module.highest_vector()
        wrong = []
        for i in range(1, n + 1):
            if i not in evaluated:
                continue
            for k in range(1, n + 1):
                image = module.act_e(k, evaluated[i])
                if k == i:
                    expected = evaluated[i + 1].scale(module.domain.qnum(full.lam.lam(i) + (n - i)))
                    bad = not _is_zero_vector(image - expected)
                else:
                    bad = bool(image.coords)
                if bad:
                    wrong.append([k, i])
        result.add('dynamical_vectors', not wrong, mismatched=wrong)
        if not full.node_fits(n + 1):
            result.skip('dynamical_singular', "beyond height")
            return
        u = _dynamical_singular(full)
        result.add('dynamical_singular', is_singular(full.tensor, u))

    def lambda_free():
        differing = reference_defects(verma.structure, config.seed + 3)
        result.add('structure_lambda_free', not differing, differing=differing[:20])

    for name, check in (('generating_uniqueness', uniqueness), ('generating_recursion', recursion),
                        ('level0_nullspace', level_zero), ('level1_identity', identities),
                        ('gram', gram), ('dynamical_vectors', dynamical),
                        ('structure_lambda_free', lambda_free)):
        _attempt(result, name, check)
    return result


def _dynamical_singular(ws):
    """u_{n+1} = sum_i w_i (x) y_{n+1,i} in the full Verma module."""
    u = None
    for i, element in dynamical_components(ws.levi).items():
        y = element.on_highest(ws.verma)
        term = ws.tensor.pure(ws.natural.node_vector(i), y)
        u = term if u is None else u + term
    return u


def coefficients_suite(config):
    """e-action tables against the module, principal coefficients and leading coefficients."""
    result = SuiteResult('verify-coefficients')
    ws = Workspace(config)
    levi, lam, domain, verma = ws.levi, ws.lam, ws.domain, ws.verma
    rs = levi.root_system
    rng = random.Random(config.seed)

    def random_vector(keys):
        return {key: domain.from_int(rng.choice((-3, -2, -1, 1, 2, 3))) for key in keys}

    def literal_vs_solver():
        family = phi_family(levi)
        levels = [(0, list(range(1, levi.d0 + 1)), family.phi)]
        if levi.l >= 1:
            levels.append((1, level1_index(levi), tuple(family.level1.values())))
        for level, keys, words in levels:
            name = f"coeff_B_level{level}"
            if any(not ws.fits(word_depth(rs, word)) for word in words):
                result.skip(name, "beyond height")
                continue
            mismatched = []
            for trial in progress(range(RANDOM_VECTORS), desc=name, unit='vector'):
                values = random_vector(keys)
                literal = coeff_B_literal(levi, values, lam, domain, level)
                solved = coeff_B_solver(verma, levi, values, level)
                for key, value in literal.items():
                    if value is not None and value - solved.get(key, domain.zero):
                        mismatched.append([trial, key])
            result.add(name, not mismatched, vectors=RANDOM_VECTORS, mismatched=mismatched)

    def solver_nullspace():
        values = evaluate_table(coeff_A(levi, 0), lam, domain)
        family = phi_family(levi)
        if any(not ws.fits(word_depth(rs, word)) for word in family.phi):
            result.skip('level0_solver_nullspace', "beyond height")
            return
        solved = coeff_B_solver(verma, levi, values, 0)
        expected = domain.qnum(lam.lam(levi.l + 1) + (Fraction(levi.P, 2) - 1))
        wrong = [m for m, value in solved.items() if value - (expected if m == 1 else domain.zero)]
        result.add('level0_solver_nullspace', not wrong, mismatched=wrong)

    def principal():
        hat = Workspace(config, 'hat', special=False)
        j = hat.levi.N - hat.levi.l
        if not hat.node_fits(j):
            result.skip('principal_coefficients', f"w_{j} beyond height {hat.height}")
            return
        top = build_generating(hat.levi, 1).on_highest(hat.verma)
        u, components = singular_tensor(hat.tensor, hat.natural, top)
        table = principal_table(hat.filtration, u, components, j)
        coeffs = principal_coeffs(hat.lam, hat.domain)
        provenance = {}
        for kind, entries in (('c_prime', coeffs.c_prime), ('c_double', coeffs.c_double)):
            for i, entry in entries.items():
                solved = table.get(i, {}).get(kind)
                if solved is None:
                    continue
                entry.reconcile(solved)
                provenance[f"{kind}_{i}"] = entry.provenance
        corrected = sorted(key for key, flag in provenance.items() if flag == CORRECTED)
        result.add('principal_closed_forms', not corrected, gate=False,
                   provenance=provenance, notes=coeffs.notes)
        leading = hat.filtration.leading(u, j)
        closed = c_hat_special(hat.lam, hat.domain)
        result.add('leading_coefficient_special', not (leading - closed), gate=levi.series == 'B',
                   node=j)
        if levi.l == 0:
            result.add('leading_coefficient_symmetric',
                       not (c_hat_symmetric(hat.lam, hat.domain) - closed))
        normalized = principal_coeffs(lam, domain).c_hat
        result.add('c_bar_regular', 'normalized' in normalized, gate=False)

    def middle():
        if levi.series != 'B':
            result.skip('leading_coefficient_middle', "series B only")
            return
        full = Workspace(config, 'full', special=False)
        n = full.levi.n
        if not full.node_fits(n + 1):
            result.skip('leading_coefficient_middle', "beyond height")
            return
        u = _dynamical_singular(full)
        leading = full.filtration.leading(u, n + 1)
        result.add('leading_coefficient_middle', not (leading - c_hat_middle(full.lam, full.domain)))

    def gl_identity():
        symbolic = SymbolicDomain()
        failed = []
        for n in range(1, GL_IDENTITY_MAX + 1):
            exponents = [ExponentForm.block(k) for k in range(1, n + 2)]
            shifted = [e - exponents[-1] for e in exponents]
            if c_gl_sum(symbolic, shifted) - c_gl_product(symbolic, exponents):
                failed.append(n)
        result.add('gl_identity', not failed, failed=failed)

    def diagonal():
        full = Workspace(config, 'full', special=False)
        poset = full.levi.poset
        pairs = [(i, j) for i in range(1, levi.N + 1) for j in range(i, levi.N + 1)
                 if poset.leq(i, j) and full.node_fits(j)]
        formula, solver, reorder = [], [], []
        for i, j in progress(pairs, desc='principal terms', unit='pair'):
            closed = principal_diag_global(full.lam, full.domain, i, j)
            if principal_diag_local(full.lam, full.domain, i, j) - closed:
                formula.append([i, j])
            if levi.N > PRINCIPAL_MAX_N:
                continue
            if principal_diag_solver(full.filtration, i, j) - closed:
                solver.append([i, j])
            if nonprincipal_defects(full.filtration, i, j):
                reorder.append([i, j])
        result.add('principal_diag_local', not formula, pairs=len(pairs), mismatched=formula)
        if levi.N <= PRINCIPAL_MAX_N:
            result.add('principal_diag_solver', not solver, mismatched=solver)
            result.add('nonprincipal_words', not reorder, gate=False, surviving=reorder)

    for name, check in (('coeff_B', literal_vs_solver), ('level0_solver_nullspace', solver_nullspace),
                        ('principal_coefficients', principal), ('leading_coefficient_middle', middle),
                        ('gl_identity', gl_identity), ('principal_diag', diagonal)):
        _attempt(result, name, check)
    return result


def _spectral(ws):
    decomposition = decompose(ws.levi, ws.tensor, ws.natural, ws.verma)
    values = eigenvalues_closed_form(ws.lam, ws.domain)
    return decomposition, SpectralQ(decomposition, values)


def decomposition_suite(config):
    """Eigenvalues, the direct sum of the M_i, the minimal polynomial and equivariance of Q."""
    result = SuiteResult('verify-decomposition')
    ws = Workspace(config)
    levi = ws.levi

    report = eigenvalue_report(ws.lam, ws.domain)
    result.add('eigenvalues', report['ok'], casimir_mismatch=report['casimir_mismatch'],
               coincident=report['coincident'], borderline_values=report['borderline_values'])

    decomposition, spectral = _spectral(ws)
    summed = check_direct_sum(decomposition)
    result.add('direct_sum', summed['ok'], skipped_blocks=decomposition.skipped,
               depths=[row for row in summed['depths'] if not row['ok']])

    def generic():
        baseline = Workspace(config, special=False)
        baseline_sum = check_direct_sum(decompose(baseline.levi, baseline.tensor,
                                                  baseline.natural, baseline.verma))
        result.add('direct_sum_generic', baseline_sum['ok'])

    _attempt(result, 'direct_sum_generic', generic)

    if not summed['ok']:
        return result

    top = ws.tensor.pure(ws.natural.node_vector(1), ws.verma.highest_vector())
    x1 = spectral.eigenvalues[1]
    result.add('q_on_top', _is_zero_vector(spectral.apply(top) - top.scale(x1)))

    failing = []
    basis = [(depth, index) for depth in ws.tensor.keys() for index in range(ws.tensor.dim(depth))]
    for depth, index in progress(basis, desc='minimal polynomial', unit='vector'):
        if spectral.min_poly_residual(ws.tensor.basis_vector(depth, index)).coords:
            failing.append([list(depth), index])
    result.add('minimal_polynomial', not failing, degree=len(spectral.distinct_eigenvalues()),
               vectors=len(basis), failing=failing)

    defects = spectral.equivariance_defects()
    result.add('equivariance', not defects,
               defects=[[g, k, list(depth), index] for g, k, depth, index in defects])

    symbolic = ws.lam.symbolic_domain()
    limits = []
    for value in eigenvalues_closed_form(ws.lam, symbolic).values():
        limit = classical_limit(value)
        if all(limit - seen for seen in limits):
            limits.append(limit)
    expected = [ScalarExpr.coerce(root)
                for root, _ in classical_factors(block_variables(levi), levi.blocks, levi.P)]
    remaining = list(expected)
    for limit in limits:
        for position, value in enumerate(remaining):
            if not (value - limit):
                del remaining[position]
                break
    result.add('classical_roots', not remaining and len(limits) == len(expected),
               roots=[str(limit) for limit in limits])
    return result


def traces_suite(config):
    """q-traces of the spectral Q against theta, their classical limit and tau-minus."""
    result = SuiteResult('verify-traces')
    levi = config.levi
    ws = Workspace(config, height=max(config.height, trace_height(levi)))
    _, spectral = _spectral(ws)
    wrong = []
    for k in progress(TRACE_POWERS, desc='traces', unit='power'):
        if spectral_trace(spectral, ws.natural, ws.verma, k) - theta(ws.lam, ws.domain, k):
            wrong.append(k)
    result.add('spectral_trace', not wrong, powers=list(TRACE_POWERS), mismatched=wrong)

    checked = classical_check(ws.lam.with_special(True), range(1, levi.N + 1))
    failed = [k for k, entry in checked.items() if not entry['ok']]
    result.add('classical_traces', not failed, mismatched=failed)

    tau = tau_minus_check(ws.lam.with_special(True))
    result.add('tau_minus', tau['special_factor_vanishes'] and tau['vanishes'])
    return result


def re_suite(config):
    """Braid relation and kappa on C^N (x) C^N, and the reflection equation with Q."""
    result = SuiteResult('verify-re')
    ws = Workspace(config)
    frt = FRTData(ws.levi.poset, ws.domain)
    braid = braid_defects(frt)
    result.add('braid_relation', not braid, defects=[list(x) for x in braid])
    result.add('kappa_idempotent', not kappa_idempotent(frt))
    result.add('kappa_rank', frt.kappa_rank() == 1, rank=frt.kappa_rank())
    _, spectral = _spectral(ws)
    checked = re_check(spectral, frt, ws.natural, ws.verma, limit=RE_LIMIT)
    result.add('reflection_equation', not checked['re_defects'], checked=checked['checked'],
               defects=checked['re_defects'])
    result.add('kappa_relation', not checked['kappa_defects'],
               defects=checked['kappa_defects'])
    return result


def ideal_path(config):
    levi = config.levi
    blocks = '_'.join(str(b) for b in levi.blocks) or 'none'
    return Path(config.output) / f"ideal-{levi.series}{levi.N}-{blocks}-p{levi.p}.json"


def emit_suite(config):
    """Write the presentation and re-verify it from the file alone."""
    result = SuiteResult('emit-ideal')
    payload = emit_ideal(LambdaProfile(config.levi, special=True))
    path = write_ideal(payload, ideal_path(config))
    checked = verify_presentation(path)
    result.add('presentation', checked['ok'], path=str(path), roots_ok=checked['roots_ok'],
               minimal_polynomial_ok=checked['minimal_polynomial_ok'],
               classical_ok=checked['classical_ok'], trace_failures=checked['trace_failures'])
    return result


def presentation_suite(config):
    result = SuiteResult('verify-presentation')
    for path in config.files:
        checked = verify_presentation(path)
        result.add(str(path), checked['ok'], roots_ok=checked['roots_ok'],
                   minimal_polynomial_ok=checked['minimal_polynomial_ok'],
                   classical_ok=checked['classical_ok'], trace_failures=checked['trace_failures'])
    return result


SUITES = {
    'verify-singular': singular_suite,
    'verify-coefficients': coefficients_suite,
    'verify-decomposition': decomposition_suite,
    'verify-traces': traces_suite,
    'verify-re': re_suite,
    'emit-ideal': emit_suite,
    'verify-presentation': presentation_suite,
}

ALL = ('verify-singular', 'verify-coefficients', 'verify-decomposition', 'verify-traces',
       'verify-re', 'emit-ideal')


def suites_for(subcommand):
    return ALL if subcommand == 'all' else (subcommand,)


def run_suite(name, config):
    """Worker entry point: library errors become a failed SuiteResult."""
    started = time.monotonic()
    try:
        result = SUITES[name](config)
    except BorderlineError as e:
        logger.debug("suite %s failed: %s", name, e)
        result = SuiteResult(name)
        result.fail(e)
    result.seconds = time.monotonic() - started
    return result
