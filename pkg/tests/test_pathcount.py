"""
Test cases for fermionic path counting

Test cases can be run with:
    pytest tests/test_pathcount.py
"""
import logging
from unittest import TestCase

import numpy as np

from trotterlab import app
from trotterlab.commutator import GammaWord, gamma_enumeration, nested_commutator
from trotterlab.fock import FermionConfig, OpKind, enumerate_sector
from trotterlab.hamiltonian import assemble, fermi_hubbard
from trotterlab.models import BudgetExceededError, CoefficientPair, DataValidationError
from trotterlab.pathcount import (
    ElementaryOp,
    FermionicPath,
    IndexedTerm,
    apply_path,
    closed_form_counts,
    degree,
    degree_table,
    enumerate_all_paths,
    expand_paths,
    path_bound,
    path_count_per_site,
    symmetric_weight_bound,
)
from trotterlab.seminorm import fermionic_seminorm
from tests import oracle
from tests.factories import CoefficientPairFactory

RULESETS = ("standard", "normal_ordered")


def expand(terms, ruleset):
    """Path expansion over plain (bit, j, k) tuples"""
    return expand_paths([IndexedTerm(*term) for term in terms], ruleset)


def nested_matrix(terms, sector):
    """Nested commutator of indexed terms, built from their sector matrices"""
    result = terms[-1].matrix(sector).matrix
    for term in reversed(terms[:-1]):
        left = term.matrix(sector).matrix
        result = left @ result - result @ left
    return result


######################################################################
#  P A T H   T E S T   C A S E S
######################################################################
class TestPaths(TestCase):
    """Test Cases for paths and indexed terms"""

    @classmethod
    def setUpClass(cls):
        """This runs once before the entire test suite"""
        app.config["TESTING"] = True
        app.logger.setLevel(logging.CRITICAL)

    def test_initial_paths(self):
        """It should turn hopping and interaction terms into paths"""
        self.assertEqual(str(IndexedTerm(1, 0, 2).initial_path()), "+A+_0 A_2")
        self.assertEqual(str(IndexedTerm(0, 1, 1).initial_path()), "+N_1 N_1")
        self.assertRaises(DataValidationError, IndexedTerm, 2, 0, 0)
        self.assertRaises(DataValidationError, IndexedTerm, 1, -1, 0)
        self.assertRaises(DataValidationError, ElementaryOp, OpKind.NUMBER, -1)

    def test_adjoint(self):
        """It should reverse the ops and swap creation and annihilation"""
        path = FermionicPath(-1, (ElementaryOp(OpKind.CREATION, 0), ElementaryOp(OpKind.NUMBER, 2),
                                  ElementaryOp(OpKind.ANNIHILATION, 1)))
        self.assertEqual(str(path.adjoint()), "-A+_1 N_2 A_0")
        self.assertEqual(path.modes(), frozenset({0, 1, 2}))
        self.assertEqual(len(path), 3)
        self.assertEqual(path.serialize(), {"sign": -1, "ops": [["creation", 0], ["number", 2], ["annihilation", 1]]})

    def test_matrix_matches_oracle(self):
        """It should build the same matrix as the full Fock space"""
        path = FermionicPath(-1, (ElementaryOp(OpKind.CREATION, 3), ElementaryOp(OpKind.NUMBER, 1),
                                  ElementaryOp(OpKind.ANNIHILATION, 0)))
        for eta in (1, 2, 3):
            sector = enumerate_sector(4, eta)
            np.testing.assert_array_equal(path.matrix(sector).matrix,
                                          oracle.restrict(oracle.path_operator(path, 4), 4, eta))

    def test_matrix_leaves_fock_space(self):
        """It should refuse a path that empties the vacuum"""
        path = FermionicPath(1, (ElementaryOp(OpKind.ANNIHILATION, 0),))
        self.assertRaises(DataValidationError, path.matrix, enumerate_sector(3, 0))

    def test_apply_path(self):
        """It should act on a configuration like the path matrix"""
        path = FermionicPath(1, (ElementaryOp(OpKind.CREATION, 2), ElementaryOp(OpKind.ANNIHILATION, 0)))
        self.assertEqual(apply_path(path, FermionConfig.from_ket("110")), (FermionConfig.from_ket("011"), -1))
        self.assertIsNone(apply_path(path, FermionConfig.from_ket("010")))
        number = FermionicPath(-1, (ElementaryOp(OpKind.NUMBER, 1),))
        self.assertEqual(apply_path(number, FermionConfig.from_ket("010")), (FermionConfig.from_ket("010"), -1))
        self.assertIsNone(apply_path(number, FermionConfig.from_ket("100")))


######################################################################
#  E X P A N S I O N   T E S T   C A S E S
######################################################################
class TestExpansion(TestCase):
    """Test Cases for the commutation-rule expansion"""

    @classmethod
    def setUpClass(cls):
        """This runs once before the entire test suite"""
        app.logger.setLevel(logging.CRITICAL)

    def test_single_hop(self):
        """It should expand [A_0^dagger A_1, A_1^dagger A_2] into A_0^dagger A_2"""
        paths = expand_paths([IndexedTerm(1, 0, 1), IndexedTerm(1, 1, 2)])
        self.assertEqual([str(path) for path in paths], ["+A+_0 A_2"])

    def test_vanishing_commutators(self):
        """It should give no paths for terms on disjoint modes"""
        self.assertEqual(expand_paths([IndexedTerm(1, 0, 1), IndexedTerm(0, 2, 3)]), [])
        self.assertEqual(expand_paths([IndexedTerm(0, 0, 1), IndexedTerm(0, 0, 1)]), [])

    def test_sound_on_sectors(self):
        """It should sum the signed path matrices to the nested commutator"""
        rng = np.random.default_rng(8)
        n = 4
        for ruleset in RULESETS:
            for depth in (2, 3, 4):
                for _ in range(6):
                    bits = rng.integers(0, 2, size=depth)
                    bits[-1] = 1 - bits[-2]
                    terms = [IndexedTerm(int(bit), *map(int, rng.integers(0, n, size=2))) for bit in bits]
                    paths = expand_paths(terms, ruleset, n=n)
                    for eta in range(1, n):
                        sector = enumerate_sector(n, eta)
                        total = sum((path.matrix(sector).matrix for path in paths), np.zeros((sector.dim,) * 2))
                        np.testing.assert_allclose(total, nested_matrix(terms, sector), atol=1e-12)

    def test_invalid_expansion(self):
        """It should reject single terms, foreign rulesets and indices past n"""
        self.assertRaises(DataValidationError, expand_paths, [IndexedTerm(1, 0, 1)])
        self.assertRaises(DataValidationError, expand_paths, [IndexedTerm(1, 0, 1), IndexedTerm(0, 1, 1)], "lazy")
        self.assertRaises(DataValidationError, expand_paths, [IndexedTerm(1, 0, 5), IndexedTerm(0, 1, 1)], n=4)


######################################################################
#  D E G R E E   T E S T   C A S E S
######################################################################
class TestDegrees(TestCase):
    """Test Cases for degrees and path bounds"""

    @classmethod
    def setUpClass(cls):
        """This runs once before the entire test suite"""
        app.logger.setLevel(logging.CRITICAL)
        cls.pair = CoefficientPairFactory(n=4, sparsity=2, seed=3)
        cls.sector = enumerate_sector(4, 2)

    def tearDown(self):
        """This runs after each test"""
        app.config["PATH_BUDGET"] = 10 ** 7

    def test_matches_brute_force(self):
        """It should count the same degrees as the unpruned enumeration"""
        for ruleset in RULESETS:
            for gamma in (GammaWord((1, 0)), GammaWord((0, 1, 0)), GammaWord((1, 0, 1))):
                table = degree_table(gamma, self.pair, self.sector, ruleset)
                for position, word in enumerate(self.sector.configs):
                    expected = oracle.brute_force_degree(int(word), gamma, self.pair, expand, ruleset)
                    self.assertAlmostEqual(table[position], expected)

    def test_single_configuration(self):
        """It should give the degree of one configuration like the table"""
        gamma = GammaWord((1, 0))
        table = degree_table(gamma, self.pair, self.sector)
        config = self.sector.config(3)
        self.assertAlmostEqual(degree(config, gamma, self.pair), table[3])
        self.assertRaises(DataValidationError, degree, FermionConfig.from_ket("10"), gamma, self.pair)

    def test_parallel_agrees(self):
        """It should not depend on the number of workers"""
        gamma = GammaWord((0, 1, 0))
        np.testing.assert_array_equal(degree_table(gamma, self.pair, self.sector, jobs=1),
                                      degree_table(gamma, self.pair, self.sector, jobs=4))

    def test_bound_dominates_seminorm(self):
        """It should bound the nested commutator seminorm"""
        pair = CoefficientPairFactory(n=4, seed=12)
        parts = assemble(pair, self.sector)
        for ruleset in RULESETS:
            for gamma in gamma_enumeration(2):
                measured = fermionic_seminorm(nested_commutator(gamma, parts.T, parts.V))
                self.assertLessEqual(measured, path_bound(gamma, pair, 2, ruleset) * (1 + 1e-9))

    def test_counts_per_site(self):
        """It should attribute every path to the mode of its rightmost operator"""
        gamma = GammaWord((1, 0))
        counts = path_count_per_site(gamma, self.pair)
        self.assertEqual(set(counts), set(range(4)))
        self.assertEqual(sum(counts.values()), len(enumerate_all_paths(gamma, self.pair)))

    def test_hubbard_paths(self):
        """It should expand [T, V] of the Hubbard dimer into signed paths"""
        pair = fermi_hubbard([2], 1.0, 2.0)
        paths = enumerate_all_paths(GammaWord((1, 0)), pair)
        self.assertGreater(len(paths), 0)
        self.assertTrue(all(len(path) == 3 for path in paths))

    def test_budget(self):
        """It should stop an enumeration that exceeds the visit budget"""
        app.config["PATH_BUDGET"] = 5
        self.assertRaises(BudgetExceededError, degree_table, GammaWord((0, 1, 0)), self.pair, self.sector)

    def test_empty_support(self):
        """It should give zero degrees when the innermost layer has no support"""
        pair = CoefficientPair(np.zeros((3, 3)), np.eye(3))
        table = degree_table(GammaWord((0, 1)), pair, enumerate_sector(3, 1))
        np.testing.assert_array_equal(table, np.zeros(3))


######################################################################
#  C L O S E D   F O R M   T E S T   C A S E S
######################################################################
class TestClosedForms(TestCase):
    """Test Cases for closed-form counts"""

    def test_counts(self):
        """It should evaluate the sparse and dense closed forms"""
        self.assertEqual(closed_form_counts(1, "sparse", 3, d=2), 48.0)
        self.assertEqual(closed_form_counts(1, "dense", 2, n=4, weight=1), 96.0)
        self.assertRaises(DataValidationError, closed_form_counts, 0, "sparse", 3, d=2)
        self.assertRaises(DataValidationError, closed_form_counts, 1, "banded", 3)

    def test_symmetric_weight_bound(self):
        """It should bound the quadratic form by the largest row sum"""
        rng = np.random.default_rng(2)
        weights = np.abs(rng.normal(size=(5, 5)))
        weights = weights + weights.T
        vector = rng.normal(size=5)
        vector /= np.linalg.norm(vector)
        quadratic, row_sum = symmetric_weight_bound(weights, vector)
        self.assertLessEqual(quadratic, row_sum)
        self.assertRaises(DataValidationError, symmetric_weight_bound, -weights, vector)
        self.assertRaises(DataValidationError, symmetric_weight_bound, weights, vector[:3])
