"""
Test cases for nested commutators and the operator inequalities

Test cases can be run with:
    pytest tests/test_commutator.py
"""
import logging
from functools import reduce
from operator import add
from unittest import TestCase

import numpy as np

from trotterlab import app
from trotterlab.commutator import (
    SINGLE_LAYER_SIGNS,
    GammaWord,
    chain_count_bound,
    commutator,
    gamma_enumeration,
    lemma_cauchy_check,
    lemma_diagonalization_check,
    lemma_holder_check,
    nested_commutator,
    single_layer_bounds,
    single_layer_terms,
)
from trotterlab.fock import OpKind, SectorOperator, elementary_operator, enumerate_sector, hopping_operator
from trotterlab.hamiltonian import assemble
from trotterlab.models import DataValidationError
from trotterlab.seminorm import fermionic_seminorm
from tests.factories import CoefficientPairFactory, GammaWordFactory


######################################################################
#  G A M M A   W O R D   T E S T   C A S E S
######################################################################
class TestGammaWord(TestCase):
    """Test Cases for GammaWord"""

    def test_create_a_word(self):
        """It should create a word and print it as a nested bracket"""
        word = GammaWord((1, 1, 0))
        self.assertEqual(word.order, 2)
        self.assertEqual(word.weight, 2)
        self.assertEqual(str(word), "[T,[T,V]]")
        self.assertEqual(str(GammaWord((0, 1))), "[V,T]")

    def test_parse(self):
        """It should parse digit strings with or without separators"""
        self.assertEqual(GammaWord.parse("010"), GammaWord((0, 1, 0)))
        self.assertEqual(GammaWord.parse("(1, 0)"), GammaWord((1, 0)))
        self.assertRaises(DataValidationError, GammaWord.parse, "012")
        self.assertRaises(DataValidationError, GammaWord.parse, "")

    def test_invalid_words(self):
        """It should reject short words, foreign bits and vanishing innermost brackets"""
        for bits in ((1,), (1, 1), (0, 0, 0), (2, 0), ()):
            self.assertRaises(DataValidationError, GammaWord, bits)

    def test_enumeration(self):
        """It should list the 2^p words of depth p"""
        for p in (1, 2, 3, 4):
            words = gamma_enumeration(p)
            self.assertEqual(len(words), 2 ** p)
            self.assertEqual(len(set(words)), 2 ** p)
            self.assertTrue(all(word.order == p for word in words))
        self.assertRaises(DataValidationError, gamma_enumeration, 0)

    def test_factory(self):
        """It should build valid words from the factory"""
        for order in (1, 2, 3):
            word = GammaWordFactory(order=order)
            self.assertEqual(word.order, order)


######################################################################
#  C O M M U T A T O R   T E S T   C A S E S
######################################################################
class TestNestedCommutator(TestCase):
    """Test Cases for nested commutators"""

    @classmethod
    def setUpClass(cls):
        """This runs once before the entire test suite"""
        app.config["TESTING"] = True
        app.logger.setLevel(logging.CRITICAL)
        cls.pair = CoefficientPairFactory(n=4, seed=5)
        cls.sector = enumerate_sector(4, 2)
        cls.parts = assemble(cls.pair, cls.sector)

    def test_first_order(self):
        """It should compute [T, V] and [V, T] = -[T, V]"""
        T, V = self.parts.T.matrix, self.parts.V.matrix
        np.testing.assert_allclose(nested_commutator(GammaWord((1, 0)), self.parts.T, self.parts.V).matrix,
                                   T @ V - V @ T, atol=1e-12)
        np.testing.assert_allclose(nested_commutator(GammaWord((0, 1)), self.parts.T, self.parts.V).matrix,
                                   V @ T - T @ V, atol=1e-12)

    def test_right_fold(self):
        """It should fold the outer layers onto the innermost bracket"""
        T, V = self.parts.T, self.parts.V
        expected = commutator(V, commutator(T, commutator(T, V)))
        np.testing.assert_allclose(nested_commutator(GammaWord((0, 1, 1, 0)), T, V).matrix, expected.matrix)

    def test_hermiticity_parity(self):
        """It should give anti-Hermitian odd and Hermitian even depths"""
        for p in (1, 2, 3):
            for word in gamma_enumeration(p):
                matrix = nested_commutator(word, self.parts.T, self.parts.V).matrix
                np.testing.assert_allclose(matrix.conj().T, (-1) ** p * matrix, atol=1e-9)

    def test_chain_bound_dominates(self):
        """It should bound every nested commutator by the chain count"""
        for p in (1, 2, 3):
            for word in gamma_enumeration(p):
                value = fermionic_seminorm(nested_commutator(word, self.parts.T, self.parts.V))
                self.assertLessEqual(value, chain_count_bound(word, self.pair, 2))

    def test_invalid_inputs(self):
        """It should refuse non-Hermitian generators and mixed sectors"""
        sector = self.sector
        skew = SectorOperator(sector, sector, 1j * np.eye(sector.dim) + np.triu(np.ones((6, 6)), 1))
        self.assertRaises(DataValidationError, nested_commutator, GammaWord((1, 0)), skew, self.parts.V)
        other = assemble(self.pair, enumerate_sector(4, 1))
        self.assertRaises(DataValidationError, nested_commutator, GammaWord((1, 0)), self.parts.T, other.V)


######################################################################
#  S I N G L E   L A Y E R   T E S T   C A S E S
######################################################################
class TestSingleLayer(TestCase):
    """Test Cases for the six-term expansion of [T, V]"""

    @classmethod
    def setUpClass(cls):
        """This runs once before the entire test suite"""
        app.logger.setLevel(logging.CRITICAL)

    def test_signed_sum(self):
        """It should reproduce [T, V] from the six signed sums"""
        for n, eta, sparsity in ((4, 2, None), (5, 2, 3), (5, 3, None), (3, 0, None)):
            pair = CoefficientPairFactory(n=n, sparsity=sparsity)
            sector = enumerate_sector(n, eta)
            parts = assemble(pair, sector)
            terms = single_layer_terms(pair, sector)
            total = sum(sign * term.matrix for sign, term in zip(SINGLE_LAYER_SIGNS, terms))
            np.testing.assert_allclose(total, commutator(parts.T, parts.V).matrix, atol=1e-10)

    def test_term_bounds(self):
        """It should bound each of the six sums"""
        pair = CoefficientPairFactory(n=5)
        sector = enumerate_sector(5, 2)
        bounds = single_layer_bounds(pair, 2)
        for term, bound in zip(single_layer_terms(pair, sector), bounds):
            self.assertLessEqual(fermionic_seminorm(term), bound * (1 + 1e-9))

    def test_mode_mismatch(self):
        """It should not expand a pair on a sector of another size"""
        pair = CoefficientPairFactory(n=3)
        self.assertRaises(DataValidationError, single_layer_terms, pair, enumerate_sector(4, 1))


######################################################################
#  I N E Q U A L I T Y   T E S T   C A S E S
######################################################################
class TestOperatorInequalities(TestCase):
    """Test Cases for the three operator inequalities"""

    @classmethod
    def setUpClass(cls):
        """This runs once before the entire test suite"""
        app.logger.setLevel(logging.CRITICAL)
        cls.upper = enumerate_sector(4, 2)
        cls.lower = enumerate_sector(4, 1)
        rng = np.random.default_rng(17)
        cls.Bs = [
            reduce(add, (rng.normal() * elementary_operator(OpKind.ANNIHILATION, k, cls.upper) for k in range(4)))
            for _ in range(3)
        ]
        cls.Cs = [
            reduce(add, (complex(rng.normal(), rng.normal()) * hopping_operator(j, k, cls.lower)
                         for j in range(4) for k in range(4)))
            for _ in range(3)
        ]

    def test_cauchy(self):
        """It should sandwich the mixed sum between the plus and minus diagonal sums"""
        self.assertTrue(lemma_cauchy_check(self.Bs, self.Cs))

    def test_diagonalization(self):
        """It should bound a Hermitian coefficient form by its spectral norm"""
        rng = np.random.default_rng(3)
        mu = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
        self.assertTrue(lemma_diagonalization_check((mu + mu.conj().T) / 2, self.Bs))
        self.assertRaises(DataValidationError, lemma_diagonalization_check, np.eye(2), self.Bs)

    def test_holder(self):
        """It should bound the dressed sum by the product of seminorms"""
        self.assertTrue(lemma_holder_check(self.Bs, self.Cs))
        creators = [elementary_operator(OpKind.CREATION, 0, self.lower)] * 3
        self.assertRaises(DataValidationError, lemma_holder_check, self.Bs, creators)

    def test_mismatched_lists(self):
        """It should refuse lists of different lengths or sectors"""
        self.assertRaises(DataValidationError, lemma_cauchy_check, self.Bs, self.Cs[:2])
        self.assertRaises(DataValidationError, lemma_cauchy_check, [], [])
        wrong = [hopping_operator(0, 1, self.upper)] * 3
        self.assertRaises(DataValidationError, lemma_cauchy_check, self.Bs, wrong)
