"""
Test cases for the occupation basis and elementary operators

Test cases can be run with:
    pytest tests/test_fock.py
"""
import logging
from itertools import product
from unittest import TestCase

import numpy as np
from hypothesis import given, settings, strategies as st

from trotterlab import app
from trotterlab.fock import (
    FermionConfig,
    OpKind,
    SectorOperator,
    apply_annihilation,
    apply_creation,
    elementary_operator,
    enumerate_sector,
    hopping_operator,
    identity,
    number_operator,
    one_body_operator,
    state_vector,
)
from trotterlab.models import BudgetExceededError, DataValidationError
from tests import oracle


######################################################################
#  C O N F I G U R A T I O N   T E S T   C A S E S
######################################################################
class TestFermionConfig(TestCase):
    """Test Cases for FermionConfig and the apply rules"""

    @classmethod
    def setUpClass(cls):
        """This runs once before the entire test suite"""
        app.config["TESTING"] = True
        app.logger.setLevel(logging.CRITICAL)

    def test_ket_round_trip(self):
        """It should read and print kets with mode 0 leftmost"""
        config = FermionConfig.from_ket("|0110>")
        self.assertEqual(config.bits, 0b0110)
        self.assertEqual(config.n, 4)
        self.assertEqual(config.ket(), "0110")
        self.assertEqual(str(config), "|0110>")
        self.assertEqual(FermionConfig.from_ket("1000").bits, 1)

    def test_weight_and_parity(self):
        """It should count electrons and the parity below a mode"""
        config = FermionConfig.from_ket("1101")
        self.assertEqual(config.weight, 3)
        self.assertTrue(config.occupied(0))
        self.assertFalse(config.occupied(2))
        self.assertEqual(config.parity_below(0), 0)
        self.assertEqual(config.parity_below(2), 0)
        self.assertEqual(config.parity_below(3), 0)
        self.assertEqual(config.parity_below(1), 1)

    def test_invalid_config(self):
        """It should reject words that do not fit the mode count"""
        self.assertRaises(DataValidationError, FermionConfig, 8, 3)
        self.assertRaises(DataValidationError, FermionConfig.from_ket, "012")
        self.assertRaises(DataValidationError, FermionConfig.from_ket, "")

    def test_creation_rule(self):
        """It should create with the sign of the electrons below the mode"""
        self.assertEqual(apply_creation(0, FermionConfig.from_ket("000")), (FermionConfig.from_ket("100"), 1))
        self.assertEqual(apply_creation(1, FermionConfig.from_ket("100")), (FermionConfig.from_ket("110"), -1))
        self.assertIsNone(apply_creation(0, FermionConfig.from_ket("100")))

    def test_annihilation_rule(self):
        """It should annihilate with the sign of the electrons below the mode"""
        self.assertEqual(apply_annihilation(0, FermionConfig.from_ket("100")), (FermionConfig.from_ket("000"), 1))
        self.assertEqual(apply_annihilation(1, FermionConfig.from_ket("110")), (FermionConfig.from_ket("100"), -1))
        self.assertIsNone(apply_annihilation(1, FermionConfig.from_ket("100")))

    def test_mode_out_of_range(self):
        """It should reject mode indices outside the register"""
        config = FermionConfig.from_ket("10")
        self.assertRaises(DataValidationError, apply_creation, 2, config)
        self.assertRaises(DataValidationError, apply_annihilation, -1, config)

    @settings(max_examples=60, deadline=None)
    @given(st.integers(1, 8).flatmap(lambda n: st.tuples(st.just(n), st.integers(0, 2 ** n - 1),
                                                         st.integers(0, n - 1))))
    def test_rules_are_mutually_inverse(self, case):
        """It should undo a creation with the matching annihilation and sign"""
        n, word, j = case
        config = FermionConfig(word, n)
        created = apply_creation(j, config)
        if created is None:
            self.assertTrue(config.occupied(j))
            return
        back, sign = apply_annihilation(j, created[0])
        self.assertEqual(back, config)
        self.assertEqual(sign, created[1])


######################################################################
#  S E C T O R   T E S T   C A S E S
######################################################################
class TestSectorBasis(TestCase):
    """Test Cases for sector enumeration"""

    @classmethod
    def setUpClass(cls):
        """This runs once before the entire test suite"""
        app.logger.setLevel(logging.CRITICAL)

    def tearDown(self):
        """This runs after each test"""
        app.config["MAX_SECTOR_DIM"] = 20000

    def test_dimensions(self):
        """It should enumerate binomial(n, eta) configurations"""
        self.assertEqual(enumerate_sector(4, 2).dim, 6)
        self.assertEqual(enumerate_sector(6, 3).dim, 20)
        vacuum = enumerate_sector(3, 0)
        self.assertEqual(vacuum.dim, 1)
        self.assertEqual(vacuum.config(0).bits, 0)

    def test_canonical_order(self):
        """It should list configurations in ascending integer order with an exact index"""
        sector = enumerate_sector(5, 2)
        self.assertTrue(np.all(np.diff(sector.configs) > 0))
        self.assertEqual(list(sector.configs), oracle.sector_indices(5, 2))
        for position in range(sector.dim):
            self.assertEqual(sector.position(sector.config(position)), position)

    def test_position_outside(self):
        """It should not find a configuration of another sector"""
        sector = enumerate_sector(4, 2)
        self.assertRaises(DataValidationError, sector.position, FermionConfig.from_ket("1000"))

    def test_out_of_range(self):
        """It should reject impossible electron counts"""
        self.assertRaises(DataValidationError, enumerate_sector, 3, 4)
        self.assertRaises(DataValidationError, enumerate_sector, 3, -1)

    def test_budget(self):
        """It should refuse sectors above the configured dimension"""
        app.config["MAX_SECTOR_DIM"] = 10
        self.assertRaises(BudgetExceededError, enumerate_sector, 6, 3)

    def test_state_vector(self):
        """It should place amplitudes on configurations"""
        sector = enumerate_sector(2, 1)
        vector = state_vector(sector, {FermionConfig.from_ket("10"): 0.6, FermionConfig.from_ket("01"): 0.8j})
        self.assertAlmostEqual(np.linalg.norm(vector), 1.0)
        self.assertEqual(vector[sector.position(FermionConfig.from_ket("01"))], 0.8j)


######################################################################
#  O P E R A T O R   T E S T   C A S E S
######################################################################
class TestSectorOperators(TestCase):
    """Test Cases for elementary operators and their algebra"""

    @classmethod
    def setUpClass(cls):
        """This runs once before the entire test suite"""
        app.logger.setLevel(logging.CRITICAL)

    def test_number_operator_small(self):
        """It should put N_0 on the diagonal of the configurations with mode 0 occupied"""
        sector = enumerate_sector(2, 1)
        matrix = elementary_operator(OpKind.NUMBER, 0, sector).matrix
        np.testing.assert_array_equal(matrix, np.diag([1, 0]))

    def test_creation_on_vacuum(self):
        """It should send |00> to |10> with sign +1"""
        vacuum = enumerate_sector(2, 0)
        operator = elementary_operator(OpKind.CREATION, 0, vacuum)
        self.assertEqual(operator.codomain.eta, 1)
        np.testing.assert_array_equal(operator.matrix, [[1], [0]])

    def test_impossible_codomain(self):
        """It should reject creation on a full sector and annihilation on the vacuum"""
        self.assertRaises(DataValidationError, elementary_operator, OpKind.CREATION, 0, enumerate_sector(2, 2))
        self.assertRaises(DataValidationError, elementary_operator, OpKind.ANNIHILATION, 0, enumerate_sector(2, 0))

    def test_columns_are_signed_units(self):
        """It should have at most one +-1 per column"""
        sector = enumerate_sector(5, 2)
        for kind, mode in product((OpKind.CREATION, OpKind.ANNIHILATION), range(5)):
            matrix = elementary_operator(kind, mode, sector).matrix
            self.assertTrue(np.all(np.count_nonzero(matrix, axis=0) <= 1))
            self.assertTrue(set(np.unique(matrix).real) <= {-1.0, 0.0, 1.0})

    def test_matches_oracle(self):
        """It should agree with the full Fock space operators on every sector"""
        n = 4
        for eta, j in product(range(n), range(n)):
            sector = enumerate_sector(n, eta)
            np.testing.assert_array_equal(
                elementary_operator(OpKind.CREATION, j, sector).matrix,
                oracle.restrict(oracle.creation(j, n), n, eta, eta + 1),
            )

    def test_anticommutation(self):
        """It should satisfy {A_j, A_k^dagger} = delta_jk on every sector with n <= 6"""
        for n in range(1, 7):
            for eta, j, k in product(range(1, n), range(n), range(n)):
                sector = enumerate_sector(n, eta)
                down = elementary_operator(OpKind.ANNIHILATION, k, sector)
                up = elementary_operator(OpKind.CREATION, j, sector)
                total = elementary_operator(OpKind.CREATION, j, down.codomain) @ down \
                    + elementary_operator(OpKind.ANNIHILATION, k, up.codomain) @ up
                np.testing.assert_allclose(total.matrix, np.eye(sector.dim) * (j == k), atol=1e-12)

    def test_creators_anticommute(self):
        """It should satisfy A_j^dagger A_k^dagger + A_k^dagger A_j^dagger = 0"""
        n = 5
        for eta, j, k in product(range(n - 1), range(n), range(n)):
            sector = enumerate_sector(n, eta)
            first = elementary_operator(OpKind.CREATION, k, sector)
            second = elementary_operator(OpKind.CREATION, j, sector)
            total = elementary_operator(OpKind.CREATION, j, first.codomain) @ first \
                + elementary_operator(OpKind.CREATION, k, second.codomain) @ second
            self.assertEqual(np.max(np.abs(total.matrix)), 0.0)

    def test_number_sector(self):
        """It should act as eta times the identity"""
        for n in range(1, 7):
            for eta in range(n + 1):
                sector = enumerate_sector(n, eta)
                total = sum(elementary_operator(OpKind.NUMBER, j, sector).matrix for j in range(n))
                np.testing.assert_array_equal(total, number_operator(sector).matrix)

    def test_hopping_commutation(self):
        """It should satisfy [A_j^dagger A_k, A_l^dagger A_m] = d_kl A_j^dagger A_m - d_jm A_l^dagger A_k"""
        n = 4
        for eta in range(n + 1):
            sector = enumerate_sector(n, eta)
            for j, k, l, m in product(range(n), repeat=4):
                left = hopping_operator(j, k, sector)
                right = hopping_operator(l, m, sector)
                bracket = (left @ right - right @ left).matrix
                expected = hopping_operator(j, m, sector).matrix * (k == l) \
                    - hopping_operator(l, k, sector).matrix * (j == m)
                np.testing.assert_allclose(bracket, expected, atol=1e-12)

    def test_one_body_matches_oracle(self):
        """It should build sum m_jk A_j^dagger A_k like the full Fock space"""
        rng = np.random.default_rng(3)
        n = 4
        matrix = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        hopping, _ = oracle.hamiltonian(matrix, np.zeros((n, n)), n)
        for eta in range(n + 1):
            np.testing.assert_allclose(one_body_operator(matrix, enumerate_sector(n, eta)).matrix,
                                       oracle.restrict(hopping, n, eta), atol=1e-12)

    def test_operator_arithmetic(self):
        """It should add, compose and conjugate with sector checks"""
        sector = enumerate_sector(3, 1)
        other = enumerate_sector(3, 2)
        hop = hopping_operator(0, 1, sector)
        np.testing.assert_array_equal((hop + hop.adjoint()).matrix, (hop.adjoint() + hop).matrix)
        np.testing.assert_array_equal((2 * hop).matrix, (hop * 2).matrix)
        self.assertRaises(DataValidationError, hop.__add__, identity(other))
        self.assertRaises(DataValidationError, hop.__matmul__, identity(other))
        self.assertRaises(DataValidationError, SectorOperator, sector, sector, np.zeros((2, 2)))
        self.assertRaises(DataValidationError, hop.apply, np.zeros(4))
        self.assertTrue(hop.number_preserving)
        self.assertFalse(elementary_operator(OpKind.CREATION, 0, sector).number_preserving)
