"""
Experiment runners

Each subcommand has a DEFAULTS record (the accepted config fields and
their defaults) and a runner that turns an ExperimentConfig into rows.
execute() renders the rows with the provenance header.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from itertools import product
from typing import Callable, Dict, List, NamedTuple, Optional, Tuple

import numpy as np

from trotterlab import __version__
from trotterlab.bounds import (
    BoundReport,
    commutator_scaling_value,
    rigorous_bound_low_order,
    scaling_bound_commutator_only,
    scaling_bound_general,
    scaling_bound_manifold_only,
    scaling_bound_path_dense,
    scaling_bound_sparse,
    step_count,
)
from trotterlab.common import writers
from trotterlab.common.errors import DataValidationError, NumericalError
from trotterlab.commutator import (
    SINGLE_LAYER_SIGNS,
    chain_count_bound,
    commutator,
    gamma_enumeration,
    lemma_cauchy_check,
    lemma_diagonalization_check,
    lemma_holder_check,
    nested_commutator,
    single_layer_terms,
)
from trotterlab.fock import (
    OpKind,
    SectorOperator,
    elementary_operator,
    enumerate_sector,
    hopping_operator,
    identity,
    number_operator,
)
from trotterlab.hamiltonian import assemble, build_instance, ffft_conjugate, interaction_sparsity, tightness_instance
from trotterlab.models import CoefficientPair, ExperimentConfig
from trotterlab.pathcount import (
    IndexedTerm,
    closed_form_counts,
    degree_table,
    enumerate_all_paths,
    expand_paths,
    path_bound,
)
from trotterlab.seminorm import fermionic_seminorm, max_expectation, seminorm_axiom_check
from trotterlab.tightness import tightness_ratio_report
from trotterlab.trotter import build_formula, fit_error_order, formula_error

logger = logging.getLogger("flask.app")

RANDOM_INSTANCE = {"family": "random", "n": 6}


class Outcome(NamedTuple):
    """Rows of an experiment plus JSON-only extras"""
    rows: List[dict]
    extra: Optional[dict] = None


def _instance(config: ExperimentConfig) -> CoefficientPair:
    spec = config.params["instance"]
    rng = None if "seed" in spec else np.random.default_rng(config.seed)
    return build_instance(spec, rng)


def _sector_pair(config: ExperimentConfig):
    coeff = _instance(config)
    sector = enumerate_sector(coeff.n, int(config.params["eta"]))
    hopping, interaction, _ = assemble(coeff, sector)
    return coeff, sector, hopping, interaction


######################################################################
#  E R R O R   S W E E P
######################################################################

ERROR_DEFAULTS = {
    "instance": RANDOM_INSTANCE,
    "eta": 3,
    "orders": [1, 2],
    "ts": [0.02, 0.04, 0.06, 0.08, 0.1],
    "steps": [1],
}


def run_error(config: ExperimentConfig) -> Outcome:
    """Trotter error over orders, times and step counts, with fitted slopes"""
    params = config.params
    _, _, hopping, interaction = _sector_pair(config)
    formulas = {p: build_formula(p) for p in params["orders"]}
    points = list(product(params["orders"], params["steps"], params["ts"]))

    def measure(point):
        p, r, t = point
        return formula_error(formulas[p], hopping, interaction, t, r)

    with ThreadPoolExecutor(max_workers=config.jobs) as executor:
        errors = list(executor.map(measure, points))

    rows = [{"kind": "sample", "p": p, "r": r, "t": t, "error": error, "slope": None}
            for (p, r, t), error in zip(points, errors)]
    for p, r in product(params["orders"], params["steps"]):
        samples = [(t, error) for (q, s, t), error in zip(points, errors) if (q, s) == (p, r)]
        slope = None
        if len(samples) >= 4:
            try:
                slope = fit_error_order(*zip(*samples))
            except DataValidationError as error:
                logger.warning("No order fit for p=%d r=%d: %s", p, r, error)
        rows.append({"kind": "fit", "p": p, "r": r, "t": None, "error": None, "slope": slope})
    return Outcome(rows)


######################################################################
#  B O U N D S
######################################################################

BOUND_DEFAULTS = {
    "instance": RANDOM_INSTANCE,
    "eta": 3,
    "orders": [1, 2],
    "ts": [0.05, 0.1, 0.2],
    "eps": 1e-3,
}


def _reports(p: int, t: float, coeff: CoefficientPair, eta: int, hopping, interaction) -> List[BoundReport]:
    norms = {"spec_tau": coeff.spectral_tau, "max_tau": coeff.max_tau, "max_nu": coeff.max_nu,
             "d": coeff.sparsity, "n": coeff.n, "eta": eta}
    reports = []
    if p <= 2:
        reports.append(BoundReport("rigorous_low_order", rigorous_bound_low_order(p, hopping, interaction, t), True))
    reports.extend([
        BoundReport("commutator_scaling", commutator_scaling_value(p, hopping, interaction, t)),
        BoundReport("general", scaling_bound_general(p, norms["spec_tau"], norms["max_nu"], eta, t), params=norms),
        BoundReport("sparse", scaling_bound_sparse(p, norms["max_tau"], norms["max_nu"], norms["d"], eta, t),
                    params=norms),
        BoundReport("path_dense", scaling_bound_path_dense(p, norms["max_tau"], norms["max_nu"], norms["n"], eta, t),
                    params=norms),
        BoundReport("manifold_only", scaling_bound_manifold_only(p, norms["spec_tau"], norms["max_nu"], eta, t)),
        BoundReport("commutator_only", scaling_bound_commutator_only(p, norms["max_tau"], norms["max_nu"],
                                                                     norms["n"], t)),
    ])
    return reports


def run_bound(config: ExperimentConfig) -> Outcome:
    """Every bound family next to the measured single-step error"""
    params = config.params
    eta = int(params["eta"])
    coeff, _, hopping, interaction = _sector_pair(config)
    points = list(product(params["orders"], params["ts"]))

    def evaluate(point):
        p, t = point
        measured = formula_error(build_formula(p), hopping, interaction, t)
        return measured, _reports(p, t, coeff, eta, hopping, interaction)

    with ThreadPoolExecutor(max_workers=config.jobs) as executor:
        outcomes = list(executor.map(evaluate, points))

    rows = []
    for (p, t), (measured, reports) in zip(points, outcomes):
        for report in reports:
            record = report.serialize()
            steps = step_count(p, report.family, report.params, t, params["eps"]) \
                if report.family in ("general", "sparse", "path_dense") else None
            rows.append({
                "kind": "point",
                "p": p,
                "t": t,
                "measured": measured,
                "family": record["family"],
                "value": record["value"],
                "certified": record["certified"],
                "ratio": measured / record["value"] if record["value"] else None,
                "dominates": bool(record["value"] >= measured),
                "steps": steps,
            })
            if report.certified and record["value"] < measured:
                logger.error("Certified bound %s = %s below measured error %s", report.family, record["value"],
                             measured)

    # smallest C with measured <= C * value at every t, per order and family
    fitted = {}
    for row in rows:
        if row["ratio"] is not None:
            key = (row["p"], row["family"])
            fitted[key] = max(fitted.get(key, 0.0), row["ratio"])
    for (p, family), constant in fitted.items():
        rows.append({"kind": "fitted_constant", "p": p, "t": None, "measured": None, "family": family,
                     "value": None, "certified": None, "ratio": constant, "dominates": None, "steps": None})
    return Outcome(rows)


######################################################################
#  C O M M U T A T O R S
######################################################################

COMMUTATOR_DEFAULTS = {"instance": RANDOM_INSTANCE, "eta": 3, "max_order": 3}


def run_commutator(config: ExperimentConfig) -> Outcome:
    """Seminorm of every nested commutator up to max_order"""
    params = config.params
    eta = int(params["eta"])
    coeff, _, hopping, interaction = _sector_pair(config)
    words = [gamma for p in range(1, int(params["max_order"]) + 1) for gamma in gamma_enumeration(p)]

    def evaluate(gamma):
        operator = nested_commutator(gamma, hopping, interaction)
        return fermionic_seminorm(operator), max_expectation(operator)

    with ThreadPoolExecutor(max_workers=config.jobs) as executor:
        values = list(executor.map(evaluate, words))
    return Outcome([
        {
            "gamma": str(gamma),
            "bits": "".join(str(bit) for bit in gamma.bits),
            "p": gamma.order,
            "weight": gamma.weight,
            "seminorm": seminorm,
            "max_expectation": expectation,
            "chain_bound": chain_count_bound(gamma, coeff, eta),
        }
        for gamma, (seminorm, expectation) in zip(words, values)
    ])


######################################################################
#  P A T H   C O U N T I N G
######################################################################

PATHCOUNT_DEFAULTS = {
    "instance": {"family": "hubbard", "extents": [2]},
    "eta": 2,
    "orders": [1, 2],
    "ruleset": "standard",
    "export_paths": False,
}


def run_pathcount(config: ExperimentConfig) -> Outcome:
    """Degree tables, path bounds and closed-form counts per gamma word"""
    params = config.params
    eta = int(params["eta"])
    ruleset = params["ruleset"]
    coeff, sector, hopping, interaction = _sector_pair(config)
    sparsity = interaction_sparsity(coeff)
    rows, degrees, paths = [], {}, {}
    for p in params["orders"]:
        for gamma in gamma_enumeration(p):
            table = degree_table(gamma, coeff, sector, ruleset, config.jobs)
            bound = path_bound(gamma, coeff, eta, ruleset, config.jobs)
            rows.append({
                "gamma": str(gamma),
                "p": p,
                "ruleset": ruleset,
                "max_degree": float(np.max(table, initial=0.0)),
                "path_bound": bound,
                "seminorm": fermionic_seminorm(nested_commutator(gamma, hopping, interaction)),
                "sparse_count": closed_form_counts(p, "sparse", eta, d=sparsity),
                "dense_count": closed_form_counts(p, "dense", eta, n=coeff.n, weight=gamma.weight),
            })
            degrees[str(gamma)] = {sector.config(i).ket(): float(value) for i, value in enumerate(table)}
            if params["export_paths"]:
                paths[str(gamma)] = [path.serialize() for path in
                                     enumerate_all_paths(gamma, coeff, ruleset, config.jobs)]
    extra = {"degrees": degrees}
    if params["export_paths"]:
        extra["paths"] = paths
    return Outcome(rows, extra)


######################################################################
#  T I G H T N E S S
######################################################################

TIGHTNESS_DEFAULTS = {
    "family": "V_first",
    "grid": [{"n": 8, "eta": 2, "p": 1}, {"n": 12, "eta": 3, "p": 1}, {"n": 16, "eta": 4, "p": 1}],
}


def run_tightness(config: ExperimentConfig) -> Outcome:
    """Ratio report of one lower-bound family"""
    report = tightness_ratio_report(config.params["family"], config.params["grid"], config.jobs)
    return Outcome([row.serialize() for row in report])


######################################################################
#  H A M I L T O N I A N
######################################################################

HAMILTONIAN_DEFAULTS = {"instance": {"family": "hubbard", "extents": [2]}}


def run_hamiltonian(config: ExperimentConfig) -> Outcome:
    """Builds one instance and reports its norms and coefficients"""
    coeff = _instance(config)
    return Outcome([{
        "family": config.params["instance"].get("family"),
        "n": coeff.n,
        "sparsity": coeff.sparsity,
        "spectral_tau": coeff.spectral_tau,
        "max_tau": coeff.max_tau,
        "max_nu": coeff.max_nu,
        "pair": coeff.serialize(),
    }])


######################################################################
#  S E L F   C H E C K
######################################################################

SELFCHECK_DEFAULTS = {"max_modes": 4, "trials": 3, "tol": 1e-9}


def _residual(left: np.ndarray, right: np.ndarray) -> float:
    return float(np.max(np.abs(left - right), initial=0.0))


def _number_residual(n: int) -> float:
    """sum_j N_j against eta times the identity and the total number operator, on every sector"""
    worst = 0.0
    for eta in range(n + 1):
        sector = enumerate_sector(n, eta)
        total = SectorOperator.zeros(sector)
        for j in range(n):
            total = total + elementary_operator(OpKind.NUMBER, j, sector)
        worst = max(worst, _residual(total.matrix, eta * np.eye(sector.dim)),
                    _residual(total.matrix, number_operator(sector).matrix))
    return worst


def _car_residual(n: int) -> float:
    """Worst violation of the canonical anticommutation relations on all sectors"""
    worst = 0.0
    for eta, j, k in product(range(n + 1), range(n), range(n)):
        sector = enumerate_sector(n, eta)
        total = np.zeros((sector.dim, sector.dim), dtype=complex)
        if eta > 0:
            lower = elementary_operator(OpKind.ANNIHILATION, k, sector)
            total += (elementary_operator(OpKind.CREATION, j, lower.codomain) @ lower).matrix
        if eta < n:
            upper = elementary_operator(OpKind.CREATION, j, sector)
            total += (elementary_operator(OpKind.ANNIHILATION, k, upper.codomain) @ upper).matrix
        worst = max(worst, _residual(total, np.eye(sector.dim) * (j == k)))
        for kind, shift in ((OpKind.CREATION, 2), (OpKind.ANNIHILATION, -2)):
            if not 0 <= eta + shift <= n:
                continue
            first = elementary_operator(kind, k, sector)
            second = elementary_operator(kind, j, sector)
            total = (elementary_operator(kind, j, first.codomain) @ first).matrix \
                + (elementary_operator(kind, k, second.codomain) @ second).matrix
            worst = max(worst, float(np.max(np.abs(total), initial=0.0)))
    return worst


def _commutation_residual(n: int) -> float:
    """[N_j, A_k^+] = d_jk A_k^+ and [A_j^+ A_k, A_l^+] = d_kl A_j^+ on all sectors below n"""
    worst = 0.0
    for eta, j, k in product(range(n), range(n), range(n)):
        sector = enumerate_sector(n, eta)
        create = elementary_operator(OpKind.CREATION, k, sector)
        number_low = elementary_operator(OpKind.NUMBER, j, sector)
        number_high = elementary_operator(OpKind.NUMBER, j, create.codomain)
        bracket = number_high @ create - create @ number_low
        worst = max(worst, _residual(bracket.matrix, create.matrix * (j == k)))
        for l in range(n):
            added = elementary_operator(OpKind.CREATION, l, sector)
            hop_low = hopping_operator(j, k, sector)
            hop_high = hopping_operator(j, k, added.codomain)
            bracket = hop_high @ added - added @ hop_low
            expected = elementary_operator(OpKind.CREATION, j, sector).matrix * (k == l)
            worst = max(worst, _residual(bracket.matrix, expected))
    return worst


def _random_operator(sector, rng) -> SectorOperator:
    return SectorOperator(sector, sector, rng.normal(size=(sector.dim,) * 2) + 1j * rng.normal(size=(sector.dim,) * 2))


def _lemma_suite(n: int, rng, tol: float) -> bool:
    sector = enumerate_sector(n, n // 2)
    Bs = [elementary_operator(OpKind.ANNIHILATION, j, sector) for j in range(n)]
    Cs = [_random_operator(Bs[0].codomain, rng) for _ in range(n)]
    Ms = [C.adjoint() @ C for C in Cs]
    mu = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    mu = (mu + mu.conj().T) / 2
    return lemma_cauchy_check(Bs, Cs, tol) and lemma_diagonalization_check(mu, Bs, tol) \
        and lemma_holder_check(Bs, Ms, tol)


def _expansion_residual(n: int, rng) -> float:
    """Signed path sums against numeric commutators of random index tuples"""
    worst = 0.0
    for p in (1, 2):
        for gamma in gamma_enumeration(p):
            terms = [IndexedTerm(bit, *rng.integers(0, n, size=2)) for bit in gamma.bits]
            for eta in range(n + 1):
                sector = enumerate_sector(n, eta)
                numeric = terms[-1].matrix(sector)
                for term in reversed(terms[:-1]):
                    numeric = commutator(term.matrix(sector), numeric)
                for ruleset in ("standard", "normal_ordered"):
                    expanded = SectorOperator.zeros(sector)
                    for path in expand_paths(terms, ruleset, n):
                        expanded = expanded + path.matrix(sector)
                    worst = max(worst, _residual(expanded.matrix, numeric.matrix))
    return worst


def _selfcheck_suites(params: dict, seed: int) -> List[Tuple[str, bool, float]]:
    rng = np.random.default_rng(seed)
    tol = float(params["tol"])
    max_modes = int(params["max_modes"])
    if not 2 <= max_modes <= 8:
        raise DataValidationError(f"selfcheck needs 2 <= max_modes <= 8, got {max_modes}")
    results = []

    car = max(_car_residual(n) for n in range(1, max_modes + 1))
    results.append(("anticommutation", car <= 1e-12, car))
    relations = max(_commutation_residual(n) for n in range(1, min(max_modes, 4) + 1))
    results.append(("commutation_relations", relations <= 1e-12, relations))
    number = max(_number_residual(n) for n in range(1, max_modes + 1))
    results.append(("number_sector", number <= 1e-12, number))

    sector = enumerate_sector(max_modes, max_modes // 2)
    axioms_ok, axioms_residual = True, 0.0
    for trial in range(int(params["trials"])):
        report = seminorm_axiom_check(_random_operator(sector, rng), _random_operator(sector, rng), 2j,
                                      seed=seed + trial, tol=tol)
        axioms_ok &= report.passed
        axioms_residual = max(axioms_residual, *(residual for _, residual in report.results.values()))
    tight = hopping_operator(0, 1, enumerate_sector(2, 1))
    tight_residual = max(abs(fermionic_seminorm(tight) - 1.0), abs(max_expectation(tight) - 0.5))
    results.append(("seminorm_axioms", axioms_ok and tight_residual <= 1e-7, max(axioms_residual, tight_residual)))

    lemmas = all(_lemma_suite(n, rng, tol) for n in range(2, min(max_modes, 5) + 1)
                 for _ in range(int(params["trials"])))
    results.append(("lemmas", lemmas, 0.0))

    expansion = max(_expansion_residual(min(max_modes, 4), rng) for _ in range(int(params["trials"])))
    results.append(("expansion_soundness", expansion <= 1e-12, expansion))

    dominance_ok, dominance_margin = True, np.inf
    layers_ok, layers_residual = True, 0.0
    for trial in range(int(params["trials"])):
        coeff = build_instance({"family": "random", "n": max_modes}, np.random.default_rng(seed + trial))
        hopping, interaction, _ = assemble(coeff, sector)
        terms = single_layer_terms(coeff, sector)
        signed = SectorOperator.zeros(sector)
        for sign, term in zip(SINGLE_LAYER_SIGNS, terms):
            signed = signed + term * sign
        exact = commutator(hopping, interaction).matrix
        drift = _residual(signed.matrix, exact)
        layers_residual = max(layers_residual, drift)
        layers_ok &= drift <= 1e-10 * max(1.0, float(np.max(np.abs(exact), initial=0.0)))
        for p in (1, 2):
            measured = formula_error(build_formula(p), hopping, interaction, 0.1)
            bound = rigorous_bound_low_order(p, hopping, interaction, 0.1)
            dominance_ok &= bound >= measured
            dominance_margin = min(dominance_margin, bound - measured)
    results.append(("single_layer_expansion", layers_ok, layers_residual))
    results.append(("low_order_dominance", bool(dominance_ok), float(dominance_margin)))

    ffft = 0.0
    for n in range(2, max_modes + 1, 2):
        for eta in range(n + 1):
            basis = enumerate_sector(n, eta)
            hopping, _, _ = assemble(tightness_instance("dense", n, s=n), basis)
            expected = n * elementary_operator(OpKind.NUMBER, 0, basis).matrix
            ffft = max(ffft, _residual(ffft_conjugate(hopping, n).matrix, expected))
    results.append(("ffft_identity", ffft <= 1e-9, ffft))
    results.append(("identity_seminorm", abs(fermionic_seminorm(identity(sector)) - 1.0) <= tol,
                    abs(fermionic_seminorm(identity(sector)) - 1.0)))
    return results


def run_selfcheck(config: ExperimentConfig) -> Outcome:
    """Runs every invariant suite; any failure is a numerical failure"""
    results = _selfcheck_suites(config.params, config.seed)
    rows = [{"suite": name, "passed": bool(passed), "residual": float(residual)} for name, passed, residual in results]
    failed = [row["suite"] for row in rows if not row["passed"]]
    if failed:
        raise NumericalError(f"Self-check suites failed: {', '.join(failed)}")
    logger.info("All %d self-check suites passed", len(rows))
    return Outcome(rows)


######################################################################
#  D I S P A T C H
######################################################################


class Command(NamedTuple):
    """A subcommand: its accepted fields and its runner"""
    defaults: dict
    runner: Callable[[ExperimentConfig], Outcome]


COMMANDS: Dict[str, Command] = {
    "error": Command(ERROR_DEFAULTS, run_error),
    "bound": Command(BOUND_DEFAULTS, run_bound),
    "commutator": Command(COMMUTATOR_DEFAULTS, run_commutator),
    "pathcount": Command(PATHCOUNT_DEFAULTS, run_pathcount),
    "tightness": Command(TIGHTNESS_DEFAULTS, run_tightness),
    "hamiltonian": Command(HAMILTONIAN_DEFAULTS, run_hamiltonian),
    "selfcheck": Command(SELFCHECK_DEFAULTS, run_selfcheck),
}


def resolve(command: str, document: Optional[dict] = None, **overrides) -> ExperimentConfig:
    """Validates a config document for a command"""
    if command not in COMMANDS:
        raise DataValidationError(f"Unknown command {command!r}")
    return ExperimentConfig.deserialize(command, document or {}, COMMANDS[command].defaults, **overrides)


def execute(config: ExperimentConfig) -> str:
    """Runs a resolved config and renders its artifact"""
    logger.info("Running %s with seed %d (config %s)", config.command, config.seed, config.config_hash()[:12])
    outcome = COMMANDS[config.command].runner(config)
    provenance = {
        "version": __version__,
        "command": config.command,
        "seed": config.seed,
        "config_sha256": config.config_hash(),
    }
    return writers.render(config.fmt, provenance, outcome.rows, outcome.extra)
