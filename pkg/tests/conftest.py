import numpy as np
import pytest

from haloreach import (
    IntegratorConfig,
    assemble_e,
    assemble_e_star,
    build_stm_history,
    get_orbit_entry,
    j_star_from_thrust,
    reachable_set,
    shoot_nonlinear,
    validation_sweep,
)
from haloreach.dynamics import ADJOINT, JACOBIAN, Cr3bpModel
from haloreach.units import accel_si_to_canonical

from reference_values import PUBLISHED_U_MAX_SI


@pytest.fixture(scope="session")
def catalog_orbit():
    return get_orbit_entry("em-l2-halo-southern").to_orbit()


@pytest.fixture(scope="session")
def integ():
    return IntegratorConfig()


@pytest.fixture(scope="session")
def adjoint_model(catalog_orbit):
    return Cr3bpModel(catalog_orbit.params, ADJOINT)


@pytest.fixture(scope="session")
def jacobian_model(catalog_orbit):
    return Cr3bpModel(catalog_orbit.params, JACOBIAN)


@pytest.fixture(scope="session")
def history_adj(catalog_orbit, integ, adjoint_model):
    return build_stm_history(catalog_orbit, 2000, integ, model=adjoint_model)


@pytest.fixture(scope="session")
def history_jac(catalog_orbit, integ, jacobian_model):
    return build_stm_history(catalog_orbit, 2000, integ, model=jacobian_model)


@pytest.fixture(scope="session")
def history_adj_hires(catalog_orbit, integ, adjoint_model):
    return build_stm_history(catalog_orbit, 20000, integ, model=adjoint_model)


@pytest.fixture(scope="session")
def eform_adj(history_adj):
    return assemble_e(history_adj)


@pytest.fixture(scope="session")
def estar_adj(eform_adj):
    return assemble_e_star(eform_adj)


@pytest.fixture(scope="session")
def eform_jac(history_jac):
    return assemble_e(history_jac)


@pytest.fixture(scope="session")
def estar_jac(eform_jac):
    return assemble_e_star(eform_jac)


@pytest.fixture(scope="session")
def j_star_craft(catalog_orbit):
    return j_star_from_thrust(accel_si_to_canonical(PUBLISHED_U_MAX_SI),
                              catalog_orbit.period)


@pytest.fixture(scope="session")
def rset_jac(estar_jac, j_star_craft):
    return reachable_set(estar_jac, j_star_craft)


@pytest.fixture(scope="session")
def rset_adj(estar_adj, j_star_craft):
    return reachable_set(estar_adj, j_star_craft)


@pytest.fixture(scope="session")
def inherent_jac(catalog_orbit, integ, jacobian_model, history_jac):
    return shoot_nonlinear(catalog_orbit, np.zeros(6), integrator=integ,
                           model=jacobian_model, history=history_jac,
                           n_checkpoints=2)


@pytest.fixture(scope="session")
def inherent_adj(catalog_orbit, integ, adjoint_model, history_adj):
    return shoot_nonlinear(catalog_orbit, np.zeros(6), integrator=integ,
                           model=adjoint_model, history=history_adj,
                           n_checkpoints=2)


@pytest.fixture(scope="session")
def sweep_jac(catalog_orbit, integ, jacobian_model, history_jac, estar_jac,
              inherent_jac):
    """The 16-point linear-vs-nonlinear sweep along the 4th eigendirection."""
    costs = np.geomspace(1e-6, 3.51e-4, 16)
    gamma4 = estar_jac.eigenvalues[3]
    scales = np.sqrt(2.0 * costs / gamma4)
    return validation_sweep(
        catalog_orbit, estar_jac.eigenvectors[:, 3], scales, integrator=integ,
        model=jacobian_model, history=history_jac, form=estar_jac,
        inherent_cost=inherent_jac.true_cost)
