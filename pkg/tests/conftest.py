import pytest

from stefan_confluence import convolutions, interaction, stefan


@pytest.fixture(scope="session")
def table():
    return convolutions.build_table()


@pytest.fixture(scope="session")
def sol(table):
    return interaction.solve_interaction(table)


@pytest.fixture(scope="session")
def sym_fronts():
    return stefan.manufactured_scenario("symmetric-linear")


@pytest.fixture(scope="session")
def asym_fronts():
    return stefan.manufactured_scenario("asymmetric-smooth")
