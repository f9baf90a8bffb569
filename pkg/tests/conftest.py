import pytest

from surfdec.code import build_layout
from surfdec.decode import build_pure_error_table


@pytest.fixture(scope="session")
def layout3():
    return build_layout(3)


@pytest.fixture(scope="session")
def layout5():
    return build_layout(5)


@pytest.fixture(scope="session")
def layout7():
    return build_layout(7)


@pytest.fixture(scope="session")
def table3(layout3):
    return build_pure_error_table(layout3)


@pytest.fixture(scope="session")
def table5(layout5):
    return build_pure_error_table(layout5)


@pytest.fixture(scope="session")
def table7(layout7):
    return build_pure_error_table(layout7)
