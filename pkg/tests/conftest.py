import pytest

from wavefront_psa.model import functions_for, make_model


@pytest.fixture(scope="session")
def cvx():
    return make_model("inert-convex-quadratic", a=1.0, b=0.5)


@pytest.fixture(scope="session")
def cvx_fns(cvx):
    return functions_for(cvx)


@pytest.fixture(scope="session")
def lin():
    return make_model("linear", a1=0.0, a2=1.0)


@pytest.fixture(scope="session")
def lin_fns(lin):
    return functions_for(lin)


@pytest.fixture(scope="session")
def lng():
    return make_model("inert-langmuir", Q=1.0, K=1.0)


@pytest.fixture(scope="session")
def lng_fns(lng):
    return functions_for(lng)
