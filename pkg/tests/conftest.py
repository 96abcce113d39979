from importlib import resources

import pytest
from hypothesis import settings

settings.register_profile("default", max_examples=200, deadline=None, derandomize=True)
settings.load_profile("default")


def program_text(name: str) -> str:
    return resources.files("cbalias").joinpath(f"programs/{name}").read_text(encoding="utf-8")


@pytest.fixture
def resultsize() -> str:
    return program_text("resultsize.src")


@pytest.fixture
def fib() -> str:
    return program_text("fib.src")


FULL_CONFIG = {"new_size": 1024, "legacy_size": 512}
