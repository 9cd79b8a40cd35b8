import logging
from random import Random

import pytest

from kernel_lib.generators import Generator
from kernel_lib.syntax import Signature


@pytest.fixture
def logger() -> logging.Logger:
    return logging.getLogger('TYPE-KERNEL.tests')


@pytest.fixture
def sig() -> Signature:
    return Signature(1, (1,))


@pytest.fixture
def sig21() -> Signature:
    """x=2;y=2,1"""
    return Signature(2, (2, 1))


@pytest.fixture
def generator(logger, sig) -> Generator:
    return Generator(logger, sig, Random(7))
