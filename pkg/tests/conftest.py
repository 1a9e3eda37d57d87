import os
from typing import Callable

import pytest

from corpus.loader import load_corpus
from corpus.models import SeedProgram
from source_model.models import SubjectLanguage
from source_model.utils import count_loc, estimate_tokens

RESOURCES = os.path.join(os.path.dirname(__file__), "..", "resources")

SAMPLE_PY = """def scale(values, factor):
    result = []
    for i in range(0, len(values)):
        result.append(values[i] * factor)
    return result


def count_positive(values):
    count = 0
    for value in values:
        if value > 0 and value != 99:
            count = count + 1
    return count


def clamp(value, low, high):
    if value < low:
        return low
    if value > high:
        return high
    return value


def main():
    data = [3, -1, 4, 0, 5]
    print(scale(data, 2))
    print(count_positive(data))
    for k in range(1, 4):
        print(clamp(k * 2 - 3, 0, 3))


main()
"""

SeedFactory = Callable[..., SeedProgram]


@pytest.fixture
def make_seed() -> SeedFactory:
    def make(
        source_text: str = SAMPLE_PY,
        seed_id: str = "sample",
        language: SubjectLanguage = SubjectLanguage.PY,
        runnable: bool = True,
    ) -> SeedProgram:
        return SeedProgram(
            seed_id=seed_id,
            subject_language=language,
            spec_text="Scale, count and clamp a few integers.",
            source_text=source_text,
            loc=count_loc(source_text),
            token_estimate=estimate_tokens(source_text),
            runnable=runnable,
        )

    return make


@pytest.fixture
def py_seed(make_seed: SeedFactory) -> SeedProgram:
    return make_seed()


@pytest.fixture
def java_seed() -> SeedProgram:
    seeds = load_corpus(
        os.path.join(RESOURCES, "demo_corpus", "java.jsonl"), SubjectLanguage.JAVA
    )
    return next(s for s in seeds if s.seed_id == "java-BubbleSort")
