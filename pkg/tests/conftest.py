from pathlib import Path

import pytest

from arabmorph.cli import default_lexicon_dir
from arabmorph.disambig import load_freq_table, parse_rules
from arabmorph.evaluation import load_gold
from arabmorph.lexicon import load_lexicon_dir

DATA = Path(__file__).parent / "data"
RULES_PATH = default_lexicon_dir().parent / "rules.txt"


@pytest.fixture(scope="session")
def lexicon():
    return load_lexicon_dir(default_lexicon_dir())


@pytest.fixture(scope="session")
def freq():
    with open(DATA / "freq.tsv", encoding="utf-8") as f:
        return load_freq_table(f)


@pytest.fixture(scope="session")
def rules():
    with open(RULES_PATH, encoding="utf-8") as f:
        return parse_rules(f)


@pytest.fixture(scope="session")
def gold_sentences():
    with open(DATA / "gold.tsv", encoding="utf-8") as f:
        return load_gold(f)


@pytest.fixture(scope="session")
def corpus_text():
    return (DATA / "toy_corpus.txt").read_text(encoding="utf-8")
