"""Genre-aware Arabic morphological analysis and TEI annotation toolkit.

The pipeline: tokenize Arabic text, enumerate prefix/stem/suffix readings
against flag-filtered lexicons, prune readings with contextual drop rules,
rank the survivors with a trigram language model blended with unigram
frequencies, and emit the result as TEI-style XML that a reviewer can
correct by hand.
"""

__version__ = "0.1.0"
