"""Independent brute-force references the fast paths are checked against."""

from arabmorph.lexicon import Kind, compatible


def brute_force_analyses(surface, lex, active):
    """Every reading of a surface by direct substring enumeration.

    No length caps and no shared code with the analyzer's segmentation:
    all (i, j) cut points with a non-empty stem are tried, the cross
    product filtered by lexicon membership and compatibility, and
    duplicate (voc, lemma, primary tag) readings collapsed.
    Returns the deduplicated key set.
    """
    seen = set()
    n = len(surface)
    for i in range(0, n):
        for j in range(i + 1, n + 1):
            pre, stem, suf = surface[:i], surface[i:j], surface[j:]
            for a in lex.lookup(pre, Kind.PREFIX, active):
                for b in lex.lookup(stem, Kind.STEM, active):
                    for c in lex.lookup(suf, Kind.SUFFIX, active):
                        if compatible(lex.compat, a.cat, b.cat, c.cat):
                            voc = "+".join(p.voc for p in (a, b, c) if p.voc)
                            seen.add((voc, b.lemma, b.head_tag()))
    return seen


def brute_force_segmentation_count(n, max_pre, max_suf):
    """Number of (pre, stem, suf) splits of an n-character string with a
    non-empty stem, counted by direct enumeration over cut points."""
    count = 0
    for i in range(0, n + 1):
        for j in range(i, n + 1):
            if i <= max_pre and (n - j) <= max_suf and j > i:
                count += 1
    return count
