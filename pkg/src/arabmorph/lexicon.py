"""Lexicons, genre flags, compatibility tables, and the import/review workflow.

Three lexicons (prefixes, stems, suffixes) are keyed by unvocalized
Buckwalter surface.  Every entry carries a bitmask of genre/variety flags;
analysis-time filtering keeps an entry when its mask intersects the active
set.  Three pairwise tables license prefix-stem, stem-suffix and
prefix-suffix category combinations.
"""

from __future__ import annotations

import enum
import logging
import re
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import IO, Iterable, Iterator

from .translit import arabic_to_buck, normalize, strip_diacritics

log = logging.getLogger(__name__)


class LexiconError(ValueError):
    """Malformed lexicon, rule or review input."""


class Flag(enum.IntFlag):
    """Genre/variety usage markers, one bit each."""

    CA = enum.auto()          # Classical Arabic
    MSA = enum.auto()         # Modern Standard Arabic
    ICA = enum.auto()         # Informal Colloquial Arabic
    SPEC_MED = enum.auto()    # medical sublanguage
    SPEC_ALCH = enum.auto()   # alchemic sublanguage
    SPEC_GRAM = enum.auto()   # grammatical sublanguage
    NE = enum.auto()          # named entities
    FNE = enum.auto()         # foreign named entities
    CAP = enum.auto()         # colloquial aspectual preverbs


ALL_FLAGS = Flag.CA | Flag.MSA | Flag.ICA | Flag.SPEC_MED | Flag.SPEC_ALCH \
    | Flag.SPEC_GRAM | Flag.NE | Flag.FNE | Flag.CAP
NO_FLAGS = Flag(0)

# Historical spelling of the flag names carries this prefix; accept both.
_FLAG_PREFIX = "XRAM_"


def parse_flagset(names: Iterable[str]) -> Flag:
    """Union of the named flag bits; names are case-insensitive."""
    mask = NO_FLAGS
    for raw in names:
        key = raw.strip().upper()
        if key.startswith(_FLAG_PREFIX):
            key = key[len(_FLAG_PREFIX):]
        try:
            mask |= Flag[key]
        except KeyError:
            valid = ", ".join(f.name for f in Flag)
            raise LexiconError(
                f"unknown flag {raw!r}; valid flags: {valid}"
            ) from None
    return mask


def classical_preset() -> Flag:
    """Active set for classical texts: modern, colloquial, medical and
    foreign-name material is deselected."""
    return ALL_FLAGS & ~(Flag.MSA | Flag.ICA | Flag.SPEC_MED | Flag.FNE | Flag.CAP)


def flag_names(mask: Flag) -> list[str]:
    return [f.name for f in Flag if f & mask]


class Kind(enum.Enum):
    PREFIX = "prefix"
    STEM = "stem"
    SUFFIX = "suffix"


# Closed primary-tag inventory; morphotactic subtypes fold onto it by
# longest-prefix match (Ndu -> N), verb stem categories map explicitly.
PRIMARY_TAGS = ("PREP", "PRON", "CONJ", "PART", "DET", "NUM", "ADV", "NE",
                "N", "V", "A")
_CAT_TO_TAG = {"PV": "V", "IV": "V", "CV": "V"}


def fold_tag(tag: str) -> str:
    """Fold a category/tag label onto the closed primary-tag set."""
    if tag in _CAT_TO_TAG:
        return _CAT_TO_TAG[tag]
    if tag in PRIMARY_TAGS:
        return tag
    for t in PRIMARY_TAGS:
        if tag.startswith(t):
            return t
    return tag


_LEMMA_RE = re.compile(r"^.+_[1-9][0-9]*$")
_POS_FIELD_RE = re.compile(r"<pos>(.*?)</pos>\s*$")


@dataclass(frozen=True)
class LexEntry:
    kind: Kind
    surface: str          # unvocalized Buckwalter key; "" for null affixes
    voc: str              # vocalized Buckwalter form
    cat: str              # morphotactic category, e.g. "Pref-Al", "N"
    gloss: str
    pos: str              # POS annotation, e.g. "Al/DET" or "kitAb/N+..."
    lemma: str            # "base_N" identifier; "" for most affixes
    flags: Flag

    def tag_units(self) -> list[str]:
        """Tag components of the POS annotation: "wa/CONJ+Al/DET" -> [CONJ, DET]."""
        if not self.pos:
            return []
        return [unit.rsplit("/", 1)[-1] for unit in self.pos.split("+") if unit]

    def head_tag(self) -> str:
        """Primary tag: first annotation unit folded to the closed set."""
        units = self.tag_units()
        return fold_tag(units[0]) if units else ""


def _dedup_key(e: LexEntry) -> tuple:
    return (e.kind, e.surface, e.voc, e.cat, e.lemma)


def _default_pos(voc: str, cat: str) -> str:
    return f"{voc}/{cat}" if voc else ""


def parse_entry_line(line: str, kind: Kind, lineno: int = 0,
                     filename: str = "<lexicon>") -> LexEntry:
    """Parse one TSV lexicon row.

    Columns: surface, voc, cat, gloss (optionally with a trailing
    ``<pos>...</pos>`` annotation), lemma, and a pipe-separated flag list.
    A literal ``0`` denotes the empty surface/voc of a null affix; trailing
    columns may be omitted, and an entry without flags belongs to every
    variety.
    """
    where = f"{filename}:{lineno}"
    fields = line.split("\t")
    if not 3 <= len(fields) <= 6:
        raise LexiconError(f"{where}: expected 3 to 6 tab-separated fields, "
                           f"got {len(fields)}")
    fields += [""] * (6 - len(fields))
    surface, voc, cat, glosspos, lemma = (f.strip() for f in fields[:5])
    surface = "" if surface == "0" else surface
    voc = "" if voc == "0" else voc
    if not cat:
        raise LexiconError(f"{where}: empty category")
    if kind is Kind.STEM and not surface:
        raise LexiconError(f"{where}: stem entries require a non-empty surface")
    if strip_diacritics(voc) != surface:
        raise LexiconError(
            f"{where}: vocalized form {voc!r} does not reduce to surface "
            f"{surface!r} when diacritics are stripped")
    if lemma and not _LEMMA_RE.match(lemma):
        raise LexiconError(f"{where}: lemma {lemma!r} is not of the form base_N")
    m = _POS_FIELD_RE.search(glosspos)
    if m:
        pos = m.group(1).strip()
        gloss = glosspos[:m.start()].strip()
    else:
        gloss = glosspos
        pos = _default_pos(voc, cat)
    if fields[5].strip():
        flags = parse_flagset(fields[5].strip().split("|"))
    else:
        flags = ALL_FLAGS
    return LexEntry(kind=kind, surface=surface, voc=voc, cat=cat,
                    gloss=gloss, pos=pos, lemma=lemma, flags=flags)


def format_entry_line(e: LexEntry) -> str:
    glosspos = e.gloss
    if e.pos != _default_pos(e.voc, e.cat):
        glosspos = f"{e.gloss} <pos>{e.pos}</pos>" if e.gloss else f"<pos>{e.pos}</pos>"
    return "\t".join([
        e.surface or "0",
        e.voc or "0",
        e.cat,
        glosspos,
        e.lemma,
        "|".join(flag_names(e.flags)),
    ])


@dataclass(frozen=True)
class CompatTables:
    """Licensed category pairs: prefix-stem (ab), stem-suffix (bc),
    prefix-suffix (ac)."""

    ab: frozenset[tuple[str, str]]
    bc: frozenset[tuple[str, str]]
    ac: frozenset[tuple[str, str]]

    def categories(self) -> set[str]:
        cats = set()
        for pair_set in (self.ab, self.bc, self.ac):
            for a, b in pair_set:
                cats.add(a)
                cats.add(b)
        return cats


def compatible(tables: CompatTables, pcat: str, scat: str, sucat: str) -> bool:
    """True iff all three pairwise combinations are licensed."""
    return ((pcat, scat) in tables.ab
            and (scat, sucat) in tables.bc
            and (pcat, sucat) in tables.ac)


def _parse_pairs(stream: IO[str] | Iterable[str],
                 filename: str = "<compat>") -> frozenset[tuple[str, str]]:
    pairs = set()
    for lineno, line in enumerate(stream, 1):
        line = line.rstrip("\n")
        if not line.strip() or line.startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) != 2 or not fields[0].strip() or not fields[1].strip():
            raise LexiconError(f"{filename}:{lineno}: expected catA<TAB>catB")
        pairs.add((fields[0].strip(), fields[1].strip()))
    return frozenset(pairs)


class Lexicon:
    """The three surface-keyed entry tables plus their compatibility tables.

    Immutable by convention after load: merge operations return a new
    Lexicon rather than mutating in place.
    """

    def __init__(self, compat: CompatTables):
        self.prefixes: dict[str, list[LexEntry]] = {}
        self.stems: dict[str, list[LexEntry]] = {}
        self.suffixes: dict[str, list[LexEntry]] = {}
        self.compat = compat
        self._by_key: dict[tuple, LexEntry] = {}
        self._folded: dict[Kind, dict[str, list[LexEntry]]] | None = None

    def table(self, kind: Kind) -> dict[str, list[LexEntry]]:
        return {Kind.PREFIX: self.prefixes, Kind.STEM: self.stems,
                Kind.SUFFIX: self.suffixes}[kind]

    def entries(self) -> Iterator[LexEntry]:
        for table in (self.prefixes, self.stems, self.suffixes):
            for bucket in table.values():
                yield from bucket

    def __len__(self) -> int:
        return sum(1 for _ in self.entries())

    def add(self, entry: LexEntry) -> bool:
        """Insert an entry, collapsing duplicates by flag union.

        Returns True when a new row was created, False when an existing
        row absorbed the entry's flags.
        """
        key = _dedup_key(entry)
        existing = self._by_key.get(key)
        if existing is not None:
            if existing.flags | entry.flags != existing.flags:
                merged = replace(existing, flags=existing.flags | entry.flags)
                bucket = self.table(entry.kind)[entry.surface]
                bucket[bucket.index(existing)] = merged
                self._by_key[key] = merged
            self._folded = None
            return False
        self.table(entry.kind).setdefault(entry.surface, []).append(entry)
        self._by_key[key] = entry
        self._folded = None
        return True

    def lookup(self, surface: str, kind: Kind, active: Flag,
               fold_alif: bool = False) -> list[LexEntry]:
        """Entries whose surface matches exactly and whose flag mask
        intersects the active set; load order preserved."""
        if fold_alif:
            bucket = self._folded_table(kind).get(normalize(surface, fold_alif=True), [])
        else:
            bucket = self.table(kind).get(surface, [])
        return [e for e in bucket if e.flags & active]

    def _folded_table(self, kind: Kind) -> dict[str, list[LexEntry]]:
        if self._folded is None:
            self._folded = {}
            for k in Kind:
                folded: dict[str, list[LexEntry]] = {}
                for bucket in self.table(k).values():
                    for e in bucket:
                        folded.setdefault(normalize(e.surface, fold_alif=True),
                                          []).append(e)
                self._folded[k] = folded
        return self._folded[kind]

    def known_lemma_pos(self) -> set[tuple[str, str]]:
        """(lemma, primary tag) pairs of every stem entry."""
        return {(e.lemma, e.head_tag())
                for bucket in self.stems.values() for e in bucket if e.lemma}

    def copy(self) -> "Lexicon":
        clone = Lexicon(self.compat)
        for e in self.entries():
            clone.add(e)
        return clone


def _load_entry_file(lex: Lexicon, stream: IO[str] | Iterable[str], kind: Kind,
                     filename: str) -> int:
    count = 0
    for lineno, line in enumerate(stream, 1):
        line = line.rstrip("\n")
        if not line.strip() or line.startswith("#"):
            continue
        lex.add(parse_entry_line(line, kind, lineno, filename))
        count += 1
    return count


def load_lexicon(prefix_stream, stem_stream, suffix_stream,
                 compat_streams: tuple, filenames: tuple | None = None) -> Lexicon:
    """Build a Lexicon from the three entry streams and the (ab, bc, ac)
    compatibility streams."""
    names = filenames or ("prefixes", "stems", "suffixes",
                          "compat_ab", "compat_bc", "compat_ac")
    compat = CompatTables(
        ab=_parse_pairs(compat_streams[0], names[3]),
        bc=_parse_pairs(compat_streams[1], names[4]),
        ac=_parse_pairs(compat_streams[2], names[5]),
    )
    lex = Lexicon(compat)
    _load_entry_file(lex, prefix_stream, Kind.PREFIX, names[0])
    n_stems = _load_entry_file(lex, stem_stream, Kind.STEM, names[1])
    _load_entry_file(lex, suffix_stream, Kind.SUFFIX, names[2])
    if n_stems == 0:
        raise LexiconError(f"{names[1]}: stem file contains no entries")
    _warn_unanchored_categories(lex)
    return lex


def _warn_unanchored_categories(lex: Lexicon) -> None:
    used = {e.cat for e in lex.entries()}
    for cat in sorted(lex.compat.categories() - used):
        log.warning("compatibility tables name category %r, which no loaded "
                    "entry carries", cat)


LEXICON_FILES = ("prefixes.tsv", "stems.tsv", "suffixes.tsv",
                 "compat_ab.tsv", "compat_bc.tsv", "compat_ac.tsv")


def load_lexicon_dir(path) -> Lexicon:
    path = Path(path)
    streams = []
    try:
        for name in LEXICON_FILES:
            streams.append((path / name).open(encoding="utf-8"))
        return load_lexicon(streams[0], streams[1], streams[2],
                            (streams[3], streams[4], streams[5]),
                            filenames=tuple(str(path / n) for n in LEXICON_FILES))
    finally:
        for s in streams:
            s.close()


def serialize_lexicon(lex: Lexicon) -> dict[str, str]:
    """Render the lexicon back to its six-file TSV form (file name -> text)."""
    out = {}
    for name, kind in zip(LEXICON_FILES[:3], (Kind.PREFIX, Kind.STEM, Kind.SUFFIX)):
        lines = [format_entry_line(e)
                 for bucket in lex.table(kind).values() for e in bucket]
        out[name] = "".join(line + "\n" for line in lines)
    for name, pairs in zip(LEXICON_FILES[3:],
                           (lex.compat.ab, lex.compat.bc, lex.compat.ac)):
        out[name] = "".join(f"{a}\t{b}\n" for a, b in sorted(pairs))
    return out


# ---------------------------------------------------------------------------
# Semi-automatic lexicon increments: import candidates, review, merge.

class Status(enum.Enum):
    PENDING = "P"
    ACCEPTED = "A"
    REJECTED = "R"


@dataclass
class Candidate:
    entry: LexEntry
    status: Status = Status.PENDING


@dataclass
class ReviewBatch:
    candidates: list[Candidate] = field(default_factory=list)
    source: str = ""
    kind: Kind = Kind.STEM
    skipped: int = 0      # import records dropped for missing data


def _localname(tag: str) -> str:
    return tag.rsplit("}", 1)[-1]


def _element_text(elem) -> str:
    return "".join(elem.itertext()).strip()


def import_tei_dictionary(stream, assign: Flag, lex: Lexicon | None = None,
                          source: str = "tei-dictionary") -> ReviewBatch:
    """Extract stem candidates from a TEI-encoded dictionary.

    One Pending candidate per entry headword, glossed from the first sense;
    the category is a placeholder pending human review.  Candidates whose
    surface and lemma already exist in ``lex`` are auto-Rejected.
    """
    if not assign:
        raise LexiconError("import requires a non-empty flag set")
    try:
        tree = ET.parse(stream)
    except ET.ParseError as exc:
        raise LexiconError(f"{source}: not well-formed XML at "
                           f"line {exc.position[0]}, column {exc.position[1]}") from exc
    batch = ReviewBatch(source=source, kind=Kind.STEM)
    for elem in tree.getroot().iter():
        if _localname(elem.tag) != "entry":
            continue
        orth = next((c for c in elem.iter() if _localname(c.tag) == "orth"), None)
        headword = _element_text(orth) if orth is not None else ""
        if not headword:
            batch.skipped += 1
            continue
        sense = next((c for c in elem.iter()
                      if _localname(c.tag) in ("sense", "def")), None)
        gloss = _element_text(sense) if sense is not None else ""
        voc = normalize(arabic_to_buck(headword))
        surface = strip_diacritics(voc)
        lemma = f"{voc}_1"
        entry = LexEntry(kind=Kind.STEM, surface=surface, voc=voc, cat="N",
                         gloss=gloss, pos=f"{voc}/N", lemma=lemma, flags=assign)
        status = Status.PENDING
        if lex is not None and any(e.lemma == lemma
                                   for e in lex.stems.get(surface, [])):
            status = Status.REJECTED
        batch.candidates.append(Candidate(entry, status))
    if batch.skipped:
        log.warning("%s: skipped %d entries without a headword",
                    source, batch.skipped)
    return batch


def import_wordlist(stream, kind: Kind, assign: Flag,
                    source: str = "wordlist") -> ReviewBatch:
    """Candidates from a hand-maintained wordlist: surface, gloss, tag."""
    if not assign:
        raise LexiconError("import requires a non-empty flag set")
    batch = ReviewBatch(source=source, kind=kind)
    for lineno, line in enumerate(stream, 1):
        line = line.rstrip("\n")
        if not line.strip() or line.startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) != 3 or not fields[0].strip() or not fields[2].strip():
            raise LexiconError(f"{source}:{lineno}: expected "
                               "surface<TAB>gloss<TAB>pos")
        word, gloss, tag = (f.strip() for f in fields)
        voc = normalize(arabic_to_buck(word))
        surface = strip_diacritics(voc)
        lemma = f"{voc}_1" if kind is Kind.STEM else ""
        entry = LexEntry(kind=kind, surface=surface, voc=voc, cat=tag,
                         gloss=gloss, pos=f"{voc}/{tag}", lemma=lemma,
                         flags=assign)
        batch.candidates.append(Candidate(entry))
    return batch


def _can_surface(lex: Lexicon, entry: LexEntry) -> bool:
    ab, bc, ac = lex.compat.ab, lex.compat.bc, lex.compat.ac
    c = entry.cat
    if entry.kind is Kind.STEM:
        return any((p, c) in ab and (c, u) in bc and (p, u) in ac
                   for p, _ in ab for _, u in bc)
    if entry.kind is Kind.PREFIX:
        return any((c, s) in ab and (s, u) in bc and (c, u) in ac
                   for _, s in ab for _, u in bc)
    return any((p, s) in ab and (s, c) in bc and (p, c) in ac
               for p, s in ab)


def merge_reviewed(lex: Lexicon, batch: ReviewBatch) -> Lexicon:
    """New lexicon with the batch's Accepted candidates inserted.

    Re-merging the same batch is a no-op (duplicate rows collapse by flag
    union).  Pending candidates are an error: review must be finished.
    """
    pending = [c.entry.surface or "0" for c in batch.candidates
               if c.status is Status.PENDING]
    if pending:
        raise LexiconError("batch still has Pending candidates: "
                           + ", ".join(pending))
    merged = lex.copy()
    for cand in batch.candidates:
        if cand.status is not Status.ACCEPTED:
            continue
        merged.add(cand.entry)
        if not _can_surface(merged, cand.entry):
            log.warning("entry %s/%s has category %r with no compatible "
                        "combination; it can never appear in an analysis",
                        cand.entry.surface or "0", cand.entry.lemma or "-",
                        cand.entry.cat)
    return merged


def save_review(batch: ReviewBatch, stream: IO[str]) -> None:
    stream.write("# review file: set the first column to A(ccept) or "
                 "R(eject); P rows block merging\n")
    stream.write(f"#! kind={batch.kind.value}\tsource={batch.source}\n")
    for cand in batch.candidates:
        stream.write(f"{cand.status.value}\t{format_entry_line(cand.entry)}\n")


def load_review(stream, filename: str = "<review>") -> ReviewBatch:
    batch = ReviewBatch()
    for lineno, line in enumerate(stream, 1):
        line = line.rstrip("\n")
        if line.startswith("#!"):
            for part in line[2:].strip().split("\t"):
                key, _, value = part.partition("=")
                if key == "kind":
                    batch.kind = Kind(value)
                elif key == "source":
                    batch.source = value
            continue
        if not line.strip() or line.startswith("#"):
            continue
        status_field, _, rest = line.partition("\t")
        try:
            status = Status(status_field.strip())
        except ValueError:
            raise LexiconError(f"{filename}:{lineno}: bad status "
                               f"{status_field!r}, expected P, A or R") from None
        entry = parse_entry_line(rest, batch.kind, lineno, filename)
        batch.candidates.append(Candidate(entry, status))
    return batch
