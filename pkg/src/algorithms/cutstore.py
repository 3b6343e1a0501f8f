"""
Compressed cut catalogue.

Cuts are stored as (id, weight, pointer) records. The id is a random
additive hash of the shore containing vertex 1; the pointer regenerates the
full shore on demand through a CutResolver. Records are kept sorted by id
with duplicates removed, and prefix sums of p^weight support weighted
selection by binary search.
"""

import bisect
import logging
import math
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import (
    BinaryIO,
    Dict,
    FrozenSet,
    Iterable,
    List,
    Optional,
    Protocol,
    Sequence,
    Tuple,
    Union,
)

import numpy as np

from src.algorithms.multigraph import MultiGraph, canonical_shore, make_cut
from src.errors import (
    InfeasibleParameterError,
    InvariantViolation,
    ReconstructionError,
)
from src.models import Cut, CutPointer, CutRecord
from src.rng import Stream, derive_rng

logger = logging.getLogger(__name__)

MIN_HASH_BITS = 32
MAX_HASH_BITS = 64

FORMAT_MAGIC = b"RELCUTA\x00"
FORMAT_VERSION = 1
_HEADER = struct.Struct(">8sHIHddQ")
_RECORD = struct.Struct(">QQ")
_POINTER = struct.Struct(">BdI")
_SCHEME_CODES = {"explicit": 0, "rca": 1, "rca2": 2}
_SCHEME_NAMES = {code: name for name, code in _SCHEME_CODES.items()}


def hash_width(capacity: int, phi: float = 3.0) -> int:
    """Identifier width b for a collection expected to hold ``capacity`` cuts."""
    n_cap = max(2, int(capacity))
    return min(MAX_HASH_BITS, max(MIN_HASH_BITS, math.ceil(phi * math.log2(n_cap))))


@dataclass(frozen=True)
class HashTable:
    """Random b-bit value per original vertex; vertex v uses ``values[v - 1]``."""

    b: int
    values: Tuple[int, ...]
    phi: float = 3.0

    def __post_init__(self) -> None:
        if not 1 <= self.b <= MAX_HASH_BITS:
            raise InfeasibleParameterError(f"hash width must lie in [1, 64], got {self.b}")
        if any(not 0 <= v < (1 << self.b) for v in self.values):
            raise InfeasibleParameterError("hash values must be b-bit integers")

    @classmethod
    def create(cls, n: int, capacity: int, seed: int, phi: float = 3.0) -> "HashTable":
        """Draws a fresh table for n original vertices."""
        b = hash_width(capacity, phi)
        rng = derive_rng(seed, Stream.HASH)
        draws = rng.integers(0, (1 << b) - 1, size=n, dtype=np.uint64, endpoint=True)
        return cls(b=b, values=tuple(int(v) for v in draws), phi=phi)

    @property
    def n(self) -> int:
        """Number of original vertices the table covers."""
        return len(self.values)


def cut_id(table: HashTable, shore: Iterable[int]) -> int:
    """Hash id of a cut: sum of vertex values over the side holding vertex 1, mod 2^b."""
    canonical = canonical_shore(shore, table.n)
    return sum(table.values[v - 1] for v in canonical) % (1 << table.b)


class CutResolver(Protocol):
    """Regenerates the shore a pointer refers to."""

    def shore(self, pointer: CutPointer, graph: MultiGraph) -> FrozenSet[int]:
        """Returns the canonical shore of the pointed-to cut."""


class ExplicitResolver:
    """Resolves ``explicit`` pointers against a fixed list of shores."""

    def __init__(self, shores: Sequence[FrozenSet[int]]) -> None:
        self.shores = list(shores)

    def shore(self, pointer: CutPointer, graph: MultiGraph) -> FrozenSet[int]:
        """Looks the shore up by the pointer's run index."""
        if pointer.scheme != "explicit" or not 0 <= pointer.run < len(self.shores):
            raise ReconstructionError(f"pointer {pointer} is not an explicit shore index")
        return canonical_shore(self.shores[pointer.run], graph.orig_n)


@dataclass
class CutCollection:
    """Sorted, deduplicated cut records with their selection weights."""

    table: HashTable
    p: float
    records: List[CutRecord]
    prefix: np.ndarray
    sum_pw: float
    resolver: Optional[CutResolver] = None
    ids: List[int] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.records)

    def find(self, ident: int) -> Optional[int]:
        """Index of the record with this id, if any."""
        index = bisect.bisect_left(self.ids, ident)
        if index < len(self.ids) and self.ids[index] == ident:
            return index
        return None

    def weights(self) -> List[int]:
        """Record weights in id order."""
        return [r.weight for r in self.records]

    def weight_histogram(self) -> Dict[int, int]:
        """Number of stored cuts per weight."""
        histogram: Dict[int, int] = {}
        for record in self.records:
            histogram[record.weight] = histogram.get(record.weight, 0) + 1
        return dict(sorted(histogram.items()))


def build_collection(
    records: Iterable[CutRecord],
    table: HashTable,
    p: float,
    resolver: Optional[CutResolver] = None,
) -> CutCollection:
    """
    Sorts records by id and keeps the first record of every id.

    Records sharing an id but disagreeing on weight reveal a hash collision;
    the later record is dropped with a warning.
    """
    if not 0 < p < 1:
        raise InfeasibleParameterError(f"p must lie in (0, 1), got {p}")
    ordered = sorted(records, key=lambda r: r.id)
    unique: List[CutRecord] = []
    for record in ordered:
        if unique and unique[-1].id == record.id:
            if unique[-1].weight != record.weight:
                logger.warning(
                    "Hash collision on id %d (weights %d and %d); keeping the first",
                    record.id,
                    unique[-1].weight,
                    record.weight,
                )
            continue
        unique.append(record)

    if len(unique) > (1 << max(table.n - 1, 0)):
        raise InvariantViolation(f"{len(unique)} distinct cuts exceed 2^(n-1) for n={table.n}")

    if unique:
        prefix = np.cumsum(np.power(p, np.array([r.weight for r in unique], dtype=float)))
        sum_pw = float(prefix[-1])
    else:
        prefix = np.zeros(0, dtype=float)
        sum_pw = 0.0
    return CutCollection(
        table=table,
        p=p,
        records=unique,
        prefix=prefix,
        sum_pw=sum_pw,
        resolver=resolver,
        ids=[r.id for r in unique],
    )


def collection_from_cuts(
    graph: MultiGraph,
    cuts: Iterable[Union[Cut, Iterable[int]]],
    table: HashTable,
    p: float,
) -> CutCollection:
    """Builds a collection over an explicit list of cuts or shores."""
    shores: List[FrozenSet[int]] = []
    records: List[CutRecord] = []
    for index, item in enumerate(cuts):
        cut = item if isinstance(item, Cut) else make_cut(graph, item)
        shores.append(cut.shore)
        pointer = CutPointer(seed=0, run=index, path=(), scheme="explicit", alpha=1.0)
        records.append(CutRecord(id=cut_id(table, cut.shore), weight=cut.weight, pointer=pointer))
    return build_collection(records, table, p, resolver=ExplicitResolver(shores))


def contains(
    collection: CutCollection, query: Union[Cut, Iterable[int]], graph: MultiGraph
) -> bool:
    """
    Exact membership test.

    Looks the id up by binary search, then regenerates the stored cut and
    compares shores, so a hash hit with a different shore is rejected.
    """
    shore = query.shore if isinstance(query, Cut) else canonical_shore(query, graph.orig_n)
    index = collection.find(cut_id(collection.table, shore))
    if index is None:
        return False
    if collection.resolver is None:
        raise InvariantViolation("collection has no resolver for exact comparison")
    stored = collection.resolver.shore(collection.records[index].pointer, graph)
    return stored == shore


def _pack_pointer(pointer: CutPointer) -> bytes:
    if any(not 0 <= step < 256 for step in pointer.path):
        raise InfeasibleParameterError("tree path indices must fit in one byte")
    head = _POINTER.pack(_SCHEME_CODES[pointer.scheme], pointer.alpha, pointer.run)
    return head + bytes(pointer.path)


def _unpack_pointer(blob: bytes, seed: int) -> CutPointer:
    code, alpha, run = _POINTER.unpack_from(blob)
    path = tuple(blob[_POINTER.size :])
    return CutPointer(seed=seed, run=run, path=path, scheme=_SCHEME_NAMES[code], alpha=alpha)


def write_collection(collection: CutCollection, stream: BinaryIO) -> None:
    """Writes the versioned binary format described in docs/FORMATS.md."""
    table = collection.table
    stream.write(
        _HEADER.pack(
            FORMAT_MAGIC,
            FORMAT_VERSION,
            table.n,
            table.b,
            table.phi,
            collection.p,
            len(collection),
        )
    )
    stream.write(struct.pack(f">{table.n}Q", *table.values))
    for record in collection.records:
        path_blob = _pack_pointer(record.pointer)
        stream.write(_RECORD.pack(record.id, record.weight))
        stream.write(struct.pack(">H", len(path_blob)) + path_blob)
        stream.write(int(record.pointer.seed).to_bytes(16, "big"))


def read_collection(stream: BinaryIO, resolver: Optional[CutResolver] = None) -> CutCollection:
    """Reads a collection written by ``write_collection``."""

    def take(size: int) -> bytes:
        chunk = stream.read(size)
        if len(chunk) != size:
            raise InfeasibleParameterError("truncated cut collection file")
        return chunk

    magic, version, n, b, phi, p, count = _HEADER.unpack(take(_HEADER.size))
    if magic != FORMAT_MAGIC or version != FORMAT_VERSION:
        raise InfeasibleParameterError("not a cut collection file of a supported version")
    values = struct.unpack(f">{n}Q", take(8 * n))
    table = HashTable(b=b, values=tuple(values), phi=phi)
    records = []
    for _ in range(count):
        ident, weight = _RECORD.unpack(take(_RECORD.size))
        (length,) = struct.unpack(">H", take(2))
        blob = take(length)
        seed = int.from_bytes(take(16), "big")
        records.append(CutRecord(id=ident, weight=weight, pointer=_unpack_pointer(blob, seed)))
    return build_collection(records, table, p, resolver=resolver)


def save_collection(collection: CutCollection, path: Union[str, Path]) -> None:
    """Writes a collection to a file."""
    with open(path, "wb") as f:
        write_collection(collection, f)


def load_collection(
    path: Union[str, Path], resolver: Optional[CutResolver] = None
) -> CutCollection:
    """Reads a collection from a file."""
    with open(path, "rb") as f:
        return read_collection(f, resolver)
