"""Two-phase structural graph encoding.

Phase one removes vertices one at a time from an ordered partition of the
remaining vertices and records, per block, how many of the removed vertex's
neighbors it holds: a fixed-width count in B1 for blocks of two or more
vertices, a single adjacency bit in B2 for singletons. Blocks are then split
into neighbors and non-neighbors. Phase two arithmetic-codes B1 and B2 with
independent adaptive models; their coded lengths sum to L(G).
"""

from dataclasses import dataclass
from typing import List, Tuple

from loguru import logger

from ..graph.core import Graph
from ..utils.errors import DecodeError
from .arithmetic import ArithmeticCode, arith_decode, arith_encode


@dataclass(frozen=True)
class EncodedGraph:
    """SZIP streams of one graph plus their arithmetic-coded payloads."""

    n: int
    b1: Tuple[int, ...]
    b2: Tuple[int, ...]
    coded_b1: ArithmeticCode
    coded_b2: ArithmeticCode

    @property
    def length_bits(self) -> int:
        """L(G); the header (n, stream lengths) is not counted."""
        return self.coded_b1.length_bits + self.coded_b2.length_bits

    def summary(self) -> dict:
        return {
            "n": self.n,
            "b1_bits": len(self.b1),
            "b2_bits": len(self.b2),
            "L_bits": self.length_bits,
        }


def _count_width(block_size: int) -> int:
    # ceil(log2(|U| + 1))
    return block_size.bit_length()


def _append_count(stream: List[int], count: int, width: int) -> None:
    for shift in range(width - 1, -1, -1):
        stream.append((count >> shift) & 1)


def szip_streams(g: Graph) -> Tuple[List[int], List[int]]:
    """Run the partition process and return the raw (B1, B2) bit lists.

    Weights are ignored: an edge is present iff its weight is positive.
    """
    neighbor_sets = g.neighbor_sets
    b1: List[int] = []
    b2: List[int] = []
    blocks: List[List[int]] = [list(range(g.n))] if g.n else []

    while blocks:
        v = blocks[0].pop(0)
        if not blocks[0]:
            blocks.pop(0)
        nbrs = neighbor_sets[v]
        refined: List[List[int]] = []
        for block in blocks:
            inside = [x for x in block if x in nbrs]
            count = len(inside)
            if len(block) > 1:
                _append_count(b1, count, _count_width(len(block)))
            else:
                b2.append(count)
            if count == 0:
                refined.append(block)
            elif count == len(block):
                refined.append(inside)
            else:
                refined.append(inside)
                refined.append([x for x in block if x not in nbrs])
        blocks = refined

    return b1, b2


def szip_encode(g: Graph) -> EncodedGraph:
    """Encode ``g`` (binarized) into SZIP streams and code them."""
    b1, b2 = szip_streams(g)
    encoded = EncodedGraph(
        n=g.n,
        b1=tuple(b1),
        b2=tuple(b2),
        coded_b1=arith_encode(b1),
        coded_b2=arith_encode(b2),
    )
    logger.debug(
        f"SZIP n={g.n}: |B1|={len(b1)} -> {encoded.coded_b1.length_bits}, "
        f"|B2|={len(b2)} -> {encoded.coded_b2.length_bits}"
    )
    return encoded


class _BitReader:
    def __init__(self, bits: List[int], name: str):
        self.bits = bits
        self.name = name
        self.position = 0

    def read(self, width: int) -> int:
        if self.position + width > len(self.bits):
            raise DecodeError(f"stream {self.name} ended early at bit {self.position}")
        value = 0
        for bit in self.bits[self.position:self.position + width]:
            value = (value << 1) | bit
        self.position += width
        return value

    def exhausted(self) -> bool:
        return self.position == len(self.bits)


def szip_decode(e: EncodedGraph) -> Graph:
    """Rebuild a graph isomorphic to the encoded one.

    The partition process is replayed with fresh ids: within a block the
    decoder treats the first ``count`` members as the neighbors, which is
    consistent because members of a block are indistinguishable so far.

    Raises:
        DecodeError: On truncated, overlong or inconsistent streams
    """
    b1 = _BitReader(arith_decode(e.coded_b1), "B1")
    b2 = _BitReader(arith_decode(e.coded_b2), "B2")
    edges: List[Tuple[int, int]] = []
    blocks: List[List[int]] = [list(range(e.n))] if e.n else []

    while blocks:
        v = blocks[0].pop(0)
        if not blocks[0]:
            blocks.pop(0)
        refined: List[List[int]] = []
        for block in blocks:
            if len(block) > 1:
                count = b1.read(_count_width(len(block)))
            else:
                count = b2.read(1)
            if count > len(block):
                raise DecodeError(f"count {count} exceeds block size {len(block)}")
            edges.extend((v, x) for x in block[:count])
            if count:
                refined.append(block[:count])
            if count < len(block):
                refined.append(block[count:])
        blocks = refined

    if not (b1.exhausted() and b2.exhausted()):
        raise DecodeError("streams hold bits beyond the encoded graph")
    return Graph(e.n, edges)


def compression_entropy(g: Graph) -> int:
    """L(G): summed arithmetic-coded length of B1 and B2, in bits."""
    return szip_encode(g.binarize()).length_bits
