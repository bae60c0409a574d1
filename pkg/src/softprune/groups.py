"""Component-aware pruning groups for a dense encoder/decoder chain.

Each hidden width of the chain is one group of channel slots. Removing channel
``j`` of a group deletes row ``j`` and bias entry ``j`` of the layer producing
it, and column ``j`` of the layer consuming it. Encoder hidden widths and
decoder hidden widths form component-specific groups; the latent width, which
joins the two components, is the single coupling group.
"""

from __future__ import annotations

from dataclasses import dataclass

from .nn import ArchSpec

ENCODER = "encoder"
DECODER = "decoder"
COUPLING = "coupling"

ROW = "row"
COLUMN = "column"
BIAS = "bias"


@dataclass(frozen=True)
class Slice:
    layer: int
    axis: str


@dataclass(frozen=True)
class PruningGroup:
    id: int
    component: str
    channel_count: int
    slices: tuple[Slice, ...]
    size: int

    @property
    def producer(self) -> int:
        """Index of the layer whose outputs are this group's channels."""
        return self.slices[0].layer


@dataclass(frozen=True)
class GroupSet:
    groups: tuple[PruningGroup, ...]
    total_params: int
    arch: ArchSpec

    @property
    def m(self) -> int:
        return len(self.groups)

    def __len__(self):
        return len(self.groups)

    def __iter__(self):
        return iter(self.groups)

    def __getitem__(self, i):
        return self.groups[i]

    @property
    def channel_counts(self) -> tuple[int, ...]:
        return tuple(g.channel_count for g in self.groups)

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(g.size for g in self.groups)

    def table(self) -> list[dict]:
        return [
            {"id": g.id, "component": g.component, "channel_count": g.channel_count, "size": g.size}
            for g in self.groups
        ]


def total_params(arch_or_widths) -> int:
    """Sum over layers of (fan_in + 1) * fan_out."""
    widths = arch_or_widths.widths if isinstance(arch_or_widths, ArchSpec) else arch_or_widths
    return int(sum((widths[k] + 1) * widths[k + 1] for k in range(len(widths) - 1)))


def _group_for_boundary(arch, boundary, gid, component):
    # boundary b is the output side of layer b-1 and the input side of layer b
    widths = arch.widths
    n = widths[boundary]
    producer, consumer = boundary - 1, boundary
    size = n * (widths[boundary - 1] + 1) + n * widths[boundary + 1]
    slices = (Slice(producer, ROW), Slice(producer, BIAS), Slice(consumer, COLUMN))
    return PruningGroup(gid, component, n, slices, size)


def identify_groups(arch: ArchSpec) -> GroupSet:
    """Groups ordered encoder hidden widths, decoder hidden widths, then the latent coupling."""
    n_hidden = len(arch.hidden_dims)
    latent = n_hidden + 1
    enc = range(1, latent)
    dec = range(latent + 1, 2 * latent)
    groups = []
    for b in enc:
        groups.append(_group_for_boundary(arch, b, len(groups) + 1, ENCODER))
    for b in dec:
        groups.append(_group_for_boundary(arch, b, len(groups) + 1, DECODER))
    groups.append(_group_for_boundary(arch, latent, len(groups) + 1, COUPLING))
    return GroupSet(tuple(groups), total_params(arch), arch)


def group_boundaries(groups: GroupSet) -> list[int]:
    """Position of each group's channels in the width chain."""
    return [g.producer + 1 for g in groups]
