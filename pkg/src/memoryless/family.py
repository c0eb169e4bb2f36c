"""
Families of projective measurements sampled by the flooding procedures.
"""
from dataclasses import dataclass
from typing import Callable, Hashable, Optional, Sequence, Tuple

import numpy as np

from hilbert import Projector, ProjectiveMeasurement, RegisterLayout
from utils.errors import IntractableInstanceError, MeasurementError

Sampler = Callable[[np.random.Generator], Tuple[Hashable, ProjectiveMeasurement]]


@dataclass(frozen=True)
class ProjectionFamily:
    """
    Uniform distribution over projective measurements labelled from a set ``Y``.

    A member may omit labels whose projector is zero.

    Either ``members`` lists the family, or ``sampler`` draws ``(key, member)``
    pairs from an implicit family too large to list.
    """

    outcome_labels: Tuple[Hashable, ...]
    members: Optional[Tuple[ProjectiveMeasurement, ...]] = None
    sampler: Optional[Sampler] = None
    name: str = "family"

    def __post_init__(self):
        if (self.members is None) == (self.sampler is None):
            raise MeasurementError("A family is given either by members or by a sampler")
        labels = tuple(self.outcome_labels)
        if not labels or len(set(labels)) != len(labels):
            raise MeasurementError(f"Outcome labels must be distinct and non-empty: {labels}")
        object.__setattr__(self, "outcome_labels", labels)
        if self.members is not None:
            members = tuple(self.members)
            if not members:
                raise MeasurementError("A family needs at least one member")
            layout = members[0].layout
            for member in members:
                if not set(member.labels) <= set(labels):
                    raise MeasurementError(f"Member labels {member.labels} are not in {labels}")
                if member.layout != layout:
                    raise MeasurementError("Family members must share one layout")
            object.__setattr__(self, "members", members)

    @classmethod
    def of(cls, members: Sequence[ProjectiveMeasurement], name: str = "family") -> "ProjectionFamily":
        members = tuple(members)
        return cls(members[0].labels, members=members, name=name)

    @classmethod
    def identity(cls, layout: RegisterLayout) -> "ProjectionFamily":
        """The single trivial measurement ``{I}`` with one outcome."""
        pvm = ProjectiveMeasurement.from_pairs([(0, Projector(layout, np.eye(layout.total_dim)))])
        return cls.of([pvm], name="identity")

    @property
    def N(self) -> int:
        return len(self.outcome_labels)

    @property
    def is_enumerable(self) -> bool:
        return self.members is not None

    def __len__(self) -> int:
        if self.members is None:
            raise IntractableInstanceError(f"Family {self.name!r} is implicit and has no length")
        return len(self.members)

    def sample(self, rng: np.random.Generator) -> Tuple[Hashable, ProjectiveMeasurement]:
        """Draw a uniform member, returning ``(identity key, measurement)``."""
        if self.members is not None:
            index = int(rng.integers(len(self.members)))
            return index, self.members[index]
        return self.sampler(rng)
