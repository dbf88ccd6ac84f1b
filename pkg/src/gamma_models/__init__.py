"""Numerical models for commuting operator tuples over the symmetrized polydisc."""

from .errors import GammaModelsError
from .opcore import OperatorTuple, defect, joint_spectrum, numerical_radius, op_norm, pinv_apply
from .symdomain import membership, sample_boundary, symmetrize

__version__ = "0.1.0"
