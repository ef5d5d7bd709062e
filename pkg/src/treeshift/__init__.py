"""Weighted shifts on rooted directed trees: class checks, backward
extensions and joint extensions over rooted sums, in exact arithmetic.
"""

from .altseq import AtomicMeasure, CASeq, ca_extend, extension_condition, is_ca_prefix
from .classify import check_che, check_class, check_power_hyponormal, h_value
from .extend import (
    ExtensionCertificate,
    JointSpec,
    che_joint,
    che_kstep,
    che_witness_finder,
    extend,
    glue_demo,
    joint_extend_at_depth,
    powhyp_joint,
    powhyp_kstep,
)
from .oracle import run_oracle
from .serialize import load_model, model_from_json, model_to_json
from .shiftmodel import (
    AlternatingTail,
    MomentTail,
    ShiftModel,
    StructuralError,
    TailPos,
    backward_extend_model,
    ray_model,
    rooted_sum_model,
)
from .tree import DirectedTree, TreeError, backward_extend_tree, rooted_sum
from .verdict import FAILS, HOLDS, INCONCLUSIVE, ClassVerdict, Witness

__version__ = "0.1.0"
