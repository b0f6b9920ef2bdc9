"""Public package exports for c6proto."""
from .errors import C6Error
from .modules.qstate import Ket, DensityMatrix, SecretState, c6
from .modules.measure import MeasurementBasis, measure
from .modules.tables import PartyAssignment, Layout, ProtocolTable, load_table, validate_table
from .modules.synth import LocalOp, synthesize_correction, complete_basis, infer_assignment
from .modules.protocols import (
    ProtocolTranscript,
    DenseMessage,
    run_protocol,
    teleport,
    qis1,
    qis2,
    rsp,
    dense_encode,
    dense_decode,
    capacity,
    solo_guess_fidelity,
)
from .modules.campaign import FuzzCampaign
from .modules.acceptance import run_acceptance
from .modules.report_generator import ReportGenerator

__all__ = [
    "C6Error",
    "Ket",
    "DensityMatrix",
    "SecretState",
    "c6",
    "MeasurementBasis",
    "measure",
    "PartyAssignment",
    "Layout",
    "ProtocolTable",
    "load_table",
    "validate_table",
    "LocalOp",
    "synthesize_correction",
    "complete_basis",
    "infer_assignment",
    "ProtocolTranscript",
    "DenseMessage",
    "run_protocol",
    "teleport",
    "qis1",
    "qis2",
    "rsp",
    "dense_encode",
    "dense_decode",
    "capacity",
    "solo_guess_fidelity",
    "FuzzCampaign",
    "run_acceptance",
    "ReportGenerator",
]

__version__ = "1.0.0"
