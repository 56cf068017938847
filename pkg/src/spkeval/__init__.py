"""Speaker verification and diarization scoring toolkit.

The library splits into small layers: interval algebra
(:mod:`spkeval.timeline`), file formats (:mod:`spkeval.trials`,
:mod:`spkeval.rttm`), verification metrics (:mod:`spkeval.verification`),
diarization metrics (:mod:`spkeval.diarization`), uncertainty and slice
analyses (:mod:`spkeval.analysis`) and a challenge submission service
(:mod:`spkeval.service`, :mod:`spkeval.httpapi`).
"""

from .errors import (
    ConfigurationError,
    ParseError,
    UndefinedMetricError,
    ValidationError,
)
from .timeline import Timeline
from .rttm import Annotation, Turn, collar_exclusion, parse_rttm, write_rttm
from .trials import (
    CoverageError,
    JoinReport,
    ScoreRecord,
    ScoredTrial,
    TrialPair,
    join_scores,
    parse_score_file,
    parse_trial_list,
    write_score_file,
    write_trial_list,
)
from .verification import (
    DcfParams,
    DcfResult,
    DetPoint,
    ErrorProfile,
    OperatingPoint,
    dcf,
    det_csv,
    det_points,
    eer,
    error_profile,
    min_dcf,
)
from .diarization import (
    CorpusResult,
    DerBreakdown,
    FileResult,
    JerBreakdown,
    OverlapMatrix,
    SpeakerMapping,
    corpus_csv,
    der,
    der_corpus,
    evaluate_corpus,
    format_corpus_report,
    hungarian_assignment,
    jer,
    overlap_matrix,
)
from .analysis import (
    ConfidenceInterval,
    CiWidthStats,
    MetadataTable,
    ProgressionRow,
    Slice,
    SliceResult,
    TrialMetadata,
    UtteranceInfo,
    all_trials,
    bootstrap_ci,
    ci_width_stats,
    format_progression_table,
    format_slice_table,
    min_duration,
    pair_kind_in,
    parse_slice_spec,
    progression_csv,
    progression_table,
    same_gender,
    same_language,
    slice_csv,
    slice_eval,
)

__version__ = "0.1.0"

__all__ = [
    "Annotation",
    "CiWidthStats",
    "ConfidenceInterval",
    "ConfigurationError",
    "CorpusResult",
    "CoverageError",
    "DcfParams",
    "DcfResult",
    "DerBreakdown",
    "DetPoint",
    "ErrorProfile",
    "FileResult",
    "JerBreakdown",
    "JoinReport",
    "MetadataTable",
    "OperatingPoint",
    "OverlapMatrix",
    "ParseError",
    "ProgressionRow",
    "ScoreRecord",
    "ScoredTrial",
    "Slice",
    "SliceResult",
    "SpeakerMapping",
    "Timeline",
    "TrialMetadata",
    "TrialPair",
    "Turn",
    "UndefinedMetricError",
    "UtteranceInfo",
    "ValidationError",
    "all_trials",
    "bootstrap_ci",
    "ci_width_stats",
    "collar_exclusion",
    "corpus_csv",
    "dcf",
    "der",
    "der_corpus",
    "det_csv",
    "det_points",
    "eer",
    "error_profile",
    "evaluate_corpus",
    "format_corpus_report",
    "format_progression_table",
    "format_slice_table",
    "hungarian_assignment",
    "jer",
    "join_scores",
    "min_dcf",
    "min_duration",
    "overlap_matrix",
    "pair_kind_in",
    "parse_rttm",
    "parse_score_file",
    "parse_slice_spec",
    "parse_trial_list",
    "progression_csv",
    "progression_table",
    "same_gender",
    "same_language",
    "slice_csv",
    "slice_eval",
    "write_rttm",
    "write_score_file",
    "write_trial_list",
]
