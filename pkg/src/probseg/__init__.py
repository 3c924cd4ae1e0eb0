"""Overlapping-slice PET/CT tumor segmentation toolkit."""

__version__ = "0.1.0"

from .metrics import (EPSILON_SMOOTH, SweepConfig, cohort_report, dsc_slice,
                      patient_mean_dsc, precision_recall, sweep)
from .model import (ModelConfig, ModelParams, backward, build_model, forward,
                    get_params, load_checkpoint, loss, save_checkpoint,
                    set_params)
from .phantom import (PhantomSpec, bone_leak_phantom_spec,
                      bridging_phantom_spec, default_phantom_spec,
                      generate_phantom, random_phantom_spec)
from .pipeline import PipelineConfig, desk_profile, paper_profile, run_all
from .reconstruct import (ProbSequence, ProbVolume, ensemble,
                          extract_contours, prediction_counts, reconstruct,
                          threshold)
from .roi import QcPolicy, RoiResult, RoiStatus, auto_roi, preprocess
from .sequences import (SelectionPolicy, SliceSequence, extract_sequences,
                        make_folds, select_test, select_training)
from .training import TrainConfig, train, validation_dsc
from .volume import (Modality, PatientMeta, PatientRecord, Plane, Volume3D,
                     n_slices, read_bundle, slice_volume, volume_from_slices,
                     write_bundle)

__all__ = [
    "__version__",
    "EPSILON_SMOOTH", "SweepConfig", "cohort_report", "dsc_slice",
    "patient_mean_dsc", "precision_recall", "sweep",
    "ModelConfig", "ModelParams", "backward", "build_model", "forward",
    "get_params", "load_checkpoint", "loss", "save_checkpoint", "set_params",
    "PhantomSpec", "bone_leak_phantom_spec", "bridging_phantom_spec",
    "default_phantom_spec", "generate_phantom", "random_phantom_spec",
    "PipelineConfig", "desk_profile", "paper_profile", "run_all",
    "ProbSequence", "ProbVolume", "ensemble", "extract_contours",
    "prediction_counts", "reconstruct", "threshold",
    "QcPolicy", "RoiResult", "RoiStatus", "auto_roi", "preprocess",
    "SelectionPolicy", "SliceSequence", "extract_sequences", "make_folds",
    "select_test", "select_training",
    "TrainConfig", "train", "validation_dsc",
    "Modality", "PatientMeta", "PatientRecord", "Plane", "Volume3D",
    "n_slices", "read_bundle", "slice_volume", "volume_from_slices",
    "write_bundle",
]
