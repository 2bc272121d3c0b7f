"""taxelkit: gesture recognition toolkit for two-section taxel-grid skins.

Subpackages and modules:
    core       domain types, sensor geometry, datasets, participant splits
    pipeline   preprocessing and the five feature extractors
    learn      from-scratch MLP / LSTM / CNN / random-forest classifiers
    sensorsim  taxel physics, gesture synthesis, indentation characterization
    stream     binary frame protocol, servers, online segmentation, live client
    cli        command-line workflow (synth / train / eval / ablate / ...)
"""

from .core import (
    ADC_MAX,
    DEFAULT_LAYOUT,
    N_TAXELS,
    ConfigurationError,
    Dataset,
    GestureClass,
    GestureRecording,
    GridSection,
    SensorLayout,
    TaxelFrame,
    load_dataset,
    save_dataset,
    split_by_participant,
    train_val_split,
)
from .pipeline import (
    DEFAULT_PIPELINE_CONFIG,
    FeatureKind,
    FeatureMatrix,
    FeatureVector,
    NoContactError,
    PipelineConfig,
    extract_feature,
    extract_matrix,
)

__version__ = "0.1.0"

__all__ = [
    "ADC_MAX",
    "ConfigurationError",
    "DEFAULT_LAYOUT",
    "DEFAULT_PIPELINE_CONFIG",
    "Dataset",
    "FeatureKind",
    "FeatureMatrix",
    "FeatureVector",
    "GestureClass",
    "GestureRecording",
    "GridSection",
    "N_TAXELS",
    "NoContactError",
    "PipelineConfig",
    "SensorLayout",
    "TaxelFrame",
    "__version__",
    "extract_feature",
    "extract_matrix",
    "load_dataset",
    "save_dataset",
    "split_by_participant",
    "train_val_split",
]
