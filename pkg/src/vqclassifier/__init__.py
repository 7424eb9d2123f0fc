"""Variational quantum classifier toolkit.

Amplitude-encodes fixed embedding vectors into qubit states on a dense
statevector simulator, pushes them through trainable entangling layers,
classifies the per-qubit Pauli-Z readout with a softmax head, and explains
predictions with Shapley values clustered into dendrograms.
"""

from .ansatz import AnsatzConfig, AnsatzParams, apply_entangling_layer, circuit_forward, init_params
from .data import Dataset, LabeledExample, load_csv, stats, synthesize, write_csv
from .encoding import EncodingConfig, amplitude_encode, normalize, pad_features
from .errors import (
    CapacityError,
    CheckpointError,
    DegenerateInputError,
    EncodingError,
    ParseError,
    ShapeError,
)
from .explain import (
    AttributionReport,
    AttributionRequest,
    FeatureGroup,
    attribute,
    cluster_dendrogram,
    equal_blocks,
    export_report,
    mean_baseline,
    shapley_exact,
    shapley_sampled,
)
from .gradients import CircuitJacobian, finite_diff_jacobian, parameter_shift_jacobian
from .model import (
    AdamState,
    EvalReport,
    HybridModel,
    MlpHead,
    TrainConfig,
    adam_step,
    build_model,
    cross_entropy,
    evaluate,
    head_forward,
    hybrid_forward,
    init_head,
    load_checkpoint,
    loss_gradients,
    mcc,
    predict,
    save_checkpoint,
    train,
)
from .seeding import derive_seed
from .statevector import (
    MAX_QUBITS,
    QuantumState,
    apply_cnot,
    apply_rotation,
    expect_z,
    load_amplitudes,
    zero_state,
)

__version__ = "0.1.0"
