"""Deep Q-learning pulse-sequence design for singlet-triplet qubit state preparation."""

from .agent import (
    AgentConfig,
    EpsilonSchedule,
    ExperienceUnit,
    ReplayMemory,
    advance_epsilon,
    compute_targets,
    select_action,
    train_step,
)
from .config import RunConfig, default_single_qubit, default_two_qubit, load_config
from .dataset import (
    StateDataset,
    TaskPair,
    build_dataset,
    build_pairs,
    gen_bloch_states,
    gen_hypersphere_states,
    load_dataset,
    save_dataset,
)
from .env import EpisodeRecord, StepOutcome, encode, env_step, rollout_batch, run_episode
from .errors import ConfigError, DataFormatError, NumericalError
from .hamiltonians import (
    ActionTable,
    NoiseSample,
    SingleQubitControls,
    TwoQubitControls,
    action_table_single,
    action_table_two,
    sample_noise,
    single_qubit_hamiltonian,
    two_qubit_hamiltonian,
    zero_noise,
)
from .harness import (
    Checkpoint,
    MetricsRow,
    evaluate,
    export_trajectory,
    load_checkpoint,
    noise_sweep,
    save_checkpoint,
    table2_suite,
    train,
)
from .linalg import (
    evolve,
    fidelity,
    hermitian_exp,
    pure_to_density,
    sqrtm_psd,
    tensor,
)
from .network import (
    GradientSet,
    MlpNetwork,
    SgdConfig,
    apply_gradients,
    copy_parameters,
    forward,
    init_network,
    loss_and_gradients,
)
from .povm import PovmSet, measure, pauli4_single, reconstruct, tensor_povm

__version__ = "0.1.0"
