"""Power-limited qubit channels: swap-Hamiltonian transfer, energy accounting and capacity laws."""
from .capacity import (
    CapacityPoint,
    beta,
    capacity_bosonic_ref,
    capacity_entangled,
    capacity_single,
    capacity_unentangled,
    capacity_sweep,
)
from .energetics import (
    average_overlap,
    expectation_energy,
    ml_bound,
    orthogonality_time,
    swap_energy_closed_form,
)
from .operators import (
    BlockSwap,
    DenseHamiltonian,
    SwapHamiltonian,
    apply_block_swap,
    dense_matrix_of,
    evolve_dense,
    evolve_swap,
    evolve_swap_hamiltonian,
    spin_chain_hamiltonian,
)
from .protocols import (
    ChannelConfig,
    run_chain_relay,
    run_decoherence_trials,
    run_entangled_transfer,
    run_spin_wave,
    run_unentangled_transfer,
)
from .statevec import (
    MixedState,
    PureState,
    RegisterLayout,
    basis_state,
    entanglement_entropy,
    haar_random,
    inner,
    partial_trace,
    tensor,
)

__version__ = "0.1.0"
