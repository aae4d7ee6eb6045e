//! Exact decoherence of three central spin qubits coupled to a
//! transverse-field XY spin chain.
//!
//! The chain sees a dressed transverse field `λ_j` that depends on the
//! collective `σ^z` eigenstate `|j⟩` of the three qubits. The off-diagonal
//! elements of the qubits' reduced density matrix are damped by the
//! coherence factor `|F(t)|`, the modulus of the overlap between chain
//! states evolved under two dressed Hamiltonians. Because the chain is a
//! free-fermion model the overlap factorises over momentum pairs
//! `(k, -k)` and has a closed form per mode.
//!
//! - [`spectrum`]: momentum grid, dressed fields, dispersion and Bogoliubov angles.
//! - [`coherence`]: closed-form `|F(t)|`, time series, sweeps and the near-critical scaling rule.
//! - [`oracle`]: brute-force per-mode 4×4 propagation used to check the closed form.
//! - [`qstate`]: reduced three-qubit density matrix and entanglement measures.

pub mod coherence;
pub mod error;
pub mod oracle;
pub mod qstate;
pub mod spectrum;

pub use coherence::{
    apply_scaling, coherence_factor, coherence_series, mode_factor, scaling_comparison, scaling_residual, size_scan,
    sweep, CoherenceSeries, LinearRange, PairSelector, PairSpectrum, ScalingComparison, ScalingMode, ScalingRule,
    SweepAxis, SweepGrid,
};
pub use error::{Error, Result};
pub use oracle::{oracle_coherence, OracleEcho};
pub use spectrum::{mode_data, momentum_grid, shifted_lambda, BasisIndex, ChainParams, InitialChainState, ModeData};
