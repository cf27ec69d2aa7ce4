//! Spectral-geometric data of periodic Zakharov-Shabat operators and comb
//! conformal mappings.
//!
//! The operator side starts from a real 1-periodic potential
//! V = [[V1, V2], [V2, -V1]] and the system J ψ' + V ψ = z ψ, ψ(0, z) = I.
//! From the Lyapunov function Δ(z) = ½ Tr ψ(1, z) the crate locates spectral
//! bands and gaps (Δ(z_n^±) = (-1)^n), slit heights cosh h_n = (-1)^n Δ(z_n),
//! the imaginary part v = Im k of the quasimomentum (cos k = Δ) on gaps,
//! action variables A_n = (2/π)∫_{g_n} v, effective masses μ_n^± and the
//! moments Q_0 = (1/π)∫_ℝ v and I_D = 2 Q_0.
//!
//! The comb side is operator-free: the single-slit map √((k-u₀)² + h₀²), a
//! fixed-point reconstruction of v from gap endpoints via
//! v = v_n (1 + Y_n[v]), greedy slit selection, analytic capacity of real
//! segment unions (Ivanov-Pommerenke, C(E) = |E|/4, with the explicit
//! extremal function) and Lindelöf monotonicity checks.
//!
//! [`audit`] evaluates weighted ℓ^p norms of the computed sequences
//! (gap lengths, heights, actions, masses) and checks a catalog of identities
//! and two-sided inequalities between them, reporting per-link margins.
//!
//! All operations are pure functions of their inputs and are safe to call
//! concurrently; nothing in the crate holds shared mutable state.

pub mod audit;
pub mod bands;
pub mod capacity;
pub mod comb;
pub mod norms;
pub mod operator;
pub mod potential;
pub mod profile;
pub mod quad;
pub mod quasimomentum;
pub mod roots;

pub use bands::{find_band_edges, compute_heights, BandOptions, GapRecord, SpectralSummary};
pub use capacity::{capacity_segments, AhlforsFunction, CapacityResult};
pub use comb::{greedy_select, lindelof_check, single_slit_map, Comb, CombSlit};
pub use norms::{weighted_norm, PExp, Weight};
pub use operator::{integrate_monodromy, MonodromyResult};
pub use potential::PotentialSpec;
pub use profile::{solve_gap_profile, GapConfiguration, GapProfile, ProfileOptions};
pub use quasimomentum::{compute_actions, gap_v, ActionRecord, MomentSummary};
