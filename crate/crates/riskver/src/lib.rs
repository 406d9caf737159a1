//! Risk verification for closed-loop stochastic control systems.
//!
//! The library estimates, from Monte Carlo rollouts, how severely a system
//! violates a constraint function or a signal temporal logic (STL)
//! specification, expressed as value-at-risk or conditional value-at-risk of
//! the robustness cost, together with finite-sample high-confidence upper
//! bounds. It also bounds how much that risk can grow when the system is
//! perturbed (the risk verification gap), using Lipschitz trajectory-error
//! schedules, incremental input-to-state stability gains, or empirical
//! trace-difference distributions from paired common-random-number rollouts.
//!
//! Modules:
//! - [`stl`]: formulas, predicates, traces, Boolean and quantitative semantics.
//! - [`risk`]: sample sets, VaR/CVaR estimators and concentration bounds.
//! - [`gap`]: trajectory-error bounds and gap certificates.
//! - [`sim`]: case-study systems, controllers, and the seeded trial engine.
//! - [`cli`]: batch experiment orchestration and CSV reports.

pub mod cli;
pub mod gap;
pub mod risk;
pub mod sim;
pub mod stl;

mod fmt;

pub use fmt::format_sig6;
