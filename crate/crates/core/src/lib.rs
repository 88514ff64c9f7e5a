//! Finite-length security evaluation for BB84 key distribution with random
//! privacy amplification.
//!
//! The crate is organised bottom-up:
//!
//! * [`numerics`]: entropies, divergences, log-domain binomials, the
//!   hypergeometric law and the Gaussian distribution function.
//! * [`secbounds`]: the finite-length bounds on the eavesdropper's
//!   information (total and per key bit), the known-channel bound and the
//!   Markov conversion to a probabilistic guarantee.
//! * [`asymptotics`]: the normal-approximation limit, the slack solver for a
//!   target security level, the large-deviation exponent and the comparison
//!   bound it is measured against.
//! * [`gf2`]: packed GF(2) matrices, linear codes, coset decoding and random
//!   subcode sampling.
//! * [`oracles`]: exact small-scale audits of the coding and entropy lemmas
//!   the bounds rest on.
//! * [`protocol`]: a seeded Monte-Carlo simulation of the post-processing
//!   pipeline.
//!
//! ```
//! use finitekey::asymptotics::table_statistic;
//! use finitekey::numerics::gauss_cdf;
//!
//! let stat = table_statistic(10_000, 20_000, 1_500, 0.01).unwrap();
//! assert!((stat + 3.10).abs() < 5e-3);
//! assert!((gauss_cdf(stat).value() - 0.000968).abs() < 2e-6);
//! ```

pub mod asymptotics;
pub mod error;
pub mod gf2;
pub mod numerics;
pub mod oracles;
pub mod protocol;
pub mod secbounds;

pub use error::{Error, Result};
pub use numerics::{LogWeight, Probability};
pub use secbounds::{BoundReport, ProtocolParams, SlackSchedule};

// The guide's code listings compile and run as doc-tests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/intro.md")]
    mod intro {}
    #[doc = include_str!("../../../book/src/numerics.md")]
    mod numerics {}
    #[doc = include_str!("../../../book/src/bounds.md")]
    mod bounds {}
    #[doc = include_str!("../../../book/src/asymptotics.md")]
    mod asymptotics {}
    #[doc = include_str!("../../../book/src/codes.md")]
    mod codes {}
    #[doc = include_str!("../../../book/src/audits.md")]
    mod audits {}
    #[doc = include_str!("../../../book/src/simulation.md")]
    mod simulation {}
}
