//! Sums of Niven numbers: digit-string arithmetic, the number theory and
//! sumset tools behind explicit decompositions, a certificate format with an
//! independent verifier, and exhaustive range experiments.

pub mod decomposer;
pub mod digits;
pub mod numtheory;
pub mod rangelab;
pub mod selftest;
pub mod sumsets;

pub use decomposer::{
    decompose, decompose_part, is_in_s, lift, sample_s, split, verify_cert, DecompositionCert,
    Method, Mode, PipelineError, Provenance, SClassParams, Verdict,
};
pub use digits::{is_zuckerman, DigitError, DigitString};
pub use numtheory::{find_prime_triple, PrimeTriple, SquareDecomposition};
pub use rangelab::{count_niven, estimate_density_s, verify_range, Kind, RangeConfig, SieveReport};
pub use sumsets::{h_subset_sum, SubsetWitness};
